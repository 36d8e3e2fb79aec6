"""Independent shooting oracle for the flat-ball Dirichlet radius.

Integrates h'' + (n-1)/r h' + b h = 0 (regular at 0) with a hand-rolled
fixed-step RK4 from a power-series start and locates the first zero of h by
bisection + Newton on the integrated derivative.  No scipy, no Bessel
functions: values printed here are frozen into the test suite as oracles for
disk_eigenfunction, which uses the closed Bessel form.

Run: python3 scripts/oracle_ball_shooting.py
"""

import math


def series_start(n: int, b: float, r: float, terms: int = 12):
    """h = sum a_m r^{2m} with a_{m+1} = -b a_m / ((2m+2)(2m+n))."""
    a = 1.0
    h = 0.0
    hp = 0.0
    for m in range(terms):
        h += a * r ** (2 * m)
        if m > 0:
            hp += 2 * m * a * r ** (2 * m - 1)
        a = -b * a / ((2 * m + 2) * (2 * m + n))
    return h, hp


def rhs(n: int, b: float, r: float, h: float, hp: float):
    return hp, -(n - 1) / r * hp - b * h


def rk4_to_first_zero(n: int, b: float, step: float = 2e-4):
    r = 1e-3
    h, hp = series_start(n, b, r)
    prev = (r, h, hp)
    while h > 0:
        prev = (r, h, hp)
        k1 = rhs(n, b, r, h, hp)
        k2 = rhs(n, b, r + step / 2, h + step / 2 * k1[0], hp + step / 2 * k1[1])
        k3 = rhs(n, b, r + step / 2, h + step / 2 * k2[0], hp + step / 2 * k2[1])
        k4 = rhs(n, b, r + step, h + step * k3[0], hp + step * k3[1])
        h += step / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        hp += step / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        r += step
    # Newton from the bracketing step using the ODE flow itself
    r0, h0, hp0 = prev
    for _ in range(60):
        # integrate one micro-step toward the zero estimate
        dr = -h0 / hp0
        sub = 16
        micro = dr / sub
        for _ in range(sub):
            k1 = rhs(n, b, r0, h0, hp0)
            k2 = rhs(n, b, r0 + micro / 2, h0 + micro / 2 * k1[0], hp0 + micro / 2 * k1[1])
            k3 = rhs(n, b, r0 + micro / 2, h0 + micro / 2 * k2[0], hp0 + micro / 2 * k2[1])
            k4 = rhs(n, b, r0 + micro, h0 + micro * k3[0], hp0 + micro * k3[1])
            h0 += micro / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            hp0 += micro / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            r0 += micro
        if abs(dr) < 1e-14:
            break
    return r0


def main():
    print("first zero r1 of the regular solution at b_n = (n-1)^2/4 + 1")
    for n in (2, 3, 4, 5):
        b = 0.25 * (n - 1) ** 2 + 1.0
        r1 = rk4_to_first_zero(n, b)
        line = f"n={n}  b_n={b:.4f}  r1={r1:.17g}"
        if n == 3:
            line += f"   pi/sqrt(2)={math.pi / math.sqrt(2):.17g}  diff={abs(r1 - math.pi / math.sqrt(2)):.2e}"
        print(line)


if __name__ == "__main__":
    main()
