"""Independent RK4 oracle for the comparison Riccati curves.

Integrates f' = -f^2 - K(r) with K = -1 + 2*A1/r (lower curve, f(r0) = 0) and
K = -1 - 2*B1/r (upper curve, f(r0) = u0) by fixed-step RK4, prints values at
checkpoints, the exact tanh/coth closed forms for A1 = B1 = 0, and the
second-order asymptotic coefficients -A1(1+A1)/2 and +B1(1-B1)/2 extracted
from the numerics.  Frozen into tests as the oracle for solve_riccati_bound.

Run: python3 scripts/oracle_riccati.py
"""

import math


def rk4(kfun, r0, y0, r1, step=1e-4):
    r, y = r0, y0
    nsteps = int(round((r1 - r0) / step))
    h = (r1 - r0) / nsteps
    for _ in range(nsteps):
        k1 = -y * y - kfun(r)
        k2 = -(y + h / 2 * k1) ** 2 - kfun(r + h / 2)
        k3 = -(y + h / 2 * k2) ** 2 - kfun(r + h / 2)
        k4 = -(y + h * k3) ** 2 - kfun(r + h)
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        r += h
    return y


def main():
    # closed forms at A1 = B1 = 0
    r0, u0 = 1.0, 2.0
    f1_10 = rk4(lambda r: -1.0, r0, 0.0, 10.0)
    f2_10 = rk4(lambda r: -1.0, r0, u0, 10.0)
    c0 = 0.5 * math.log((u0 + 1.0) / (u0 - 1.0))
    print(f"A1=B1=0: f1(10)={f1_10:.17g} tanh(9)={math.tanh(9.0):.17g} diff={abs(f1_10 - math.tanh(9.0)):.2e}")
    print(f"A1=B1=0: f2(10)={f2_10:.17g} coth(9+c0)={1.0 / math.tanh(9.0 + c0):.17g} "
          f"diff={abs(f2_10 - 1.0 / math.tanh(9.0 + c0)):.2e}")

    # decaying-curvature case from the spec example
    a1 = 0.5
    f1_100 = rk4(lambda r: -1.0 + 2.0 * a1 / r, 1.0, 0.0, 100.0)
    print(f"A1=0.5 r0=1: f1(100)={f1_100:.17g}  (1 - A1/100 = {1.0 - a1 / 100.0})")

    # second-order coefficient via Richardson on r^2 (f - 1 + A1/r)
    for rr in (200.0, 400.0):
        v = rk4(lambda r: -1.0 + 2.0 * a1 / r, 1.0, 0.0, rr)
        print(f"  r={rr:.0f}: r^2(f1 - 1 + A1/r) = {rr * rr * (v - 1.0 + a1 / rr):.10f}"
              f"   predicted -A1(1+A1)/2 = {-a1 * (1 + a1) / 2:.10f}")
    b1h = 0.7
    for rr in (200.0, 400.0):
        v = rk4(lambda r: -1.0 - 2.0 * b1h / r, 1.0, u0, rr)
        print(f"  r={rr:.0f}: r^2(f2 - 1 - B1/r) = {rr * rr * (v - 1.0 - b1h / rr):.10f}"
              f"   predicted +B1(1-B1)/2 = {b1h * (1 - b1h) / 2:.10f}")


if __name__ == "__main__":
    main()
