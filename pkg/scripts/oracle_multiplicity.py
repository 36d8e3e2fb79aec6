"""Brute-force oracle for sphere eigenvalue multiplicities.

Counts homogeneous harmonic polynomials of degree j in n variables directly:
build the monomial basis of degree j, assemble the Laplacian as a linear map
into degree j-2 monomials, and take dim ker = dim - rank.  This is the
multiplicity of the eigenvalue j(j+n-2) on S^{n-1}.  No combinatorial
identities are used, so the table below is an independent check of the
closed form C(n+j-1, j) - C(n+j-3, j-2).

Run: python3 scripts/oracle_multiplicity.py
"""

import itertools

import numpy as np


def monomials(n, j):
    """All exponent tuples of total degree j in n variables."""
    if n == 1:
        return [(j,)]
    out = []
    for first in range(j + 1):
        out.extend((first,) + rest for rest in monomials(n - 1, j - first))
    return out


def harmonic_dim(n, j):
    basis = monomials(n, j)
    if j < 2:
        return len(basis)
    target = monomials(n, j - 2)
    index = {m: i for i, m in enumerate(target)}
    lap = np.zeros((len(target), len(basis)))
    for col, mono in enumerate(basis):
        for axis, e in enumerate(mono):
            if e >= 2:
                lowered = list(mono)
                lowered[axis] -= 2
                lap[index[tuple(lowered)], col] += e * (e - 1)
    return len(basis) - np.linalg.matrix_rank(lap)


def main():
    print("n  j  dim(harmonic)  eigenvalue j(j+n-2)")
    for n in range(2, 6):
        row = []
        for j in range(7):
            row.append(harmonic_dim(n, j))
        print(f"n={n}: {row}")


if __name__ == "__main__":
    main()
