"""Reference computations that share no code with the package.

Everything here is plain Python on lists of ints, sized for tiny inputs.
"""

from __future__ import annotations

from itertools import combinations
from math import gcd


def det(m: list[list[int]]) -> int:
    """Bareiss fraction-free determinant."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def group_invariants(ngens: int, rels: list[list[int]]) -> tuple[int, tuple[int, ...]]:
    """Z^ngens / rowspan(rels): (free rank, torsion orders > 1)."""
    rows = [r for r in rels if any(r)]
    if min(len(rows), ngens) > 4:
        return diagonal_invariants(ngens, rows)
    return divisor_invariants(ngens, rows)


def diagonal_invariants(ngens: int, rows: list[list[int]]) -> tuple[int, tuple[int, ...]]:
    """Diagonalize by row and column operations, then fix divisibility with gcds."""
    a = [r[:] for r in rows if any(r)]
    diag = []
    while a and any(any(r) for r in a):
        # pivot: entry of least absolute value
        i, j = min(((i, j) for i, r in enumerate(a) for j, v in enumerate(r) if v), key=lambda ij: abs(a[ij[0]][ij[1]]))
        a[0], a[i] = a[i], a[0]
        for r in a:
            r[0], r[j] = r[j], r[0]
        p = a[0][0]
        clean = True
        for r in a[1:]:
            q = r[0] // p
            if q:
                for k in range(len(r)):
                    r[k] -= q * a[0][k]
            clean &= r[0] == 0
        for k in range(1, len(a[0])):
            q = a[0][k] // p
            if q:
                for r in a:
                    r[k] -= q * r[0]
            clean &= a[0][k] == 0
        if clean:
            diag.append(abs(p))
            a = [r[1:] for r in a[1:]]
            a = [r for r in a if any(r)]
    # Z/a + Z/b = Z/gcd + Z/lcm
    diag.sort()
    changed = True
    while changed:
        changed = False
        for x in range(len(diag)):
            for y in range(x + 1, len(diag)):
                g = gcd(diag[x], diag[y])
                if g != diag[x]:
                    diag[x], diag[y] = g, diag[x] * diag[y] // g
                    changed = True
        diag.sort()
    return ngens - len(diag), tuple(d for d in diag if d != 1)


def divisor_invariants(ngens: int, rows: list[list[int]]) -> tuple[int, tuple[int, ...]]:
    """Determinantal divisors d_k = gcd of k x k minors; exponential, tiny inputs only."""
    divisors = [1]
    for k in range(1, min(len(rows), ngens) + 1):
        g = 0
        for rs in combinations(range(len(rows)), k):
            for cs in combinations(range(ngens), k):
                g = gcd(g, det([[rows[i][j] for j in cs] for i in rs]))
        if g == 0:
            break
        divisors.append(g)
    rank = len(divisors) - 1
    factors = [divisors[i] // divisors[i - 1] for i in range(1, len(divisors))]
    return ngens - rank, tuple(f for f in factors if f != 1)


def fp_rank(rows: list[list[int]], p: int) -> int:
    a = [[x % p for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(a[0]) if a else 0
    while rank < len(a) and col < ncols:
        piv = next((i for i in range(rank, len(a)) if a[i][col]), None)
        if piv is None:
            col += 1
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][col], -1, p)
        a[rank] = [x * inv % p for x in a[rank]]
        for i in range(len(a)):
            if i != rank and a[i][col]:
                c = a[i][col]
                a[i] = [(x - c * y) % p for x, y in zip(a[i], a[rank])]
        rank += 1
        col += 1
    return rank


def periodic_hh_dual_numbers(p: int, degrees: range) -> dict[int, int]:
    """dim HH_n(F_p[x]/x^2) from the 2-periodic complex A <-0- A <-2x- A <-0- ...

    The differential out of degree n is 0 for n odd and multiplication by 2x
    for n even and positive.
    """

    def d(n: int) -> list[list[int]]:
        # matrix on the basis (1, x), rows = images of basis vectors
        if n <= 0:
            return [[0, 0], [0, 0]]
        if n % 2 == 1:
            return [[0, 0], [0, 0]]
        return [[0, 2], [0, 0]]  # 1 -> 2x, x -> 0

    out = {}
    for n in degrees:
        ker = 2 - fp_rank(d(n), p)
        img = fp_rank(d(n + 1), p)
        out[n] = ker - img
    return out


def structure(names: list[str], products: dict[tuple[str, str], dict[str, int]]):
    """Multiplication table as a function on coefficient vectors."""
    idx = {n: i for i, n in enumerate(names)}
    d = len(names)

    def mul(x: list[int], y: list[int]) -> list[int]:
        out = [0] * d
        for a, ca in enumerate(x):
            for b, cb in enumerate(y):
                if ca and cb:
                    for t, c in products.get((names[a], names[b]), {}).items():
                        out[idx[t]] += ca * cb * c
        return out

    return mul


def basis(d: int, i: int) -> list[int]:
    return [1 if k == i else 0 for k in range(d)]


def twisted_hh0(d: int, mul, g, p: int | None) -> tuple:
    """A / span{ab - g(b) a}; dimension over F_p or invariants over Z."""
    rels = []
    for i in range(d):
        for j in range(d):
            a, b = basis(d, i), basis(d, j)
            ab = mul(a, b)
            gba = mul(g(b), a)
            rels.append([u - v for u, v in zip(ab, gba)])
    if p is None:
        return group_invariants(d, rels)
    return d - fp_rank(rels, p)


BURNSIDE = {
    # top basis (1, t) with t the free orbit, bottom basis (e,)
    "top_mul": {(0, 0): [1, 0], (0, 1): [0, 1], (1, 0): [0, 1], (1, 1): [0, 2]},
    "res": {0: [1], 1: [2]},
    "tr": {0: [0, 1]},
    "unit": [1, 0],
}


def complex_homology(dims: dict[int, int], d: dict[int, list[list[int]]]) -> dict[int, tuple]:
    """Integral homology; d[n] lists the image of each generator of C_n as a row over C_{n-1}."""
    out = {}
    for n in sorted(dims):
        cn = dims[n]
        dn = d.get(n) or []
        ker = _integer_kernel(dn, cn) if dn and dims.get(n - 1, 0) else [basis(cn, i) for i in range(cn)]
        dn1 = d.get(n + 1) or []
        out[n] = group_invariants(len(ker), [_in_basis(r, ker) for r in dn1] if ker else [])
    return out


def complex_dims_fp(dims: dict[int, int], d: dict[int, list[list[int]]], p: int) -> dict[int, int]:
    out = {}
    for n in sorted(dims):
        dn, dn1 = d.get(n) or [], d.get(n + 1) or []
        out[n] = dims[n] - (fp_rank(dn, p) if dn else 0) - (fp_rank(dn1, p) if dn1 else 0)
    return out


def simplicial_homology(cells: dict[int, list[str]], faces: dict[str, list[str]]) -> dict[int, tuple]:
    """Integral homology of a semi-simplicial set given by nondegenerate faces only.

    Valid when every face of a nondegenerate cell is nondegenerate.
    """
    top = max(cells)
    dims = {n: len(cells.get(n, [])) for n in range(top + 1)}
    d = {}
    for n in range(1, top + 1):
        rows = []
        for c in cells.get(n, []):
            row = [0] * dims[n - 1]
            for i, f in enumerate(faces[c]):
                row[cells[n - 1].index(f)] += (-1) ** i
            rows.append(row)
        d[n] = rows
    return complex_homology(dims, d)


def _integer_kernel(rows: list[list[int]], n: int) -> list[list[int]]:
    """Basis of {x in Z^n : sum_i x_i rows[i] = 0} by unimodular column reduction."""
    m = len(rows[0]) if rows else 0
    # columns of A are rows[i]; reduce A (m x n) with unimodular U on the right
    a = [[rows[i][j] for i in range(n)] for j in range(m)]
    u = [basis(n, i) for i in range(n)]  # u[k] = column k of U
    piv_col = 0
    for r in range(m):
        while True:
            nz = [k for k in range(piv_col, n) if a[r][k]]
            if not nz:
                break
            k = min(nz, key=lambda k: abs(a[r][k]))
            for row in a:
                row[piv_col], row[k] = row[k], row[piv_col]
            u[piv_col], u[k] = u[k], u[piv_col]
            done = True
            for k2 in range(piv_col + 1, n):
                if a[r][k2]:
                    q = a[r][k2] // a[r][piv_col]
                    for row in a:
                        row[k2] -= q * row[piv_col]
                    u[k2] = [x - q * y for x, y in zip(u[k2], u[piv_col])]
                    if a[r][k2]:
                        done = False
            if done:
                piv_col += 1
                break
    return u[piv_col:]


def _in_basis(v: list[int], ker: list[list[int]]) -> list[int]:
    """Coordinates of v in a lattice basis ker (exact, small sizes)."""
    from fractions import Fraction

    k = len(ker)
    n = len(v)
    # solve sum c_i ker_i = v by Gaussian elimination over Q
    a = [[Fraction(ker[i][j]) for i in range(k)] + [Fraction(v[j])] for j in range(n)]
    row = 0
    pivots = []
    for col in range(k):
        piv = next((i for i in range(row, n) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        pv = a[row][col]
        a[row] = [x / pv for x in a[row]]
        for i in range(n):
            if i != row and a[i][col] != 0:
                c = a[i][col]
                a[i] = [x - c * y for x, y in zip(a[i], a[row])]
        pivots.append(col)
        row += 1
    out = [0] * k
    for r, col in enumerate(pivots):
        x = a[r][k]
        assert x.denominator == 1
        out[col] = int(x)
    return out
