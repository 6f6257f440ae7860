"""Exact linear algebra over Z and the other supported rings.

Smith and Hermite normal forms, lattice membership, and right-inverse
solving.  Everything is computed with exact arbitrary-precision arithmetic;
no floating point anywhere.  Pivot selection is deterministic (smallest
nonzero norm, then row-major position) so every decomposition is
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch, UnsupportedRing
from .rings import (
    Integers,
    PolyOverPrimeField,
    ProductRing,
    Residue,
    Ring,
    RingElement,
    _pdivmod,
    _xgcd,
)


class IntMatrix:
    """Immutable integer matrix, row-major."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Sequence[Sequence[int]]):
        self.data = tuple(tuple(int(x) for x in row) for row in data)
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.data else 0
        if any(len(row) != self.cols for row in self.data):
            raise DimensionMismatch("ragged rows")

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.data == other.data

    def __hash__(self):
        return hash(self.data)

    def __repr__(self):
        return f"IntMatrix({[list(r) for r in self.data]})"

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        return IntMatrix(
            [
                [
                    sum(self.data[i][k] * other.data[k][j] for k in range(self.cols))
                    for j in range(other.cols)
                ]
                for i in range(self.rows)
            ]
        )

    def diagonal(self) -> list[int]:
        return [self.data[i][i] for i in range(min(self.rows, self.cols))]

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise DimensionMismatch("determinant of a non-square matrix")
        n = self.rows
        m = [list(r) for r in self.data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                for i in range(k + 1, n):
                    if m[i][k] != 0:
                        m[k], m[i] = m[i], m[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            prev = m[k][k]
        return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class SnfResult:
    """U @ A @ V == D with unimodular U, V and diagonal D, d1 | d2 | ..."""

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix


# ---------------------------------------------------------------------------
# generic Smith engine over a Euclidean domain
#
# The same elimination drives the integer facade and the polynomial case of
# solve_right_inverse; dom supplies is_zero / norm / divmod / arithmetic and
# the canonical-associate normalizer.


class _ZOps:
    zero = 0
    one = 1

    @staticmethod
    def is_zero(a):
        return a == 0

    @staticmethod
    def norm(a):
        return abs(a)

    @staticmethod
    def divmod(a, b):
        return divmod(a, b)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def canonical_unit(a):
        """Unit u with u*a canonical (non-negative)."""
        return -1 if a < 0 else 1

    @staticmethod
    def is_unit(a):
        return a in (1, -1)

    @staticmethod
    def inv_unit(a):
        return a  # 1 and -1 are self-inverse


class _PolyOps:
    def __init__(self, p: int):
        self.p = p
        self.zero = ()
        self.one = (1,)

    @staticmethod
    def is_zero(a):
        return a == ()

    @staticmethod
    def norm(a):
        return len(a)

    def divmod(self, a, b):
        return _pdivmod(self.p, a, b)

    def add(self, a, b):
        from .rings import _padd

        return _padd(self.p, a, b)

    def sub(self, a, b):
        from .rings import _padd, _pneg

        return _padd(self.p, a, _pneg(self.p, b))

    def mul(self, a, b):
        from .rings import _pmul

        return _pmul(self.p, a, b)

    def neg(self, a):
        from .rings import _pneg

        return _pneg(self.p, a)

    def canonical_unit(self, a):
        return (pow(a[-1], -1, self.p),)

    @staticmethod
    def is_unit(a):
        return len(a) == 1

    def inv_unit(self, a):
        return (pow(a[0], -1, self.p),)


def _smith_generic(A: list[list], ops) -> tuple[list[list], list[list], list[list]]:
    """Returns (U, D, V) with U*A*V = D diagonal, divisibility chain, canonical pivots."""
    m = len(A)
    n = len(A[0]) if A else 0
    D = [list(row) for row in A]
    U = [[ops.one if i == j else ops.zero for j in range(m)] for i in range(m)]
    V = [[ops.one if i == j else ops.zero for j in range(n)] for i in range(n)]

    def row_sub(mat, i, src, q, width):
        for j in range(width):
            mat[i][j] = ops.sub(mat[i][j], ops.mul(q, mat[src][j]))

    def col_sub(mat, j, src, q, height):
        for i in range(height):
            mat[i][j] = ops.sub(mat[i][j], ops.mul(q, mat[i][src]))

    def row_add(mat, i, src, width):
        for j in range(width):
            mat[i][j] = ops.add(mat[i][j], mat[src][j])

    for k in range(min(m, n)):
        while True:
            pivot = None
            for i in range(k, m):
                for j in range(k, n):
                    if not ops.is_zero(D[i][j]):
                        nm = ops.norm(D[i][j])
                        if pivot is None or nm < pivot[0]:
                            pivot = (nm, i, j)
            if pivot is None:
                break
            _, pi, pj = pivot
            if pi != k:
                D[k], D[pi] = D[pi], D[k]
                U[k], U[pi] = U[pi], U[k]
            if pj != k:
                for row in D:
                    row[k], row[pj] = row[pj], row[k]
                for row in V:
                    row[k], row[pj] = row[pj], row[k]
            clean = True
            for i in range(k + 1, m):
                if not ops.is_zero(D[i][k]):
                    q, r = ops.divmod(D[i][k], D[k][k])
                    row_sub(D, i, k, q, n)
                    row_sub(U, i, k, q, m)
                    if not ops.is_zero(r):
                        clean = False
            for j in range(k + 1, n):
                if not ops.is_zero(D[k][j]):
                    q, r = ops.divmod(D[k][j], D[k][k])
                    col_sub(D, j, k, q, m)
                    col_sub(V, j, k, q, n)
                    if not ops.is_zero(r):
                        clean = False
            if not clean:
                continue
            # column k and row k are clear; enforce the divisibility chain
            bad = None
            for i in range(k + 1, m):
                for j in range(k + 1, n):
                    if not ops.is_zero(ops.divmod(D[i][j], D[k][k])[1]):
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_add(D, k, bad, n)
            row_add(U, k, bad, m)
        # canonical associate on the diagonal
        if not ops.is_zero(D[k][k]):
            u = ops.canonical_unit(D[k][k])
            if u != ops.one:
                for j in range(n):
                    D[k][j] = ops.mul(u, D[k][j])
                for j in range(m):
                    U[k][j] = ops.mul(u, U[k][j])
    return U, D, V


def smith_normal_form(A: IntMatrix) -> SnfResult:
    """Smith normal form with transforms: U @ A @ V == D exactly.

    D is diagonal with d1 | d2 | ... and di >= 0; det(U), det(V) are +-1.
    Pivot selection: smallest nonzero absolute value, ties broken row-major.
    """
    U, D, V = _smith_generic([list(r) for r in A.data], _ZOps)
    return SnfResult(IntMatrix(U), IntMatrix(D), IntMatrix(V))


def hermite_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Row-style upper-echelon HNF: returns (H, U) with U @ A == H.

    Pivots are positive; entries above a pivot are reduced into [0, pivot).
    det(U) is +-1.
    """
    m, n = A.rows, A.cols
    H = [list(row) for row in A.data]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    r = 0
    for c in range(n):
        if r == m:
            break
        # gcd the column entries at or below r into row r
        pivot_found = False
        for i in range(r, m):
            if H[i][c] != 0:
                pivot_found = True
                break
        if not pivot_found:
            continue
        for i in range(r + 1, m):
            if H[i][c] == 0:
                continue
            a, b = H[r][c], H[i][c]
            g, s, t = _xgcd(a, b)
            # [[s, t], [-b/g, a/g]] has determinant +1
            p, q = -(b // g), a // g
            for j in range(n):
                H[r][j], H[i][j] = s * H[r][j] + t * H[i][j], p * H[r][j] + q * H[i][j]
            for j in range(m):
                U[r][j], U[i][j] = s * U[r][j] + t * U[i][j], p * U[r][j] + q * U[i][j]
        if H[r][c] == 0:
            continue
        if H[r][c] < 0:
            H[r] = [-x for x in H[r]]
            U[r] = [-x for x in U[r]]
        for i in range(r):
            q = H[i][c] // H[r][c]
            if q:
                for j in range(n):
                    H[i][j] -= q * H[r][j]
                for j in range(m):
                    U[i][j] -= q * U[r][j]
        r += 1
    return IntMatrix(H), IntMatrix(U)


def lattice_contains(basis: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    """True iff v is an integer combination of the basis vectors."""
    if not basis:
        return all(x == 0 for x in v)
    n = len(v)
    if any(len(b) != n for b in basis):
        raise DimensionMismatch("basis vectors and v must share one length")
    H, _ = hermite_normal_form(IntMatrix(basis))
    residual = [int(x) for x in v]
    for row in H.data:
        c = next((j for j, x in enumerate(row) if x != 0), None)
        if c is None:
            break
        if residual[c] % row[c] == 0:
            q = residual[c] // row[c]
            if q:
                residual = [x - q * y for x, y in zip(residual, row)]
    return all(x == 0 for x in residual)


# ---------------------------------------------------------------------------
# right inverses


def _right_inverse_euclidean(A: list[list], ops) -> list[list] | None:
    """Right inverse over a Euclidean domain via the Smith decomposition."""
    m = len(A)
    n = len(A[0])
    assert m <= n
    U, D, V = _smith_generic(A, ops)
    for i in range(m):
        if not ops.is_unit(D[i][i]):
            return None
    # B = V * E * U with E[i][i] the inverse unit of D[i][i]
    E = [[ops.zero] * m for _ in range(n)]
    for i in range(m):
        E[i][i] = ops.inv_unit(D[i][i])
    VE = [
        [
            _dot(ops, [V[i][k] for k in range(n)], [E[k][j] for k in range(n)])
            for j in range(m)
        ]
        for i in range(n)
    ]
    B = [
        [
            _dot(ops, [VE[i][k] for k in range(m)], [U[k][j] for k in range(m)])
            for j in range(m)
        ]
        for i in range(n)
    ]
    return B


def _dot(ops, xs, ys):
    acc = ops.zero
    for x, y in zip(xs, ys):
        acc = ops.add(acc, ops.mul(x, y))
    return acc


def solve_right_inverse(ring: Ring, A: Sequence[Sequence]) -> list[list[RingElement]] | None:
    """Exact right inverse: returns B with A @ B == I_m, or None if none exists.

    Over Z this goes through the Smith decomposition; over Z/n by solving
    [A | n*I] over the integers; over GF(p)[x] by the Smith decomposition
    over the polynomial ring; products are handled componentwise.
    """
    grid = [[ring.el(x).value for x in row] for row in A]
    m = len(grid)
    n = len(grid[0]) if grid else 0
    if m > n:
        raise DimensionMismatch(f"need m <= n, got {m}x{n}")

    if isinstance(ring, Integers):
        B = _right_inverse_euclidean(grid, _ZOps)
    elif isinstance(ring, Residue):  # includes PrimeField
        N = ring.modulus
        lifted = [row + [N if j == i else 0 for j in range(m)] for i, row in enumerate(grid)]
        BC = _right_inverse_euclidean(lifted, _ZOps)
        B = None if BC is None else [[BC[i][j] % N for j in range(m)] for i in range(n)]
    elif isinstance(ring, PolyOverPrimeField):
        B = _right_inverse_euclidean(grid, _PolyOps(ring.p))
    elif isinstance(ring, ProductRing):
        parts = []
        for idx, f in enumerate(ring.factors):
            comp = solve_right_inverse(f, [[RingElement(f, x[idx]) for x in row] for row in grid])
            if comp is None:
                return None
            parts.append(comp)
        B = [
            [tuple(parts[idx][i][j].value for idx in range(len(ring.factors))) for j in range(m)]
            for i in range(n)
        ]
    else:
        raise UnsupportedRing(f"solve_right_inverse over {ring.descriptor()}")

    if B is None:
        return None
    out = [[RingElement(ring, ring.canon(x)) for x in row] for row in B]
    # exact re-check: A @ B == I
    for i in range(m):
        for j in range(m):
            acc = ring.zero
            for k in range(n):
                acc = ring.add(acc, ring.mul(grid[i][k], out[k][j].value))
            expected = ring.one if i == j else ring.zero
            assert acc == expected, "right inverse failed its exactness re-check"
    return out
