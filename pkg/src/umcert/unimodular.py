"""Unimodular rows, right-invertible matrices, and elementary operations.

The certificate language: a Transcript is an ordered, replayable, invertible
sequence of elementary operations e_ij(lambda) = I + lambda*E_ij.  Convention,
fixed once and used everywhere:

* ``Right`` (column) op: right-multiply by e_ij(lambda), i.e. add
  lambda * (column i) to column j.  Acting matrix lives in E_n.
* ``Left`` (row) op: left-multiply by e_ij(lambda), i.e. add
  lambda * (row j) to row i.  Acting matrix lives in E_m.

Indices are 1-based, matching both the algebra and the wire format.

Rows carry an explicit Bezout witness and matrices an explicit right inverse;
applying an operation transports the witness by the inverse operation on the
other side, so validity is preserved exactly without re-solving.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    DimensionMismatch,
    IndexOutOfBounds,
    LeftOpOnRow,
    NotRightInvertible,
    NotUnimodular,
)
from .intlinalg import solve_right_inverse
from .rings import (
    Integers,
    PolyOverPrimeField,
    ProductRing,
    Residue,
    Ring,
    RingElement,
    bezout_witness,
)


@dataclass(frozen=True)
class ElementaryOp:
    """One generator e_ij(lambda), acting on the side given by ``side``."""

    side: str  # "L" or "R"
    i: int  # 1-based
    j: int  # 1-based
    lam: RingElement

    def __post_init__(self):
        if self.side not in ("L", "R"):
            raise ValueError(f"side must be 'L' or 'R', got {self.side!r}")
        if self.i == self.j:
            raise ValueError("elementary op needs i != j")
        if self.i < 1 or self.j < 1:
            raise IndexOutOfBounds("1-based indices must be positive")

    def inverse(self) -> "ElementaryOp":
        return ElementaryOp(self.side, self.i, self.j, -self.lam)


@dataclass(frozen=True)
class Transcript:
    """Ordered replayable sequence of elementary ops."""

    ops: tuple[ElementaryOp, ...] = ()

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)

    def __add__(self, other: "Transcript") -> "Transcript":
        return Transcript(self.ops + other.ops)

    def inverse(self) -> "Transcript":
        return Transcript(tuple(op.inverse() for op in reversed(self.ops)))

    def left_ops(self) -> "Transcript":
        return Transcript(tuple(op for op in self.ops if op.side == "L"))

    def right_ops(self) -> "Transcript":
        return Transcript(tuple(op for op in self.ops if op.side == "R"))


def invert_transcript(t: Transcript) -> Transcript:
    """Formal inverse: reversed order, negated lambdas."""
    return t.inverse()


@dataclass(frozen=True)
class UnimodularRow:
    """A length-n row whose entries generate the unit ideal, with witness."""

    ring: Ring
    entries: tuple[RingElement, ...]
    witness: tuple[RingElement, ...]

    def __post_init__(self):
        acc = self.ring.zero
        for e, w in zip(self.entries, self.witness):
            acc = self.ring.add(acc, self.ring.mul(e.value, w.value))
        if acc != self.ring.one or len(self.entries) != len(self.witness):
            raise NotUnimodular("witness does not certify this row")

    @property
    def n(self) -> int:
        return len(self.entries)

    def payloads(self) -> tuple:
        return tuple(e.value for e in self.entries)

    def __str__(self):
        return "(" + ", ".join(str(e) for e in self.entries) + ")"


def new_unimodular_row(ring: Ring, entries: Sequence) -> UnimodularRow:
    """Build a row and certify it, or raise NotUnimodular."""
    els = tuple(ring.el(x) for x in entries)
    if len(els) < 2:
        raise DimensionMismatch("rows must have length >= 2")
    w = bezout_witness(ring, els)
    if w is None:
        raise NotUnimodular(f"({', '.join(str(e) for e in els)}) over {ring.descriptor()}")
    return UnimodularRow(ring, els, w)


@dataclass(frozen=True)
class RightInvertibleMatrix:
    """An m x n matrix A carrying an exact right inverse B with A @ B == I."""

    ring: Ring
    m: int
    n: int
    entries: tuple[tuple[RingElement, ...], ...]
    right_inverse: tuple[tuple[RingElement, ...], ...]

    def __post_init__(self):
        if not (1 <= self.m < self.n):
            raise DimensionMismatch(f"need 1 <= m < n, got m={self.m}, n={self.n}")
        ring = self.ring
        for i in range(self.m):
            for j in range(self.m):
                acc = ring.zero
                for k in range(self.n):
                    acc = ring.add(
                        acc, ring.mul(self.entries[i][k].value, self.right_inverse[k][j].value)
                    )
                expected = ring.one if i == j else ring.zero
                if acc != expected:
                    raise NotRightInvertible("stored right inverse fails A @ B == I")

    def payloads(self) -> tuple:
        return tuple(tuple(e.value for e in row) for row in self.entries)

    def entry(self, i: int, j: int) -> RingElement:
        """1-based access."""
        return self.entries[i - 1][j - 1]

    def row(self, i: int) -> UnimodularRow:
        """The i-th row (1-based) as a unimodular row; witness is column i of B."""
        ents = self.entries[i - 1]
        wit = tuple(self.right_inverse[k][i - 1] for k in range(self.n))
        return UnimodularRow(self.ring, ents, wit)

    def top_rows(self, k: int) -> "RightInvertibleMatrix":
        """The first k rows as a right-invertible k x n matrix."""
        ents = self.entries[:k]
        rinv = tuple(row[:k] for row in self.right_inverse)
        return RightInvertibleMatrix(self.ring, k, self.n, ents, rinv)

    def __str__(self):
        return "[" + "; ".join(", ".join(str(e) for e in row) for row in self.entries) + "]"


def new_right_invertible(ring: Ring, m: int, n: int, entries: Sequence[Sequence]) -> RightInvertibleMatrix:
    """Build an m x n right-invertible matrix, solving for its right inverse."""
    if not (1 <= m < n):
        raise DimensionMismatch(f"need 1 <= m < n, got m={m}, n={n}")
    grid = tuple(tuple(ring.el(x) for x in row) for row in entries)
    if len(grid) != m or any(len(row) != n for row in grid):
        raise DimensionMismatch("entry grid does not match m x n")
    B = solve_right_inverse(ring, grid)
    if B is None:
        raise NotRightInvertible(f"no right inverse over {ring.descriptor()}")
    return RightInvertibleMatrix(ring, m, n, grid, tuple(tuple(row) for row in B))


# ---------------------------------------------------------------------------
# applying operations


def _apply_right_to_row(entries: list, witness: list, op: ElementaryOp, ring: Ring):
    """Row v -> v e_ij(lam): v_j += lam v_i; witness w -> e_ij(-lam) w."""
    i, j = op.i - 1, op.j - 1
    lam = op.lam.value
    entries[j] = ring.add(entries[j], ring.mul(lam, entries[i]))
    witness[i] = ring.sub(witness[i], ring.mul(lam, witness[j]))


def apply_transcript(obj, t: Transcript | Iterable[ElementaryOp]):
    """Replay a transcript on a row or matrix, transporting its witness.

    Right ops act on columns, Left ops on rows (matrices only).  The stored
    Bezout witness / right inverse is updated by the inverse op on the other
    side, and the result is re-validated on construction.
    """
    ops = list(t)
    if isinstance(obj, UnimodularRow):
        ring = obj.ring
        entries = [e.value for e in obj.entries]
        witness = [w.value for w in obj.witness]
        for op in ops:
            if op.side == "L":
                raise LeftOpOnRow("row operations cannot act on a single row")
            if op.i > obj.n or op.j > obj.n:
                raise IndexOutOfBounds(f"op ({op.i},{op.j}) outside row of length {obj.n}")
            _apply_right_to_row(entries, witness, op, ring)
        return UnimodularRow(
            ring,
            tuple(RingElement(ring, e) for e in entries),
            tuple(RingElement(ring, w) for w in witness),
        )
    if isinstance(obj, RightInvertibleMatrix):
        ring = obj.ring
        m, n = obj.m, obj.n
        A = [[e.value for e in row] for row in obj.entries]
        B = [[e.value for e in row] for row in obj.right_inverse]
        for op in ops:
            lam = op.lam.value
            if op.side == "R":
                if op.i > n or op.j > n:
                    raise IndexOutOfBounds(f"column op ({op.i},{op.j}) outside n={n}")
                i, j = op.i - 1, op.j - 1
                for r in range(m):
                    A[r][j] = ring.add(A[r][j], ring.mul(lam, A[r][i]))
                # B -> e_ij(-lam) B: row i of B loses lam * row j
                for c in range(m):
                    B[i][c] = ring.sub(B[i][c], ring.mul(lam, B[j][c]))
            else:
                if op.i > m or op.j > m:
                    raise IndexOutOfBounds(f"row op ({op.i},{op.j}) outside m={m}")
                i, j = op.i - 1, op.j - 1
                for c in range(n):
                    A[i][c] = ring.add(A[i][c], ring.mul(lam, A[j][c]))
                # B -> B e_ij(-lam): column j of B loses lam * column i
                for r in range(n):
                    B[r][j] = ring.sub(B[r][j], ring.mul(lam, B[r][i]))
        return RightInvertibleMatrix(
            ring,
            m,
            n,
            tuple(tuple(RingElement(ring, x) for x in row) for row in A),
            tuple(tuple(RingElement(ring, x) for x in row) for row in B),
        )
    raise TypeError(f"cannot apply a transcript to {type(obj).__name__}")


# ---------------------------------------------------------------------------
# seeded instance generation


def _sample_lambda(ring: Ring, rng: random.Random):
    """Bounded nonzero lambda; the distribution is part of the determinism contract.

    Z: uniform on {-2, -1, 1, 2}.  Z/n and GF(p): uniform on the nonzero
    residues.  GF(p)[x]: uniform over polynomials of degree <= 1, excluding 0.
    Products: componentwise, resampled if every component lands on zero.
    """
    if isinstance(ring, Integers):
        return rng.choice([-2, -1, 1, 2])
    if isinstance(ring, Residue):
        return rng.randrange(1, ring.modulus)
    if isinstance(ring, PolyOverPrimeField):
        while True:
            c0, c1 = rng.randrange(ring.p), rng.randrange(ring.p)
            if c0 or c1:
                from .rings import _ptrim

                return _ptrim((c0, c1))
    if isinstance(ring, ProductRing):
        while True:
            parts = []
            for f in ring.factors:
                if rng.random() < 0.5:
                    parts.append(f.zero)
                else:
                    parts.append(_sample_lambda(f, rng))
            if any(p != f.zero for p, f in zip(parts, ring.factors)):
                return tuple(parts)
    raise TypeError(f"no lambda distribution for {ring.descriptor()}")


def random_unimodular(ring: Ring, m: int, n: int, seed: int, steps: int) -> RightInvertibleMatrix:
    """Seeded random element of Um_{m,n}: (I_m | 0) hit by random elementary ops.

    Right (column) ops always; Left (row) ops with probability 1/4 when
    m >= 2.  Deterministic per (ring, m, n, seed, steps); right-invertible by
    construction since it starts from (I_m | 0).
    """
    start = new_right_invertible(
        ring,
        m,
        n,
        [[ring.one if i == j else ring.zero for j in range(n)] for i in range(m)],
    )
    rng = random.Random(seed)
    ops = []
    for _ in range(steps):
        lam = RingElement(ring, _sample_lambda(ring, rng))
        if m >= 2 and rng.random() < 0.25:
            i, j = rng.sample(range(1, m + 1), 2)
            ops.append(ElementaryOp("L", i, j, lam))
        else:
            i, j = rng.sample(range(1, n + 1), 2)
            ops.append(ElementaryOp("R", i, j, lam))
    return apply_transcript(start, Transcript(tuple(ops)))


# ---------------------------------------------------------------------------
# replay verification


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of replaying transcripts against a claimed result."""

    ok: bool
    first_mismatch: tuple[int, int] | None = None  # 1-based (row, col)
    message: str = ""

    def __bool__(self):
        return self.ok


def verify_certificate(original, transcript_left: Transcript, transcript_right: Transcript, claimed) -> VerifyReport:
    """Replay left then right ops on ``original`` and compare with ``claimed``.

    ``original``/``claimed`` are rows or matrices of matching shape; the
    comparison is exact and entrywise.  Failure is a report outcome, not an
    exception.
    """
    try:
        transformed = apply_transcript(original, transcript_left + transcript_right)
    except (IndexOutOfBounds, LeftOpOnRow) as exc:
        return VerifyReport(False, None, f"replay failed: {exc}")

    if isinstance(original, UnimodularRow):
        got = [transformed.payloads()]
        want = [claimed.payloads() if isinstance(claimed, UnimodularRow) else tuple(claimed)]
    else:
        got = [list(r) for r in transformed.payloads()]
        want = [list(r) for r in (claimed.payloads() if isinstance(claimed, RightInvertibleMatrix) else claimed)]
    if len(got) != len(want) or any(len(g) != len(w) for g, w in zip(got, want)):
        return VerifyReport(False, None, "shape mismatch between replay and claim")
    for i, (grow, wrow) in enumerate(zip(got, want)):
        for j, (g, w) in enumerate(zip(grow, wrow)):
            if g != w:
                return VerifyReport(
                    False,
                    (i + 1, j + 1),
                    f"first mismatch at ({i + 1},{j + 1}): replay {g!r} != claim {w!r}",
                )
    return VerifyReport(True)
