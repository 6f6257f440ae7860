"""Orbit enumeration and the multiplicative-symbol relation engine.

For small finite rings this module enumerates every unimodular row (or
right-invertible matrix) and the orbits of the right action of the elementary
group, harvests instances of the candidate symbol relations as integer
vectors over the orbit generators, computes the universal symbol group by
Smith reduction, and verifies the congruence chains that prove the
equivalence of the complementary-factor relation (first factors summing to 1)
with the shifted-product relation under squares-multiplicativity.

Relation encoding is additive: a multiplicative identity
phi(u) * phi(v) = phi(w) becomes the vector [u] + [v] - [w] over orbit
classes, and k-th powers become integer multiples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product as iproduct

from .errors import CapExceeded, DimensionMismatch, HypothesisViolated, NotFinite
from .intlinalg import IntMatrix, lattice_contains, smith_normal_form
from .rings import ProductRing, Residue, Ring, RingElement
from .unimodular import RightInvertibleMatrix, UnimodularRow

DEFAULT_CAP = 10**6


# ---------------------------------------------------------------------------
# ideal membership (congruence arithmetic mod a tail)


def ideal_contains(ring: Ring, gens: list, x) -> bool:
    """Exact membership of x in the ideal generated by gens."""
    xv = ring.el(x).value
    gv = [ring.el(g).value for g in gens]
    if isinstance(ring, Residue):
        g = math.gcd(*gv, ring.modulus)
        return xv % g == 0
    from .rings import Integers, PolyOverPrimeField, _pdivmod, _pgcd

    if isinstance(ring, Integers):
        g = math.gcd(*gv) if gv else 0
        return xv == 0 if g == 0 else xv % g == 0
    if isinstance(ring, PolyOverPrimeField):
        g: tuple = ()
        for v in gv:
            g = _pgcd(ring.p, g, v)
        if g == ():
            return xv == ()
        return _pdivmod(ring.p, xv, g)[1] == ()
    if isinstance(ring, ProductRing):
        return all(
            ideal_contains(f, [RingElement(f, v[i]) for v in gv], RingElement(f, xv[i]))
            for i, f in enumerate(ring.factors)
        )
    raise NotImplementedError(ring.descriptor())


def congruent(ring: Ring, a, b, tail: list) -> bool:
    """a == b modulo the ideal generated by the tail entries."""
    av, bv = ring.el(a).value, ring.el(b).value
    return ideal_contains(ring, tail, RingElement(ring, ring.sub(av, bv)))


# ---------------------------------------------------------------------------
# exhaustive enumeration


def _check_cap(ring: Ring, m: int, n: int, cap: int) -> None:
    if not ring.is_finite():
        raise NotFinite(f"cannot exhaust {ring.descriptor()}")
    if ring.size() ** (m * n) > cap:
        raise CapExceeded(f"{ring.size()}^{m * n} grids exceed the cap of {cap}")


def _minor_dets(ring: Ring, rows: list[list], m: int, n: int) -> bool:
    """Right invertibility over a finite ring via the ideal of maximal minors."""
    if isinstance(ring, Residue):
        dets = []
        for cols in combinations(range(n), m):
            sub = IntMatrix([[rows[i][j] for j in cols] for i in range(m)])
            dets.append(sub.det())
        return math.gcd(*dets, ring.modulus) == 1
    if isinstance(ring, ProductRing):
        return all(
            _minor_dets(f, [[x[idx] for x in row] for row in rows], m, n)
            for idx, f in enumerate(ring.factors)
        )
    raise NotFinite(f"minor criterion needs a finite ring, got {ring.descriptor()}")


def enumerate_um(ring: Ring, m: int, n: int, cap: int = DEFAULT_CAP) -> list[tuple]:
    """All unimodular rows (m = 1) or right-invertible m x n matrices.

    Items are flattened row-major payload tuples in ascending canonical
    order.  Membership is decided by the unit-ideal test on maximal minors,
    independently of the right-inverse solver.
    """
    if m < 1 or n < 2 or (m > 1 and n <= m):
        raise DimensionMismatch(f"bad shape {m}x{n}")
    _check_cap(ring, m, n, cap)
    elements = ring.elements()
    out = []
    for flat in iproduct(elements, repeat=m * n):
        rows = [list(flat[r * n : (r + 1) * n]) for r in range(m)]
        if _minor_dets(ring, rows, m, n):
            out.append(tuple(flat))
    return out


@dataclass(frozen=True)
class OrbitTable:
    """Partition of Um_{m,n} under the right elementary action.

    ``all_rows`` lists every member (flattened payload tuples, ascending);
    ``canon`` maps each member to the lexicographically least member of its
    orbit; ``reps`` lists the distinct representatives in ascending order.
    """

    ring: Ring
    m: int
    n: int
    all_rows: tuple[tuple, ...]
    canon: dict = field(hash=False)
    reps: tuple[tuple, ...]

    @property
    def orbit_count(self) -> int:
        return len(self.reps)

    def rep_index(self, item) -> int:
        """Index of the orbit of ``item`` (a flat tuple, row, or matrix)."""
        return self._rep_positions[self.canon[_as_flat(item)]]

    @property
    def _rep_positions(self) -> dict:
        if not hasattr(self, "_rep_pos_cache"):
            object.__setattr__(
                self, "_rep_pos_cache", {rep: i for i, rep in enumerate(self.reps)}
            )
        return self._rep_pos_cache


def _as_flat(item) -> tuple:
    if isinstance(item, UnimodularRow):
        return item.payloads()
    if isinstance(item, RightInvertibleMatrix):
        return tuple(x for row in item.payloads() for x in row)
    return tuple(item)


def enumerate_orbits(ring: Ring, m: int, n: int, cap: int = DEFAULT_CAP) -> OrbitTable:
    """BFS closure of Um_{m,n} under every right generator e_ij(lambda).

    Deterministic: members are scanned in ascending order, so each BFS seed
    is the lexicographically least member of its orbit.
    """
    members = enumerate_um(ring, m, n, cap)
    member_set = set(members)
    elements = ring.elements()
    nonzero = [e for e in elements if e != ring.zero]
    add = ring.add
    mul = ring.mul

    canon: dict = {}
    reps = []
    for seed in members:
        if seed in canon:
            continue
        reps.append(seed)
        canon[seed] = seed
        frontier = [seed]
        while frontier:
            nxt = []
            for item in frontier:
                for i in range(n):
                    for j in range(n):
                        if i == j:
                            continue
                        for lam in nonzero:
                            moved = list(item)
                            for r in range(m):
                                pj = r * n + j
                                moved[pj] = add(moved[pj], mul(lam, item[r * n + i]))
                            key = tuple(moved)
                            if key not in canon:
                                canon[key] = seed
                                nxt.append(key)
            frontier = nxt
    assert set(canon) == member_set, "elementary action left the enumerated set"
    return OrbitTable(
        ring=ring, m=m, n=n, all_rows=tuple(members), canon=canon, reps=tuple(reps)
    )


# ---------------------------------------------------------------------------
# relation harvesting


@dataclass(frozen=True)
class RelationInstance:
    """One harvested relation: its kind, witness data, and additive vector."""

    kind: str
    witness: dict
    vector: tuple[int, ...]


_KINDS = ("MS2", "MS3", "MS4", "MS5", "MS6", "MS7")


def _row_unimodular(ring: Ring, first, tail) -> bool:
    return ring.bezout([first] + list(tail)) is not None


def harvest_relations(
    ring: Ring,
    n: int,
    kind: str,
    table: OrbitTable,
    ms7_exponents: tuple[int, ...] = (2, 3),
    cap: int = DEFAULT_CAP,
) -> list[RelationInstance]:
    """Every instance of one relation kind over a finite ring, as vectors.

    Kinds (phi is a symbol on rows (first, tail), written additively over
    orbit classes):

    * MS2: [x,a] + [y,a] - [xy,a], both factor rows unimodular.
    * MS3: as MS2 but only when x + y = 1.
    * MS4: [f^2,a] + [g,a] - [f^2 g,a].
    * MS5: [r,a] + [1+q,a] - [q,a] when r(1+q) = q mod (a).
    * MS6: [x,a] - [-x,a].
    * MS7: e*[x,a] - [x^e,a] for each exponent e >= 2.

    The hypothesis of every emitted instance is re-verified exactly.
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown relation kind {kind!r}")
    if table.m != 1 or table.n != n:
        raise DimensionMismatch("orbit table does not match the requested row length")
    _check_cap(ring, 1, n + 1, cap)  # worst case: two free first coordinates
    elements = ring.elements()
    idx = table.rep_index
    count = table.orbit_count
    out = []

    def vec(*terms):
        v = [0] * count
        for coeff, first, tail in terms:
            v[idx((first,) + tuple(tail))] += coeff
        return tuple(v)

    for tail in iproduct(elements, repeat=n - 1):
        if kind in ("MS2", "MS3"):
            for x in elements:
                if not _row_unimodular(ring, x, tail):
                    continue
                for y in elements:
                    if not _row_unimodular(ring, y, tail):
                        continue
                    if kind == "MS3" and ring.add(x, y) != ring.one:
                        continue
                    xy = ring.mul(x, y)
                    assert _row_unimodular(ring, xy, tail)
                    out.append(
                        RelationInstance(
                            kind,
                            {"x": x, "y": y, "tail": tail},
                            vec((1, x, tail), (1, y, tail), (-1, xy, tail)),
                        )
                    )
        elif kind == "MS4":
            for f in elements:
                f2 = ring.mul(f, f)
                if not _row_unimodular(ring, f2, tail):
                    continue
                for g in elements:
                    if not _row_unimodular(ring, g, tail):
                        continue
                    f2g = ring.mul(f2, g)
                    out.append(
                        RelationInstance(
                            kind,
                            {"f": f, "g": g, "tail": tail},
                            vec((1, f2, tail), (1, g, tail), (-1, f2g, tail)),
                        )
                    )
        elif kind == "MS5":
            for r in elements:
                for q in elements:
                    one_q = ring.add(ring.one, q)
                    if not congruent(
                        ring,
                        RingElement(ring, ring.mul(r, one_q)),
                        RingElement(ring, q),
                        [RingElement(ring, t) for t in tail],
                    ):
                        continue
                    if not (
                        _row_unimodular(ring, r, tail)
                        and _row_unimodular(ring, one_q, tail)
                        and _row_unimodular(ring, q, tail)
                    ):
                        continue
                    out.append(
                        RelationInstance(
                            kind,
                            {"r": r, "q": q, "tail": tail},
                            vec((1, r, tail), (1, one_q, tail), (-1, q, tail)),
                        )
                    )
        elif kind == "MS6":
            for x in elements:
                if not _row_unimodular(ring, x, tail):
                    continue
                out.append(
                    RelationInstance(
                        kind,
                        {"x": x, "tail": tail},
                        vec((1, x, tail), (-1, ring.neg(x), tail)),
                    )
                )
        elif kind == "MS7":
            for x in elements:
                if not _row_unimodular(ring, x, tail):
                    continue
                for e in ms7_exponents:
                    if e < 2:
                        raise HypothesisViolated("MS7 needs exponents >= 2")
                    xe = ring.one
                    for _ in range(e):
                        xe = ring.mul(xe, x)
                    out.append(
                        RelationInstance(
                            kind,
                            {"x": x, "exponent": e, "tail": tail},
                            vec((e, x, tail), (-1, xe, tail)),
                        )
                    )
    return out


# ---------------------------------------------------------------------------
# presentations and the universal symbol group


@dataclass(frozen=True)
class Presentation:
    """Generators (orbit labels) and integer relation vectors over them."""

    generators: tuple[str, ...]
    relations: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        g = len(self.generators)
        if any(len(r) != g for r in self.relations):
            raise DimensionMismatch("relation vector length differs from generator count")


def presentation_from_harvest(ring: Ring, table: OrbitTable, instances) -> Presentation:
    labels = tuple(
        "[" + ", ".join(ring.show(x) for x in rep) + "]" for rep in table.reps
    )
    return Presentation(labels, tuple(inst.vector for inst in instances))


def universal_group(pres: Presentation) -> tuple[int, ...]:
    """Invariant factors of the abelian group presented by the relations.

    Factors are listed in divisibility order with units omitted; a trailing 0
    per free summand.  Empty tuple means the trivial group.
    """
    g = len(pres.generators)
    if g == 0:
        return ()
    if not pres.relations:
        return (0,) * g
    D = smith_normal_form(IntMatrix([list(r) for r in pres.relations])).D
    diag = D.diagonal()
    rank = sum(1 for d in diag if d != 0)
    factors = [d for d in diag if d not in (0, 1)]
    factors.extend([0] * (g - rank))
    return tuple(factors)


# ---------------------------------------------------------------------------
# the equivalence check between the two conditional relations


@dataclass(frozen=True)
class EquivalenceReport:
    """Mutual lattice containment of the MS5 and MS3 vectors modulo MS4."""

    ms5_inside: bool
    ms5_violations: tuple[tuple[int, ...], ...]
    ms3_inside: bool
    ms3_violations: tuple[tuple[int, ...], ...]

    @property
    def ok(self) -> bool:
        return self.ms5_inside and self.ms3_inside


def check_equivalence_vectors(ms3, ms4, ms5) -> EquivalenceReport:
    """Containment of each MS5 vector in span(MS3 u MS4), and symmetrically."""
    ms3 = [tuple(v) for v in ms3]
    ms4 = [tuple(v) for v in ms4]
    ms5 = [tuple(v) for v in ms5]
    span_34 = ms3 + ms4
    viol5 = tuple(v for v in ms5 if not lattice_contains(span_34, v)) if ms5 else ()
    span_54 = ms5 + ms4
    viol3 = tuple(v for v in ms3 if not lattice_contains(span_54, v)) if ms3 else ()
    return EquivalenceReport(
        ms5_inside=not viol5,
        ms5_violations=viol5,
        ms3_inside=not viol3,
        ms3_violations=viol3,
    )


def check_equivalence_ms3_ms5(ring: Ring, n: int, table: OrbitTable | None = None, cap: int = DEFAULT_CAP) -> EquivalenceReport:
    """Harvest MS3, MS4, MS5 over a finite ring and check mutual containment."""
    if table is None:
        table = enumerate_orbits(ring, 1, n, cap)
    ms3 = [i.vector for i in harvest_relations(ring, n, "MS3", table, cap=cap)]
    ms4 = [i.vector for i in harvest_relations(ring, n, "MS4", table, cap=cap)]
    ms5 = [i.vector for i in harvest_relations(ring, n, "MS5", table, cap=cap)]
    return check_equivalence_vectors(ms3, ms4, ms5)


# ---------------------------------------------------------------------------
# the congruence chains behind the equivalence proof


@dataclass(frozen=True)
class ChainReport:
    """Per-step outcome of one direction of the congruence-chain proof."""

    direction: str
    steps: tuple[tuple[str, bool], ...]

    @property
    def ok(self) -> bool:
        return all(ok for _, ok in self.steps)


def verify_lemma31_chain(ring: Ring, tail, *, r=None, q=None, x=None, y=None, v=None) -> ChainReport:
    """Check every intermediate congruence of one proof direction exactly.

    Direction "ms3_to_ms5" takes (r, q) with r(1+q) = q mod (tail) and checks
      r = q(1-r),  q = r(1-r)(1+q)^2,  (1-r)(1+q) = 1   (all mod the tail).

    Direction "ms5_to_ms3" takes (x, y, v) with x + y = 1 exactly and
    v*y = 1 mod (tail) and checks
      v*x = v-1,  v-1 = (v-1)*v*y,  (v-1)*v*y = v^2*x*y  (all mod the tail).
    """
    tail_els = [ring.el(t) for t in tail]

    def cong(a, b):
        return congruent(ring, RingElement(ring, a), RingElement(ring, b), tail_els)

    one = ring.one
    if r is not None and q is not None and x is None:
        rv, qv = ring.el(r).value, ring.el(q).value
        one_q = ring.add(one, qv)
        if not cong(ring.mul(rv, one_q), qv):
            raise HypothesisViolated("need r(1+q) = q mod (tail)")
        one_r = ring.sub(one, rv)
        steps = (
            ("r = q(1-r)", cong(rv, ring.mul(qv, one_r))),
            (
                "q = r(1-r)(1+q)^2",
                cong(qv, ring.mul(ring.mul(rv, one_r), ring.mul(one_q, one_q))),
            ),
            ("(1-r)(1+q) = 1", cong(ring.mul(one_r, one_q), one)),
        )
        return ChainReport("ms3_to_ms5", steps)
    if x is not None and y is not None and v is not None and r is None:
        xv, yv, vv = ring.el(x).value, ring.el(y).value, ring.el(v).value
        if ring.add(xv, yv) != one:
            raise HypothesisViolated("need x + y = 1 exactly")
        if not cong(ring.mul(vv, yv), one):
            raise HypothesisViolated("need v*y = 1 mod (tail)")
        vm1 = ring.sub(vv, one)
        vm1vy = ring.mul(vm1, ring.mul(vv, yv))
        v2xy = ring.mul(ring.mul(vv, vv), ring.mul(xv, yv))
        steps = (
            ("v*x = v-1", cong(ring.mul(vv, xv), vm1)),
            ("v-1 = (v-1)*v*y", cong(vm1, vm1vy)),
            ("(v-1)*v*y = v^2*x*y", cong(vm1vy, v2xy)),
        )
        return ChainReport("ms5_to_ms3", steps)
    raise HypothesisViolated("pass either (r, q) or (x, y, v)")
