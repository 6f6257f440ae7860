"""Pair normalization for unimodular rows and right-invertible matrices.

Two algorithms, each emitting a replayable certificate:

* ``mn_rows``: column operations carry a pair of unimodular rows v, w to
  ``(x, a_2, ..., a_n)`` and ``(y, a_2, ..., a_n)`` with ``x + y = 1``.
* ``mn_matrices``: column operations (plus row operations recorded in
  separate left transcripts) carry a pair of m x n right-invertible matrices
  to ``(X | alpha)`` and ``(I - X | alpha)``.

The row algorithm proceeds in three steps: (1) a stable-range reduction with
pivot ``v1*w1`` realized as the column ops ``e_1i(t_i*w1)`` on v and
``e_1j(t_j*v1)`` on w, making the joint tail unimodular; (2) Bezout-weighted
additions into the first coordinates forcing ``v1 + w1 = 1``; (3) tail
equalization with ``e_1i(w_i - v_i)`` on v and the negated op on w.

The matrix algorithm recurses on the number of rows.  The two-row base case:
make the leading corners complementary via the row algorithm on the first
rows; a row op making the (2,1) entries opposite (the shared pivot g); a
subset unimodularization of the trailing second-row entries by multiples of
the permitted columns; Bezout-weighted column additions into column 2 forcing
complementary (2,2) entries; one column op zeroing the (1,2) sum; and a
two-column equalization of the trailing columns.  The induction step repeats
the same shape one row down after normalizing the top rows recursively.

Certificates never leave this module unverified: every normalization is
replayed against the original inputs before being returned.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import (
    DimensionMismatch,
    OracleFailure,
    PreconditionViolated,
    RangeConditionViolated,
    SubsetUnimodularizationExhausted,
)
from .rings import Ring, RingElement, bezout_witness, stable_range_reduce, _unimodularize
from .unimodular import (
    ElementaryOp,
    RightInvertibleMatrix,
    Transcript,
    UnimodularRow,
    apply_transcript,
    verify_certificate,
)


@dataclass(frozen=True)
class MnConfig:
    """Knobs for the randomized rung of the subset oracle."""

    retry_budget: int = 32
    rng_seed: int = 0


@dataclass(frozen=True)
class RowNormalization:
    """Output of mn_rows: v*eps = (x, tail), w*delta = (1-x, tail)."""

    x: RingElement
    tail: tuple[RingElement, ...]
    eps: Transcript
    delta: Transcript

    @property
    def y(self) -> RingElement:
        ring = self.x.ring
        return RingElement(ring, ring.sub(ring.one, self.x.value))


@dataclass(frozen=True)
class PairNormalization:
    """Output of mn_matrices: S -> (X | alpha), T -> (I - X | alpha)."""

    X: tuple[tuple[RingElement, ...], ...]
    alpha: tuple[tuple[RingElement, ...], ...]
    leftS: Transcript
    rightS: Transcript
    leftT: Transcript
    rightT: Transcript


def _check_range(ring: Ring, bound: int, sdim_override: int | None, what: str):
    sdim = ring.sdim if sdim_override is None else sdim_override
    if sdim > bound:
        raise RangeConditionViolated(f"{what}: need sdim <= {bound}, have {sdim}")


# ---------------------------------------------------------------------------
# rows


def mn_rows(v: UnimodularRow, w: UnimodularRow, *, sdim_override: int | None = None) -> RowNormalization:
    """Normalize a pair of unimodular rows to complementary leading entries.

    Requires both rows over the same ring with the same length n and
    stable dimension at most 2n - 3.  The returned transcripts contain only
    column (Right) operations and replay exactly.
    """
    if v.ring != w.ring:
        raise DimensionMismatch("rows live over different rings")
    ring = v.ring
    n = v.n
    if w.n != n:
        raise DimensionMismatch(f"row lengths differ: {n} vs {w.n}")
    _check_range(ring, 2 * n - 3, sdim_override, "mn_rows")

    vc = list(v.payloads())
    wc = list(w.payloads())
    ops_v: list[ElementaryOp] = []
    ops_w: list[ElementaryOp] = []

    def op_v(i, j, lam):
        if not ring.is_zero(lam):
            ops_v.append(ElementaryOp("R", i, j, RingElement(ring, lam)))
            vc[j - 1] = ring.add(vc[j - 1], ring.mul(lam, vc[i - 1]))

    def op_w(i, j, lam):
        if not ring.is_zero(lam):
            ops_w.append(ElementaryOp("R", i, j, RingElement(ring, lam)))
            wc[j - 1] = ring.add(wc[j - 1], ring.mul(lam, wc[i - 1]))

    # Step 1: make (v2..vn, w2..wn) unimodular by adding multiples of v1*w1,
    # realized through the actual first entries.
    pivot = ring.mul(vc[0], wc[0])
    targets = vc[1:] + wc[1:]
    try:
        t = stable_range_reduce(ring, [RingElement(ring, x) for x in targets], RingElement(ring, pivot))
    except PreconditionViolated as exc:
        raise OracleFailure(f"stable-range oracle rejected mn_rows input: {exc}") from exc
    w1_before = wc[0]
    v1_before = vc[0]
    for idx in range(n - 1):
        op_v(1, idx + 2, ring.mul(t[idx].value, w1_before))
    for idx in range(n - 1):
        op_w(1, idx + 2, ring.mul(t[n - 1 + idx].value, v1_before))

    # Step 2: Bezout witness of the shortened vector, then weighted additions
    # into the first coordinates to force v1 + w1 = 1.
    shortened = [RingElement(ring, x) for x in vc[1:] + wc[1:]]
    wit = bezout_witness(ring, shortened)
    if wit is None:
        raise OracleFailure("shortened vector is not unimodular after stable-range step")
    mu = ring.sub(ring.one, ring.add(vc[0], wc[0]))
    for idx in range(n - 1):
        op_v(idx + 2, 1, ring.mul(wit[idx].value, mu))
    for idx in range(n - 1):
        op_w(idx + 2, 1, ring.mul(wit[n - 1 + idx].value, mu))
    assert ring.add(vc[0], wc[0]) == ring.one

    # Step 3: equalize tails, ascending i with current values.
    for i in range(2, n + 1):
        lam = ring.sub(wc[i - 1], vc[i - 1])
        op_v(1, i, lam)
        op_w(1, i, ring.neg(lam))
        assert vc[i - 1] == wc[i - 1]

    eps = Transcript(tuple(ops_v))
    delta = Transcript(tuple(ops_w))
    x = RingElement(ring, vc[0])
    tail = tuple(RingElement(ring, e) for e in vc[1:])

    # replay check against the untouched inputs
    v_final = apply_transcript(v, eps)
    w_final = apply_transcript(w, delta)
    assert v_final.payloads() == tuple(vc)
    assert w_final.payloads() == tuple(wc)
    assert wc[0] == ring.sub(ring.one, vc[0])
    return RowNormalization(x=x, tail=tail, eps=eps, delta=delta)


# ---------------------------------------------------------------------------
# the subset oracle and its strategy ladder


@dataclass(frozen=True)
class SubsetResult:
    """Column-op coefficients making the targets unimodular.

    ``coefficients[i]`` maps source labels ("pivot" or ("helper", k)) to the
    multiple of that source value added to target i.  ``strategy`` records the
    rung that succeeded: "pivot", "helpers", or "retry".
    """

    coefficients: tuple[dict, ...]
    strategy: str


def _sample_coefficient(ring: Ring, rng: random.Random):
    from .unimodular import _sample_lambda

    return _sample_lambda(ring, rng)


def _merge_coeffs(ring: Ring, a: dict, b: dict) -> dict:
    out = dict(a)
    for k, val in b.items():
        out[k] = ring.add(out[k], val) if k in out else val
    return {k: val for k, val in out.items() if not ring.is_zero(val)}


def _ladder(ring: Ring, targets: list, rung_a, rung_b, cfg: MnConfig) -> tuple[list[dict], str]:
    """Try pivot-only sources, then helpers, then seeded random perturbations."""
    try:
        return _unimodularize(ring, targets, rung_a), "pivot"
    except SubsetUnimodularizationExhausted:
        pass
    if rung_b != rung_a:
        try:
            return _unimodularize(ring, targets, rung_b), "helpers"
        except SubsetUnimodularizationExhausted:
            pass
    rng = random.Random(cfg.rng_seed)
    for _ in range(cfg.retry_budget):
        perturb: list[dict] = []
        shifted = []
        for i, u in enumerate(targets):
            d = {}
            acc = u
            for k, val in rung_b[i]:
                if not ring.is_zero(val) and rng.random() < 0.5:
                    c = _sample_coefficient(ring, rng)
                    d[k] = c
                    acc = ring.add(acc, ring.mul(c, val))
            perturb.append(d)
            shifted.append(acc)
        try:
            kappa = _unimodularize(ring, shifted, rung_b)
        except SubsetUnimodularizationExhausted:
            continue
        return [_merge_coeffs(ring, p, k) for p, k in zip(perturb, kappa)], "retry"
    raise SubsetUnimodularizationExhausted(
        f"no coefficient assignment found within {cfg.retry_budget} retries"
    )


def subset_unimodularize(
    ring: Ring,
    targets,
    pivot,
    helpers,
    cfg: MnConfig | None = None,
    helper_targets: list[list[int]] | None = None,
) -> SubsetResult:
    """Make the target entries unimodular by adding multiples of permitted values.

    Strategy ladder: (a) multiples of ``pivot`` only; (b) additionally
    multiples of the helper entries (helper k applies to the target indices in
    ``helper_targets[k]``, all targets when omitted); (c) up to
    ``cfg.retry_budget`` seeded random perturbations, retrying (a)-(b).
    """
    cfg = cfg or MnConfig()
    u = [ring.el(x).value for x in targets]
    pv = ring.el(pivot).value
    hv = [ring.el(h).value for h in helpers]
    L = len(u)
    if helper_targets is None:
        helper_targets = [list(range(L)) for _ in hv]
    if len(helper_targets) != len(hv):
        raise DimensionMismatch("helper_targets must align with helpers")
    rung_a = [(("pivot", pv),) for _ in range(L)]
    rung_b = []
    for i in range(L):
        srcs = [("pivot", pv)]
        for k, h in enumerate(hv):
            if i in helper_targets[k]:
                srcs.append((("helper", k), h))
        rung_b.append(tuple(srcs))
    kappa, strategy = _ladder(ring, u, rung_a, rung_b, cfg)
    coeffs = tuple(
        {k: RingElement(ring, c) for k, c in kd.items() if not ring.is_zero(c)} for kd in kappa
    )
    return SubsetResult(coefficients=coeffs, strategy=strategy)


# ---------------------------------------------------------------------------
# matrices


def mn_matrices(
    S: RightInvertibleMatrix,
    T: RightInvertibleMatrix,
    cfg: MnConfig | None = None,
    *,
    sdim_override: int | None = None,
) -> PairNormalization:
    """Normalize a pair of m x n right-invertible matrices, m >= 2.

    Requires the same ring and shape, 2 <= m < n, and stable dimension at
    most 2(n - m) - 1.  Left (row) operations appear only with indices <= m
    and are recorded in the left transcripts; verification replays left then
    right.
    """
    cfg = cfg or MnConfig()
    if S.ring != T.ring:
        raise DimensionMismatch("matrices live over different rings")
    if (S.m, S.n) != (T.m, T.n):
        raise DimensionMismatch(f"shape mismatch: {S.m}x{S.n} vs {T.m}x{T.n}")
    if S.m < 2:
        raise DimensionMismatch("mn_matrices needs m >= 2; use mn_rows for single rows")
    _check_range(S.ring, 2 * (S.n - S.m) - 1, sdim_override, "mn_matrices")

    opsS: list[ElementaryOp] = []
    opsT: list[ElementaryOp] = []
    curS, curT = _normalize_pair(S, T, cfg, sdim_override, opsS, opsT)

    ring = S.ring
    m, n = S.m, S.n
    X = tuple(tuple(curS.entries[i][:m]) for i in range(m))
    alpha = tuple(tuple(curS.entries[i][m:]) for i in range(m))
    # exact invariant checks: leading blocks sum to the identity, tails agree
    for i in range(m):
        for j in range(m):
            s = ring.add(curS.entries[i][j].value, curT.entries[i][j].value)
            expected = ring.one if i == j else ring.zero
            assert s == expected, "leading blocks do not sum to the identity"
        for j in range(m, n):
            assert curS.entries[i][j].value == curT.entries[i][j].value, "tails differ"

    tS = Transcript(tuple(opsS))
    tT = Transcript(tuple(opsT))
    result = PairNormalization(
        X=X,
        alpha=alpha,
        leftS=tS.left_ops(),
        rightS=tS.right_ops(),
        leftT=tT.left_ops(),
        rightT=tT.right_ops(),
    )
    # replay check against the untouched inputs (left then right)
    repS = verify_certificate(S, result.leftS, result.rightS, curS)
    repT = verify_certificate(T, result.leftT, result.rightT, curT)
    assert repS.ok and repT.ok, "normalization certificate failed its own replay"
    return result


def _normalize_pair(S, T, cfg, sdim_override, opsS, opsT):
    """Recursive worker: mutates the op lists, returns the transformed pair."""
    if S.m == 2:
        return _mn_base(S, T, cfg, sdim_override, opsS, opsT)

    m = S.m
    sub_opsS: list[ElementaryOp] = []
    sub_opsT: list[ElementaryOp] = []
    _normalize_pair(S.top_rows(m - 1), T.top_rows(m - 1), cfg, sdim_override, sub_opsS, sub_opsT)
    S = apply_transcript(S, Transcript(tuple(sub_opsS)))
    T = apply_transcript(T, Transcript(tuple(sub_opsT)))
    opsS.extend(sub_opsS)
    opsT.extend(sub_opsT)
    return _mn_step(S, T, cfg, opsS, opsT, level=m)


def _mn_base(S, T, cfg, sdim_override, opsS, opsT):
    """Two-row base case: first-row complementarity, then the shared step."""
    rn = mn_rows(S.row(1), T.row(1), sdim_override=sdim_override)
    S = apply_transcript(S, rn.eps)
    T = apply_transcript(T, rn.delta)
    opsS.extend(rn.eps.ops)
    opsT.extend(rn.delta.ops)
    return _mn_step(S, T, cfg, opsS, opsT, level=2)


def _mn_step(S, T, cfg, opsS, opsT, level):
    """Shared bottom-row stage: rows 1..level-1 of S and T have complementary
    leading (level-1)-blocks and the machinery below fixes row ``level``.

    Stages: row ops making the leading bottom-row entries opposite; subset
    unimodularization of the trailing bottom-row entries; Bezout-weighted
    column additions into column ``level`` forcing complementary diagonal
    entries; column ops zeroing the above-diagonal sums; block-weighted
    equalization of the trailing columns.
    """
    ring = S.ring
    m_lvl = level
    n = S.n

    def entry(M, i, j):
        return M.entries[i - 1][j - 1].value

    def apply(M, ops_acc, batch):
        ops_acc.extend(batch)
        return apply_transcript(M, Transcript(tuple(batch)))

    # Stage A (rows): make S[lvl,i] = -T[lvl,i] for i < lvl, using the
    # complementary leading block of the rows above.
    for i in range(1, m_lvl):
        lam = ring.neg(ring.add(entry(S, m_lvl, i), entry(T, m_lvl, i)))
        if not ring.is_zero(lam):
            batch = [ElementaryOp("L", m_lvl, i, RingElement(ring, lam))]
            S = apply(S, opsS, batch)
            T = apply(T, opsT, batch)

    # Stage B (subset step): make the trailing bottom-row entries of S and T
    # jointly unimodular by adding multiples of the permitted columns.
    s_targets = [entry(S, m_lvl, j) for j in range(m_lvl + 1, n + 1)]
    t_targets = [entry(T, m_lvl, j) for j in range(m_lvl + 1, n + 1)]
    targets = s_targets + t_targets
    width = n - m_lvl
    shared_S = [(("col", k), entry(S, m_lvl, k)) for k in range(1, m_lvl)]
    shared_T = [(("col", k), entry(T, m_lvl, k)) for k in range(1, m_lvl)]
    diag_S = (("col", m_lvl), entry(S, m_lvl, m_lvl))
    diag_T = (("col", m_lvl), entry(T, m_lvl, m_lvl))
    rung_a = [tuple(shared_S)] * width + [tuple(shared_T)] * width
    rung_b = [tuple(shared_S + [diag_S])] * width + [tuple(shared_T + [diag_T])] * width
    kappa, _ = _ladder(ring, targets, rung_a, rung_b, cfg)
    batchS, batchT = [], []
    for idx, kd in enumerate(kappa):
        side_S = idx < width
        j = (m_lvl + 1) + (idx if side_S else idx - width)
        for (_, k), c in sorted(kd.items(), key=lambda kv: kv[0][1]):
            op = ElementaryOp("R", k, j, RingElement(ring, c))
            (batchS if side_S else batchT).append(op)
    if batchS:
        S = apply(S, opsS, batchS)
    if batchT:
        T = apply(T, opsT, batchT)

    # Stage C: Bezout witness of the trailing bottom-row entries, weighted by
    # (1 - s_dd - t_dd), added into column lvl to force s_dd + t_dd = 1.
    tail_now = [entry(S, m_lvl, j) for j in range(m_lvl + 1, n + 1)] + [
        entry(T, m_lvl, j) for j in range(m_lvl + 1, n + 1)
    ]
    wit = bezout_witness(ring, [RingElement(ring, x) for x in tail_now])
    if wit is None:
        raise OracleFailure("subset step left the trailing entries non-unimodular")
    mu = ring.sub(ring.one, ring.add(entry(S, m_lvl, m_lvl), entry(T, m_lvl, m_lvl)))
    batchS, batchT = [], []
    for idx in range(width):
        lamS = ring.mul(wit[idx].value, mu)
        lamT = ring.mul(wit[width + idx].value, mu)
        if not ring.is_zero(lamS):
            batchS.append(ElementaryOp("R", m_lvl + 1 + idx, m_lvl, RingElement(ring, lamS)))
        if not ring.is_zero(lamT):
            batchT.append(ElementaryOp("R", m_lvl + 1 + idx, m_lvl, RingElement(ring, lamT)))
    if batchS:
        S = apply(S, opsS, batchS)
    if batchT:
        T = apply(T, opsT, batchT)
    assert ring.add(entry(S, m_lvl, m_lvl), entry(T, m_lvl, m_lvl)) == ring.one

    # Stage D: zero the above-diagonal sums in column lvl (and keep the
    # diagonal sum at 1, which the complementary rows above guarantee).
    for i in range(1, m_lvl):
        lam = ring.neg(ring.add(entry(S, i, m_lvl), entry(T, i, m_lvl)))
        if not ring.is_zero(lam):
            batch = [ElementaryOp("R", i, m_lvl, RingElement(ring, lam))]
            S = apply(S, opsS, batch)
            T = apply(T, opsT, batch)

    # Stage E: equalize the trailing columns using the now-complementary
    # leading blocks, ascending (k, j).
    for j in range(m_lvl + 1, n + 1):
        delta = [ring.sub(entry(T, k, j), entry(S, k, j)) for k in range(1, m_lvl + 1)]
        batchS = [
            ElementaryOp("R", k, j, RingElement(ring, d))
            for k, d in enumerate(delta, start=1)
            if not ring.is_zero(d)
        ]
        batchT = [
            ElementaryOp("R", k, j, RingElement(ring, ring.neg(d)))
            for k, d in enumerate(delta, start=1)
            if not ring.is_zero(d)
        ]
        if batchS:
            S = apply(S, opsS, batchS)
        if batchT:
            T = apply(T, opsT, batchT)
    return S, T
