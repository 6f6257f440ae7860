"""Self-contained JSON certificates for normalizations, and their verifier.

Wire formats (all element values are canonical strings, indices 1-based):

* op: ``{"side": "L"|"R", "i": int, "j": int, "lambda": str}``
* matrix: ``{"ring": str, "m": int, "n": int, "entries": [[str, ...], ...]}``
* certificate::

    {"version": 1,
     "kind": "rows" | "matrices",
     "ring": "<descriptor>",
     "input":  {"v": [...], "w": [...]} | {"S": <matrix>, "T": <matrix>},
     "transcripts": {"S": {"left": [...], "right": [...]},
                     "T": {"left": [...], "right": [...]}},
     "result": {"x": str, "tail": [...]} | {"X": [[...]], "alpha": [[...]]}}

A certificate verifies iff replaying the left then the right transcript on
each input reproduces the claimed result exactly (for "T", the claimed first
block is I minus the claimed X).  Verification needs no state beyond the
file.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import MalformedDescriptor, UmcertError
from .normalize import PairNormalization, RowNormalization
from .rings import Ring, RingElement, parse_ring
from .unimodular import (
    ElementaryOp,
    RightInvertibleMatrix,
    Transcript,
    UnimodularRow,
    VerifyReport,
    new_right_invertible,
    new_unimodular_row,
    verify_certificate,
)

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# encoding


def op_to_json(op: ElementaryOp) -> dict:
    return {"side": op.side, "i": op.i, "j": op.j, "lambda": str(op.lam)}


def op_from_json(ring: Ring, obj: dict) -> ElementaryOp:
    return ElementaryOp(obj["side"], int(obj["i"]), int(obj["j"]), ring.el(obj["lambda"]))


def transcript_to_json(t: Transcript) -> list[dict]:
    return [op_to_json(op) for op in t.ops]


def transcript_from_json(ring: Ring, arr: list) -> Transcript:
    return Transcript(tuple(op_from_json(ring, o) for o in arr))


def row_to_json(row: UnimodularRow) -> list[str]:
    return [str(e) for e in row.entries]


def matrix_to_json(mat: RightInvertibleMatrix) -> dict:
    return {
        "ring": mat.ring.descriptor(),
        "m": mat.m,
        "n": mat.n,
        "entries": [[str(e) for e in row] for row in mat.entries],
    }


def matrix_from_json(obj: dict) -> RightInvertibleMatrix:
    ring = parse_ring(obj["ring"])
    return new_right_invertible(ring, int(obj["m"]), int(obj["n"]), obj["entries"])


def rows_certificate(ring: Ring, v: UnimodularRow, w: UnimodularRow, rn: RowNormalization) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "kind": "rows",
        "ring": ring.descriptor(),
        "input": {"v": row_to_json(v), "w": row_to_json(w)},
        "transcripts": {
            "S": {"left": [], "right": transcript_to_json(rn.eps)},
            "T": {"left": [], "right": transcript_to_json(rn.delta)},
        },
        "result": {"x": str(rn.x), "tail": [str(t) for t in rn.tail]},
    }


def matrices_certificate(
    ring: Ring, S: RightInvertibleMatrix, T: RightInvertibleMatrix, pn: PairNormalization
) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "kind": "matrices",
        "ring": ring.descriptor(),
        "input": {"S": matrix_to_json(S), "T": matrix_to_json(T)},
        "transcripts": {
            "S": {"left": transcript_to_json(pn.leftS), "right": transcript_to_json(pn.rightS)},
            "T": {"left": transcript_to_json(pn.leftT), "right": transcript_to_json(pn.rightT)},
        },
        "result": {
            "X": [[str(e) for e in row] for row in pn.X],
            "alpha": [[str(e) for e in row] for row in pn.alpha],
        },
    }


def dump_certificate(cert: dict) -> str:
    return json.dumps(cert, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# verification


class CertificateError(UmcertError):
    """Certificate is structurally unusable (bad schema, ring, or shapes)."""


def _require(cond: bool, message: str):
    if not cond:
        raise CertificateError(message)


def verify_certificate_json(cert: dict) -> VerifyReport:
    """Replay a parsed certificate and compare with its claimed result.

    Structural problems (unknown version/kind, malformed ring or elements)
    raise CertificateError; a replay mismatch is reported, not raised.
    """
    _require(isinstance(cert, dict), "certificate must be a JSON object")
    _require(cert.get("version") == SCHEMA_VERSION, "unsupported certificate version")
    kind = cert.get("kind")
    _require(kind in ("rows", "matrices"), f"unknown certificate kind {kind!r}")
    try:
        ring = parse_ring(cert["ring"])
    except (KeyError, TypeError) as exc:
        raise CertificateError(f"missing or bad ring descriptor: {exc}") from exc

    try:
        ts = cert["transcripts"]
        t_s = (
            transcript_from_json(ring, ts["S"].get("left", [])),
            transcript_from_json(ring, ts["S"].get("right", [])),
        )
        t_t = (
            transcript_from_json(ring, ts["T"].get("left", [])),
            transcript_from_json(ring, ts["T"].get("right", [])),
        )
    except (KeyError, TypeError, ValueError, MalformedDescriptor) as exc:
        raise CertificateError(f"bad transcripts: {exc}") from exc

    if kind == "rows":
        try:
            v = new_unimodular_row(ring, cert["input"]["v"])
            w = new_unimodular_row(ring, cert["input"]["w"])
            x = ring.el(cert["result"]["x"])
            tail = [ring.el(t) for t in cert["result"]["tail"]]
        except (KeyError, TypeError, UmcertError, ValueError) as exc:
            raise CertificateError(f"bad rows payload: {exc}") from exc
        _require(len(tail) + 1 == v.n and w.n == v.n, "result length mismatch")
        claimed_v = tuple([x.value] + [t.value for t in tail])
        y = ring.sub(ring.one, x.value)
        claimed_w = tuple([y] + [t.value for t in tail])
        rep = verify_certificate(v, t_s[0], t_s[1], claimed_v)
        if not rep.ok:
            return VerifyReport(False, rep.first_mismatch, f"v replay: {rep.message}")
        rep = verify_certificate(w, t_t[0], t_t[1], claimed_w)
        if not rep.ok:
            return VerifyReport(False, rep.first_mismatch, f"w replay: {rep.message}")
        return VerifyReport(True)

    try:
        S = matrix_from_json(cert["input"]["S"])
        T = matrix_from_json(cert["input"]["T"])
        X = [[ring.el(e) for e in row] for row in cert["result"]["X"]]
        alpha = [[ring.el(e) for e in row] for row in cert["result"]["alpha"]]
    except (KeyError, TypeError, UmcertError, ValueError) as exc:
        raise CertificateError(f"bad matrices payload: {exc}") from exc
    m, n = S.m, S.n
    _require((T.m, T.n) == (m, n), "S and T shape mismatch")
    _require(len(X) == m and all(len(r) == m for r in X), "X must be m x m")
    _require(len(alpha) == m and all(len(r) == n - m for r in alpha), "alpha must be m x (n-m)")
    claimed_s = tuple(
        tuple([e.value for e in X[i]] + [e.value for e in alpha[i]]) for i in range(m)
    )
    claimed_t = tuple(
        tuple(
            [
                ring.sub(ring.one if i == j else ring.zero, X[i][j].value)
                for j in range(m)
            ]
            + [e.value for e in alpha[i]]
        )
        for i in range(m)
    )
    rep = verify_certificate(S, t_s[0], t_s[1], claimed_s)
    if not rep.ok:
        return VerifyReport(False, rep.first_mismatch, f"S replay: {rep.message}")
    rep = verify_certificate(T, t_t[0], t_t[1], claimed_t)
    if not rep.ok:
        return VerifyReport(False, rep.first_mismatch, f"T replay: {rep.message}")
    return VerifyReport(True)
