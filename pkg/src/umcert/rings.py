"""Concrete commutative rings with exact arithmetic and constructive oracles.

Supported kinds: the integers ``Z``, residue rings ``Z/n``, prime fields
``GF(p)``, univariate polynomials ``GF(p)[x]``, and products of these.  Every
ring fixes a canonical element encoding (two elements are equal iff their
payloads are identical) and carries the algorithmic oracles that the
normalization algorithms consume: Bezout witnesses, deterministic stable-range
reduction, and factorization of a pivot into pairwise non-associate primes.

Payload conventions:

* ``Z``        -- arbitrary-precision ``int``
* ``Z/n``      -- least non-negative residue ``int`` in ``[0, n)``
* ``GF(p)``    -- least non-negative residue ``int`` in ``[0, p)``
* ``GF(p)[x]`` -- ascending coefficient ``tuple`` with no trailing zeros;
                  ``()`` is the zero polynomial
* products     -- ``tuple`` of component payloads
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Any, Iterable, Sequence

from .errors import (
    MalformedDescriptor,
    ModulusTooSmall,
    NonPrimeCharacteristic,
    NotFinite,
    PreconditionViolated,
    SubsetUnimodularizationExhausted,
    UnsupportedRing,
)

Payload = Any


# ---------------------------------------------------------------------------
# integer kernels


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended Euclid: returns (g, s, t) with s*a + t*b = g and g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _bezout_ints(vals: Sequence[int]) -> tuple[int, list[int]]:
    """Chain extended Euclid over a list: gcd plus one coefficient per value."""
    g = 0
    coeffs: list[int] = []
    for v in vals:
        g2, s, t = _xgcd(g, v)
        coeffs = [c * s for c in coeffs]
        coeffs.append(t)
        g = g2
    return g, coeffs


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_divisors(n: int) -> list[int]:
    """Distinct prime divisors of |n|, ascending, by trial division."""
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _crt_ints(residues: dict[int, int]) -> int:
    """Smallest non-negative x with x = r (mod p) for every pair; moduli coprime."""
    x, mod = 0, 1
    for p, r in sorted(residues.items()):
        g, s, _ = _xgcd(mod, p)
        assert g == 1
        # x + mod * k = r (mod p)  =>  k = (r - x) * mod^{-1} (mod p)
        k = ((r - x) * s) % p
        x += mod * k
        mod *= p
    return x % mod


# ---------------------------------------------------------------------------
# polynomial kernels (coefficients mod p, ascending tuples, no trailing zeros)


def _ptrim(cs: Iterable[int]) -> tuple[int, ...]:
    out = list(cs)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _padd(p: int, a: tuple, b: tuple) -> tuple:
    n = max(len(a), len(b))
    return _ptrim(
        ((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p for i in range(n)
    )


def _pneg(p: int, a: tuple) -> tuple:
    return tuple((-c) % p for c in a)


def _pmul(p: int, a: tuple, b: tuple) -> tuple:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % p
    return _ptrim(out)


def _pdivmod(p: int, a: tuple, b: tuple) -> tuple[tuple, tuple]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(b[-1], -1, p)
    rem = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    for k in range(len(a) - len(b), -1, -1):
        c = (rem[k + len(b) - 1] * inv) % p
        if c:
            q[k] = c
            for j, cb in enumerate(b):
                rem[k + j] = (rem[k + j] - c * cb) % p
    return _ptrim(q), _ptrim(rem)


def _pmonic(p: int, a: tuple) -> tuple:
    if not a or a[-1] == 1:
        return a
    inv = pow(a[-1], -1, p)
    return tuple((c * inv) % p for c in a)


def _pgcd(p: int, a: tuple, b: tuple) -> tuple:
    while b:
        _, r = _pdivmod(p, a, b)
        a, b = b, r
    return _pmonic(p, a)


def _pxgcd(p: int, a: tuple, b: tuple) -> tuple[tuple, tuple, tuple]:
    """Returns (g, s, t) with s*a + t*b = g, g monic (or zero)."""
    old_r, r = a, b
    old_s, s = (1,), ()
    old_t, t = (), (1,)
    while r:
        q, rem = _pdivmod(p, old_r, r)
        old_r, r = r, rem
        old_s, s = s, _padd(p, old_s, _pneg(p, _pmul(p, q, s)))
        old_t, t = t, _padd(p, old_t, _pneg(p, _pmul(p, q, t)))
    if old_r and old_r[-1] != 1:
        inv = (pow(old_r[-1], -1, p),)
        old_r = _pmonic(p, old_r)
        old_s = _pmul(p, inv, old_s)
        old_t = _pmul(p, inv, old_t)
    return old_r, old_s, old_t


def _monic_polys_of_degree(p: int, d: int):
    """All monic degree-d polynomials over GF(p) in ascending canonical order."""
    for lower in iproduct(range(p), repeat=d):
        yield lower + (1,)


def _poly_irreducible_divisors(p: int, f: tuple) -> list[tuple]:
    """Distinct monic irreducible divisors of f, by trial division in canonical order."""
    out = []
    f = _pmonic(p, f)
    d = 1
    while len(f) - 1 >= 2 * d:
        for cand in _monic_polys_of_degree(p, d):
            q, r = _pdivmod(p, f, cand)
            if not r:
                out.append(cand)
                while not r:
                    f = q
                    q, r = _pdivmod(p, f, cand)
                if len(f) - 1 < 2 * d:
                    break
        d += 1
    if len(f) - 1 >= 1:
        out.append(f)
    return out


# ---------------------------------------------------------------------------
# ring descriptors


class Ring:
    """Base class: canonical payload arithmetic plus kind-specific oracles."""

    kind: str
    sr: int  # stable rank

    @property
    def sdim(self) -> int:
        """Stable dimension, one less than the stable rank."""
        return self.sr - 1

    # -- identity -----------------------------------------------------------
    def key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        return isinstance(other, Ring) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Ring({self.descriptor()!r})"

    def descriptor(self) -> str:
        raise NotImplementedError

    # -- payload arithmetic ---------------------------------------------------
    zero: Payload
    one: Payload

    def add(self, a: Payload, b: Payload) -> Payload:
        raise NotImplementedError

    def neg(self, a: Payload) -> Payload:
        raise NotImplementedError

    def mul(self, a: Payload, b: Payload) -> Payload:
        raise NotImplementedError

    def sub(self, a: Payload, b: Payload) -> Payload:
        return self.add(a, self.neg(b))

    def canon(self, x) -> Payload:
        raise NotImplementedError

    def is_zero(self, a: Payload) -> bool:
        return a == self.zero

    # -- text encoding --------------------------------------------------------
    def show(self, a: Payload) -> str:
        raise NotImplementedError

    def parse(self, text: str) -> Payload:
        raise NotImplementedError

    # -- finiteness -----------------------------------------------------------
    def is_finite(self) -> bool:
        return False

    def elements(self) -> list[Payload]:
        raise NotFinite(f"{self.descriptor()} is not finite")

    def size(self) -> int:
        raise NotFinite(f"{self.descriptor()} is not finite")

    # -- oracles ---------------------------------------------------------------
    def bezout(self, gens: Sequence[Payload]) -> list[Payload] | None:
        """Coefficients with sum(g*c) == 1, or None if the ideal is proper."""
        raise NotImplementedError

    def factor_primes(self, x: Payload) -> list[Payload]:
        raise NotImplementedError

    # -- convenience -----------------------------------------------------------
    def el(self, x) -> "RingElement":
        """Coerce ints/tuples/strings/RingElement into an element of this ring."""
        if isinstance(x, RingElement):
            if x.ring != self:
                raise ValueError(f"element of {x.ring.descriptor()} used in {self.descriptor()}")
            return x
        if isinstance(x, str):
            return RingElement(self, self.parse(x))
        return RingElement(self, self.canon(x))


class Integers(Ring):
    kind = "Z"
    sr = 2
    zero = 0
    one = 1

    def key(self):
        return ("Z",)

    def descriptor(self):
        return "Z"

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def canon(self, x):
        if isinstance(x, bool) or not isinstance(x, int):
            raise ValueError(f"not an integer payload: {x!r}")
        return x

    def show(self, a):
        return str(a)

    def parse(self, text):
        try:
            return int(text.strip())
        except ValueError:
            raise MalformedDescriptor(f"bad integer element {text!r}") from None

    def bezout(self, gens):
        g, coeffs = _bezout_ints(list(gens))
        return coeffs if g == 1 else None

    def factor_primes(self, x):
        if x == 0:
            raise ValueError("cannot factor zero")
        return _prime_divisors(x)


class Residue(Ring):
    """Z/n with least non-negative residues."""

    kind = "Residue"
    sr = 1

    def __init__(self, modulus: int):
        if modulus < 2:
            raise ModulusTooSmall(f"modulus must be >= 2, got {modulus}")
        self.modulus = modulus
        self.zero = 0
        self.one = 1 % modulus

    def key(self):
        return ("Residue", self.modulus)

    def descriptor(self):
        return f"Z/{self.modulus}"

    def add(self, a, b):
        return (a + b) % self.modulus

    def neg(self, a):
        return (-a) % self.modulus

    def mul(self, a, b):
        return (a * b) % self.modulus

    def canon(self, x):
        if isinstance(x, bool) or not isinstance(x, int):
            raise ValueError(f"not an integer payload: {x!r}")
        return x % self.modulus

    def show(self, a):
        return str(a)

    def parse(self, text):
        try:
            return int(text.strip()) % self.modulus
        except ValueError:
            raise MalformedDescriptor(f"bad residue element {text!r}") from None

    def is_finite(self):
        return True

    def elements(self):
        return list(range(self.modulus))

    def size(self):
        return self.modulus

    def bezout(self, gens):
        g, coeffs = _bezout_ints(list(gens) + [self.modulus])
        if g != 1:
            return None
        return [c % self.modulus for c in coeffs[:-1]]

    def factor_primes(self, x):
        # Prime structure of Z/n lives in the modulus, not in x.
        return [p % self.modulus for p in _prime_divisors(self.modulus)]


class PrimeField(Residue):
    kind = "GF"

    def __init__(self, p: int):
        if not _is_prime(p):
            raise NonPrimeCharacteristic(f"{p} is not prime")
        super().__init__(p)

    def key(self):
        return ("GF", self.modulus)

    def descriptor(self):
        return f"GF({self.modulus})"

    def factor_primes(self, x):
        # Every nonzero element is a unit; there are no primes to return.
        return []


class PolyOverPrimeField(Ring):
    """GF(p)[x] with ascending coefficient tuples."""

    kind = "Poly"
    sr = 2

    def __init__(self, p: int):
        if not _is_prime(p):
            raise NonPrimeCharacteristic(f"{p} is not prime")
        self.p = p
        self.zero = ()
        self.one = (1,)

    def key(self):
        return ("Poly", self.p)

    def descriptor(self):
        return f"GF({self.p})[x]"

    def add(self, a, b):
        return _padd(self.p, a, b)

    def neg(self, a):
        return _pneg(self.p, a)

    def mul(self, a, b):
        return _pmul(self.p, a, b)

    def canon(self, x):
        if isinstance(x, int) and not isinstance(x, bool):
            return _ptrim([x % self.p])
        if isinstance(x, (tuple, list)):
            return _ptrim(c % self.p for c in x)
        raise ValueError(f"not a polynomial payload: {x!r}")

    def show(self, a):
        if not a:
            return "0"
        terms = []
        for i, c in enumerate(a):
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*x")
            else:
                terms.append(f"{c}*x^{i}")
        return "+".join(terms)

    def parse(self, text):
        coeffs: dict[int, int] = {}
        for raw in text.replace(" ", "").split("+"):
            if not raw:
                raise MalformedDescriptor(f"bad polynomial element {text!r}")
            if "x" not in raw:
                term_c, term_d = raw, 0
            else:
                head, _, tail = raw.partition("x")
                term_c = head.rstrip("*") or "1"
                term_d = int(tail.lstrip("^")) if tail else 1
            try:
                c = int(term_c)
                d = int(term_d)
            except ValueError:
                raise MalformedDescriptor(f"bad polynomial element {text!r}") from None
            coeffs[d] = coeffs.get(d, 0) + c
        deg = max(coeffs) if coeffs else 0
        return _ptrim((coeffs.get(i, 0)) % self.p for i in range(deg + 1))

    def bezout(self, gens):
        g: tuple = ()
        coeffs: list[tuple] = []
        for v in gens:
            g2, s, t = _pxgcd(self.p, g, v)
            coeffs = [_pmul(self.p, c, s) for c in coeffs]
            coeffs.append(t)
            g = g2
        return coeffs if g == (1,) else None

    def factor_primes(self, x):
        if not x:
            raise ValueError("cannot factor zero")
        return _poly_irreducible_divisors(self.p, x)


class ProductRing(Ring):
    kind = "Product"

    def __init__(self, factors: Sequence[Ring]):
        if len(factors) < 2:
            raise MalformedDescriptor("product needs at least two factors")
        self.factors = tuple(factors)
        if all(f.is_finite() for f in self.factors):
            self.sr = 1
        else:
            self.sr = max(f.sr for f in self.factors)
        self.zero = tuple(f.zero for f in self.factors)
        self.one = tuple(f.one for f in self.factors)

    def key(self):
        return ("Product",) + tuple(f.key() for f in self.factors)

    def descriptor(self):
        return "(" + ", ".join(f.descriptor() for f in self.factors) + ")"

    def add(self, a, b):
        return tuple(f.add(x, y) for f, x, y in zip(self.factors, a, b))

    def neg(self, a):
        return tuple(f.neg(x) for f, x in zip(self.factors, a))

    def mul(self, a, b):
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, a, b))

    def canon(self, x):
        if not isinstance(x, (tuple, list)) or len(x) != len(self.factors):
            raise ValueError(f"not a product payload of arity {len(self.factors)}: {x!r}")
        return tuple(f.canon(c) for f, c in zip(self.factors, x))

    def show(self, a):
        return "(" + ", ".join(f.show(c) for f, c in zip(self.factors, a)) + ")"

    def parse(self, text):
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise MalformedDescriptor(f"bad product element {text!r}")
        parts = _split_top_level(text[1:-1])
        if len(parts) != len(self.factors):
            raise MalformedDescriptor(
                f"product element arity {len(parts)} != {len(self.factors)}"
            )
        return tuple(f.parse(p) for f, p in zip(self.factors, parts))

    def is_finite(self):
        return all(f.is_finite() for f in self.factors)

    def elements(self):
        if not self.is_finite():
            raise NotFinite(f"{self.descriptor()} is not finite")
        return [tuple(t) for t in iproduct(*(f.elements() for f in self.factors))]

    def size(self):
        if not self.is_finite():
            raise NotFinite(f"{self.descriptor()} is not finite")
        return math.prod(f.size() for f in self.factors)

    def bezout(self, gens):
        out = []
        for idx, f in enumerate(self.factors):
            w = f.bezout([g[idx] for g in gens])
            if w is None:
                return None
            out.append(w)
        return [tuple(out[idx][j] for idx in range(len(self.factors))) for j in range(len(gens))]

    def factor_primes(self, x):
        raise UnsupportedRing("factor_pivot is componentwise on products; factor each component")


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class RingElement:
    """A value of a concrete ring, in canonical encoding."""

    ring: Ring
    value: Payload

    def __add__(self, other: "RingElement") -> "RingElement":
        return RingElement(self.ring, self.ring.add(self.value, self._coerce(other)))

    def __sub__(self, other: "RingElement") -> "RingElement":
        return RingElement(self.ring, self.ring.sub(self.value, self._coerce(other)))

    def __mul__(self, other: "RingElement") -> "RingElement":
        return RingElement(self.ring, self.ring.mul(self.value, self._coerce(other)))

    def __neg__(self) -> "RingElement":
        return RingElement(self.ring, self.ring.neg(self.value))

    def _coerce(self, other) -> Payload:
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise ValueError("elements of different rings")
            return other.value
        return self.ring.canon(other)

    def is_zero(self) -> bool:
        return self.ring.is_zero(self.value)

    def __str__(self) -> str:
        return self.ring.show(self.value)


# ---------------------------------------------------------------------------
# descriptor grammar


def _split_top_level(text: str) -> list[str]:
    """Split on commas not nested inside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise MalformedDescriptor(f"unbalanced parentheses in {text!r}")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise MalformedDescriptor(f"unbalanced parentheses in {text!r}")
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def parse_ring(descriptor: str) -> Ring:
    """Parse a ring descriptor.

    Grammar: ``"Z"`` | ``"Z/n"`` | ``"GF(p)"`` | ``"GF(p)[x]"`` | a
    parenthesized comma-joined product such as ``"(Z/4, GF(3))"``.
    """
    text = descriptor.strip()
    if not text:
        raise MalformedDescriptor("empty ring descriptor")
    if text == "Z":
        return Integers()
    if text.startswith("Z/"):
        body = text[2:]
        if not body.isdigit():
            raise MalformedDescriptor(f"bad modulus in {descriptor!r}")
        return Residue(int(body))
    if text.startswith("GF("):
        close = text.find(")")
        if close < 0:
            raise MalformedDescriptor(f"missing ')' in {descriptor!r}")
        body = text[3:close]
        rest = text[close + 1 :]
        if not body.isdigit():
            raise MalformedDescriptor(f"bad characteristic in {descriptor!r}")
        p = int(body)
        if rest == "":
            return PrimeField(p)
        if rest == "[x]":
            return PolyOverPrimeField(p)
        raise MalformedDescriptor(f"trailing text {rest!r} in {descriptor!r}")
    if text.startswith("(") and text.endswith(")"):
        parts = _split_top_level(text[1:-1])
        return ProductRing([parse_ring(p) for p in parts])
    raise MalformedDescriptor(f"unrecognized ring descriptor {descriptor!r}")


# ---------------------------------------------------------------------------
# public oracles


def bezout_witness(ring: Ring, gens: Sequence) -> tuple[RingElement, ...] | None:
    """Coefficients certifying that the generators span the unit ideal.

    Returns a tuple ``w`` with ``sum(g_i * w_i) == 1`` exactly, or ``None``
    when the ideal generated by ``gens`` is proper (the row is not
    unimodular).  Deterministic: chained extended Euclid in listed order.
    """
    if not gens:
        raise PreconditionViolated("bezout_witness needs at least one generator")
    payloads = [ring.el(g).value for g in gens]
    coeffs = ring.bezout(payloads)
    if coeffs is None:
        return None
    acc = ring.zero
    for g, c in zip(payloads, coeffs):
        acc = ring.add(acc, ring.mul(g, c))
    assert acc == ring.one, "Bezout coefficients failed to recompute to 1"
    return tuple(RingElement(ring, c) for c in coeffs)


def factor_pivot(ring: Ring, x) -> list[RingElement]:
    """Distinct prime (resp. irreducible) divisors of ``x``.

    For residue rings this factors the modulus; for prime fields the result
    is empty (every nonzero element is a unit).  Products are unsupported:
    callers factor componentwise.
    """
    xe = ring.el(x)
    if isinstance(ring, ProductRing):
        raise UnsupportedRing("factor_pivot: factor product components separately")
    if not isinstance(ring, (Residue, PrimeField)) and ring.is_zero(xe.value):
        raise ValueError("cannot factor zero")
    return [RingElement(ring, p) for p in ring.factor_primes(xe.value)]


def enumerate_elements(ring: Ring) -> list[RingElement]:
    """All elements of a finite ring in canonical ascending order."""
    return [RingElement(ring, p) for p in ring.elements()]




# ---------------------------------------------------------------------------
# the unimodularization engine
#
# Shared by stable_range_reduce and the subset oracle of the matrix
# normalization.  Given target values u_i and, per target, a list of
# (label, value) sources that column operations may add to it, find
# coefficients k such that (u_i + sum_s k[i][s] * value_s) is unimodular.
#
# Strategy ("anchor then fix"): modify one representative target per distinct
# source list; every other target keeps its value, so any prime dividing the
# final vector must divide the gcd d of the unmodified values.  Those finitely
# many primes are each discharged by a CRT-combined coefficient using the
# smallest non-negative representative at each prime.  When every unmodified
# value is zero (d = 0), one representative is first committed to a concrete
# nonzero value chosen to survive the primes at which the remaining movers are
# dead.  Finite residue rings skip the anchor phase: only the primes of the
# modulus matter.

_Sources = Sequence[Sequence[tuple[Any, Payload]]]


class _IntDomain:
    """Factorial-domain hooks for Z."""

    zero = 0
    one = 1

    @staticmethod
    def is_zero(a):
        return a == 0

    @staticmethod
    def is_unit(a):
        return a in (1, -1)

    @staticmethod
    def is_unit_ideal(vals):
        return math.gcd(*vals) == 1 if vals else False

    @staticmethod
    def gcd_list(vals):
        return math.gcd(*vals) if vals else 0

    @staticmethod
    def primes(x):
        return _prime_divisors(x)

    @staticmethod
    def mod(x, pr):
        return x % pr

    @staticmethod
    def tau_candidates(pr):
        return range(pr)

    @staticmethod
    def crt(residues):
        return _crt_ints(residues)

    @staticmethod
    def addmul(a, t, v):
        return a + t * v

    @staticmethod
    def units():
        return (1, -1)

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def solve_combination(vals, target):
        """Coefficients c with sum(c_i vals_i) == target, or None."""
        g, coeffs = _bezout_ints(vals)
        if g == 0:
            return None if target != 0 else [0] * len(vals)
        if target % g:
            return None
        q = target // g
        return [c * q for c in coeffs]


class _PolyDomain:
    """Factorial-domain hooks for GF(p)[x]."""

    def __init__(self, p: int):
        self.p = p
        self.zero = ()
        self.one = (1,)

    @staticmethod
    def is_zero(a):
        return a == ()

    @staticmethod
    def is_unit(a):
        return len(a) == 1

    def is_unit_ideal(self, vals):
        return len(self.gcd_list(vals)) == 1

    def gcd_list(self, vals):
        g: tuple = ()
        for v in vals:
            g = _pgcd(self.p, g, v)
        return g

    def primes(self, x):
        return _poly_irreducible_divisors(self.p, x)

    def mod(self, x, pr):
        return _pdivmod(self.p, x, pr)[1]

    def tau_candidates(self, pr):
        return [_ptrim([c]) for c in range(self.p)]

    def crt(self, residues):
        x: tuple = ()
        mod: tuple = (1,)
        for pr in sorted(residues):
            r = residues[pr]
            g, s, _ = _pxgcd(self.p, mod, pr)
            assert g == (1,)
            diff = _padd(self.p, r, _pneg(self.p, x))
            k = _pdivmod(self.p, _pmul(self.p, diff, s), pr)[1]
            x = _padd(self.p, x, _pmul(self.p, mod, k))
            mod = _pmul(self.p, mod, pr)
        return _pdivmod(self.p, x, mod)[1]

    def addmul(self, a, t, v):
        return _padd(self.p, a, _pmul(self.p, t, v))

    def units(self):
        return tuple((c,) for c in range(1, self.p))

    def sub(self, a, b):
        return _padd(self.p, a, _pneg(self.p, b))

    def solve_combination(self, vals, target):
        g: tuple = ()
        coeffs: list[tuple] = []
        for v in vals:
            g2, s, t = _pxgcd(self.p, g, v)
            coeffs = [_pmul(self.p, c, s) for c in coeffs]
            coeffs.append(t)
            g = g2
        if not g:
            return None if target else [()] * len(vals)
        q, r = _pdivmod(self.p, target, g)
        if r:
            return None
        return [_pmul(self.p, c, q) for c in coeffs]


def _commit_anchor(dom, u, sources, kappa, a, other_movers, other_fixed):
    """Drive target a to a concrete value surviving the dead primes.

    Dead primes are those at which every mover (value and sources) and every
    other fixed value vanish; at such primes only target a can save the final
    vector, so its committed value must not vanish there.  Mutates u[a] and
    kappa[a]; raises SubsetUnimodularizationExhausted when no commitment
    works.
    """
    usable = [(k, v) for k, v in sources[a] if not dom.is_zero(v)]
    vals = dict(usable)
    dead_vals = [u[j] for j in other_movers]
    dead_vals += [v for j in other_movers for _, v in sources[j]]
    dead_vals += [u[i] for i in other_fixed]
    dg = dom.gcd_list(dead_vals)

    if dom.is_zero(dg):
        # Everything except target a is permanently zero: drive u[a] to a unit.
        combo = None
        for unit in dom.units():
            combo = dom.solve_combination([v for _, v in usable], dom.sub(unit, u[a]))
            if combo is not None:
                break
        if combo is None:
            raise SubsetUnimodularizationExhausted(
                "the only live target cannot reach a unit"
            )
        for (k, v), c in zip(usable, combo):
            if not dom.is_zero(c):
                kappa[a][k] = c
                u[a] = dom.addmul(u[a], c, v)
        return

    residues: dict[Any, dict] = {}
    handled = []
    for pr in dom.primes(dg):
        handled.append(pr)
        if not dom.is_zero(dom.mod(u[a], pr)):
            continue
        pick = next((kv for kv in usable if not dom.is_zero(dom.mod(kv[1], pr))), None)
        if pick is None:
            raise SubsetUnimodularizationExhausted(
                "target entries and permitted columns all vanish at a prime"
            )
        k, v = pick
        tau = next(
            t for t in dom.tau_candidates(pr)
            if not dom.is_zero(dom.mod(dom.addmul(u[a], t, v), pr))
        )
        residues.setdefault(k, {})[pr] = tau

    if residues:
        for k, res in residues.items():
            full = {pr: res.get(pr, dom.zero) for pr in handled}
            c = dom.crt(full)
            if not dom.is_zero(c):
                kappa[a][k] = c
                u[a] = dom.addmul(u[a], c, vals[k])
    if dom.is_zero(u[a]):
        if not usable:
            raise SubsetUnimodularizationExhausted("anchor candidate is immovably zero")
        # dg had no prime obstruction for a; any single step makes u[a] nonzero
        k, v = usable[0]
        kappa[a][k] = dom.one
        u[a] = dom.addmul(u[a], dom.one, v)


def _unimodularize_factorial(dom, targets: list, sources: _Sources) -> list[dict]:
    n = len(targets)
    u = list(targets)
    kappa: list[dict] = [dict() for _ in range(n)]
    if dom.is_unit_ideal(u):
        return kappa

    # One mover per distinct source list, first index wins.
    movers: list[int] = []
    seen: set = set()
    for i, srcs in enumerate(sources):
        sig = tuple(srcs)
        if srcs and sig not in seen:
            seen.add(sig)
            movers.append(i)
    fixed = [i for i in range(n) if i not in movers]

    d = dom.gcd_list([u[i] for i in fixed])
    if dom.is_zero(d):
        # Every unmodified value is zero, so the prime support of the final
        # vector is unknowable in advance.  Commit one target to a concrete
        # nonzero value first, lowest index first, falling through to the next
        # candidate when a commitment is infeasible; a consumed representative
        # is replaced by the next target carrying the same source list.
        committed = False
        last_exc = None
        for a in range(n):
            if dom.is_zero(u[a]) and all(dom.is_zero(v) for _, v in sources[a]):
                continue  # immovable zero, useless as an anchor
            try:
                _commit_anchor(
                    dom, u, sources, kappa, a,
                    [j for j in movers if j != a],
                    [i for i in fixed if i != a],
                )
            except SubsetUnimodularizationExhausted as exc:
                last_exc = exc
                continue
            if a in movers:
                movers.remove(a)
                # keep this source list represented if another target carries it
                promo = next(
                    (i for i in fixed if tuple(sources[i]) == tuple(sources[a])),
                    None,
                )
                if promo is not None:
                    fixed.remove(promo)
                    movers.append(promo)
            if a not in fixed:
                fixed.append(a)
            committed = True
            break
        if not committed:
            raise SubsetUnimodularizationExhausted(
                "no target can anchor the vector"
            ) from last_exc
        d = dom.gcd_list([u[i] for i in fixed])
        assert not dom.is_zero(d)

    primes = [] if dom.is_unit(d) else dom.primes(d)
    assignments: dict[Any, tuple[int, Any, Any]] = {}
    for pr in primes:
        if any(not dom.is_zero(dom.mod(u[i], pr)) for i in range(n)):
            continue  # anchored: some entry survives this prime untouched
        found = None
        for i in sorted(movers):
            for k, v in sources[i]:
                if not dom.is_zero(dom.mod(v, pr)):
                    tau = next(
                        t for t in dom.tau_candidates(pr)
                        if not dom.is_zero(dom.mod(dom.addmul(u[i], t, v), pr))
                    )
                    found = (i, k, tau)
                    break
            if found:
                break
        if found is None:
            raise SubsetUnimodularizationExhausted(
                "target entries and permitted columns all vanish at a prime"
            )
        assignments[pr] = found

    # Every coefficient is pinned at *every* prime of d: the assigned residue
    # where it carries a fix, zero elsewhere, so modifications never destroy
    # the entry anchoring another prime.
    per_pair: dict[tuple[int, Any], dict] = {}
    for pr, (i, k, tau) in assignments.items():
        per_pair.setdefault((i, k), {})[pr] = tau
    for (i, k), res in per_pair.items():
        full = {pr: res.get(pr, dom.zero) for pr in primes}
        c = dom.crt(full)
        if not dom.is_zero(c):
            kappa[i][k] = c

    final = []
    for i in range(n):
        vals = dict(sources[i])
        acc = targets[i]
        for k, c in kappa[i].items():
            acc = dom.addmul(acc, c, vals[k])
        final.append(acc)
    assert dom.is_unit_ideal(final), "unimodularization engine produced a bad vector"
    return kappa


def _unimodularize_finite(ring: Residue, targets: list, sources: _Sources) -> list[dict]:
    n = len(targets)
    N = ring.modulus
    kappa: list[dict] = [dict() for _ in range(n)]
    if math.gcd(*targets, N) == 1:
        return kappa
    primes = _prime_divisors(N)
    assignments: dict[int, tuple[int, Any, int]] = {}
    for pr in primes:
        if any(ui % pr for ui in targets):
            continue
        found = None
        for i in range(n):
            for k, v in sources[i]:
                if v % pr:
                    tau = next(t for t in range(pr) if (targets[i] + t * v) % pr)
                    found = (i, k, tau)
                    break
            if found:
                break
        if found is None:
            raise SubsetUnimodularizationExhausted(
                "target entries and permitted columns all vanish at a prime of the modulus"
            )
        assignments[pr] = found
    # pin every coefficient at every prime of N (zero where it carries no fix)
    per_pair: dict[tuple[int, Any], dict[int, int]] = {}
    for pr, (i, k, tau) in assignments.items():
        per_pair.setdefault((i, k), {})[pr] = tau
    for (i, k), res in per_pair.items():
        full = {pr: res.get(pr, 0) for pr in primes}
        c = _crt_ints(full) % N
        if c:
            kappa[i][k] = c
    final = list(targets)
    for i in range(n):
        vals = dict(sources[i])
        for k, c in kappa[i].items():
            final[i] = (final[i] + c * vals[k]) % N
    assert math.gcd(*final, N) == 1, "unimodularization engine produced a bad vector"
    return kappa


def _unimodularize(ring: Ring, targets: list, sources: _Sources) -> list[dict]:
    """Core engine; targets, source values, and coefficients are payloads."""
    if isinstance(ring, Integers):
        return _unimodularize_factorial(_IntDomain, list(targets), sources)
    if isinstance(ring, PolyOverPrimeField):
        return _unimodularize_factorial(_PolyDomain(ring.p), list(targets), sources)
    if isinstance(ring, Residue):
        return _unimodularize_finite(ring, list(targets), sources)
    if isinstance(ring, ProductRing):
        merged: list[dict] = [dict() for _ in targets]
        for idx, f in enumerate(ring.factors):
            comp_targets = [t[idx] for t in targets]
            comp_sources = [[(k, v[idx]) for k, v in srcs] for srcs in sources]
            for i, kd in enumerate(_unimodularize(f, comp_targets, comp_sources)):
                for k, c in kd.items():
                    cur = list(merged[i].get(k, ring.zero))
                    cur[idx] = c
                    merged[i][k] = tuple(cur)
        return merged
    raise UnsupportedRing(f"no unimodularization engine for {ring.descriptor()}")


def stable_range_reduce(ring: Ring, b: Sequence, c) -> list[RingElement]:
    """Shorten a unimodular vector by absorbing the pivot ``c``.

    Given ``(b_1, ..., b_k, c)`` unimodular with ``k`` at least the stable
    rank of the ring, returns ``t`` such that ``(b_1 + t_1 c, ...)`` is
    unimodular.  Deterministic: if ``b`` alone is already unimodular the
    result is zero; otherwise coefficients come from the CRT construction
    over the prime divisors of the relevant pivot gcd, with the smallest
    non-negative representative at each prime.
    """
    be = [ring.el(x) for x in b]
    ce = ring.el(c)
    k = len(be)
    if k < ring.sr:
        raise PreconditionViolated(f"need at least sr={ring.sr} entries, got {k}")
    payloads = [e.value for e in be]
    if ring.bezout(payloads + [ce.value]) is None:
        raise PreconditionViolated("(b, c) is not unimodular")
    zero = RingElement(ring, ring.zero)
    if ring.bezout(payloads) is not None:
        return [zero] * k
    if ring.is_zero(ce.value):
        raise PreconditionViolated("zero pivot with b not unimodular")
    sources = [(("pivot", ce.value),) for _ in range(k)]
    try:
        kappa = _unimodularize(ring, payloads, sources)
    except SubsetUnimodularizationExhausted as exc:  # unreachable when preconditions hold
        raise PreconditionViolated(str(exc)) from exc
    return [RingElement(ring, kd.get("pivot", ring.zero)) for kd in kappa]
