"""Finite commutative rings with involution, symmetry and mu.

Elements are stored as small integer codes ``0 <= c < q``:

* ``modular(m)``: the residue itself,
* ``gaussian_modular(m)``: ``a*m + b`` for ``a + b*w`` with ``w^2 = -1``
  (so the code order is lexicographic in ``(a, b)``),
* ``table``: the row index in the supplied tables.

Every ring carries dense numpy operation tables so that matrices and
batches of Heisenberg elements can be handled by fancy indexing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import (
    ContextMismatch,
    InvalidInvolution,
    InvalidMu,
    InvalidSymmetry,
    MalformedSpec,
    NonUnitLambda,
    UnsupportedExponent,
)

KINDS = ("modular", "gaussian_modular", "table")


@dataclass(frozen=True)
class RingSpec:
    """Serialisable description of a Hermitian ring context."""

    kind: str
    m: int | None = None
    add: tuple | None = None
    mul: tuple | None = None
    one: int | None = None
    involution: Any = "identity"
    lam: str = "1"
    mu: str = "1"
    n: int = 3

    @classmethod
    def from_dict(cls, d: dict) -> "RingSpec":
        try:
            ring = d["ring"]
            kind = ring["kind"]
            lam = d["lambda"]
            mu = d["mu"]
            n = d["n"]
        except (KeyError, TypeError) as exc:
            raise MalformedSpec(f"missing field {exc}") from None
        if kind not in KINDS:
            raise MalformedSpec(f"unknown ring kind {kind!r}")
        inv = d.get("involution", "identity")
        if isinstance(inv, dict):
            if "table" not in inv:
                raise MalformedSpec("table involution needs a 'table' list")
            inv = tuple(int(v) for v in inv["table"])
        elif isinstance(inv, list):
            inv = tuple(int(v) for v in inv)
        if kind == "table":
            try:
                add = tuple(tuple(int(v) for v in row) for row in ring["add"])
                mul = tuple(tuple(int(v) for v in row) for row in ring["mul"])
                one = int(ring["one"])
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedSpec(f"bad table ring: {exc}") from None
            return cls(kind, None, add, mul, one, inv, str(lam), str(mu), int(n))
        if "m" not in ring:
            raise MalformedSpec("modular rings need 'm'")
        return cls(kind, int(ring["m"]), None, None, None, inv, str(lam), str(mu), int(n))

    def to_dict(self) -> dict:
        if self.kind == "table":
            ring = {"kind": "table", "add": [list(r) for r in self.add],
                    "mul": [list(r) for r in self.mul], "one": self.one}
        else:
            ring = {"kind": self.kind, "m": self.m}
        inv = self.involution
        if isinstance(inv, tuple):
            inv = {"table": list(inv)}
        return {"ring": ring, "involution": inv, "lambda": self.lam, "mu": self.mu, "n": self.n}


class FiniteRing:
    """A finite commutative unital ring given by operation tables."""

    def __init__(self, kind: str, labels: Sequence[str], add, mul, one: int, m: int | None = None):
        self.kind = kind
        self.m = m
        self.q = len(labels)
        self.labels = list(labels)
        self.index = {s: i for i, s in enumerate(self.labels)}
        self.add_t = np.asarray(add, dtype=np.intp)
        self.mul_t = np.asarray(mul, dtype=np.intp)
        if self.add_t.shape != (self.q, self.q) or self.mul_t.shape != (self.q, self.q):
            raise MalformedSpec("operation tables must be q x q")
        if self.add_t.min() < 0 or self.add_t.max() >= self.q or self.mul_t.min() < 0 or self.mul_t.max() >= self.q:
            raise MalformedSpec("table entries out of range")
        self.add = self.add_t.tolist()
        self.mul = self.mul_t.tolist()
        zeros = [z for z in range(self.q) if all(self.add[z][x] == x for x in range(self.q))]
        if not zeros:
            raise MalformedSpec("addition has no identity")
        self.zero = zeros[0]
        self.one = one
        neg = []
        for x in range(self.q):
            inv = [y for y in range(self.q) if self.add[x][y] == self.zero]
            if not inv:
                raise MalformedSpec(f"element {x} has no additive inverse")
            neg.append(inv[0])
        self.neg = neg
        self.neg_t = np.asarray(neg, dtype=np.intp)
        self.sub_t = self.add_t[:, self.neg_t]
        self.sub = self.sub_t.tolist()
        self.units = [x for x in range(self.q) if self.one in self.mul[x]]
        self._inv = {x: self.mul[x].index(self.one) for x in self.units}

    # -- construction helpers -------------------------------------------------

    @classmethod
    def modular(cls, m: int) -> "FiniteRing":
        if m < 2:
            raise MalformedSpec("modulus must be >= 2")
        r = np.arange(m)
        return cls("modular", [str(i) for i in range(m)],
                   (r[:, None] + r[None, :]) % m, (r[:, None] * r[None, :]) % m, 1 % m, m)

    @classmethod
    def gaussian(cls, m: int) -> "FiniteRing":
        if m < 2:
            raise MalformedSpec("modulus must be >= 2")
        q = m * m
        a = np.arange(q) // m
        b = np.arange(q) % m
        A1, A2 = a[:, None], a[None, :]
        B1, B2 = b[:, None], b[None, :]
        add = ((A1 + A2) % m) * m + (B1 + B2) % m
        mul = ((A1 * A2 - B1 * B2) % m) * m + (A1 * B2 + A2 * B1) % m
        labels = [f"{i // m}+{i % m}*w" for i in range(q)]
        return cls("gaussian_modular", labels, add, mul, 1 * m, m)

    @classmethod
    def from_tables(cls, add, mul, one: int) -> "FiniteRing":
        q = len(add)
        ring = cls("table", [f"#{i}" for i in range(q)], add, mul, one)
        ring._check_axioms()
        return ring

    def _check_axioms(self):
        A, M, Q = self.add_t, self.mul_t, range(self.q)
        if not (A == A.T).all() or not (M == M.T).all():
            raise MalformedSpec("table ring must be commutative")
        if not (M[self.one] == np.arange(self.q)).all():
            raise MalformedSpec("'one' is not a multiplicative identity")
        if self.one == self.zero:
            raise MalformedSpec("ring must satisfy 1 != 0")
        for x in Q:
            # (x+y)+z == x+(y+z), (xy)z == x(yz), x(y+z) == xy+xz for all y,z
            if not (A[A[x]] == A[x][A]).all():
                raise MalformedSpec("addition is not associative")
            if not (M[M[x]] == M[x][M]).all():
                raise MalformedSpec("multiplication is not associative")
            if not (M[x][A] == A[M[x][:, None], M[x][None, :]]).all():
                raise MalformedSpec("multiplication does not distribute")

    # -- scalar helpers -------------------------------------------------------

    def parse(self, s) -> int:
        s = str(s).strip()
        if self.kind == "modular":
            try:
                return int(s) % self.m
            except ValueError:
                raise MalformedSpec(f"bad modular element {s!r}") from None
        if self.kind == "gaussian_modular":
            return self._parse_gaussian(s)
        if s in self.index:
            return self.index[s]
        if s.isdigit() and int(s) < self.q:
            return int(s)
        raise MalformedSpec(f"bad table element {s!r}")

    def _parse_gaussian(self, s: str) -> int:
        t = s.replace(" ", "")
        if not t:
            raise MalformedSpec("empty element")
        a = b = 0
        for sign, body in re.findall(r"([+-]?)([^+-]+)", t):
            k = -1 if sign == "-" else 1
            if body.endswith("w"):
                coef = body[:-1].rstrip("*")
                try:
                    b += k * (int(coef) if coef else 1)
                except ValueError:
                    raise MalformedSpec(f"bad gaussian element {s!r}") from None
            else:
                try:
                    a += k * int(body)
                except ValueError:
                    raise MalformedSpec(f"bad gaussian element {s!r}") from None
        m = self.m
        return (a % m) * m + (b % m)

    def fmt(self, x: int) -> str:
        return self.labels[x]

    def inverse(self, x: int) -> int:
        return self._inv[x]

    def is_unit(self, x: int) -> bool:
        return x in self._inv

    # -- matrix products ------------------------------------------------------

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Product of code matrices (broadcasts over leading batch axes)."""
        if self.kind == "modular":
            return (np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64)) % self.m
        if self.kind == "gaussian_modular":
            m = self.m
            A = np.asarray(A, dtype=np.int64)
            B = np.asarray(B, dtype=np.int64)
            ar, ai = A // m, A % m
            br, bi = B // m, B % m
            return ((ar @ br - ai @ bi) % m) * m + (ar @ bi + ai @ br) % m
        A = np.asarray(A, dtype=np.intp)
        B = np.asarray(B, dtype=np.intp)
        acc = None
        for k in range(A.shape[-1]):
            term = self.mul_t[A[..., :, k, None], B[..., k, None, :]]
            acc = term if acc is None else self.add_t[acc, term]
        return acc


class RingElement:
    """A ring element bound to its context; supports the usual operators."""

    __slots__ = ("ctx", "code")

    def __init__(self, ctx: "HermitianCtx", code: int):
        self.ctx = ctx
        self.code = code

    def _other(self, other) -> int:
        if isinstance(other, RingElement):
            if other.ctx is not self.ctx:
                raise ContextMismatch("elements belong to different contexts")
            return other.code
        if isinstance(other, int):
            return self.ctx.ring.parse(other)
        return NotImplemented

    def __add__(self, other):
        return self.ctx.element(self.ctx.add(self.code, self._other(other)))

    __radd__ = __add__

    def __mul__(self, other):
        return self.ctx.element(self.ctx.mul(self.code, self._other(other)))

    __rmul__ = __mul__

    def __sub__(self, other):
        return self.ctx.element(self.ctx.sub(self.code, self._other(other)))

    def __neg__(self):
        return self.ctx.element(self.ctx.neg(self.code))

    def __eq__(self, other):
        if isinstance(other, RingElement):
            return self.ctx is other.ctx and self.code == other.code
        if isinstance(other, (int, str)):
            return self.code == self.ctx.ring.parse(other)
        return NotImplemented

    def __hash__(self):
        return hash((id(self.ctx), self.code))

    def bar(self):
        return self.ctx.element(self.ctx.bar(self.code))

    def __str__(self):
        return self.ctx.ring.fmt(self.code)

    def __repr__(self):
        return f"RingElement({self})"


class HermitianCtx:
    """A finite Hermitian ring ``(R, bar, lambda, mu)`` plus the dimension ``n``.

    Immutable after construction.  Scalar arithmetic works on integer codes;
    ``*_t`` attributes are numpy tables for vectorised work.
    """

    def __init__(self, spec: RingSpec, ring: FiniteRing, bar: Sequence[int], lam: int, mu: int):
        self.spec = spec
        self.ring = ring
        self.q = ring.q
        self.n = spec.n
        self.dim = 2 * spec.n + 1
        self.bar_list = list(bar)
        self.bar_t = np.asarray(bar, dtype=np.intp)
        self.lam = lam
        self.mu = mu
        self.zero = ring.zero
        self.one = ring.one
        self.add_t, self.mul_t, self.neg_t, self.sub_t = ring.add_t, ring.mul_t, ring.neg_t, ring.sub_t
        self._add, self._mul, self._neg, self._sub = ring.add, ring.mul, ring.neg, ring.sub
        self.lam_bar = self.bar_list[lam]
        self.mu_bar = self.bar_list[mu]

    def __repr__(self):
        s = self.spec
        base = f"{s.kind}({s.m})" if s.kind != "table" else f"table({self.q})"
        return f"HermitianCtx({base}, lambda={s.lam}, mu={s.mu}, n={s.n})"

    # scalar arithmetic on codes
    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def sub(self, a: int, b: int) -> int:
        return self._sub[a][b]

    def mul(self, a: int, b: int, *rest: int) -> int:
        r = self._mul[a][b]
        for c in rest:
            r = self._mul[r][c]
        return r

    def neg(self, a: int) -> int:
        return self._neg[a]

    def bar(self, a: int) -> int:
        return self.bar_list[a]

    def sum(self, values) -> int:
        r = self.zero
        for v in values:
            r = self._add[r][v]
        return r

    def lambda_power(self, e: int) -> int:
        """``lambda**e`` for the exponents produced by epsilon arithmetic."""
        if e not in (-2, -1, 0, 1, 2):
            raise UnsupportedExponent(f"lambda exponent {e} outside -2..2")
        base = self.lam if e > 0 else self.lam_bar
        r = self.one
        for _ in range(abs(e)):
            r = self._mul[r][base]
        return r

    def elements(self) -> list[int]:
        return list(range(self.q))

    def element(self, x) -> RingElement:
        code = x if isinstance(x, (int, np.integer)) and not isinstance(x, bool) else self.ring.parse(x)
        return RingElement(self, int(code))

    def parse(self, s) -> int:
        return self.ring.parse(s)

    def fmt(self, x: int) -> str:
        return self.ring.fmt(x)

    def matmul(self, A, B) -> np.ndarray:
        return self.ring.matmul(A, B)


def _build_ring(spec: RingSpec) -> FiniteRing:
    if spec.kind == "modular":
        return FiniteRing.modular(spec.m)
    if spec.kind == "gaussian_modular":
        return FiniteRing.gaussian(spec.m)
    if spec.kind == "table":
        return FiniteRing.from_tables(spec.add, spec.mul, spec.one)
    raise MalformedSpec(f"unknown ring kind {spec.kind!r}")


def _build_involution(spec: RingSpec, ring: FiniteRing) -> list[int]:
    inv = spec.involution
    if inv == "identity":
        return list(range(ring.q))
    if inv == "gaussian_conjugation":
        if ring.kind != "gaussian_modular":
            raise MalformedSpec("gaussian_conjugation needs a gaussian_modular ring")
        m = ring.m
        return [(c // m) * m + (-(c % m)) % m for c in range(ring.q)]
    if isinstance(inv, (tuple, list)):
        if len(inv) != ring.q or any(not 0 <= v < ring.q for v in inv):
            raise MalformedSpec("involution table has wrong shape")
        return list(inv)
    raise MalformedSpec(f"unknown involution {inv!r}")


def make_ctx(spec: RingSpec | dict, validate: bool = True) -> HermitianCtx:
    """Build a Hermitian context, exhaustively checking every axiom.

    ``validate=False`` skips the Hermitian checks; it exists only so that
    negative controls can run the suites on a deliberately broken context.
    """
    if isinstance(spec, dict):
        spec = RingSpec.from_dict(spec)
    if spec.n < 3:
        raise MalformedSpec("n must be >= 3")
    ring = _build_ring(spec)
    bar = _build_involution(spec, ring)
    lam = ring.parse(spec.lam)
    mu = ring.parse(spec.mu)
    ctx = HermitianCtx(spec, ring, bar, lam, mu)
    if validate:
        _validate(ctx)
    return ctx


def _validate(ctx: HermitianCtx) -> None:
    ring, b = ctx.ring, ctx.bar_list
    Q = range(ctx.q)
    if sorted(b) != list(Q):
        raise InvalidInvolution("involution is not bijective")
    if b[ctx.one] != ctx.one:
        raise InvalidInvolution("bar(1) != 1")
    for x in Q:
        for y in Q:
            if b[ring.add[x][y]] != ring.add[b[x]][b[y]]:
                raise InvalidInvolution("involution is not additive")
            if b[ring.mul[x][y]] != ring.mul[b[y]][b[x]]:
                raise InvalidInvolution("involution is not multiplicative")
    if not ring.is_unit(ctx.lam):
        raise NonUnitLambda(f"lambda={ring.fmt(ctx.lam)} is not a unit")
    for x in Q:
        if b[b[x]] != ctx.mul(ctx.lam, x, ctx.lam_bar):
            raise InvalidSymmetry(f"bar(bar({ring.fmt(x)})) != lambda*x*bar(lambda)")
    if ctx.mul(ctx.lam, ctx.lam_bar) != ctx.one:
        raise InvalidSymmetry("lambda*bar(lambda) != 1")
    if ctx.mu != ctx.mul(ctx.mu_bar, ctx.lam):
        raise InvalidMu(f"mu={ring.fmt(ctx.mu)} != bar(mu)*lambda")


# -- module level operations on bound elements ---------------------------------

def _same(a: RingElement, b: RingElement) -> HermitianCtx:
    if a.ctx is not b.ctx:
        raise ContextMismatch("elements belong to different contexts")
    return a.ctx


def add(a: RingElement, b: RingElement) -> RingElement:
    ctx = _same(a, b)
    return ctx.element(ctx.add(a.code, b.code))


def sub(a: RingElement, b: RingElement) -> RingElement:
    ctx = _same(a, b)
    return ctx.element(ctx.sub(a.code, b.code))


def mul(a: RingElement, b: RingElement) -> RingElement:
    ctx = _same(a, b)
    return ctx.element(ctx.mul(a.code, b.code))


def neg(a: RingElement) -> RingElement:
    return a.ctx.element(a.ctx.neg(a.code))


def bar(a: RingElement) -> RingElement:
    return a.ctx.element(a.ctx.bar(a.code))


def lambda_power(ctx: HermitianCtx, e: int) -> RingElement:
    return ctx.element(ctx.lambda_power(e))


def enumerate_ring(ctx: HermitianCtx) -> list[RingElement]:
    return [ctx.element(x) for x in range(ctx.q)]


# -- named contexts used across tests, CLI presets and acceptance ---------------

PRESETS = {
    "F2": {"ring": {"kind": "modular", "m": 2}, "involution": "identity", "lambda": "1", "mu": "1", "n": 3},
    "Z4": {"ring": {"kind": "modular", "m": 4}, "involution": "identity", "lambda": "1", "mu": "2", "n": 3},
    "G3": {"ring": {"kind": "gaussian_modular", "m": 3}, "involution": "gaussian_conjugation",
           "lambda": "1", "mu": "1", "n": 3},
}


def preset(name: str, n: int | None = None, **overrides) -> HermitianCtx:
    d = dict(PRESETS[name])
    if n is not None:
        d["n"] = n
    for key, val in overrides.items():
        key = "lambda" if key == "lam" else key
        if key not in d:
            raise MalformedSpec(f"unknown context field {key!r}")
        d[key] = val
    return make_ctx(d)
