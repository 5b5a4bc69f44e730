"""Bigraded graded-commutative monomial algebras over F_p.

A monomial is a tuple of integer exponents aligned with the generator order
of its :class:`MonomialAlgebraSpec`.  Bidegrees are pairs ``(s, n)`` of
filtration and total degree; signs follow the Koszul rule on total degree,
relative to the declaration order of the generators.
"""

from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np
from scipy.optimize import linprog

Monomial = tuple[int, ...]
Bidegree = tuple[int, int]

_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


class AlgebraError(ValueError):
    """Base class for errors raised by the algebra layer."""


class ValidationError(AlgebraError):
    """A monomial or generator violates the constraints of its algebra."""


class EnumerationInfiniteError(AlgebraError):
    """A window meets infinitely many monomials of the algebra."""

    def __init__(self, message: str, generators: Iterable[str]):
        super().__init__(message)
        self.generators = tuple(generators)


class DomainError(ValueError):
    """An argument lies outside the domain of a combinatorial function."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    return all(p % q for q in range(3, math.isqrt(p) + 1, 2))


def check_prime(p: int) -> int:
    """Return ``p`` as an int if it is an odd prime, else raise."""
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
        raise DomainError(f"prime must be an integer, got {p!r}")
    p = int(p)
    if p < 3 or not is_prime(p):
        raise DomainError(f"{p} is not an odd prime")
    return p


class Kind(str, enum.Enum):
    EXTERIOR = "exterior"
    POLYNOMIAL = "polynomial"
    TRUNCATED = "truncated"
    LAURENT = "laurent"


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    kind: Kind
    bidegree: Bidegree
    height: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "bidegree", (int(self.bidegree[0]), int(self.bidegree[1])))
        if not _NAME_RE.match(self.name):
            raise ValidationError(f"bad generator name {self.name!r}")
        n = self.bidegree[1]
        if self.kind is Kind.TRUNCATED:
            if self.height is None or self.height < 1:
                raise ValidationError(f"{self.name}: truncated height must be >= 1")
        elif self.height is not None:
            raise ValidationError(f"{self.name}: only truncated generators carry a height")
        if self.kind is Kind.EXTERIOR and n % 2 == 0:
            raise ValidationError(f"{self.name}: exterior generator needs odd total degree")
        # over an odd prime an odd generator squares to zero, so only exterior
        # generators may be odd
        if self.kind is not Kind.EXTERIOR and n % 2 != 0:
            raise ValidationError(f"{self.name}: {self.kind.value} generator needs even total degree")

    @property
    def odd(self) -> bool:
        return self.bidegree[1] % 2 != 0

    @property
    def max_exponent(self) -> int | None:
        if self.kind is Kind.EXTERIOR:
            return 1
        if self.kind is Kind.TRUNCATED:
            return self.height - 1
        return None

    @property
    def min_exponent(self) -> int | None:
        return None if self.kind is Kind.LAURENT else 0


@dataclass(frozen=True)
class Window:
    """Closed box ``s_min <= s <= s_max``, ``n_min <= n <= n_max``."""

    s_min: int
    s_max: int
    n_min: int
    n_max: int

    @classmethod
    def parse(cls, text: str) -> "Window":
        """Parse ``s=A..B,n=C..D``."""
        parts = {}
        for chunk in text.replace(" ", "").split(","):
            m = re.fullmatch(r"([sn])=(-?\d+)\.\.(-?\d+)", chunk)
            if not m or m.group(1) in parts:
                raise ValueError(f"bad window component {chunk!r} in {text!r}")
            parts[m.group(1)] = (int(m.group(2)), int(m.group(3)))
        if set(parts) != {"s", "n"}:
            raise ValueError(f"window needs both s and n ranges: {text!r}")
        w = cls(parts["s"][0], parts["s"][1], parts["n"][0], parts["n"][1])
        if w.is_empty:
            raise ValueError(f"empty window {text!r}")
        return w

    def __str__(self) -> str:
        return f"s={self.s_min}..{self.s_max},n={self.n_min}..{self.n_max}"

    @property
    def is_empty(self) -> bool:
        return self.s_min > self.s_max or self.n_min > self.n_max

    @property
    def filtration_span(self) -> int:
        return self.s_max - self.s_min

    def contains(self, s: int, n: int) -> bool:
        return self.s_min <= s <= self.s_max and self.n_min <= n <= self.n_max

    def __contains__(self, bideg: Bidegree) -> bool:
        return self.contains(bideg[0], bideg[1])

    def intersect(self, other: "Window") -> "Window":
        return Window(max(self.s_min, other.s_min), min(self.s_max, other.s_max),
                      max(self.n_min, other.n_min), min(self.n_max, other.n_max))

    def shift(self, ds: int, dn: int) -> "Window":
        return Window(self.s_min + ds, self.s_max + ds, self.n_min + dn, self.n_max + dn)

    def as_dict(self) -> dict:
        return {"s_min": self.s_min, "s_max": self.s_max, "n_min": self.n_min, "n_max": self.n_max}


@dataclass(frozen=True)
class MonomialAlgebraSpec:
    prime: int
    generators: tuple[GeneratorSpec, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)
    _odd: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "prime", check_prime(self.prime))
        object.__setattr__(self, "generators", tuple(self.generators))
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate generator names in {names}")
        object.__setattr__(self, "_index", {g.name: i for i, g in enumerate(self.generators)})
        object.__setattr__(self, "_odd", tuple(i for i, g in enumerate(self.generators) if g.odd))

    def __len__(self) -> int:
        return len(self.generators)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.generators)

    @property
    def odd_indices(self) -> tuple[int, ...]:
        return self._odd

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValidationError(f"unknown generator {name!r}") from None

    def has(self, name: str) -> bool:
        return name in self._index

    @property
    def unit(self) -> Monomial:
        return (0,) * len(self.generators)

    def monomial(self, exps: Mapping[str, int] | None = None, /, **kw: int) -> Monomial:
        """Build a validated monomial from generator names, e.g. ``monomial(t=1, l1=1)``."""
        vec = [0] * len(self.generators)
        for name, e in itertools.chain((exps or {}).items(), kw.items()):
            vec[self.index(name)] += int(e)
        m = tuple(vec)
        self.validate(m)
        return m

    def exponents(self, m: Monomial) -> dict[str, int]:
        return {g.name: e for g, e in zip(self.generators, m) if e}

    def violation(self, m: Monomial) -> str | None:
        if len(m) != len(self.generators):
            return f"monomial has {len(m)} exponents, algebra has {len(self.generators)} generators"
        for g, e in zip(self.generators, m):
            if g.kind is Kind.LAURENT:
                continue
            if e < 0:
                return f"negative exponent {e} on non-Laurent generator {g.name}"
            top = g.max_exponent
            if top is not None and e > top:
                return f"exponent {e} on {g.kind.value} generator {g.name} exceeds {top}"
        return None

    def is_valid(self, m: Monomial) -> bool:
        return self.violation(m) is None

    def validate(self, m: Monomial) -> None:
        why = self.violation(m)
        if why is not None:
            raise ValidationError(why)

    def bidegree(self, m: Monomial) -> Bidegree:
        s = n = 0
        for g, e in zip(self.generators, m):
            if e:
                s += e * g.bidegree[0]
                n += e * g.bidegree[1]
        return (s, n)

    def parity(self, m: Monomial) -> int:
        return sum(m[i] for i in self._odd) & 1

    def format_monomial(self, m: Monomial) -> str:
        parts = []
        for g, e in zip(self.generators, m):
            if e == 1:
                parts.append(g.name)
            elif e:
                parts.append(f"{g.name}^{e}")
        return "*".join(parts) if parts else "1"

    def parse_monomial(self, text: str) -> Monomial:
        text = text.strip()
        vec = [0] * len(self.generators)
        if text != "1":
            for factor in text.split("*"):
                m = re.fullmatch(r"([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?", factor.strip())
                if not m:
                    raise ValidationError(f"cannot parse factor {factor!r} of {text!r}")
                vec[self.index(m.group(1))] += int(m.group(2) or 1)
        mono = tuple(vec)
        self.validate(mono)
        return mono

    def structural_bounds(self) -> tuple[int | None, int | None, int | None, int | None]:
        """Bounds on (s, n) over all monomials, ``None`` where unbounded."""
        out = []
        for axis in (0, 1):
            lo: int | None = 0
            hi: int | None = 0
            for g in self.generators:
                v = g.bidegree[axis]
                if v == 0:
                    continue
                top = g.max_exponent
                if top is not None:
                    lo = None if lo is None else lo + min(0, v * top)
                    hi = None if hi is None else hi + max(0, v * top)
                elif g.kind is Kind.LAURENT:
                    lo = hi = None
                elif v > 0:
                    hi = None
                else:
                    lo = None
            out.extend([lo, hi])
        return tuple(out)


def bidegree_of(alg: MonomialAlgebraSpec, m: Monomial) -> Bidegree:
    """Bidegree of a valid monomial."""
    alg.validate(m)
    return alg.bidegree(m)


def koszul_sign(alg: MonomialAlgebraSpec, a: Monomial, b: Monomial) -> int:
    """Sign of reordering the word ``a·b`` into canonical order."""
    flips = 0
    odd = alg.odd_indices
    for j in odd:
        if b[j] & 1:
            for i in odd:
                if i > j and a[i] & 1:
                    flips += 1
    return -1 if flips & 1 else 1


def mono_product(alg: MonomialAlgebraSpec, a: Monomial, b: Monomial) -> tuple[int, Monomial]:
    """Product of two exponent vectors as ``(sign, monomial)``; sign 0 means zero.

    Negative exponents on non-Laurent generators are not rejected here, so
    intermediate factors of a Leibniz expansion may pass through them.
    """
    out = [x + y for x, y in zip(a, b)]
    for g, e in zip(alg.generators, out):
        top = g.max_exponent
        if top is not None and e > top:
            return 0, a
    return koszul_sign(alg, a, b), tuple(out)


class Element:
    """A finite F_p-linear combination of monomials."""

    __slots__ = ("alg", "terms", "_hash")

    def __init__(self, alg: MonomialAlgebraSpec, terms: Mapping[Monomial, int] | Iterable = (),
                 *, check: bool = True):
        p = alg.prime
        acc: dict[Monomial, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for m, c in items:
            m = tuple(m)
            acc[m] = (acc.get(m, 0) + c) % p
        self.alg = alg
        self.terms = {m: c for m, c in acc.items() if c}
        self._hash = None
        if check:
            for m in self.terms:
                alg.validate(m)

    @classmethod
    def monomial(cls, alg: MonomialAlgebraSpec, m: Monomial, coeff: int = 1) -> "Element":
        return cls(alg, {m: coeff})

    @classmethod
    def zero(cls, alg: MonomialAlgebraSpec) -> "Element":
        return cls(alg, {})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        return isinstance(other, Element) and self.alg == other.alg and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __add__(self, other: "Element") -> "Element":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Element(self.alg, out, check=False)

    def __neg__(self) -> "Element":
        return self.scale(-1)

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def scale(self, c: int) -> "Element":
        return Element(self.alg, {m: c * v for m, v in self.terms.items()}, check=False)

    def __mul__(self, other):
        if isinstance(other, Element):
            return multiply(self.alg, self, other)
        return self.scale(int(other))

    def __rmul__(self, other):
        return self.scale(int(other))

    def monomials(self) -> list[Monomial]:
        return sorted(self.terms)

    def bidegrees(self) -> set[Bidegree]:
        return {self.alg.bidegree(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.bidegrees()) <= 1

    def bidegree(self) -> Bidegree:
        degs = self.bidegrees()
        if len(degs) != 1:
            raise ValidationError(f"element {self} is not homogeneous")
        return next(iter(degs))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1 and next(iter(self.terms.values())) == 1

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (self.alg.bidegree(m)[1], self.alg.bidegree(m)[0], m)):
            c = self.terms[m]
            body = self.alg.format_monomial(m)
            parts.append(body if c == 1 else f"{c}*{body}")
        return " + ".join(parts)

    __str__ = format

    def __repr__(self) -> str:
        return f"Element({self.format()})"


def multiply(alg: MonomialAlgebraSpec, a: Element, b: Element) -> Element:
    """Bilinear Koszul-signed product."""
    out: dict[Monomial, int] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            sign, m = mono_product(alg, ma, mb)
            if sign:
                out[m] = out.get(m, 0) + sign * ca * cb
    return Element(alg, out, check=False)


def _exponent_bounds(alg: MonomialAlgebraSpec, window: Window,
                     free: list[int]) -> dict[int, tuple[int, int]] | None:
    """Integer bounds on the exponents of unbounded generators inside ``window``.

    The bounds come from the linear relaxation, padded outward; they may be
    loose but never cut off a solution.  Returns ``None`` when no point of
    the relaxation lies in the window.
    """
    gens = alg.generators
    nvar = len(gens)
    a_ub = []
    b_ub = []
    for axis, lo, hi in ((0, window.s_min, window.s_max), (1, window.n_min, window.n_max)):
        row = [g.bidegree[axis] for g in gens]
        a_ub.append(row)
        b_ub.append(hi)
        a_ub.append([-v for v in row])
        b_ub.append(-lo)
    bounds = [(g.min_exponent, g.max_exponent) for g in gens]
    out = {}
    unbounded = []
    for i in free:
        res = []
        for sense in (1.0, -1.0):
            c = np.zeros(nvar)
            c[i] = sense
            sol = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
            if sol.status == 2:
                return None
            if sol.status == 3:
                unbounded.append(gens[i].name)
                break
            if sol.status != 0:
                raise AlgebraError(f"bound computation failed for {gens[i].name}: {sol.message}")
            res.append(sense * sol.fun)
        else:
            lo, hi = math.floor(res[0] - 1e-6), math.ceil(res[1] + 1e-6)
            if gens[i].min_exponent is not None:
                lo = max(lo, gens[i].min_exponent)
            out[i] = (lo, hi)
    if unbounded:
        raise EnumerationInfiniteError(
            f"window {window} meets infinitely many monomials along {', '.join(unbounded)}",
            unbounded)
    return out


def _interval(total: int, lo: int, hi: int, v: int) -> tuple[int, int] | None:
    """Solve ``lo <= total + e*v <= hi`` for integer e, ``None`` if no constraint."""
    if v == 0:
        return None if lo <= total <= hi else (1, 0)
    a, b = lo - total, hi - total
    if v < 0:
        a, b, v = -b, -a, -v
    return (-((-a) // v), b // v)


def iter_window(alg: MonomialAlgebraSpec, window: Window) -> Iterator[Monomial]:
    """All valid monomials with bidegree in ``window``, unordered."""
    if window.is_empty:
        return
    gens = alg.generators
    bounded = [i for i, g in enumerate(gens) if g.max_exponent is not None]
    free = [i for i, g in enumerate(gens) if g.max_exponent is None]
    ranges = _exponent_bounds(alg, window, free) if free else {}
    if ranges is None:
        return
    vec = [0] * len(gens)
    for combo in itertools.product(*(range(gens[i].max_exponent + 1) for i in bounded)):
        s0 = n0 = 0
        for i, e in zip(bounded, combo):
            vec[i] = e
            s0 += e * gens[i].bidegree[0]
            n0 += e * gens[i].bidegree[1]
        if not free:
            if window.contains(s0, n0):
                yield tuple(vec)
            continue
        yield from _walk_free(gens, free, ranges, window, vec, 0, s0, n0)


def _walk_free(gens, free, ranges, window, vec, depth, s, n):
    i = free[depth]
    lo, hi = ranges[i]
    vs, vn = gens[i].bidegree
    if depth == len(free) - 1:
        for iv in (_interval(s, window.s_min, window.s_max, vs),
                   _interval(n, window.n_min, window.n_max, vn)):
            if iv is not None:
                lo, hi = max(lo, iv[0]), min(hi, iv[1])
        for e in range(lo, hi + 1):
            vec[i] = e
            yield tuple(vec)
        vec[i] = 0
        return
    for e in range(lo, hi + 1):
        vec[i] = e
        yield from _walk_free(gens, free, ranges, window, vec, depth + 1, s + e * vs, n + e * vn)
    vec[i] = 0


def basis_in_window(alg: MonomialAlgebraSpec, window: Window) -> list[Monomial]:
    """Complete monomial basis of ``alg`` over ``window``, sorted by (n, s, exponents)."""
    keyed = []
    for m in iter_window(alg, window):
        s, n = alg.bidegree(m)
        keyed.append((n, s, m))
    keyed.sort()
    return [m for _, _, m in keyed]
