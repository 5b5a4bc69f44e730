"""Cyclic P(tμ)-module summands and their expansion to monomial bases.

A summand is named by a generator monomial, a tμ-truncation height (or
``None`` for free) and a set of exterior cofactors.  Families indexed by an
integer ``i`` (``base · step^i``) stand for infinite direct sums such as
``P(t^{±p^m}) ⊗ P(tμ)`` or ``F_p{t^i λ : v_p(i) = k-1}``; they are expanded
only against a finite window.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .fpalg import Bidegree, Monomial, MonomialAlgebraSpec, Window

FREE = None


class DecompositionViolationError(ValueError):
    """Two summands of a direct sum share a basis monomial."""


def named(exps: Mapping[str, int] | Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
    items = exps.items() if isinstance(exps, Mapping) else exps
    acc: dict[str, int] = {}
    for k, v in items:
        acc[k] = acc.get(k, 0) + int(v)
    return tuple(sorted((k, v) for k, v in acc.items() if v))


def _vec(alg: MonomialAlgebraSpec, exps: Iterable[tuple[str, int]]) -> list[int]:
    vec = [0] * len(alg)
    for k, v in exps:
        vec[alg.index(k)] += v
    return vec


def _tmu(alg: MonomialAlgebraSpec) -> list[int]:
    vec = [0] * len(alg)
    vec[alg.index("t")] = 1
    vec[alg.index("mu")] = 1
    return vec


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _solve(lo: int, hi: int, base: int, v: int) -> tuple[int, int] | None:
    """Integers x with ``lo <= base + x*v <= hi``; ``None`` means every x."""
    if v == 0:
        return None if lo <= base <= hi else (1, 0)
    a, b = lo - base, hi - base
    if v < 0:
        a, b, v = -b, -a, -v
    return (_ceil_div(a, v), b // v)


def _box_range(window: Window, floor: int | None, cs: int, cn: int) -> tuple[int, int]:
    """Range of ``cs*s + cn*n`` over the window (with n clipped below at floor)."""
    n_min = window.n_min if floor is None else max(window.n_min, floor)
    vals = [cs * s + cn * n for s in (window.s_min, window.s_max) for n in (n_min, window.n_max)]
    return min(vals), max(vals)


def _effective(window: Window, floor: int | None) -> Window:
    if floor is None or floor <= window.n_min:
        return window
    return Window(window.s_min, window.s_max, floor, window.n_max)


@dataclass(frozen=True)
class CyclicSummand:
    label: str
    generator: tuple[tuple[str, int], ...]
    tmu_height: int | None
    exterior_cofactor: tuple[str, ...] = ()
    tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "generator", named(self.generator))
        object.__setattr__(self, "exterior_cofactor", tuple(self.exterior_cofactor))
        if self.tmu_height is not None and self.tmu_height < 1:
            raise ValueError(f"{self.label}: height must be positive or free")
        present = {k for k, _ in self.generator}
        clash = present & set(self.exterior_cofactor)
        if clash:
            raise ValueError(f"{self.label}: cofactor repeats {sorted(clash)} from the generator")

    def monomial(self, alg: MonomialAlgebraSpec) -> Monomial:
        return alg.monomial(dict(self.generator))

    def bidegree(self, alg: MonomialAlgebraSpec) -> Bidegree:
        return alg.bidegree(self.monomial(alg))

    def basis(self, alg: MonomialAlgebraSpec, window: Window,
              floor: int | None = None) -> Iterator[Monomial]:
        win = _effective(window, floor)
        if win.is_empty:
            return
        gen = _vec(alg, self.generator)
        tmu = _tmu(alg)
        ts, tn = alg.bidegree(tuple(tmu))
        for sub in _subsets(self.exterior_cofactor):
            vec = list(gen)
            for name in sub:
                vec[alg.index(name)] += 1
            s0, n0 = alg.bidegree(tuple(vec))
            lo, hi = 0, (self.tmu_height - 1 if self.tmu_height is not None else None)
            for iv in (_solve(win.s_min, win.s_max, s0, ts), _solve(win.n_min, win.n_max, n0, tn)):
                if iv is not None:
                    lo = max(lo, iv[0])
                    hi = iv[1] if hi is None else min(hi, iv[1])
            if hi is None:
                raise ValueError(f"{self.label}: free summand meets infinitely many window points")
            for j in range(lo, hi + 1):
                m = tuple(a + j * b for a, b in zip(vec, tmu))
                alg.validate(m)
                yield m

    def to_json(self, alg: MonomialAlgebraSpec) -> dict:
        m = self.monomial(alg)
        return {
            "label": self.label,
            "generator": alg.format_monomial(m),
            "height": "free" if self.tmu_height is None else self.tmu_height,
            "cofactor": list(self.exterior_cofactor),
            "bidegree": list(alg.bidegree(m)),
        }


@dataclass(frozen=True)
class SummandFamily:
    """Summands ``base · step^i`` for all integers ``i`` passing the index tests."""

    label: str
    base: tuple[tuple[str, int], ...]
    step: str
    tmu_height: int | None
    exterior_cofactor: tuple[str, ...] = ()
    divisor: int = 1
    valuation: tuple[int, int] | None = None
    index_min: int | None = None
    index_max: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "base", named(self.base))
        object.__setattr__(self, "exterior_cofactor", tuple(self.exterior_cofactor))

    def accepts(self, i: int) -> bool:
        if i % self.divisor:
            return False
        if self.index_min is not None and i < self.index_min:
            return False
        if self.index_max is not None and i > self.index_max:
            return False
        if self.valuation is not None:
            p, v = self.valuation
            if i == 0:
                return False
            q = p ** v
            return i % q == 0 and (i // q) % p != 0
        return True

    def member(self, i: int) -> CyclicSummand:
        return CyclicSummand(f"{self.label}[{i}]", named(list(self.base) + [(self.step, i)]),
                             self.tmu_height, self.exterior_cofactor)

    def index_range(self, alg: MonomialAlgebraSpec, window: Window,
                    floor: int | None = None) -> tuple[int, int] | None:
        """Range of indices that can reach the window, ignoring the index tests."""
        win = _effective(window, floor)
        if win.is_empty:
            return None
        step = [0] * len(alg)
        step[alg.index(self.step)] = 1
        ss, sn = alg.bidegree(tuple(step))
        ts, tn = alg.bidegree(tuple(_tmu(alg)))
        det = tn * ss - ts * sn
        if det == 0:
            raise ValueError(f"{self.label}: step is parallel to tμ")
        lo = hi = None
        for sub in _subsets(self.exterior_cofactor):
            vec = _vec(alg, list(self.base) + [(x, 1) for x in sub])
            bs, bn = alg.bidegree(tuple(vec))
            qlo, qhi = _box_range(win, None, tn, -ts)
            q0 = tn * bs - ts * bn
            a, b = qlo - q0, qhi - q0
            if det < 0:
                a, b = -b, -a
            ilo, ihi = _ceil_div(a, abs(det)), b // abs(det)
            lo = ilo if lo is None else min(lo, ilo)
            hi = ihi if hi is None else max(hi, ihi)
        return lo, hi

    def members(self, alg: MonomialAlgebraSpec, window: Window,
                floor: int | None = None) -> Iterator[CyclicSummand]:
        rng = self.index_range(alg, window, floor)
        if rng is None:
            return
        lo, hi = rng
        if self.index_min is not None:
            lo = max(lo, self.index_min)
        if self.index_max is not None:
            hi = min(hi, self.index_max)
        q = self.divisor
        if self.valuation is not None:
            q = max(q, self.valuation[0] ** self.valuation[1])
        start = _ceil_div(lo, q) * q
        for i in range(start, hi + 1, q):
            if self.accepts(i):
                yield self.member(i)

    def to_json(self, alg: MonomialAlgebraSpec) -> dict:
        out = {
            "label": self.label,
            "generator": alg.format_monomial(alg.monomial(dict(self.base))) + f"*{self.step}^i",
            "height": "free" if self.tmu_height is None else self.tmu_height,
            "cofactor": list(self.exterior_cofactor),
            "index": {"divisor": self.divisor},
        }
        if self.valuation is not None:
            out["index"]["valuation"] = self.valuation[1]
        if self.index_min is not None:
            out["index"]["min"] = self.index_min
        if self.index_max is not None:
            out["index"]["max"] = self.index_max
        return out


Piece = CyclicSummand | SummandFamily


@dataclass(frozen=True, eq=False)
class SummandInventory:
    """A direct sum of summands; ``lazy`` entries produce pieces for a given window."""

    label: str
    summands: tuple[CyclicSummand, ...] = ()
    families: tuple[SummandFamily, ...] = ()
    lazy: tuple[Callable[[MonomialAlgebraSpec, Window], Iterable[Piece]], ...] = ()
    degree_floor: int | None = None
    ambient: MonomialAlgebraSpec | None = None

    def pieces(self, alg: MonomialAlgebraSpec, window: Window) -> list[Piece]:
        out: list[Piece] = list(self.summands) + list(self.families)
        for gen in self.lazy:
            out.extend(gen(alg, _effective(window, self.degree_floor)))
        return out

    def __add__(self, other: "SummandInventory") -> "SummandInventory":
        if self.degree_floor != other.degree_floor:
            raise ValueError("cannot add inventories with different degree floors")
        return SummandInventory(
            f"{self.label}+{other.label}",
            self.summands + other.summands,
            self.families + other.families,
            self.lazy + other.lazy,
            self.degree_floor,
            self.ambient or other.ambient,
        )

    def with_floor(self, floor: int | None) -> "SummandInventory":
        return SummandInventory(self.label, self.summands, self.families, self.lazy, floor, self.ambient)

    def summands_in(self, window: Window, alg: MonomialAlgebraSpec | None = None) -> list[CyclicSummand]:
        """All cyclic summands (families expanded) that can meet ``window``."""
        alg = alg or self.ambient
        out = []
        for piece in self.pieces(alg, window):
            if isinstance(piece, SummandFamily):
                out.extend(piece.members(alg, window, self.degree_floor))
            else:
                out.append(piece)
        return out

    def to_json(self, window: Window, alg: MonomialAlgebraSpec | None = None) -> str:
        alg = alg or self.ambient
        rows = [s.to_json(alg) for s in self.summands_in(window, alg)
                if any(True for _ in s.basis(alg, window, self.degree_floor))]
        return json.dumps(rows, indent=2)


@dataclass
class Materialized:
    basis: dict[Bidegree, list[Monomial]] = field(default_factory=dict)
    owner: dict[Monomial, str] = field(default_factory=dict)

    @property
    def dims(self) -> dict[Bidegree, int]:
        return {x: len(v) for x, v in self.basis.items() if v}

    def dims_in(self, region: Window | None) -> dict[Bidegree, int]:
        if region is None:
            return {}
        return {x: len(v) for x, v in self.basis.items() if v and x in region}

    def monomials(self) -> set[Monomial]:
        return set(self.owner)

    def total(self) -> int:
        return len(self.owner)


def materialize(inv: SummandInventory, window: Window,
                alg: MonomialAlgebraSpec | None = None) -> Materialized:
    """Expand ``inv`` over ``window``; raises if two summands overlap."""
    alg = alg or inv.ambient
    if alg is None:
        raise ValueError(f"inventory {inv.label} has no ambient algebra")
    out = Materialized()
    for piece in inv.summands_in(window, alg):
        for m in piece.basis(alg, window, inv.degree_floor):
            prev = out.owner.get(m)
            if prev is not None:
                raise DecompositionViolationError(
                    f"{alg.format_monomial(m)} lies in both {prev} and {piece.label}")
            out.owner[m] = piece.label
            out.basis.setdefault(alg.bidegree(m), []).append(m)
    for v in out.basis.values():
        v.sort()
    return out


def _subsets(names: Sequence[str]) -> Iterator[tuple[str, ...]]:
    for r in range(len(names) + 1):
        yield from itertools.combinations(names, r)


def compare_dims(found: Mapping[Bidegree, int], expected: Mapping[Bidegree, int],
                 region: Window | None = None) -> list[tuple[Bidegree, int, int]]:
    """Bidegrees (inside ``region``) where two dimension tables differ."""
    keys = set(found) | set(expected)
    if region is not None:
        keys = {x for x in keys if x in region}
    diff = []
    for x in sorted(keys, key=lambda b: (b[1], b[0])):
        a, b = found.get(x, 0), expected.get(x, 0)
        if a != b:
            diff.append((x, a, b))
    return diff
