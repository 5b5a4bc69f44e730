"""Pages, derivation rules and windowed homology.

A page stores, per bidegree, cycle representatives in the ambient E²
algebra together with the boundaries accumulated so far.  A differential is
given by its values on a free set of page generators and extended to all
monomials by the Leibniz rule.  Monomials that do not factor over those
generators belong to torsion summands created on earlier pages; they are
cycles for every later differential and the engine treats them as such.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Mapping, Sequence

from . import linalg
from .fpalg import (
    Bidegree,
    Element,
    Kind,
    Monomial,
    MonomialAlgebraSpec,
    ValidationError,
    Window,
    basis_in_window,
    mono_product,
)


class EngineError(RuntimeError):
    """Base class for engine failures."""


class FactorizationError(EngineError):
    """A monomial is not a product of powers of the page generators."""


class IncompleteWindowError(EngineError):
    """A differential leaves the enumerated window."""


class ScheduleInconsistencyError(EngineError):
    """A rule does not fit the page it is applied to."""

    def __init__(self, message: str, generator: str | None = None):
        super().__init__(message)
        self.generator = generator


class InternalConsistencyError(EngineError):
    """Bookkeeping that must be impossible went wrong."""


def thread_count(value: str | int | None = None) -> int:
    """Parallelism cap from an explicit value or ``REDSHIFT_THREADS``."""
    raw = os.environ.get("REDSHIFT_THREADS") if value is None else value
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except (TypeError, ValueError):
        raise ValueError(f"REDSHIFT_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"REDSHIFT_THREADS must be a positive integer, got {raw!r}")
    return n


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) < 2 * threads:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * threads))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# ---------------------------------------------------------------------------
# page generators and rules


@dataclass(frozen=True)
class PageGenerator:
    name: str
    base: Monomial
    kind: Kind
    height: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "base", tuple(self.base))


@dataclass(frozen=True)
class DerivationRule:
    """A differential ``d^r`` given on a free set of page generators.

    ``generators`` lists every free generator of the page; ``values`` maps
    some of them to their differential, the rest are cycles.
    """

    ambient: MonomialAlgebraSpec
    page_index: int
    generators: tuple[PageGenerator, ...]
    values: tuple[tuple[PageGenerator, Element], ...]
    label: str = ""
    _fact: "_Factorizer" = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if isinstance(self.values, Mapping):
            object.__setattr__(self, "values", tuple(self.values.items()))
        object.__setattr__(self, "values", tuple(self.values))
        if self.page_index < 2:
            raise ValidationError(f"page index must be >= 2, got {self.page_index}")
        alg = self.ambient
        for g in self.generators:
            _check_page_generator(alg, g)
        for g, v in self.values:
            if g not in self.generators:
                raise ValidationError(f"value given for undeclared generator {g.name}")
            if v.alg != alg:
                raise ValidationError(f"value of {g.name} lives in another algebra")
            if not v:
                continue
            s, n = alg.bidegree(g.base)
            want = (s - self.page_index, n - 1)
            for m in v.terms:
                got = alg.bidegree(m)
                if got != want:
                    raise ValidationError(
                        f"d^{self.page_index}({g.name}) has a term of bidegree {got}, expected {want}")
        object.__setattr__(self, "_fact", _Factorizer(alg, self.generators))

    def value_of(self, g: PageGenerator) -> Element:
        for h, v in self.values:
            if h == g:
                return v
        return Element.zero(self.ambient)

    def factor(self, m: Monomial) -> tuple[int, ...]:
        """Exponents of ``m`` over the page generators, or raise FactorizationError."""
        e = self._fact.solve(m)
        if e is None:
            raise FactorizationError(
                f"{self.ambient.format_monomial(m)} is not a product of the page generators "
                f"{', '.join(g.name for g in self.generators)}")
        return e


def _check_page_generator(alg: MonomialAlgebraSpec, g: PageGenerator) -> None:
    if len(g.base) != len(alg):
        raise ValidationError(f"page generator {g.name} has a base of the wrong length")
    if not any(g.base):
        raise ValidationError(f"page generator {g.name} has the unit as base")
    odd = alg.parity(g.base)
    if odd and g.kind is not Kind.EXTERIOR:
        raise ValidationError(f"odd page generator {g.name} must be exterior")
    if not odd and g.kind is Kind.EXTERIOR:
        raise ValidationError(f"exterior page generator {g.name} must be odd")
    if g.kind in (Kind.POLYNOMIAL, Kind.LAURENT):
        for i in alg.odd_indices:
            if g.base[i]:
                raise ValidationError(f"{g.name}: powers of a base with odd factors vanish")
    if g.kind is Kind.TRUNCATED and (g.height is None or g.height < 1):
        raise ValidationError(f"{g.name}: truncated page generator needs a height")


class _Factorizer:
    """Solve ``m = Σ e_i·base_i`` over the integers for independent bases."""

    def __init__(self, alg: MonomialAlgebraSpec, gens: Sequence[PageGenerator]):
        self.alg = alg
        self.gens = tuple(gens)
        k, n = len(gens), len(alg)
        rows = [[Fraction(x) for x in g.base] for g in gens]
        # pick k independent columns by elimination on a copy
        work = [list(r) for r in rows]
        cols = []
        r = 0
        for c in range(n):
            piv = next((i for i in range(r, k) if work[i][c] != 0), None)
            if piv is None:
                continue
            work[r], work[piv] = work[piv], work[r]
            for i in range(k):
                if i != r and work[i][c] != 0:
                    f = work[i][c] / work[r][c]
                    work[i] = [a - f * b for a, b in zip(work[i], work[r])]
            cols.append(c)
            r += 1
            if r == k:
                break
        if r < k:
            raise ValidationError("page generator bases are linearly dependent")
        square = [[rows[i][c] for c in cols] for i in range(k)]
        inv = _invert(square)
        den = lcm(*(x.denominator for row in inv for x in row)) if k else 1
        self.cols = cols
        self.den = den
        # e_j = Σ_i m[cols[i]] * inv[i][j]
        self.mat = [[int(x * den) for x in row] for row in inv]

    def solve(self, m: Monomial) -> tuple[int, ...] | None:
        k = len(self.gens)
        e = []
        for j in range(k):
            acc = 0
            for i, c in enumerate(self.cols):
                x = m[c]
                if x:
                    acc += x * self.mat[i][j]
            if acc % self.den:
                return None
            e.append(acc // self.den)
        back = [0] * len(m)
        for ej, g in zip(e, self.gens):
            if ej:
                for i, b in enumerate(g.base):
                    back[i] += ej * b
        if tuple(back) != tuple(m):
            return None
        for ej, g in zip(e, self.gens):
            if g.kind is Kind.EXTERIOR and ej not in (0, 1):
                return None
            if g.kind in (Kind.POLYNOMIAL, Kind.TRUNCATED) and ej < 0:
                return None
            if g.kind is Kind.TRUNCATED and ej >= g.height:
                return None
        return tuple(e)


def _invert(a: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(a)
    m = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next(i for i in range(c, n) if m[i][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        f = m[c][c]
        m[c] = [x / f for x in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                g = m[i][c]
                m[i] = [x - g * y for x, y in zip(m[i], m[c])]
    return [row[n:] for row in m]


def _power(alg: MonomialAlgebraSpec, base: Monomial, e: int) -> Monomial:
    return tuple(e * b for b in base)


def extend_derivation(page: "Page | None", rule: DerivationRule, m: Monomial) -> Element:
    """Leibniz extension of ``rule`` to a monomial of the ambient algebra.

    ``page`` is only used to check that the rule belongs to it.
    """
    alg = rule.ambient
    if page is not None and page.ambient != alg:
        raise ScheduleInconsistencyError("rule and page have different ambient algebras")
    e = rule.factor(m)
    p = alg.prime
    gens = rule.generators
    valued = [(i, v) for i, g in enumerate(gens) for h, v in rule.values if h == g and v and e[i]]
    if not valued:
        return Element.zero(alg)
    # sign relating the canonical monomial to the ordered generator word
    word_sign = 1
    acc = alg.unit
    for g, ei in zip(gens, e):
        if ei:
            sg, acc = mono_product(alg, acc, _power(alg, g.base, ei))
            if not sg:
                raise InternalConsistencyError("nonzero monomial factors into a zero word")
            word_sign *= sg
    out: dict[Monomial, int] = {}
    for i, value in valued:
        g = gens[i]
        coeff = e[i] % p if g.kind is not Kind.EXTERIOR else 1
        if not coeff:
            continue
        prefix_parity = sum(e[j] * alg.parity(gens[j].base) for j in range(i)) & 1
        sign = -1 if prefix_parity else 1
        left = alg.unit
        for j in range(i):
            if e[j]:
                sg, left = mono_product(alg, left, _power(alg, gens[j].base, e[j]))
                sign *= sg
        mid_sign, mid = mono_product(alg, left, _power(alg, g.base, e[i] - 1))
        sign *= mid_sign
        right = alg.unit
        for j in range(i + 1, len(gens)):
            if e[j]:
                sg, right = mono_product(alg, right, _power(alg, gens[j].base, e[j]))
                sign *= sg
        if not sign:
            continue
        for vm, vc in value.terms.items():
            s1, t1 = mono_product(alg, mid, vm)
            if not s1:
                continue
            s2, t2 = mono_product(alg, t1, right)
            if not s2:
                continue
            c = word_sign * sign * s1 * s2 * coeff * vc
            out[t2] = (out.get(t2, 0) + c) % p
    result = Element(alg, out, check=False)
    for t in result.terms:
        why = alg.violation(t)
        if why is not None:
            raise ScheduleInconsistencyError(
                f"d^{rule.page_index}({alg.format_monomial(m)}) leaves the ambient algebra: {why}")
    return result


def apply_rule(rule: DerivationRule, x: Element) -> tuple[Element, int]:
    """Differential of an element; returns the value and the number of torsion terms skipped."""
    alg = rule.ambient
    out = Element.zero(alg)
    skipped = 0
    for m, c in x.terms.items():
        try:
            v = extend_derivation(None, rule, m)
        except FactorizationError:
            skipped += 1
            continue
        if v:
            out = out + v.scale(c)
    return out, skipped


# ---------------------------------------------------------------------------
# pages


class _Reducer:
    """Echelon data for one bidegree: boundaries and basis representatives."""

    def __init__(self, p: int, boundary: Iterable[Element], basis: Sequence[Element]):
        self.p = p
        self.dim = len(basis)
        self.rows: dict[Monomial, tuple[dict, dict]] = {}
        for b in boundary:
            self._insert(b.terms, {})
        for i, e in enumerate(basis):
            if not self._insert(e.terms, {i: 1}):
                raise InternalConsistencyError("basis representatives are dependent modulo boundaries")

    def _reduce(self, terms: Mapping, coords: Mapping, sign: int) -> tuple[dict, dict]:
        p = self.p
        t = dict(terms)
        c = dict(coords)
        while t:
            lead = max(t)
            row = self.rows.get(lead)
            if row is None:
                break
            f = t[lead]
            for m, v in row[0].items():
                x = (t.get(m, 0) - f * v) % p
                if x:
                    t[m] = x
                else:
                    t.pop(m, None)
            for k, v in row[1].items():
                x = (c.get(k, 0) + sign * f * v) % p
                if x:
                    c[k] = x
                else:
                    c.pop(k, None)
        return t, c

    def _insert(self, terms: Mapping, coords: Mapping) -> bool:
        t, c = self._reduce(terms, coords, -1)
        if not t:
            return False
        lead = max(t)
        inv = pow(t[lead], self.p - 2, self.p)
        t = {m: v * inv % self.p for m, v in t.items()}
        c = {k: v * inv % self.p for k, v in c.items()}
        self.rows[lead] = (t, c)
        return True

    def coords(self, x: Element) -> list[int] | None:
        """Coordinates of ``x`` in the basis, ``None`` if ``x`` is not in span(basis)+boundaries."""
        t, c = self._reduce(x.terms, {}, 1)
        if t:
            return None
        vec = [0] * self.dim
        for k, v in c.items():
            vec[k] = v
        return vec


class Cell:
    __slots__ = ("basis", "boundary", "_reducer")

    def __init__(self, basis: Sequence[Element], boundary: Sequence[Element] = ()):
        self.basis = tuple(basis)
        self.boundary = tuple(boundary)
        self._reducer = None

    def reducer(self, p: int) -> _Reducer:
        if self._reducer is None:
            self._reducer = _Reducer(p, self.boundary, self.basis)
        return self._reducer


class Page:
    """One page of a spectral sequence restricted to a window."""

    def __init__(self, ambient: MonomialAlgebraSpec, index: int, window: Window,
                 safe_region: Window | None, cells: Mapping[Bidegree, Cell], *,
                 infinity: bool = False, valid_until: int | None = None, label: str = ""):
        if index < 2:
            raise ValidationError(f"page index must be >= 2, got {index}")
        self.ambient = ambient
        self.index = index
        self.window = window
        self.safe_region = None if safe_region is None or safe_region.is_empty else safe_region
        self.cells = dict(cells)
        self.infinity = infinity
        self.valid_until = valid_until
        self.label = label
        self.checks: list[tuple[str, str]] = []
        self.torsion_cycles = 0

    @property
    def prime(self) -> int:
        return self.ambient.prime

    def is_safe(self, bideg: Bidegree) -> bool:
        return self.safe_region is not None and bideg in self.safe_region

    def basis(self, s: int, n: int) -> tuple[Element, ...]:
        cell = self.cells.get((s, n))
        return cell.basis if cell else ()

    def dim(self, s: int, n: int) -> int:
        return len(self.basis(s, n))

    def dims(self, region: Window | None = None) -> dict[Bidegree, int]:
        """Nonzero dimensions, restricted to ``region`` (default: safe region)."""
        region = self.safe_region if region is None else region
        if region is None:
            return {}
        return {x: len(c.basis) for x, c in self.cells.items() if c.basis and x in region}

    def coordinates(self, x: Element) -> list[int] | None:
        s, n = x.bidegree()
        cell = self.cells.get((s, n))
        if cell is None:
            return None if x else []
        return cell.reducer(self.prime).coords(x)

    def class_is_nonzero(self, m: Monomial) -> bool:
        cell = self.cells.get(self.ambient.bidegree(m))
        if cell is None or not cell.basis:
            return False
        v = cell.reducer(self.prime).coords(Element.monomial(self.ambient, m))
        return v is not None and any(v)

    def to_json(self, region: Window | None = None) -> dict:
        region = self.safe_region if region is None else region
        cells = []
        if region is not None:
            for (s, n), cell in sorted(self.cells.items(), key=lambda kv: (kv[0][1], kv[0][0])):
                if cell.basis and (s, n) in region:
                    cells.append({"s": s, "n": n, "dim": len(cell.basis),
                                  "basis": [b.format() for b in cell.basis]})
        return {
            "prime": self.prime,
            "page_index": "inf" if self.infinity else self.index,
            "window": self.window.as_dict(),
            "safe_region": None if self.safe_region is None else self.safe_region.as_dict(),
            "cells": cells,
        }


def e2_page(ambient: MonomialAlgebraSpec, window: Window) -> Page:
    cells: dict[Bidegree, list[Element]] = {}
    for m in basis_in_window(ambient, window):
        cells.setdefault(ambient.bidegree(m), []).append(Element(ambient, {m: 1}, check=False))
    return Page(ambient, 2, window, window, {x: Cell(b) for x, b in cells.items()})


# ---------------------------------------------------------------------------
# differentials and homology


@dataclass
class MapBlock:
    source: Bidegree
    target: Bidegree
    matrix: list[list[int]]  # rows indexed by the target basis
    images: tuple[Element, ...]

    def rank(self, p: int) -> int:
        return linalg.rank(self.matrix, len(self.images), p)

    def entries(self):
        for i, row in enumerate(self.matrix):
            for j, v in enumerate(row):
                if v:
                    yield i, j, v


@dataclass
class LinearMapMod_p:
    prime: int
    page_index: int
    blocks: dict[Bidegree, MapBlock] = field(default_factory=dict)
    incomplete: set = field(default_factory=set)
    provisional: set = field(default_factory=set)
    torsion_cycles: int = 0

    @property
    def shift(self) -> tuple[int, int]:
        return (self.page_index, 1)

    def block(self, source: Bidegree) -> MapBlock | None:
        return self.blocks.get(source)

    def is_zero(self) -> bool:
        return not any(any(any(r) for r in b.matrix) for b in self.blocks.values())


def _structurally_empty(alg: MonomialAlgebraSpec, bideg: Bidegree) -> bool:
    s_lo, s_hi, n_lo, n_hi = alg.structural_bounds()
    s, n = bideg
    return ((s_lo is not None and s < s_lo) or (s_hi is not None and s > s_hi)
            or (n_lo is not None and n < n_lo) or (n_hi is not None and n > n_hi))


def differential_matrix(page: Page, rule: DerivationRule, window: Window | None = None, *,
                        threads: int = 1) -> LinearMapMod_p:
    """Matrix of ``d^r`` on the page basis, one block per source bidegree.

    With an explicit ``window`` every source in it must have its target in
    the enumerated window (or in a region where the algebra is zero).
    Without one, sources whose target leaves the window are skipped and
    recorded in ``incomplete``.
    """
    if rule.ambient != page.ambient:
        raise ScheduleInconsistencyError("rule and page have different ambient algebras")
    r = rule.page_index
    p = page.prime
    out = LinearMapMod_p(p, r)
    sources = []
    for x, cell in page.cells.items():
        if not cell.basis or (window is not None and x not in window):
            continue
        y = (x[0] - r, x[1] - 1)
        if y not in page.window:
            if _structurally_empty(page.ambient, y):
                continue
            if window is not None:
                raise IncompleteWindowError(
                    f"d^{r} from {x} lands at {y}, outside the enumerated window {page.window}")
            out.incomplete.add(x)
            continue
        sources.append(x)
    sources.sort(key=lambda b: (b[1], b[0]))

    def images_at(x):
        imgs = []
        skipped = 0
        for b in page.cells[x].basis:
            v, k = apply_rule(rule, b)
            imgs.append(v)
            skipped += k
        return imgs, skipped

    computed = _pmap(images_at, sources, threads)
    for x, (imgs, skipped) in zip(sources, computed):
        out.torsion_cycles += skipped
        if not any(imgs):
            continue
        y = (x[0] - r, x[1] - 1)
        cell = page.cells.get(y)
        cols = []
        for b, v in zip(page.cells[x].basis, imgs):
            if not v:
                cols.append(None)
                continue
            vec = cell.reducer(p).coords(v) if cell is not None else None
            if vec is None:
                if page.is_safe(x) and page.is_safe(y):
                    raise ScheduleInconsistencyError(
                        f"d^{r}({b}) = {v} is not a class of E^{r} at {y}")
                out.provisional.add(x)
                v = Element.zero(page.ambient)
            cols.append(vec)
        dim_y = len(cell.basis) if cell is not None else 0
        matrix = [[(c[i] if c is not None else 0) for c in cols] for i in range(dim_y)]
        images = tuple(v if c is not None else Element.zero(page.ambient) for v, c in zip(imgs, cols))
        out.blocks[x] = MapBlock(x, y, matrix, images)
    return out


def _shrunk(alg: MonomialAlgebraSpec, safe: Window | None, r: int) -> Window | None:
    if safe is None:
        return None
    s_lo, s_hi, n_lo, n_hi = alg.structural_bounds()
    new = Window(
        safe.s_min if s_lo is not None and safe.s_min <= s_lo else safe.s_min + r,
        safe.s_max if s_hi is not None and safe.s_max >= s_hi else safe.s_max - r,
        safe.n_min if n_lo is not None and safe.n_min <= n_lo else safe.n_min + 1,
        safe.n_max if n_hi is not None and safe.n_max >= n_hi else safe.n_max - 1,
    )
    return None if new.is_empty else new


def homology_page(page: Page, dmap: LinearMapMod_p, window: Window | None = None, *,
                  threads: int = 1) -> Page:
    """``E^{r+1}`` from ``E^r`` and the matrix of ``d^r``.

    ``window`` defaults to the page window; bidegrees outside it are copied
    unchanged.
    """
    p = page.prime
    r = dmap.page_index
    window = page.window if window is None else window
    incoming: dict[Bidegree, MapBlock] = {}
    for blk in dmap.blocks.values():
        incoming[blk.target] = blk

    def homology_at(x):
        cell = page.cells[x]
        out = dmap.blocks.get(x)
        inc = incoming.get(x)
        if x not in window or (out is None and inc is None):
            return cell
        dim = len(cell.basis)
        if out is not None:
            kernel = linalg.nullspace(out.matrix, dim, p)
            rank_out = dim - len(kernel)
        else:
            kernel = [[int(i == j) for j in range(dim)] for i in range(dim)]
            rank_out = 0
        if inc is not None:
            image = linalg.transpose(inc.matrix, len(inc.images))
            rank_in = linalg.rank(image, dim, p)
            if linalg.rank(image + kernel, dim, p) != len(kernel):
                raise InternalConsistencyError(f"d^{r}∘d^{r} is nonzero at {x}")
        else:
            image = []
            rank_in = 0
        reps = linalg.quotient_basis(image, kernel, dim, p)
        if len(reps) != dim - rank_out - rank_in:
            raise InternalConsistencyError(
                f"rank bookkeeping failed at {x}: {len(reps)} != {dim} - {rank_out} - {rank_in}")
        basis = [_combine(page.ambient, cell.basis, v) for v in reps]
        boundary = cell.boundary
        if inc is not None:
            boundary = boundary + tuple(v for v in inc.images if v)
        return Cell(basis, boundary)

    keys = sorted(page.cells, key=lambda b: (b[1], b[0]))
    new_cells = dict(zip(keys, _pmap(homology_at, keys, threads)))
    new = Page(page.ambient, r + 1, page.window, _shrunk(page.ambient, page.safe_region, r),
               new_cells, label=page.label)
    new.torsion_cycles = page.torsion_cycles + dmap.torsion_cycles
    return new


def _combine(alg: MonomialAlgebraSpec, basis: Sequence[Element], vec: Sequence[int]) -> Element:
    nz = [(i, c) for i, c in enumerate(vec) if c]
    if len(nz) == 1 and nz[0][1] == 1:
        return basis[nz[0][0]]
    out = Element.zero(alg)
    for i, c in nz:
        out = out + basis[i].scale(c)
    return out


def check_generators(page: Page, rule: DerivationRule) -> list[tuple[str, str]]:
    """Check that each page generator of ``rule`` is a nonzero class of ``page``.

    A generator whose bidegree lies outside the safe region is tested through
    its product with a power of another polynomial generator that does land
    there.  Returns ``(name, status)`` pairs with status ``verified`` or
    ``unchecked``; raises on the first generator that fails.
    """
    alg = page.ambient
    report = []
    movers = [h for h in rule.generators if h.kind is Kind.POLYNOMIAL]
    for g in rule.generators:
        candidates = [g.base]
        if g.kind is Kind.LAURENT:
            inv = tuple(-x for x in g.base)
            if alg.is_valid(inv):
                candidates.append(inv)
        status = "verified"
        for c in candidates:
            probe = _probe(page, c, [h for h in movers if h != g])
            if probe is None:
                status = "unchecked"
                continue
            if not page.class_is_nonzero(probe):
                raise ScheduleInconsistencyError(
                    f"page generator {g.name} of d^{rule.page_index} is not a class of "
                    f"E^{page.index}: {alg.format_monomial(probe)} vanishes", g.name)
        report.append((g.name, status))
    return report


def _probe(page: Page, m: Monomial, movers: Sequence[PageGenerator]) -> Monomial | None:
    alg = page.ambient
    if alg.is_valid(m) and page.is_safe(alg.bidegree(m)):
        return m
    safe = page.safe_region
    if safe is None:
        return None
    s, n = alg.bidegree(m)
    for h in movers:
        hs, hn = alg.bidegree(h.base)
        limit = 1 + (safe.filtration_span + (safe.n_max - safe.n_min)
                     + abs(s) + abs(n)) // max(1, min(abs(hs) or 10**9, abs(hn) or 10**9))
        for j in range(1, limit + 1):
            cand = tuple(a + j * b for a, b in zip(m, h.base))
            if alg.is_valid(cand) and page.is_safe(alg.bidegree(cand)):
                return cand
    return None


def run_schedule(e2: MonomialAlgebraSpec, schedule: Sequence[DerivationRule], window: Window, *,
                 threads: int | None = None, verify_generators: bool = True,
                 on_page: Callable[[Page], None] | None = None) -> list[Page]:
    """Run a differential schedule from E² over ``window``.

    Returns E² followed by ``E^{r+1}`` for every scheduled ``d^r``.  Each
    page records ``valid_until``, the last index it is equal to: nothing
    happens between scheduled pages.  The last page is flagged E^∞.
    """
    threads = thread_count(threads)
    last = 1
    for rule in schedule:
        if rule.page_index <= last:
            raise ScheduleInconsistencyError("schedule page indices must strictly increase")
        if rule.ambient != e2:
            raise ScheduleInconsistencyError(f"rule {rule.label or rule.page_index} uses another algebra")
        last = rule.page_index
    page = e2_page(e2, window)
    pages = [page]
    for rule in schedule:
        page.valid_until = rule.page_index
        if on_page is not None:
            on_page(page)
        if verify_generators:
            page.checks = check_generators(page, rule)
        dmap = differential_matrix(page, rule, threads=threads)
        page = homology_page(page, dmap, threads=threads)
        page.label = rule.label
        pages.append(page)
    page.infinity = True
    if on_page is not None:
        on_page(page)
    return pages


def page_at(pages: Sequence[Page], r: int) -> Page:
    """The page equal to ``E^r`` in a list returned by :func:`run_schedule`."""
    for pg in pages:
        if pg.index <= r and (pg.valid_until is None or r <= pg.valid_until):
            return pg
    raise KeyError(f"no page with index {r}")
