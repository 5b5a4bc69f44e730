"""E² terms, differential schedules and closed-form pages.

Ambient generators, in canonical order: ``t`` at (−2, −2), ``u<n>`` at
(−1, −1) for the cyclic groups, ``l1, l2, l3`` at (0, 2p^i − 1) and ``mu`` at
(0, 2p³).  The class tμ is the monomial ``t*mu``.

Every differential is stated on a page generator with all units set to 1.
The even differentials in the t-variants are normalized to

    d^{2r(k)}(t^{p^{k-1}}) = t^{p^{k-1}(p+1)} (tμ)^{r(k-3)} λ_[k],

which by the Leibniz rule is equivalent to the value on ``t^{p^{k-1}-p^k}``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .fpalg import (
    DomainError,
    Element,
    GeneratorSpec,
    Kind,
    MonomialAlgebraSpec,
    Monomial,
    Window,
    basis_in_window,
    check_prime,
)
from .inventory import CyclicSummand, SummandFamily, SummandInventory
from .ssengine import DerivationRule, Page, PageGenerator, run_schedule

LAMBDAS = ("l1", "l2", "l3")


def r_of(k: int, p: int) -> int:
    """r(k) = p^k + p^{k-3} + ... + p^{[k]} for k >= 1, and 0 for k in {-2, -1, 0}."""
    if k < -2:
        raise DomainError(f"r(k) needs k >= -2, got {k}")
    total = 0
    while k > 0:
        total += p ** k
        k -= 3
    return total


def bracket(k: int) -> int:
    """k mod 3 in {1, 2, 3}."""
    if k < 1:
        raise DomainError(f"[k] needs k >= 1, got {k}")
    return (k - 1) % 3 + 1


def p_adic_valuation(i: int, p: int) -> int:
    if i == 0:
        raise DomainError("the valuation of 0 is undefined")
    i = abs(i)
    v = 0
    while i % p == 0:
        i //= p
        v += 1
    return v


def lam(i: int) -> str:
    """Name of λ_[i]."""
    return LAMBDAS[bracket(i) - 1]


def lambda_degree(i: int, p: int) -> int:
    return 2 * p ** i - 1


@dataclass(frozen=True)
class Group:
    """The circle (``n is None``) or the cyclic group of order p^n."""

    n: int | None = None

    def __post_init__(self):
        if self.n is not None and self.n < 1:
            raise DomainError(f"cyclic group order p^n needs n >= 1, got {self.n}")

    @classmethod
    def parse(cls, text: str) -> "Group":
        text = text.strip()
        if text in ("T", "circle", "Circle"):
            return cls(None)
        m = re.fullmatch(r"Cp\^(\d+)", text)
        if not m:
            raise ValueError(f"unknown group {text!r} (expected T or Cp^N)")
        return cls(int(m.group(1)))

    @property
    def is_circle(self) -> bool:
        return self.n is None

    def __str__(self) -> str:
        return "T" if self.n is None else f"Cp^{self.n}"


CIRCLE = Group(None)


def cyclic(n: int) -> Group:
    return Group(n)


class Variant(str, enum.Enum):
    HFP = "hfp"
    TATE = "tate"
    LOC = "loc-hfp"


# alternative type names
GroupTag = Group
VariantTag = Variant


def e2_term(group: Group, variant: Variant, p: int) -> MonomialAlgebraSpec:
    p = check_prime(p)
    variant = Variant(variant)
    gens = [GeneratorSpec("t", Kind.LAURENT if variant is Variant.TATE else Kind.POLYNOMIAL, (-2, -2))]
    if not group.is_circle:
        gens.append(GeneratorSpec(f"u{group.n}", Kind.EXTERIOR, (-1, -1)))
    for i, name in enumerate(LAMBDAS, start=1):
        gens.append(GeneratorSpec(name, Kind.EXTERIOR, (0, lambda_degree(i, p))))
    gens.append(GeneratorSpec("mu", Kind.LAURENT if variant is Variant.LOC else Kind.POLYNOMIAL,
                              (0, 2 * p ** 3)))
    return MonomialAlgebraSpec(p, tuple(gens))


def _pg(alg: MonomialAlgebraSpec, name: str, kind: Kind, **exps: int) -> PageGenerator:
    return PageGenerator(name, _raw(alg, exps), kind)


def _raw(alg: MonomialAlgebraSpec, exps: dict) -> tuple[int, ...]:
    vec = [0] * len(alg)
    for k, v in exps.items():
        vec[alg.index(k)] += v
    return tuple(vec)


def _value(alg: MonomialAlgebraSpec, **exps: int) -> Element:
    return Element(alg, {_raw(alg, exps): 1})


def _page_generators(alg: MonomialAlgebraSpec, group: Group, moving: PageGenerator) -> tuple:
    gens = []
    if not group.is_circle:
        gens.append(_pg(alg, f"u{group.n}", Kind.EXTERIOR, **{f"u{group.n}": 1}))
    gens.append(moving)
    gens.append(PageGenerator("t*mu", _raw(alg, {"t": 1, "mu": 1}), Kind.POLYNOMIAL))
    for name in LAMBDAS:
        gens.append(_pg(alg, name, Kind.EXTERIOR, **{name: 1}))
    return tuple(gens)


def _t_rule(alg: MonomialAlgebraSpec, group: Group, k: int, p: int) -> DerivationRule:
    q = p ** (k - 1)
    gen = PageGenerator(f"t^{q}", _raw(alg, {"t": q}), Kind.LAURENT)
    c = r_of(k - 3, p)
    value = _value(alg, t=q * (p + 1) + c, mu=c, **{lam(k): 1})
    return DerivationRule(alg, 2 * r_of(k, p), _page_generators(alg, group, gen), ((gen, value),),
                          label=f"d^{2 * r_of(k, p)} (k={k})")


def _mu_rule(alg: MonomialAlgebraSpec, group: Group, k: int, p: int) -> DerivationRule:
    q = p ** (k - 1)
    gen = PageGenerator(f"mu^{q}", _raw(alg, {"mu": q}), Kind.LAURENT)
    c = r_of(k, p)
    value = _value(alg, t=c, mu=c + q - q * p, **{lam(k): 1})
    return DerivationRule(alg, 2 * c, _page_generators(alg, group, gen), ((gen, value),),
                          label=f"d^{2 * c} (k={k})")


def _odd_rule(alg: MonomialAlgebraSpec, group: Group, variant: Variant, p: int) -> DerivationRule:
    n = group.n
    top = p ** (3 * n)
    u = f"u{n}"
    if variant is Variant.LOC:
        mover = PageGenerator(f"mu^{top}", _raw(alg, {"mu": top}), Kind.LAURENT)
        c = r_of(3 * n, p) + 1
        value = _value(alg, t=c, mu=c - top)
    else:
        mover = PageGenerator(f"t^{top}", _raw(alg, {"t": top}), Kind.LAURENT)
        c = r_of(3 * n - 3, p) + 1
        value = _value(alg, t=top + c, mu=c)
    gens = _page_generators(alg, group, mover)
    ugen = gens[0]
    r = 2 * r_of(3 * n, p) + 1
    return DerivationRule(alg, r, gens, ((ugen, value),), label=f"d^{r} ({u})")


def _soft_sides(alg: MonomialAlgebraSpec, window: Window) -> int:
    s_lo, s_hi, _, _ = alg.structural_bounds()
    return ((s_lo is None or window.s_min > s_lo) + (s_hi is None or window.s_max < s_hi))


def circle_k_max(p: int, window: Window, variant: Variant = Variant.TATE) -> int:
    """Largest k such that the safe region survives the rules 1..k on ``window``."""
    alg = e2_term(CIRCLE, variant, p)
    sides = _soft_sides(alg, window)
    width = window.filtration_span
    k = 0
    while sides * sum(2 * r_of(j, p) for j in range(1, k + 2)) <= width:
        k += 1
    return k


def mover_weight(alg: MonomialAlgebraSpec, variant: Variant, m: Monomial) -> int:
    """t-exponent minus μ-exponent (negated for the localized variant).

    A circle rule k moves only monomials whose weight has p-adic valuation
    exactly k-1, both as sources and as targets.
    """
    w = m[alg.index("t")] - m[alg.index("mu")]
    return -w if Variant(variant) is Variant.LOC else w


def truncation_region(variant: Variant, p: int, k_max: int, region: Window | None) -> Window | None:
    """The widest s-range of ``region`` that no rule k > k_max can meet."""
    if region is None:
        return None
    variant = Variant(variant)
    alg = e2_term(CIRCLE, variant, p)
    q = p ** k_max
    dirty = {region.s_min - 1, region.s_max + 1}
    for m in basis_in_window(alg, region):
        w = mover_weight(alg, variant, m)
        if w and w % q == 0:
            dirty.add(alg.bidegree(m)[0])
    cuts = sorted(dirty)
    lo, hi = max(zip(cuts, cuts[1:]), key=lambda c: c[1] - c[0])
    if hi - lo < 2:
        return None
    return Window(lo + 1, hi - 1, region.n_min, region.n_max)


def schedule_k_max(p: int, window: Window) -> int:
    """Largest k with 2r(k) <= filtration span: longer circle rules vanish on ``window``."""
    k = 0
    while 2 * r_of(k + 1, p) <= window.filtration_span:
        k += 1
    return k


def schedule(group: Group, variant: Variant, p: int, window: Window | None = None) -> list[DerivationRule]:
    """The differential schedule in increasing page order.

    The homotopy fixed point variant uses the Tate rules; its ambient
    algebra has t polynomial, which restricts everything to s <= 0.  The
    circle schedule keeps every rule short enough to act inside ``window``.
    """
    p = check_prime(p)
    variant = Variant(variant)
    alg = e2_term(group, variant, p)
    if group.is_circle:
        if window is None:
            raise ValueError("the circle schedule is infinite; a window is needed to truncate it")
        ks = range(1, schedule_k_max(p, window) + 1)
    else:
        ks = range(1, 3 * group.n + 1)
    make = _mu_rule if variant is Variant.LOC else _t_rule
    rules = [make(alg, group, k, p) for k in ks]
    if not group.is_circle:
        rules.append(_odd_rule(alg, group, variant, p))
    return rules


def run_pages(group: Group, variant: Variant, p: int, window: Window, *,
              threads: int | None = None, verify_generators: bool = True) -> list[Page]:
    """Run the schedule for ``group`` and ``variant`` over ``window``.

    For the circle only the rules whose cumulative shrink leaves a safe
    region are run; the safe region of the last page is then cut further so
    that it only contains bidegrees that no omitted rule can reach.
    """
    variant = Variant(variant)
    alg = e2_term(group, variant, p)
    rules = schedule(group, variant, p, window)
    if group.is_circle:
        rules = rules[:circle_k_max(p, window, variant)]
    pages = run_schedule(alg, rules, window, threads=threads, verify_generators=verify_generators)
    if group.is_circle:
        last = pages[-1]
        last.safe_region = truncation_region(variant, p, len(rules), last.safe_region)
    return pages


# ---------------------------------------------------------------------------
# closed forms


class NoClosedFormError(LookupError):
    """The requested page is not one with a closed-form description."""


@dataclass(frozen=True)
class ClosedFormPage:
    r: int | str
    inventory: SummandInventory


INF = "inf"


def displayed_pages(group: Group, variant: Variant, p: int) -> list:
    variant = Variant(variant)
    if group.is_circle:
        return [2, INF]
    if variant is Variant.HFP:
        return [2]
    n = group.n
    return [2] + [2 * r_of(m, p) + 1 for m in range(1, 3 * n + 1)] + [2 * r_of(3 * n, p) + 2]


def _e2_inventory(group: Group, variant: Variant, p: int, alg: MonomialAlgebraSpec) -> SummandInventory:
    u = () if group.is_circle else (f"u{group.n}",)
    cof = u + LAMBDAS
    if variant is Variant.TATE:
        fams = (SummandFamily("E2", (), "t", None, cof),)
    elif variant is Variant.LOC:
        fams = (SummandFamily("E2", (), "mu", None, cof),)
    else:
        fams = (SummandFamily("E2:t", (), "t", None, cof, index_min=0),
                SummandFamily("E2:mu", (), "mu", None, cof, index_min=1))
    return SummandInventory("E2", families=fams, ambient=alg)


def _t_torsion(k: int, p: int, u: tuple) -> SummandFamily:
    return SummandFamily(f"T({k})", ((lam(k), 1),), "t", r_of(k - 3, p),
                         u + (lam(k + 1), lam(k + 2)), valuation=(p, k - 1))


def _mu_torsion(k: int, p: int, u: tuple) -> SummandFamily:
    return SummandFamily(f"M({k})", ((lam(k), 1),), "mu", r_of(k, p),
                         u + (lam(k + 1), lam(k + 2)), valuation=(p, k - 1))


def _torsion_stream(make, p: int, start: int):
    """Lazy torsion families for all k >= start that can reach the window."""

    def gen(alg, window):
        out = []
        bound = 0
        for k in range(start, start + 3):
            rng = make(k, p, ()).index_range(alg, window)
            if rng is not None:
                bound = max(bound, abs(rng[0]), abs(rng[1]))
        k = start
        while p ** (k - 1) <= bound:
            out.append(make(k, p, ()))
            k += 1
        return out

    return gen


def closed_form(group: Group, variant: Variant, r, p: int) -> ClosedFormPage:
    """The closed-form description of page ``r`` (an int, or ``"inf"``)."""
    p = check_prime(p)
    variant = Variant(variant)
    alg = e2_term(group, variant, p)
    if r == 2:
        return ClosedFormPage(2, _e2_inventory(group, variant, p, alg))
    if group.is_circle:
        if r != INF:
            raise NoClosedFormError(f"no closed form for page {r} of the {variant.value} spectral sequence of T")
        if variant is Variant.TATE:
            inv = SummandInventory(
                "Einf(T,tate)",
                summands=(CyclicSummand("A", (), None, LAMBDAS),),
                lazy=(_torsion_stream(_t_torsion, p, 4),),
                ambient=alg)
        elif variant is Variant.LOC:
            inv = SummandInventory(
                "Einf(T,loc)",
                summands=(CyclicSummand("A", (), None, LAMBDAS),),
                lazy=(_torsion_stream(_mu_torsion, p, 1),),
                ambient=alg)
        else:
            from .decomp import decomposition
            inv = decomposition("hfp", p)
        return ClosedFormPage(INF, inv)
    if variant is Variant.HFP:
        raise NoClosedFormError(f"no closed form for page {r} of the homotopy fixed point spectral sequence")
    n = group.n
    u = (f"u{n}",)
    final = 2 * r_of(3 * n, p) + 2
    if r == INF:
        r = final
    ms = {2 * r_of(m, p) + 1: m for m in range(1, 3 * n + 1)}
    if r not in ms and r != final:
        raise NoClosedFormError(f"page {r} is not displayed for {group}, {variant.value}")
    fams = []
    if variant is Variant.TATE:
        if r == final:
            fams.append(SummandFamily("free", (), "t", r_of(3 * n - 3, p) + 1, LAMBDAS,
                                      divisor=p ** (3 * n)))
            top = 3 * n
        else:
            top = ms[r]
            fams.append(SummandFamily("free", (), "t", None, u + LAMBDAS, divisor=p ** top))
        fams.extend(_t_torsion(k, p, u) for k in range(4, top + 1))
    else:
        if r == final:
            fams.append(SummandFamily("free", (), "mu", r_of(3 * n, p) + 1, LAMBDAS,
                                      divisor=p ** (3 * n)))
            top = 3 * n
        else:
            top = ms[r]
            fams.append(SummandFamily("free", (), "mu", None, u + LAMBDAS, divisor=p ** top))
        fams.extend(_mu_torsion(k, p, u) for k in range(1, top + 1))
    return ClosedFormPage(r, SummandInventory(f"E{r}({group},{variant.value})",
                                              families=tuple(fams), ambient=alg))
