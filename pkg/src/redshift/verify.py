"""Cross-module checks shared by ``redshift verify`` and the acceptance tests.

Each check returns a :class:`CheckResult`; none of them raise on a
mismatch.  Windows are chosen so that the safe region covers the
requested total degrees after every scheduled differential.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable

from . import catalog, decomp, tcasm
from .catalog import CIRCLE, Variant, closed_form, cyclic, displayed_pages, e2_term, r_of
from .fpalg import (
    Element,
    GeneratorSpec,
    Kind,
    MonomialAlgebraSpec,
    Window,
    mono_product,
    multiply,
)
from .inventory import compare_dims, materialize
from .ssengine import Page, apply_rule, page_at


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0
    budget: float | None = None

    @property
    def within_budget(self) -> bool:
        return self.budget is None or self.seconds <= self.budget

    @property
    def passed(self) -> bool:
        return self.ok and self.within_budget

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        budget = f"/{self.budget:g}s" if self.budget is not None else ""
        return f"{verdict} {self.name}: {self.detail} [{self.seconds:.2f}s{budget}]"


def timed(name: str, budget: float | None, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a check that crashes is a failed check
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, ok, detail, time.perf_counter() - start, budget)


# ---------------------------------------------------------------------------
# windows


def cyclic_window(n: int, p: int, n_lo: int, n_hi: int, margin: int = 0) -> Window:
    """A window whose safe region after the C_{p^n} schedule is [-S, S] x [n_lo, n_hi]."""
    rules = [2 * r_of(k, p) for k in range(1, 3 * n + 1)] + [2 * r_of(3 * n, p) + 1]
    s = sum(rules) + margin
    return Window(-s, s, n_lo - len(rules), n_hi + len(rules))


def circle_window(variant: Variant, p: int, k_max: int, n_lo: int, n_hi: int, keep: int) -> Window:
    """A window running circle rules 1..k_max with ``keep`` filtrations left per soft side."""
    shrink = sum(2 * r_of(k, p) for k in range(1, k_max + 1))
    top = 0 if Variant(variant) is not Variant.TATE else shrink + keep
    return Window(-(shrink + keep), top, n_lo - k_max, n_hi + k_max)


def compare_page(page: Page, inventory, alg: MonomialAlgebraSpec,
                 region: Window | None = None) -> list:
    region = page.safe_region if region is None else region
    if region is None:
        return [("no safe region", 0, 0)]
    if inventory.degree_floor is not None:
        region = region.intersect(Window(region.s_min, region.s_max, inventory.degree_floor, region.n_max))
    got = materialize(inventory, page.window, alg)
    return compare_dims(page.dims(region), got.dims, region)


# ---------------------------------------------------------------------------
# table checks


def check_tc_counts(primes=(3, 5, 7, 11)) -> tuple[bool, str]:
    parts, ok = [], True
    for p in primes:
        t = tcasm.assemble_tc(p)
        lo, hi = tcasm.tc_degree_range(p)
        degs = [g.degree for g in t.generators]
        good = (len(t) == 12 * p + 4 and all(g.is_free for g in t.generators)
                and min(degs) >= lo and max(degs) <= hi)
        ok &= good
        parts.append(f"p={p}:{len(t)}")
    return ok, " ".join(parts)


def check_poincare(primes=(3, 5, 7, 11)) -> tuple[bool, str]:
    bad = [p for p in primes if tcasm.poincare_series(tcasm.assemble_tc(p)) != tcasm.reference_poincare(p)]
    return not bad, "exact" if not bad else f"mismatch at p in {bad}"


def check_height_families(primes=(3, 5, 7)) -> tuple[bool, str]:
    parts, ok = [], True
    for p in primes:
        t0, t1 = tcasm.assemble_tc_height(0, p), tcasm.assemble_tc_height(1, p)
        shape0 = {"del", "1", "l1", "del*l1"} | {f"Xi_1_{d}" for d in range(1, p)}
        shape1 = ({"*".join(x) if x else "1" for x in _subsets(("del", "l1", "l2"))}
                  | {f"{c}Xi_1_{d}" for d in range(1, p) for c in ("", "l2*")}
                  | {f"{c}Xi_2_{d}" for d in range(1, p) for c in ("", "l1*")})
        good = (len(t0) == p + 3 and len(t1) == 4 * p + 4
                and t0.names() == shape0 and t1.names() == shape1)
        ok &= good
        parts.append(f"p={p}:{len(t0)}/{len(t1)}")
    return ok, " ".join(parts)


def _subsets(names):
    out = [()]
    for x in names:
        out += [s + (x,) for s in out]
    return out


def check_torsion_heights(primes=(3, 5, 7), k_max: int = 9) -> tuple[bool, str]:
    count = 0
    for p in primes:
        for k in range(1, k_max + 1):
            for d in range(1, p):
                r = r_of(k, p)
                if (d * r) % p or (d * r_of(k - 3, p)) % p:
                    return False, f"non-integral exponent at p={p}, k={k}, d={d}"
                h = decomp.torsion_height(k, d, p)
                if h * p != (p - d) * r or h != decomp.module_x(k, d, p).tmu_height:
                    return False, f"height mismatch at p={p}, k={k}, d={d}"
                if k <= 3 and h != p ** k - d * p ** (k - 1):
                    return False, f"low-k height mismatch at p={p}, k={k}, d={d}"
                count += 1
    return True, f"{count} cases"


def check_k_variants(p: int = 7) -> tuple[bool, str]:
    tc, kp, kl = tcasm.assemble_tc(p), tcasm.assemble_k_padic(p), tcasm.assemble_k_local(p)
    removed = {(g.name, g.degree) for g in tc.generators} - {(g.name, g.degree) for g in kp.generators}
    added = {(g.name, g.degree, g.v3_height) for g in kp.generators} - {
        (g.name, g.degree, g.v3_height) for g in tc.generators}
    tau = {g.degree for g in kp.torsion()}
    want_added = {("v3*del", 2 * p ** 3 - 3, None)} | {
        (n, d, 1) for n, d in (("tau1", 2 * p - 3), ("tau2", 2 * p * p - 3), ("tau1*tau2", 2 * p * p + 2 * p - 4))}
    blk = kl.unresolved_blocks
    ok = (removed == {("del", -1)} and added == want_added
          and len(kp.free()) == 12 * p + 4 and len(kp.torsion()) == 3
          and len(blk) == 1 and (blk[0]["degree_min"], blk[0]["degree_max"]) == (1, 2 * p * p + 2 * p - 3)
          and kl.notes.get("iso_threshold") == 2 * p * p + 2 * p
          and all(g.degree >= 0 for g in kl.generators))
    return ok, (f"v3*del at {2 * p ** 3 - 3}, torsion at {sorted(tau)}, "
                f"block [{blk[0]['degree_min']}, {blk[0]['degree_max']}], threshold {kl.notes.get('iso_threshold')}")


def check_map_tc2_tc1(p: int = 7) -> tuple[bool, str]:
    rep = tcasm.check_map_tc2_to_tc1(p)
    return rep.ok, (f"bijective below {rep.threshold}, {len(rep.kernel)} generators to zero"
                    if rep.ok else "; ".join(rep.messages))


# ---------------------------------------------------------------------------
# engine against closed forms


def check_cyclic_pages(n: int, p: int, n_lo: int, n_hi: int, *, variant: Variant = Variant.TATE,
                       pages: str = "displayed", margin: int = 0, threads: int | None = None) -> tuple[bool, str]:
    g = cyclic(n)
    variant = Variant(variant)
    window = cyclic_window(n, p, n_lo, n_hi, margin)
    alg = e2_term(g, variant, p)
    run = catalog.run_pages(g, variant, p, window, threads=threads)
    wanted = displayed_pages(g, variant, p) if pages == "displayed" else [pages]
    parts, ok = [], True
    for r in wanted:
        pg = run[-1] if r == catalog.INF else page_at(run, r)
        diff = compare_page(pg, closed_form(g, variant, r, p).inventory, alg)
        ok &= not diff
        parts.append(f"E{r}:{'ok' if not diff else len(diff)}")
    final = run[-1].safe_region
    return ok, f"{' '.join(parts)} on safe region {final}"


def check_circle(p: int, n_hi: int, k_max: int, keep: int, threads: int | None = None) -> tuple[bool, str]:
    """E^∞ of the three circle variants against the degree >= 0 decompositions.

    Also checks that the localized decomposition exceeds the homotopy fixed
    point one by exactly the 4p - 2 listed classes.
    """
    sides = {Variant.HFP: "hfp", Variant.TATE: "tate", Variant.LOC: "loc"}
    parts, ok = [], True
    regions = {}
    for variant, side in sides.items():
        window = circle_window(variant, p, k_max, 0, n_hi, keep)
        run = catalog.run_pages(CIRCLE, variant, p, window, threads=threads)
        inf = run[-1]
        if inf.safe_region is None:
            return False, f"{side}: empty safe region"
        region = inf.safe_region.intersect(Window(inf.safe_region.s_min, inf.safe_region.s_max, 0, n_hi))
        regions[side] = region
        alg = e2_term(CIRCLE, variant, p)
        diff = compare_page(inf, decomp.decomposition(side, p), alg, region)
        ok &= not diff
        parts.append(f"{side}:{'ok' if not diff else f'{len(diff)} diffs, first {diff[0]}'}")
    region = regions["hfp"].intersect(regions["loc"])
    hfp = materialize(decomp.decomposition("hfp", p), region).monomials()
    loc = materialize(decomp.decomposition("loc", p), region).monomials()
    extra = set(decomp.extra_classes(p))
    good = hfp <= loc and loc - hfp == extra and len(extra) == 4 * p - 2
    ok &= good
    parts.append(f"B'-B: {len(loc - hfp)} classes (expected {4 * p - 2})")
    return ok, " ".join(parts) + f" on s>={regions['hfp'].s_min}, n in [0,{n_hi}]"


# ---------------------------------------------------------------------------
# randomized algebraic properties


def _rules_for(p: int):
    rules = []
    for variant in Variant:
        rules.extend(catalog.schedule(cyclic(1), variant, p))
        rules.extend(catalog.schedule(CIRCLE, variant, p, Window(-6 * r_of(3, p), 0, 0, 1))[:3])
    rules.extend(catalog.schedule(cyclic(2), Variant.TATE, p)[:4])
    return rules


def _random_word(rng: random.Random, rule) -> Element | None:
    alg = rule.ambient
    m = alg.unit
    sign = 1
    for g in rule.generators:
        if g.kind is Kind.EXTERIOR:
            e = rng.randint(0, 1)
        elif g.kind is Kind.LAURENT:
            e = rng.randint(-3, 3)
        else:
            e = rng.randint(0, 3)
        if not e:
            continue
        sg, m = mono_product(alg, m, tuple(e * x for x in g.base))
        sign *= sg
        if not sign:
            return None
    if not alg.is_valid(m):
        return None
    return Element(alg, {m: sign * rng.randint(1, alg.prime - 1)})


def _sample(rng, rule):
    while True:
        x = _random_word(rng, rule)
        if x is not None:
            return x


def _d(rule, x: Element) -> Element:
    return apply_rule(rule, x)[0]


def check_derivations(p: int, cases: int = 10_000, seed: int = 0) -> tuple[bool, str]:
    """d∘d = 0 and the Leibniz rule on random homogeneous page elements."""
    rng = random.Random(seed * 1000 + p)
    rules = _rules_for(p)
    bad_dd = bad_leibniz = 0
    for i in range(cases):
        rule = rules[i % len(rules)]
        alg = rule.ambient
        x, y = _sample(rng, rule), _sample(rng, rule)
        if _d(rule, _d(rule, x)):
            bad_dd += 1
        xy = multiply(alg, x, y)
        if not alg.is_valid(next(iter(xy.terms), alg.unit)):
            continue
        sign = -1 if x.bidegree()[1] % 2 else 1
        rhs = multiply(alg, _d(rule, x), y) + multiply(alg, x, _d(rule, y)).scale(sign)
        if _d(rule, xy) != rhs:
            bad_leibniz += 1
    return not (bad_dd or bad_leibniz), f"{cases} cases, d∘d failures {bad_dd}, Leibniz failures {bad_leibniz}"


def _test_algebra(p: int) -> MonomialAlgebraSpec:
    return MonomialAlgebraSpec(p, (
        GeneratorSpec("t", Kind.LAURENT, (-2, -2)),
        GeneratorSpec("u1", Kind.EXTERIOR, (-1, -1)),
        GeneratorSpec("l1", Kind.EXTERIOR, (0, 2 * p - 1)),
        GeneratorSpec("l2", Kind.EXTERIOR, (0, 2 * p * p - 1)),
        GeneratorSpec("x", Kind.TRUNCATED, (0, 2), p),
        GeneratorSpec("mu", Kind.POLYNOMIAL, (0, 2 * p ** 3)),
    ))


def _random_element(rng: random.Random, alg: MonomialAlgebraSpec, terms: int) -> Element:
    out = {}
    for _ in range(terms):
        m = []
        for g in alg.generators:
            if g.kind is Kind.LAURENT:
                m.append(rng.randint(-4, 4))
            elif g.max_exponent is not None:
                m.append(rng.randint(0, g.max_exponent))
            else:
                m.append(rng.randint(0, 4))
        out[tuple(m)] = rng.randint(1, alg.prime - 1)
    return Element(alg, out)


def check_algebra_laws(p: int, cases: int = 10_000, seed: int = 0) -> tuple[bool, str]:
    """Graded commutativity on monomials and associativity on sums."""
    rng = random.Random(seed * 1000 + p + 1)
    alg = _test_algebra(p)
    bad_comm = bad_assoc = 0
    for _ in range(cases):
        x, y = _random_element(rng, alg, 1), _random_element(rng, alg, 1)
        sign = -1 if (x.bidegree()[1] * y.bidegree()[1]) % 2 else 1
        if multiply(alg, x, y) != multiply(alg, y, x).scale(sign):
            bad_comm += 1
        a, b, c = (_random_element(rng, alg, 2) for _ in range(3))
        if multiply(alg, multiply(alg, a, b), c) != multiply(alg, a, multiply(alg, b, c)):
            bad_assoc += 1
    return not (bad_comm or bad_assoc), (f"{cases} cases, commutativity failures {bad_comm}, "
                                         f"associativity failures {bad_assoc}")


# ---------------------------------------------------------------------------
# suites


def criteria(suite: str = "quick", threads: int | None = None) -> list[tuple[str, float | None, Callable]]:
    """Named checks with runtime budgets in seconds."""
    quick = [
        ("tc-counts", 1.0, check_tc_counts),
        ("poincare", 1.0, check_poincare),
        ("height-families", None, check_height_families),
        ("torsion-heights", None, check_torsion_heights),
        ("k-variants", None, check_k_variants),
        ("map-tc2-tc1", None, check_map_tc2_tc1),
        ("cp-tate-p3", 60.0, lambda: check_cyclic_pages(1, 3, -60, 80, pages=catalog.INF,
                                                        margin=134, threads=threads)),
        ("cp-loc-p3", 60.0, lambda: check_cyclic_pages(1, 3, -60, 80, variant=Variant.LOC,
                                                       margin=200, threads=threads)),
        ("circle-p3", 600.0, lambda: check_circle(3, 75, 6, 1500, threads=threads)),
    ]
    if suite == "quick":
        return quick
    if suite != "full":
        raise ValueError(f"unknown suite {suite!r} (expected quick or full)")
    return quick + [
        ("cp2-tate-p3", 600.0, lambda: check_cyclic_pages(2, 3, -60, 200, margin=618, threads=threads)),
        ("properties", 60.0, lambda: _all_properties((3, 5, 7), 10_000)),
        ("cp-tate-p5", 120.0, lambda: check_cyclic_pages(1, 5, 0, 300, margin=300, threads=threads)),
        ("circle-p5", 600.0, lambda: check_circle(5, 200, 4, 1200, threads=threads)),
        ("cp-tate-p7", 600.0, lambda: check_cyclic_pages(1, 7, 0, 200, pages=catalog.INF,
                                                         margin=700, threads=threads)),
    ]


def _all_properties(primes, cases) -> tuple[bool, str]:
    ok, parts = True, []
    for p in primes:
        a, da = check_derivations(p, cases)
        b, db = check_algebra_laws(p, cases)
        ok &= a and b
        parts.append(f"p={p} ok" if a and b else f"p={p}: {da}; {db}")
    return ok, ", ".join(parts)


def run_suite(suite: str = "quick", threads: int | None = None,
              report: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    out = []
    for name, budget, fn in criteria(suite, threads):
        res = timed(name, budget, fn)
        if report is not None:
            report(res)
        out.append(res)
    return out
