"""Generator tables for TC and K of the height-2 truncated Brown-Peterson spectrum.

TC is assembled from the equalizer and coequalizer of two maps on the
A ⊕ B ⊕ C decomposition: ``eq ⊕ Σ^{-1} coeq``, the summand ∂·coeq coming
from the degree -1 shift.  The B-part equalizer is the limit of the
truncated modules ⟨x_{k,d}⟩ along k ≡ i (mod 3); it is free on one class
Ξ_{i,d} provided the heights (1 - d/p) r(k) increase without bound, which is
checked here rather than assumed.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field

from . import linalg
from .catalog import CIRCLE, LAMBDAS, Variant, e2_term, lambda_degree
from .decomp import torsion_height, x_degree
from .fpalg import DomainError, check_prime

FREE = None
DEL = "del"


class AssemblyError(RuntimeError):
    """A generator count, degree range or height condition failed."""


@dataclass(frozen=True)
class PV3Generator:
    name: str
    degree: int
    v3_height: int | None = FREE
    detected_by: str | None = None

    @property
    def is_free(self) -> bool:
        return self.v3_height is None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "degree": self.degree,
            "v3_height": "free" if self.v3_height is None else self.v3_height,
            "detected_by": self.detected_by,
        }


@dataclass
class PV3Table:
    prime: int
    provenance: str
    generators: list[PV3Generator]
    relations: list[str] = field(default_factory=list)
    unresolved_blocks: list[dict] = field(default_factory=list)
    periodicity: tuple[str, int] | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        names = [g.name for g in self.generators]
        dup = [n for n, c in Counter(names).items() if c > 1]
        if dup:
            raise AssemblyError(f"duplicate generator names: {dup}")

    def __len__(self) -> int:
        return len(self.generators)

    def names(self) -> set[str]:
        return {g.name for g in self.generators}

    def free(self) -> list[PV3Generator]:
        return [g for g in self.generators if g.is_free]

    def torsion(self) -> list[PV3Generator]:
        return [g for g in self.generators if not g.is_free]

    def by_name(self, name: str) -> PV3Generator:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(name)

    def degree_counts(self, free_only: bool = False) -> dict[int, int]:
        gens = self.free() if free_only else self.generators
        return dict(sorted(Counter(g.degree for g in gens).items()))

    def to_json(self) -> str:
        out = {
            "prime": self.prime,
            "provenance": self.provenance,
            "formal": self.prime < 7,
            "generators": [g.to_json() for g in self.generators],
            "relations": list(self.relations),
            "unresolved_blocks": list(self.unresolved_blocks),
        }
        if self.periodicity is not None:
            out["periodicity"] = {"name": self.periodicity[0], "degree": self.periodicity[1]}
        out.update(self.notes)
        return json.dumps(out, indent=2)

    def to_table(self) -> str:
        head = f"# {self.provenance} at p={self.prime}" + (" (formal)" if self.prime < 7 else "")
        rows = [("name", "degree", "v-height", "detected by")]
        for g in self.generators:
            rows.append((g.name, str(g.degree), "free" if g.is_free else str(g.v3_height),
                         g.detected_by or "-"))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = [head]
        for r in rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        for rel in self.relations:
            lines.append(f"relation: {rel}")
        for blk in self.unresolved_blocks:
            lines.append(f"unresolved: degrees {blk['degree_min']}..{blk['degree_max']} ({blk['note']})")
        return "\n".join(lines)


def _sorted(gens) -> list[PV3Generator]:
    return sorted(gens, key=lambda g: (g.degree, g.name))


def _product_name(parts) -> str:
    parts = [x for x in parts if x != "1"]
    return "*".join(parts) if parts else "1"


def xi_name(i: int, d: int) -> str:
    return f"Xi_{i}_{d}"


def xi_degree(i: int, d: int, p: int) -> int:
    """2p^i - 2dp^{i-1} - 1, the degree of t^{dp^{i-1}} λ_i."""
    return 2 * p ** i - 2 * d * p ** (i - 1) - 1


def _detect(p: int, exps: dict) -> str:
    alg = e2_term(CIRCLE, Variant.HFP, p)
    return alg.format_monomial(alg.monomial(exps))


def _lambda_products(names, p: int):
    """Pairs (name list, degree) over all subsets of ``names``."""
    for r in range(len(names) + 1):
        for sub in itertools.combinations(names, r):
            yield list(sub), sum(lambda_degree(int(x[1:]), p) for x in sub)


# ---------------------------------------------------------------------------
# the two maps and their (co)equalizer


@dataclass(frozen=True)
class MapSpec:
    """Behavior of a map on each kind of summand of A ⊕ B ⊕ C.

    ``b_low`` applies to B(k,d) with k <= 3 and ``b_high`` to k >= 4;
    ``b_shift`` is the change of k on B summands.
    """

    name: str
    a: str
    b_low: str
    b_high: str
    c: str
    b_shift: int = 0

    BEHAVIORS = ("identity", "inclusion", "surjection", "zero")

    def __post_init__(self):
        for v in (self.a, self.b_low, self.b_high, self.c):
            if v not in self.BEHAVIORS:
                raise ValueError(f"unknown behavior {v!r}")

    def on(self, summand: str, k: int | None = None) -> tuple[str, int | None]:
        """(behavior, target index) on ``A``, ``C`` or ``B`` with index k."""
        if summand == "A":
            return self.a, None
        if summand == "C":
            return self.c, None
        if summand != "B" or k is None or k < 1:
            raise ValueError(f"unknown summand {summand!r} (k={k})")
        if k <= 3:
            return self.b_low, (k - self.b_shift if self.b_low != "zero" else None)
        return self.b_high, k - self.b_shift


def map_gamma_hat(p: int) -> MapSpec:
    """Identity on A and C, inclusion B(k,d) -> B′(k,d)."""
    check_prime(p)
    return MapSpec("Gamma_hat", "identity", "inclusion", "inclusion", "identity", 0)


def map_grh(p: int) -> MapSpec:
    """Identity on A, surjection B(k+3,d) -> B′(k,d), zero on B(k,d) for k <= 3 and on C."""
    check_prime(p)
    return MapSpec("GR_h", "identity", "zero", "surjection", "zero", 3)


def _scalar(behavior: str) -> int:
    return 0 if behavior == "zero" else 1


def _kernel_cokernel_rank(diff: list[list[int]], dim: int, p: int) -> tuple[int, int]:
    rk = linalg.rank(diff, dim, p) if diff else 0
    return dim - rk, len(diff) - rk


def check_heights(i: int, d: int, p: int, terms: int = 6) -> list[int]:
    """Heights of ⟨x_{k,d}⟩ along k = i, i+3, ...; they must strictly increase."""
    hs = [torsion_height(i + 3 * j, d, p) for j in range(terms)]
    for a, b in zip(hs, hs[1:]):
        if b <= a:
            raise AssemblyError(f"heights along k ≡ {i} (mod 3), d={d} do not increase: {hs}")
    # h(k+3) = p^3 h(k) + h([k] index), so growth is at least geometric
    if hs[-1] < p ** (3 * (terms - 1)):
        raise AssemblyError(f"heights along k ≡ {i} (mod 3), d={d} grow too slowly: {hs}")
    return hs


@dataclass
class GradedModule:
    """A free P(v₃)-module given by its generators."""

    generators: list[PV3Generator]

    def degree_counts(self) -> dict[int, int]:
        return dict(sorted(Counter(g.degree for g in self.generators).items()))


def _a_generators(p: int, lambdas=LAMBDAS) -> list[PV3Generator]:
    out = []
    for names, deg in _lambda_products(lambdas, p):
        exps = {x: 1 for x in names}
        out.append(PV3Generator(_product_name(names), deg, FREE, _detect(p, exps)))
    return out


def _xi_generators(p: int, n: int = 2) -> list[PV3Generator]:
    out = []
    lams = [f"l{j}" for j in range(1, n + 2)]
    for i in range(1, n + 2):
        others = [x for x in lams if x != f"l{i}"]
        for d in range(1, p):
            base = {"t": d * p ** (i - 1), f"l{i}": 1}
            for names, deg in _lambda_products(others, p):
                exps = dict(base)
                exps.update({x: 1 for x in names})
                out.append(PV3Generator(_product_name(names + [xi_name(i, d)]),
                                        xi_degree(i, d, p) + deg, FREE, _detect(p, exps)))
    return out


def equalizer_coequalizer(p: int) -> tuple[GradedModule, GradedModule]:
    """eq and coeq of Γ̂ and GR^h as free P(v₃)-modules."""
    p = check_prime(p)
    g, r = map_gamma_hat(p), map_grh(p)
    eq: list[PV3Generator] = []
    coeq: list[PV3Generator] = []

    # A: both maps act on each of the 8 generators by a scalar
    a = _a_generators(p)
    diff = [[(_scalar(g.on("A")[0]) - _scalar(r.on("A")[0])) * int(i == j) for j in range(len(a))]
            for i in range(len(a))]
    ker, cok = _kernel_cokernel_rank(diff, len(a), p)
    if ker != len(a) or cok != len(a):
        raise AssemblyError(f"A-part: expected eq = coeq = A, got ranks {ker}, {cok}")
    eq.extend(a)
    coeq.extend(a)

    # C: identity minus zero is invertible
    d_c = _scalar(g.on("C")[0]) - _scalar(r.on("C")[0])
    if d_c % p == 0:
        raise AssemblyError("C-part: Γ̂ - GR^h is not invertible on C")

    # B: compatible families along k ≡ i (mod 3) form a limit of cyclic modules
    for k in range(1, 7):
        beh_g, tgt_g = g.on("B", k)
        beh_r, tgt_r = r.on("B", k)
        if beh_g != "inclusion" or tgt_g != k:
            raise AssemblyError(f"Γ̂ must include B({k},d) into B′({k},d)")
        if k <= 3 and beh_r != "zero":
            raise AssemblyError(f"GR^h must vanish on B({k},d)")
        if k > 3 and (beh_r != "surjection" or tgt_r != k - 3):
            raise AssemblyError(f"GR^h must map B({k},d) onto B′({k - 3},d)")
    for i in (1, 2, 3):
        for d in range(1, p):
            check_heights(i, d, p)
    eq.extend(_xi_generators(p))
    return GradedModule(_sorted(eq)), GradedModule(_sorted(coeq))


# ---------------------------------------------------------------------------
# tables


def tc_rank(n: int, p: int) -> int:
    return 2 ** (n + 2) + (n + 1) * 2 ** n * (p - 1)


def tc_degree_range(p: int) -> tuple[int, int]:
    return -1, 2 * p ** 3 + 2 * p ** 2 + 2 * p - 3


def _relations(p: int, n: int = 2) -> list[str]:
    return [f"l{i}*{xi_name(i, d)} = 0" for i in range(1, n + 2) for d in range(1, p)]


def assemble_tc(p: int) -> PV3Table:
    p = check_prime(p)
    eq, coeq = equalizer_coequalizer(p)
    gens = list(eq.generators)
    for c in coeq.generators:
        gens.append(PV3Generator(_product_name([DEL, c.name]), c.degree - 1, FREE, None))
    table = PV3Table(p, "TC", _sorted(gens), _relations(p), periodicity=("v3", 2 * p ** 3 - 2))
    if len(table) != 12 * p + 4:
        raise AssemblyError(f"TC table has {len(table)} generators, expected {12 * p + 4}")
    lo, hi = tc_degree_range(p)
    bad = [g for g in table.generators if not lo <= g.degree <= hi]
    if bad:
        raise AssemblyError(f"generators outside [{lo}, {hi}]: {bad}")
    return table


def poincare_series(table: PV3Table) -> dict[int, int]:
    """Sum of x^degree over the generators, as {degree: coefficient}."""
    if table.torsion():
        raise DomainError("the Poincaré series is defined for free tables only")
    return dict(sorted(Counter(g.degree for g in table.generators).items()))


def _poly_mul(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out: Counter = Counter()
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] += x * y
    return dict(out)


def _poly_add(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out = Counter(a)
    out.update(b)
    return dict(out)


def reference_poincare(p: int) -> dict[int, int]:
    """Expansion of the closed product-sum formula for the Poincaré series."""
    p = check_prime(p)

    def one_plus(e):
        return {0: 1, e: 1}

    def prod(*fs):
        out = {0: 1}
        for f in fs:
            out = _poly_mul(out, f)
        return out

    l1, l2, l3 = (one_plus(2 * p ** i - 1) for i in (1, 2, 3))
    s1 = {2 * j - 1: 1 for j in range(1, p)}
    s2 = {2 * j * p - 1: 1 for j in range(1, p)}
    s3 = {2 * j * p * p - 1: 1 for j in range(1, p)}
    total = prod(one_plus(-1), l1, l2, l3)
    total = _poly_add(total, prod(l2, l3, s1))
    total = _poly_add(total, prod(l1, l3, s2))
    total = _poly_add(total, prod(l1, l2, s3))
    return {k: v for k, v in sorted(total.items()) if v}


def format_poincare(series: dict[int, int]) -> str:
    return "\n".join(f"{c} x^{d}" for d, c in sorted(series.items()) if c)


def assemble_k_padic(p: int) -> PV3Table:
    """TC with ∂ replaced by v₃∂ plus the three classes Σ^{-2}{τ̄₁, τ̄₂, τ̄₁τ̄₂}."""
    p = check_prime(p)
    tc = assemble_tc(p)
    gens = [g for g in tc.generators if g.name != DEL]
    gens.append(PV3Generator(f"v3*{DEL}", 2 * p ** 3 - 3, FREE, None))
    tau = {"tau1": 2 * p - 1, "tau2": 2 * p ** 2 - 1}
    tau["tau1*tau2"] = tau["tau1"] + tau["tau2"]
    for name, deg in tau.items():
        gens.append(PV3Generator(name, deg - 2, 1, None))
    return PV3Table(p, "K_p_complete", _sorted(gens), list(tc.relations), periodicity=tc.periodicity)


def assemble_k_local(p: int) -> PV3Table:
    """The free part of the p-complete table and an undetermined low-degree block."""
    p = check_prime(p)
    kp = assemble_k_padic(p)
    hi = 2 * p ** 2 + 2 * p - 3
    block = {"degree_min": 1, "degree_max": hi,
             "note": "F_p-module with trivial v3-action, not determined"}
    return PV3Table(p, "K_p_local", kp.free(), list(kp.relations), [block],
                    periodicity=kp.periodicity, notes={"iso_threshold": 2 * p ** 2 + 2 * p})


def assemble_tc_height(n: int, p: int) -> PV3Table:
    """The height-n table over P(v_{n+1}), n in {0, 1, 2}."""
    if n not in (0, 1, 2):
        raise DomainError(f"height must be 0, 1 or 2, got {n}")
    p = check_prime(p)
    if n == 2:
        return assemble_tc(p)
    lams = [f"l{j}" for j in range(1, n + 2)]
    gens = []
    for names, deg in _lambda_products(lams, p):
        gens.append(PV3Generator(_product_name(names), deg, FREE,
                                 _detect(p, {x: 1 for x in names})))
        gens.append(PV3Generator(_product_name([DEL] + names), deg - 1, FREE, None))
    for i in range(1, n + 2):
        for d in range(1, p):
            check_heights(i, d, p)
    gens.extend(_xi_generators(p, n))
    v = f"v{n + 1}"
    table = PV3Table(p, f"TC_height_{n}", _sorted(gens), _relations(p, n),
                     periodicity=(v, 2 * p ** (n + 1) - 2))
    if len(table) != tc_rank(n, p):
        raise AssemblyError(f"height {n} table has {len(table)} generators, expected {tc_rank(n, p)}")
    return table


@dataclass
class MapReport:
    ok: bool
    threshold: int
    first_failure: int | None = None
    kernel: list[str] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)


def _survives(name: str) -> bool:
    return all(part not in ("l3", "v3") and not part.startswith("Xi_3_") for part in name.split("*"))


def check_map_tc2_to_tc1(p: int) -> MapReport:
    """Check the map from the height-2 table to the height-1 table.

    Generators named by ∂, λ₁, λ₂, Ξ₁ and Ξ₂ go to the classes of the same
    name; λ₃, Ξ₃ and v₃ go to zero.  The target is read in V(2)-homotopy,
    where v₂ acts trivially, so its dimension in each degree is its
    generator count.  The map must be a bijection below degree 2p² - 1
    and surjective.
    """
    p = check_prime(p)
    src, tgt = assemble_tc_height(2, p), assemble_tc_height(1, p)
    threshold = 2 * p * p - 1
    report = MapReport(True, threshold)
    tnames = {g.name: g for g in tgt.generators}
    image = set()
    for g in src.generators:
        if _survives(g.name):
            h = tnames.get(g.name)
            if h is None or h.degree != g.degree:
                report.ok = False
                report.first_failure = g.degree if report.first_failure is None else report.first_failure
                report.messages.append(f"{g.name} has no matching target in degree {g.degree}")
            else:
                image.add(g.name)
        else:
            report.kernel.append(g.name)
    missing = sorted(set(tnames) - image, key=lambda n: tnames[n].degree)
    if missing:
        report.ok = False
        d = tnames[missing[0]].degree
        report.first_failure = d if report.first_failure is None else min(report.first_failure, d)
        report.messages.append(f"not surjective: {missing} are not hit")
    low_k = [n for n in report.kernel if src.by_name(n).degree < threshold]
    if low_k:
        report.ok = False
        d = min(src.by_name(n).degree for n in low_k)
        report.first_failure = d if report.first_failure is None else min(report.first_failure, d)
        report.messages.append(f"kernel below degree {threshold}: {low_k}")
    sc, tc = src.degree_counts(), tgt.degree_counts()
    for deg in sorted(set(sc) | set(tc)):
        if deg >= threshold:
            break
        if sc.get(deg, 0) != tc.get(deg, 0):
            report.ok = False
            report.first_failure = deg if report.first_failure is None else min(report.first_failure, deg)
            report.messages.append(f"degree {deg}: {sc.get(deg, 0)} != {tc.get(deg, 0)}")
            break
    return report


ASSEMBLERS = {
    "tc": assemble_tc,
    "k-padic": assemble_k_padic,
    "k-local": assemble_k_local,
    "tc-height-0": lambda p: assemble_tc_height(0, p),
    "tc-height-1": lambda p: assemble_tc_height(1, p),
}
