"""The degree ≥ 0 parts of the circle E^∞ terms as sums of cyclic P(tμ)-modules.

For k >= 1 and 0 < d < p the class x_{k,d} = t^{d r(k)/p} λ_[k] μ^{d r(k-3)/p}
generates a truncated summand of height (1 - d/p) r(k).  The three
decompositions are

    hfp:  A ⊕ B ⊕ C,   tate:  Â ⊕ B̂ ⊕ Ĉ,   loc:  A ⊕ B′ ⊕ C,

each restricted to total degrees >= 0.  The modules B′(k,d) and B̂(k,d) are
given by four generators over P(tμ); those obtained by dividing by tμ have
height one larger and are tagged ``divided``.
"""

from __future__ import annotations

from .catalog import CIRCLE, LAMBDAS, Variant, bracket, e2_term, lam, r_of
from .fpalg import DomainError, Monomial, MonomialAlgebraSpec, Window, check_prime
from .inventory import (
    FREE,
    CyclicSummand,
    Materialized,
    SummandInventory,
    materialize,
    named,
)

__all__ = [
    "CyclicSummand", "SummandInventory", "Materialized", "materialize",
    "x_exponents", "x_kd", "y_kd", "x_degree", "torsion_height", "hat_torsion_height",
    "summand_S", "summand_S_hat", "module_x", "module_B", "inventory_A", "inventory_B",
    "inventory_C", "decomposition", "extra_classes", "SIDES",
]

SIDES = ("hfp", "tate", "loc")
_SIDE_VARIANT = {"hfp": Variant.HFP, "tate": Variant.TATE, "loc": Variant.LOC}


def _side(side: str) -> str:
    if side == "loc-hfp":
        return "loc"
    if side not in SIDES:
        raise DomainError(f"unknown side {side!r} (expected one of {', '.join(SIDES)})")
    return side


def _check_kd(k: int, d: int, p: int, k_min: int = 1) -> int:
    p = check_prime(p)
    if k < k_min:
        raise DomainError(f"k must be >= {k_min}, got {k}")
    if not 0 < d < p:
        raise DomainError(f"d must satisfy 0 < d < p = {p}, got {d}")
    return p


def ambient(side: str, p: int) -> MonomialAlgebraSpec:
    return e2_term(CIRCLE, _SIDE_VARIANT[_side(side)], p)


def x_exponents(k: int, d: int, p: int) -> dict[str, int]:
    """Exponents of x_{k,d} (the same monomial as y_{k,d})."""
    return {"t": d * r_of(k, p) // p, lam(k): 1, "mu": d * r_of(k - 3, p) // p}


def _as_monomial(exps: dict[str, int], p: int, alg: MonomialAlgebraSpec | None) -> Monomial:
    alg = alg or ambient("loc", p)
    return alg.monomial(exps)


def x_kd(k: int, d: int, p: int, alg: MonomialAlgebraSpec | None = None) -> Monomial:
    p = _check_kd(k, d, p)
    return _as_monomial(x_exponents(k, d, p), p, alg)


def y_kd(k: int, d: int, p: int, alg: MonomialAlgebraSpec | None = None) -> Monomial:
    p = _check_kd(k, d, p, 4)
    return _as_monomial(x_exponents(k, d, p), p, alg)


def x_degree(k: int, d: int, p: int) -> int:
    """Total degree 2p^[k] - 2dp^{[k]-1} - 1 of x_{k,d} and y_{k,d}."""
    p = _check_kd(k, d, p)
    b = bracket(k)
    return 2 * p ** b - 2 * d * p ** (b - 1) - 1


def torsion_height(k: int, d: int, p: int) -> int:
    """Height (1 - d/p) r(k) of ⟨x_{k,d}⟩."""
    p = _check_kd(k, d, p)
    return r_of(k, p) - d * r_of(k, p) // p


def hat_torsion_height(k: int, d: int, p: int) -> int:
    """Height (1 - d/p) r(k-3) of ⟨y_{k,d}⟩."""
    p = _check_kd(k, d, p, 4)
    return r_of(k - 3, p) - d * r_of(k - 3, p) // p


def _others(k: int) -> tuple[str, str]:
    return lam(k + 1), lam(k + 2)


def summand_S(k: int, d: int, p: int) -> CyclicSummand:
    """S(k,d) = P_{r(k)}(tμ) ⊗ E(λ_[k+1], λ_[k+2]) ⊗ F_p{λ_[k] μ^{-dp^{k-1}}}."""
    p = check_prime(p)
    if k < 1 or d % p == 0:
        raise DomainError(f"S(k,d) needs k >= 1 and p ∤ d, got ({k}, {d})")
    return CyclicSummand(f"S({k},{d})", ((lam(k), 1), ("mu", -d * p ** (k - 1))),
                         r_of(k, p), _others(k))


def summand_S_hat(k: int, d: int, p: int) -> CyclicSummand:
    """Ŝ(k,d) = P_{r(k-3)}(tμ) ⊗ E(λ_[k+1], λ_[k+2]) ⊗ F_p{t^{dp^{k-1}} λ_[k]}."""
    p = check_prime(p)
    if k < 4 or d % p == 0:
        raise DomainError(f"Ŝ(k,d) needs k >= 4 and p ∤ d, got ({k}, {d})")
    return CyclicSummand(f"Ŝ({k},{d})", (("t", d * p ** (k - 1)), (lam(k), 1)),
                         r_of(k - 3, p), _others(k))


def module_x(k: int, d: int, p: int) -> CyclicSummand:
    """⟨x_{k,d}⟩ = P_{(1-d/p)r(k)}(tμ) ⊗ E(λ_[k+1], λ_[k+2]) ⊗ F_p{x_{k,d}}."""
    p = _check_kd(k, d, p)
    return CyclicSummand(f"<x({k},{d})>", named(x_exponents(k, d, p)),
                         torsion_height(k, d, p), _others(k))


def _four_generators(k: int, d: int) -> list[tuple[tuple[str, ...], bool]]:
    """Exterior factors of the four P(tμ)-generators and whether each is divided by tμ."""
    b = bracket(k)
    if b == 1:
        return [((), False), (("l2",), False), (("l3",), True), (("l2", "l3"), True)]
    if b == 2:
        return [((), False), (("l1",), False), (("l3",), True), (("l1", "l3"), True)]
    if d == 1:
        return [((), False), (("l1",), False), (("l2",), True), (("l1", "l2"), True)]
    return [((), False), (("l1",), False), (("l2",), False), (("l1", "l2"), False)]


def _four_generator_module(name: str, k: int, d: int, p: int, height: int) -> list[CyclicSummand]:
    base = x_exponents(k, d, p)
    out = []
    for lams, divided in _four_generators(k, d):
        exps = dict(base)
        for x in lams:
            exps[x] = 1
        prefix = "*".join(lams + ("x",))
        if divided:
            exps["t"] -= 1
            exps["mu"] -= 1
            prefix = "(t*mu)^-1*" + prefix
        out.append(CyclicSummand(f"{name}({k},{d}):{prefix}", named(exps),
                                 height + 1 if divided else height,
                                 tag="divided" if divided else ""))
    return out


def module_B(k: int, d: int, p: int, side: str = "hfp") -> SummandInventory:
    """B(k,d) (side hfp), B′(k,d) (side loc) or B̂(k,d) (side tate)."""
    side = _side(side)
    p = _check_kd(k, d, p, 4 if side == "tate" else 1)
    alg = ambient(side, p)
    if side == "tate":
        pieces = _four_generator_module("B^", k, d, p, hat_torsion_height(k, d, p))
    elif side == "hfp" and k <= 3:
        pieces = [module_x(k, d, p)]
    else:
        pieces = _four_generator_module("B'", k, d, p, torsion_height(k, d, p))
    return SummandInventory(f"B({k},{d};{side})", summands=tuple(pieces), degree_floor=0, ambient=alg)


def inventory_A(p: int, side: str = "hfp") -> SummandInventory:
    """A = P(tμ) ⊗ E(λ₁, λ₂, λ₃) (the same for all sides)."""
    p = check_prime(p)
    return SummandInventory("A", summands=(CyclicSummand("A", (), FREE, LAMBDAS),),
                            degree_floor=0, ambient=ambient(side, p))


def inventory_B(p: int, side: str = "hfp") -> SummandInventory:
    """The sum of B(k,d) over k and 0 < d < p, produced lazily per window.

    Every class of B(k,d) sits in filtration s <= 2 - 2 d r(k)/p, so only
    finitely many k reach a window bounded below in s.
    """
    side = _side(side)
    p = check_prime(p)
    k0 = 4 if side == "tate" else 1

    def gen(alg: MonomialAlgebraSpec, window: Window):
        out = []
        k = k0
        while 2 - 2 * r_of(k, p) // p >= window.s_min:
            for d in range(1, p):
                if 2 - 2 * d * r_of(k, p) // p >= window.s_min:
                    out.extend(module_B(k, d, p, side).summands)
            k += 1
        return out

    return SummandInventory("B", lazy=(gen,), degree_floor=0, ambient=ambient(side, p))


def _min_degree(piece: CyclicSummand, alg: MonomialAlgebraSpec) -> int:
    return alg.bidegree(alg.monomial(dict(piece.generator)))[1]


def inventory_C(p: int, side: str = "hfp") -> SummandInventory:
    """C = ⊕ S(k,d) over k >= 1, p ∤ d < 0, or Ĉ = ⊕ Ŝ(k,d) over k >= 4 (side tate).

    The summands grow in total degree with k and |d|; a window bounded
    above in total degree meets only finitely many of them.
    """
    side = _side(side)
    p = check_prime(p)
    make, k0 = (summand_S_hat, 4) if side == "tate" else (summand_S, 1)

    def gen(alg: MonomialAlgebraSpec, window: Window):
        out = []
        k = k0
        while _min_degree(make(k, -1, p), alg) <= window.n_max:
            d = -1
            while True:
                if d % p:
                    piece = make(k, d, p)
                    if _min_degree(piece, alg) > window.n_max:
                        break
                    out.append(piece)
                d -= 1
            k += 1
        return out

    label = "C^" if side == "tate" else "C"
    return SummandInventory(label, lazy=(gen,), degree_floor=0, ambient=ambient(side, p))


def decomposition(side: str, p: int) -> SummandInventory:
    """A ⊕ B ⊕ C (hfp), Â ⊕ B̂ ⊕ Ĉ (tate) or A ⊕ B′ ⊕ C (loc), in total degrees >= 0."""
    side = _side(side)
    p = check_prime(p)
    inv = inventory_A(p, side) + inventory_B(p, side) + inventory_C(p, side)
    labels = {"hfp": "A+B+C", "tate": "A^+B^+C^", "loc": "A+B'+C"}
    return SummandInventory(labels[side], inv.summands, inv.families, inv.lazy, 0, ambient(side, p))


def extra_classes(p: int, alg: MonomialAlgebraSpec | None = None) -> list[Monomial]:
    """The 4p - 2 classes of A ⊕ B′ ⊕ C missing from A ⊕ B ⊕ C.

    Listed directly:  t^{d-1} λ₁ λ₂^ε λ₃ μ^{-1},  t^{dp-1} λ₁^ε λ₂ λ₃ μ^{-1}
    for 0 < d < p, and  t^{p²-1} λ₁^ε λ₂ λ₃ μ^{-1}.
    """
    p = check_prime(p)
    alg = alg or ambient("loc", p)
    out = []
    for eps in (0, 1):
        for d in range(1, p):
            out.append(alg.monomial(t=d - 1, l1=1, l2=eps, l3=1, mu=-1))
            out.append(alg.monomial(t=d * p - 1, l1=eps, l2=1, l3=1, mu=-1))
        out.append(alg.monomial(t=p * p - 1, l1=eps, l2=1, l3=1, mu=-1))
    return sorted(out, key=lambda m: (alg.bidegree(m)[1], m))
