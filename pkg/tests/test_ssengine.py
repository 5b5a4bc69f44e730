import json

import pytest

from redshift.catalog import Variant, cyclic, e2_term, run_pages, schedule
from redshift.fpalg import (
    Element,
    GeneratorSpec,
    Kind,
    MonomialAlgebraSpec,
    Window,
    basis_in_window,
    multiply,
)
from redshift.ssengine import (
    DerivationRule,
    FactorizationError,
    IncompleteWindowError,
    PageGenerator,
    ScheduleInconsistencyError,
    differential_matrix,
    e2_page,
    extend_derivation,
    homology_page,
    page_at,
    run_schedule,
    thread_count,
)


def koszul(p=3):
    """E(x) ⊗ P(y) with d²(y) = x."""
    alg = MonomialAlgebraSpec(p, (GeneratorSpec("x", Kind.EXTERIOR, (-2, 1)),
                                  GeneratorSpec("y", Kind.POLYNOMIAL, (0, 2))))
    x = PageGenerator("x", alg.monomial(x=1), Kind.EXTERIOR)
    y = PageGenerator("y", alg.monomial(y=1), Kind.POLYNOMIAL)
    rule = DerivationRule(alg, 2, (x, y), {y: Element.monomial(alg, alg.monomial(x=1))})
    return alg, rule


def first_rule(p):
    return schedule(cyclic(1), Variant.TATE, p)[0]


def el(alg, coeff=1, **exps):
    return Element.monomial(alg, alg.monomial(**exps), coeff)


# extend_derivation


def test_leibniz_on_laurent_power():
    rule = first_rule(7)
    alg = rule.ambient
    assert extend_derivation(None, rule, alg.monomial(t=-6)) == el(alg, t=1, l1=1)


def test_leibniz_sign_past_odd_factor():
    rule = first_rule(7)
    alg = rule.ambient
    got = extend_derivation(None, rule, alg.monomial(t=1, l2=1))
    want = multiply(alg, el(alg, l2=1), el(alg, t=8, l1=1)).scale(-1)
    assert got == want


def test_p_th_power_is_a_cycle():
    rule = first_rule(7)
    assert not extend_derivation(None, rule, rule.ambient.monomial(t=7))


def test_factorization_error():
    rule = schedule(cyclic(1), Variant.TATE, 3)[1]  # page generator t^3
    with pytest.raises(FactorizationError):
        extend_derivation(None, rule, rule.ambient.monomial(t=1))


def test_rule_value_bidegree_checked():
    alg, _ = koszul()
    y = PageGenerator("y", alg.monomial(y=1), Kind.POLYNOMIAL)
    with pytest.raises(ValueError):
        DerivationRule(alg, 3, (y,), {y: el(alg, x=1)})


# differential_matrix and homology_page


def test_koszul_matrix_is_identity_in_degree_of_y():
    alg, rule = koszul()
    page = e2_page(alg, Window(-2, 0, 0, 2))
    dmap = differential_matrix(page, rule)
    assert dmap.block((0, 2)).matrix == [[1]]


def test_koszul_homology_below_p():
    alg, rule = koszul(3)
    window = Window(-2, 0, 0, 5)
    page = homology_page(e2_page(alg, window), differential_matrix(e2_page(alg, window), rule))
    # x*y^2 is hit from y^3, outside the window
    assert page.dims(Window(-2, 0, 0, 4)) == {(0, 0): 1}


def test_koszul_p_th_power_survives():
    alg, rule = koszul(3)
    window = Window(-2, 0, 0, 8)
    e2 = e2_page(alg, window)
    e3 = homology_page(e2, differential_matrix(e2, rule))
    assert e3.dims(window) == {(0, 0): 1, (0, 6): 1, (-2, 5): 1}


def test_zero_rule_gives_zero_matrix_and_same_page():
    alg = e2_term(cyclic(1), Variant.TATE, 3)
    rule = schedule(cyclic(1), Variant.TATE, 3)[0]
    rule = DerivationRule(alg, 2, rule.generators, {})
    page = e2_page(alg, Window(-10, 10, 0, 12))
    dmap = differential_matrix(page, rule)
    assert dmap.is_zero()
    again = homology_page(page, dmap)
    assert {x: c.basis for x, c in again.cells.items()} == {x: c.basis for x, c in page.cells.items()}


def test_incomplete_sources_recorded_without_explicit_window():
    alg = e2_term(cyclic(1), Variant.TATE, 3)
    rule = schedule(cyclic(1), Variant.TATE, 3)[0]
    page = e2_page(alg, Window(-4, 4, 0, 6))
    dmap = differential_matrix(page, rule)
    assert dmap.incomplete
    with pytest.raises(IncompleteWindowError):
        differential_matrix(page, rule, page.window)


# run_schedule


def test_empty_schedule_returns_e2_as_infinity():
    alg = e2_term(cyclic(1), Variant.TATE, 3)
    w = Window(-6, 6, 0, 10)
    (page,) = run_schedule(alg, [], w)
    assert page.infinity and page.safe_region == w


def test_schedule_must_increase():
    alg = e2_term(cyclic(1), Variant.TATE, 3)
    rules = schedule(cyclic(1), Variant.TATE, 3)
    with pytest.raises(ScheduleInconsistencyError):
        run_schedule(alg, [rules[1], rules[0]], Window(-60, 60, 0, 10))


def test_missing_generator_is_reported():
    alg = e2_term(cyclic(1), Variant.TATE, 3)
    rules = schedule(cyclic(1), Variant.TATE, 3)
    pages = run_schedule(alg, [rules[1]], Window(-120, 120, -4, 30))
    assert any("t^3" in name for name, _ in pages[0].checks)


def test_tate_after_first_rule_matches_closed_form():
    # E(u1) ⊗ P(t^{±p}) ⊗ P(tμ) ⊗ E(λ1, λ2, λ3): t and μ exponents agree mod p
    p = 3
    alg = e2_term(cyclic(1), Variant.TATE, p)
    pages = run_pages(cyclic(1), Variant.TATE, p, Window(-300, 300, -20, 80))
    page = page_at(pages, 2 * p + 1)
    t, mu = alg.index("t"), alg.index("mu")
    expected = {}
    for m in basis_in_window(alg, page.safe_region):
        if (m[t] - m[mu]) % p == 0:
            x = alg.bidegree(m)
            expected[x] = expected.get(x, 0) + 1
    assert page.dims() == expected


def test_pages_are_monotone_and_safe_regions_shrink():
    pages = run_pages(cyclic(1), Variant.TATE, 3, Window(-200, 200, -10, 60))
    for a, b in zip(pages, pages[1:]):
        if b.safe_region is None:
            break
        assert a.safe_region.s_min <= b.safe_region.s_min and b.safe_region.s_max <= a.safe_region.s_max
        for x in b.cells:
            if b.is_safe(x):
                assert b.dim(*x) <= a.dim(*x)


def test_rank_conservation():
    alg = e2_term(cyclic(1), Variant.TATE, 3)
    rule = schedule(cyclic(1), Variant.TATE, 3)[0]
    e2 = e2_page(alg, Window(-40, 40, -4, 40))
    dmap = differential_matrix(e2, rule)
    e3 = homology_page(e2, dmap)
    incoming = {b.target: b for b in dmap.blocks.values()}
    p = alg.prime
    for x in e3.cells:
        if not e3.is_safe(x):
            continue
        out = dmap.block(x)
        r_out = out.rank(p) if out else 0
        r_in = incoming[x].rank(p) if x in incoming else 0
        assert e3.dim(*x) == e2.dim(*x) - r_out - r_in


def test_d_squared_vanishes_on_every_scheduled_rule():
    for group in (cyclic(1), cyclic(2)):
        for rule in schedule(group, Variant.TATE, 3):
            alg = rule.ambient
            page = e2_page(alg, Window(-30, 30, -4, 40))
            for cell in page.cells.values():
                for b in cell.basis:
                    try:
                        v = sum((extend_derivation(None, rule, m).scale(c) for m, c in b.terms.items()),
                                Element.zero(alg))
                        w = sum((extend_derivation(None, rule, m).scale(c) for m, c in v.terms.items()),
                                Element.zero(alg))
                    except FactorizationError:
                        continue
                    assert not w


def test_threads_bit_identical():
    w = Window(-300, 300, -20, 60)
    one = run_pages(cyclic(1), Variant.TATE, 3, w, threads=1)
    four = run_pages(cyclic(1), Variant.TATE, 3, w, threads=4)
    dump = lambda pages: json.dumps([pg.to_json(pg.window) for pg in pages], sort_keys=True)
    assert dump(one) == dump(four)


@pytest.mark.parametrize("value", ["0", "-2", "x"])
def test_thread_count_rejects_bad_values(value):
    with pytest.raises(ValueError):
        thread_count(value)


def test_page_dump_format():
    pages = run_pages(cyclic(1), Variant.TATE, 3, Window(-200, 200, -10, 20))
    d = pages[-1].to_json()
    assert d["page_index"] == "inf"
    assert set(d) == {"prime", "page_index", "window", "safe_region", "cells"}
    assert all(set(c) == {"s", "n", "dim", "basis"} for c in d["cells"])
