import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from redshift.fpalg import (
    Element,
    EnumerationInfiniteError,
    GeneratorSpec,
    Kind,
    MonomialAlgebraSpec,
    ValidationError,
    Window,
    basis_in_window,
    bidegree_of,
    multiply,
)


def algebra(p, *gens):
    return MonomialAlgebraSpec(p, tuple(GeneratorSpec(*g) for g in gens))


def lambdas(p):
    return algebra(p, ("l1", Kind.EXTERIOR, (0, 2 * p - 1)), ("l2", Kind.EXTERIOR, (0, 2 * p * p - 1)))


def mono(alg, **kw):
    return Element.monomial(alg, alg.monomial(**kw))


# bidegree_of


def test_bidegree_t_lambda1(tate_p7):
    assert bidegree_of(tate_p7, tate_p7.monomial(t=1, l1=1)) == (-2, 11)


def test_bidegree_unit(tate_p7):
    assert bidegree_of(tate_p7, tate_p7.unit) == (0, 0)


def test_bidegree_tmu(tate_p7):
    assert bidegree_of(tate_p7, tate_p7.monomial(t=1, mu=1)) == (-2, 684)


@pytest.mark.parametrize("exps", [{"l1": 2}, {"mu": -1}])
def test_bidegree_rejects_invalid(tate_p7, exps):
    m = [0] * len(tate_p7)
    for name, e in exps.items():
        m[tate_p7.index(name)] = e
    with pytest.raises(ValidationError):
        bidegree_of(tate_p7, tuple(m))


def test_bidegree_rejects_truncated_overflow():
    alg = algebra(3, ("x", Kind.TRUNCATED, (-2, 4), 3))
    with pytest.raises(ValidationError):
        bidegree_of(alg, (3,))


def test_generator_spec_validation():
    with pytest.raises(ValidationError):
        GeneratorSpec("e", Kind.EXTERIOR, (0, 2))
    with pytest.raises(ValidationError):
        GeneratorSpec("x", Kind.TRUNCATED, (0, 2), 0)
    with pytest.raises(ValidationError):
        algebra(3, ("a", Kind.POLYNOMIAL, (0, 2)), ("a", Kind.POLYNOMIAL, (0, 4)))
    with pytest.raises(ValueError):
        algebra(4, ("a", Kind.POLYNOMIAL, (0, 2)))


# multiply


def test_odd_generators_anticommute():
    alg = lambdas(7)
    l1, l2 = mono(alg, l1=1), mono(alg, l2=1)
    l12 = mono(alg, l1=1, l2=1)
    assert multiply(alg, l1, l2) == l12
    assert multiply(alg, l2, l1) == l12.scale(-1)


def test_exterior_square_vanishes():
    alg = lambdas(7)
    l1 = mono(alg, l1=1)
    assert not multiply(alg, l1, l1)


def test_truncated_overflow_vanishes():
    alg = algebra(3, ("tmu", Kind.TRUNCATED, (-2, 52), 3))
    x2 = mono(alg, tmu=2)
    assert not multiply(alg, x2, x2)
    assert multiply(alg, mono(alg, tmu=1), mono(alg, tmu=1)) == x2


def test_multiply_is_bilinear_mod_p():
    alg = lambdas(5)
    a = mono(alg, l1=1).scale(3) + mono(alg, l2=1)
    b = mono(alg, l2=1).scale(4)
    assert multiply(alg, a, b) == mono(alg, l1=1, l2=1).scale(12)


def test_format_and_parse_round_trip(tate_p7):
    m = tate_p7.monomial(t=-3, l1=1, mu=2)
    assert tate_p7.format_monomial(m) == "t^-3*l1*mu^2"
    assert tate_p7.parse_monomial("t^-3*l1*mu^2") == m
    assert tate_p7.format_monomial(tate_p7.unit) == "1"


# basis_in_window


def test_basis_exterior_window():
    alg = algebra(7, ("l1", Kind.EXTERIOR, (0, 13)))
    assert basis_in_window(alg, Window(0, 0, 0, 13)) == [(0,), (1,)]


def test_basis_laurent_t_polynomial_mu():
    alg = algebra(7, ("t", Kind.LAURENT, (-2, -2)), ("mu", Kind.POLYNOMIAL, (0, 686)))
    assert basis_in_window(alg, Window(-20, 0, 0, 0)) == [(0, 0)]


def test_basis_u_and_t():
    alg = algebra(3, ("t", Kind.LAURENT, (-2, -2)), ("u1", Kind.EXTERIOR, (-1, -1)))
    got = basis_in_window(alg, Window(-2, -1, -2, -1))
    assert sorted(alg.format_monomial(m) for m in got) == ["t", "u1"]


def test_basis_infinite_fiber_raises():
    alg = algebra(3, ("a", Kind.LAURENT, (-2, -2)), ("b", Kind.LAURENT, (2, 2)))
    with pytest.raises(EnumerationInfiniteError) as exc:
        basis_in_window(alg, Window(0, 0, 0, 0))
    assert "a" in str(exc.value) and "b" in str(exc.value)


def _brute_force(alg, window, box):
    ranges = []
    for g in alg.generators:
        if g.kind is Kind.LAURENT:
            ranges.append(range(-box, box + 1))
        else:
            top = g.max_exponent if g.max_exponent is not None else box
            ranges.append(range(0, top + 1))
    return {m for m in itertools.product(*ranges) if window.contains(*alg.bidegree(m))}


@pytest.mark.parametrize("p", [3, 5])
def test_basis_matches_brute_force(p):
    alg = algebra(p, ("t", Kind.LAURENT, (-2, -2)), ("u1", Kind.EXTERIOR, (-1, -1)),
                  ("l1", Kind.EXTERIOR, (0, 2 * p - 1)), ("mu", Kind.POLYNOMIAL, (0, 2 * p ** 3)))
    window = Window(-12, 6, -10, 2 * p ** 3 + 4)
    got = basis_in_window(alg, window)
    assert len(got) == len(set(got))
    assert all(window.contains(*alg.bidegree(m)) for m in got)
    assert set(got) == _brute_force(alg, window, 20)


def test_basis_order_is_deterministic():
    alg = lambdas(3)
    w = Window(0, 0, 0, 30)
    got = basis_in_window(alg, w)
    assert got == basis_in_window(alg, w)
    assert [alg.bidegree(m)[1] for m in got] == sorted(alg.bidegree(m)[1] for m in got)


# properties


def _toy(p):
    return algebra(p, ("t", Kind.LAURENT, (-2, -2)), ("u1", Kind.EXTERIOR, (-1, -1)),
                   ("l1", Kind.EXTERIOR, (0, 2 * p - 1)), ("l2", Kind.EXTERIOR, (0, 2 * p * p - 1)),
                   ("x", Kind.TRUNCATED, (0, 2), p), ("mu", Kind.POLYNOMIAL, (0, 2 * p ** 3)))


PRIMES = st.sampled_from([3, 5, 7])


@st.composite
def monomials(draw, alg):
    out = []
    for g in alg.generators:
        if g.kind is Kind.LAURENT:
            out.append(draw(st.integers(-5, 5)))
        elif g.max_exponent is not None:
            out.append(draw(st.integers(0, g.max_exponent)))
        else:
            out.append(draw(st.integers(0, 5)))
    return tuple(out)


@st.composite
def homogeneous_monomial_elements(draw, alg):
    return Element.monomial(alg, draw(monomials(alg)), draw(st.integers(1, alg.prime - 1)))


@st.composite
def elements(draw, alg):
    terms = draw(st.lists(st.tuples(monomials(alg), st.integers(1, alg.prime - 1)), max_size=3))
    return Element(alg, dict(terms))


@settings(max_examples=300, deadline=None)
@given(data=st.data(), p=PRIMES)
def test_graded_commutativity(data, p):
    alg = _toy(p)
    a = data.draw(homogeneous_monomial_elements(alg))
    b = data.draw(homogeneous_monomial_elements(alg))
    sign = -1 if a.bidegree()[1] * b.bidegree()[1] % 2 else 1
    assert multiply(alg, a, b) == multiply(alg, b, a).scale(sign)


@settings(max_examples=300, deadline=None)
@given(data=st.data(), p=PRIMES)
def test_associativity_and_bilinearity(data, p):
    alg = _toy(p)
    a, b, c = (data.draw(elements(alg)) for _ in range(3))
    assert multiply(alg, multiply(alg, a, b), c) == multiply(alg, a, multiply(alg, b, c))
    assert multiply(alg, a + b, c) == multiply(alg, a, c) + multiply(alg, b, c)
    k = data.draw(st.integers(0, p - 1))
    assert multiply(alg, a.scale(k), c) == multiply(alg, a, c).scale(k)


@settings(max_examples=300, deadline=None)
@given(data=st.data(), p=PRIMES)
def test_bidegree_additive(data, p):
    alg = _toy(p)
    a, b = data.draw(monomials(alg)), data.draw(monomials(alg))
    prod = multiply(alg, Element.monomial(alg, a), Element.monomial(alg, b))
    if prod:
        (m,) = prod.terms
        sa, na = bidegree_of(alg, a)
        sb, nb = bidegree_of(alg, b)
        assert bidegree_of(alg, m) == (sa + sb, na + nb)


@settings(max_examples=50, deadline=None)
@given(s0=st.integers(-10, 0), ds=st.integers(0, 8), n0=st.integers(-6, 40), dn=st.integers(0, 20))
def test_basis_in_window_property(s0, ds, n0, dn):
    alg = algebra(3, ("t", Kind.LAURENT, (-2, -2)), ("u1", Kind.EXTERIOR, (-1, -1)),
                  ("l1", Kind.EXTERIOR, (0, 5)), ("x", Kind.TRUNCATED, (0, 2), 4))
    window = Window(s0, s0 + ds, n0, n0 + dn)
    got = basis_in_window(alg, window)
    assert len(got) == len(set(got))
    assert set(got) == _brute_force(alg, window, 12)
