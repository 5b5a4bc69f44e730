import pytest
from hypothesis import given
from hypothesis import strategies as st

from redshift import decomp
from redshift.catalog import bracket, r_of
from redshift.fpalg import DomainError, Window
from redshift.inventory import CyclicSummand, DecompositionViolationError, SummandInventory, materialize


def loc(p):
    return decomp.ambient("loc", p)


def fmt(p, m):
    return loc(p).format_monomial(m)


# x_{k,d}, y_{k,d}


@pytest.mark.parametrize("d", [1, 2])
def test_x_low_k(d):
    p = 3
    assert fmt(p, decomp.x_kd(1, d, p)) == (f"t^{d}*l1" if d > 1 else "t*l1")
    assert fmt(p, decomp.x_kd(3, d, p)) == f"t^{d * 9}*l3"


def test_x_4_2_p3():
    assert fmt(3, decomp.x_kd(4, 2, 3)) == "t^56*l1*mu^2"


def test_y_4_1_p3():
    assert fmt(3, decomp.y_kd(4, 1, 3)) == "t^28*l1*mu"


def test_y_5_3_degree_p7():
    alg = loc(7)
    assert alg.bidegree(decomp.y_kd(5, 3, 7))[1] == 55 == decomp.x_degree(5, 3, 7)


@pytest.mark.parametrize("args", [(1, 0, 3), (1, 3, 3), (0, 1, 3)])
def test_x_domain(args):
    with pytest.raises(DomainError):
        decomp.x_kd(*args)


def test_y_needs_k_at_least_4():
    with pytest.raises(DomainError):
        decomp.y_kd(3, 1, 3)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_degree_formula(p):
    alg = loc(p)
    for k in range(1, 10):
        for d in range(1, p):
            b = bracket(k)
            assert alg.bidegree(decomp.x_kd(k, d, p))[1] == 2 * p ** b - 2 * d * p ** (b - 1) - 1
            if k >= 4:
                assert decomp.y_kd(k, d, p) == decomp.x_kd(k, d, p)


# heights


def test_torsion_height_examples():
    assert decomp.torsion_height(2, 1, 7) == 42
    assert decomp.torsion_height(4, 2, 3) == 28


@given(k=st.integers(1, 9), p=st.sampled_from([3, 5, 7]), data=st.data())
def test_torsion_height_integral_and_consistent(k, p, data):
    d = data.draw(st.integers(1, p - 1))
    h = decomp.torsion_height(k, d, p)
    assert (d * r_of(k, p)) % p == 0 and (d * r_of(k - 3, p)) % p == 0
    assert h * p == (p - d) * r_of(k, p)
    assert h == decomp.module_x(k, d, p).tmu_height
    if k <= 3:
        assert h == p ** k - d * p ** (k - 1)
    if k >= 4:
        assert decomp.hat_torsion_height(k, d, p) * p == (p - d) * r_of(k - 3, p)


# summands and modules


def test_S_and_S_hat():
    s = decomp.summand_S(4, -2, 3)
    assert s.tmu_height == r_of(4, 3) and s.exterior_cofactor == ("l2", "l3")
    assert dict(s.generator) == {"l1": 1, "mu": 54}
    sh = decomp.summand_S_hat(4, -1, 7)
    assert sh.tmu_height == r_of(1, 7) and dict(sh.generator) == {"t": -343, "l1": 1}
    with pytest.raises(DomainError):
        decomp.summand_S(1, 3, 3)


def test_case_four_is_four_plain_generators():
    gens = decomp.module_B(6, 2, 3, "loc").summands
    assert [g.tag for g in gens] == [""] * 4
    assert {g.tmu_height for g in gens} == {decomp.torsion_height(6, 2, 3)}


def test_case_one_has_divided_l3():
    gens = decomp.module_B(4, 1, 5, "loc").summands
    labels = [g.label for g in gens]
    assert any("(t*mu)^-1*l3*x" in x for x in labels)
    h = decomp.torsion_height(4, 1, 5)
    assert sorted(g.tmu_height for g in gens) == [h, h, h + 1, h + 1]


def test_hfp_low_k_is_x_module():
    (g,) = decomp.module_B(2, 1, 3, "hfp").summands
    assert g == decomp.module_x(2, 1, 3)


def test_tate_side_uses_hat_heights():
    gens = decomp.module_B(4, 1, 3, "tate").summands
    h = decomp.hat_torsion_height(4, 1, 3)
    assert sorted(g.tmu_height for g in gens) == [h, h, h + 1, h + 1]
    with pytest.raises(DomainError):
        decomp.module_B(3, 1, 3, "tate")


def _big(p):
    return Window(-10 ** 6, 10, 0, 10 ** 7)


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("k", [4, 5, 6, 7])
def test_codimension_of_x_in_B_prime(p, k):
    alg = loc(p)
    for d in range(1, p):
        b = materialize(decomp.module_B(k, d, p, "loc"), _big(p), alg).total()
        x = materialize(SummandInventory("x", (decomp.module_x(k, d, p),), degree_floor=0), _big(p), alg).total()
        want = 0 if bracket(k) == 3 and d >= 2 else 2
        assert b - x == want


# inventories


def test_A_low_degrees():
    got = materialize(decomp.inventory_A(3, "loc"), Window(-10, 0, 0, 10))
    assert got.dims == {(0, 0): 1, (0, 5): 1}
    (a,) = decomp.inventory_A(7).summands
    assert a.tmu_height is None and len(a.exterior_cofactor) == 3


def test_empty_inventory():
    assert materialize(SummandInventory("0", ambient=loc(3)), Window(-5, 5, 0, 5)).dims == {}


def test_C_p3_low_degrees():
    p = 3
    got = materialize(decomp.inventory_C(p, "hfp"), Window(-400, 2, 0, 75), decomp.ambient("hfp", p))
    assert got.total() > 0
    assert min(n for _, n in got.dims) >= 2 * p ** 3 + 2 * p - 1 == 59


def test_C_hat_floor_p7():
    p = 7
    alg = decomp.ambient("tate", p)
    assert decomp.summand_S_hat(4, -1, p).bidegree(alg)[1] == 699 == 2 * p ** 3 + 2 * p - 1
    got = materialize(decomp.inventory_C(p, "tate"), Window(-800, 800, 0, 720), alg)
    assert min(n for _, n in got.dims) == 699


@pytest.mark.parametrize("side", decomp.SIDES)
def test_decomposition_pieces_disjoint(side):
    p = 3
    alg = decomp.ambient(side, p)
    window = Window(-400, 2 if side != "tate" else 400, 0, 120)
    parts = [materialize(inv, window, alg).monomials()
             for inv in (decomp.inventory_A(p, side), decomp.inventory_B(p, side), decomp.inventory_C(p, side))]
    assert not (parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2])
    whole = materialize(decomp.decomposition(side, p), window, alg)
    assert whole.monomials() == parts[0] | parts[1] | parts[2]


def test_overlap_is_loud():
    alg = loc(3)
    s = CyclicSummand("a", (), 2)
    inv = SummandInventory("twice", (s, CyclicSummand("b", (), 1)), ambient=alg)
    with pytest.raises(DecompositionViolationError):
        materialize(inv, Window(-10, 0, 0, 100))


@pytest.mark.parametrize("p", [3, 5])
def test_B_prime_minus_B_is_extra_classes(p):
    window = Window(-600 if p == 3 else -2000, 2, 0, 2 * p ** 3 + 4 * p ** 2)
    hfp = materialize(decomp.decomposition("hfp", p), window, decomp.ambient("hfp", p)).monomials()
    lc = materialize(decomp.decomposition("loc", p), window, loc(p)).monomials()
    extra = set(decomp.extra_classes(p))
    assert len(extra) == 4 * p - 2
    assert hfp <= lc and lc - hfp == extra


def test_inventory_json():
    import json

    rows = json.loads(decomp.inventory_A(3).to_json(Window(-10, 0, 0, 10)))
    assert rows[0]["height"] == "free" and rows[0]["generator"] == "1"
