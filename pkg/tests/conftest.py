import pytest

from redshift.catalog import CIRCLE, Variant, cyclic, e2_term


@pytest.fixture
def tate_p7():
    return e2_term(cyclic(1), Variant.TATE, 7)


@pytest.fixture
def circle_hfp_p7():
    return e2_term(CIRCLE, Variant.HFP, 7)
