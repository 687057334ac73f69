from fractions import Fraction as F

import pytest

from freefield import modules as M
from freefield import realizations as R
from freefield.fields import FieldError


def test_minimal_model_central_charges():
    assert R.vir_central_charge(3, 4) == F(1, 2)
    assert R.vir_central_charge(2, 5) == F(-22, 5)
    assert R.vir_central_charge(2, 3) == 0
    # the level form agrees with d_{p,p'} once k + 2 = p'/p
    for p, pp in [(3, 4), (3, 2), (5, 2), (5, 4), (2, 7)]:
        assert R.vir_central_charge_level(R.level_of(p, pp)) == R.vir_central_charge(p, pp)


def test_minimal_model_weights():
    assert R.vir_weight(3, 4, 1, 2) == F(1, 16)
    assert R.vir_weight(3, 4, 2, 1) == F(1, 2)
    assert R.vir_weight(3, 4, 1, 1) == 0
    # Kac symmetry h^{r,s} = h^{p-r,p'-s}
    for r, s in M.kac_range(5, 4):
        assert R.vir_weight(5, 4, r, s) == R.vir_weight(5, 4, 5 - r, 4 - s)


def test_ns_central_charge_two_ways():
    assert R.ns_central_charge(3, 5) == F(7, 10)
    for p, q in [(3, 5), (2, 8), (5, 3), (1, 3)]:
        k = F(p, 2 * q) - F(3, 2)
        assert R.ns_central_charge_level(k) == R.ns_central_charge(p, q)


def test_lambda_pm():
    assert list(M.kac_range(3, 2)) == [(1, 1), (2, 1)]
    for p, pp in M.RELAXED_CASES:
        for r, s in M.kac_range(p, pp):
            plus, minus = M.lambda_pm(p, pp, r, s)
            assert plus + minus == R.level_of(p, pp) + 1
            assert plus - minus == F(s * p - r * pp, p)
    with pytest.raises(FieldError):
        M.check_relaxed_top_action(3, 4, 3, 1)


@pytest.mark.parametrize("build, k", [
    (R.make_sl2_wakimoto, F(-2)),
    (R.make_sl2_virpi, F(-2)),
    (R.make_sl2_virpi, F(0)),
])
def test_excluded_levels_refuse(build, k):
    with pytest.raises(FieldError):
        build(k)


def test_osp_excluded_level():
    with pytest.raises(FieldError):
        R.make_osp(k=F(-3, 2))


def test_both_cocycle_conventions_verify():
    for convention in ("alternate", "standard"):
        rep = R.check_n3(convention=convention)
        assert rep.rows and rep.ok, convention
