"""End-to-end acceptance: one test per criterion, each reporting a pass/fail line.

Run alone with ``pytest tests/test_acceptance.py -s`` or as part of the full
suite; the lines are repeated in the terminal summary.
"""

import time
from fractions import Fraction as F

import pytest

from freefield import modules as M
from freefield import realizations as R
from freefield.fields import symbol
from freefield.report import FAIL, PASS, CheckReport
from freefield.suites import Options, run_suite

from . import conftest

k = symbol("k")


def run(*names, **opts):
    rows, t0 = [], time.perf_counter()
    for name in names:
        rows.extend(run_suite(name, Options(**opts)).rows)
    return rows, time.perf_counter() - t0


def assert_clean(rows, *required):
    failed = [f"{r.suite} :: {r.check}: {r.witness}" for r in rows if r.status == FAIL]
    assert not failed, "\n".join(failed)
    names = {r.check for r in rows if r.status == PASS}
    for want in required:
        assert any(want in n for n in names), f"no passing row for {want!r}"


def summary(rows, seconds):
    return f"{sum(r.status == PASS for r in rows)} rows pass in {seconds:.1f}s"


@pytest.mark.criterion(1)
def test_wakimoto(criterion):
    rows, dt = run("sl2.wakimoto")
    assert_clean(rows, "a_(0)a*", "e_(0)f", "h_(1)h", "f_(0)f")
    assert dt < 10
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(2)
def test_virasoro_pi(criterion):
    rows, dt = run("sl2.virpi", "sl2.sugawara")
    assert_clean(rows, "e_(1)f", "h_(1)h", "charge")
    identities = " ".join(r.identity for r in rows)
    assert "3k/(k+2)" in identities
    assert R.vir_central_charge_level(k) + 6 * k + 2 == 3 * k / (k + 2)
    assert dt < 30
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(3)
def test_critical(criterion):
    rows, dt = run("sl2.critical", "osp.critical")
    assert_clean(rows, "T_(n)e", "T_(n)x", "y_(0)y", "e_(n)T")
    assert any(r.field == "Q,sqrt(2),sqrt(-1)" for r in rows)
    assert dt < 60
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(4)
def test_osp(criterion):
    rows, dt = run("osp.relations", "osp.pomoc1")
    assert_clean(rows, "y_(n)y, n>=2", "y_(1)y", "y_(0)y", "ybar_(2)ybar", "ybar_(1)ybar", "ybar_(0)ybar")
    y0y = next(r for r in rows if r.check == "y_(0)y")
    assert y0y.identity == "y_(0)y = (-2)*f"
    assert rows[0].field == "Q,k,sqrt(2),sqrt(-2k-3)"
    assert dt < 120
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(5)
def test_ns_embedding(criterion):
    rows, dt = run("osp.nsvir")
    grid = {(r.params["p"], r.params["q"]) for r in rows if r.check == "embedding sum"}
    want = {(p, q) for p in range(-6, 7) for q in range(-6, 7)
            if (p + q) % 2 == 0 and p and q and p + q}
    assert grid == want
    assert_clean(rows, "embedding sum", "t_(n)t")
    assert dt < 60
    criterion.append(f"{len(grid)} (p,q) pairs; " + summary(rows, dt))


@pytest.mark.criterion(6)
def test_singular_vector(criterion):
    t0 = time.perf_counter()
    rows = []
    for p in (3, 5, 7):
        rows.extend(R.check_singular_example(p).rows)
    dt = time.perf_counter() - t0
    assert_clean(rows, "Q e^{delta/(k+2)}", "L(1) S_{p-1}", "L(2) S_{p-1}")
    assert {r.params["p"] for r in rows} == {3, 5, 7}
    assert dt < 30
    criterion.append("p in {3,5,7}; " + summary(rows, dt))


@pytest.mark.criterion(7)
def test_characters(criterion):
    rows, dt = run("mod.characters")
    assert_clean(rows, "Pi_(-1) dims", "Pi_(-1) top weight", "M dims", "M x Pi^1/2 dims", "M x Pi^1/2 stride")
    # two-colored partition numbers, counted directly from the basis at every charge
    tab, _ = M.char_count_pi(R.K, M.LAM, 8)
    for ell in range(-4, 5):
        assert [tab.get(m, ell) for m in range(9)] == [1, 2, 5, 10, 20, 36, 65, 110, 185]
    assert dt < 30
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(8)
def test_relaxed(criterion):
    rows, dt = run("mod.relaxed", "mod.osp54")
    cases = {(r.params.get("p"), r.params.get("p'")) for r in rows if r.suite == "mod.relaxed"}
    assert cases == set(M.RELAXED_CASES)
    assert_clean(rows, "lam^+", "e(0)", "f(0)", "h(0)", "L_sug(0)")
    assert dt < 60
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(9)
def test_ordinary(criterion):
    rows, dt = run("mod.ordinary")
    seen = {(r.params["p"], r.params["p'"], r.params["s"]) for r in rows}
    assert seen == {(p, pp, s) for p, pp in M.RELAXED_CASES for s in range(1, pp)}
    assert_clean(rows)
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(10)
def test_whittaker(criterion):
    rows, dt = run("mod.whittaker")
    assert_clean(rows, "e(0)w", "L_sug(0)w", "h(0) Jordan chain", "cyclic span, weight <= 2")
    rep = CheckReport("mod.whittaker", "Q,sqrt(2)", 3)
    t0 = time.perf_counter()
    for lam in (F(1), F(1, 3)):
        M.check_whittaker(lam, F(1, 16), rep, N=3)
    dt3 = time.perf_counter() - t0
    assert_clean(rep.rows, "cyclic span, weight <= 3", "h(0) Jordan chain")
    assert dt3 < 300
    criterion.append(f"weight 2: {summary(rows, dt)}; weight 3 at h=1/16: {dt3:.0f}s")


@pytest.mark.criterion(11)
def test_spectral_flow(criterion):
    rows, dt = run("mod.spectralflow")
    ells = {r.params.get("ell") for r in rows if "ell" in r.params}
    assert {-1, 0, 1, 2} <= ells
    assert_clean(rows)
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(12)
def test_injectivity(criterion):
    rows, dt = run("mod.injectivity", k_samples=5)
    assert_clean(rows, "e^c_0 injective (symbolic)", "e^c_0 injective (sample)")
    assert sum(r.check == "e^c_0 injective (sample)" for r in rows) >= 5
    assert all(r.truncation == 4 for r in rows)
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(13)
def test_logarithmic(criterion):
    rows, dt = run("mod.logarithmic")
    assert_clean(rows, "weight congruence", "S^2 = 0", "S witness at lam^+ - 1", "Ltilde(0) nilpotent",
                 "S nu(-1)")
    cases = {(r.params["p"], r.params["p'"], r.params["r"], r.params["s"]) for r in rows if "s" in r.params}
    assert cases == set(M.LOG_CASES)
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(14)
def test_n3(criterion):
    rows, dt = run("n3.identities")
    assert_clean(rows, "Q^2 X", "omega_sug", "dim U_3/2", "U_3/2 spanning set", "e_(0)f")
    assert dt < 60
    criterion.append(summary(rows, dt))


@pytest.mark.criterion(15)
def test_engine_properties(criterion):
    from . import test_properties as P

    expected = 5 * len(P.BACKENDS) + len(P.MODULES)
    if len(conftest.PROPERTY_OUTCOMES) == expected:
        bad = [n for n, ok in conftest.PROPERTY_OUTCOMES.items() if not ok]
        assert not bad, bad
        how = "from this session's property tests"
    else:
        for law in (P.test_skew_symmetry, P.test_grading, P.test_charge_conservation, P.test_locality_bound):
            for name in P.BACKENDS:
                law(name)
        for name in list(P.BACKENDS) + list(P.MODULES):
            P.test_commutator_formula(name)
        how = "run directly"
    assert P.PROPS.max_examples >= 200 and P.PROPS.derandomize
    criterion.append(f"{expected} law/backend pairs x {P.PROPS.max_examples} cases, {how}")
