"""Randomized algebraic laws on every state-space backend.

Each (law, backend) pair runs 200 derandomized hypothesis examples.
"""

import itertools
from fractions import Fraction as F
from math import comb

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from freefield.engine import Engine, commutator_check, nth_product, skew_product
from freefield.fields import symbol
from freefield.realizations import n3_space, pi_gram, pi_lattice, wakimoto_space
from freefield.spaces import Clifford, HeisLattice, NeveuSchwarz, Virasoro, Whittaker
from freefield.states import Space, State

PROPS = settings(max_examples=200, derandomize=True, deadline=None,
                 suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])


def _keys(f, kind):
    if kind == "lattice":
        return [t[-1] for t in f.enumerate(2, charge_range=range(-1, 2))]
    if kind == "clifford":
        return [t[-1] for t in f.enumerate(F(5, 2))]
    return [t[-1] for t in f.enumerate(4)]


class Backend:
    def __init__(self, name, space, keys, module=None, module_keys=None):
        self.name = name
        self.space = space
        self.keys = keys
        self.module = module or space
        self.module_keys = module_keys or keys


def _single(name, factor, kind):
    sp = Space([factor], name)
    return Backend(name, sp, [(k,) for k in _keys(factor, kind)])


def _backends():
    out = {}
    out["heisenberg-lattice"] = _single("heisenberg-lattice", wakimoto_space(F(1)).factors[0], "lattice")
    out["pi-lattice"] = _single("pi-lattice", pi_lattice(F(-4, 3)), "lattice")
    out["clifford"] = _single("clifford", Clifford(2), "clifford")
    out["virasoro"] = _single("virasoro", Virasoro(F(-22, 5)), "vir")
    out["virasoro-symbolic"] = _single("virasoro-symbolic", Virasoro(symbol("c")), "vir")
    out["neveu-schwarz"] = _single("neveu-schwarz", NeveuSchwarz(F(7, 10)), "ns")
    # odd lattice tensored with a fermion, standard cocycle
    sp = n3_space("standard")
    fer, lat = sp.factors
    kf = [t[-1] for t in fer.enumerate(F(3, 2))]
    # momenta 0, +-gamma, +-phi keep the pole orders small
    kl = [t[-1] for t in lat.enumerate(1, charge_range=range(-1, 2)) if sum(map(abs, t[1])) <= 1]
    out["fermion-odd-lattice"] = Backend("fermion-odd-lattice", sp, list(itertools.product(kf, kl)))
    return out


def _module_backends():
    """Algebra keys acting on a genuine module; used for the commutator law."""
    out = {}
    k = F(-2, 3)
    W = Whittaker(pi_gram(k), F(1, 3))
    alg = W.algebra
    msp = Space([W], "whittaker")
    out["whittaker"] = Backend("whittaker", Space([alg]), [(t[-1],) for t in alg.enumerate(1, range(-1, 2))],
                               msp, [(t[-1],) for t in W.enumerate(2, 1)])
    tw = Clifford(1, twisted=True)
    msp = Space([tw], "twisted")
    out["twisted-clifford"] = Backend("twisted-clifford", Space([tw.algebra]),
                                      [(t[-1],) for t in Clifford(1).enumerate(F(5, 2))],
                                      msp, [(t[-1],) for t in tw.enumerate(3)])
    vm = Virasoro(F(1, 2), F(1, 16), False)
    msp = Space([vm], "vir-module")
    out["virasoro-module"] = Backend("virasoro-module", Space([vm.algebra]),
                                     [(t[-1],) for t in vm.algebra.enumerate(4)],
                                     msp, [(t[-1],) for t in vm.enumerate(3)])
    k = F(-4, 3)
    base = pi_gram(k).vector({"mu": -1, "c": F(1, 5)})
    rel = pi_lattice(k, base=base)
    msp = Space([rel], "relaxed-pi")
    out["relaxed-pi"] = Backend("relaxed-pi", Space([rel.algebra]),
                                [(t[-1],) for t in rel.algebra.enumerate(1, range(-1, 2))],
                                msp, [(t[-1],) for t in rel.enumerate(2, range(-1, 2))])
    return out


BACKENDS = _backends()
MODULES = _module_backends()
COEFF = st.integers(-3, 3).filter(bool).map(F)


def states(b: Backend, module=False, max_terms=2):
    keys, sp = (b.module_keys, b.module) if module else (b.keys, b.space)
    return st.dictionaries(st.sampled_from(keys), COEFF, min_size=1, max_size=max_terms).map(
        lambda d: State(sp, d))


def homogeneous(b: Backend):
    return st.sampled_from(b.keys).map(lambda key: State(b.space, {key: F(1)}))


def _mode(eng, a, w, n):
    return n + eng.mode_shift(a, w)


def _weight(v: State):
    ws = {v.space.weight(k) for k in v.terms}
    assert len(ws) == 1
    return ws.pop()


def _charge(v: State, key):
    L = v.space.lattice_index()
    mom = key[L][0] if L is not None else ()
    return mom, v.space.parity(key)


@pytest.mark.parametrize("name", list(BACKENDS))
def test_skew_symmetry(name):
    b = BACKENDS[name]

    @PROPS
    @given(a=states(b), c=states(b), n=st.integers(-2, 3))
    def check(a, c, n):
        assert nth_product(a, n, c) == skew_product(a, n, c)

    check()


@pytest.mark.parametrize("name", list(BACKENDS) + list(MODULES))
def test_commutator_formula(name):
    b = BACKENDS.get(name) or MODULES[name]

    @PROPS
    @given(a=homogeneous(b), c=homogeneous(b), w=states(b, module=True), m=st.integers(-2, 2),
           n=st.integers(-2, 2))
    def check(a, c, w, m, n):
        eng = Engine(b.space, b.module)
        assert not commutator_check(a, _mode(eng, a, w, m), c, _mode(eng, c, w, n), w)

    check()


@pytest.mark.parametrize("name", list(BACKENDS))
def test_grading(name):
    b = BACKENDS[name]

    @PROPS
    @given(a=homogeneous(b), c=homogeneous(b), n=st.integers(-3, 3))
    def check(a, c, n):
        v = nth_product(a, n, c)
        for key in v.terms:
            assert v.space.weight(key) == _weight(a) + _weight(c) - n - 1

    check()


@pytest.mark.parametrize("name", list(BACKENDS))
def test_charge_conservation(name):
    b = BACKENDS[name]

    @PROPS
    @given(a=homogeneous(b), c=homogeneous(b), n=st.integers(-3, 3))
    def check(a, c, n):
        (ma, pa), = {_charge(a, k) for k in a.terms}
        (mc, pc), = {_charge(c, k) for k in c.terms}
        want_mom = tuple(x + y for x, y in zip(ma, mc))
        for key in nth_product(a, n, c).terms:
            mom, par = _charge(c, key)
            assert mom == want_mom
            assert par == (pa + pc) % 2

    check()


@pytest.mark.parametrize("name", list(BACKENDS))
def test_locality_bound(name):
    """sum_j (-1)^j C(N,j) [a_(m+N-j), c_(n+j)] = 0 with N one past the top pole."""
    b = BACKENDS[name]

    @PROPS
    @given(a=homogeneous(b), c=homogeneous(b), w=states(b), m=st.integers(-2, 1), n=st.integers(-2, 1))
    def check(a, c, w, m, n):
        eng = Engine(b.space)
        poles = eng.nonzero_modes(a, c)
        N = int(max(poles)) + 1 if poles else 0
        sign = -1 if (a.parity() or 0) * (c.parity() or 0) else 1
        total = b.space.zero()
        for j in range(N + 1):
            am, cn = m + N - j, n + j
            term = (eng.product(a, am, eng.product(c, cn, w))
                    - eng.product(c, cn, eng.product(a, am, w)) * sign)
            total = total + term * ((-1) ** j * comb(N, j))
        assert not total
        # and the pole really is the last one
        for extra in range(3):
            assert not eng.product(a, N + extra, c)

    check()
