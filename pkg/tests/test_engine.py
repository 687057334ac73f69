from fractions import Fraction as F

import pytest

from freefield.engine import (Engine, exp_apply, heisenberg_mode, nth_product, schur_state,
                              skew_product, translate)
from freefield.fields import symbol
from freefield.lattice import GramForm
from freefield.spaces import Clifford, HeisLattice, NeveuSchwarz, Virasoro
from freefield.states import Space

c = symbol("c")


def root_lattice():
    gram = GramForm.diagonal(("a",), (2,))
    return Space([HeisLattice(gram, lattice=[gram.vector("a")], name="A1")], "A1")


def test_heisenberg_pairing():
    sp = root_lattice()
    a = sp.parse("a(-1)")
    assert nth_product(a, 1, a) == 2 * sp.vacuum()
    assert not nth_product(a, 0, a)
    assert nth_product(a, -1, a) == sp.parse("a(-1)^2")


def test_lattice_products_follow_schur_polynomials():
    # e^a_(n) e^{-a} = S_{-n-1-<a,-a>}(a) |0>, here <a,-a> = -2
    sp = root_lattice()
    ea, em = sp.parse("e^{a}"), sp.parse("e^{-a}")
    assert nth_product(ea, 1, em) == sp.vacuum()
    assert nth_product(ea, 0, em) == sp.parse("a(-1)")
    assert nth_product(ea, -1, em) == F(1, 2) * sp.parse("a(-1)^2") + F(1, 2) * sp.parse("a(-2)")
    assert not nth_product(ea, 2, em)
    # <a,a> = 2, so the first nonzero product of e^a with itself is at mode -3
    assert not nth_product(ea, -2, ea)
    assert nth_product(ea, -3, ea) in (sp.parse("e^{2a}"), -1 * sp.parse("e^{2a}"))


def test_schur_state():
    sp = root_lattice()
    s2 = schur_state(sp, {"a": 1}, 2)
    assert s2 == F(1, 2) * sp.parse("a(-1)^2") + F(1, 2) * sp.parse("a(-2)")
    with pytest.raises(ValueError):
        schur_state(sp, {"a": 1}, -1)


def test_translation_is_minus_two_mode():
    sp = root_lattice()
    for text in ("a(-1)", "e^{a}", "a(-2) e^{-a}"):
        v = sp.parse(text)
        assert translate(v) == nth_product(v, -2, sp.vacuum())


def test_clifford_products():
    sp = Space([Clifford(1)])
    psi = sp.parse("Psi(-1/2)")
    assert nth_product(psi, 0, psi) == sp.vacuum()
    assert nth_product(psi, -1, psi) == sp.zero()
    assert nth_product(psi, -2, psi) == sp.parse("Psi(-3/2) Psi(-1/2)")


def test_virasoro_vacuum_products():
    sp = Space([Virasoro(c)])
    w = sp.parse("L(-2)")
    assert nth_product(w, 3, w) == (c / 2) * sp.vacuum()
    assert nth_product(w, 1, w) == 2 * w
    assert nth_product(w, 0, w) == sp.parse("L(-3)")
    assert not nth_product(w, 2, w)


def test_virasoro_vacuum_dimensions():
    f = Virasoro(F(1, 3))
    counts = [0] * 9
    for level, _ in f.enumerate(8):
        counts[level] += 1
    assert counts == [1, 0, 1, 1, 2, 2, 4, 4, 7]


def test_neveu_schwarz_products():
    sp = Space([NeveuSchwarz(c)])
    G, L = sp.parse("G(-3/2)"), sp.parse("L(-2)")
    assert nth_product(G, 2, G) == (2 * c / 3) * sp.vacuum()
    assert nth_product(G, 0, G) == 2 * L
    assert nth_product(L, 1, G) == F(3, 2) * G
    assert nth_product(sp.parse("L(-2)^2"), -2, sp.vacuum()) == translate(sp.parse("L(-2)^2"))
    assert translate(sp.parse("L(-2)^2")) == 2 * sp.parse("L(-3) L(-2)") + sp.parse("L(-5)")


def test_skew_symmetry_with_module_state():
    # a module state on the left is reached through skew-symmetry
    gram = GramForm.diagonal(("u",), (1,))
    alg = HeisLattice(gram, lattice=[gram.vector("u")])
    mod = Space([alg.with_base(gram.vector({"u": F(1, 3)}))])
    top = mod.top()
    u = Space([alg]).parse("u(-1)")
    # w_(-1) u = u_(-1) w - L(-1) u_(0) w, and L(-1) e^{u/3} = (1/3) u(-1) e^{u/3}
    got = skew_product(top, -1, u)
    assert got == F(8, 9) * nth_product(u, -1, top)
    assert heisenberg_mode(top, {"u": 1}, 0) == F(1, 3) * top


def test_exp_apply_on_module():
    gram = GramForm.diagonal(("u",), (1,))
    alg = HeisLattice(gram, lattice=[gram.vector("u")])
    mod = Space([alg.with_base(gram.vector({"u": F(1, 2)}))])
    out = Space([alg.with_base(gram.vector({"u": F(3, 2)}))])
    # Y(e^u, z) e^{u/2} = z^{1/2} e^{3u/2} + ..., the z^{1/2} term is mode -3/2
    assert exp_apply(gram.vector("u"), F(-3, 2), mod.top(), space=out) == out.top()
    assert not exp_apply(gram.vector("u"), F(-1, 2), mod.top(), space=out)


def test_mode_cosets():
    sp = Space([Clifford(1)])
    psi = sp.parse("Psi(-1/2)")
    assert Engine(sp).mode_shift(psi, psi) == 0
    tw = Space([Clifford(1, twisted=True)])
    assert Engine(sp, tw).mode_shift(psi, tw.top()) == F(1, 2)
    # Psi(0) on the twisted top is Psi_(-1/2)
    assert nth_product(psi, F(-1, 2), tw.top())


def test_render_parse_roundtrip():
    sp = Space([Clifford(1), root_lattice().factors[0]])
    for text in ("Psi(-3/2) Psi(-1/2) ⊗ a(-2) a(-1)^2 e^{-a}", "|0> ⊗ e^{2a}", "Psi(-1/2) ⊗ |0>"):
        v = sp.parse(text)
        assert sp.parse(v.render()) == v
