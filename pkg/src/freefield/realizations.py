"""Generator images of the free-field realizations and their relation suites.

Every realization is a map generator -> state in a tensor-product space.
The checkers compare all products a_(n) b of the images against the
structure constants of affine sl(2) or osp(1,2):

    a_(0) b = [a, b],   a_(1) b = k (a, b) |0>,   a_(n) b = 0  (n >= 2).
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .engine import (Engine, exp_apply, heisenberg_mode, nth_product, schur_state, screening_apply,
                     lattice_skew_product, skew_product, translate)
from .fields import FieldError, render, scalar_eval, sqrt, symbol
from .lattice import GramForm
from .report import CheckReport
from .spaces import Clifford, Cocycle, HeisLattice, NeveuSchwarz, Virasoro, add_to, colored_partitions, echelon
from .states import Space, State

K = symbol("k")
HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# central charges and weights

def vir_central_charge(p, pp):
    """d_{p,p'} = 1 - 6 (p - p')^2 / (p p')."""
    p, pp = Fraction(p), Fraction(pp)
    return 1 - 6 * (p - pp) ** 2 / (p * pp)


def vir_central_charge_level(k):
    """Central charge of the Virasoro factor attached to level k (k + 2 = p'/p)."""
    return 1 - 6 * (k + 1) ** 2 / (k + 2)


def vir_weight(p, pp, r, s):
    """h^{r,s} = ((s p - r p')^2 - (p - p')^2) / (4 p p')."""
    p, pp = Fraction(p), Fraction(pp)
    return ((s * p - r * pp) ** 2 - (p - pp) ** 2) / (4 * p * pp)


def ns_central_charge(p, q):
    p, q = Fraction(p), Fraction(q)
    return Fraction(3, 2) * (1 - 2 * (p - q) ** 2 / (p * q))


def ns_central_charge_level(k):
    """The NS central charge written through k + 3/2 = p/(2q)."""
    return -Fraction(3, 2) * (4 * k + 5) * (2 * k + 1) / (2 * k + 3)


def level_of(p, pp):
    return Fraction(pp, p) - 2


# ---------------------------------------------------------------------------
# Lie (super)algebra data

@dataclass
class AlgebraSpec:
    """Generators with parities, bracket table and invariant form."""

    name: str
    parity: dict
    bracket: dict
    form: dict

    def br(self, a: str, b: str) -> dict:
        return self.bracket.get((a, b), {})

    def _br_vec(self, a: str, vec: dict) -> dict:
        out: dict = {}
        for g, c in vec.items():
            for h, d in self.br(a, g).items():
                add_to(out, h, c * d)
        return out

    def _vec_br(self, vec: dict, b: str) -> dict:
        out: dict = {}
        for g, c in vec.items():
            for h, d in self.br(g, b).items():
                add_to(out, h, c * d)
        return out

    def check(self):
        """Super skew-symmetry, super Jacobi identity and invariance of the form."""
        gens = list(self.parity)
        for a, b in itertools.product(gens, repeat=2):
            sign = -(-1) ** (self.parity[a] * self.parity[b])
            lhs = self.br(a, b)
            rhs = {g: sign * c for g, c in self.br(b, a).items()}
            if lhs != rhs:
                raise FieldError(f"{self.name}: bracket [{a},{b}] is not super skew-symmetric")
        for a, b, c in itertools.product(gens, repeat=3):
            lhs = self._br_vec(a, self.br(b, c))
            r1 = self._vec_br(self.br(a, b), c)
            r2 = self._br_vec(b, self.br(a, c))
            sign = (-1) ** (self.parity[a] * self.parity[b])
            total = dict(r1)
            for g, v in r2.items():
                add_to(total, g, sign * v)
            if {g: v for g, v in lhs.items() if v != 0} != {g: v for g, v in total.items() if v != 0}:
                raise FieldError(f"{self.name}: Jacobi identity fails on ({a},{b},{c})")
        for a, b, c in itertools.product(gens, repeat=3):
            lhs = sum((v * self.form.get((g, c), 0) for g, v in self.br(a, b).items()), Fraction(0))
            rhs = sum((v * self.form.get((a, g), 0) for g, v in self.br(b, c).items()), Fraction(0))
            if lhs != rhs:
                raise FieldError(f"{self.name}: form is not invariant on ({a},{b},{c})")
        return True


def sl2_spec() -> AlgebraSpec:
    one = Fraction(1)
    br = {
        ("e", "f"): {"h": one}, ("f", "e"): {"h": -one},
        ("h", "e"): {"e": 2 * one}, ("e", "h"): {"e": -2 * one},
        ("h", "f"): {"f": -2 * one}, ("f", "h"): {"f": 2 * one},
    }
    form = {("e", "f"): one, ("f", "e"): one, ("h", "h"): 2 * one}
    spec = AlgebraSpec("sl2", {"e": 0, "h": 0, "f": 0}, br, form)
    spec.check()
    return spec


def osp12_spec() -> AlgebraSpec:
    one = Fraction(1)
    base = sl2_spec()
    br = dict(base.bracket)
    br.update({
        ("h", "x"): {"x": one}, ("x", "h"): {"x": -one},
        ("h", "y"): {"y": -one}, ("y", "h"): {"y": one},
        ("e", "y"): {"x": -one}, ("y", "e"): {"x": one},
        ("f", "x"): {"y": -one}, ("x", "f"): {"y": one},
        ("x", "x"): {"e": 2 * one}, ("x", "y"): {"h": one}, ("y", "x"): {"h": one},
        ("y", "y"): {"f": -2 * one},
    })
    form = dict(base.form)
    form.update({("x", "y"): 2 * one, ("y", "x"): -2 * one})
    spec = AlgebraSpec("osp12", {"e": 0, "h": 0, "f": 0, "x": 1, "y": 1}, br, form)
    spec.check()
    return spec


# ---------------------------------------------------------------------------
# realization records

@dataclass
class RealizationDef:
    name: str
    space: Space
    images: dict
    k: object
    algebra: AlgebraSpec
    field: str
    extras: dict = dc_field(default_factory=dict)
    excluded: tuple = ()

    def image(self, g: str) -> State:
        return self.images[g]


def _check_level(k, excluded, what):
    for bad in excluded:
        if k == bad:
            raise FieldError(f"{what}: level k = {render(k)} is excluded")


def pi_gram(k) -> GramForm:
    """<mu,mu> = -<nu,nu> = k/2 with c = (2/k)(mu - nu), d = mu + nu."""
    return GramForm.diagonal(("mu", "nu"), (k / 2, -k / 2),
                             names={"c": {"mu": 2 / k, "nu": -2 / k}, "d": {"mu": 1, "nu": 1}})


def pi_lattice(k, half: bool = False, base=None) -> HeisLattice:
    gram = pi_gram(k)
    gen = {"c": HALF} if half else "c"
    return HeisLattice(gram, lattice=[gram.vector(gen)], base=base, name="Pi")


# sl(2) ---------------------------------------------------------------------

def wakimoto_space(k) -> Space:
    gram = GramForm.diagonal(("alpha", "beta", "delta"), (1, -1, 2 * (k + 2)))
    gram.define("gamma", {"alpha": 1, "beta": 1, "delta": -1 / (k + 2)})
    lat = HeisLattice(gram, lattice=[gram.vector({"alpha": 1, "beta": 1})], name="VH")
    return Space([lat], "wakimoto")


def make_sl2_wakimoto(k=K) -> RealizationDef:
    _check_level(k, (-2,), "Wakimoto realization")
    sp = wakimoto_space(k)
    P = sp.parse
    em = "e^{-alpha - beta}"
    e = P("e^{alpha + beta}")
    h = -2 * P("beta(-1)") + P("delta(-1)")
    f = ((k + 1) * (P(f"alpha(-1)^2 {em}") - P(f"alpha(-2) {em}"))
         + (k + 2) * P(f"alpha(-1) beta(-1) {em}") - P(f"alpha(-1) delta(-1) {em}"))
    gram = sp.factors[0].gram
    screenings = {}
    for name, mom in (("Q", {"alpha": 1, "beta": 1, "delta": -1 / (k + 2)}),
                      ("Qtilde", {"alpha": -(k + 2), "beta": -(k + 2), "delta": 1})):
        vec = gram.vector(mom)
        msp = Space([sp.factors[0].with_base(vec)], f"wakimoto.{name}")
        screenings[name] = msp.top()
    extras = {
        "weyl_a": e,
        "weyl_astar": -1 * P(f"alpha(-1) {em}"),
        "screenings": screenings,
    }
    return RealizationDef("sl2.wakimoto", sp, {"e": e, "h": h, "f": f}, k, sl2_spec(),
                          "Q,k", extras, (-2,))


def virpi_space(k, vir=None) -> Space:
    vir = Virasoro(vir_central_charge_level(k), Fraction(0), True) if vir is None else vir
    return Space([vir, pi_lattice(k)], "vir-pi")


def sl2_images(sp: Space, k, omega_slot: State) -> dict:
    """e, h, f over X tensor Pi(0); omega_slot is the full weight-2 part of f from the first factor."""
    P = sp.parse
    e = P("|0> ⊗ e^{c}")
    h = 2 * P("|0> ⊗ mu(-1)")
    f = (_attach(omega_slot, sp, "e^{-c}")
         - P("|0> ⊗ nu(-1)^2 e^{-c}") - (k + 1) * P("|0> ⊗ nu(-2) e^{-c}"))
    return {"e": e, "h": h, "f": f}


def _attach(first: State, sp: Space, lattice_text: str) -> State:
    """Replace the lattice slot of every term of ``first`` by the given monomial."""
    L = sp.lattice_index()
    lat_key = sp.parse(" ⊗ ".join(["|0>"] * L + [lattice_text] + ["|0>"] * (len(sp.factors) - L - 1)))
    lk = next(iter(lat_key.terms))[L]
    out: dict = {}
    for key, c in first.terms.items():
        add_to(out, key[:L] + (lk,) + key[L + 1:], c)
    return State(sp, out)


def make_sl2_virpi(k=K) -> RealizationDef:
    _check_level(k, (0, -2), "Virasoro-Pi realization")
    sp = virpi_space(k)
    omega = sp.parse("L(-2) ⊗ |0>")
    images = sl2_images(sp, k, omega * (k + 2))
    return RealizationDef("sl2.virpi", sp, images, k, sl2_spec(), "Q,k", {"omega": omega}, (0, -2))


def make_sl2_critical() -> RealizationDef:
    k = Fraction(-2)
    sp = Space([NeveuSchwarz(critical=True, fermionic=False), pi_lattice(k)], "T-pi")
    T = sp.parse("T(-2) ⊗ |0>")
    # (k+2) omega degenerates; the central T takes its place in f
    images = sl2_images(sp, k, T)
    return RealizationDef("sl2.critical", sp, images, k, sl2_spec(), "Q", {"T": T})


# osp(1,2) ------------------------------------------------------------------

def osp_space(k, ns_factor=None) -> Space:
    factors = [] if ns_factor is None else [ns_factor]
    factors += [Clifford(1), pi_lattice(k, half=True)]
    return Space(factors, "ns-f-pi" if ns_factor is not None else "f-pi")


def _slots(sp: Space, ns: str | None, fer: str, lat: str) -> State:
    parts = ([ns or "|0>"] if len(sp.factors) == 3 else []) + [fer or "|0>", lat or "|0>"]
    return sp.parse(" ⊗ ".join(parts))


def _osp_images(sp: Space, k, Omega: State, g_coeff) -> dict:
    """x, y, e, h, f; g_coeff multiplies G(-3/2) inside y (None when absent)."""
    r2 = sqrt(Fraction(2))
    S = lambda ns, fer, lat: _slots(sp, ns, fer, lat)
    e = S(None, None, "e^{c}")
    h = 2 * S(None, None, "mu(-1)")
    f = (_attach(Omega, sp, "e^{-c}") - S(None, None, "nu(-1)^2 e^{-c}")
         - (k + 1) * S(None, None, "nu(-2) e^{-c}"))
    x = r2 * S(None, "Psi(-1/2)", "e^{(1/2)c}")
    y = S(None, "Psi(-1/2)", "nu(-1) e^{(-1/2)c}") + (2 * k + 1) / 2 * S(None, "Psi(-3/2)", "e^{(-1/2)c}")
    if g_coeff is not None:
        y = y + g_coeff * S("G(-3/2)", None, "e^{(-1/2)c}")
    y = r2 * y
    return {"e": e, "h": h, "f": f, "x": x, "y": y}


def osp_vectors(sp: Space, k):
    """omega_{p,q}, omega_F and G(-3/2)Psi(-1/2) in NS tensor F tensor Pi^{1/2}."""
    S = lambda ns, fer, lat: _slots(sp, ns, fer, lat)
    has_ns = len(sp.factors) == 3
    omega_F = HALF * S(None, "Psi(-3/2) Psi(-1/2)", None)
    out = {"omega_F": omega_F}
    if has_ns:
        even = sp.factors[0].even
        out["omega_ns"] = S(f"{even}(-2)", None, None)
        out["G_Psi"] = S("G(-3/2)", "Psi(-1/2)", None)
    return out


def osp_root(k):
    """sqrt(-2k-3) on the branch i sqrt(2k+3); at k = -2 this is -1."""
    root = sqrt(-2 * K - 3)
    return root if k is K else scalar_eval(root, {"k": k})


def make_osp(p=None, q=None, k=None) -> RealizationDef:
    """osp(1,2) at k + 3/2 = p/(2q); with no arguments k stays symbolic.

    At k = -2 the vector (k+2) omega_{(p+q)/2,q} below specializes to t_{p,q}.
    """
    if k is None:
        k = K if p is None else Fraction(p, 2 * q) - Fraction(3, 2)
    _check_level(k, (0, Fraction(-3, 2)), "osp realization")
    cns = ns_central_charge_level(k) if p is None else ns_central_charge(p, q)
    sp = osp_space(k, NeveuSchwarz(cns))
    v = osp_vectors(sp, k)
    root = osp_root(k)
    # (k+2) omega_{(p+q)/2, q} with p/q = 2k + 3
    Omega = (2 * k + 3) / 2 * v["omega_ns"] + root / 2 * v["G_Psi"] - (2 * k + 1) / 2 * v["omega_F"]
    images = _osp_images(sp, k, Omega, -root / 2)
    extras = dict(v, Omega=Omega, c_ns=cns)
    return RealizationDef("osp.relations", sp, images, k, osp12_spec(), "Q,k,sqrt(2),sqrt(-2k-3)", extras,
                          (0, Fraction(-3, 2)))


def make_osp_critical(phase=None) -> RealizationDef:
    """Critical level k = -3/2 over NS_cri tensor F tensor Pi^{1/2}.

    G_cri is the limit of sqrt(2k+3) G, so sqrt(-2k-3) G becomes i G_cri in
    both f and y.  ``phase`` overrides the factor in front of G_cri Psi inside
    omega_{1,2} (used to exhibit that the phase 1 is inconsistent).
    """
    k = Fraction(-3, 2)
    sp = osp_space(k, NeveuSchwarz(critical=True))
    v = osp_vectors(sp, k)
    i = sqrt(Fraction(-1))
    omega_12 = v["omega_ns"] + v["G_Psi"] * (i if phase is None else phase) + 2 * v["omega_F"]
    Omega = (k + 2) * omega_12
    images = _osp_images(sp, k, Omega, -i / 2)
    T = v["omega_ns"]
    return RealizationDef("osp.critical", sp, images, k, osp12_spec(), "Q,sqrt(2),sqrt(-1)",
                          dict(v, Omega=Omega, T=T, omega_12=omega_12))


def make_osp_54() -> RealizationDef:
    k = Fraction(-5, 4)
    sp = osp_space(k)
    v = osp_vectors(sp, k)
    Omega = (k + 2) * v["omega_F"]
    images = _osp_images(sp, k, Omega, None)
    return RealizationDef("osp.k54", sp, images, k, osp12_spec(), "Q,sqrt(2)", dict(v, Omega=Omega))


# N = 3 at k = -2/3 ---------------------------------------------------------

def n3_space(convention: str = "alternate") -> Space:
    gram = GramForm.diagonal(("gamma", "phi"), (3, -3))
    lat = HeisLattice(gram, lattice=[gram.vector("gamma"), gram.vector("phi")],
                      cocycle=Cocycle(("gamma", "phi"), convention), name="D")
    return Space([Clifford(1), lat], "f-gamma-phi")


def make_n3(convention: str = "alternate") -> RealizationDef:
    """sl(2) at k = -2/3 inside F tensor V_D; eps(phi, gamma) = (-1)^<phi,gamma> by default.

    With the other cocycle convention the image of f changes sign.
    """
    k = Fraction(-2, 3)
    sp = n3_space(convention)
    P = sp.parse
    Qs = P("Psi(-1/2) ⊗ e^{gamma}")
    Q = lambda v: nth_product(Qs, 0, v)
    X = P("|0> ⊗ e^{-gamma}")
    H = Q(X)
    Y = Q(H)
    e = P("|0> ⊗ e^{phi - gamma}")
    h = Fraction(-2, 3) * P("|0> ⊗ phi(-1)")
    f = Fraction(-1, 9) * Q(Q(P("|0> ⊗ e^{-phi - gamma}")))
    if convention == "standard":
        f = -1 * f
    tau = (1 / sqrt(Fraction(3))) * (P("Psi(-1/2) ⊗ gamma(-1)") + 2 * P("Psi(-3/2) ⊗ |0>"))
    omega_n1 = (Fraction(1, 6) * (P("|0> ⊗ gamma(-1)^2") + 2 * P("|0> ⊗ gamma(-2)"))
                + HALF * P("Psi(-3/2) Psi(-1/2) ⊗ |0>"))
    Xhat = P("Psi(-1/2) ⊗ e^{-gamma}")
    extras = {"Q_state": Qs, "X": X, "H": H, "Y": Y, "tau": tau, "omega_n1": omega_n1,
              "Xhat": Xhat, "Yhat": Q(Q(Xhat)), "Q": Q}
    return RealizationDef("n3.identities", sp, {"e": e, "h": h, "f": f}, k, sl2_spec(), "Q,sqrt(3)", extras)


# ---------------------------------------------------------------------------
# checks

def _expected_product(r: RealizationDef, a: str, b: str, n: int) -> State:
    sp = r.space
    if n == 0:
        out = sp.zero()
        for g, c in r.algebra.br(a, b).items():
            out = out + r.images[g] * c
        return out
    if n == 1:
        return sp.vacuum() * (r.k * r.algebra.form.get((a, b), 0))
    return sp.zero()


def check_affine_relations(r: RealizationDef, report: CheckReport | None = None) -> CheckReport:
    rep = report or CheckReport(r.name, r.field)
    eng = Engine(r.space)
    gens = list(r.algebra.parity)
    for a, b in itertools.product(gens, repeat=2):
        t0 = time.perf_counter()
        got = eng.nonzero_modes(r.images[a], r.images[b])
        for n in (0, 1):
            rep.states(f"{a}_({n}){b}", _identity_text(r, a, b, n), got.get(n, r.space.zero()),
                       _expected_product(r, a, b, n), started=t0)
            t0 = time.perf_counter()
        extra = {n: v for n, v in got.items() if n not in (0, 1)}
        witness = "; ".join(f"n={n}: {v.render()}" for n, v in sorted(extra.items())) or None
        rep.truth(f"{a}_(n){b}, n>=2", f"{a}_(n){b} = 0 for n >= 2", not extra, witness, started=t0)
    return rep


def _identity_text(r, a, b, n):
    if n == 0:
        rhs = " + ".join(f"{render(c)}*{g}" for g, c in r.algebra.br(a, b).items()) or "0"
        return f"{a}_(0){b} = {rhs}"
    val = r.algebra.form.get((a, b), 0)
    return f"{a}_(1){b} = {render(val)}*k|0>" if val else f"{a}_(1){b} = 0"


def check_weyl(r: RealizationDef, rep: CheckReport) -> CheckReport:
    """a = e^{alpha+beta}, a* = -alpha(-1)e^{-alpha-beta}: [a(n), a*(m)] = delta_{n+m,0}."""
    eng = Engine(r.space)
    a, ast = r.extras["weyl_a"], r.extras["weyl_astar"]
    vac = r.space.vacuum()
    t0 = time.perf_counter()
    got = eng.nonzero_modes(a, ast)
    rep.states("a_(0)a*", "a_(0)a* = |0>", got.get(0, r.space.zero()), vac, started=t0)
    rep.truth("a_(n)a*, n>=1", "a_(n)a* = 0 for n >= 1", all(n == 0 for n in got), started=t0)
    t0 = time.perf_counter()
    rep.truth("a_(n)a", "a_(n)a = 0 for n >= 0", not eng.nonzero_modes(a, a), started=t0)
    t0 = time.perf_counter()
    rep.truth("a*_(n)a*", "a*_(n)a* = 0 for n >= 0", not eng.nonzero_modes(ast, ast), started=t0)
    return rep


def sugawara_vector(r: RealizationDef) -> State:
    e, h, f = (r.images[g] for g in "ehf")
    k = r.k
    tot = nth_product(e, -1, f) + nth_product(f, -1, e) + HALF * nth_product(h, -1, h)
    return tot * (1 / (2 * (k + 2)))


def pi_virasoro(sp: Space, k) -> State:
    """1/2 c(-1)d(-1) - 1/2 d(-2) + (k/4) c(-2) on the Pi lattice factor."""
    vac = sp.vacuum()
    cd = heisenberg_mode(heisenberg_mode(vac, "d", -1), "c", -1)
    return cd * HALF - heisenberg_mode(vac, "d", -2) * HALF + heisenberg_mode(vac, "c", -2) * (k / 4)


def check_sugawara(r: RealizationDef, rep: CheckReport | None = None) -> CheckReport:
    rep = rep or CheckReport("sl2.sugawara", r.field)
    k = r.k
    t0 = time.perf_counter()
    w = sugawara_vector(r)
    rhs = r.extras["omega"] + pi_virasoro(r.space, k)
    rep.states("omega_sug", "omega_sug = omega + 1/2 c(-1)d(-1) - 1/2 d(-2) + (k/4) c(-2)", w, rhs,
               started=t0)
    t0 = time.perf_counter()
    csug = 3 * k / (k + 2)
    rep.states("central charge", "(omega_sug)_(3) omega_sug = (3k/(2(k+2)))|0>", nth_product(w, 3, w),
               r.space.vacuum() * (csug / 2), started=t0)
    rep.scalars("c_sug = d_k + 6k + 2", "3k/(k+2) = d_k + 6k + 2", csug,
                vir_central_charge_level(k) + 6 * k + 2)
    eng = Engine(r.space)
    for g, img in r.images.items():
        t0 = time.perf_counter()
        got = eng.nonzero_modes(w, img)
        rep.states(f"L_sug(0){g}", f"L_sug(0) {g} = {g}", got.get(1, r.space.zero()), img, started=t0)
        rep.truth(f"L_sug(n){g}, n>=1", f"L_sug(n) {g} = 0 for n >= 1", set(got) <= {0, 1},
                  witness=", ".join(str(n) for n in got), started=t0)
        t0 = time.perf_counter()
        rep.states(f"L_sug(-1){g}", f"L_sug(-1) {g} = D {g}", got.get(0, r.space.zero()), translate(img),
                   started=t0)
    return rep


def check_charges(r: RealizationDef, rep: CheckReport) -> CheckReport:
    charges = {"e": 2, "f": -2, "h": 0, "x": 1, "y": -1}
    h = r.images["h"]
    for g, img in r.images.items():
        t0 = time.perf_counter()
        rep.states(f"charge {g}", f"h_(0) {g} = {charges[g]} {g}", nth_product(h, 0, img), img * charges[g],
                   started=t0)
    return rep


def check_screenings(r: RealizationDef, rep: CheckReport | None = None) -> CheckReport:
    rep = rep or CheckReport("screenings.all", r.field)
    for name, s in r.extras.get("screenings", {}).items():
        for g, img in r.images.items():
            t0 = time.perf_counter()
            rep.zero(f"{name} {g}", f"{name} {g} = 0", screening_apply(s, img), started=t0)
    return rep


# osp auxiliary identities -----------------------------------------------

def bar_y(sp: Space, k) -> State:
    S = lambda fer, lat: _slots(sp, None, fer, lat)
    return S("Psi(-1/2)", "nu(-1) e^{(-1/2)c}") + (2 * k + 1) / 2 * S("Psi(-3/2)", "e^{(-1/2)c}")


def check_pomoc(rep: CheckReport | None = None, k=K) -> CheckReport:
    rep = rep or CheckReport("osp.pomoc1", "Q,k")
    sp = osp_space(k)
    yb = bar_y(sp, k)
    S = lambda fer, lat: _slots(sp, None, fer, lat)
    A = (2 * k + 1) * (4 * k + 5)
    t0 = time.perf_counter()
    rep.states("ybar_(2)ybar", "ybar_(2)ybar = -(1/4)(2k+1)(4k+5) e^{-c}", nth_product(yb, 2, yb),
               S(None, "e^{-c}") * (-A / 4), started=t0)
    t0 = time.perf_counter()
    em = _slots(sp, None, None, "e^{-c}")
    mu_nu = heisenberg_mode(em, {"mu": 1, "nu": -1}, -1)
    rep.states("ybar_(1)ybar", "ybar_(1)ybar = ((2k+1)(4k+5)/(4k)) (mu(-1) - nu(-1)) e^{-c}",
               nth_product(yb, 1, yb), mu_nu * (A / (4 * k)), started=t0)
    t0 = time.perf_counter()
    L = sp.lattice_index()
    gam = {"nu": 1 / k, "mu": -1 / k}
    schur = _on_momentum(schur_state(sp, gam, 2), sp, "e^{-c}")
    rhs = ((2 * k + 1) / 4 * S("Psi(-3/2) Psi(-1/2)", "e^{-c}") + S(None, "nu(-1)^2 e^{-c}")
           + (k + 1) * S(None, "nu(-2) e^{-c}") - schur * (A / 4))
    rep.states("ybar_(0)ybar", "ybar_(0)ybar = ((2k+1)/4 Psi(-3/2)Psi(-1/2) + nu(-1)^2 + (k+1)nu(-2) "
               "- ((2k+1)(4k+5)/4) S_2((nu-mu)/k)) e^{-c}", nth_product(yb, 0, yb), rhs, started=t0)
    return rep


def _on_momentum(v: State, sp: Space, lattice_text: str) -> State:
    """Move every term of a momentum-zero state onto the given exponential."""
    L = sp.lattice_index()
    mom = sp.factors[L].gram.parse_vector(lattice_text[3:-1])
    out: dict = {}
    for key, c in v.terms.items():
        add_to(out, key[:L] + ((mom, key[L][1]),) + key[L + 1:], c)
    return State(sp, out)


def ns_grid(bound: int = 6):
    for p in range(-bound, bound + 1):
        for q in range(-bound, bound + 1):
            if p == 0 or q == 0 or p + q == 0 or (p + q) % 2:
                continue
            yield p, q


def ns_pair_vectors(p, q):
    """omega_{(p+q)/2,q} and omega_{p,(p+q)/2} in V^ns(c_{p,q}) tensor F."""
    sp = Space([NeveuSchwarz(ns_central_charge(p, q)), Clifford(1)], "ns-f")
    P = sp.parse
    w_ns = P("L(-2) ⊗ |0>")
    wF = HALF * P("|0> ⊗ Psi(-3/2) Psi(-1/2)")
    GP = P("G(-3/2) ⊗ Psi(-1/2)")
    s = Fraction(p + q)
    root = sqrt(Fraction(-p * q))  # i sqrt(pq)
    w2 = Fraction(p) / s * w_ns + root / s * GP + Fraction(2 * q - p) / s * wF
    w1 = Fraction(q) / s * w_ns - root / s * GP + Fraction(2 * p - q) / s * wF
    return sp, w_ns, wF, w1, w2


def check_virasoro_vector(rep: CheckReport, label: str, w: State, c, params=None):
    eng = Engine(w.space)
    t0 = time.perf_counter()
    got = eng.nonzero_modes(w, w)
    rep.states(f"{label}_(0){label}", f"{label}_(0){label} = D {label}", got.get(0, w.space.zero()),
               translate(w), params, t0)
    rep.states(f"{label}_(1){label}", f"{label}_(1){label} = 2 {label}", got.get(1, w.space.zero()),
               w * 2, params, t0)
    rep.states(f"{label}_(3){label}", f"{label}_(3){label} = (c/2)|0>", got.get(3, w.space.zero()),
               w.space.vacuum() * (c / 2), params, t0)
    rep.truth(f"{label}_(n){label} support", f"{label}_(n){label} = 0 for n = 2 and n >= 4",
              set(got) <= {0, 1, 3}, ", ".join(str(n) for n in sorted(got)), params, t0)


def check_ns_vir(rep: CheckReport | None = None, bound: int = 6) -> CheckReport:
    rep = rep or CheckReport("osp.nsvir", "Q,sqrt(-1)")
    for p, q in ns_grid(bound):
        params = {"p": p, "q": q}
        sp, w_ns, wF, w1, w2 = ns_pair_vectors(p, q)
        t0 = time.perf_counter()
        rep.states("embedding sum", "omega_{p,q} + omega_F = omega_1 + omega_2", w_ns + wF, w1 + w2, params, t0)
        m = Fraction(p + q, 2)
        check_virasoro_vector(rep, "omega_1", w1, vir_central_charge(p, m), params)
        check_virasoro_vector(rep, "omega_2", w2, vir_central_charge(m, q), params)
        eng = Engine(sp)
        t0 = time.perf_counter()
        mixed12 = eng.nonzero_modes(w1, w2)
        mixed21 = eng.nonzero_modes(w2, w1)
        rep.truth("omega_1_(n)omega_2", "omega_1_(n) omega_2 = omega_2_(n) omega_1 = 0 for n >= 0",
                  not mixed12 and not mixed21,
                  "; ".join(f"n={n}: {v.render()}" for n, v in mixed12.items()) or None, params, t0)
    # t_{p,-p} at c = 27/2
    sp = Space([NeveuSchwarz(Fraction(27, 2)), Clifford(1)], "ns-f")
    P = sp.parse
    t = HALF * (-1 * P("L(-2) ⊗ |0>") - P("G(-3/2) ⊗ Psi(-1/2)") + 3 * HALF * P("|0> ⊗ Psi(-3/2) Psi(-1/2)"))
    t0 = time.perf_counter()
    got = Engine(sp).nonzero_modes(t, t)
    rep.truth("t_(n)t", "t_(n) t = 0 for n >= 0 at c = 27/2", not got,
              "; ".join(f"n={n}: {v.render()}" for n, v in got.items()) or None, {"c": "27/2"}, t0)
    for p in (1, 2, 3):
        rep.scalars("c_{p,-p}", "c_{p,-p} = 27/2", ns_central_charge(p, -p), Fraction(27, 2), {"p": p})
    return rep


def check_osp_coset(r: RealizationDef, rep: CheckReport) -> CheckReport:
    """x_(-1)y - omega_sug - 1/2 h(-2) = const * omega_{p,(p+q)/2}, and the coset commutes with sl(2)."""
    k = r.k
    v = r.extras
    if k == -2:
        rep.skipped("coset vector", "x_(-1)y - omega_sug - 1/2 h(-2) = const * omega_{p,(p+q)/2}",
                    "omega_{p,(p+q)/2} has a pole at k = -2", {"k": k})
        return rep
    Gcoef = -osp_root(k)
    w1 = (v["omega_ns"] * (1 / (2 * k + 4)) + v["G_Psi"] * (Gcoef / (2 * k + 4))
          + v["omega_F"] * ((4 * k + 5) / (2 * k + 4)))
    t0 = time.perf_counter()
    lhs = nth_product(r.images["x"], -1, r.images["y"]) - sugawara_vector(r) - translate(r.images["h"]) * HALF
    # read the constant off the L(-2) coefficient
    key = next(iter(v["omega_ns"].terms))
    const = lhs.coefficient(key) / w1.coefficient(key)
    rep.states("coset vector", "x_(-1)y - omega_sug - 1/2 h(-2) = const * omega_{p,(p+q)/2}", lhs, w1 * const,
               started=t0)
    rep.scalars("coset constant", "const = -p/q = -(2k+3)", const, -(2 * k + 3))
    eng = Engine(r.space)
    for g in "ehf":
        t0 = time.perf_counter()
        got = eng.nonzero_modes(r.images[g], w1)
        rep.truth(f"{g}_(n) omega_1", f"{g}_(n) omega_{{p,(p+q)/2}} = 0 for n >= 0", not got,
                  "; ".join(f"n={n}: {x.render()}" for n, x in got.items()) or None, started=t0)
    return rep


def check_t_central(r: RealizationDef, rep: CheckReport) -> CheckReport:
    T = r.extras["T"]
    eng = Engine(r.space)
    for g, img in r.images.items():
        t0 = time.perf_counter()
        got = eng.nonzero_modes(T, img)
        rep.truth(f"T_(n){g}", f"T_(n) {g} = 0 for n >= 0", not got,
                  "; ".join(f"n={n}: {x.render()}" for n, x in got.items()) or None, started=t0)
        t0 = time.perf_counter()
        got = eng.nonzero_modes(img, T)
        rep.truth(f"{g}_(n)T", f"{g}_(n) T = 0 for n >= 0", not got,
                  "; ".join(f"n={n}: {x.render()}" for n, x in got.items()) or None, started=t0)
    return rep


# singular vector at p' = 2 -----------------------------------------------

def check_singular_example(p: int, rep: CheckReport | None = None) -> CheckReport:
    if p < 3 or p % 2 == 0:
        raise FieldError("the singular-vector example needs an odd p >= 3")
    rep = rep or CheckReport(f"sl2.singular.p{p}", "Q")
    params = {"p": p}
    k = Fraction(2, p) - 2
    sp = wakimoto_space(k)
    lat = sp.factors[0]
    gram = lat.gram
    gam = gram.vector("gamma")
    src_mom = gram.vector({"delta": 1 / (k + 2)})
    src = Space([lat.with_base(src_mom)], "wakimoto.src").top()
    tgt_space = Space([lat.with_base(gram.vector({"alpha": 1, "beta": 1}))], "wakimoto.tgt")
    t0 = time.perf_counter()
    got = exp_apply(gam, 0, src, space=tgt_space)
    schur = schur_state(sp, gam, p - 1)
    mom = gram.vector({"alpha": 1, "beta": 1})
    want = State(tgt_space, {((mom, key[0][1]),): c for key, c in schur.terms.items()})
    rep.states("Q e^{delta/(k+2)}", "Q e^{delta/(k+2)} = S_{p-1}(phi/2) e^{alpha+beta}", got, want, params, t0)
    # phi = 2 gamma; omega = (1/(8p)) phi(-1)^2 + ((p-2)/(4p)) phi(-2)
    vac = sp.vacuum()
    phi = tuple(2 * x for x in gam)
    omega = (heisenberg_mode(heisenberg_mode(vac, phi, -1), phi, -1) * Fraction(1, 8 * p)
             + heisenberg_mode(vac, phi, -2) * Fraction(p - 2, 4 * p))
    t0 = time.perf_counter()
    rep.states("omega central charge", "omega_(3)omega = (d_{p,2}/2)|0>", nth_product(omega, 3, omega),
               vac * (vir_central_charge(p, 2) / 2), params, t0)
    for n in (1, 2):
        t0 = time.perf_counter()
        rep.zero(f"L({n}) S_{{p-1}}", f"L({n}) S_{{p-1}}(phi/2)|0> = 0", nth_product(omega, n + 1, schur),
                 params, t0)
    t0 = time.perf_counter()
    rep.truth("S_{p-1} nonzero", "S_{p-1}(phi/2)|0> != 0", bool(schur), None, params, t0)
    return rep


# N = 3 -------------------------------------------------------------------

def check_n3(rep: CheckReport | None = None, convention: str = "alternate") -> CheckReport:
    rep = rep or CheckReport("n3.identities", "Q,sqrt(3)")
    r = make_n3(convention)
    sp = r.space
    P = sp.parse
    x = r.extras
    t0 = time.perf_counter()
    Yc = (-6 * P("Psi(-3/2) Psi(-1/2) ⊗ e^{gamma}") + P("|0> ⊗ gamma(-1)^2 e^{gamma}")
          - P("|0> ⊗ gamma(-2) e^{gamma}"))
    rep.states("Q^2 X", "Q^2 X = (-6 Psi(-3/2)Psi(-1/2) + gamma(-1)^2 - gamma(-2)) e^gamma", x["Y"], Yc,
               {"cocycle": convention}, t0)
    check_affine_relations(r, rep)
    t0 = time.perf_counter()
    rep.states("omega_N=1", "1/2 tau_(0) tau = omega_N=1", nth_product(x["tau"], 0, x["tau"]) * HALF,
               x["omega_n1"], started=t0)
    t0 = time.perf_counter()
    w = sugawara_vector(r)
    rhs = x["omega_n1"] - Fraction(1, 6) * P("|0> ⊗ phi(-1)^2")
    rep.states("omega_sug", "omega_sug = omega_N=1 - 1/6 phi(-1)^2", w, rhs, started=t0)
    check_u32(r, rep, w)
    return rep


def check_u32(r: RealizationDef, rep: CheckReport, omega_sug: State) -> CheckReport:
    """Weight-3/2 part of the kernel of S inside the charge-zero sector.

    Only the sectors e^{a(gamma - phi)}, |a| <= 1, can reach weight 3/2 in
    the kernel; their weight-3/2 spaces are enumerated in full.
    """
    sp = r.space
    P = sp.parse
    t0 = time.perf_counter()
    lat = sp.factors[1]
    gram = lat.gram
    basis = []
    weight = Fraction(3, 2)
    for a in (-1, 0, 1):
        mom = gram.vector({"gamma": a, "phi": -a})
        # L_sug(0) = -a + level on this sector
        level = weight + a
        for fl, fkey in sp.factors[0].enumerate(level):
            rest = level - fl
            if rest.denominator != 1 or rest < 0:
                continue
            for bos in colored_partitions(int(rest), 2):
                basis.append((fkey, (mom, bos)))
    # confirm the grading claim on every basis vector
    eng = Engine(sp)
    bad = []
    for key in basis:
        v = State(sp, {key: Fraction(1)})
        if eng.product(omega_sug, 1, v) != v * weight:
            bad.append(sp.render_key(key))
    rep.truth("U_3/2 grading", "L_sug(0) = 3/2 on the enumerated sector basis", not bad, "; ".join(bad[:3]) or None,
              started=t0)
    # screening S = Res Psi(z) e^{-gamma/3}(z) acting from the kernel side
    t0 = time.perf_counter()
    s_space = Space([sp.factors[0], lat.with_base(gram.vector({"gamma": Fraction(-1, 3)}))], "n3.S")
    s = s_space.parse("Psi(-1/2) ⊗ e^{(-1/3)gamma}")
    images = [screening_apply(s, State(sp, {key: Fraction(1)})) for key in basis]
    img_rank = _rank([v.terms for v in images])
    ker = len(basis) - img_rank
    named = [P("Psi(-1/2) ⊗ e^{phi - gamma}"), r.extras["tau"],
             _shift_phi(r.extras["Yhat"], gram.vector({"phi": -1}))]
    coords = [[v.coefficient(key) for key in basis] for v in named]
    in_kernel = all(not screening_apply(s, v) for v in named)
    rk = _rank([{i: c for i, c in enumerate(row) if c != 0} for row in coords])
    rep.truth("dim U_3/2", "dim U_3/2 = 3", ker == 3, f"kernel dimension {ker}", started=t0)
    rep.truth("U_3/2 spanning set", "Xhat e^{phi}, tau, Yhat e^{-phi} lie in ker S and are independent",
              in_kernel and rk == 3 and ker == 3, f"in kernel: {in_kernel}, rank {rk}", started=t0)
    return rep


def _shift_phi(v: State, vec) -> State:
    sp = v.space
    out: dict = {}
    for key, c in v.terms.items():
        mom = tuple(a + b for a, b in zip(key[1][0], vec))
        add_to(out, (key[0], (mom, key[1][1])), c)
    return State(sp, out)


def _rank(vecs) -> int:
    return len(echelon([v for v in vecs if v], order=repr))


# screening of the Virasoro-Pi realization ----------------------------------

def h21_module(k, name="v") -> Virasoro:
    """Virasoro module of weight h^{2,1} = (3k+4)/4 with L(-2)v = L(-1)^2 v/(k+2) imposed."""
    h = (3 * k + 4) / 4
    rel = {(2,): Fraction(1), (1, 1): -1 / (k + 2)}
    return Virasoro(vir_central_charge_level(k), h, False, [rel], name)


def virpi_screening(k=K):
    """The module state v_{2,1} tensor e^nu and the module space holding it."""
    gram = pi_gram(k)
    lat = HeisLattice(gram, lattice=[gram.vector("c")], base=gram.vector("nu"), name="Pi")
    msp = Space([h21_module(k), lat], "vir-pi.screening")
    return msp, msp.top()


def check_virpi_screening(rep: CheckReport, k=K) -> CheckReport:
    """Products s_(n) g of the screening field with the generators."""
    r = make_sl2_virpi(k)
    msp, s = virpi_screening(k)
    nu_c = msp.factors[1].gram.vector({"nu": 1, "c": -1})
    shifted = Space([msp.factors[0], msp.factors[1].with_base(nu_c)], "vir-pi.screening")
    top = shifted.top()
    _, lkey = next(iter(top.terms))
    lm1 = State(shifted, {((1,), lkey): Fraction(1)})
    want = {
        0: shifted.zero(),
        1: lm1 * k + heisenberg_mode(top, "nu", -1) * (k + 2),
        2: top * (2 * (k + 1)),
        3: shifted.zero(),
    }
    for g in "ehf":
        for n in (0, 1, 2, 3):
            t0 = time.perf_counter()
            got = lattice_skew_product(s, n, r.images[g])
            if g == "f" and n in want:
                got_s = State(shifted, got.terms)
                rep.states(f"s_({n}) f", f"s_({n}) f = {_SCREEN_TEXT[n]}", got_s, want[n], started=t0)
            else:
                rep.zero(f"s_({n}) {g}", f"s_({n}) {g} = 0", got, started=t0)
    return rep


_SCREEN_TEXT = {
    0: "0",
    1: "k L(-1)v tensor e^{nu-c} + (k+2) v tensor nu(-1)e^{nu-c}",
    2: "2(k+1) v tensor e^{nu-c}",
    3: "0",
}
