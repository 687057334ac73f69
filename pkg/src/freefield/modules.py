"""Module families over the free-field realizations and their checks.

Relaxed, ordinary and Whittaker modules, spectral flow, characters,
injectivity of e^c_0 and the logarithmic extension by the screening S.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

from .engine import DeformOp, Engine, delta_deform, exp_apply, heisenberg_mode, nth_product, skew_product
from .fields import FieldError, render, scalar_eval, sqrt, symbol
from .report import CheckReport
from .realizations import (HALF, K, RealizationDef, h21_module, level_of, make_osp_54, make_sl2_virpi,
                           osp12_spec, osp_space, pi_gram, pi_lattice, sl2_images, sl2_spec,
                           sugawara_vector, vir_central_charge, vir_central_charge_level, vir_weight,
                           virpi_screening)
from .series import BiGradedTable, eta_inverse_square, weber_f2
from .spaces import Clifford, HeisLattice, Virasoro, Whittaker, add_to, colored_partitions, echelon, reduce_by
from .states import Space, State

LAM = symbol("lam")

RELAXED_CASES = ((3, 4), (3, 2), (5, 2), (5, 4))


# ---------------------------------------------------------------------------
# small helpers

def kac_range(p: int, pp: int):
    for r in range(1, p):
        for s in range(1, pp):
            yield r, s


def _check_kac(p, pp, r, s):
    if not (0 < r < p and 0 < s < pp):
        raise FieldError(f"(r, s) = ({r}, {s}) is outside the Kac table of ({p}, {pp})")


def lambda_pm(p, pp, r, s):
    """lambda^{+-}_{r,s} = (p'-p)/(2p) +- (sp - rp')/(2p)."""
    a = Fraction(pp - p, 2 * p)
    b = Fraction(s * p - r * pp, 2 * p)
    return a + b, a - b


def shift_momentum(v: State, vec, space: Space | None = None) -> State:
    """Add vec to the lattice momentum of every term."""
    sp = space or v.space
    L = v.space.lattice_index()
    out: dict = {}
    for key, c in v.terms.items():
        mom, rest = key[L]
        new = tuple(a + b for a, b in zip(mom, vec))
        add_to(out, key[:L] + ((new, rest),) + key[L + 1:], c)
    return State(sp, out)


def _tops(sp: Space, vec, steps):
    top = sp.top()
    return {t: shift_momentum(top, tuple(t * x for x in vec)) for t in steps}


def _modes_text(got: dict) -> str | None:
    return "; ".join(f"n={render(n)}: {v.render()}" for n, v in sorted(got.items())) or None


def osp_sugawara_vector(r: RealizationDef) -> State:
    """(1/(2k+3)) (e_(-1)f + f_(-1)e + 1/2 h_(-1)h + 1/2 (y_(-1)x - x_(-1)y))."""
    g = r.images
    k = r.k
    tot = (nth_product(g["e"], -1, g["f"]) + nth_product(g["f"], -1, g["e"])
           + HALF * nth_product(g["h"], -1, g["h"])
           + HALF * (nth_product(g["y"], -1, g["x"]) - nth_product(g["x"], -1, g["y"])))
    return tot * (1 / (2 * k + 3))


# ---------------------------------------------------------------------------
# relaxed modules

def relaxed_space(k, h, lam, ell=-1, vir: Virasoro | None = None) -> Space:
    """L(h) tensor Pi_(ell)(lam) with distinguished vector v_h tensor e^{ell mu + lam c}."""
    gram = pi_gram(k)
    base = gram.vector({"mu": ell, "c": lam})
    vir = Virasoro(vir_central_charge_level(k), h, False) if vir is None else vir
    return Space([vir, pi_lattice(k, base=base)], "relaxed")


def check_relaxed_top_action(p: int, pp: int, r: int, s: int, rep: CheckReport | None = None) -> CheckReport:
    _check_kac(p, pp, r, s)
    rep = rep or CheckReport("mod.relaxed", "Q(lam)")
    k = level_of(p, pp)
    h = vir_weight(p, pp, r, s)
    params = {"p": p, "p'": pp, "r": r, "s": s}
    alg = make_sl2_virpi(k)
    msp = relaxed_space(k, h, LAM)
    eng = Engine(alg.space, msp)
    cvec = msp.factors[1].gram.vector("c")
    T = _tops(msp, cvec, (-1, 0, 1))
    E = T[0]
    g = alg.images
    fcoef = (k + 2) * h - LAM ** 2 + LAM * (k + 1)

    t0 = time.perf_counter()
    rep.states("e(0)E", "e(0)E^lam = E^{lam+1}", eng.product(g["e"], 0, E), T[1], params, t0)
    t0 = time.perf_counter()
    rep.states("h(0)E", "h(0)E^lam = (-k + 2 lam)E^lam", eng.product(g["h"], 0, E), E * (2 * LAM - k), params, t0)
    t0 = time.perf_counter()
    rep.states("f(0)E", "f(0)E^lam = ((k+2)h - lam^2 + lam(k+1))E^{lam-1}", eng.product(g["f"], 0, E),
               T[-1] * fcoef, params, t0)
    for name, img in g.items():
        t0 = time.perf_counter()
        got = eng.nonzero_modes(img, E, low=1)
        rep.truth(f"{name}(n)E, n>=1", f"{name}(n)E^lam = 0 for n >= 1", not got, _modes_text(got), params, t0)
    t0 = time.perf_counter()
    w = sugawara_vector(alg)
    got = eng.nonzero_modes(w, E, low=1)
    rep.states("L_sug(0)E", "L_sug(0)E^lam = (k/4 + h)E^lam", got.pop(1, msp.zero()), E * (k / 4 + h), params, t0)
    rep.truth("L_sug(n)E, n>=1", "L_sug(n)E^lam = 0 for n >= 1", not got, _modes_text(got), params, t0)

    lp, lm = lambda_pm(p, pp, r, s)
    factored = Fraction((s * p - r * pp) ** 2, 4 * p * p) - (LAM - Fraction(pp - p, 2 * p)) ** 2
    rep.scalars("f(0) factored", "(k+2)h - lam^2 + lam(k+1) = (sp-rp')^2/(4p^2) - (lam - (p'-p)/(2p))^2",
                fcoef, factored, params)
    for label, root in (("+", lp), ("-", lm)):
        rep.scalars(f"f(0) zero at lam^{label}", f"f(0)E vanishes at lam^{label}_{{r,s}}",
                    scalar_eval(fcoef, {"lam": root}), Fraction(0), dict(params, lam=root))
    rep.scalars("lam^+ closed form", "lam^+ = (s-1)/2 - ((r-1)/2)(k+2)", lp,
                Fraction(s - 1, 2) - Fraction(r - 1, 2) * (k + 2), params)
    # the engine itself sees the kernel at a numeric lam^+
    t0 = time.perf_counter()
    nsp = relaxed_space(k, h, lp)
    n_eng = Engine(alg.space, nsp)
    rep.zero("f(0)E at lam^+", "f(0)E^{lam^+} = 0", n_eng.product(g["f"], 0, nsp.top()), dict(params, lam=lp), t0)
    return rep


def check_ordinary_singular(p: int, pp: int, s: int, rep: CheckReport | None = None) -> CheckReport:
    """w_s = v_{1,s} tensor e^{((s-1)/2)c} is a highest weight vector for sl(2)."""
    if not 1 <= s <= pp - 1:
        raise FieldError(f"s = {s} outside 1..{pp - 1}")
    rep = rep or CheckReport("mod.ordinary", "Q")
    k = level_of(p, pp)
    h = vir_weight(p, pp, 1, s)
    params = {"p": p, "p'": pp, "s": s}
    alg = make_sl2_virpi(k)
    gram = pi_gram(k)
    base = gram.vector({"c": Fraction(s - 1, 2)})
    lat = HeisLattice(gram, lattice=[gram.vector("c")], base=base, name="Pi")
    msp = Space([Virasoro(vir_central_charge_level(k), h, None), lat], "ordinary")
    w = msp.top()
    eng = Engine(alg.space, msp)
    g = alg.images
    t0 = time.perf_counter()
    got = eng.nonzero_modes(g["e"], w)
    rep.truth("e(n)w", "e(n)w_s = 0 for n >= 0", not got, _modes_text(got), params, t0)
    t0 = time.perf_counter()
    got = eng.nonzero_modes(g["h"], w)
    rep.states("h(0)w", "h(0)w_s = (s-1)w_s", got.pop(0, msp.zero()), w * (s - 1), params, t0)
    rep.truth("h(n)w, n>=1", "h(n)w_s = 0 for n >= 1", not got, _modes_text(got), params, t0)
    t0 = time.perf_counter()
    got = eng.nonzero_modes(g["f"], w, low=1)
    rep.truth("f(n)w, n>=1", "f(n)w_s = 0 for n >= 1", not got, _modes_text(got), params, t0)
    rep.scalars("(w_s)_1 f coefficient", "(k+2)h^{1,s} - (s-1)^2/4 + (k+1)(s-1)/2 = 0",
                (k + 2) * h - Fraction((s - 1) ** 2, 4) + (k + 1) * Fraction(s - 1, 2), Fraction(0), params)
    return rep


# ---------------------------------------------------------------------------
# osp(1,2) at k = -5/4

def osp54_module(lam, sign: int = 1) -> Space:
    k = Fraction(-5, 4)
    gram = pi_gram(k)
    base = gram.vector({"mu": -1, "c": lam})
    return Space([Clifford(1, twisted=True, zero_mode_sign=sign), pi_lattice(k, half=True, base=base)], "osp54")


def check_osp54_relaxed(lam=LAM, rep: CheckReport | None = None) -> CheckReport:
    rep = rep or CheckReport("mod.osp54", "Q(lam),sqrt(2)")
    r = make_osp_54()
    k = r.k
    g = r.images
    w = osp_sugawara_vector(r)
    for sign in (1, -1):
        params = {"sign": "+" if sign > 0 else "-", "lam": lam}
        msp = osp54_module(lam, sign)
        eng = Engine(r.space, msp)
        cvec = msp.factors[1].gram.vector("c")
        T = _tops(msp, cvec, (-1, -HALF, 0, HALF, 1))
        E = T[0]
        expected = {
            "e": (T[1], "e(0)E^lam = E^{lam+1}"),
            "h": (E * (2 * lam - k), "h(0)E^lam = (-k + 2 lam)E^lam"),
            "f": (T[-1] * ((Fraction(3, 8) + lam) * (Fraction(1, 8) - lam)),
                  "f(0)E^lam = (3/8 + lam)(1/8 - lam)E^{lam-1}"),
            "x": (T[HALF] * sign, "x(0)E^lam = +-E^{lam+1/2}"),
            # the sign follows from x(0)y(0) + y(0)x(0) = h(0) on E
            "y": (T[-HALF] * (sign * (Fraction(3, 8) + lam)), "y(0)E^lam = +-(3/8 + lam)E^{lam-1/2}"),
        }
        for name, (want, text) in expected.items():
            t0 = time.perf_counter()
            rep.states(f"{name}(0)E", text, eng.product(g[name], 0, E), want, params, t0)
            t0 = time.perf_counter()
            got = eng.nonzero_modes(g[name], E, low=1)
            rep.truth(f"{name}(n)E, n>=1", f"{name}(n)E^lam = 0 for n >= 1", not got, _modes_text(got), params, t0)
        t0 = time.perf_counter()
        xy = (eng.product(g["x"], 0, eng.product(g["y"], 0, E)) + eng.product(g["y"], 0, eng.product(g["x"], 0, E)))
        rep.states("x(0)y(0) + y(0)x(0)", "x(0)y(0)E + y(0)x(0)E = h(0)E", xy, eng.product(g["h"], 0, E),
                   params, t0)
        t0 = time.perf_counter()
        got = eng.nonzero_modes(w, E, low=1)
        rep.states("L_sug(0)E", "L_sug(0)E^lam = -1/4 E^lam", got.pop(1, msp.zero()), E * Fraction(-1, 4),
                   params, t0)
        rep.truth("L_sug(n)E, n>=1", "L_sug(n)E^lam = 0 for n >= 1", not got, _modes_text(got), params, t0)
    return rep


def check_osp_sugawara(rep: CheckReport) -> CheckReport:
    """The osp(1,2) Sugawara vector at k = -5/4: weights of the generators and c = k/(k + 3/2)."""
    r = make_osp_54()
    w = osp_sugawara_vector(r)
    eng = Engine(r.space)
    for name, img in r.images.items():
        t0 = time.perf_counter()
        got = eng.nonzero_modes(w, img)
        ok = got.get(1) == img and set(got) <= {0, 1}
        rep.truth(f"L_sug {name}", f"L_sug(0){name} = {name} and L_sug(n){name} = 0 for n >= 1", ok,
                  _modes_text({n: v for n, v in got.items() if n != 0}), started=t0)
    t0 = time.perf_counter()
    rep.states("osp central charge", "(omega_sug)_(3)omega_sug = (c/2)|0>, c = k/(k+3/2)",
               nth_product(w, 3, w), r.space.vacuum() * (r.k / (r.k + Fraction(3, 2)) / 2), started=t0)
    return rep


# ---------------------------------------------------------------------------
# characters

def _pi_virasoro_on(space: Space, k) -> State:
    """1/2 c(-1)d(-1) - 1/2 d(-2) + (k/4) c(-2) in the algebra of ``space``."""
    vac = space.vacuum()
    cd = heisenberg_mode(heisenberg_mode(vac, "d", -1), "c", -1)
    return cd * HALF - heisenberg_mode(vac, "d", -2) * HALF + heisenberg_mode(vac, "c", -2) * (k / 4)


def _eigenvalue(eng: Engine, a: State, n, v: State):
    """Scalar x with a_(n) v = x v, or None."""
    img = eng.product(a, n, v)
    key, c = next(iter(v.terms.items()))
    x = img.coefficient(key) / c
    return x if img == v * x else None


def char_count_pi(k, lam, N: int, L: int = 4, half: bool = False):
    """Pi_(-1)(lam) (or its Pi^{1/2} version): dims by (level, charge step) and the module space."""
    gram = pi_gram(k)
    sp = Space([pi_lattice(k, half, gram.vector({"mu": -1, "c": lam}))], "Pi_(-1)")
    lat = sp.factors[0]
    t = BiGradedTable(charge_stride=Fraction(1) if half else Fraction(2))
    for level, ns, key in lat.enumerate(N, range(-L, L + 1)):
        t.add(level, ns[0])
    return t, sp


def char_count_twisted_fermion(N: int, sign: int = 1):
    sp = Space([Clifford(1, twisted=True, zero_mode_sign=sign)], "M")
    t = BiGradedTable(charge_stride=Fraction(0))
    for level, key in sp.factors[0].enumerate(N):
        t.add(int(level), 0)
    return t, sp


def tensor_tables(a: BiGradedTable, b: BiGradedTable, N: int) -> BiGradedTable:
    """Product of a charge-neutral table a with b, truncated at weight N."""
    out = BiGradedTable(weight_offset=a.weight_offset + b.weight_offset, charge_offset=b.charge_offset,
                        charge_stride=b.charge_stride)
    for (m1, _), d1 in a.dims.items():
        for (m2, l2), d2 in b.dims.items():
            if m1 + m2 <= N:
                out.add(m1 + m2, l2, d1 * d2)
    return out


def compare_character(table: BiGradedTable, series, N: int, charges, rep: CheckReport, label: str,
                      params=None) -> CheckReport:
    """dim(m, l) equals the m-th coefficient of ``series`` for every charge l (delta-function structure)."""
    t0 = time.perf_counter()
    bad = [(m, l, table.get(m, l), series[m]) for m in range(N + 1) for l in charges
           if table.get(m, l) != series[m]]
    rep.truth(label, f"{label}: dim(m, l) = coefficient of q^m, independent of l, m <= {N}", not bad,
              "; ".join(f"(m={m}, l={l}) {a} != {b}" for m, l, a, b in bad[:4]) or None, params, t0)
    return rep


def check_characters(rep: CheckReport | None = None, N: int = 8, N_mixed: int = 6, L: int = 4) -> CheckReport:
    rep = rep or CheckReport("mod.characters", "Q(k,lam)")
    # Pi_(-1)(lam): two-colored partitions, top weight k/4, h(0) = -k + 2 lam
    t, sp = char_count_pi(K, LAM, N, L)
    charges = range(-L, L + 1)
    compare_character(t, eta_inverse_square(N), N, charges, rep, "Pi_(-1) dims", {"N": N})
    eng = Engine(sp.algebra, sp)
    omega = _pi_virasoro_on(sp.algebra, K)
    h = 2 * heisenberg_mode(sp.algebra.vacuum(), "mu", -1)
    tops = _tops(sp, sp.factors[0].gram.vector("c"), charges)
    t0 = time.perf_counter()
    offs = {l: _eigenvalue(eng, omega, 1, v) for l, v in tops.items()}
    rep.truth("Pi_(-1) top weight", "Lbar(0) = k/4 on every E^{lam+l}", all(x == K / 4 for x in offs.values()),
              ", ".join(f"l={l}: {render(x)}" for l, x in offs.items()), started=t0)
    t.weight_offset = offs[0]
    t0 = time.perf_counter()
    hs = {l: _eigenvalue(eng, h, 0, v) for l, v in tops.items()}
    rep.truth("Pi_(-1) charges", "h(0) = -k + 2 lam + 2l on E^{lam+l}",
              all(x == -K + 2 * LAM + 2 * l for l, x in hs.items()), started=t0)
    t.charge_offset = hs[0]
    t0 = time.perf_counter()
    cpi = nth_product(omega, 3, omega).coefficient(sp.algebra.vacuum_key()) * 2
    rep.scalars("Pi q-offset", "k/4 - c_Pi/24 = -1/12 (the eta^-2 offset)", t.weight_offset - cpi / 24,
                eta_inverse_square(0).offset, {"c_Pi": cpi}, t0)
    # grading of every basis vector up to level 4
    t0 = time.perf_counter()
    bad = []
    for level, ns, key in sp.factors[0].enumerate(min(N, 4), range(-1, 2)):
        v = State(sp, {(key,): Fraction(1)})
        if eng.product(omega, 1, v) != v * (K / 4 + level):
            bad.append(sp.render_key((key,)))
    rep.truth("Pi_(-1) grading", "Lbar(0) = k/4 + level on the enumerated basis", not bad,
              "; ".join(bad[:3]) or None, started=t0)

    # M^+- : distinct partitions, top weight 1/16
    for sign in (1, -1):
        tm, msp = char_count_twisted_fermion(N, sign)
        params = {"sign": "+" if sign > 0 else "-"}
        compare_character(tm, weber_f2(N), N, [0], rep, "M dims", params)
        fsp = msp.algebra
        wF = HALF * fsp.parse("Psi(-3/2) Psi(-1/2)")
        t0 = time.perf_counter()
        h0 = _eigenvalue(Engine(fsp, msp), wF, 1, msp.top())
        rep.scalars("M top weight", "L(0) = 1/16 on the twisted top", h0, Fraction(1, 16), params, t0)
        rep.scalars("M q-offset", "1/16 - (1/2)/24 = 1/24 (the Weber offset)", h0 - Fraction(1, 48),
                    weber_f2(0).offset, params)

    # M^+- tensor Pi^{1/2}_(-1)(lam) at k = -5/4: stride 1 and the Weber times eta^-2 product
    k = Fraction(-5, 4)
    tm, _ = char_count_twisted_fermion(N_mixed)
    tp, _ = char_count_pi(k, LAM, N_mixed, L, half=True)
    mixed = tensor_tables(tm, tp, N_mixed)
    series = weber_f2(N_mixed) * eta_inverse_square(N_mixed)
    compare_character(mixed, series, N_mixed, range(-L, L + 1), rep, "M x Pi^1/2 dims", {"k": k})
    rep.scalars("M x Pi^1/2 q-offset", "L_sug(0) - c/24 on the top equals the Weber times eta^-2 offset",
                Fraction(-1, 4) - (k / (k + Fraction(3, 2))) / 24, series.offset, {"k": k})
    rep.truth("M x Pi^1/2 stride", "charge steps of the half lattice move h(0) by 1",
              mixed.charge_stride == 1 and 2 * pi_gram(k).pair(pi_gram(k).vector("mu"), pi_gram(k).vector({"c": HALF})) == 1)
    return rep


# ---------------------------------------------------------------------------
# injectivity of e^c_0 on Pi_(-1)(lam)

def e0_rank_by_level(k, lam, N: int):
    """[(level, dim, rank of e^c_0 from charge 0 to charge 1)] on Pi_(-1)(lam)."""
    gram = pi_gram(k)
    sp = Space([pi_lattice(k, base=gram.vector({"mu": -1, "c": lam}))], "Pi_(-1)")
    e = sp.algebra.parse("e^{c}")
    eng = Engine(sp.algebra, sp)
    out = []
    for level in range(N + 1):
        keys = [key for lv, ns, key in sp.factors[0].enumerate(level, range(0, 1)) if lv == level]
        images = [eng.product(e, 0, State(sp, {(key,): Fraction(1)})).terms for key in keys]
        out.append((level, len(keys), len(echelon([v for v in images if v], order=repr))))
    return out


def check_injectivity_e0(N: int = 4, samples: int = 5, seed: int = 0, rep: CheckReport | None = None) -> CheckReport:
    rep = rep or CheckReport("mod.injectivity", "Q(k,lam)")
    cases = [("symbolic", K, LAM)]
    rng = random.Random(seed)
    while len(cases) < samples + 1:
        k = Fraction(rng.randint(-40, 40), rng.randint(1, 12))
        if k in (0, -2):
            continue
        cases.append(("sample", k, Fraction(rng.randint(-30, 30), rng.randint(1, 9))))
    cases.append(("sample", Fraction(-5, 4), Fraction(1, 3)))
    for kind, k, lam in cases:
        params = {"k": k, "lam": lam}
        t0 = time.perf_counter()
        ranks = e0_rank_by_level(k, lam, N)
        bad = [(lv, d, r) for lv, d, r in ranks if d != r]
        rep.truth(f"e^c_0 injective ({kind})", f"ker e^c_0 = 0 on Pi_(-1)(lam) up to level {N}", not bad,
                  "; ".join(f"level {lv}: rank {r} < {d}" for lv, d, r in bad) or None, params, t0)
    return rep


# ---------------------------------------------------------------------------
# spectral flow

def flowed_action(parts: dict, N, w: State, eng: Engine) -> State:
    """Coefficient of z^{-N-1} in Y(Delta(v,z)g, z)w, with Delta(v,z)g = sum_P z^P parts[P]."""
    out = w.space.zero()
    for P, st in parts.items():
        out = out + eng.product(st, N + P, w)
    return out


def _flow(alg: Space, ell, g: State) -> dict:
    vec = alg.factors[alg.lattice_index()].gram.vector({"mu": ell})
    v = heisenberg_mode(alg.vacuum(), vec, -1)
    return delta_deform(DeformOp(v), g)


def check_spectral_flow(ell: int, rep: CheckReport | None = None, max_weight: int = 3, h=Fraction(1, 16),
                        lam=LAM, r: int = -1) -> CheckReport:
    """Delta(ell mu, z)-twisted action on Pi_(r)(lam) equals the direct action on Pi_(ell+r)(lam)."""
    rep = rep or CheckReport("mod.spectralflow", "Q(lam)")
    k = Fraction(-4, 3)
    params = {"ell": ell, "k": k, "r": r}
    alg = make_sl2_virpi(k)
    A = alg.space
    src = relaxed_space(k, h, lam, ell=r)
    dst = relaxed_space(k, h, lam, ell=r + ell)
    eng_src, eng_dst = Engine(A, src), Engine(A, dst)
    gram = src.factors[1].gram
    shift = gram.vector({"mu": ell})
    back = tuple(-x for x in shift)
    samples = []
    for level, key in src.factors[0].enumerate(1):
        for lv, ns, lkey in src.factors[1].enumerate(1, range(-1, 2)):
            samples.append(State(src, {(key, lkey): Fraction(1)}))
    for name, g in alg.images.items():
        t0 = time.perf_counter()
        parts = _flow(A, ell, g)
        bad = []
        for w in samples:
            for N in range(-max_weight, max_weight + 1):
                lhs = flowed_action(parts, N, w, eng_src)
                rhs = shift_momentum(eng_dst.product(g, N, shift_momentum(w, shift, dst)), back, src)
                if lhs != rhs:
                    bad.append(f"{name}~({N}) on {w.render()}: {(lhs - rhs).render()}")
        rep.truth(f"flow {name}", f"pi_ell({name}) on Pi_(r) = {name} on Pi_(ell+r), modes |n| <= {max_weight}",
                  not bad, "; ".join(bad[:2]) or None, params, t0)
    # closed forms on the same module: e~(n) = e(n + ell), f~(n) = f(n - ell), h~(0) = h(0) + ell k
    g = alg.images
    for w in samples[:6]:
        for N in range(-1, 2):
            t0 = time.perf_counter()
            p2 = dict(params, n=N, w=w.render())
            rep.states("e~(n) = e(n+ell)", "pi_ell(e(n)) = e(n + ell)", flowed_action(_flow(A, ell, g["e"]), N, w, eng_src),
                       eng_src.product(g["e"], N + ell, w), p2, t0)
            t0 = time.perf_counter()
            rep.states("f~(n) = f(n-ell)", "pi_ell(f(n)) = f(n - ell)", flowed_action(_flow(A, ell, g["f"]), N, w, eng_src),
                       eng_src.product(g["f"], N - ell, w), p2, t0)
            t0 = time.perf_counter()
            rep.states("h~(n) = h(n) + ell k delta", "pi_ell(h(n)) = h(n) + ell k delta_{n,0}",
                       flowed_action(_flow(A, ell, g["h"]), N, w, eng_src),
                       eng_src.product(g["h"], N, w) + (w * (ell * k) if N == 0 else src.zero()), p2, t0)
    return rep


def check_flow_composition(ell: int, ell2: int, rep: CheckReport) -> CheckReport:
    """Delta(ell2 mu) Delta(ell mu) g = Delta((ell + ell2) mu) g on the generator images."""
    k = Fraction(-4, 3)
    alg = make_sl2_virpi(k)
    A = alg.space
    for name, g in alg.images.items():
        t0 = time.perf_counter()
        twice: dict = {}
        for P, st in _flow(A, ell, g).items():
            for P2, st2 in _flow(A, ell2, st).items():
                twice[P + P2] = twice.get(P + P2, A.zero()) + st2
        once = _flow(A, ell + ell2, g)
        twice = {P: v for P, v in twice.items() if v}
        rep.truth(f"flow composition {name}", f"Delta({ell2} mu)Delta({ell} mu){name} = Delta({ell + ell2} mu){name}",
                  twice == once, None, {"ell": ell, "ell2": ell2}, t0)
    return rep


# ---------------------------------------------------------------------------
# Whittaker modules at (p, p') = (3, 4)

def make_sl2_ising() -> RealizationDef:
    """sl(2) at k = -2/3 with the c = 1/2 Virasoro factor realized by one free fermion."""
    k = Fraction(-2, 3)
    sp = Space([Clifford(1), pi_lattice(k)], "f-pi")
    omega = HALF * sp.parse("Psi(-3/2) Psi(-1/2) ⊗ |0>")
    images = sl2_images(sp, k, omega * (k + 2))
    return RealizationDef("sl2.ising", sp, images, k, sl2_spec(), "Q,sqrt(2)", {"omega": omega})


def whittaker_space(h, lam) -> tuple[Space, State]:
    """L(h) tensor Pi_lam for h in {0, 1/2, 1/16}; returns the space and v_h tensor w_lam."""
    k = Fraction(-2, 3)
    W = Whittaker(pi_gram(k), lam)
    if h == Fraction(1, 16):
        sp = Space([Clifford(1, twisted=True), W], "whittaker")
        return sp, sp.top()
    sp = Space([Clifford(1), W], "whittaker")
    if h == 0:
        return sp, sp.top()
    if h == HALF:
        return sp, State(sp, {(((HALF, 0),), W.top_key()): Fraction(1)})
    raise FieldError("Whittaker backends exist for h = 0, 1/2, 1/16")


def whittaker_cyclic_rank(alg: RealizationDef, sp: Space, top: State, N: int, D: int, cap: int):
    """(dim of the cyclic span inside the box, dim of the box).

    The box holds keys of level <= N and d(0)-degree <= D in the parity
    sector of the top.  By PBW ordering U(sl2^)w is spanned by monomials in
    modes n <= 0 applied to w, and those never raise the level beyond the
    final one; intermediate d(0)-degrees are capped at ``cap``, which can
    only shrink the computed span.
    """
    fer, W = sp.factors
    tkey = next(iter(top.terms))
    parity = fer.parity(tkey[0])
    base = fer.level(tkey[0])
    box = set()
    for fl, fk in fer.enumerate(N + base):
        if fer.parity(fk) != parity:
            continue
        for lv, j, wk in W.enumerate(int(N + base - fl), D):
            box.add((fk, wk))
    level = lambda key: fer.level(key[0]) + W.level(key[1]) - base
    order = lambda key: (key not in box, level(key), key[1][1], repr(key))
    eng = Engine(alg.space, sp)
    rows = echelon([top.terms], order=order)
    frontier = [top.terms]
    while frontier:
        new = []
        for vec in frontier:
            st = State(sp, vec)
            for g in alg.images.values():
                for n in range(-N, 1):
                    im = eng.product(g, n, st)
                    if not im or any(level(x) > N or x[1][1] > cap for x in im.terms):
                        continue
                    red = reduce_by(im.terms, rows, order)
                    if red:
                        rows = echelon([r for _, r in rows] + [red], order=order)
                        new.append(red)
        frontier = new
    return sum(1 for p, _ in rows if p in box), len(box)


def check_whittaker(lam, h=Fraction(1, 16), rep: CheckReport | None = None, N: int = 2,
                    extra_degree: int = 2) -> CheckReport:
    if lam == 0:
        raise FieldError("Whittaker parameter must be nonzero")
    rep = rep or CheckReport("mod.whittaker", "Q,sqrt(2)")
    alg = make_sl2_ising()
    k = alg.k
    params = {"p": 3, "p'": 4, "h": h, "lam": lam}
    sp, w = whittaker_space(h, lam)
    eng = Engine(alg.space, sp)
    g = alg.images
    t0 = time.perf_counter()
    got = eng.nonzero_modes(g["e"], w)
    rep.states("e(0)w", "e(0)w~ = lam w~", got.pop(0, sp.zero()), w * lam, params, t0)
    rep.truth("e(n)w, n>=1", "e(n)w~ = 0 for n >= 1", not got, _modes_text(got), params, t0)
    t0 = time.perf_counter()
    got = eng.nonzero_modes(g["f"], w, low=1)
    rep.truth("f(m)w, m>=1", "f(m)w~ = 0 for m >= 1", not got, _modes_text(got), params, t0)
    t0 = time.perf_counter()
    S = sugawara_vector(alg)
    got = eng.nonzero_modes(S, w, low=1)
    rep.states("L_sug(0)w", "L_sug(0)w~ = (h + k/4)w~", got.pop(1, sp.zero()), w * (h + k / 4), params, t0)
    rep.truth("L_sug(n)w, n>=1", "L_sug(n)w~ = 0 for n >= 1", not got, _modes_text(got), params, t0)
    # h(0) is not diagonalizable on the top: (h(0) + k/2)^j w~ = d(0)^j w~
    t0 = time.perf_counter()
    v = w
    chain = []
    for j in range(1, 4):
        v = eng.product(g["h"], 0, v) + v * (k / 2)
        chain.append(v == State(sp, {(key[0], (key[1][0], j)): c for key, c in w.terms.items()}))
    d1 = State(sp, {(key[0], (key[1][0], 1)): c for key, c in w.terms.items()})
    semisimple = eng.product(S, 1, d1) == d1 * (h + k / 4)
    rep.truth("h(0) Jordan chain", "(h(0) + k/2)^j w~ = d(0)^j w~ != 0 while L_sug(0) stays scalar",
              all(chain) and semisimple, f"chain {chain}, L_sug(0) scalar on d(0)w~: {semisimple}", params, t0)
    # f(m0) on a level-one vector
    if h != 0:
        t0 = time.perf_counter()
        wF = alg.extras["omega"]
        v1 = translate_fermion(sp, w)
        Lv = eng.product(wF, 2, v1)
        rep.states("f(m0) witness", "f(1)(v tensor w) = ((k+2)/lam) L(1)v tensor w, nonzero",
                   eng.product(g["f"], 1, v1), Lv * ((k + 2) / lam), params, t0)
        rep.truth("L(1)v nonzero", "L(1)v != 0 for v = L(-1)v_h", bool(Lv), None, params, t0)
    t0 = time.perf_counter()
    got, dim = whittaker_cyclic_rank(alg, sp, w, N, N, N + extra_degree)
    rep.truth(f"cyclic span, weight <= {N}",
              f"U(sl2^)w~ fills L(h) tensor Pi_lam up to level {N}, d(0)-degree {N}", got == dim,
              f"rank {got} of {dim}", dict(params, N=N), t0)
    return rep


def translate_fermion(sp: Space, w: State) -> State:
    """L(-1) applied to the fermionic factor of w."""
    out: dict = {}
    for key, c in w.terms.items():
        for k2, c2 in sp.factors[0].translate(key[0]).items():
            add_to(out, (k2,) + key[1:], c * c2)
    return State(sp, out)


# ---------------------------------------------------------------------------
# logarithmic extension by the screening S = Res Y(v_{2,1} tensor e^nu, z)

LOG_CASES = ((3, 4, 1, 1), (3, 4, 1, 2), (5, 2, 1, 1))


class _VirSide:
    """The Virasoro factors of the two blocks and the intertwiner v_{2,1}(i)."""

    def __init__(self, p, pp, r, s):
        k = level_of(p, pp)
        self.h_a = vir_weight(p, pp, r, s)
        self.h_m = vir_weight(p, pp, r + 1, s)
        fa = Space([Clifford(1)], "F")
        if (p, pp) == (3, 4):
            # h^{2,1} = 1/2 is the fermion Psi(-1/2)|0>
            v = fa.parse("Psi(-1/2)")
            if self.h_a == Fraction(1, 16):
                self.A = self.M = Space([Clifford(1, twisted=True)], "M+")
            else:
                self.A = self.M = fa
            eng = Engine(fa, self.A)
            self.vop = lambda i, a: eng.product(v, i, a)
            self.top_a = self.A.top()
            self.top_m = self.top_a if self.h_m == self.h_a else v
        elif (r, s) == (1, 1):
            vac = Virasoro(vir_central_charge_level(k), Fraction(0), True)
            self.A = Space([vac], "Vir")
            self.M = Space([h21_module(k)], "Vir(h21)")
            v = self.M.top()
            self.vop = lambda i, a: skew_product(v, i, a)
            self.top_a, self.top_m = self.A.top(), v
        else:
            raise FieldError("no Virasoro backend for this logarithmic case")
        f = self.A.factors[0]
        self._f = f
        self._base = f.level(next(iter(self.top_a.terms))[0])
        self._base_m = self.M.factors[0].level(next(iter(self.top_m.terms))[0])
        self._parity = f.parity(next(iter(self.top_a.terms))[0])

    def level_m(self, key):
        return self.M.factors[0].level(key) - self._base_m

    def enumerate(self, N):
        f = self._f
        out = []
        for lv, key in f.enumerate(N + self._base):
            if f.parity(key) == self._parity:
                out.append((lv - self._base, key))
        return out


class LogExtension:
    """Truncated A-block L(h^{r,s}) tensor Pi_(ell)(lam) with the screening into the M-block."""

    def __init__(self, p, pp, r, s, ell=-1, lam=None, N: int = 4):
        if not (1 <= s <= pp - 1 and 1 <= r <= p - 2):
            raise FieldError("parameters outside the window 1 <= s <= p'-1, 1 <= r <= p-2")
        self.p, self.pp, self.r, self.s, self.ell, self.N = p, pp, r, s, ell, N
        self.k = k = level_of(p, pp)
        self.lam_plus = lambda_pm(p, pp, r, s)[0]
        self.lam = self.lam_plus if lam is None else lam
        self.vir = _VirSide(p, pp, r, s)
        gram = pi_gram(k)
        self.gram = gram
        self.nu = gram.vector("nu")
        self.lat_a = pi_lattice(k, base=gram.vector({"mu": ell, "c": self.lam}))
        self.lat_m = pi_lattice(k, base=tuple(a + b for a, b in zip(self.lat_a.base, self.nu)))

    # weights ---------------------------------------------------------------
    def weight_a(self, lam):
        k, ell = self.k, self.ell
        return self.vir.h_a + (k * ell ** 2 + 4 * (ell + 1) * lam) / 4

    def weight_m(self, lam):
        k, ell = self.k, self.ell
        return self.vir.h_m + ((ell + 1) ** 2 * k + 4 * (ell + 2) * (lam - k / 2)) / 4

    # basis and screening ---------------------------------------------------
    def basis_a(self, level):
        out = []
        for la, vk in self.vir.enumerate(level):
            lb = level - la
            if lb < 0 or Fraction(lb).denominator != 1:
                continue
            for bos in colored_partitions(int(lb), 2):
                out.append((vk, (self.lat_a.base, bos)))
        return out

    def screen(self, key) -> dict:
        """S on a basis vector of the A-block; the result is a vector of the M-block."""
        vk, lk = key
        lam = self.lam
        la = self._vir_level(vk)
        lb = sum(n for n, _ in lk[1])
        i = lam - lb
        stop = i + la + lb + 4
        a = State(self.vir.A, {(vk,): Fraction(1)})
        out: dict = {}
        while i < stop:
            va = self.vir.vop(i, a)
            if va:
                lat = self.lat_a.exp_action(self.nu, -1 - i, lk)
                for vkey, vc in va.terms.items():
                    for lkey, lc in lat.items():
                        add_to(out, (vkey[0], lkey), vc * lc)
            i += 1
        return out

    def _vir_level(self, vk):
        return self.vir._f.level(vk) - self.vir._base

    def apply_S(self, vec: dict) -> dict:
        """S on a vector of the two-block space; keys are (block, key).

        The M-block carries no further screening action in the two-block
        module, so only A-components contribute.
        """
        out: dict = {}
        for (block, key), c in vec.items():
            if block == "A":
                for k2, c2 in self.screen(key).items():
                    add_to(out, ("M", k2), c * c2)
        return out

    def block_matrices(self):
        """{level: (A-basis, images)} with S preserving the L_sug(0)-weight."""
        return {m: (b, [self.screen(key) for key in b]) for m in range(self.N + 1)
                for b in [self.basis_a(m)]}


def check_log(ext: LogExtension, rep: CheckReport | None = None, witness: LogExtension | None = None) -> CheckReport:
    rep = rep or CheckReport("mod.logarithmic", "Q")
    p, pp, r, s, ell = ext.p, ext.pp, ext.r, ext.s, ext.ell
    k = ext.k
    params = {"p": p, "p'": pp, "r": r, "s": s, "ell": ell}
    lp = ext.lam_plus
    # (a) weight congruence: w_M - w_A = lam - lam^+ + integer
    t0 = time.perf_counter()
    diff = ext.weight_m(LAM) - ext.weight_a(LAM) - (LAM - lp)
    ok = isinstance(diff, (int, Fraction)) and Fraction(diff).denominator == 1
    rep.truth("weight congruence", "top weights of the two blocks agree mod Z iff lam = lam^+ mod Z", ok,
              f"w_M - w_A - (lam - lam^+) = {render(diff)}", params, t0)
    rep.scalars("Delta = lam^+", "h^{2,1} + h^{r,s} - h^{r+1,s} = lam^+", vir_weight(p, pp, 2, 1) + ext.vir.h_a - ext.vir.h_m,
                lp, params)
    # the Pi part of the block weights read off the engine
    t0 = time.perf_counter()
    got = []
    for lat, want in ((ext.lat_a, ext.weight_a(ext.lam) - ext.vir.h_a), (ext.lat_m, ext.weight_m(ext.lam) - ext.vir.h_m)):
        sp = Space([lat], "Pi")
        got.append(_eigenvalue(Engine(sp.algebra, sp), _pi_virasoro_on(sp.algebra, k), 1, sp.top()) == want)
    rep.truth("block top weights", "Lbar(0) on e^{ell mu + lam c} = (k ell^2 + 4(ell+1)lam)/4, same for the M-block",
              all(got), None, dict(params, lam=ext.lam), t0)
    # (b) S maps A to M preserving the weight; S^2 = 0 on the two-block space
    t0 = time.perf_counter()
    mats = ext.block_matrices()
    ranks = [len(echelon([v for v in imgs if v], order=repr)) for _, (_, imgs) in sorted(mats.items())]
    shift = ext.weight_a(ext.lam) - ext.weight_m(ext.lam)
    bad = []
    for m, (keys, imgs) in mats.items():
        for v in imgs:
            for vk, lk in v:
                if lk[0] != ext.lat_m.base or ext.vir.level_m(vk) + sum(n for n, _ in lk[1]) != m + shift:
                    bad.append(f"level {m}: {render(ext.vir.level_m(vk))}")
    rep.truth("S preserves weight", "S maps level m of the A-block to weight-equal states of the M-block",
              not bad, "; ".join(bad[:3]) or None, dict(params, lam=ext.lam, ranks=ranks), t0)
    t0 = time.perf_counter()
    sq = [ext.apply_S(ext.apply_S({("A", key): Fraction(1)})) for _, (keys, _) in mats.items() for key in keys]
    rep.truth("S^2 = 0", f"S^2 = 0 on the two-block truncation up to level {ext.N} (S is A-to-M block-triangular)",
              not any(sq), None, dict(params, lam=ext.lam), t0)
    # (c) witness at lam^+ - 1 and (d) rank of Ltilde(0) - L(0)
    wext = witness or LogExtension(p, pp, r, s, ell, lp - 1, ext.N)
    t0 = time.perf_counter()
    top_key = (next(iter(wext.vir.top_a.terms))[0], (wext.lat_a.base, ()))
    img = wext.screen(top_key)
    want_key = (next(iter(wext.vir.top_m.terms))[0], (wext.lat_m.base, ()))
    C = img.get(want_key, Fraction(0))
    rep.truth("S witness at lam^+ - 1", "S(v_{r,s} tensor e^{ell mu + lam c}) = C v_{r+1,s} tensor "
              "e^{(ell+1)mu + (lam - k/2)c}, C != 0", C != 0 and set(img) == {want_key},
              f"C = {render(C)}, support {len(img)}", dict(params, lam=wext.lam, C=C), t0)
    t0 = time.perf_counter()
    wm = wext.block_matrices()
    wr = [len(echelon([v for v in imgs if v], order=repr)) for _, (_, imgs) in sorted(wm.items())]
    sq = [wext.apply_S(wext.apply_S({("A", key): Fraction(1)})) for _, (keys, _) in wm.items() for key in keys]
    rep.truth("Ltilde(0) nilpotent rank two", "Ltilde(0) - L(0) = S has (Ltilde(0) - L(0))^2 = 0 and rank >= 1",
              sum(wr) >= 1 and not any(sq), "ranks by level " + ", ".join(str(x) for x in wr),
              dict(params, lam=wext.lam, ranks=wr), t0)
    return rep


def check_screening_nu(rep: CheckReport, k=K) -> CheckReport:
    """S nu(-1)|0> = (k/2) v_{2,1} tensor e^nu inside the extended algebra."""
    from .engine import lattice_skew_product
    alg = make_sl2_virpi(k)
    msp, s = virpi_screening(k)
    b = heisenberg_mode(alg.space.vacuum(), "nu", -1)
    t0 = time.perf_counter()
    rep.states("S nu(-1)", "S nu(-1)|0> = (k/2) v_{2,1} tensor e^nu", lattice_skew_product(s, 0, b), s * (k / 2),
               {"k": k}, t0)
    return rep
