"""Named verification suites and the options that drive them."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import modules as M
from . import realizations as R
from .fields import FieldError
from .report import CheckReport

DEFAULT_EXCLUDED = (Fraction(0), Fraction(-2), Fraction(-3, 2))


@dataclass
class Options:
    truncation: int | None = None
    k_samples: int = 7
    field: str = "symbolic-k"
    seed: int = 0
    excluded_k: tuple = DEFAULT_EXCLUDED
    report_format: str = "text"
    suites: tuple = ()

    def trunc(self, default: int) -> int:
        return default if self.truncation is None else self.truncation


def sample_levels(opts: Options) -> list:
    """Deterministic rational levels away from the excluded set."""
    rng = random.Random(opts.seed)
    out: list = []
    while len(out) < opts.k_samples:
        k = Fraction(rng.randint(-60, 60), rng.randint(1, 12))
        if k in opts.excluded_k or k in out:
            continue
        out.append(k)
    return out


def _levels(opts: Options) -> list:
    return [R.K] if opts.field == "symbolic-k" else sample_levels(opts)


def _field(opts: Options, base: str) -> str:
    return base if opts.field == "symbolic-k" else base.replace("Q,k", "Q").replace("Q(k", "Q(")


def _each_level(rep: CheckReport, opts: Options, build, body):
    """Run body(realization) per level; excluded levels give a skipped row."""
    for k in _levels(opts):
        try:
            r = build(k)
        except FieldError as exc:
            rep.skipped("realization", "level outside the realization's domain", str(exc), {"k": k})
            continue
        start = len(rep.rows)
        body(r, k)
        if k is not R.K:
            for row in rep.rows[start:]:
                row.params.setdefault("k", k)


# sl(2) ---------------------------------------------------------------------

def suite_sl2_wakimoto(opts: Options) -> CheckReport:
    rep = CheckReport("sl2.wakimoto", _field(opts, "Q,k"))

    def body(r, k):
        R.check_weyl(r, rep)
        R.check_affine_relations(r, rep)

    _each_level(rep, opts, R.make_sl2_wakimoto, body)
    return rep


def suite_sl2_virpi(opts: Options) -> CheckReport:
    rep = CheckReport("sl2.virpi", _field(opts, "Q,k"))

    def body(r, k):
        R.check_affine_relations(r, rep)
        R.check_charges(r, rep)

    _each_level(rep, opts, R.make_sl2_virpi, body)
    return rep


def suite_sl2_critical(opts: Options) -> CheckReport:
    rep = CheckReport("sl2.critical", "Q")
    r = R.make_sl2_critical()
    R.check_affine_relations(r, rep)
    R.check_t_central(r, rep)
    return rep


def suite_sl2_sugawara(opts: Options) -> CheckReport:
    rep = CheckReport("sl2.sugawara", _field(opts, "Q,k"))
    _each_level(rep, opts, R.make_sl2_virpi, lambda r, k: R.check_sugawara(r, rep))
    return rep


def suite_sl2_singular(opts: Options) -> CheckReport:
    return R.check_singular_example(3)


# osp(1,2) ------------------------------------------------------------------

def suite_osp_relations(opts: Options) -> CheckReport:
    rep = CheckReport("osp.relations", _field(opts, "Q,k,sqrt(2),sqrt(-2k-3)"))

    def body(r, k):
        R.check_affine_relations(r, rep)
        R.check_charges(r, rep)
        R.check_osp_coset(r, rep)

    _each_level(rep, opts, lambda k: R.make_osp(k=k), body)
    return rep


def suite_osp_critical(opts: Options) -> CheckReport:
    rep = CheckReport("osp.critical", "Q,sqrt(2),sqrt(-1)")
    r = R.make_osp_critical()
    R.check_affine_relations(r, rep)
    R.check_t_central(r, rep)
    return rep


def suite_osp_k54(opts: Options) -> CheckReport:
    rep = CheckReport("osp.k54", "Q,sqrt(2)")
    R.check_affine_relations(R.make_osp_54(), rep)
    M.check_osp_sugawara(rep)
    return rep


def suite_osp_pomoc1(opts: Options) -> CheckReport:
    rep = CheckReport("osp.pomoc1", _field(opts, "Q,k"))
    for k in _levels(opts):
        start = len(rep.rows)
        R.check_pomoc(rep, k)
        if k is not R.K:
            for row in rep.rows[start:]:
                row.params.setdefault("k", k)
    return rep


def suite_osp_nsvir(opts: Options) -> CheckReport:
    return R.check_ns_vir(bound=6)


def suite_n3(opts: Options) -> CheckReport:
    rep = CheckReport("n3.identities", "Q,sqrt(3)")
    for convention in ("alternate", "standard"):
        start = len(rep.rows)
        R.check_n3(rep, convention)
        for row in rep.rows[start:]:
            row.params["cocycle"] = convention
    return rep


def suite_screenings(opts: Options) -> CheckReport:
    rep = CheckReport("screenings.all", _field(opts, "Q,k"))
    _each_level(rep, opts, R.make_sl2_wakimoto, lambda r, k: R.check_screenings(r, rep))
    for k in _levels(opts):
        if k in (0, -2):
            rep.skipped("virpi screening", "screening of the Virasoro-Pi realization", "excluded level", {"k": k})
            continue
        start = len(rep.rows)
        R.check_virpi_screening(rep, k)
        if k is not R.K:
            for row in rep.rows[start:]:
                row.params.setdefault("k", k)
    return rep


# modules -------------------------------------------------------------------

def suite_relaxed(opts: Options) -> CheckReport:
    rep = CheckReport("mod.relaxed", "Q(lam)")
    for p, pp in M.RELAXED_CASES:
        for r, s in M.kac_range(p, pp):
            M.check_relaxed_top_action(p, pp, r, s, rep)
    return rep


def suite_ordinary(opts: Options) -> CheckReport:
    rep = CheckReport("mod.ordinary", "Q")
    for p, pp in M.RELAXED_CASES:
        for s in range(1, pp):
            M.check_ordinary_singular(p, pp, s, rep)
    return rep


def suite_characters(opts: Options) -> CheckReport:
    rep = CheckReport("mod.characters", "Q(k,lam)", opts.trunc(8))
    return M.check_characters(rep, N=opts.trunc(8), N_mixed=opts.trunc(6))


def suite_spectralflow(opts: Options) -> CheckReport:
    rep = CheckReport("mod.spectralflow", "Q(lam)", opts.trunc(3))
    for ell in (-1, 0, 1, 2):
        M.check_spectral_flow(ell, rep, max_weight=opts.trunc(3))
    M.check_flow_composition(1, 1, rep)
    M.check_flow_composition(-1, 2, rep)
    return rep


def suite_whittaker(opts: Options) -> CheckReport:
    rep = CheckReport("mod.whittaker", "Q,sqrt(2)", opts.trunc(2))
    for h in (Fraction(1, 16), Fraction(0), Fraction(1, 2)):
        for lam in (Fraction(1), Fraction(1, 3)):
            M.check_whittaker(lam, h, rep, N=opts.trunc(2))
    return rep


def suite_injectivity(opts: Options) -> CheckReport:
    rep = CheckReport("mod.injectivity", "Q(k,lam)", opts.trunc(4))
    return M.check_injectivity_e0(opts.trunc(4), opts.k_samples, opts.seed, rep)


def suite_logarithmic(opts: Options) -> CheckReport:
    rep = CheckReport("mod.logarithmic", "Q", opts.trunc(4))
    for case in M.LOG_CASES:
        M.check_log(M.LogExtension(*case, N=opts.trunc(4)), rep)
    M.check_screening_nu(rep)
    return rep


def suite_osp54(opts: Options) -> CheckReport:
    rep = CheckReport("mod.osp54", "Q(lam),sqrt(2)")
    return M.check_osp54_relaxed(M.LAM, rep)


SUITES = {
    "sl2.wakimoto": suite_sl2_wakimoto,
    "sl2.virpi": suite_sl2_virpi,
    "sl2.critical": suite_sl2_critical,
    "sl2.sugawara": suite_sl2_sugawara,
    "sl2.singular.p3": suite_sl2_singular,
    "osp.relations": suite_osp_relations,
    "osp.critical": suite_osp_critical,
    "osp.k54": suite_osp_k54,
    "osp.pomoc1": suite_osp_pomoc1,
    "osp.nsvir": suite_osp_nsvir,
    "n3.identities": suite_n3,
    "screenings.all": suite_screenings,
    "mod.relaxed": suite_relaxed,
    "mod.ordinary": suite_ordinary,
    "mod.characters": suite_characters,
    "mod.spectralflow": suite_spectralflow,
    "mod.whittaker": suite_whittaker,
    "mod.injectivity": suite_injectivity,
    "mod.logarithmic": suite_logarithmic,
    "mod.osp54": suite_osp54,
}


def expand(names) -> list[str]:
    out: list[str] = []
    for name in names:
        if name == "all":
            out.extend(n for n in SUITES if n not in out)
        elif name in SUITES:
            if name not in out:
                out.append(name)
        else:
            raise KeyError(name)
    return out


def run_suite(name: str, opts: Options) -> CheckReport:
    rep = SUITES[name](opts)
    rep.suite = name
    for row in rep.rows:
        row.suite = name
        if opts.field == "samples":
            row.params.setdefault("k_samples", opts.k_samples)
    return rep
