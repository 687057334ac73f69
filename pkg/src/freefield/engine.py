"""n-th products, translation, skew-symmetry, deformations and screenings.

Products are computed on basis keys and memoized per (algebra, module)
pair.  The left factor is peeled one creation mode at a time through the
iterate formula

    (g_(p) v)_(q) w = sum_j (-1)^j C(p, j) [ g_(p-j) v_(q+j) w
                                             - eps (-1)^p v_(p+q-j) g_(j) w ]

and for a generator acting with twist r (a fermion on a twisted sector)

    (g_(p) v)_(q) w = sum_{i=0}^{N-p-1} C(-r, i) sum_j C(p+i, j)
        [ (-1)^j g_(r+p+i-j) v_(q-r-i+j) w - eps (-1)^(p+i-j) v_(q+p-r-j) g_(r+j) w ]

where N bounds the locality of g and v.  Pure exponentials are the base
case, handled by the lattice factor.
"""

from __future__ import annotations

from fractions import Fraction
from math import ceil, factorial, floor

from .fields import FieldError
from .spaces import HeisLattice, ModeError, _sign, add_to, as_rational, binom
from .states import Space, State


def _floor(x) -> int:
    return floor(as_rational(x, "mode bound"))


def _ceil(x) -> int:
    return ceil(as_rational(x, "mode bound"))


def _int(x) -> int:
    x = as_rational(x, "mode index")
    if x.denominator != 1:
        raise ModeError(f"mode index {x} is not an integer")
    return int(x)


def _accumulate(out: dict, vec: dict, c):
    for k, v in vec.items():
        add_to(out, k, c * v)


class Engine:
    """Product engine for an algebra space acting on a module space."""

    def __init__(self, algebra: Space, module: Space | None = None):
        module = algebra if module is None else module
        if module.algebra != algebra:
            raise FieldError("module space does not carry an action of this algebra")
        self.A = algebra
        self.M = module
        self.cache = module.cache_for(algebra)

    # basis-level product --------------------------------------------------
    def basis(self, akey, n, wkey) -> dict:
        ck = (akey, n, wkey)
        r = self.cache.get(ck)
        if r is None:
            r = self._compute(akey, n, wkey)
            self.cache[ck] = r
        return r

    def _apply(self, akey, n, vec: dict) -> dict:
        out: dict = {}
        for k, c in vec.items():
            _accumulate(out, self.basis(akey, n, k), c)
        return out

    def _act(self, i, gen, m, vec: dict) -> dict:
        out: dict = {}
        for k, c in vec.items():
            _accumulate(out, self.M.act(i, gen, m, k), c)
        return out

    def _compute(self, akey, n, wkey) -> dict:
        A, M = self.A, self.M
        E = M.excess(akey, wkey)
        diff = as_rational(E - n, "mode offset")
        if diff <= 0:
            return {}
        pl = A.peel(akey)
        if pl is None:
            if A.is_vacuum(akey):
                return {wkey: Fraction(1)} if n == -1 else {}
            return self._exponential(akey, n, wkey)
        i, gen, p, rest, coeff = pl
        fM = M.factors[i]
        r = fM.twist(gen)
        eps = _sign(fM.gen_parity(gen) * A.parity(rest))
        p = _int(p)
        gkey_i = A.factors[i].gen_key(gen)
        out: dict = {}
        if r == 0:
            E_rest = M.excess(rest, wkey)
            J1 = _floor(E_rest - 1 - n)
            if p >= 0:
                J1 = min(J1, p)
            for j in range(J1 + 1):
                b = binom(p, j) * _sign(j)
                if b == 0:
                    continue
                inner = self.basis(rest, n + j, wkey)
                if inner:
                    _accumulate(out, self._act(i, gen, p - j, inner), coeff * b)
            J2 = _floor(fM.excess(gkey_i, wkey[i]) - 1)
            if p >= 0:
                J2 = min(J2, p)
            for j in range(J2 + 1):
                b = binom(p, j) * _sign(j) * _sign(p) * eps
                if b == 0:
                    continue
                gw = M.act(i, gen, j, wkey)
                if gw:
                    _accumulate(out, self._apply(rest, p + n - j, gw), -coeff * b)
            return out
        # twisted generator
        N = _ceil(A.factors[i].excess(gkey_i, rest[i]))
        E_rest = M.excess(rest, wkey)
        E_gen = fM.excess(gkey_i, wkey[i])
        for ii in range(max(N - p, 0)):
            bi = binom(-r, ii)
            if bi == 0:
                continue
            top = p + ii
            J1 = _floor(E_rest - 1 - (n - r - ii))
            if top >= 0:
                J1 = min(J1, top)
            for j in range(J1 + 1):
                b = bi * binom(top, j) * _sign(j)
                if b == 0:
                    continue
                inner = self.basis(rest, n - r - ii + j, wkey)
                if inner:
                    _accumulate(out, self._act(i, gen, r + top - j, inner), coeff * b)
            J2 = _floor(E_gen - 1 - r)
            if top >= 0:
                J2 = min(J2, top)
            for j in range(J2 + 1):
                b = bi * binom(top, j) * _sign(top - j) * eps
                if b == 0:
                    continue
                gw = M.act(i, gen, r + j, wkey)
                if gw:
                    _accumulate(out, self._apply(rest, n + p - r - j, gw), -coeff * b)
        return out

    def _exponential(self, akey, n, wkey) -> dict:
        A, M = self.A, self.M
        L = A.lattice_index()
        for j, f in enumerate(A.factors):
            if j != L and not f.is_vacuum(akey[j]):
                raise ModeError("left state is not in generator normal form")
        fA, fM = A.factors[L], M.factors[L]
        alpha = akey[L][0]
        sign = 1
        if fA.parity(akey[L]):
            sign = _sign(sum(M.factors[j].parity(wkey[j]) for j in range(L)))
        res = fM.exp_action(alpha, n, wkey[L])
        pre, post = wkey[:L], wkey[L + 1:]
        return {pre + (k,) + post: sign * c for k, c in res.items()}

    # state level -----------------------------------------------------------
    def product(self, a: State, n, w: State) -> State:
        if a.space != self.A or w.space != self.M:
            raise FieldError("states do not match the engine spaces")
        out: dict = {}
        for ak, ac in a.terms.items():
            for wk, wc in w.terms.items():
                _accumulate(out, self.basis(ak, n, wk), ac * wc)
        return State(self.M, out)

    def excess(self, a: State, w: State):
        return max((self.M.excess(ak, wk) for ak in a.terms for wk in w.terms), default=Fraction(0))

    def mode_shift(self, a: State, w: State) -> Fraction:
        """Fractional part of the allowed mode indices for a acting on w."""
        shifts = {self.M.mode_coset(ak, wk) for ak in a.terms for wk in w.terms}
        if len(shifts) > 1:
            raise ModeError("mixed mode cosets")
        return shifts.pop() if shifts else Fraction(0)

    def nonzero_modes(self, a: State, w: State, low=None) -> dict:
        """All products a_(n) w with n >= low (default: the lowest useful mode 0)."""
        E = self.excess(a, w)
        s = self.mode_shift(a, w)
        start = Fraction(0) + s if low is None else low
        out = {}
        n = start
        while n < E:
            v = self.product(a, n, w)
            if v:
                out[n] = v
            n += 1
        return out


# ---------------------------------------------------------------------------
# module-level API

def nth_product(a: State, n, w: State) -> State:
    """a_(n) w.  a lives in the vertex algebra acting on the space of w."""
    return Engine(a.space, w.space).product(a, n, w)


def translate(v: State) -> State:
    out: dict = {}
    for k, c in v.terms.items():
        _accumulate(out, v.space.translate(k), c)
    return State(v.space, out)


def _by_parity(v: State) -> list:
    parts: dict = {}
    for key, c in v.terms.items():
        parts.setdefault(v.space.parity(key), {})[key] = c
    return [State(v.space, t) for _, t in sorted(parts.items())]


def skew_product(a: State, n, b: State, order: int | None = None) -> State:
    """a_(n) b for a in a module M and b in the algebra, returning a state of M.

    a_(n) b = (-1)^{|a||b|} sum_j (-1)^{n+1+j} L(-1)^j/j! (b_(n+j) a).
    """
    if a.parity() is None or b.parity() is None:
        total = State(a.space, {})
        for pa in _by_parity(a):
            for pb in _by_parity(b):
                total = total + skew_product(pa, n, pb, order)
        return total
    eng = Engine(b.space, a.space)
    n = _int(n)
    E = eng.excess(b, a)
    jmax = _floor(E - 1 - n)
    if order is not None:
        jmax = min(jmax, order)
    sign = _sign(a.parity() * b.parity())
    total = State(a.space, {})
    for j in range(max(jmax, -1) + 1):
        v = eng.product(b, n + j, a)
        for _ in range(j):
            v = translate(v)
        if v:
            total = total + v * Fraction(sign * _sign(n + 1 + j), factorial(j))
    return total


def lattice_skew_product(a: State, n, b: State, order: int | None = None) -> State:
    """a_(n) b with the lattice vertex operator of a applied directly to b.

    Differs from skew_product by (-1)^<alpha, beta> on each pair of
    exponential momenta; both pairings must be integral.
    """
    L = a.space.lattice_index()
    f = a.space.factors[L]
    out = State(a.space, {})
    by_mom: dict = {}
    for key, c in b.terms.items():
        by_mom.setdefault(key[L][0], {})[key] = c
    for akey, ac in a.terms.items():
        alpha = akey[L][0]
        for beta, terms in by_mom.items():
            e = as_rational(f.gram.pair(alpha, beta), "momentum pairing")
            if e.denominator != 1:
                raise ModeError("direct lattice product needs an integral pairing")
            part = skew_product(State(a.space, {akey: ac}), n, State(b.space, terms), order)
            out = out + part * _sign(int(e))
    return out


def screening_apply(s: State, target: State) -> State:
    """Zero mode s_(0) applied to target; uses skew-symmetry when s is a module state."""
    if s.space == target.space.algebra:
        return nth_product(s, 0, target)
    if target.space == s.space.algebra:
        return skew_product(s, 0, target)
    raise FieldError("screening and target spaces are incompatible")


def schur_state(space: Space, gamma, n: int, factor: int | None = None) -> State:
    """Coefficient of z^n in exp(sum_j gamma(-j) z^j / j) applied to the vacuum."""
    if n < 0:
        raise ValueError("Schur index must be nonnegative")
    L = space.lattice_index() if factor is None else factor
    f = space.factors[L]
    gvec = f.gram.vector(gamma)
    out: dict = {}
    base = list(space.vacuum_key())
    for bos, c in f.schur(gvec, n).items():
        base[L] = (f.zero, bos)
        add_to(out, tuple(base), c)
    return State(space, out)


def commutator_check(a: State, m, b: State, n, w: State) -> State:
    """[a_m, b_n] w - sum_j C(m, j) (a_(j) b)_(m+n-j) w; zero when the Borcherds identity holds."""
    eng_w = Engine(a.space, w.space)
    eng_ab = Engine(a.space, a.space)
    pa, pb = a.parity() or 0, b.parity() or 0
    lhs = eng_w.product(a, m, eng_w.product(b, n, w)) - eng_w.product(b, n, eng_w.product(a, m, w)) * _sign(pa * pb)
    E = eng_ab.excess(a, b)
    rhs = State(w.space, {})
    j = 0
    while j < E:
        ab = eng_ab.product(a, j, b)
        if ab:
            rhs = rhs + eng_w.product(ab, m + n - j, w) * binom(m, j)
        j += 1
    return lhs - rhs


# ---------------------------------------------------------------------------
# deformations

class DeformOp:
    """Delta(v, z) = z^{v_0} exp(sum_{n>=1} v_n / (-n) (-z)^{-n}).

    For a Heisenberg vector v the positive modes commute, so Delta(v,z)a is
    a finite sum of z-powers.  ``nilpotent`` marks vectors with v_0 of
    square zero whose z^{v_0} contributes the logarithmic layer.
    """

    def __init__(self, v: State, order: int = 6, nilpotent: bool = False, omega: State | None = None):
        self.v = v
        self.order = order
        self.nilpotent = nilpotent
        if not nilpotent:
            self._check_commuting()
        if omega is not None:
            self._check_weight_one(omega)

    def _check_commuting(self):
        # [v_n, v_m] = sum_j C(n, j) (v_(j) v)_(n+m-j) vanishes for n, m >= 0
        # exactly when v_(0) v = 0 and the higher products are central
        v = self.v
        eng = Engine(v.space, v.space)
        if eng.product(v, 0, v):
            raise FieldError("deformation vector: v_0 v is nonzero")
        vac = v.space.vacuum_key()
        for j in range(1, _ceil(eng.excess(v, v)) + 1):
            vv = eng.product(v, j, v)
            if any(k != vac for k in vv.terms):
                raise FieldError("deformation vector: modes do not commute")

    def _check_weight_one(self, omega: State):
        eng = Engine(omega.space, self.v.space)
        for n in range(0, 4):
            img = eng.product(omega, n + 1, self.v)
            want = self.v if n == 0 else State(self.v.space, {})
            if img != want:
                raise FieldError(f"deformation vector: L({n}) v has the wrong value")

    def power(self, a: State):
        """z-power contributed by z^{v_0} on a v_0-eigenstate a."""
        eng = Engine(self.v.space, a.space)
        img = eng.product(self.v, 0, a)
        if not img:
            return Fraction(0)
        k0 = next(iter(a.terms))
        ratio = img.terms.get(k0, Fraction(0)) / a.terms[k0]
        if img != a * ratio:
            if self.nilpotent:
                return None
            raise FieldError("state is not a v_0 eigenvector")
        return ratio


def delta_deform(d: DeformOp, a: State) -> dict:
    """Expansion of Delta(v, z) a as {z-power: state}.

    A nilpotent v_0 gives entries keyed ("log", power) for the S log z layer.
    """
    v = d.v
    eng = Engine(v.space, a.space)
    # exp(sum_n v_n (-1)^{n+1} z^{-n} / n) a, expanded by total z^{-m} degree
    layers = {0: a}
    terms = {}
    for m in range(1, d.order + 1):
        acc = State(a.space, {})
        # recursive exponential: m X_m = sum_{n=1}^m n c_n v_n X_{m-n}, c_n = (-1)^{n+1}/n
        for n in range(1, m + 1):
            prev = layers.get(m - n)
            if prev is None or not prev:
                continue
            img = eng.product(v, n, prev)
            if img:
                acc = acc + img * Fraction(_sign(n + 1), m)
        layers[m] = acc
    power = d.power(a) if not d.nilpotent else Fraction(0)
    for m, st in layers.items():
        if st:
            terms[power - m] = st
    if d.nilpotent:
        for m, st in list(layers.items()):
            s0 = eng.product(v, 0, st)
            if s0:
                terms[("log", -m)] = s0
    return terms


# ---------------------------------------------------------------------------
# small state builders

def heisenberg_mode(state: State, vec, m: int, factor: int | None = None) -> State:
    """Apply the boson mode vec(m) (vec given over the Gram labels or by name)."""
    space = state.space
    L = space.lattice_index() if factor is None else factor
    f = space.factors[L]
    v = f.gram.vector(vec)
    out: dict = {}
    for i, x in enumerate(v):
        if x == 0:
            continue
        for key, c in state.terms.items():
            for k2, c2 in space.act(L, ("b", i), m, key).items():
                add_to(out, k2, x * c * c2)
    return State(space, out)


def exp_apply(alpha, n, w: State, space: Space | None = None, factor: int | None = None) -> State:
    """(e^alpha)_(n) w for an even exponential whose momentum may lie off the lattice.

    The result is placed in ``space`` (default: the space of w); only the
    lattice factor of each key changes.
    """
    L = w.space.lattice_index() if factor is None else factor
    f = w.space.factors[L]
    alpha = f.gram.vector(alpha)
    out: dict = {}
    for key, c in w.terms.items():
        for k2, c2 in f.exp_action(alpha, n, key[L]).items():
            add_to(out, key[:L] + (k2,) + key[L + 1:], c * c2)
    return State(space or w.space, out)
