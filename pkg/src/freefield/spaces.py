"""Graded state spaces and generator mode actions.

A space is an ordered tensor product of factors.  Every factor knows

* its basis keys (hashable, canonical) and the distinguished key,
* how a generator mode acts on a key (``act``), with modes given by the
  field index p of Y(g, z) = sum g_(p) z^(-p-1),
* how an algebra key factors as ``g_(p) rest`` (``peel``),
* the translation operator and a bound ``excess`` with a_(n) w = 0 once
  n >= excess(a, w).

The vacuum module of a factor doubles as the vertex algebra that acts on
the factor's modules.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import floor

from .fields import Alg, FieldError, RatFunc, is_rational, render, sqrt
from .lattice import GramForm

HALF = Fraction(1, 2)


class ModeError(ValueError):
    """A mode index outside the coset allowed by the target space."""


def as_rational(x, what="value") -> Fraction:
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Fraction):
        return x
    raise ModeError(f"{what} {render(x)} is not a rational number")


def binom(x, j: int):
    """Generalized binomial coefficient x choose j for integer j >= 0."""
    out = Fraction(1)
    for t in range(j):
        out = out * (x - t) / (t + 1)
    return out


def add_to(out: dict, key, c):
    if c == 0:
        return
    if key in out:
        v = out[key] + c
        if v == 0:
            del out[key]
        else:
            out[key] = v
    else:
        out[key] = c


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


# ---------------------------------------------------------------------------

class Factor:
    kind = "abstract"
    lattice_like = False

    def signature(self) -> tuple:
        raise NotImplementedError

    @property
    def algebra(self) -> "Factor":
        return self

    def vacuum_key(self):
        raise NotImplementedError

    def top_key(self):
        return self.vacuum_key()

    def is_vacuum(self, key) -> bool:
        return key == self.vacuum_key()

    def gen_parity(self, gen) -> int:
        return 0

    def gen_key(self, gen):
        """Algebra key of the generating state g_(-1)|0>."""
        raise NotImplementedError

    def twist(self, gen):
        return Fraction(0)

    def mode_coset(self, akey, wkey):
        """Fractional part shared by all mode indices n with a_(n) w possibly nonzero."""
        return Fraction(0)

    def parity(self, key) -> int:
        return 0

    def __eq__(self, other):
        return isinstance(other, Factor) and self.signature() == other.signature()

    def __hash__(self):
        return hash(self.signature())


# ---------------------------------------------------------------------------
# Heisenberg and lattice

class Cocycle:
    """Bimultiplicative sign on the lattice spanned by the listed labels.

    For i > j: eps(a_i, a_j) = (-1)^(<a_i,a_j> + <a_i,a_i><a_j,a_j>) in the
    standard convention, (-1)^<a_i,a_j> in the alternate one; 1 for i <= j.
    An empty label list gives the trivial cocycle.
    """

    def __init__(self, labels=(), convention: str = "standard"):
        self.labels = tuple(labels)
        if convention not in ("standard", "alternate"):
            raise FieldError(f"unknown cocycle convention {convention!r}")
        self.convention = convention

    def signature(self):
        return (self.labels, self.convention)

    @property
    def trivial(self) -> bool:
        return not self.labels

    def bilinear(self, gram: GramForm):
        idx = [gram.index[lab] for lab in self.labels]
        table = {}
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                if a <= b:
                    continue
                g = gram.matrix[i][j]
                if self.convention == "standard":
                    g = g + gram.matrix[i][i] * gram.matrix[j][j]
                table[(i, j)] = g
        return table

    def sign(self, gram: GramForm, alpha: tuple, beta: tuple) -> int:
        if self.trivial:
            return 1
        e = Fraction(0)
        for (i, j), g in self.bilinear(gram).items():
            if alpha[i] != 0 and beta[j] != 0 and g != 0:
                e = e + alpha[i] * beta[j] * g
        e = as_rational(e, "cocycle exponent")
        if e.denominator != 1:
            raise ModeError("cocycle undefined off the lattice")
        return _sign(int(e))


def _bos_insert(bos: tuple, item) -> tuple:
    lst = list(bos)
    lst.append(item)
    lst.sort(key=lambda t: (-t[0], t[1]))
    return tuple(lst)


def _bos_merge(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    lst = list(a) + list(b)
    lst.sort(key=lambda t: (-t[0], t[1]))
    return tuple(lst)


def _bos_counts(bos: tuple) -> list:
    out = []
    for item, grp in itertools.groupby(bos):
        out.append((item, len(list(grp))))
    return out


def _bos_remove(bos: tuple, item) -> tuple:
    lst = list(bos)
    lst.remove(item)
    return tuple(lst)


class HeisLattice(Factor):
    """Bosons on a Gram form with exponentials e^beta.

    Keys are (momentum, bosons): momentum is a coordinate tuple over the
    Gram labels and bosons a sorted tuple of (n, i) meaning label_i(-n).
    ``lattice`` lists generators used for basis enumeration and ``base`` is
    the momentum of the distinguished vector (zero for the vacuum module).
    """

    kind = "heisenberg-lattice"
    lattice_like = True

    def __init__(self, gram: GramForm, lattice=(), cocycle: Cocycle | None = None,
                 base=None, name: str = "H"):
        self.gram = gram
        self.lattice = tuple(gram.vector(v) for v in lattice)
        self.cocycle = cocycle or Cocycle()
        zero = tuple(Fraction(0) for _ in gram.labels)
        self.base = zero if base is None else gram.vector(base)
        self.zero = zero
        self.name = name
        self._schur: dict = {}
        self._alg = None

    def signature(self):
        return ("HL", self.gram.labels, self.gram.matrix, self.lattice, self.cocycle.signature(), self.base)

    @property
    def algebra(self) -> "HeisLattice":
        if all(x == 0 for x in self.base):
            return self
        if self._alg is None:
            self._alg = HeisLattice(self.gram, self.lattice, self.cocycle, None, self.name)
        return self._alg

    def with_base(self, base) -> "HeisLattice":
        return HeisLattice(self.gram, self.lattice, self.cocycle, base, self.name)

    def vacuum_key(self):
        return (self.zero, ())

    def top_key(self):
        return (self.base, ())

    def is_vacuum(self, key) -> bool:
        return not key[1] and all(x == 0 for x in key[0])

    def gen_key(self, gen):
        return (self.zero, ((1, gen[1]),))

    def parity(self, key) -> int:
        if self.cocycle.trivial:
            return 0
        rel = tuple(a - b for a, b in zip(key[0], self.base))
        x = as_rational(self.gram.norm(rel), "lattice norm")
        if x.denominator != 1:
            raise ModeError("parity undefined off the lattice")
        return int(x) % 2

    def level(self, key):
        return sum(n for n, _ in key[1])

    def excess(self, akey, wkey):
        return self.level(akey) + self.level(wkey) - self.gram.pair(akey[0], wkey[0])

    def mode_coset(self, akey, wkey):
        return as_rational(-self.gram.pair(akey[0], wkey[0]), "lattice pairing") % 1

    def act(self, gen, p, key) -> dict:
        i = gen[1]
        mom, bos = key
        p = as_rational(p, "boson mode")
        if p.denominator != 1:
            raise ModeError("boson modes are integers")
        m = int(p)
        if m < 0:
            return {(mom, _bos_insert(bos, (-m, i))): Fraction(1)}
        if m == 0:
            c = self.gram.pair_label(mom, i)
            return {key: c} if c != 0 else {}
        out: dict = {}
        for (n, j), e in _bos_counts(bos):
            if n == m:
                g = self.gram.matrix[i][j]
                if g != 0:
                    add_to(out, (mom, _bos_remove(bos, (n, j))), m * g * e)
        return out

    def peel(self, key):
        mom, bos = key
        if not bos:
            return None
        n, i = bos[0]
        return ("b", i), -n, (mom, bos[1:]), Fraction(1)

    def schur(self, alpha: tuple, c: int) -> dict:
        """Coefficient of z^c in exp(sum alpha(-j) z^j / j) as {bosons: coeff}."""
        ck = (alpha, c)
        if ck in self._schur:
            return self._schur[ck]
        if c == 0:
            res = {(): Fraction(1)}
        else:
            res: dict = {}
            for j in range(1, c + 1):
                prev = self.schur(alpha, c - j)
                for i, a in enumerate(alpha):
                    if a == 0:
                        continue
                    for b, v in prev.items():
                        add_to(res, _bos_insert(b, (j, i)), a * v / c)
        self._schur[ck] = res
        return res

    def exp_action(self, alpha: tuple, n, key) -> dict:
        """(e^alpha)_(n) applied to key."""
        beta, bos = key
        d = as_rational(-n - 1 - self.gram.pair(alpha, beta), "exponential mode shift")
        if d.denominator != 1:
            raise ModeError("mode index not in the coset of the target")
        d = int(d)
        eps = self.cocycle.sign(self.gram, alpha, tuple(b - o for b, o in zip(beta, self.base)))
        new_mom = tuple(a + b for a, b in zip(alpha, beta))
        groups = _bos_counts(bos)
        pairs = [self.gram.pair_label(alpha, item[1]) for item, _ in groups]
        out: dict = {}
        ranges = [range(e + 1) if pr != 0 else range(1) for (item, e), pr in zip(groups, pairs)]
        for choice in itertools.product(*ranges):
            shift = 0
            coeff = Fraction(eps)
            remaining = []
            for (item, e), pr, t in zip(groups, pairs, choice):
                if t:
                    coeff = coeff * binom(e, t) * (-pr) ** t
                    shift += t * item[0]
                remaining.extend([item] * (e - t))
            cdeg = d + shift
            if cdeg < 0:
                continue
            rem = tuple(remaining)
            for b, v in self.schur(alpha, cdeg).items():
                add_to(out, (new_mom, _bos_merge(rem, b)), coeff * v)
        return out

    def translate(self, key) -> dict:
        mom, bos = key
        out: dict = {}
        for (n, i), e in _bos_counts(bos):
            nb = _bos_insert(_bos_remove(bos, (n, i)), (n + 1, i))
            add_to(out, (mom, nb), Fraction(n * e))
        for i, x in enumerate(mom):
            if x != 0:
                add_to(out, (mom, _bos_insert(bos, (1, i))), x)
        return out

    def enumerate(self, max_level: int, charge_range=range(0, 1)):
        """Keys with boson level <= max_level over base + sum n_i * lattice_i."""
        moms = []
        for ns in itertools.product(charge_range, repeat=len(self.lattice)):
            m = list(self.base)
            for nval, g in zip(ns, self.lattice):
                for t in range(len(m)):
                    m[t] = m[t] + nval * g[t]
            moms.append((ns, tuple(m)))
        out = []
        for level in range(max_level + 1):
            for bos in colored_partitions(level, self.gram.rank):
                for ns, m in moms:
                    out.append((level, ns, (m, bos)))
        return out

    def render_key(self, key) -> str:
        mom, bos = key
        parts = [_render_mode(self.gram.labels[i], -n, e) for (n, i), e in _bos_counts(bos)]
        if any(x != 0 for x in mom):
            parts.append("e^{" + self.gram.render_vector(mom) + "}")
        return " ".join(parts)


def colored_partitions(level: int, colors: int):
    """Multisets of (part, color) with parts summing to level, as sorted tuples."""
    items = [(n, i) for n in range(level, 0, -1) for i in range(colors)]
    out = []

    def rec(start, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for idx in range(start, len(items)):
            n, i = items[idx]
            if n <= remaining:
                acc.append((n, i))
                rec(idx, remaining - n, acc)
                acc.pop()

    rec(0, level, [])
    return out


def _render_mode(name, mode, exp=1) -> str:
    m = mode if not isinstance(mode, Fraction) or mode.denominator != 1 else mode.numerator
    s = f"{name}({m})"
    return s if exp == 1 else f"{s}^{exp}"


class Whittaker(HeisLattice):
    """M(1) tensor C[d(0)] w_lam with c(0) = c0 and e^{nc} w = lam^n w.

    Keys are (bosons, j) for the state bosons * d(0)^j w_lam.  Only
    exponentials e^{nc}, n integer, act.
    """

    kind = "whittaker"

    def __init__(self, gram: GramForm, lam, c0=Fraction(-1), name: str = "W"):
        super().__init__(gram, (gram.names["c"],), Cocycle(), None, name)
        if lam == 0:
            raise FieldError("Whittaker parameter must be nonzero")
        self.lam = lam
        self.c0 = c0
        self.cvec = gram.names["c"]
        self.dvec = gram.names["d"]
        self._alg = HeisLattice(gram, (self.cvec,), Cocycle(), None, name)

    def signature(self):
        return ("WH", self.gram.labels, self.gram.matrix, self.lam, self.c0)

    @property
    def algebra(self) -> HeisLattice:
        return self._alg

    def vacuum_key(self):
        return ((), 0)

    def top_key(self):
        return ((), 0)

    def is_vacuum(self, key) -> bool:
        return False

    def level(self, key):
        return sum(n for n, _ in key[0])

    def _c_multiple(self, alpha: tuple):
        # alpha = t * c  iff  <alpha, c> = 0 and alpha proportional to c
        t = None
        for a, c in zip(alpha, self.cvec):
            if c != 0:
                t = a / c
                break
        if t is None:
            t = Fraction(0)
        if any(a != t * c for a, c in zip(alpha, self.cvec)):
            raise ModeError("only multiples of c act on a Whittaker module")
        return t

    def excess(self, akey, wkey):
        t = self._c_multiple(akey[0])
        return sum(n for n, _ in akey[1]) + self.level(wkey) - t * self.c0

    def mode_coset(self, akey, wkey):
        return as_rational(self.excess(akey, wkey), "Whittaker excess") % 1

    def _zero_mode(self, i: int):
        """label_i(0) = x c(0) + y d(0) with x = <label_i,d>/2, y = <label_i,c>/2."""
        x = self.gram.pair_label(self.dvec, i) / 2
        y = self.gram.pair_label(self.cvec, i) / 2
        return x, y

    def act(self, gen, p, key) -> dict:
        i = gen[1]
        bos, j = key
        p = as_rational(p, "boson mode")
        if p.denominator != 1:
            raise ModeError("boson modes are integers")
        m = int(p)
        if m < 0:
            return {(_bos_insert(bos, (-m, i)), j): Fraction(1)}
        if m == 0:
            x, y = self._zero_mode(i)
            out: dict = {}
            add_to(out, key, x * self.c0)
            add_to(out, (bos, j + 1), y)
            return out
        out = {}
        for (n, jj), e in _bos_counts(bos):
            if n == m:
                g = self.gram.matrix[i][jj]
                if g != 0:
                    add_to(out, (_bos_remove(bos, (n, jj)), j), m * g * e)
        return out

    def exp_action(self, alpha: tuple, n, key) -> dict:
        t = self._c_multiple(alpha)
        t = as_rational(t, "exponential charge")
        if t.denominator != 1:
            raise ModeError("only integer multiples of c act on a Whittaker module")
        bos, jdeg = key
        d = as_rational(-n - 1 - t * self.c0, "exponential mode shift")
        if d.denominator != 1:
            raise ModeError("mode index not in the coset of the target")
        d = int(d)
        groups = _bos_counts(bos)
        pairs = [self.gram.pair_label(alpha, item[1]) for item, _ in groups]
        lam_pow = self.lam ** int(t) if t >= 0 else (1 / self.lam) ** int(-t)
        # (d(0) - 2t)^jdeg
        shifted = {s: binom(jdeg, s) * (-2 * t) ** (jdeg - s) for s in range(jdeg + 1)}
        out: dict = {}
        ranges = [range(e + 1) if pr != 0 else range(1) for (item, e), pr in zip(groups, pairs)]
        for choice in itertools.product(*ranges):
            shift = 0
            coeff = lam_pow
            remaining = []
            for (item, e), pr, tt in zip(groups, pairs, choice):
                if tt:
                    coeff = coeff * binom(e, tt) * (-pr) ** tt
                    shift += tt * item[0]
                remaining.extend([item] * (e - tt))
            cdeg = d + shift
            if cdeg < 0:
                continue
            rem = tuple(remaining)
            for b, v in self.schur(alpha, cdeg).items():
                nb = _bos_merge(rem, b)
                for s, cs in shifted.items():
                    if cs != 0:
                        add_to(out, (nb, s), coeff * v * cs)
        return out

    def translate(self, key) -> dict:
        bos, j = key
        out: dict = {}
        for (n, i), e in _bos_counts(bos):
            nb = _bos_insert(_bos_remove(bos, (n, i)), (n + 1, i))
            add_to(out, (nb, j), Fraction(n * e))
        # zero-mode part: (1/2) c(-1) d(0) + (1/2) d(-1) c(0)
        for i, x in enumerate(self.cvec):
            if x != 0:
                add_to(out, (_bos_insert(bos, (1, i)), j + 1), x / 2)
        for i, x in enumerate(self.dvec):
            if x != 0:
                add_to(out, (_bos_insert(bos, (1, i)), j), x * self.c0 / 2)
        return out

    def enumerate(self, max_level: int, max_degree: int = 0):
        out = []
        for level in range(max_level + 1):
            for bos in colored_partitions(level, self.gram.rank):
                for j in range(max_degree + 1):
                    out.append((level, j, (bos, j)))
        return out

    def render_key(self, key) -> str:
        bos, j = key
        parts = [_render_mode(self.gram.labels[i], -n, e) for (n, i), e in _bos_counts(bos)]
        if j:
            parts.append("d(0)" if j == 1 else f"d(0)^{j}")
        parts.append("w")
        return " ".join(parts)


# ---------------------------------------------------------------------------
# Clifford

def _sort_fermions(seq):
    """Sort a list of fermion modes into canonical order; return (sign, tuple) or (0, None)."""
    lst = list(seq)
    if len(set(lst)) != len(lst):
        return 0, None
    sign = 1
    # bubble sort keeps track of the permutation sign
    n = len(lst)
    for a in range(n):
        for b in range(n - 1 - a):
            if _ferm_order(lst[b]) > _ferm_order(lst[b + 1]):
                lst[b], lst[b + 1] = lst[b + 1], lst[b]
                sign = -sign
    return sign, tuple(lst)


def _ferm_order(item):
    if isinstance(item, tuple):
        return (-item[0], item[1])
    return (-item,)


class Clifford(Factor):
    """Free fermions Psi_i.

    Neveu-Schwarz keys are sorted tuples of (r, i) for Psi_i(-r), r in 1/2+Z.
    The twisted sector (one fermion) has integer modes; keys are sorted tuples
    of n >= 1 for Psi(-n) applied to the top, where Psi(0) = sign/sqrt(2).
    """

    kind = "clifford"

    def __init__(self, n_fermions: int = 1, twisted: bool = False, zero_mode_sign: int = 1,
                 names=None):
        if twisted and n_fermions != 1:
            raise FieldError("twisted sector implemented for a single fermion")
        if zero_mode_sign not in (1, -1):
            raise FieldError("zero-mode sign must be +1 or -1")
        self.n = n_fermions
        self.twisted = twisted
        self.zsign = zero_mode_sign
        self.names = tuple(names) if names else (("Psi",) if n_fermions == 1 else tuple(f"Psi{i + 1}" for i in range(n_fermions)))
        self._alg = None
        if twisted:
            self.zero_value = zero_mode_sign * (1 / sqrt(Fraction(2)))

    def signature(self):
        return ("CL", self.n, self.twisted, self.zsign if self.twisted else 0)

    @property
    def algebra(self) -> "Clifford":
        if not self.twisted:
            return self
        if self._alg is None:
            self._alg = Clifford(self.n, False, 1, self.names)
        return self._alg

    def vacuum_key(self):
        return ()

    def gen_parity(self, gen) -> int:
        return 1

    def gen_key(self, gen):
        return ((HALF, gen[1]),)

    def twist(self, gen):
        return HALF if self.twisted else Fraction(0)

    def parity(self, key) -> int:
        return len(key) % 2

    def mode_coset(self, akey, wkey):
        # each twisted fermion in the field shifts its modes by 1/2
        return (HALF * len(akey)) % 1 if self.twisted else Fraction(0)

    def level(self, key):
        if self.twisted:
            return Fraction(sum(key))
        return sum((r for r, _ in key), Fraction(0))

    def excess(self, akey, wkey):
        return self.algebra.level(akey) + self.level(wkey)

    def act(self, gen, p, key) -> dict:
        i = gen[1]
        r = as_rational(p, "fermion mode") + HALF
        if self.twisted:
            if r.denominator != 1:
                raise ModeError("twisted fermion modes are integers")
            r = int(r)
            if r == 0:
                return {key: _sign(len(key)) * self.zero_value}
            if r < 0:
                if -r in key:
                    return {}
                sign, new = _sort_fermions((-r,) + key)
                return {new: Fraction(sign)}
            if r not in key:
                return {}
            pos = key.index(r)
            return {key[:pos] + key[pos + 1:]: Fraction(_sign(pos))}
        if r.denominator != 2:
            raise ModeError("Neveu-Schwarz fermion modes lie in 1/2 + Z")
        if r < 0:
            item = (-r, i)
            if item in key:
                return {}
            sign, new = _sort_fermions((item,) + key)
            return {new: Fraction(sign)}
        item = (r, i)
        if item not in key:
            return {}
        pos = key.index(item)
        return {key[:pos] + key[pos + 1:]: Fraction(_sign(pos))}

    def peel(self, key):
        if not key:
            return None
        r, i = key[0]
        return ("psi", i), -r - HALF, key[1:], Fraction(1)

    def translate(self, key) -> dict:
        out: dict = {}
        if self.twisted:
            for pos, n in enumerate(key):
                seq = list(key)
                seq[pos] = n + 1
                sign, new = _sort_fermions(seq)
                if sign:
                    add_to(out, new, sign * (Fraction(n) + HALF))
            # L(-1) top = (1/2) Psi(-1) Psi(0) top, placed right of the existing modes
            if 1 not in key:
                sign, new = _sort_fermions(key + (1,))
                add_to(out, new, sign * HALF * self.zero_value)
            return out
        for pos, (r, i) in enumerate(key):
            seq = list(key)
            seq[pos] = (r + 1, i)
            sign, new = _sort_fermions(seq)
            if sign:
                add_to(out, new, sign * (r + HALF))
        return out

    def enumerate(self, max_level):
        out = []
        if self.twisted:
            for level in range(int(max_level) + 1):
                for parts in distinct_partitions(level):
                    out.append((Fraction(level), parts))
            return out
        modes = []
        r = HALF
        while r <= max_level:
            for i in range(self.n):
                modes.append((r, i))
            r += 1
        for size in range(len(modes) + 1):
            for combo in itertools.combinations(modes, size):
                lvl = sum((m for m, _ in combo), Fraction(0))
                if lvl <= max_level:
                    _, key = _sort_fermions(combo)
                    out.append((lvl, key))
        out.sort(key=lambda t: (t[0], [(-m, i) for m, i in t[1]]))
        return out

    def render_key(self, key) -> str:
        if self.twisted:
            parts = [_render_mode(self.names[0], -n) for n in key]
            parts.append("top")
            return " ".join(parts)
        return " ".join(_render_mode(self.names[i], -r) for r, i in key)


def distinct_partitions(level: int):
    out = []

    def rec(maxpart, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for part in range(min(maxpart, remaining), 0, -1):
            acc.append(part)
            rec(part - 1, remaining - part, acc)
            acc.pop()

    rec(level, level, [])
    return out


# ---------------------------------------------------------------------------
# PBW factors: Virasoro highest weight, Neveu-Schwarz, commutative T

class PBWFactor(Factor):
    """Shared machinery for modules spanned by ordered monomials of modes.

    Subclasses provide ``_mul(gen, m, key)`` returning the normalized
    product gen(m) * key in the universal module, plus the generator data.
    """

    weights: dict = {}
    odd: frozenset = frozenset()

    def __init__(self):
        self._mul_cache: dict = {}
        self._translate_cache: dict = {}

    def gen_parity(self, gen) -> int:
        return 1 if gen[0] in self.odd else 0

    def reduce(self, vec: dict) -> dict:
        return vec

    def mul(self, gen, m, key) -> dict:
        ck = (gen, m, key)
        r = self._mul_cache.get(ck)
        if r is None:
            r = self._mul(gen, m, key)
            self._mul_cache[ck] = r
        return r

    def mul_vec(self, gen, m, vec: dict) -> dict:
        out: dict = {}
        for k, c in vec.items():
            for k2, c2 in self.mul(gen, m, k).items():
                add_to(out, k2, c * c2)
        return out

    def act(self, gen, p, key) -> dict:
        w = self.weights[gen[0]]
        m = as_rational(p, "mode") - (w - 1)
        return self.reduce(self.mul(gen, m, key))


class Virasoro(PBWFactor):
    """Virasoro module generated by a highest weight vector.

    Keys are weakly decreasing tuples (n1, ..., ns) for L(-n1)...L(-ns)v.
    ``vacuum`` imposes L(-1)v = 0 (keys then use n >= 2).  ``relations``
    are singular vectors {key: coeff} whose submodule is divided out level
    by level with exact Gaussian elimination.
    """

    kind = "virasoro-hw"
    weights = {"L": Fraction(2)}

    def __init__(self, c, h=Fraction(0), vacuum: bool | None = None, relations=(), name="v"):
        super().__init__()
        self.c = c
        self.h = h
        self.vacuum = (h == 0 and not relations) if vacuum is None else vacuum
        self.relations = tuple(dict(r) for r in relations)
        self.name = name
        self._sub: dict = {}
        self._alg = None
        for rel in self.relations:
            self._check_singular(rel)

    def signature(self):
        rel = tuple(tuple(sorted(r.items())) for r in self.relations)
        return ("VIR", self.c, self.h, self.vacuum, rel)

    @property
    def algebra(self) -> "Virasoro":
        if self.vacuum and self.h == 0 and not self.relations:
            return self
        if self._alg is None:
            self._alg = Virasoro(self.c, Fraction(0), True)
        return self._alg

    def vacuum_key(self):
        return ()

    def gen_key(self, gen):
        return (2,)

    def level(self, key):
        return sum(key)

    def excess(self, akey, wkey):
        return self.algebra.level(akey) + self.level(wkey)

    def peel(self, key):
        if not key:
            return None
        return ("L",), 1 - key[0], key[1:], Fraction(1)

    def _mul(self, gen, m, key) -> dict:
        m = Fraction(m)
        if not key:
            if m > 0:
                return {}
            if m == 0:
                return {(): self.h} if self.h != 0 else {}
            if m == -1 and self.vacuum:
                return {}
            return {(int(-m),): Fraction(1)}
        n1 = key[0]
        rest = key[1:]
        if m < 0 and -m >= n1:
            return {(int(-m),) + key: Fraction(1)}
        out: dict = {}
        inner = self.mul(gen, m, rest)
        for k2, c2 in inner.items():
            for k3, c3 in self.mul(gen, Fraction(-n1), k2).items():
                add_to(out, k3, c2 * c3)
        coef = m + n1
        if coef != 0:
            for k2, c2 in self.mul(gen, m - n1, rest).items():
                add_to(out, k2, coef * c2)
        if m == n1:
            add_to(out, rest, self.c * (m ** 3 - m) / 12)
        return out

    def translate(self, key) -> dict:
        return self.reduce(self.mul(("L",), Fraction(-1), key))

    # quotient --------------------------------------------------------------
    def _check_singular(self, rel: dict):
        for m in (1, 2):
            img = self.mul_vec(("L",), Fraction(m), rel)
            if img:
                raise FieldError("declared relation is not a singular vector")
        levels = {sum(k) for k in rel}
        if len(levels) != 1:
            raise FieldError("relation must have a definite level")

    def _submodule(self, level: int):
        """Echelon rows (pivot, vector) spanning the relation submodule at a level."""
        if level in self._sub:
            return self._sub[level]
        vecs = []
        for rel in self.relations:
            lr = sum(next(iter(rel)))
            if lr > level:
                continue
            for part in partitions(level - lr):
                v = dict(rel)
                for n in reversed(part):
                    v = self.mul_vec(("L",), Fraction(-n), v)
                if v:
                    vecs.append(v)
        rows = echelon(vecs, order=_pbw_order)
        self._sub[level] = rows
        return rows

    def reduce(self, vec: dict) -> dict:
        if not self.relations or not vec:
            return vec
        by_level: dict = {}
        for k, c in vec.items():
            by_level.setdefault(sum(k), {})[k] = c
        out: dict = {}
        for level, v in by_level.items():
            for k, c in reduce_by(v, self._submodule(level), _pbw_order).items():
                out[k] = c
        return out

    def enumerate(self, max_level: int):
        out = []
        for level in range(max_level + 1):
            rows = self._submodule(level) if self.relations else []
            pivots = {p for p, _ in rows}
            for part in partitions(level):
                if self.vacuum and part and part[-1] == 1:
                    continue
                if part in pivots:
                    continue
                out.append((level, part))
        return out

    def render_key(self, key) -> str:
        parts = [_render_mode("L", -n, e) for n, e in _run_lengths(key)]
        if not (self.vacuum and self.h == 0):
            parts.append(f"v[{render(self.h)}]")
        return " ".join(parts)


def _run_lengths(key):
    return [(k, len(list(g))) for k, g in itertools.groupby(key)]


def _pbw_order(key):
    return key


def partitions(n: int):
    """Partitions of n as weakly decreasing tuples."""
    out = []

    def rec(maxpart, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for part in range(min(maxpart, remaining), 0, -1):
            acc.append(part)
            rec(part, remaining - part, acc)
            acc.pop()

    rec(n, n, [])
    return out


def echelon(vecs, order=lambda k: k):
    """Reduced echelon rows [(pivot, vec)] with pivot = largest key in ``order``."""
    rows: list = []
    for v in vecs:
        v = reduce_by(v, rows, order)
        if not v:
            continue
        pivot = max(v, key=order)
        inv = 1 / v[pivot]
        v = {k: c * inv for k, c in v.items()}
        new_rows = []
        for p, r in rows:
            if pivot in r:
                f = r[pivot]
                r = dict(r)
                for k, c in v.items():
                    add_to(r, k, -f * c)
            new_rows.append((p, r))
        new_rows.append((pivot, v))
        rows = new_rows
    return rows


def reduce_by(v: dict, rows, order=lambda k: k) -> dict:
    v = dict(v)
    for p, r in rows:
        if p in v:
            f = v[p]
            for k, c in r.items():
                add_to(v, k, -f * c)
    return v


class NeveuSchwarz(PBWFactor):
    """Vacuum module of the Neveu-Schwarz algebra, universal or critical.

    Keys are tuples of (kind, n) for X(-n), kind in {"L", "G"} (universal)
    or {"T", "G"} (critical, T central), ordered by decreasing n with even
    generators first on ties.  ``fermionic=False`` drops G and gives the
    commutative algebra C[T(-n), n >= 2].
    """

    kind = "ns"

    def __init__(self, c=Fraction(0), critical: bool = False, fermionic: bool = True, C=Fraction(-3)):
        super().__init__()
        self.c = c
        self.critical = critical
        self.fermionic = fermionic
        self.C = C
        self.even = "T" if critical else "L"
        self.weights = {self.even: Fraction(2), "G": Fraction(3, 2)}
        self.odd = frozenset({"G"})
        if not critical and not fermionic:
            raise FieldError("the commutative algebra is the critical bosonic case")
        self.kind = ("ns-critical" if fermionic else "commutative-T") if critical else "ns-universal"

    def signature(self):
        return ("NS", self.c, self.critical, self.fermionic, self.C)

    def vacuum_key(self):
        return ()

    def gen_key(self, gen):
        return ((gen[0], self.weights[gen[0]]),)

    def parity(self, key) -> int:
        return sum(1 for g, _ in key if g == "G") % 2

    def level(self, key):
        return sum((n for _, n in key), Fraction(0))

    def excess(self, akey, wkey):
        return self.level(akey) + self.level(wkey)

    def peel(self, key):
        if not key:
            return None
        g, n = key[0]
        return (g,), -n + self.weights[g] - 1, key[1:], Fraction(1)

    @staticmethod
    def _order(item):
        g, n = item
        return (-n, 0 if g != "G" else 1)

    def _bracket(self, x: str, m, y: str, n):
        """[x(m), y(n)} as ([(coeff, gen, mode)], central scalar)."""
        if self.critical:
            if x == "T" or y == "T":
                return [], Fraction(0)
            # {G(r), G(s)} = 2T(r+s) + ((r^2 - 1/4)/3) C delta
            cen = (m * m - Fraction(1, 4)) / 3 * self.C if m + n == 0 else Fraction(0)
            return [(Fraction(2), "T", m + n)], cen
        if x == "L" and y == "L":
            cen = self.c * (m ** 3 - m) / 12 if m + n == 0 else Fraction(0)
            return [(m - n, "L", m + n)], cen
        if x == "L" and y == "G":
            return [(m / 2 - n, "G", m + n)], Fraction(0)
        if x == "G" and y == "L":
            return [(-(n / 2 - m), "G", m + n)], Fraction(0)
        cen = self.c / 3 * (m * m - Fraction(1, 4)) if m + n == 0 else Fraction(0)
        return [(Fraction(2), "L", m + n)], cen

    def _creation(self, g: str, m) -> bool:
        return m < 1 - self.weights[g]

    def _mul(self, gen, m, key) -> dict:
        g = gen[0]
        m = Fraction(m)
        if not self.fermionic and g == "G":
            raise FieldError("no odd generators in the commutative algebra")
        if not key:
            if not self._creation(g, m):
                return {}
            return {((g, -m),): Fraction(1)}
        if g == "T":
            if not self._creation(g, m):
                return {}
            item = (g, -m)
            lst = sorted(key + (item,), key=self._order)
            return {tuple(lst): Fraction(1)}
        first = key[0]
        rest = key[1:]
        y, n1 = first
        if self._creation(g, m):
            item = (g, -m)
            if self._order(item) < self._order(first) or (item == first and g != "G"):
                return {(item,) + key: Fraction(1)}
            if item == first:
                # G(-n)^2 = (1/2){G(-n), G(-n)}
                terms, cen = self._bracket("G", m, "G", m)
                out: dict = {}
                for coeff, z, mode in terms:
                    for k2, c2 in self.mul((z,), mode, rest).items():
                        add_to(out, k2, coeff * c2 / 2)
                if cen != 0:
                    add_to(out, rest, cen / 2)
                return out
        sigma = -1 if (g == "G" and y == "G") else 1
        out = {}
        for k2, c2 in self.mul(gen, m, rest).items():
            for k3, c3 in self.mul((y,), -n1, k2).items():
                add_to(out, k3, sigma * c2 * c3)
        terms, cen = self._bracket(g, m, y, -n1)
        for coeff, z, mode in terms:
            if coeff == 0:
                continue
            for k2, c2 in self.mul((z,), mode, rest).items():
                add_to(out, k2, coeff * c2)
        if cen != 0:
            add_to(out, rest, cen)
        return out

    def translate(self, key) -> dict:
        r = self._translate_cache.get(key)
        if r is not None:
            return r
        out: dict = {}
        if key:
            g, n = key[0]
            rest = key[1:]
            w = self.weights[g]
            m = -n
            # [D, X(m)] = (1 - w - m) X(m - 1)
            coef = 1 - w - m
            for k2, c2 in self.mul((g,), m - 1, rest).items():
                add_to(out, k2, coef * c2)
            for k2, c2 in self.translate(rest).items():
                for k3, c3 in self.mul((g,), m, k2).items():
                    add_to(out, k3, c2 * c3)
        self._translate_cache[key] = out
        return out

    def enumerate(self, max_level):
        gens = []
        n = Fraction(2)
        while n <= max_level:
            gens.append((self.even, n))
            n += 1
        if self.fermionic:
            r = Fraction(3, 2)
            while r <= max_level:
                gens.append(("G", r))
                r += 1
        gens.sort(key=self._order)
        out = []

        def rec(start, remaining, acc):
            out.append((max_level - remaining, tuple(acc)))
            for idx in range(start, len(gens)):
                g, n = gens[idx]
                if n <= remaining:
                    acc.append((g, n))
                    rec(idx + (1 if g == "G" else 0), remaining - n, acc)
                    acc.pop()

        rec(0, Fraction(max_level), [])
        out.sort(key=lambda t: (t[0], [self._order(i) for i in t[1]]))
        return out

    def render_key(self, key) -> str:
        parts = []
        for (g, n), e in _run_lengths(key):
            parts.append(_render_mode(g, -n, e))
        return " ".join(parts)


def virasoro_vacuum(c) -> Virasoro:
    return Virasoro(c, Fraction(0), True)
