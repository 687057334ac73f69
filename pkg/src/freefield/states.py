"""Tensor-product spaces, states, and the state literal grammar.

Grammar (one tensor factor per ``⊗``-separated slot)::

    state    := term (("+" | "-") term)* | "0"
    term     := [coeff] monomial
    coeff    := "(" scalar ")" | integer
    monomial := slot ("⊗" slot)*
    slot     := "|0>" | atom+
    atom     := NAME "(" mode ")" ["^" integer]     boson, fermion, L, G or T mode
              | "e^{" vector "}"                     lattice exponential
              | "v[" scalar "]"                      highest weight vector
              | "top[+]" | "top[-]"                  twisted fermion top
              | "d(0)" ["^" integer] | "w"           Whittaker generator

Examples: ``mu(-1)^2 nu(-2) e^{(-1)mu + c}``, ``Psi(-3/2) Psi(-1/2) ⊗ |0>``,
``L(-2) v[(1/2)]``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .fields import FieldError, parse_scalar, render, scalar_eval
from .spaces import (Clifford, Factor, HeisLattice, ModeError, NeveuSchwarz, Virasoro,
                     Whittaker, _bos_insert, _sort_fermions, _sign, add_to)

TENSOR = " ⊗ "


class Space:
    """Ordered tensor product of factors with Koszul signs."""

    def __init__(self, factors, name: str = ""):
        self.factors = tuple(factors)
        if not self.factors:
            raise FieldError("a space needs at least one factor")
        self.name = name
        self._sig = tuple(f.signature() for f in self.factors)
        self.caches: dict = {}
        self._alg = None

    def signature(self):
        return self._sig

    def __eq__(self, other):
        return isinstance(other, Space) and self._sig == other._sig

    def __hash__(self):
        return hash(self._sig)

    def __repr__(self):
        return f"Space({self.name or [f.kind for f in self.factors]})"

    @property
    def algebra(self) -> "Space":
        if self._alg is None:
            algs = tuple(f.algebra for f in self.factors)
            if all(a is f for a, f in zip(algs, self.factors)):
                self._alg = self
            else:
                self._alg = Space(algs, self.name + ".alg" if self.name else "")
        return self._alg

    @property
    def is_algebra(self) -> bool:
        return self.algebra is self

    def cache_for(self, algebra: "Space") -> dict:
        c = self.caches.get(algebra._sig)
        if c is None:
            c = self.caches[algebra._sig] = {}
        return c

    def vacuum_key(self):
        return tuple(f.vacuum_key() for f in self.factors)

    def top_key(self):
        return tuple(f.top_key() for f in self.factors)

    def is_vacuum(self, key) -> bool:
        return all(f.is_vacuum(k) for f, k in zip(self.factors, key))

    def parity(self, key) -> int:
        return sum(f.parity(k) for f, k in zip(self.factors, key)) % 2

    def excess(self, akey, wkey):
        return sum((f.excess(a, w) for f, a, w in zip(self.factors, akey, wkey)), Fraction(0))

    def mode_coset(self, akey, wkey):
        return sum((f.mode_coset(a, w) for f, a, w in zip(self.factors, akey, wkey)), Fraction(0)) % 1

    def lattice_index(self):
        for i, f in enumerate(self.factors):
            if f.lattice_like:
                return i
        return None

    def act(self, i: int, gen, p, key) -> dict:
        """gen_(p) on factor i, with the Koszul sign for crossing factors 0..i-1."""
        f = self.factors[i]
        res = f.act(gen, p, key[i])
        if not res:
            return {}
        sign = 1
        if f.gen_parity(gen):
            sign = _sign(sum(self.factors[j].parity(key[j]) for j in range(i)))
        pre, post = key[:i], key[i + 1:]
        return {pre + (k,) + post: sign * c for k, c in res.items()}

    def peel(self, key):
        """Split an algebra key as sign * gen_(p) rest; None for exponentials and vacuum."""
        for i, f in enumerate(self.factors):
            pl = f.peel(key[i])
            if pl is None:
                continue
            gen, p, rest_i, coeff = pl
            rest = key[:i] + (rest_i,) + key[i + 1:]
            if f.gen_parity(gen):
                coeff = coeff * _sign(sum(self.factors[j].parity(key[j]) for j in range(i)))
            return i, gen, p, rest, coeff
        return None

    def gen_key(self, i: int, gen):
        vac = list(self.vacuum_key())
        vac[i] = self.factors[i].gen_key(gen)
        return tuple(vac)

    def translate(self, key) -> dict:
        out: dict = {}
        for i, f in enumerate(self.factors):
            for k, c in f.translate(key[i]).items():
                add_to(out, key[:i] + (k,) + key[i + 1:], c)
        return out

    def weight(self, key):
        return sum((factor_weight(f, k) for f, k in zip(self.factors, key)), Fraction(0))

    # states ---------------------------------------------------------------
    def state(self, terms) -> "State":
        return State(self, terms)

    def vacuum(self) -> "State":
        return State(self, {self.vacuum_key(): Fraction(1)})

    def top(self) -> "State":
        return State(self, {self.top_key(): Fraction(1)})

    def zero(self) -> "State":
        return State(self, {})

    def render_key(self, key) -> str:
        parts = []
        for f, k in zip(self.factors, key):
            s = render_factor_key(f, k)
            parts.append(s if s else "|0>")
        return TENSOR.join(parts)

    def parse_key(self, text: str):
        slots = [s.strip() for s in text.split("⊗")]
        if len(slots) != len(self.factors):
            raise FieldError(f"expected {len(self.factors)} tensor slots in {text!r}")
        return tuple(parse_factor_key(f, s) for f, s in zip(self.factors, slots))

    def parse(self, text: str) -> "State":
        return State.parse(self, text)


def factor_weight(f: Factor, key):
    """Standard conformal weight of a basis key."""
    if isinstance(f, Whittaker):
        return Fraction(f.level(key))
    if isinstance(f, HeisLattice):
        return f.level(key) + f.gram.norm(key[0]) / 2
    if isinstance(f, Clifford):
        return f.level(key) + (Fraction(1, 16) if f.twisted else 0)
    if isinstance(f, Virasoro):
        return f.h + f.level(key)
    return f.level(key)


# ---------------------------------------------------------------------------

class State:
    """Finite linear combination of basis keys of a space."""

    __slots__ = ("space", "terms")

    def __init__(self, space: Space, terms=None):
        self.space = space
        clean = {}
        for k, c in (terms or {}).items():
            if c != 0:
                clean[k] = c
        self.terms = clean

    def _same(self, other: "State"):
        if other.space != self.space:
            raise FieldError("states live in different spaces")

    def __add__(self, other: "State") -> "State":
        self._same(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            add_to(out, k, c)
        return State(self.space, out)

    def __sub__(self, other: "State") -> "State":
        return self + other * -1

    def __neg__(self):
        return self * -1

    def __mul__(self, c) -> "State":
        if isinstance(c, State):
            raise TypeError("use nth_product for products of states")
        if c == 0:
            return State(self.space, {})
        return State(self.space, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, c) -> "State":
        return self * (1 / c)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.terms
        return isinstance(other, State) and self.space == other.space and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def coefficient(self, key):
        return self.terms.get(key, Fraction(0))

    def evaluate(self, assignments) -> "State":
        return State(self.space, {k: scalar_eval(c, assignments) for k, c in self.terms.items()})

    def map_coefficients(self, fn) -> "State":
        return State(self.space, {k: fn(c) for k, c in self.terms.items()})

    def weights(self) -> set:
        return {self.space.weight(k) for k in self.terms}

    def parity(self) -> int | None:
        ps = {self.space.parity(k) for k in self.terms}
        return ps.pop() if len(ps) == 1 else None

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: self.space.render_key(kv[0]))

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, c in self.sorted_items():
            parts.append(f"{_coeff_text(c)} {self.space.render_key(k)}")
        return " + ".join(parts)

    __str__ = render

    def __repr__(self):
        return f"State<{self.render()}>"

    @staticmethod
    def parse(space: Space, text: str) -> "State":
        text = text.strip()
        if text == "0":
            return State(space, {})
        out: dict = {}
        for sign, coeff_text, mono in _split_terms(text):
            c = parse_scalar(coeff_text) if coeff_text else Fraction(1)
            add_to(out, space.parse_key(mono), sign * c)
        return State(space, out)


def _coeff_text(c) -> str:
    t = render(c)
    return t if t.startswith("(") and _balanced_group(t) else f"({t})"


def _balanced_group(t: str) -> bool:
    depth = 0
    for i, ch in enumerate(t):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0 and i < len(t) - 1:
            return False
    return True


def _split_terms(text: str):
    """Yield (sign, coefficient text, monomial text) for a rendered state."""
    i, n = 0, len(text)
    while i < n:
        sign = 1
        while i < n and text[i] in " +-":
            if text[i] == "-":
                sign = -sign
            i += 1
        coeff = ""
        if i < n and text[i] == "(":
            depth, j = 0, i
            while j < n:
                if text[j] == "(":
                    depth += 1
                elif text[j] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            # a coefficient group is followed by whitespace, a mode atom is not
            if j + 1 < n and text[j + 1] == " ":
                coeff = text[i:j + 1]
                i = j + 2
        elif i < n and text[i].isdigit():
            j = i
            while j < n and (text[j].isdigit() or text[j] == "/"):
                j += 1
            coeff = text[i:j]
            i = j
        # monomial runs until a top-level " + " or " - "
        depth, j = 0, i
        while j < n:
            ch = text[j]
            if ch in "({[":
                depth += 1
            elif ch in ")}]":
                depth -= 1
            elif depth == 0 and ch in "+-" and j > 0 and text[j - 1] == " " and j + 1 < n and text[j + 1] == " ":
                break
            j += 1
        yield sign, coeff, text[i:j].strip()
        i = j


# ---------------------------------------------------------------------------
# per-factor rendering and parsing

def _mode_text(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _atom(name, mode, exp=1):
    s = f"{name}({_mode_text(mode)})"
    return s if exp == 1 else f"{s}^{exp}"


def _runs(seq):
    out = []
    for item in seq:
        if out and out[-1][0] == item:
            out[-1][1] += 1
        else:
            out.append([item, 1])
    return out


def render_factor_key(f: Factor, key) -> str:
    if isinstance(f, Whittaker):
        bos, j = key
        parts = [_atom(f.gram.labels[i], -n, e) for (n, i), e in _runs(bos)]
        if j:
            parts.append("d(0)" if j == 1 else f"d(0)^{j}")
        parts.append("w")
        return " ".join(parts)
    if isinstance(f, HeisLattice):
        mom, bos = key
        parts = [_atom(f.gram.labels[i], -n, e) for (n, i), e in _runs(bos)]
        if any(x != 0 for x in mom):
            terms = []
            for lab, x in zip(f.gram.labels, mom):
                if x != 0:
                    terms.append(lab if x == 1 else f"({render(x)}){lab}")
            parts.append("e^{" + " + ".join(terms) + "}")
        return " ".join(parts)
    if isinstance(f, Clifford):
        if f.twisted:
            parts = [_atom(f.names[0], -n) for n in key]
            parts.append("top[+]" if f.zsign > 0 else "top[-]")
            return " ".join(parts)
        return " ".join(_atom(f.names[i], -r) for r, i in key)
    if isinstance(f, Virasoro):
        parts = [_atom("L", -n, e) for n, e in _runs(key)]
        if not (f.vacuum and f.h == 0):
            parts.append(f"v[({render(f.h)})]")
        return " ".join(parts)
    if isinstance(f, NeveuSchwarz):
        return " ".join(_atom(g, -n, e) for (g, n), e in _runs(key))
    raise FieldError(f"no rendering for factor {f.kind}")


_ATOM = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)\((-?\d+(?:/\d+)?)\)(?:\^(\d+))?")


def _tokens(text: str):
    i, n = 0, len(text)
    while i < n:
        if text[i] == " ":
            i += 1
            continue
        if text.startswith("|0>", i):
            yield ("vac",)
            i += 3
            continue
        if text.startswith("e^{", i):
            depth, j = 0, i + 2
            while j < n:
                if text[j] == "{":
                    depth += 1
                elif text[j] == "}":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            yield ("exp", text[i + 3:j])
            i = j + 1
            continue
        if text.startswith("v[", i):
            j = text.index("]", i)
            yield ("hw", text[i + 2:j])
            i = j + 1
            continue
        if text.startswith("top[", i):
            yield ("top", text[i + 4])
            i += 6
            continue
        if text.startswith("w", i) and (i + 1 == n or text[i + 1] == " "):
            yield ("w",)
            i += 1
            continue
        m = _ATOM.match(text, i)
        if not m:
            raise FieldError(f"cannot parse state atom at {text[i:]!r}")
        yield ("mode", m.group(1), Fraction(m.group(2)), int(m.group(3) or 1))
        i = m.end()


def parse_factor_key(f: Factor, text: str):
    toks = [t for t in _tokens(text) if t[0] != "vac"]
    if isinstance(f, Whittaker):
        bos, j = (), 0
        for t in toks:
            if t[0] == "mode" and t[1] == "d" and t[2] == 0:
                j += t[3]
            elif t[0] == "mode":
                for _ in range(t[3]):
                    bos = _bos_insert(bos, (int(-t[2]), f.gram.index[t[1]]))
        return (bos, j)
    if isinstance(f, HeisLattice):
        mom, bos = f.zero, ()
        for t in toks:
            if t[0] == "exp":
                mom = f.gram.parse_vector(t[1])
            elif t[0] == "mode":
                for _ in range(t[3]):
                    bos = _bos_insert(bos, (int(-t[2]), f.gram.index[t[1]]))
        return (mom, bos)
    if isinstance(f, Clifford):
        seq = []
        for t in toks:
            if t[0] != "mode":
                continue
            if t[3] != 1:
                return None
            if f.twisted:
                seq.append(int(-t[2]))
            else:
                seq.append((-t[2], f.names.index(t[1])))
        sign, key = _sort_fermions(seq)
        if sign != 1:
            raise FieldError("fermion modes must be written in canonical order")
        return key
    if isinstance(f, Virasoro):
        seq = []
        for t in toks:
            if t[0] == "mode":
                seq.extend([int(-t[2])] * t[3])
        return tuple(sorted(seq, reverse=True))
    if isinstance(f, NeveuSchwarz):
        seq = []
        for t in toks:
            if t[0] == "mode":
                seq.extend([(t[1], -t[2])] * t[3])
        return tuple(sorted(seq, key=NeveuSchwarz._order))
    raise FieldError(f"no parser for factor {f.kind}")
