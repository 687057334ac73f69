"""Exact coefficient arithmetic.

Scalars live in a tower built from the rationals by adjoining transcendental
symbols (``k``, ``lam``, ...) and square roots.  Three concrete types carry
the values and every result is demoted to the smallest one that holds it:

* ``Fraction`` for plain rationals,
* ``RatFunc`` for a univariate rational function whose coefficients are
  values of the layers below (symbols are ordered by registration),
* ``Alg`` for elements of the multi-quadratic extension generated by
  square roots.

Square roots are decomposed into independent atoms before use: ``i``,
square roots of primes and square roots of primitive squarefree
polynomials.  Because these atoms are linearly independent over the
rational-function field, writing an element in the basis of atom
monomials is canonical and zero testing is exact.  The nested pair
``a + b*s`` of a single quadratic layer is recovered by splitting along
any atom.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Union

__all__ = [
    "Fraction", "RatFunc", "Alg", "Scalar", "PoleError", "FieldError",
    "symbol", "sqrt", "qq", "is_zero", "is_rational", "as_fraction",
    "scalar_eval", "render", "parse_scalar", "symbols_of", "FieldSpec",
    "FieldHandle", "field_make", "conjugate",
]


class PoleError(ZeroDivisionError):
    """Evaluation hit a zero of a stored denominator."""


class FieldError(ValueError):
    pass


# ---------------------------------------------------------------------------
# symbol registry

_SYMBOLS: list[str] = []
_SYMBOL_INDEX: dict[str, int] = {}


def _register(name: str) -> int:
    if name not in _SYMBOL_INDEX:
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name) or name in ("i", "sqrt"):
            raise FieldError(f"bad symbol name {name!r}")
        _SYMBOL_INDEX[name] = len(_SYMBOLS)
        _SYMBOLS.append(name)
    return _SYMBOL_INDEX[name]


for _name in ("k", "lam", "p", "q"):
    _register(_name)


def qq(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to a rational")


def _level(x) -> int:
    if isinstance(x, RatFunc):
        return x.var
    return -1


# ---------------------------------------------------------------------------
# dense univariate polynomials over a coefficient field (tuples, low -> high)

def _trim(a: list) -> tuple:
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def _padd(a: tuple, b: tuple) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = out[i] + c
    return _trim(out)


def _psub(a: tuple, b: tuple) -> tuple:
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] = out[i] - c
    return _trim(out)


def _pmul(a: tuple, b: tuple) -> tuple:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y == 0:
                continue
            out[i + j] = out[i + j] + x * y
    return _trim(out)


def _pscale(a: tuple, c) -> tuple:
    if c == 0:
        return ()
    return _trim([x * c for x in a])


def _pdivmod(a: tuple, b: tuple) -> tuple[tuple, tuple]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    db = len(b) - 1
    inv = 1 / qq(b[-1]) if not isinstance(b[-1], (RatFunc, Alg)) else 1 / b[-1]
    if len(r) - 1 < db:
        return (), tuple(r)
    quo = [0] * (len(r) - db)
    for i in range(len(r) - 1 - db, -1, -1):
        c = r[i + db]
        if c == 0:
            continue
        c = c * inv
        quo[i] = c
        for j in range(db + 1):
            r[i + j] = r[i + j] - c * b[j]
    return _trim(quo), _trim(r[:db])


def _pmonic(a: tuple) -> tuple:
    lc = a[-1]
    if lc == 1:
        return a
    inv = 1 / qq(lc) if not isinstance(lc, RatFunc) else 1 / lc
    return tuple(x * inv for x in a)


def _pgcd(a: tuple, b: tuple) -> tuple:
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    if not a:
        return ()
    return _pmonic(a)


def _peval(a: tuple, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _pderiv(a: tuple) -> tuple:
    return _trim([a[i] * i for i in range(1, len(a))])


def _norm_coeff(c):
    if isinstance(c, int):
        return Fraction(c)
    return c


# ---------------------------------------------------------------------------
# rational functions

def _foreign(x) -> bool:
    return not isinstance(x, (int, Fraction, RatFunc, Alg))


class RatFunc:
    """A reduced fraction num/den of polynomials in one symbol with monic den."""

    __slots__ = ("var", "num", "den", "_hash")

    def __init__(self, var: int, num: tuple, den: tuple):
        self.var = var
        self.num = num
        self.den = den
        self._hash = None

    # construction -------------------------------------------------------
    @staticmethod
    def make(var: int, num: tuple, den: tuple, reduced: bool = False):
        num = _trim([_norm_coeff(c) for c in num])
        den = _trim([_norm_coeff(c) for c in den])
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return Fraction(0)
        if not reduced and len(den) > 1 and len(num) > 1:
            g = _pgcd(num, den)
            if len(g) > 1:
                num, _ = _pdivmod(num, g)
                den, _ = _pdivmod(den, g)
        lc = den[-1]
        if lc != 1:
            inv = 1 / lc
            num = tuple(c * inv for c in num)
            den = tuple(c * inv for c in den)
        if len(den) == 1 and len(num) == 1:
            return num[0]
        return RatFunc(var, num, den)

    @staticmethod
    def gen(var: int) -> "RatFunc":
        return RatFunc(var, (Fraction(0), Fraction(1)), (Fraction(1),))

    # helpers --------------------------------------------------------------
    def _coerce(self, other):
        """Return (self_num, self_den, other_num, other_den) in self.var."""
        if isinstance(other, RatFunc) and other.var == self.var:
            return other.num, other.den
        return (other,), (Fraction(1),)

    def is_polynomial(self) -> bool:
        return len(self.den) == 1

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if _foreign(other):
            return NotImplemented
        if isinstance(other, Alg):
            return NotImplemented
        if isinstance(other, int):
            other = Fraction(other)
        if other == 0:
            return self
        if _level(other) > self.var:
            return other.__radd__(self)
        if _level(other) < self.var:
            return RatFunc.make(self.var, _padd(self.num, _pscale(self.den, other)), self.den, reduced=True)
        n2, d2 = other.num, other.den
        if self.den == d2:
            return RatFunc.make(self.var, _padd(self.num, n2), d2)
        return RatFunc.make(self.var, _padd(_pmul(self.num, d2), _pmul(n2, self.den)), _pmul(self.den, d2))

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(self.var, tuple(-c for c in self.num), self.den)

    def __sub__(self, other):
        if isinstance(other, Alg):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _foreign(other):
            return NotImplemented
        if isinstance(other, Alg):
            return NotImplemented
        if isinstance(other, int):
            other = Fraction(other)
        if other == 0:
            return Fraction(0)
        if _level(other) > self.var:
            return other.__rmul__(self)
        if _level(other) < self.var:
            if other == 1:
                return self
            return RatFunc(self.var, tuple(c * other for c in self.num), self.den)
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        g1 = _pgcd(n1, d2) if len(n1) > 1 and len(d2) > 1 else (1,)
        g2 = _pgcd(n2, d1) if len(n2) > 1 and len(d1) > 1 else (1,)
        if len(g1) > 1:
            n1, _ = _pdivmod(n1, g1)
            d2, _ = _pdivmod(d2, g1)
        if len(g2) > 1:
            n2, _ = _pdivmod(n2, g2)
            d1, _ = _pdivmod(d1, g2)
        return RatFunc.make(self.var, _pmul(n1, n2), _pmul(d1, d2), reduced=True)

    __rmul__ = __mul__

    def inverse(self):
        return RatFunc.make(self.var, self.den, self.num, reduced=True)

    def __truediv__(self, other):
        if isinstance(other, Alg):
            return NotImplemented
        if isinstance(other, int):
            other = Fraction(other)
        if other == 0:
            raise ZeroDivisionError("division by zero")
        if isinstance(other, RatFunc):
            return self * other.inverse()
        return self * (1 / other)

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        return _power(self, e)

    # comparison -----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return self.var == other.var and self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return False
        if isinstance(other, Alg):
            return False
        return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.var, self.num, self.den))
        return self._hash

    def __repr__(self):
        return f"RatFunc({render(self)})"


class Alg:
    """Element of the multi-quadratic extension: {atom monomial: coefficient}."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict):
        self.terms = terms
        self._hash = None

    @staticmethod
    def make(terms: dict):
        t = {m: c for m, c in terms.items() if c != 0}
        if not t:
            return Fraction(0)
        if len(t) == 1 and () in t:
            return t[()]
        return Alg(t)

    @staticmethod
    def _lift(x) -> dict:
        if isinstance(x, Alg):
            return x.terms
        if isinstance(x, int):
            x = Fraction(x)
        return {(): x} if x != 0 else {}

    def __add__(self, other):
        if _foreign(other):
            return NotImplemented
        out = dict(self.terms)
        for m, c in Alg._lift(other).items():
            out[m] = out[m] + c if m in out else c
        return Alg.make(out)

    __radd__ = __add__

    def __neg__(self):
        return Alg({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if not isinstance(other, int) else Fraction(-other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _foreign(other):
            return NotImplemented
        ot = Alg._lift(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in ot.items():
                m, f = _atom_mul(m1, m2)
                c = c1 * c2
                if f is not None:
                    c = c * f
                out[m] = out[m] + c if m in out else c
        return Alg.make(out)

    __rmul__ = __mul__

    def inverse(self):
        atoms = sorted({a for m in self.terms for a in m}, key=_atom_key)
        s = atoms[-1]
        conj = Alg({m: (-c if s in m else c) for m, c in self.terms.items()})
        prod = self * conj
        if isinstance(prod, Alg):
            return conj * prod.inverse()
        return conj * (1 / prod)

    def __truediv__(self, other):
        if isinstance(other, Alg):
            return self * other.inverse()
        if isinstance(other, int):
            other = Fraction(other)
        if other == 0:
            raise ZeroDivisionError("division by zero")
        return self * (1 / other)

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        return _power(self, e)

    def __eq__(self, other):
        if isinstance(other, Alg):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, RatFunc)):
            return False
        return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self.terms.items(), key=lambda t: t[0])))
        return self._hash

    def __repr__(self):
        return f"Alg({render(self)})"


Scalar = Union[Fraction, RatFunc, Alg]


def _power(x, e: int):
    if e < 0:
        return _power(1 / x, -e)
    result = Fraction(1)
    base = x
    while e:
        if e & 1:
            result = result * base
        base = base * base
        e >>= 1
    return result


# ---------------------------------------------------------------------------
# radical atoms

# atom name -> its square
_ATOM_SQUARE: dict[str, object] = {"i": Fraction(-1)}


def _atom_key(a: str):
    if a == "i":
        return (0, 0, a)
    if a.isdigit():
        return (1, int(a), a)
    return (2, 0, a)


def _atom_mul(m1: tuple, m2: tuple):
    if not m1:
        return m2, None
    if not m2:
        return m1, None
    s1, s2 = set(m1), set(m2)
    common = s1 & s2
    m = tuple(sorted(s1 ^ s2, key=_atom_key))
    if not common:
        return m, None
    f = Fraction(1)
    for a in common:
        f = f * _ATOM_SQUARE[a]
    return m, f


def _squarefree_split(n: int) -> tuple[int, list[int]]:
    """n > 0  ->  (s, primes) with n = s^2 * prod(primes)."""
    square = 1
    primes = []
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            square *= d ** (e // 2)
            if e % 2:
                primes.append(d)
        d += 1
    if n > 1:
        primes.append(n)
    return square, primes


def _sqrt_rational(r: Fraction):
    r = qq(r)
    if r == 0:
        return Fraction(0)
    sign = -1 if r < 0 else 1
    r = abs(r)
    n = r.numerator * r.denominator
    s, primes = _squarefree_split(n)
    coeff = Fraction(s, r.denominator)
    mono = [str(p) for p in primes]
    for p in primes:
        _ATOM_SQUARE.setdefault(str(p), Fraction(p))
    if sign < 0:
        mono.append("i")
    mono = tuple(sorted(mono, key=_atom_key))
    if not mono:
        return coeff
    return Alg({mono: coeff})


def _poly_content(num: tuple) -> tuple[Fraction, tuple]:
    """Write an integer-or-rational-coefficient polynomial as c * primitive."""
    from math import gcd, lcm
    den = reduce(lcm, (qq(c).denominator for c in num), 1)
    ints = [int(qq(c) * den) for c in num]
    g = reduce(gcd, (abs(c) for c in ints), 0)
    prim = [c // g for c in ints]
    content = Fraction(g, den)
    if prim[-1] < 0:
        prim = [-c for c in prim]
        content = -content
    return content, tuple(Fraction(c) for c in prim)


def sqrt(x):
    """Square root of a rational or of a rational function of one symbol."""
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, Fraction):
        if x == 0:
            raise FieldError("square root of zero")
        return _sqrt_rational(x)
    if isinstance(x, RatFunc):
        if any(not isinstance(c, Fraction) for c in x.num + x.den):
            raise FieldError("square roots only of univariate rational functions")
        num = _pmul(x.num, x.den)
        den_poly = x.den
        content, prim = _poly_content(num)
        # the prefactor 1/den is a rational function, applied outside the root
        if len(_pgcd(prim, _pderiv(prim))) > 1:
            raise FieldError("radicand must be squarefree")
        name = render(RatFunc.make(x.var, prim, (Fraction(1),)))
        _ATOM_SQUARE.setdefault(name, RatFunc.make(x.var, prim, (Fraction(1),)))
        outer = _sqrt_rational(content)
        root = Alg({(name,): Fraction(1)})
        inv_den = RatFunc.make(x.var, (Fraction(1),), den_poly)
        return root * outer * inv_den
    raise FieldError("nested square roots are not supported")


def symbol(name: str) -> RatFunc:
    return RatFunc.gen(_register(name))


def is_zero(x) -> bool:
    return x == 0


def is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


def as_fraction(x) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise FieldError(f"{render(x)} is not a rational number")


def conjugate(x, atom: str):
    """Flip the sign of the given radical atom (a ring automorphism)."""
    if not isinstance(x, Alg):
        return x
    return Alg.make({m: (-c if atom in m else c) for m, c in x.terms.items()})


def symbols_of(x) -> set[str]:
    out: set[str] = set()

    def walk(y):
        if isinstance(y, RatFunc):
            out.add(_SYMBOLS[y.var])
            for c in y.num + y.den:
                walk(c)
        elif isinstance(y, Alg):
            for m, c in y.terms.items():
                walk(c)
                for a in m:
                    walk(_ATOM_SQUARE[a])

    walk(x)
    return out


# ---------------------------------------------------------------------------
# evaluation

def _eval_ratfunc(x, var: int, value):
    if not isinstance(x, RatFunc) or x.var < var:
        return x
    if x.var == var:
        d = _peval(x.den, value)
        if d == 0:
            raise PoleError(f"pole at {_SYMBOLS[var]} = {render(value)}")
        return _peval(x.num, value) / d
    num = tuple(_eval_ratfunc(c, var, value) for c in x.num)
    den = tuple(_eval_ratfunc(c, var, value) for c in x.den)
    den_t = _trim(list(den))
    if not den_t:
        raise PoleError(f"pole at {_SYMBOLS[var]} = {render(value)}")
    return RatFunc.make(x.var, num, den)


def scalar_eval(x, assignments) -> Scalar:
    """Substitute rational values for symbols.

    ``assignments`` is a mapping or a list of (symbol, value) pairs.
    """
    items = assignments.items() if hasattr(assignments, "items") else assignments
    pairs = []
    for name, value in items:
        if name not in _SYMBOL_INDEX:
            raise FieldError(f"unknown symbol {name!r}")
        pairs.append((_SYMBOL_INDEX[name], value))
    # innermost symbols first keeps the collapsed layers reduced
    pairs.sort(key=lambda t: -t[0])
    for var, value in pairs:
        x = _eval_one(x, var, value)
    return x


def _eval_one(x, var: int, value):
    if isinstance(value, int):
        value = Fraction(value)
    if isinstance(x, Alg):
        out = Fraction(0)
        for m, c in x.terms.items():
            term = _eval_ratfunc(c, var, value)
            for a in m:
                sq = _ATOM_SQUARE[a]
                if isinstance(sq, RatFunc) and sq.var == var:
                    v = _eval_ratfunc(sq, var, value)
                    term = term * sqrt(v) if v != 0 else Fraction(0)
                else:
                    term = term * Alg({(a,): Fraction(1)})
            out = out + term
        return out
    return _eval_ratfunc(x, var, value)


# ---------------------------------------------------------------------------
# rendering and parsing

def _render_fraction(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator) if x >= 0 else f"({x.numerator})"
    return f"({x.numerator}/{x.denominator})"


def _render_poly(coeffs: tuple, var: str) -> str:
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        cs = render(c)
        if i == 0:
            parts.append(cs)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            parts.append(mono if c == 1 else f"{cs}*{mono}")
    return "(" + " + ".join(parts) + ")"


def render(x) -> str:
    """Fully parenthesized text form; ``parse_scalar`` inverts it."""
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, Fraction):
        return _render_fraction(x)
    if isinstance(x, RatFunc):
        name = _SYMBOLS[x.var]
        num = _render_poly(x.num, name)
        if len(x.den) == 1:
            return num
        return f"({num}/{_render_poly(x.den, name)})"
    if isinstance(x, Alg):
        parts = []
        for m in sorted(x.terms, key=lambda m: [_atom_key(a) for a in m]):
            c = x.terms[m]
            factors = ["i" if a == "i" else f"sqrt({a})" for a in m]
            if not m:
                parts.append(render(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append(render(c) + "*" + "*".join(factors))
        return "(" + " + ".join(parts) + ")"
    raise TypeError(f"not a scalar: {x!r}")


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str) -> list:
    out = []
    pos = 0
    text = text.replace("−", "-").replace("λ", "lam")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        pos = m.end()
        if m.group(1):
            out.append(("num", int(m.group(1))))
        elif m.group(2):
            out.append(("id", m.group(2)))
        elif m.group(3) and not m.group(3).isspace():
            out.append(("op", m.group(3)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        t = self.peek()
        if t[0] is None or (kind and t[0] != kind) or (value is not None and t[1] != value):
            raise FieldError(f"parse error near token {self.i}: {t}")
        self.i += 1
        return t

    def expr(self):
        acc = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.unary()
        while True:
            t = self.peek()
            if t in (("op", "*"), ("op", "/")):
                op = self.take()[1]
                rhs = self.unary()
                acc = acc * rhs if op == "*" else acc / rhs
            elif t[0] == "id" or t == ("op", "("):
                # juxtaposition, as in 2k or 3(k+1)
                acc = acc * self.power()
            else:
                return acc

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            neg = False
            if self.peek() == ("op", "-"):
                self.take()
                neg = True
            e = self.take("num")[1]
            base = _power(base, -e if neg else e)
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return Fraction(val)
        if kind == "id":
            self.take()
            if val == "sqrt":
                self.take("op", "(")
                inner = self.expr()
                self.take("op", ")")
                return sqrt(inner)
            if val == "i":
                return Alg({("i",): Fraction(1)})
            return symbol(val)
        if (kind, val) == ("op", "("):
            self.take()
            inner = self.expr()
            self.take("op", ")")
            return inner
        raise FieldError(f"unexpected token {val!r}")


def parse_scalar(text: str) -> Scalar:
    p = _Parser(text)
    if not p.toks:
        raise FieldError("empty scalar")
    v = p.expr()
    if p.i != len(p.toks):
        raise FieldError(f"trailing input in {text!r}")
    return v


# ---------------------------------------------------------------------------
# towers

@dataclass(frozen=True)
class FieldSpec:
    """Tower descriptor: base Q, then symbols and square roots in order.

    ``layers`` holds ("symbol", name) and ("sqrt", radicand-text) entries.
    """

    layers: tuple = ()

    @staticmethod
    def parse(text: str) -> "FieldSpec":
        parts = [t.strip() for t in re.split(r",(?![^()]*\))", text) if t.strip()]
        if not parts or parts[0] != "Q":
            raise FieldError("tower must start with Q")
        layers = []
        for t in parts[1:]:
            m = re.fullmatch(r"sqrt\((.*)\)", t)
            if m:
                layers.append(("sqrt", m.group(1).strip()))
            else:
                layers.append(("symbol", t))
        return FieldSpec(tuple(layers))

    def text(self) -> str:
        out = ["Q"]
        for kind, v in self.layers:
            out.append(v if kind == "symbol" else f"sqrt({v})")
        return ",".join(out)


class FieldHandle:
    """Validated tower; creates, parses and checks membership of scalars."""

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.symbols: list[str] = []
        self.radicals: list = []
        self._span: list[frozenset] = []
        for kind, v in spec.layers:
            if kind == "symbol":
                if v in self.symbols:
                    raise FieldError(f"symbol {v} adjoined twice")
                _register(v)
                self.symbols.append(v)
            elif kind == "sqrt":
                r = parse_scalar(v)
                if isinstance(r, Alg):
                    raise FieldError("radicand must lie in the rational-function layers")
                if r == 0:
                    raise FieldError("square root of zero")
                missing = symbols_of(r) - set(self.symbols)
                if missing:
                    raise FieldError(f"radicand uses symbols not yet adjoined: {sorted(missing)}")
                root = sqrt(r)
                self.radicals.append(root)
                if isinstance(root, Alg):
                    for m in root.terms:
                        self._add_span(frozenset(m))
            else:
                raise FieldError(f"malformed tower layer {kind!r}")

    def _reduce(self, m: frozenset) -> frozenset:
        for b in self._span:
            pivot = min(b, key=_atom_key)
            if pivot in m:
                m = m ^ b
        return m

    def _add_span(self, m: frozenset):
        m = self._reduce(m)
        if m:
            pivot = min(m, key=_atom_key)
            self._span = [b ^ m if pivot in b else b for b in self._span]
            self._span.append(m)

    def contains(self, x) -> bool:
        if not symbols_of(x) <= set(self.symbols):
            return False
        if isinstance(x, Alg):
            return all(not self._reduce(frozenset(m)) for m in x.terms)
        return True

    def has_sqrt(self, r) -> bool:
        root = sqrt(r if not isinstance(r, str) else parse_scalar(r))
        return self.contains(root)

    def element(self, text_or_value) -> Scalar:
        x = parse_scalar(text_or_value) if isinstance(text_or_value, str) else text_or_value
        if not self.contains(x):
            raise FieldError(f"{render(x)} is not in the tower {self.spec.text()}")
        return x

    def evaluate(self, x, assignments) -> tuple[Scalar, "FieldHandle"]:
        items = dict(assignments)
        for name in items:
            if name not in self.symbols:
                raise FieldError(f"unknown symbol {name!r}")
        y = scalar_eval(x, items)
        layers = []
        for kind, v in self.spec.layers:
            if kind == "symbol":
                if v not in items:
                    layers.append((kind, v))
            else:
                r = scalar_eval(parse_scalar(v), items)
                if r != 0:
                    layers.append(("sqrt", render(r)))
        return y, FieldHandle(FieldSpec(tuple(layers)))

    def __repr__(self):
        return f"FieldHandle({self.spec.text()})"


def field_make(spec) -> FieldHandle:
    if isinstance(spec, str):
        spec = FieldSpec.parse(spec)
    elif isinstance(spec, (list, tuple)) and not isinstance(spec, FieldSpec):
        spec = FieldSpec(tuple(spec))
    return FieldHandle(spec)
