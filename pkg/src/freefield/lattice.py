"""Gram forms on Heisenberg spaces and lattice points."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .fields import FieldError, is_rational, parse_scalar, render


class GramForm:
    """Symmetric bilinear form on a space with named basis labels.

    Extra named vectors (for instance c = (2/k)(mu - nu)) are recorded as
    coordinate tuples so states can be written in any presentation.
    """

    def __init__(self, labels, matrix, names=None):
        self.labels = tuple(labels)
        n = len(self.labels)
        self.matrix = tuple(tuple(matrix[i][j] for j in range(n)) for i in range(n))
        for i in range(n):
            for j in range(n):
                if self.matrix[i][j] != self.matrix[j][i]:
                    raise FieldError("Gram matrix is not symmetric")
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.names: dict[str, tuple] = {}
        for i, lab in enumerate(self.labels):
            e = [Fraction(0)] * n
            e[i] = Fraction(1)
            self.names[lab] = tuple(e)
        for name, vec in (names or {}).items():
            self.define(name, vec)

    @property
    def rank(self) -> int:
        return len(self.labels)

    @staticmethod
    def diagonal(labels, values, names=None) -> "GramForm":
        n = len(labels)
        m = [[values[i] if i == j else Fraction(0) for j in range(n)] for i in range(n)]
        return GramForm(labels, m, names)

    def define(self, name: str, vec):
        self.names[name] = self.vector(vec)

    def vector(self, spec) -> tuple:
        """Coordinates from a tuple, a {name: coeff} dict or a name."""
        if isinstance(spec, str):
            return self.names[spec]
        if isinstance(spec, dict):
            out = [Fraction(0)] * self.rank
            for name, coeff in spec.items():
                base = self.names[name]
                for i in range(self.rank):
                    out[i] = out[i] + coeff * base[i]
            return tuple(out)
        vec = tuple(Fraction(x) if isinstance(x, int) else x for x in spec)
        if len(vec) != self.rank:
            raise FieldError("vector has wrong length")
        return vec

    def pair(self, u: tuple, v: tuple):
        acc = Fraction(0)
        for i, ui in enumerate(u):
            if ui == 0:
                continue
            row = self.matrix[i]
            for j, vj in enumerate(v):
                if vj == 0 or row[j] == 0:
                    continue
                acc = acc + ui * row[j] * vj
        return acc

    def pair_label(self, u: tuple, i: int):
        acc = Fraction(0)
        for j, uj in enumerate(u):
            if uj != 0 and self.matrix[j][i] != 0:
                acc = acc + uj * self.matrix[j][i]
        return acc

    def norm(self, u: tuple):
        return self.pair(u, u)

    def render_vector(self, u: tuple) -> str:
        text = ""
        for lab, x in zip(self.labels, u):
            if x == 0:
                continue
            neg = isinstance(x, Fraction) and x < 0
            a = -x if neg else x
            if a == 1:
                term = lab
            elif isinstance(a, Fraction) and a.denominator == 1:
                term = f"{a}{lab}"
            else:
                r = render(a)
                term = f"{r}{lab}" if r.startswith("(") else f"({r}){lab}"
            if not text:
                text = ("-" if neg else "") + term
            else:
                text += (" - " if neg else " + ") + term
        return text or "0"

    def parse_vector(self, text: str) -> tuple:
        text = text.strip()
        if text == "0":
            return tuple(Fraction(0) for _ in self.labels)
        out = [Fraction(0)] * self.rank
        for coeff, name in _split_linear(text):
            base = self.names[name]
            for i in range(self.rank):
                out[i] = out[i] + coeff * base[i]
        return tuple(out)


def _split_linear(text: str):
    """Parse 'c1 name1 + c2 name2 ...' where each ci is a balanced group or integer."""
    i = 0
    n = len(text)
    sign = 1
    while i < n:
        while i < n and text[i] in " +":
            i += 1
        if i < n and text[i] == "-":
            sign = -1
            i += 1
            while i < n and text[i] == " ":
                i += 1
        coeff = Fraction(1)
        if i < n and text[i] == "(":
            depth = 0
            j = i
            while True:
                if text[j] == "(":
                    depth += 1
                elif text[j] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            coeff = parse_scalar(text[i:j + 1])
            i = j + 1
        elif i < n and text[i].isdigit():
            j = i
            while j < n and (text[j].isdigit() or text[j] == "/"):
                j += 1
            coeff = parse_scalar(text[i:j])
            i = j
        j = i
        while j < n and (text[j].isalnum() or text[j] == "_"):
            j += 1
        name = text[i:j]
        if not name:
            raise FieldError(f"cannot parse linear combination {text!r}")
        yield sign * coeff, name
        sign = 1
        i = j


@dataclass(frozen=True)
class LatticePoint:
    """A point of the Heisenberg space together with a membership tag.

    ``denominator`` is 1 for points of the algebra lattice and 2 for the
    half-lattice used by twisted sectors.
    """

    coords: tuple
    denominator: int = 1

    def __add__(self, other: "LatticePoint") -> "LatticePoint":
        return LatticePoint(tuple(a + b for a, b in zip(self.coords, other.coords)),
                            max(self.denominator, other.denominator))

    def scale(self, c) -> "LatticePoint":
        return LatticePoint(tuple(c * a for a in self.coords), self.denominator)


def check_pairing_denominators(gram: GramForm, gens) -> None:
    """Pairings between generators must have denominators dividing 2."""
    for u in gens:
        for v in gens:
            x = gram.pair(u, v)
            if not is_rational(x):
                continue
            if Fraction(x).denominator not in (1, 2):
                raise FieldError(f"pairing {render(x)} has denominator > 2")
