"""Truncated q-series and bigraded dimension tables for characters."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .fields import render, parse_scalar


@dataclass(frozen=True)
class QSeries:
    """sum_m coeffs[m] q^(offset + m/den), known up to step N (inclusive)."""

    coeffs: tuple
    offset: object = Fraction(0)
    den: int = 1

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, m: int):
        return self.coeffs[m] if 0 <= m < len(self.coeffs) else Fraction(0)

    def truncate(self, n: int) -> "QSeries":
        return QSeries(self.coeffs[: n + 1], self.offset, self.den)

    def _check(self, other: "QSeries"):
        if self.den != other.den:
            raise ValueError("series with different step denominators")

    def __add__(self, other: "QSeries") -> "QSeries":
        self._check(other)
        if self.offset != other.offset:
            raise ValueError("adding series with different offsets")
        n = min(self.order, other.order)
        return QSeries(tuple(self[m] + other[m] for m in range(n + 1)), self.offset, self.den)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return QSeries(tuple(c * other for c in self.coeffs), self.offset, self.den)
        self._check(other)
        n = min(self.order, other.order)
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            a = self[i]
            if a == 0:
                continue
            for j in range(n + 1 - i):
                out[i + j] += a * other[j]
        return QSeries(tuple(out), self.offset + other.offset, self.den)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, QSeries) and self.den == other.den
                and self.offset == other.offset and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.coeffs, self.den))


def _product_series(n: int, sign: int, power: int) -> list:
    """Coefficients of prod_{j>=1} (1 + sign*q^j)^power up to q^n."""
    out = [Fraction(0)] * (n + 1)
    out[0] = Fraction(1)
    for j in range(1, n + 1):
        for _ in range(abs(power)):
            if power > 0:
                # multiply by (1 + sign q^j)
                for m in range(n, j - 1, -1):
                    out[m] += sign * out[m - j]
            else:
                # divide by (1 + sign q^j): multiply by sum_t (-sign q^j)^t
                for m in range(j, n + 1):
                    out[m] -= sign * out[m - j]
    return out


def eta_inverse_square(n: int) -> QSeries:
    """prod (1-q^m)^-2 to order n; the leading q^(-1/12) is kept as offset."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    return QSeries(tuple(_product_series(n, -1, -2)), Fraction(-1, 12), 1)


def weber_f2(n: int) -> QSeries:
    """prod (1+q^m) to order n with offset 1/24; the sqrt(2) prefactor is omitted."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    return QSeries(tuple(_product_series(n, 1, 1)), Fraction(1, 24), 1)


@dataclass
class BiGradedTable:
    """dim(m, l) for ch = sum dim(m,l) q^(weight_offset+m) z^(charge_offset + l*stride)."""

    dims: dict = field(default_factory=dict)
    weight_offset: object = Fraction(0)
    charge_offset: object = Fraction(0)
    charge_stride: object = Fraction(2)

    def add(self, m: int, l: int, count: int = 1):
        self.dims[(m, l)] = self.dims.get((m, l), 0) + count

    def get(self, m: int, l: int) -> int:
        return self.dims.get((m, l), 0)

    def weights(self) -> list[int]:
        return sorted({m for m, _ in self.dims})

    def charges(self, m: int | None = None) -> list[int]:
        return sorted({l for (w, l) in self.dims if m is None or w == m})

    def serialize(self) -> str:
        lines = [
            f"# weight_offset = {render(self.weight_offset)}",
            f"# charge_offset = {render(self.charge_offset)}",
            f"# charge_stride = {render(self.charge_stride)}",
        ]
        for (m, l) in sorted(self.dims):
            lines.append(f"({m}, {l}) {self.dims[(m, l)]}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> "BiGradedTable":
        t = BiGradedTable()
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                setattr(t, key.strip(), parse_scalar(value.strip()))
                continue
            pos, _, dim = line.rpartition(")")
            m, l = (int(x) for x in pos.strip("( ").split(","))
            t.dims[(m, l)] = int(dim)
        return t
