"""Exact arithmetic and truncated q-expansions.

Scalars live in Q(sqrt(2)) as :class:`Sqrt2Elem`; q-expansions live on the
fixed exponent grid (1/8)Z>=0 as :class:`QSeries`.  The grid is forced by the
theta constant with exponents (2n+1)^2/8, and every other series in play
(scaled thetas, eta products, Eisenstein series, lattice forms) lands on it.

Also here: the four Kronecker characters of modulus <= 8, their Gauss sums,
and exact Bernoulli machinery for Eisenstein constant terms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, isqrt
from typing import Iterable, Sequence

import mpmath as mp


class GridError(ValueError):
    """Exponents fall off the (1/8)Z grid."""


class ParityError(ValueError):
    """Character parity incompatible with the requested weight."""


GRID = 8  # fixed exponent denominator


# ---------------------------------------------------------------------------
# the coefficient field Q(sqrt 2)

class Sqrt2Elem:
    """a + b*sqrt(2) with rational a, b; the plain rationals are b = 0."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @classmethod
    def of(cls, x) -> "Sqrt2Elem":
        if isinstance(x, Sqrt2Elem):
            return x
        return cls(Fraction(x))

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> "Sqrt2Elem":
        return Sqrt2Elem(self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - 2 * self.b * self.b

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __add__(self, other):
        o = Sqrt2Elem.of(other)
        return Sqrt2Elem(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Sqrt2Elem(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-Sqrt2Elem.of(other))

    def __rsub__(self, other):
        return Sqrt2Elem.of(other) + (-self)

    def __mul__(self, other):
        o = Sqrt2Elem.of(other)
        return Sqrt2Elem(self.a * o.a + 2 * self.b * o.b,
                         self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = Sqrt2Elem.of(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 2)")
        inv = Sqrt2Elem(o.a / n, -o.b / n)
        return self * inv

    def __rtruediv__(self, other):
        return Sqrt2Elem.of(other) / self

    def __eq__(self, other):
        try:
            o = Sqrt2Elem.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def to_mpf(self, prec: int) -> mp.mpf:
        with mp.workprec(prec + 8):
            v = (mp.mpf(self.a.numerator) / self.a.denominator
                 + mp.sqrt(2) * self.b.numerator / self.b.denominator)
        return v

    def __repr__(self):
        if self.b == 0:
            return f"Sqrt2Elem({self.a})"
        return f"Sqrt2Elem({self.a} + {self.b}*sqrt2)"


S2_ZERO = Sqrt2Elem(0)
S2_ONE = Sqrt2Elem(1)
SQRT2 = Sqrt2Elem(0, 1)


# ---------------------------------------------------------------------------
# characters and Gauss sums

@dataclass(frozen=True)
class CharacterTag:
    label: str
    modulus: int
    parity: str          # "even" | "odd"
    conductor: int
    values: tuple        # chi(n) indexed by n mod modulus

    @property
    def is_trivial(self) -> bool:
        return self.modulus == 1

    def __call__(self, n: int) -> int:
        return self.values[n % self.modulus]

    def __repr__(self):
        return self.label


CHI_TRIVIAL = CharacterTag("1", 1, "even", 1, (1,))
CHI_M4 = CharacterTag("chi_-4", 4, "odd", 4, (0, 1, 0, -1))
CHI_8 = CharacterTag("chi_8", 8, "even", 8, (0, 1, 0, -1, 0, -1, 0, 1))
CHI_M8 = CharacterTag("chi_-8", 8, "odd", 8, (0, 1, 0, 1, 0, -1, 0, -1))

CHARACTERS = {"1": CHI_TRIVIAL, "chi_-4": CHI_M4, "chi_8": CHI_8, "chi_-8": CHI_M8}
_BY_DISC = {1: CHI_TRIVIAL, -4: CHI_M4, 8: CHI_8, -8: CHI_M8}


def character_for_discriminant(d: int) -> CharacterTag:
    return _BY_DISC[d]


def char_value(chi: CharacterTag, n: int) -> int:
    """Kronecker symbol value chi(n) in {-1, 0, 1}."""
    return chi(n)


@dataclass(frozen=True)
class GaussSumValue:
    """Exact Gauss sum: magnitude sqrt(disc_abs), imaginary iff the character is odd."""
    disc_abs: int
    imaginary: bool

    def __repr__(self):
        mag = isqrt(self.disc_abs)
        s = str(mag) if mag * mag == self.disc_abs else f"sqrt({self.disc_abs})"
        return f"{s}i" if self.imaginary else s


def gauss_sum(chi: CharacterTag) -> GaussSumValue:
    """g(chi) = sum chi(r) e^{2 pi i r / N} for the primitive characters in play."""
    if chi.is_trivial:
        return GaussSumValue(1, False)
    return GaussSumValue(chi.conductor, chi.parity == "odd")


def fricke_unit(psi: CharacterTag, phi: CharacterTag, k: int) -> int:
    """The number i^{-k} g(psi) g(phi) / sqrt(uv), exactly +-1 for real characters."""
    delta = (1 if psi.parity == "odd" else 0) + (1 if phi.parity == "odd" else 0)
    if (delta - k) % 2:
        raise ParityError("character parities incompatible with weight")
    return 1 if (delta - k) % 4 == 0 else -1


# ---------------------------------------------------------------------------
# Bernoulli machinery (exact, for Eisenstein constant terms)

@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """B_n with B_1 = -1/2, via the defining recurrence."""
    if n < 0:
        raise ValueError("n >= 0")
    if n == 0:
        return Fraction(1)
    # sum_{j=0}^{n} C(n+1, j) B_j = 0
    acc = Fraction(0)
    for j in range(n):
        acc += comb(n + 1, j) * bernoulli_number(j)
    return -acc / (n + 1)


def bernoulli_poly_at(k: int, x: Fraction) -> Fraction:
    """Bernoulli polynomial B_k(x)."""
    x = Fraction(x)
    acc = Fraction(0)
    for j in range(k + 1):
        acc += comb(k, j) * bernoulli_number(j) * x ** (k - j)
    return acc


def generalized_bernoulli(k: int, chi: CharacterTag) -> Fraction:
    """B_{k, chi} = f^{k-1} sum_{a=1}^{f} chi(a) B_k(a/f)."""
    f = chi.modulus
    if f == 1:
        return bernoulli_number(k)
    acc = Fraction(0)
    for a in range(1, f + 1):
        c = chi(a)
        if c:
            acc += c * bernoulli_poly_at(k, Fraction(a, f))
    return Fraction(f) ** (k - 1) * acc


def l_at_nonpositive(k: int, chi: CharacterTag) -> Fraction:
    """L(1 - k, chi) = -B_{k, chi} / k, exactly."""
    if k < 1:
        raise ValueError("k >= 1")
    return -generalized_bernoulli(k, chi) / k


def zeta_at_nonpositive(n: int) -> Fraction:
    """zeta(-n) for integer n >= 0, exactly.

    Uses B_{n+1}(1), i.e. the plus convention at n = 0, so zeta(0) = -1/2.
    """
    if n < 0:
        raise ValueError("n >= 0")
    return -bernoulli_poly_at(n + 1, Fraction(1)) / (n + 1)


# ---------------------------------------------------------------------------
# truncated q-expansions

def _order_units(order) -> int:
    """Convert an exponent bound to grid units (floor onto the grid)."""
    f = Fraction(order) * GRID
    return f.numerator // f.denominator


class QSeries:
    """Truncated expansion sum_{n/8 < order} c_n q^{n/8} with Sqrt2Elem coefficients.

    `coeffs` maps exponent numerators (grid units) to nonzero coefficients;
    exponents >= `order` (in q-units; stored in grid units as `order_units`)
    are unknown, absent smaller exponents are zero.
    """

    __slots__ = ("coeffs", "order_units")

    def __init__(self, coeffs: dict, order_units: int):
        self.order_units = int(order_units)
        self.coeffs = {n: c for n, c in coeffs.items() if c and n < self.order_units}
        if any(n < 0 for n in self.coeffs):
            raise GridError("negative exponents are off the grid")

    # -- constructors

    @classmethod
    def zero(cls, order) -> "QSeries":
        return cls({}, _order_units(order))

    @classmethod
    def one(cls, order) -> "QSeries":
        return cls({0: S2_ONE}, _order_units(order))

    @classmethod
    def monomial(cls, coeff, exponent, order) -> "QSeries":
        e = Fraction(exponent) * GRID
        if e.denominator != 1:
            raise GridError(f"exponent {exponent} not on the (1/{GRID})Z grid")
        return cls({int(e): Sqrt2Elem.of(coeff)}, _order_units(order))

    # -- inspection

    @property
    def order(self) -> Fraction:
        return Fraction(self.order_units, GRID)

    def coefficient(self, exponent) -> Sqrt2Elem:
        e = Fraction(exponent) * GRID
        if e.denominator != 1:
            return S2_ZERO
        n = int(e)
        if n >= self.order_units:
            raise GridError(f"coefficient at {exponent} is beyond the truncation order")
        return self.coeffs.get(n, S2_ZERO)

    def coefficient_units(self, n: int) -> Sqrt2Elem:
        if n >= self.order_units:
            raise GridError("beyond truncation order")
        return self.coeffs.get(n, S2_ZERO)

    def min_exponent_units(self) -> int:
        """Smallest exponent with nonzero coefficient, or the order if none."""
        return min(self.coeffs) if self.coeffs else self.order_units

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_rational(self) -> bool:
        return all(c.is_rational for c in self.coeffs.values())

    def truncate_units(self, units: int) -> "QSeries":
        if units > self.order_units:
            raise GridError("cannot extend a truncated series")
        return QSeries(self.coeffs, units)

    # -- arithmetic

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Sqrt2Elem)):
            other = QSeries({0: Sqrt2Elem.of(other)}, self.order_units)
        units = min(self.order_units, other.order_units)
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            out[n] = out.get(n, S2_ZERO) + c
        return QSeries(out, units)

    __radd__ = __add__

    def __neg__(self):
        return QSeries({n: -c for n, c in self.coeffs.items()}, self.order_units)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, Sqrt2Elem)):
            other = QSeries({0: Sqrt2Elem.of(other)}, self.order_units)
        return self + (-other)

    def scale(self, s) -> "QSeries":
        s = Sqrt2Elem.of(s)
        return QSeries({n: c * s for n, c in self.coeffs.items()}, self.order_units)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Sqrt2Elem)):
            return self.scale(other)
        units = min(self.order_units + other.min_exponent_units(),
                    other.order_units + self.min_exponent_units())
        out: dict = {}
        for n1, c1 in self.coeffs.items():
            for n2, c2 in other.coeffs.items():
                n = n1 + n2
                if n < units:
                    out[n] = out.get(n, S2_ZERO) + c1 * c2
        return QSeries(out, units)

    __rmul__ = __mul__

    def inverse(self) -> "QSeries":
        c0 = self.coeffs.get(0)
        if not c0:
            raise GridError("inverse requires a unit constant term")
        units = self.order_units
        inv0 = S2_ONE / c0
        out = {0: inv0}
        for n in range(1, units):
            acc = S2_ZERO
            for m, c in self.coeffs.items():
                if 0 < m <= n and (n - m) in out:
                    acc = acc + c * out[n - m]
            if acc:
                out[n] = -inv0 * acc
        return QSeries(out, units)

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise TypeError("integer powers only")
        if e < 0:
            if not self.coeffs.get(0):
                raise GridError("negative power of a series with zero constant term")
            return self.inverse() ** (-e)
        out = QSeries.one(Fraction(self.order_units, GRID))
        base = self
        k = e
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def stretched(self, factor) -> "QSeries":
        """Replace q^e by q^(e * factor); all exponents must stay on the grid."""
        f = Fraction(factor)
        out = {}
        for n, c in self.coeffs.items():
            e = n * f
            if e.denominator != 1:
                raise GridError(f"stretch by {factor} leaves the grid")
            out[int(e)] = c
        o = self.order_units * f
        return QSeries(out, int(o))

    # -- comparison and display

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        units = min(self.order_units, other.order_units)
        for n in set(self.coeffs) | set(other.coeffs):
            if n < units and self.coeffs.get(n, S2_ZERO) != other.coeffs.get(n, S2_ZERO):
                return False
        return True

    def __hash__(self):
        return hash((self.order_units, tuple(sorted(self.coeffs.items(), key=lambda t: t[0]))))

    def __repr__(self):
        parts = []
        for n in sorted(self.coeffs)[:8]:
            c = self.coeffs[n]
            e = Fraction(n, GRID)
            parts.append(f"({c.a}{'+' if c.b >= 0 else ''}{c.b}r2)q^{e}" if c.b
                         else f"({c.a})q^{e}")
        more = "+..." if len(self.coeffs) > 8 else ""
        return f"QSeries({' + '.join(parts) or '0'}{more}, order={self.order})"

    # -- serialization (cache interface)

    def to_json_obj(self) -> dict:
        entries = [[n, str(c.a), str(c.b)] for n, c in sorted(self.coeffs.items())]
        return {"grid": GRID, "order": self.order_units, "entries": entries}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "QSeries":
        if obj.get("grid") != GRID:
            raise GridError("unsupported grid")
        coeffs = {int(n): Sqrt2Elem(Fraction(a), Fraction(b))
                  for n, a, b in obj["entries"]}
        return cls(coeffs, int(obj["order"]))

    @classmethod
    def from_json(cls, s: str) -> "QSeries":
        return cls.from_json_obj(json.loads(s))

    # -- numeric evaluation helper

    def eval_exp(self, log_q: mp.mpf, prec: int) -> mp.mpf:
        """Value of the truncated series at q = exp(log_q), log_q < 0."""
        with mp.workprec(prec + 16):
            acc = mp.mpf(0)
            for n in sorted(self.coeffs):
                acc += self.coeffs[n].to_mpf(prec + 16) * mp.exp(log_q * n / GRID)
            return +acc


# ---------------------------------------------------------------------------
# theta series

_THETA_SCALES = (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(4))


def theta_series(j: int, scale, order) -> QSeries:
    """Expansion of theta_j(scale * tau), j in {2, 3, 4}, on the (1/8)Z grid.

    theta_2(tau) = sum q^{(n+1/2)^2/2},  theta_3 = sum q^{n^2/2},
    theta_4 = sum (-1)^n q^{n^2/2}.  theta_2 at scale 1/2 has exponents in
    (1/16)Z and is rejected; its square is reachable through the product
    identity theta_2(tau/2)^2 = 2 theta_2(tau) theta_3(tau).
    """
    s = Fraction(scale)
    if j not in (2, 3, 4):
        raise ValueError("theta index must be 2, 3 or 4")
    if s not in _THETA_SCALES:
        raise ValueError(f"unsupported scale {scale}")
    units = _order_units(order)
    if units <= 0:
        raise GridError("order must be positive")
    coeffs: dict = {}
    if j == 2:
        step = s * GRID / 8  # exponent numerator of q^{(2n+1)^2 s/8} is (2n+1)^2 s
        n = 0
        while True:
            e = (2 * n + 1) ** 2 * step
            if e.denominator != 1:
                raise GridError("theta_2 at this scale leaves the (1/8)Z grid")
            if int(e) >= units:
                break
            coeffs[int(e)] = coeffs.get(int(e), S2_ZERO) + 2
            n += 1
    else:
        coeffs[0] = S2_ONE
        n = 1
        while True:
            e = Fraction(n * n, 2) * s * GRID
            if e.denominator != 1:
                raise GridError("theta series leaves the grid")
            if int(e) >= units:
                break
            sign = -2 if (j == 4 and n % 2) else 2
            coeffs[int(e)] = coeffs.get(int(e), S2_ZERO) + sign
            n += 1
    return QSeries(coeffs, units)


# ---------------------------------------------------------------------------
# eta products

def eta_product(factors: Sequence, order) -> QSeries:
    """q^{sum m_i e_i / 24} prod_n (1 - q^{m_i n})^{e_i}, truncated at `order`.

    `factors` is a sequence of (argument multiplier, exponent) pairs; the
    total weight (sum of exponents) / 2 must be a positive integer and the
    leading q-power must land on the (1/8)Z grid.
    """
    factors = [(int(m), int(e)) for m, e in factors]
    if not factors:
        raise ValueError("empty eta product")
    weight2 = sum(e for _, e in factors)
    if weight2 <= 0 or weight2 % 2:
        raise ValueError("total weight (half the exponent sum) must be a positive integer")
    lead = Fraction(sum(m * e for m, e in factors), 24)
    lead_units = lead * GRID
    if lead_units.denominator != 1:
        raise GridError(f"leading exponent {lead} is off the (1/8)Z grid")
    units = _order_units(order)
    body_units = units - int(lead_units)
    if body_units <= 0:
        raise GridError("order does not reach the leading term")
    prod = QSeries.one(Fraction(body_units, GRID))
    for m, e in factors:
        n = 1
        while 8 * m * n < body_units:
            one_minus = QSeries({0: S2_ONE, 8 * m * n: Sqrt2Elem(-1)}, body_units)
            prod = prod * (one_minus ** e)
            n += 1
    shifted = {n + int(lead_units): c for n, c in prod.coeffs.items()}
    return QSeries(shifted, units)


# ---------------------------------------------------------------------------
# Eisenstein series coefficients

def eisenstein_qexp(k: int, psi: CharacterTag, phi: CharacterTag, t: int, order) -> QSeries:
    """E_k^{psi, phi, t}: c0 + sum_{n >= 1} (sum_{d|n} psi(n/d) phi(d) d^{k-1}) q^{tn}.

    c0 = L(1-k, phi)/2 when psi is trivial, 0 otherwise; the constant is exact
    (generalized Bernoulli numbers).  Requires (psi phi)(-1) = (-1)^k.
    """
    if k < 3:
        raise ValueError("k >= 3")
    sign = (-1 if psi.parity == "odd" else 1) * (-1 if phi.parity == "odd" else 1)
    if sign != (1 if k % 2 == 0 else -1):
        raise ParityError(f"(psi phi)(-1) != (-1)^{k}")
    units = _order_units(order)
    coeffs: dict = {}
    if psi.is_trivial:
        c0 = l_at_nonpositive(k, phi) / 2
        if c0:
            coeffs[0] = Sqrt2Elem(c0)
    n = 1
    while 8 * t * n < units:
        acc = 0
        for d in range(1, n + 1):
            if n % d == 0:
                acc += psi(n // d) * phi(d) * d ** (k - 1)
        if acc:
            coeffs[8 * t * n] = Sqrt2Elem(acc)
        n += 1
    return QSeries(coeffs, units)


# ---------------------------------------------------------------------------
# CM lattice forms

def cm_form_qexp(level: int, k: int, order) -> QSeries:
    """Lattice expansion of the unique CM newform at the given level.

    level 4  (k = 1 mod 4): (1/4) sum (x + iy)^{k-1} q^{x^2 + y^2}
    level 8  (k odd):       (1/2) sum (x + sqrt(-2) y)^{k-1} q^{x^2 + 2y^2}
    level 16 (k = 3 mod 4): (1/2) sum over x odd, y even of (x + iy)^{k-1} q^{x^2 + y^2}

    Coefficients are rational integers (the imaginary parts cancel in the sum).
    """
    if level == 4:
        if k % 4 != 1:
            raise ParityError("level 4 requires k = 1 (mod 4)")
    elif level == 8:
        if k % 2 != 1:
            raise ParityError("level 8 requires odd k")
    elif level == 16:
        if k % 4 != 3:
            raise ParityError("level 16 requires k = 3 (mod 4)")
    else:
        raise ValueError("level must be 4, 8 or 16")
    units = _order_units(order)
    nmax = (units - 1) // 8  # largest integer exponent present
    sums: dict = {}
    two_part: dict = {}
    if level in (4, 16):
        r = isqrt(nmax) + 1
        for x in range(-r, r + 1):
            for y in range(-r, r + 1):
                n = x * x + y * y
                if n == 0 or n > nmax:
                    continue
                if level == 16 and (x % 2 == 0 or y % 2):
                    continue
                re, im = _gauss_pow(x, y, k - 1, -1)
                if re:
                    sums[n] = sums.get(n, 0) + re
                two_part[n] = two_part.get(n, 0) + im
        div = 4 if level == 4 else 2
    else:
        rx = isqrt(nmax) + 1
        ry = isqrt(nmax // 2) + 1
        for x in range(-rx, rx + 1):
            for y in range(-ry, ry + 1):
                n = x * x + 2 * y * y
                if n == 0 or n > nmax:
                    continue
                re, im = _gauss_pow(x, y, k - 1, -2)
                if re:
                    sums[n] = sums.get(n, 0) + re
                two_part[n] = two_part.get(n, 0) + im
        div = 2
    for n, v in two_part.items():
        if v:
            raise ArithmeticError("imaginary parts failed to cancel")
    coeffs = {}
    for n, v in sums.items():
        if v % div:
            raise ArithmeticError("lattice sum not divisible by the normalizer")
        coeffs[8 * n] = Sqrt2Elem(v // div)
    return QSeries(coeffs, units)


def _gauss_pow(x: int, y: int, e: int, d: int):
    """(x + y*sqrt(d))^e for d < 0, returned as (real, coefficient of sqrt(d))."""
    re, im = 1, 0
    bx, by = x, y
    k = e
    while k:
        if k & 1:
            re, im = re * bx + d * im * by, re * by + im * bx
        k >>= 1
        if k:
            bx, by = bx * bx + d * by * by, 2 * bx * by
    return re, im
