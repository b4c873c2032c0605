"""Arbitrary-precision real arithmetic and the special functions used everywhere else.

Values are carried as :class:`BigReal`: an mpmath float computed at an explicit
working precision together with a conservatively propagated absolute error
bound.  Error tracking is first-order interval style, not certified ball
arithmetic; the intended acceptance test for any computed quantity is
agreement under precision doubling.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

import mpmath as mp
from mpmath import mpf


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class PoleError(DomainError):
    """Evaluation requested at a pole."""


# ---------------------------------------------------------------------------
# precision helpers

_LOG2_10 = math.log2(10)


def bits_for_digits(digits: int) -> int:
    """Working precision in bits for a decimal digit target."""
    return int(digits * _LOG2_10) + 8


def digits_for_bits(bits: int) -> int:
    return max(1, int(bits / _LOG2_10))


def _to_mpf(x) -> mpf:
    """Coerce ints, Fractions, strings, BigReals and mpfs at ambient precision.

    mpf inputs pass through untouched: quadrature abscissas may carry a
    mantissa wider than the ambient precision so that distances to interval
    endpoints stay recoverable, and re-rounding here would destroy that.
    """
    if isinstance(x, mpf):
        return x
    if isinstance(x, BigReal):
        return x.value
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def _ulp(value: mpf, prec: int) -> mpf:
    """One unit in the last place of `value` at `prec` bits (min 2^-prec)."""
    m = mp.mag(value)
    return mp.mpf(2) ** (m - prec) if m is not mp.ninf else mp.mpf(2) ** (-prec)


class BigReal:
    """A real number with explicit working precision and an absolute error bound."""

    __slots__ = ("value", "prec", "err")

    def __init__(self, value, prec: int, err=0):
        self.prec = int(prec)
        with mp.workprec(self.prec):
            self.value = +_to_mpf(value)
            self.err = abs(_to_mpf(err))

    @classmethod
    def exact(cls, x, prec: int) -> "BigReal":
        """An integer/rational/decimal-string input, correctly rounded (err = 1 ulp or 0)."""
        with mp.workprec(prec):
            v = _to_mpf(x)
        if isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1):
            return cls(v, prec, 0)
        return cls(v, prec, 2 * _ulp(v, prec))

    @classmethod
    def from_mpf(cls, v: mpf, prec: int, err=0) -> "BigReal":
        return cls(v, prec, err)

    # -- conversions

    def __float__(self) -> float:
        return float(self.value)

    @property
    def digits(self) -> int:
        """Decimal digits of the working precision."""
        return digits_for_bits(self.prec)

    def good_digits(self) -> int:
        """Decimal digits believed correct, from the error bound."""
        if self.err == 0:
            return self.digits
        if self.value == 0:
            lead = 0
        else:
            lead = mp.mag(self.value)
        bad = mp.mag(self.err)
        return max(0, int((lead - bad) / _LOG2_10))

    def to_decimal(self, digits: int | None = None) -> str:
        n = digits if digits is not None else self.digits
        with mp.workprec(self.prec):
            return mp.nstr(self.value, n, strip_zeros=False)

    def __repr__(self):
        shown = min(self.digits, 20)
        with mp.workprec(self.prec):
            s = mp.nstr(self.value, shown)
            e = mp.nstr(self.err, 3) if self.err else "0"
        return f"BigReal({s}, prec={self.prec}, err={e})"

    # -- arithmetic with conservative first-order error propagation

    def _wrap(self, other) -> "BigReal":
        if isinstance(other, BigReal):
            return other
        return BigReal.exact(other, self.prec)

    def __add__(self, other):
        o = self._wrap(other)
        p = min(self.prec, o.prec)
        with mp.workprec(p + 8):
            v = self.value + o.value
            e = self.err + o.err + _ulp(v, p)
        return BigReal(v, p, e)

    __radd__ = __add__

    def __neg__(self):
        return BigReal(-self.value, self.prec, self.err)

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) + (-self)

    def __mul__(self, other):
        o = self._wrap(other)
        p = min(self.prec, o.prec)
        with mp.workprec(p + 8):
            v = self.value * o.value
            e = (abs(self.value) * o.err + abs(o.value) * self.err
                 + self.err * o.err + _ulp(v, p))
        return BigReal(v, p, e)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._wrap(other)
        if o.value == 0:
            raise ZeroDivisionError("BigReal division by zero")
        p = min(self.prec, o.prec)
        with mp.workprec(p + 8):
            v = self.value / o.value
            e = (self.err + abs(v) * o.err) / abs(o.value) + _ulp(v, p)
        return BigReal(v, p, e)

    def __rtruediv__(self, other):
        return self._wrap(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return 1 / (self ** (-n))
        out = BigReal.exact(1, self.prec)
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def sqrt(self) -> "BigReal":
        if self.value < 0:
            raise DomainError("sqrt of a negative BigReal")
        with mp.workprec(self.prec + 8):
            v = mp.sqrt(self.value)
            e = self.err / (2 * v) + _ulp(v, self.prec) if v != 0 else self.err
        return BigReal(v, self.prec, e)

    def __abs__(self):
        return BigReal(abs(self.value), self.prec, self.err)

    # comparisons act on the central value
    def __lt__(self, other):
        return self.value < _to_mpf(other)

    def __le__(self, other):
        return self.value <= _to_mpf(other)

    def __gt__(self, other):
        return self.value > _to_mpf(other)

    def __ge__(self, other):
        return self.value >= _to_mpf(other)

    def __eq__(self, other):
        return self.value == _to_mpf(other)

    def __hash__(self):
        return hash(self.value)


class QuadratureResult:
    """Outcome of a tanh-sinh integration."""

    __slots__ = ("value", "levels_used", "converged")

    def __init__(self, value: BigReal, levels_used: int, converged: bool):
        self.value = value
        self.levels_used = levels_used
        self.converged = converged

    def __repr__(self):
        return (f"QuadratureResult({self.value!r}, levels={self.levels_used}, "
                f"converged={self.converged})")


# ---------------------------------------------------------------------------
# constants

def pi_const(prec: int) -> BigReal:
    with mp.workprec(prec):
        v = +mp.pi
    return BigReal(v, prec, _ulp(v, prec))


def sqrt2_const(prec: int) -> BigReal:
    with mp.workprec(prec):
        v = mp.sqrt(2)
    return BigReal(v, prec, _ulp(v, prec))


# ---------------------------------------------------------------------------
# AGM and complete elliptic integrals

def agm(a, b, prec: int) -> BigReal:
    """Common limit of the arithmetic-geometric iteration, to within 2 ulp."""
    wp = prec + 16
    with mp.workprec(wp):
        x = _to_mpf(a)
        y = _to_mpf(b)
        if x <= 0 or y <= 0:
            raise DomainError("agm requires positive operands")
        # quadratic convergence; tolerance at working precision
        tol = mp.mpf(2) ** (-wp + 4)
        while abs(x - y) > tol * x:
            x, y = (x + y) / 2, mp.sqrt(x * y)
        v = +((x + y) / 2)
    out = BigReal(v, prec, 0)
    out.err = 2 * _ulp(out.value, prec)
    return out


def ellip_k(m, prec: int) -> BigReal:
    """Complete elliptic integral K(m) in the parameter convention, 0 <= m < 1.

    Only the complementary parameter 1 - m enters the AGM, and it is formed
    from the raw input before any rounding, so arguments extremely close to 1
    (e.g. tanh-sinh abscissas with extended mantissas) keep full relative
    accuracy in 1 - m.
    """
    with mp.workprec(prec + 16):
        mv = _to_mpf(m)
        mc = 1 - mv
        if mv < 0 or mc <= 0:
            raise DomainError("ellip_k requires 0 <= m < 1 (K diverges at m = 1)")
    return ellip_k_complement(mc, prec)


def ellip_k_complement(mc, prec: int) -> BigReal:
    """K(1 - mc) computed from the complementary parameter mc, 0 < mc <= 1.

    Avoids the catastrophic cancellation of forming 1 - m when m is close
    to 1; this is the routine quadrature code should use near that endpoint.
    """
    with mp.workprec(prec + 16):
        v = _to_mpf(mc)
        if v <= 0 or v > 1:
            raise DomainError("ellip_k_complement requires 0 < mc <= 1")
        g = agm(1, mp.sqrt(v), prec + 8)
        out = mp.pi / (2 * g.value)
    return BigReal(out, prec, 4 * _ulp(out, prec))


# ---------------------------------------------------------------------------
# gamma

def gamma(x, prec: int) -> BigReal:
    """Gamma(x) to within 4 ulp; poles at non-positive integers."""
    with mp.workprec(prec + 16):
        xv = _to_mpf(x)
        if xv <= 0 and xv == mp.floor(xv):
            raise PoleError(f"gamma pole at {xv}")
        v = +mp.gamma(xv)
    return BigReal(v, prec, 4 * _ulp(v, prec))


# ---------------------------------------------------------------------------
# zeta, Hurwitz zeta and Dirichlet L at integer s via Euler-Maclaurin

def hurwitz_zeta(s: int, a, prec: int) -> BigReal:
    """zeta(s, a) = sum (n+a)^-s for integer s >= 2 and real a > 0."""
    if s < 2:
        raise DomainError("hurwitz_zeta implemented for integer s >= 2")
    wp = prec + 24
    with mp.workprec(wp):
        av = _to_mpf(a)
        if av <= 0:
            raise DomainError("hurwitz_zeta requires a > 0")
        n = max(12, int(0.35 * wp))
        tol = mp.mpf(2) ** (-wp + 4)
        while True:
            big = av + n
            acc = mp.mpf(0)
            for j in range(n):
                acc += (av + j) ** (-s)
            acc += big ** (1 - s) / (s - 1)
            acc += big ** (-s) / 2
            # correction terms: B_{2r}/(2r)! * (s)_{2r-1} * big^{-s-2r+1}
            poch = mp.mpf(s)          # (s)_1
            fact = mp.mpf(2)          # (2r)! at r=1
            power = big ** (-s - 1)
            last = mp.inf
            for r in range(1, n + 1):
                term = mp.bernoulli(2 * r) / fact * poch * power
                acc += term
                last = abs(term)
                if last < tol * abs(acc):
                    break
                poch *= (s + 2 * r - 1) * (s + 2 * r)
                fact *= (2 * r + 1) * (2 * r + 2)
                power /= big * big
            if last < tol * abs(acc):
                v = +acc
                break
            n *= 2  # asymptotic tail had not entered its decaying regime
    return BigReal(v, prec, 4 * _ulp(v, prec))


def zeta(s: int, prec: int) -> BigReal:
    """Riemann zeta at integer s >= 2."""
    if s < 2:
        raise DomainError("zeta(s) supported for integer s >= 2 only")
    return hurwitz_zeta(s, 1, prec)


# Kronecker character tables for the four discriminants in play.
_CHAR_TABLE = {
    1: (1, [1]),
    -4: (4, [0, 1, 0, -1]),
    8: (8, [0, 1, 0, -1, 0, -1, 0, 1]),
    -8: (8, [0, 1, 0, 1, 0, -1, 0, -1]),
}


def dirichlet_l(d: int, s: int, prec: int) -> BigReal:
    """L(chi_d, s) for d in {-8, -4, 1, 8} and integer s >= 1; d = 1 gives zeta."""
    if d not in _CHAR_TABLE:
        raise DomainError(f"unsupported discriminant {d}")
    if d == 1:
        if s == 1:
            raise PoleError("zeta has a pole at s = 1")
        return zeta(s, prec)
    if s < 1:
        raise DomainError("dirichlet_l requires s >= 1")
    modulus, table = _CHAR_TABLE[d]
    wp = prec + 24
    if s == 1:
        # L(chi, 1) = -(1/f) sum chi(r) psi(r/f) for non-principal chi
        with mp.workprec(wp):
            acc = mp.mpf(0)
            for r in range(1, modulus):
                c = table[r % modulus]
                if c:
                    acc -= c * mp.digamma(mp.mpf(r) / modulus)
            v = +(acc / modulus)
        return BigReal(v, prec, 8 * _ulp(v, prec))
    with mp.workprec(wp):
        acc = mp.mpf(0)
        for r in range(1, modulus):
            c = table[r % modulus]
            if c:
                acc += c * hurwitz_zeta(s, Fraction(r, modulus), prec + 16).value
        v = +(acc * mp.mpf(modulus) ** (-s))
    return BigReal(v, prec, 8 * _ulp(v, prec))


# ---------------------------------------------------------------------------
# tanh-sinh (double-exponential) quadrature

_node_cache: dict = {}


def _ts_nodes(a: mpf, b: mpf, wp: int, level: int, t_max: float):
    """Abscissa/weight pairs for one refinement level on (a, b).

    Offsets from the endpoints are computed to full relative precision and the
    abscissas near `b` carry an extended mantissa, so integrands may recover
    distances to either endpoint without cancellation.
    """
    key = (a._mpf_, b._mpf_, wp, level, t_max)
    cached = _node_cache.get(key)
    if cached is not None:
        return cached
    with mp.workprec(wp + 16):
        length = b - a
        h = mp.mpf(2) ** (-level)
        nodes = []
        k = 1 if level else 0
        step = 2 if level else 1
        half_pi = mp.pi / 2
        while True:
            t = k * h
            if t > t_max:
                break
            z = half_pi * mp.sinh(t)
            ez = mp.exp(-2 * z)
            w = half_pi * mp.cosh(t) / mp.cosh(z) ** 2 * h * length / 2
            # offset of the node from the nearer endpoint, full relative precision
            delta = length * ez / (1 + ez)
            if delta == 0:
                break
            extra = max(0, -mp.mag(delta)) + 8
            with mp.workprec(wp + 16 + extra):
                x_hi = b - delta   # node at positive t (near b)
                x_lo = a + delta   # mirrored node (near a)
            if k == 0:
                nodes.append((a + length / 2, w))
            else:
                nodes.append((x_hi, w))
                nodes.append((x_lo, w))
            k += step
    _node_cache[key] = nodes
    return nodes


def tanh_sinh_integrate(f: Callable, a, b, prec: int, max_levels: int = 12) -> QuadratureResult:
    """Integrate f on (a, b) by tanh-sinh refinement.

    Handles endpoint singularities up to algebraic strength x^(-3/4) times
    log powers.  `f` is called with an mpf argument under a working-precision
    context and must return an mpf (or something mp.mpf-coercible).
    Non-convergence within `max_levels` is reported, not raised: the result
    carries converged=False and an error bound from the last refinement.
    """
    wp = prec + max(24, prec // 8)
    with mp.workprec(wp):
        av, bv = _to_mpf(a), _to_mpf(b)
        if not bv > av:
            raise DomainError("tanh_sinh_integrate requires b > a")
        # t range covers weight decay against singular growth up to x^{-3/4}
        t_max = float(mp.asinh((wp * mp.ln(2) + 40) * 8 / mp.pi))
        tol = mp.mpf(2) ** (-prec)
        cutoff = mp.mpf(2) ** (-wp - 8)
        total = mp.mpf(0)
        prev = None
        diff = mp.inf
        levels_used = 0
        converged = False
        for level in range(max_levels + 1):
            nodes = _ts_nodes(av, bv, wp, level, t_max)
            part = mp.mpf(0)
            small_run = 0
            for x, w in nodes:
                val = w * mp.mpf(f(x))
                part += val
                # nodes are ordered outward in pairs; once a long run of
                # contributions is negligible the double-exponential weight
                # decay bounds the remaining tail below the cutoff
                if abs(val) < cutoff * max(1, abs(total) + abs(part)):
                    small_run += 1
                    if small_run >= 12:
                        break
                else:
                    small_run = 0
            if level == 0:
                total = part
            else:
                total = total / 2 + part
            levels_used = level
            if prev is not None:
                diff = abs(total - prev)
                if diff <= tol * max(1, abs(total)):
                    converged = True
                    break
            prev = total
        err = diff if diff is not mp.inf else abs(total)
        value = BigReal(total, prec, err + _ulp(total, prec))
    return QuadratureResult(value, levels_used, converged)


# ---------------------------------------------------------------------------
# Legendre polynomials

def legendre_p(n: int, x) -> BigReal:
    """P_n(x) by the three-term recurrence."""
    if n < 0:
        raise DomainError("legendre_p requires n >= 0")
    xb = x if isinstance(x, BigReal) else BigReal.exact(x, mp.mp.prec)
    prec = xb.prec
    with mp.workprec(prec + 16):
        xv = xb.value
        p0, p1 = mp.mpf(1), xv
        if n == 0:
            v = p0
        elif n == 1:
            v = p1
        else:
            for j in range(1, n):
                p0, p1 = p1, ((2 * j + 1) * xv * p1 - j * p0) / (j + 1)
            v = p1
    scale = max(mp.mpf(1), abs(xb.value)) ** n
    err = (3 * n + 1) * (_ulp(v, prec) + xb.err * n * scale)
    return BigReal(v, prec, err)


# ---------------------------------------------------------------------------
# generalized hypergeometric partial sums

def pfq_partial_sum(numerators: Sequence, denominators: Sequence, z, n_terms: int,
                    prec: int) -> BigReal:
    """Partial sum of pFq: sum_{n < n_terms} prod (a_i)_n / prod (b_j)_n * z^n / n!."""
    if n_terms <= 0:
        return BigReal(0, prec, 0)
    nums = [Fraction(x) for x in numerators]
    dens = [Fraction(x) for x in denominators]
    wp = prec + 24
    with mp.workprec(wp):
        zv = _to_mpf(z)
        if any(a == 0 for a in nums):
            # (0)_n kills every term with n >= 1
            return BigReal(1, prec, 0)
        term = mp.mpf(1)
        acc = mp.mpf(1)
        for n in range(n_terms - 1):
            ratio = mp.mpf(1)
            for aa in nums:
                ratio *= mp.mpf((aa + n).numerator) / (aa + n).denominator
            for bb in dens:
                bn = bb + n
                if bn == 0:
                    raise PoleError(f"denominator parameter {bb} hits a pole at term {n + 1}")
                ratio /= mp.mpf(bn.numerator) / bn.denominator
            term *= ratio * zv / (n + 1)
            acc += term
        v = +acc
    ops = (len(nums) + len(dens) + 2) * max(1, n_terms)
    return BigReal(v, prec, ops * _ulp(v, prec))
