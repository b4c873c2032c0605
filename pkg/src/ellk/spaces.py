"""Weight-k form spaces on the three groups and their polynomial picture.

Everything is phrased on the half-argument side: a handle stores data for
f(tau/2), whose value on the imaginary axis equals (2K/pi)^k g(X) for a
polynomial g in the group's uniformizing coordinate X.  Expansions of the
generating theta products therefore use integer scales only, and the map
between forms and polynomials is realized by exact linear algebra on grid
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .qseries import (
    CHARACTERS,
    CHI_8,
    CHI_M4,
    CHI_M8,
    CHI_TRIVIAL,
    GRID,
    CharacterTag,
    ParityError,
    QSeries,
    S2_ONE,
    S2_ZERO,
    SQRT2,
    Sqrt2Elem,
    eisenstein_qexp,
    eta_product,
    fricke_unit,
    l_at_nonpositive,
    cm_form_qexp,
    theta_series,
)


class NotInSpaceError(ValueError):
    """A q-expansion is not a combination of the space's basis expansions."""


# ---------------------------------------------------------------------------
# polynomials in the uniformizer X

class XPoly:
    """Polynomial over Q(sqrt 2) in the coordinate X."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = [Sqrt2Elem.of(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def x_power(cls, i: int) -> "XPoly":
        return cls([0] * i + [1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, i: int) -> Sqrt2Elem:
        return self.coeffs[i] if i < len(self.coeffs) else S2_ZERO

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return XPoly([self.coefficient(i) + other.coefficient(i) for i in range(n)])

    def __neg__(self):
        return XPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "XPoly":
        s = Sqrt2Elem.of(s)
        return XPoly([c * s for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Sqrt2Elem)):
            return self.scale(other)
        out = [S2_ZERO] * (len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return XPoly(out)

    __rmul__ = __mul__

    def divmod(self, other: "XPoly"):
        """Exact polynomial division with remainder over the field."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return XPoly([]), XPoly(rem)
        quot = [S2_ZERO] * (dq + 1)
        lead = other.coeffs[-1]
        for i in range(dq, -1, -1):
            c = rem[i + len(other.coeffs) - 1] / lead
            quot[i] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[i + j] = rem[i + j] - c * b
        return XPoly(quot), XPoly(rem)

    def __eq__(self, other):
        if not isinstance(other, XPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "XPoly(0)"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                cs = f"{c.a}" if c.is_rational else f"({c.a}+{c.b}r2)"
                parts.append(f"{cs}*X^{i}" if i else cs)
        return f"XPoly({' + '.join(parts)})"


# ---------------------------------------------------------------------------
# the three groups

@dataclass(frozen=True)
class GroupTag:
    label: str
    cli_name: str
    field_name: str          # "Q" or "Q(sqrt2)"
    eis_level: int           # level whose Eisenstein series span the space
    eis_arg_scale: Fraction  # argument rescaling pulling those back to the group

    @property
    def uses_sqrt2(self) -> bool:
        return self.field_name == "Q(sqrt2)"

    def vanishing_divisor(self) -> XPoly:
        """Divisor of P-images of forms vanishing at the two distinguished cusps."""
        if self is GAMMA1_8:
            # (X - 1)(X - sqrt 2)
            return XPoly([SQRT2, -(S2_ONE + SQRT2), 1])
        return XPoly([0, 1, -1])  # X (1 - X)

    def __repr__(self):
        return self.label


GAMMA1_4 = GroupTag("Gamma1(4)", "g1_4", "Q", 4, Fraction(1))
GAMMA_4 = GroupTag("Gamma(4)", "g4", "Q", 16, Fraction(1, 4))
GAMMA1_8 = GroupTag("Gamma1(8)", "g1_8", "Q(sqrt2)", 8, Fraction(1))

GROUPS = {g.cli_name: g for g in (GAMMA1_4, GAMMA_4, GAMMA1_8)}


def space_dimension(group: GroupTag, k: int) -> int:
    """dim M_k: floor(k/2)+1 on Gamma1(4), 2k+1 on Gamma(4) and Gamma1(8)."""
    if k < 3:
        raise ValueError("k >= 3")
    if group is GAMMA1_4:
        return k // 2 + 1
    return 2 * k + 1


# ---------------------------------------------------------------------------
# representations carried by a form handle

@dataclass(frozen=True)
class GeneratorPoly:
    """Combination of theta monomials, each prod_j theta_j(scale * tau)^power.

    These are half-argument-side data: the handle's function of tau is this
    combination evaluated at tau (i.e. it already describes f(tau/2)).
    """
    terms: tuple  # ((Sqrt2Elem, ((j, scale, power), ...)), ...)


@dataclass(frozen=True)
class EtaProductRep:
    """f(tau) = prod eta(m tau)^e, described on the f side."""
    factors: tuple  # ((m, e), ...)


@dataclass(frozen=True)
class EisensteinRep:
    """f(tau) = E_k^{psi, phi}(t tau), living at the stated level."""
    k: int
    psi: str
    phi: str
    t: int
    level: int

    @property
    def psi_char(self) -> CharacterTag:
        return CHARACTERS[self.psi]

    @property
    def phi_char(self) -> CharacterTag:
        return CHARACTERS[self.phi]

    def constant_term(self) -> Fraction:
        return l_at_nonpositive(self.k, self.phi_char) / 2 \
            if self.psi_char.is_trivial else Fraction(0)


@dataclass(frozen=True)
class LinearCombo:
    terms: tuple  # ((Sqrt2Elem, FormHandle), ...)


class FormHandle:
    """A weight-k form given by a representation plus an argument rescaling.

    The handle stands for H(tau) = G(arg_scale * tau) with G described by
    `rep`.  Half-argument expansions are cached per truncation order.
    """

    def __init__(self, weight: int, group: GroupTag | None, rep,
                 arg_scale: Fraction = Fraction(1)):
        self.weight = int(weight)
        self.group = group
        self.rep = rep
        self.arg_scale = Fraction(arg_scale)
        self._qexp_cache: dict = {}

    def __repr__(self):
        scale = f", arg*{self.arg_scale}" if self.arg_scale != 1 else ""
        return f"FormHandle(k={self.weight}, {self.group}, {type(self.rep).__name__}{scale})"

    # -- half-argument q-expansion

    def b2_qexp(self, order) -> QSeries:
        """Expansion of H(tau/2) truncated at q-exponent `order`."""
        key = Fraction(order)
        hit = self._qexp_cache.get(key)
        if hit is not None:
            return hit
        inner_order = key / self.arg_scale
        rep = self.rep
        if isinstance(rep, GeneratorPoly):
            acc = QSeries.zero(inner_order)
            for coeff, factors in rep.terms:
                term = QSeries.one(inner_order)
                for j, scale, power in factors:
                    if power:
                        term = term * (theta_series(j, scale, inner_order) ** power)
                acc = acc + term.scale(coeff)
            series = acc
        elif isinstance(rep, EtaProductRep):
            series = eta_product(rep.factors, inner_order * 2).stretched(Fraction(1, 2))
        elif isinstance(rep, EisensteinRep):
            series = eisenstein_qexp(rep.k, rep.psi_char, rep.phi_char, rep.t,
                                     inner_order * 2).stretched(Fraction(1, 2))
        elif isinstance(rep, LinearCombo):
            acc = QSeries.zero(inner_order)
            for coeff, handle in rep.terms:
                acc = acc + handle.b2_qexp(inner_order).scale(coeff)
            series = acc
        else:
            raise TypeError(f"unknown representation {type(rep).__name__}")
        out = series.stretched(self.arg_scale) if self.arg_scale != 1 else series
        self._qexp_cache[key] = out
        return out

    def constant_term(self) -> Sqrt2Elem:
        """Value at the infinite cusp (constant q-coefficient)."""
        rep = self.rep
        if isinstance(rep, EisensteinRep):
            return Sqrt2Elem(rep.constant_term())
        if isinstance(rep, LinearCombo):
            acc = S2_ZERO
            for coeff, handle in rep.terms:
                acc = acc + coeff * handle.constant_term()
            return acc
        return self.b2_qexp(1).coefficient(0)

    def scaled_argument(self, c) -> "FormHandle":
        return FormHandle(self.weight, self.group, self.rep, self.arg_scale * Fraction(c))


def combination(weight: int, group: GroupTag | None,
                terms: Iterable[tuple]) -> FormHandle:
    """Linear combination handle from (coefficient, handle) pairs."""
    terms = tuple((Sqrt2Elem.of(c), h) for c, h in terms)
    return FormHandle(weight, group, LinearCombo(terms))


# ---------------------------------------------------------------------------
# monomial basis: forms whose polynomial images are X^i

def _pow2_sqrt2(num2: int) -> Sqrt2Elem:
    """2^(num2/2) as an exact element of Q(sqrt 2)."""
    if num2 % 2 == 0:
        return Sqrt2Elem(Fraction(2) ** (num2 // 2))
    return SQRT2 * Sqrt2Elem(Fraction(2) ** ((num2 - 1) // 2))


def monomial_basis(group: GroupTag, k: int) -> list[FormHandle]:
    """Forms with P-image X^i, i = 0 .. dim-1, as explicit theta monomials."""
    dim = space_dimension(group, k)
    out = []
    for i in range(dim):
        if group is GAMMA1_4:
            coeff: Sqrt2Elem = S2_ONE
            factors = ((2, Fraction(1), 4 * i), (3, Fraction(1), 2 * k - 4 * i))
        elif group is GAMMA_4:
            coeff = S2_ONE
            factors = ((2, Fraction(1), i), (3, Fraction(1), 2 * k - i))
        else:
            coeff = _pow2_sqrt2(i)
            factors = ((3, Fraction(1), 2 * k - i), (3, Fraction(2), i))
        out.append(FormHandle(k, group, GeneratorPoly(((coeff, factors),))))
    return out


_SOLVE_SLACK = 12  # extra q-exponents matched beyond the dimension


def _basis_matrix(group: GroupTag, k: int, order: Fraction):
    basis = monomial_basis(group, k)
    cols = [h.b2_qexp(order) for h in basis]
    units = min(c.order_units for c in cols)
    return basis, cols, units


def p_map(f: FormHandle) -> XPoly:
    """Polynomial image of a form: f(tau/2) = (2K/pi)^k g(X) => g.

    Solves the exact linear system matching grid coefficients against the
    monomial basis, with slack rows to detect inputs outside the space.
    """
    group, k = f.group, f.weight
    if group is None:
        raise NotInSpaceError("handle carries no group")
    dim = space_dimension(group, k)
    order = Fraction(dim + _SOLVE_SLACK)
    basis, cols, units = _basis_matrix(group, k, order)
    target = f.b2_qexp(order)
    units = min(units, target.order_units)
    rows = sorted({n for c in cols for n in c.coeffs if n < units}
                  | {n for n in target.coeffs if n < units})
    mat = [[c.coefficient_units(n) for c in cols] for n in rows]
    rhs = [target.coefficient_units(n) for n in rows]
    sol = _solve_exact(mat, rhs)
    return XPoly(sol)


def _solve_exact(mat: list, rhs: list) -> list:
    """Solve an overdetermined exact system; raise if inconsistent."""
    if not mat:
        return []
    ncols = len(mat[0])
    m = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = S2_ONE / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    # consistency: every non-pivot row must have been annihilated
    for i, row in enumerate(m):
        if i >= r and any(row):
            raise NotInSpaceError(
                f"q-expansion is not in the span (row residual {row[-1]!r})")
    sol = [S2_ZERO] * ncols
    for i, c in enumerate(pivots):
        sol[c] = m[i][-1]
    return sol


def p_inverse(g: XPoly, k: int, group: GroupTag) -> FormHandle:
    """Form with P-image g, as an explicit theta-monomial combination."""
    dim = space_dimension(group, k)
    if g.degree > dim - 1:
        raise NotInSpaceError(f"degree {g.degree} exceeds dim - 1 = {dim - 1}")
    basis = monomial_basis(group, k)
    terms = []
    for i, c in enumerate(g.coeffs):
        if c:
            (mono_coeff, factors), = basis[i].rep.terms
            terms.append((c * mono_coeff, factors))
    if not terms:
        terms = [(S2_ZERO, ((3, Fraction(1), 2 * k),))]
    return FormHandle(k, group, GeneratorPoly(tuple(terms)))


def vanishing_subspace_basis(group: GroupTag, k: int) -> list[XPoly]:
    """P-images of the forms vanishing at both distinguished cusps: divisor * X^j."""
    dim = space_dimension(group, k)
    div = group.vanishing_divisor()
    return [div * XPoly.x_power(j) for j in range(dim - 2)]


# ---------------------------------------------------------------------------
# moment weight functions (integrand factor applied to h(X))

def moment_weight_function(group: GroupTag) -> str:
    """Integrand factor for h(X): the reduced form of h(X) * divisor / (m(1-m))."""
    if group is GAMMA1_4:
        return "h(X)"
    if group is GAMMA_4:
        return "h(X) / (X^3 (1+X) (1+X^2))"
    return "h(X) / ((X-1) X^2 (X+1)^2 (X+sqrt2))"


# ---------------------------------------------------------------------------
# Eisenstein bases (by group and weight parity) and the Fricke involution

def eisenstein_basis(group: GroupTag, k: int) -> list[FormHandle]:
    """Basis descriptors for the Eisenstein space, pulled back to the group."""
    if k < 3:
        raise ValueError("k >= 3")
    even = (k % 2 == 0)
    n = group.eis_level
    if group is GAMMA1_4:
        rows = [("1", "1", t) for t in (1, 2, 4)] if even else []
    elif group is GAMMA_4:
        rows = ([("1", "1", t) for t in (1, 2, 4, 8, 16)] + [("chi_-4", "chi_-4", 1)]
                if even else
                [("chi_-4", "1", t) for t in (1, 2, 4)]
                + [("1", "chi_-4", t) for t in (1, 2, 4)])
    else:
        rows = ([("1", "1", t) for t in (1, 2, 4, 8)]
                + [("1", "chi_8", 1), ("chi_8", "1", 1)]
                if even else
                [("chi_-4", "1", 1), ("chi_-4", "1", 2),
                 ("1", "chi_-4", 1), ("1", "chi_-4", 2),
                 ("1", "chi_-8", 1), ("chi_-8", "1", 1)])
    out = []
    for psi, phi, t in rows:
        rep = EisensteinRep(k, psi, phi, t, n)
        out.append(FormHandle(k, group, rep, group.eis_arg_scale))
    return out


def fricke_eisenstein(k: int, psi: CharacterTag, phi: CharacterTag, t: int,
                      n_level: int):
    """Image of E_k^{psi, phi, t} under the level-N Fricke involution.

    Returns (coefficient, EisensteinRep) with
    coefficient = (-1)^k sqrt(u/v) N^{k/2} / (ut)^k * (i^{-k} g(psi) g(phi) / sqrt(uv)),
    exact in Q(sqrt 2) for the real characters in play.
    """
    u, v = psi.conductor, phi.conductor
    if n_level % (t * u * v):
        raise ValueError(f"t*u*v = {t * u * v} must divide N = {n_level}")
    for value, name in ((u, "u"), (v, "v"), (n_level, "N")):
        if value & (value - 1):
            raise ValueError(f"{name} must be a power of two here")
    unit = fricke_unit(psi, phi, k)
    # sqrt(u/v) * N^{k/2} = 2^{(log2 u - log2 v + k log2 N) / 2}
    num2 = (u.bit_length() - 1) - (v.bit_length() - 1) + k * (n_level.bit_length() - 1)
    coeff = _pow2_sqrt2(num2) * Sqrt2Elem(Fraction((-1) ** k * unit, (u * t) ** k))
    image = EisensteinRep(k, phi.label, psi.label, n_level // (u * v * t), n_level)
    return coeff, image


def eisenstein_vanishing_combination(group: GroupTag, k: int) -> list[FormHandle]:
    """Basis of Eisenstein combinations vanishing at both distinguished cusps.

    Exact nullspace of the two constant-term constraints: at infinity, and at
    zero via the Fricke image.  Cardinality is (#basis) - 2; empty for odd
    weight on Gamma1(4).
    """
    basis = eisenstein_basis(group, k)
    if not basis:
        return []
    n_level = group.eis_level
    row_inf = []
    row_zero = []
    for h in basis:
        rep = h.rep
        row_inf.append(Sqrt2Elem(rep.constant_term()))
        coeff, image = fricke_eisenstein(k, rep.psi_char, rep.phi_char, rep.t, n_level)
        row_zero.append(coeff * Sqrt2Elem(image.constant_term()))
    null = _nullspace_2xn([row_inf, row_zero])
    out = []
    for vec in null:
        vec = _clear_denominators(vec)
        terms = tuple((c, h) for c, h in zip(vec, basis) if c)
        out.append(FormHandle(k, group, LinearCombo(terms)))
    return out


def _nullspace_2xn(rows: list) -> list:
    """Exact nullspace basis of a small stacked system over Q(sqrt 2)."""
    n = len(rows[0])
    m = [row[:] for row in rows]
    pivots = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = S2_ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(n) if c not in pivots]
    out = []
    for fc in free:
        vec = [S2_ZERO] * n
        vec[fc] = S2_ONE
        for i, pc in enumerate(pivots):
            vec[pc] = -m[i][fc]
        out.append(vec)
    return out


def _clear_denominators(vec: list) -> list:
    """Scale a Q(sqrt2) vector to Z[sqrt2] with content 1, leading entry > 0."""
    from math import gcd

    denom = 1
    for c in vec:
        denom = denom * c.a.denominator // gcd(denom, c.a.denominator)
        denom = denom * c.b.denominator // gcd(denom, c.b.denominator)
    ints = [(c.a * denom, c.b * denom) for c in vec]
    content = 0
    for a, b in ints:
        content = gcd(content, int(a))
        content = gcd(content, int(b))
    if content > 1:
        ints = [(a / content, b / content) for a, b in ints]
    out = [Sqrt2Elem(a, b) for a, b in ints]
    lead = next((c for c in out if c), S2_ONE)
    if lead.a < 0 or (lead.a == 0 and lead.b < 0):
        out = [-c for c in out]
    return out


# ---------------------------------------------------------------------------
# handles for the named forms

def eta_form_handle(factors: Sequence, group: GroupTag | None = None) -> FormHandle:
    """Handle for an eta product, weight = half the exponent sum."""
    factors = tuple((int(m), int(e)) for m, e in factors)
    weight2 = sum(e for _, e in factors)
    if weight2 <= 0 or weight2 % 2:
        raise ValueError("eta product must have positive integral weight")
    return FormHandle(weight2 // 2, group, EtaProductRep(factors))


_CM_HOME = {4: (GAMMA1_4, Fraction(1)), 8: (GAMMA1_8, Fraction(1)),
            16: (GAMMA_4, Fraction(4))}


def cm_form_handle(level: int, k: int) -> FormHandle:
    """The CM lattice form as an exact theta-monomial combination.

    The expansion is matched against a group's monomial basis (level 16 goes
    through the level-preserving pullback f(tau) -> f(tau/4) onto Gamma(4)),
    which both certifies membership and yields a representation with exact
    transformation behaviour for evaluation anywhere on the imaginary axis.
    """
    group, arg_scale = _CM_HOME[level]
    dim = space_dimension(group, k)
    order_int = (dim + _SOLVE_SLACK) * int(arg_scale) + 1
    series = cm_form_qexp(level, k, order_int)
    pulled = series.stretched(Fraction(1, 2) / arg_scale)  # half-argument + pullback
    g = _p_map_series(group, k, pulled)
    inner = p_inverse(g, k, group)
    return FormHandle(k, group, inner.rep, arg_scale)


def _p_map_series(group: GroupTag, k: int, series: QSeries) -> XPoly:
    """p_map for a raw half-argument expansion (no handle required)."""
    dim = space_dimension(group, k)
    order = Fraction(dim + _SOLVE_SLACK)
    basis, cols, units = _basis_matrix(group, k, order)
    units = min(units, series.order_units)
    rows = sorted({n for c in cols for n in c.coeffs if n < units}
                  | {n for n in series.coeffs if n < units})
    mat = [[c.coefficient_units(n) for c in cols] for n in rows]
    rhs = [series.coefficient_units(n) for n in rows]
    return XPoly(_solve_exact(mat, rhs))
