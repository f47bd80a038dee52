"""Exact computer algebra in the ring Q[pi][theta, sin(theta/2), cos(theta/2)].

Elements are finite sums of terms  c * theta^a * sin(m*theta/2)  and
c * theta^a * cos(m*theta/2)  with integers a, m >= 0 and coefficients c
that are polynomials in pi with rational coefficients (pi is treated as a
transcendental indeterminate, so every computation here is exact).

The half-angle frequency basis {theta^a sin(m*theta/2), theta^a cos(m*theta/2)}
is closed under

* products            (product-to-sum identities),
* antiderivatives     (repeated integration by parts),
* convolution         h(t) = int_0^t f(u) g(t-u) du,
* reflection          f(theta) -> f(2*pi - theta),
* singular integration  sin(theta/2)^p * int_0^theta f(phi)/sin(phi/2)^p dphi
  for odd p, whenever the integral stays in the ring.

Canonical form: no sin term with frequency 0, no term with zero
coefficient; the cos term with frequency 0 carries the trig-free part.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import mpmath

from .errors import DomainError, SingularityError, TermBudgetExceeded

SIN = 0
COS = 1

TWO_PI = 2.0 * math.pi

#: guard against runaway expression growth; canonicalization raises
#: TermBudgetExceeded past this many terms
TERM_BUDGET = 10**6

#: |theta| below this routes float evaluation through the series at 0,
#: where the canonical basis cancels catastrophically
SERIES_SWITCH = 0.1

_EVAL_DPS = 40

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# polynomials in pi
# ---------------------------------------------------------------------------

class PiPoly:
    """Polynomial in pi with rational coefficients, index = power of pi."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Fraction | int] = ()):
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, value) -> "PiPoly":
        return cls((Fraction(value),))

    @classmethod
    def pi_power(cls, k: int, value=1) -> "PiPoly":
        return cls((_ZERO,) * k + (Fraction(value),))

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def low_power(self) -> int:
        """Index of the lowest nonzero coefficient (0 for the zero poly)."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return 0

    def constant_part(self) -> Fraction:
        return self.coeffs[0] if self.coeffs else _ZERO

    def as_fraction(self) -> Fraction:
        if len(self.coeffs) > 1:
            raise ValueError("PiPoly has a pi-dependent part")
        return self.constant_part()

    def shifted(self, k: int) -> "PiPoly":
        """Multiply by pi^k (k may be negative if divisible)."""
        if self.is_zero:
            return self
        if k >= 0:
            return PiPoly((_ZERO,) * k + self.coeffs)
        if any(self.coeffs[:-k]):
            raise ValueError("not divisible by pi^%d" % -k)
        return PiPoly(self.coeffs[-k:])

    def content(self) -> Fraction:
        """Positive rational c with self/c integer-coefficient, gcd 1."""
        if self.is_zero:
            return _ZERO
        num = 0
        den = 1
        for c in self.coeffs:
            num = math.gcd(num, c.numerator)
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    def __add__(self, other):
        other = _as_pipoly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return PiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return PiPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = _as_pipoly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _as_pipoly(other) + (-self)

    def __mul__(self, other):
        other = _as_pipoly(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return PiPoly()
        out = [_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] += a * b
        return PiPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        q = Fraction(scalar)
        return PiPoly(tuple(c / q for c in self.coeffs))

    def __eq__(self, other):
        other = _as_pipoly(other)
        if other is NotImplemented:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def eval(self, pi_value):
        """Horner evaluation; pi_value may be a float or an mpmath number."""
        total = 0 * pi_value
        for c in reversed(self.coeffs):
            total = total * pi_value + _to_number(c, pi_value)
        return total

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            parts.append(_monomial_str(c, k))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"PiPoly({self})"


def _as_pipoly(value):
    if isinstance(value, PiPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return PiPoly((Fraction(value),))
    return NotImplemented


def _to_number(frac: Fraction, like):
    if isinstance(like, mpmath.mpf):
        return mpmath.mpf(frac.numerator) / frac.denominator
    return frac.numerator / frac.denominator


def _monomial_str(c: Fraction, k: int) -> str:
    pi_part = "" if k == 0 else ("pi" if k == 1 else f"pi^{k}")
    if not pi_part:
        return str(c)
    if c == 1:
        return pi_part
    if c == -1:
        return "-" + pi_part
    return f"{c}*{pi_part}"


_PIPOLY_ZERO = PiPoly()
_PIPOLY_ONE = PiPoly.const(1)


# ---------------------------------------------------------------------------
# trig polynomials
# ---------------------------------------------------------------------------

TermKey = tuple  # (theta_power, half_angle_frequency, SIN | COS)


class TrigPoly:
    """Canonical element of Q[pi][theta, sin(theta/2), cos(theta/2)].

    terms maps (a, m, kind) -> PiPoly; the term value is
    coeff * theta^a * sin(m*theta/2)  or  coeff * theta^a * cos(m*theta/2).
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[TermKey, PiPoly] | None = None):
        canon: dict[TermKey, PiPoly] = {}
        for (a, m, kind), c in (terms or {}).items():
            if a < 0 or m < 0 or kind not in (SIN, COS):
                raise ValueError(f"bad term key ({a}, {m}, {kind})")
            if kind == SIN and m == 0:
                continue  # sin(0) == 0
            c = _as_pipoly(c)
            if c.is_zero:
                continue
            canon[(a, m, kind)] = c
        if len(canon) > TERM_BUDGET:
            raise TermBudgetExceeded(
                f"{len(canon)} terms exceeds the budget of {TERM_BUDGET}")
        self.terms = canon

    # --- constructors ------------------------------------------------

    @classmethod
    def zero(cls) -> "TrigPoly":
        return cls()

    @classmethod
    def one(cls) -> "TrigPoly":
        return cls({(0, 0, COS): _PIPOLY_ONE})

    @classmethod
    def const(cls, value) -> "TrigPoly":
        return cls({(0, 0, COS): _as_pipoly(value)})

    @classmethod
    def theta(cls, power: int = 1) -> "TrigPoly":
        return cls({(power, 0, COS): _PIPOLY_ONE})

    @classmethod
    def sin_half(cls, m: int = 1) -> "TrigPoly":
        """sin(m*theta/2); m = 2 gives sin(theta)."""
        return cls({(0, m, SIN): _PIPOLY_ONE})

    @classmethod
    def cos_half(cls, m: int = 1) -> "TrigPoly":
        """cos(m*theta/2); m = 2 gives cos(theta)."""
        return cls({(0, m, COS): _PIPOLY_ONE})

    # --- structure ----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def max_theta_power(self) -> int:
        return max((a for (a, _, _) in self.terms), default=0)

    def max_frequency(self) -> int:
        return max((m for (_, m, _) in self.terms), default=0)

    # --- operators ------------------------------------------------------

    def __add__(self, other):
        other = _as_trigpoly(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = _as_trigpoly(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, -other)

    def __rsub__(self, other):
        return _as_trigpoly(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PiPoly)):
            c = _as_pipoly(other)
            return TrigPoly({k: v * c for k, v in self.terms.items()})
        other = _as_trigpoly(other)
        if other is NotImplemented:
            return NotImplemented
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = TrigPoly.one()
        base = self
        while n:
            if n & 1:
                out = mul(out, base)
            base = mul(base, base) if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other):
        other = _as_trigpoly(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"TrigPoly({to_text(self)})"


def _as_trigpoly(value):
    if isinstance(value, TrigPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return TrigPoly.const(value)
    if isinstance(value, PiPoly):
        return TrigPoly({(0, 0, COS): value})
    return NotImplemented


def _accum(d: dict, key: TermKey, coeff: PiPoly) -> None:
    cur = d.get(key)
    d[key] = coeff if cur is None else cur + coeff


# ---------------------------------------------------------------------------
# ring operations
# ---------------------------------------------------------------------------

def add(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    out = dict(f.terms)
    for k, c in g.terms.items():
        _accum(out, k, c)
    return TrigPoly(out)


def _trig_product(m1: int, k1: int, m2: int, k2: int):
    """Product-to-sum at half-angle frequencies.

    Yields (m, kind, q) with T1(m1 x) * T2(m2 x) = sum q * T(m x), x = theta/2.
    """
    half = Fraction(1, 2)
    if k1 == COS and k2 == COS:
        yield abs(m1 - m2), COS, half
        yield m1 + m2, COS, half
    elif k1 == SIN and k2 == SIN:
        yield abs(m1 - m2), COS, half
        yield m1 + m2, COS, -half
    else:
        if k1 == COS:  # put the sine first
            m1, m2 = m2, m1
        yield m1 + m2, SIN, half
        d = m1 - m2
        if d >= 0:
            yield d, SIN, half
        else:
            yield -d, SIN, -half


def mul(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    out: dict[TermKey, PiPoly] = {}
    for (a1, m1, k1), c1 in f.terms.items():
        for (a2, m2, k2), c2 in g.terms.items():
            c = c1 * c2
            a = a1 + a2
            for m, kind, q in _trig_product(m1, k1, m2, k2):
                if kind == SIN and m == 0:
                    continue
                _accum(out, (a, m, kind), c * q)
    return TrigPoly(out)


@lru_cache(maxsize=None)
def _term_antiderivative(a: int, m: int, kind: int) -> TrigPoly:
    """Indefinite integral of theta^a * T(m*theta/2), no constant of
    integration.  Repeated integration by parts; exact because 2/m is
    rational."""
    if m == 0:
        return TrigPoly({(a + 1, 0, COS): PiPoly.const(Fraction(1, a + 1))})
    out: dict[TermKey, PiPoly] = {}
    coeff = _ONE
    cur_a, cur_kind = a, kind
    while True:
        if cur_kind == SIN:
            _accum(out, (cur_a, m, COS), PiPoly.const(coeff * Fraction(-2, m)))
            nxt = coeff * Fraction(2 * cur_a, m)
        else:
            _accum(out, (cur_a, m, SIN), PiPoly.const(coeff * Fraction(2, m)))
            nxt = coeff * Fraction(-2 * cur_a, m)
        if cur_a == 0:
            break
        coeff = nxt
        cur_a -= 1
        cur_kind = COS if cur_kind == SIN else SIN
    return TrigPoly(out)


def _value_at_zero(f: TrigPoly) -> PiPoly:
    total = _PIPOLY_ZERO
    for (a, _m, kind), c in f.terms.items():
        if a == 0 and kind == COS:
            total = total + c
    return total


def integrate0(f: TrigPoly) -> TrigPoly:
    """F with F(theta) = int_0^theta f(phi) dphi, exact; F(0) = 0."""
    out: dict[TermKey, PiPoly] = {}
    for (a, m, kind), c in f.terms.items():
        for key, q in _term_antiderivative(a, m, kind).terms.items():
            _accum(out, key, c * q)
    anti = TrigPoly(out)
    v0 = _value_at_zero(anti)
    if v0.is_zero:
        return anti
    return add(anti, TrigPoly({(0, 0, COS): -v0}))


def differentiate(f: TrigPoly) -> TrigPoly:
    out: dict[TermKey, PiPoly] = {}
    for (a, m, kind), c in f.terms.items():
        if a >= 1:
            _accum(out, (a - 1, m, kind), c * Fraction(a))
        if m >= 1:
            if kind == SIN:
                _accum(out, (a, m, COS), c * Fraction(m, 2))
            else:
                _accum(out, (a, m, SIN), c * Fraction(-m, 2))
    return TrigPoly(out)


@lru_cache(maxsize=None)
def _def_integral_from_zero(a: int, m: int, kind: int) -> TrigPoly:
    """int_0^phi eta^a T(m*eta/2) d eta as a TrigPoly in phi."""
    anti = _term_antiderivative(a, m, kind)
    v0 = _value_at_zero(anti)
    if v0.is_zero:
        return anti
    return add(anti, TrigPoly({(0, 0, COS): -v0}))


# (phi-factor kind, eta-factor kind, sign) pairs for T(m*(phi-eta)/2)
_SHIFT_SPLIT = {
    COS: ((COS, COS, 1), (SIN, SIN, 1)),
    SIN: ((SIN, COS, 1), (COS, SIN, -1)),
}


def convolve(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    """h with h(phi) = int_0^phi f(eta) g(phi - eta) d eta, exact.

    Each term pair is expanded with the binomial theorem on (phi-eta)^b and
    the angle-subtraction identities, leaving basic eta-integrals that close
    in the ring.
    """
    out = TrigPoly.zero()
    for (a1, m1, k1), c1 in f.terms.items():
        for (a2, m2, k2), c2 in g.terms.items():
            base = c1 * c2
            for j in range(a2 + 1):
                cj = base * (Fraction(math.comb(a2, j)) * (-1) ** j)
                phi_pow = a2 - j
                for kphi, keta, sign in _SHIFT_SPLIT[k2]:
                    if m2 == 0 and (kphi == SIN or keta == SIN):
                        continue
                    for m, kind, q in _trig_product(m1, k1, m2, keta):
                        if kind == SIN and m == 0:
                            continue
                        inner = _def_integral_from_zero(a1 + j, m, kind)
                        factor = TrigPoly({(phi_pow, m2, kphi): _PIPOLY_ONE})
                        piece = mul(inner, factor) * (cj * (q * sign))
                        out = add(out, piece)
    return out


def reflect(f: TrigPoly) -> TrigPoly:
    """g with g(phi) = f(2*pi - phi), expanded back into the ring.

    (2*pi - phi)^a expands binomially (powers of pi go to coefficients);
    sin(m*(2*pi-phi)/2) = -(-1)^m sin(m*phi/2) and
    cos(m*(2*pi-phi)/2) = (-1)^m cos(m*phi/2).
    """
    out: dict[TermKey, PiPoly] = {}
    for (a, m, kind), c in f.terms.items():
        if kind == SIN:
            c = c * ((-1) ** (m + 1))
        else:
            c = c * ((-1) ** m)
        for j in range(a + 1):
            q = Fraction(math.comb(a, j) * (-1) ** j * 2 ** (a - j))
            _accum(out, (j, m, kind), (c * q).shifted(a - j))
    return TrigPoly(out)


# ---------------------------------------------------------------------------
# power series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerSeries:
    """Truncated exact series; the local variable is theta at anchor "0"
    and eps = 2*pi - theta at anchor "2pi"."""

    anchor: str
    coeffs: tuple
    order: int

    def coefficient(self, k: int) -> PiPoly:
        return self.coeffs[k] if k < len(self.coeffs) else _PIPOLY_ZERO

    def eval(self, x, pi_value=None):
        """Float value at local coordinate x (exact coefficients, then a
        single high-precision Horner pass)."""
        with mpmath.workdps(_EVAL_DPS):
            pi = mpmath.mpf(pi_value) if pi_value is not None else +mpmath.pi
            t = mpmath.mpf(x)
            total = mpmath.mpf(0)
            for c in reversed(self.coeffs):
                total = total * t + c.eval(pi)
            return float(total)

    def __str__(self):
        var = "theta" if self.anchor == "0" else "eps"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            mono = "1" if k == 0 else (var if k == 1 else f"{var}^{k}")
            parts.append(f"({c})*{mono}" if k else f"({c})")
        return " + ".join(parts) if parts else "0"


def _anchor_tag(anchor) -> str:
    if anchor in (0, 0.0, "0"):
        return "0"
    if anchor == "2pi":
        return "2pi"
    try:
        if abs(float(anchor) - TWO_PI) < 1e-9:
            return "2pi"
    except (TypeError, ValueError):
        pass
    raise DomainError(f"series anchor must be 0 or 2*pi, got {anchor!r}")


def _series_at_zero(f: TrigPoly, order: int) -> list:
    out = [_PIPOLY_ZERO] * (order + 1)
    for (a, m, kind), c in f.terms.items():
        if m == 0:
            if a <= order:
                out[a] = out[a] + c
            continue
        ratio = Fraction(m, 2)
        if kind == SIN:
            k = 0
            while a + 2 * k + 1 <= order:
                q = (-1) ** k * ratio ** (2 * k + 1) / math.factorial(2 * k + 1)
                out[a + 2 * k + 1] = out[a + 2 * k + 1] + c * q
                k += 1
        else:
            k = 0
            while a + 2 * k <= order:
                q = (-1) ** k * ratio ** (2 * k) / math.factorial(2 * k)
                out[a + 2 * k] = out[a + 2 * k] + c * q
                k += 1
    return out


def taylor(f: TrigPoly, anchor, order: int) -> PowerSeries:
    """Exact truncated series of f at 0 or 2*pi."""
    if order < 0:
        raise DomainError("series order must be >= 0")
    tag = _anchor_tag(anchor)
    g = f if tag == "0" else reflect(f)
    return PowerSeries(tag, tuple(_series_at_zero(g, order)), order)


def _default_series_order(f: TrigPoly) -> int:
    return 40 + f.max_theta_power() + f.max_frequency()


def eval_num(f: TrigPoly, theta: float, pi_value=None,
             series_order: int | None = None) -> float:
    """Float evaluation of f at theta.

    Below SERIES_SWITCH the canonical basis is evaluated through the exact
    series at 0 (the basis cancels to high order there, e.g. the quadratic
    bracket of the first nontrivial recursion level cancels to O(theta^6)).
    """
    if f.is_zero:
        return 0.0
    if abs(theta) < SERIES_SWITCH:
        order = series_order if series_order is not None \
            else _default_series_order(f)
        return taylor(f, 0, order).eval(theta, pi_value)
    with mpmath.workdps(_EVAL_DPS):
        pi = mpmath.mpf(pi_value) if pi_value is not None else +mpmath.pi
        t = mpmath.mpf(theta)
        total = mpmath.mpf(0)
        for (a, m, kind), c in f.terms.items():
            trig = mpmath.sin(m * t / 2) if kind == SIN else mpmath.cos(m * t / 2)
            total += c.eval(pi) * t ** a * trig
        return float(total)


def eval_at_pi_multiple(f: TrigPoly, k: int) -> PiPoly:
    """Exact value of f at theta = k*pi (k = 1 or 2) as a PiPoly.

    sin and cos of integer multiples of pi/2 are exact in {0, +-1}."""
    if k not in (1, 2):
        raise DomainError("only theta = pi and theta = 2*pi are supported")
    sin_tab = {0: 0, 1: 1, 2: 0, 3: -1}
    cos_tab = {0: 1, 1: 0, 2: -1, 3: 0}
    total = _PIPOLY_ZERO
    for (a, m, kind), c in f.terms.items():
        r = (m * k) % 4
        t = sin_tab[r] if kind == SIN else cos_tab[r]
        if t == 0:
            continue
        contrib = (c * Fraction(t * k ** a)).shifted(a)
        total = total + contrib
    return total


# ---------------------------------------------------------------------------
# singular integration
# ---------------------------------------------------------------------------

@dataclass
class SingularForm:
    """State of the reduction of J/sin(phi/2)^p.

    regular   -- part of the integrand free of negative sin powers
    singular  -- l >= 1 -> {(theta_power, cos_degree<=1) -> PiPoly},
                 the numerator Q_l of the 1/sin(phi/2)^l piece
    log_coeff -- coefficient of the would-be log(sin(phi/2)) term; must be 0
                 for the integral to stay in the ring
    """

    regular: TrigPoly
    singular: dict
    log_coeff: PiPoly


@lru_cache(maxsize=None)
def _sincos_reduced(m: int):
    """sin(m x) and cos(m x) as polynomials in s = sin x, c = cos x with
    cos-degree <= 1 (using c^2 = 1 - s^2); returns two dicts
    {(s_power, c_power): Fraction}."""
    if m == 0:
        return {}, {(0, 0): _ONE}
    sin_prev, cos_prev = _sincos_reduced(m - 1)

    def times_c(d):
        out: dict = {}
        for (k, e), q in d.items():
            if e == 0:
                out[(k, 1)] = out.get((k, 1), _ZERO) + q
            else:  # c^2 = 1 - s^2
                out[(k, 0)] = out.get((k, 0), _ZERO) + q
                out[(k + 2, 0)] = out.get((k + 2, 0), _ZERO) - q
        return out

    def times_s(d):
        return {(k + 1, e): q for (k, e), q in d.items()}

    def combine(d1, d2, sign):
        out = dict(d1)
        for key, q in d2.items():
            out[key] = out.get(key, _ZERO) + sign * q
        return {key: q for key, q in out.items() if q}

    # sin((m)x) = sin((m-1)x) c + cos((m-1)x) s
    sin_m = combine(times_c(sin_prev), times_s(cos_prev), _ONE)
    # cos((m)x) = cos((m-1)x) c - sin((m-1)x) s
    cos_m = combine(times_c(cos_prev), times_s(sin_prev), -_ONE)
    return sin_m, cos_m


def _to_phi_s_c(f: TrigPoly) -> dict:
    """Rewrite f as {(theta_power, s_power, c_degree<=1) -> PiPoly} with
    s = sin(theta/2), c = cos(theta/2)."""
    out: dict = {}
    for (a, m, kind), coeff in f.terms.items():
        table = _sincos_reduced(m)[0 if kind == SIN else 1]
        for (k, e), q in table.items():
            key = (a, k, e)
            cur = out.get(key)
            add_c = coeff * q
            out[key] = add_c if cur is None else cur + add_c
    return {k: v for k, v in out.items() if not v.is_zero}


@lru_cache(maxsize=None)
def _s_power(k: int) -> TrigPoly:
    return TrigPoly.sin_half(1) ** k


@lru_cache(maxsize=None)
def _sc_monomial(k: int, e: int) -> TrigPoly:
    out = _s_power(k)
    if e:
        out = mul(out, TrigPoly.cos_half(1))
    return out


def _sc_dict_to_trigpoly(d: dict) -> TrigPoly:
    """{(a, e) -> PiPoly} with value theta^a * cos(theta/2)^e -> TrigPoly."""
    out = TrigPoly.zero()
    for (a, e), c in d.items():
        base = {(a, 1 if e else 0, COS): _PIPOLY_ONE}
        out = add(out, TrigPoly(base) * c)
    return out


def _series_fraction_pow(base: list, k: int, order: int) -> list:
    """Truncated power of a rational series (lists of Fraction)."""
    out = [_ONE] + [_ZERO] * order
    for _ in range(k):
        nxt = [_ZERO] * (order + 1)
        for i, a in enumerate(out):
            if not a:
                continue
            for j, b in enumerate(base):
                if i + j > order:
                    break
                if b:
                    nxt[i + j] += a * b
        out = nxt
    return out


def _sin_half_series(order: int) -> list:
    out = [_ZERO] * (order + 1)
    k = 0
    while 2 * k + 1 <= order:
        out[2 * k + 1] = (-1) ** k * Fraction(1, 2) ** (2 * k + 1) \
            / math.factorial(2 * k + 1)
        k += 1
    return out


def _series_inverse_rational(u: list, order: int) -> list:
    """Inverse of a rational unit series (u[0] != 0), truncated."""
    inv = [_ZERO] * (order + 1)
    inv[0] = 1 / u[0]
    for k in range(1, order + 1):
        acc = _ZERO
        for j in range(1, k + 1):
            if j < len(u) and u[j]:
                acc += u[j] * inv[k - j]
        inv[k] = -acc / u[0]
    return inv


def _laurent_constant(boundary: dict) -> PiPoly:
    """Limit at 0 of sum_l N_l(phi)/sin(phi/2)^l given the boundary
    numerators; raises SingularityError if any negative power survives."""
    if not boundary:
        return _PIPOLY_ZERO
    max_l = max(boundary)
    laurent: dict[int, PiPoly] = {}
    for l, d in boundary.items():
        poly = _sc_dict_to_trigpoly(d)
        num = _series_at_zero(poly, l)  # PiPoly coefficients
        s_pow = _series_fraction_pow(_sin_half_series(2 * l), l, 2 * l)
        unit = s_pow[l:2 * l + 1]  # s^l / phi^l, unit series
        inv = _series_inverse_rational(unit, l)
        for power in range(-l, 1):
            acc = _PIPOLY_ZERO
            t = power + l  # coefficient index in num * inv
            for i in range(t + 1):
                a = num[i] if i < len(num) else _PIPOLY_ZERO
                if a.is_zero:
                    continue
                b = inv[t - i]
                if b:
                    acc = acc + a * b
            if not acc.is_zero:
                cur = laurent.get(power, _PIPOLY_ZERO)
                laurent[power] = cur + acc
    for power in range(-max_l, 0):
        c = laurent.get(power, _PIPOLY_ZERO)
        if not c.is_zero:
            raise SingularityError(
                f"antiderivative diverges like phi^{power} at 0")
    return laurent.get(0, _PIPOLY_ZERO)


def decompose_singular(J: TrigPoly, p: int) -> SingularForm:
    """Split J/sin(phi/2)^p into regular part and 1/sin^l numerators."""
    regular = TrigPoly.zero()
    singular: dict[int, dict] = {}
    for (a, k, e), coeff in _to_phi_s_c(J).items():
        l = p - k
        if l <= 0:
            piece = mul(TrigPoly.theta(a) if a else TrigPoly.one(),
                        _sc_monomial(-l, e)) * coeff
            regular = add(regular, piece)
        else:
            bucket = singular.setdefault(l, {})
            key = (a, e)
            cur = bucket.get(key)
            bucket[key] = coeff if cur is None else cur + coeff
    return SingularForm(regular=regular, singular=singular,
                        log_coeff=_PIPOLY_ZERO)


def integrate_singular(J: TrigPoly, p: int) -> TrigPoly:
    """G with G(theta) = sin(theta/2)^p * int_0^theta J(phi)/sin(phi/2)^p dphi.

    Requires odd p >= 1 and J vanishing at 0 to order >= p so the integral
    converges with no logarithmic term.  The 1/sin^l pieces are reduced by
    integration by parts with d/dphi (c s^(1-l)) =
    -((l-1)/2) s^(-l) + ((l-2)/2) s^(2-l), s = sin(phi/2), c = cos(phi/2),
    from the largest l down to 1; anything left at l = 1 would integrate to
    a log or polylogarithm, so it must vanish identically.
    """
    if p < 1 or p % 2 == 0:
        raise DomainError("singular power p must be a positive odd integer")
    if J.is_zero:
        return TrigPoly.zero()

    low = _series_at_zero(J, p - 1)
    for i, c in enumerate(low):
        if not c.is_zero:
            raise SingularityError(
                f"integrand only vanishes to order {i} < {p} at 0")

    form = decompose_singular(J, p)
    buckets = form.singular
    boundary: dict[int, dict] = {}

    def push(tbl: dict, l: int, key, coeff: PiPoly):
        bucket = tbl.setdefault(l, {})
        cur = bucket.get(key)
        bucket[key] = coeff if cur is None else cur + coeff

    for l in range(max(buckets, default=1), 1, -1):
        for (a, e), q in list(buckets.get(l, {}).items()):
            if q.is_zero:
                continue
            inv = Fraction(1, l - 1)
            if e == 0:
                # int phi^a s^-l = -2/(l-1) phi^a c s^(1-l)
                #   + 2a/(l-1) int phi^(a-1) c s^(1-l)
                #   + (l-2)/(l-1) int phi^a s^(2-l)
                push(boundary, l - 1, (a, 1), q * (-2 * inv))
                if a >= 1:
                    push(buckets, l - 1, (a - 1, 1), q * (2 * a * inv))
                if l >= 3:
                    push(buckets, l - 2, (a, 0), q * ((l - 2) * inv))
            else:
                # int phi^a c s^-l = -2/(l-1) phi^a s^(1-l)
                #   + 2a/(l-1) int phi^(a-1) s^(1-l)
                push(boundary, l - 1, (a, 0), q * (-2 * inv))
                if a >= 1:
                    push(buckets, l - 1, (a - 1, 0), q * (2 * a * inv))

    leftover = {k: v for k, v in buckets.get(1, {}).items() if not v.is_zero}
    if leftover:
        log_part = leftover.get((0, 1))
        if log_part is not None and len(leftover) == 1:
            raise SingularityError(
                f"nonzero log coefficient {log_part} survives the reduction")
        raise SingularityError(
            f"irreducible 1/sin terms survive the reduction: {leftover}")

    boundary = {l: {k: v for k, v in d.items() if not v.is_zero}
                for l, d in boundary.items()}
    boundary = {l: d for l, d in boundary.items() if d}

    limit0 = _laurent_constant(boundary)

    result = mul(_s_power(p), integrate0(form.regular))
    for l, d in boundary.items():
        result = add(result, mul(_s_power(p - l), _sc_dict_to_trigpoly(d)))
    if not limit0.is_zero:
        result = add(result, _s_power(p) * (-limit0))
    return result


# ---------------------------------------------------------------------------
# serialization and rendering
# ---------------------------------------------------------------------------

_KIND_NAME = {SIN: "sin", COS: "cos"}
_KIND_FROM_NAME = {"sin": SIN, "cos": COS}


def to_json_dict(f: TrigPoly) -> dict:
    terms = []
    for (a, m, kind), c in f.sorted_terms():
        coeffs = [str(q) for q in c.coeffs]
        terms.append({"thetaPow": a, "freq": m,
                      "kind": _KIND_NAME[kind], "coeff": coeffs})
    return {"terms": terms}


def from_json_dict(data: dict) -> TrigPoly:
    terms: dict[TermKey, PiPoly] = {}
    for t in data["terms"]:
        key = (int(t["thetaPow"]), int(t["freq"]), _KIND_FROM_NAME[t["kind"]])
        coeff = PiPoly(Fraction(s) for s in t["coeff"])
        _accum(terms, key, coeff)
    return TrigPoly(terms)


def to_json(f: TrigPoly) -> str:
    return json.dumps(to_json_dict(f), separators=(",", ":"))


def from_json(s: str) -> TrigPoly:
    return from_json_dict(json.loads(s))


def _angle_str(m: int, fn: str) -> str:
    if m % 2 == 0:
        half = m // 2
        inner = "theta" if half == 1 else f"{half}*theta"
    else:
        inner = "theta/2" if m == 1 else f"{m}*theta/2"
    return f"{fn}({inner})"


def _coeff_prefix(c: PiPoly) -> str:
    """Render a PiPoly as a multiplicative prefix ('' for 1, '-' for -1)."""
    nonzero = [q for q in c.coeffs if q]
    if len(nonzero) == 1:
        s = str(c)
        if s == "1":
            return ""
        if s == "-1":
            return "-"
        return s + "*"
    return f"({c})*"


def to_text(f: TrigPoly) -> str:
    """Canonical text grammar: rationals p/q, pi, explicit * and ^."""
    if f.is_zero:
        return "0"
    parts = []
    for (a, m, kind), c in f.sorted_terms():
        factors = []
        if a:
            factors.append("theta" if a == 1 else f"theta^{a}")
        if m or kind == SIN:
            factors.append(_angle_str(m, _KIND_NAME[kind]))
        mono = "*".join(factors)
        if not mono:
            parts.append(str(c) if len([q for q in c.coeffs if q]) == 1
                         else f"({c})")
            continue
        parts.append(_coeff_prefix(c) + mono)
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def _angle_latex(m: int, fn: str) -> str:
    if m % 2 == 0:
        half = m // 2
        inner = r"\theta" if half == 1 else rf"{half}\theta"
    else:
        inner = rf"\tfrac{{{m}\theta}}{{2}}" if m > 1 else r"\tfrac{\theta}{2}"
    return rf"\{fn}\left({inner}\right)"


def _frac_latex(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    sign = "-" if q < 0 else ""
    return rf"{sign}\frac{{{abs(q.numerator)}}}{{{q.denominator}}}"


def to_latex(f: TrigPoly) -> str:
    if f.is_zero:
        return "0"
    parts = []
    for (a, m, kind), c in f.sorted_terms():
        factors = []
        if a:
            factors.append(r"\theta" if a == 1 else rf"\theta^{{{a}}}")
        if m or kind == SIN:
            factors.append(_angle_latex(m, _KIND_NAME[kind]))
        mono = " ".join(factors)
        nonzero = [q for q in c.coeffs if q]
        if len(nonzero) == 1:
            k = c.low_power()
            q = c.coeffs[k]
            cs = _frac_latex(q)
            if k:
                pi_s = r"\pi" if k == 1 else rf"\pi^{{{k}}}"
                cs = pi_s if cs == "1" else (f"-{pi_s}" if cs == "-1"
                                             else cs + pi_s)
            elif cs == "1" and mono:
                cs = ""
            elif cs == "-1" and mono:
                cs = "-"
        else:
            cs = rf"\left({c}\right)"
        parts.append((cs + (" " if cs and mono else "") + mono).strip())
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out
