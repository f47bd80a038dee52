"""Exact recursion for convex-position probabilities in the disk.

The bi-pointed segment probability B_n(theta) is carried through its
polynomially-closed transform

    L_n(theta) = B_n(theta) * (theta - sin theta)^n * sin(theta/2) / n!

which satisfies L_0 = sin(theta/2), L_1 = sin(theta/2)(theta - sin theta) and

    L_n(theta) = 2 sin(theta/2)^(2n+1)
                 * int_0^theta [sum_k conv(L_k, L_(n-1-k))](phi)
                               / sin(phi/2)^(2n+1) dphi        (n >= 2),

an exact ring computation.  The disk probability follows from the closed
integral

    P_D^n = (n-2)! / (2^(n-2) pi^(n-1))
            * int_0^(2pi) sum_k L_k(phi) L_(n-2-k)(2pi - phi) dphi,

evaluated exactly at 2*pi, and alternatively as the limit of B_(n-1)(t)
for t -> 2pi from below (kept as a numerical confirmation).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError
from . import trigring as tr
from .trigring import PiPoly, TrigPoly

#: evaluation of B_n switches to endpoint-matched series inside these margins
ENDPOINT_SWITCH = 0.1


# ---------------------------------------------------------------------------
# exact rational-in-pi values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiRatio:
    """Exact value numerator / (denom * pi^pi_pow).

    Canonical: numerator has integer coefficients with gcd 1, denom is a
    positive integer coprime to that gcd, and any pure pi factor of the
    numerator has been cancelled into pi_pow.
    """

    numerator: PiPoly
    denom: int
    pi_pow: int

    @staticmethod
    def from_parts(numerator: PiPoly, denom=1, pi_pow: int = 0) -> "PiRatio":
        num = numerator
        d = Fraction(denom)
        if num.is_zero:
            return PiRatio(PiPoly(), 1, 0)
        if d == 0:
            raise ZeroDivisionError("PiRatio with zero denominator")
        shift = min(pi_pow, num.low_power())
        if shift:
            num = num.shifted(-shift)
            pi_pow -= shift
        c = num.content()
        num = num / c
        d = d / c
        if d < 0:
            num, d = -num, -d
        # fold the rational denominator into (integer numerator, integer denom)
        num = num * d.denominator
        den_int = d.numerator
        g = math.gcd(int(num.content()), den_int)
        if g > 1:
            num = num / g
            den_int //= g
        return PiRatio(num, den_int, pi_pow)

    @staticmethod
    def exact(value) -> "PiRatio":
        return PiRatio.from_parts(PiPoly.const(Fraction(value)))

    def one_minus(self) -> "PiRatio":
        full = PiPoly.pi_power(self.pi_pow, self.denom)
        return PiRatio.from_parts(full - self.numerator, self.denom,
                                  self.pi_pow)

    def to_float(self) -> float:
        with mpmath.workdps(tr._EVAL_DPS):
            val = self.numerator.eval(+mpmath.pi)
            val /= self.denom * mpmath.pi ** self.pi_pow
            return float(val)

    def __str__(self) -> str:
        num = str(self.numerator)
        if self.denom == 1 and self.pi_pow == 0:
            return num
        if " " in num:
            num = f"({num})"
        pi_part = "" if self.pi_pow == 0 else (
            "pi" if self.pi_pow == 1 else f"pi^{self.pi_pow}")
        if self.denom == 1:
            den = pi_part
        elif pi_part:
            den = f"{self.denom}*{pi_part}"
        else:
            den = str(self.denom)
        if "*" in den:
            den = f"({den})"
        return f"{num}/{den}"


# ---------------------------------------------------------------------------
# the L_n table
# ---------------------------------------------------------------------------

class LTable:
    """Memoized exact L_n values; population is serialized on a lock."""

    def __init__(self):
        self._values: dict[int, TrigPoly] = {}
        self._lock = threading.Lock()

    @property
    def max_index(self) -> int:
        return max(self._values, default=-1)

    def get(self, n: int) -> TrigPoly:
        if n < 0:
            raise DomainError("L_n requires n >= 0")
        with self._lock:
            for k in range(0, n + 1):
                if k not in self._values:
                    self._values[k] = self._compute(k)
            return self._values[n]

    def _compute(self, n: int) -> TrigPoly:
        if n == 0:
            return TrigPoly.sin_half(1)
        if n == 1:
            return tr.mul(TrigPoly.sin_half(1),
                          TrigPoly.theta() - TrigPoly.sin_half(2))
        convolution = self.convolution_sum(n)
        return tr.integrate_singular(convolution, 2 * n + 1) * 2

    def convolution_sum(self, n: int) -> TrigPoly:
        """sum_{k=0}^{n-1} conv(L_k, L_(n-1-k)); symmetric pairs merged."""
        total = TrigPoly.zero()
        for k in range(0, (n - 1) // 2 + 1):
            j = n - 1 - k
            piece = tr.convolve(self._values[k], self._values[j])
            total = tr.add(total, piece * (1 if 2 * k == n - 1 else 2))
        return total


_TABLE = LTable()


def compute_l(n: int, table: LTable | None = None) -> TrigPoly:
    """Exact L_n from the singular-integration recursion (memoized)."""
    return (table or _TABLE).get(n)


# ---------------------------------------------------------------------------
# evaluation of B_n
# ---------------------------------------------------------------------------

def _b_denominator(n: int) -> TrigPoly:
    """(theta - sin theta)^n * sin(theta/2) as a ring element."""
    base = TrigPoly.theta() - TrigPoly.sin_half(2)
    return tr.mul(base ** n, TrigPoly.sin_half(1))


def eval_b(n: int, theta: float, table: LTable | None = None) -> float:
    """B_n(theta) = L_n(theta) n! / ((theta - sin theta)^n sin(theta/2)).

    Near 0 and 2*pi both numerator and denominator vanish to high order;
    there the ratio is evaluated through matched exact series (order
    3n + 10) at the endpoint, which removes the 0/0 cancellation.
    """
    if not 0.0 < theta < tr.TWO_PI:
        raise DomainError(f"theta = {theta} outside (0, 2*pi)")
    if n < 0:
        raise DomainError("B_n requires n >= 0")
    if n <= 1:
        return 1.0
    ln = compute_l(n, table)
    order = 3 * n + 10
    if theta < ENDPOINT_SWITCH or theta > tr.TWO_PI - ENDPOINT_SWITCH:
        anchor = 0 if theta < ENDPOINT_SWITCH else "2pi"
        x = theta if anchor == 0 else tr.TWO_PI - theta
        num = tr.taylor(ln, anchor, order).eval(x)
        den = tr.taylor(_b_denominator(n), anchor, order).eval(x)
        return math.factorial(n) * num / den
    num = tr.eval_num(ln, theta)
    with mpmath.workdps(tr._EVAL_DPS):
        t = mpmath.mpf(theta)
        den = float((t - mpmath.sin(t)) ** n * mpmath.sin(t / 2))
    return math.factorial(n) * num / den


def limit_zero(n: int, table: LTable | None = None) -> Fraction:
    """lim_{t->0} B_n(t), read off the leading series coefficient of L_n.

    L_n(t) ~ B_n(0) (t^3/6)^n (t/2) / n! at 0, so the limit is
    coeff(t^(3n+1)) * 2 * 6^n * n!.  The result is asserted against the
    closed form 12^n / ((n+1)(2n+1)!): any mismatch is an engine bug.
    """
    if n < 0:
        raise DomainError("limit_zero requires n >= 0")
    ln = compute_l(n, table)
    series = tr.taylor(ln, 0, 3 * n + 1)
    for k in range(3 * n + 1):
        if not series.coefficient(k).is_zero:
            raise AssertionError(
                f"L_{n} has unexpected series term at order {k}")
    lead = series.coefficient(3 * n + 1).as_fraction()
    value = lead * 2 * Fraction(6) ** n * math.factorial(n)
    closed = Fraction(12 ** n, (n + 1) * math.factorial(2 * n + 1))
    if value != closed:
        raise AssertionError(
            f"series limit {value} != closed form {closed} for n = {n}")
    return value


# ---------------------------------------------------------------------------
# disk probabilities
# ---------------------------------------------------------------------------

def p_disk_exact(n: int, table: LTable | None = None) -> PiRatio:
    """Exact probability that n uniform points in a disk are in convex
    position, via the closed reflection integral (the 2*pi limit route is
    kept only as a numerical check)."""
    if n < 2:
        raise DomainError("p_disk_exact requires n >= 2")
    table = table or _TABLE
    total = TrigPoly.zero()
    for k in range(0, n - 1):
        piece = tr.mul(compute_l(k, table),
                       tr.reflect(compute_l(n - 2 - k, table)))
        total = tr.add(total, piece)
    integral = tr.eval_at_pi_multiple(tr.integrate0(total), 2)
    prefactor = Fraction(math.factorial(n - 2), 2 ** (n - 2))
    return PiRatio.from_parts(integral * prefactor, 1, n - 1)


def p_disk_via_limit(n: int, t: float, table: LTable | None = None) -> float:
    """B_(n-1)(t) for t just below 2*pi; converges to p_disk_exact(n)."""
    if n < 2:
        raise DomainError("p_disk_via_limit requires n >= 2")
    if not 0.0 < t < tr.TWO_PI:
        raise DomainError(f"t = {t} outside (0, 2*pi)")
    return eval_b(n - 1, t, table)
