"""Numeric two-index recursion and the shared adaptive integrator.

The two-index probabilities B_{n,m}(theta) (m of the n segment points end up
on the hull together with the chord endpoints and the touching point) obey
the same push-the-arc decomposition as the diagonal, with a third class of
points falling inside the triangle spanned by the chord and the touching
point.  Symbolically those integrals leave the trig ring (polylogarithms
appear), so off-diagonal members are computed numerically:

    B_{n,m}(theta) = 2 n! / ((theta - sin theta)^n sin(theta/2))
                     * int_0^theta q(phi)^(2n+1) K(phi) dphi,
    q(phi) = sin(theta/2)/sin(phi/2),

where K collects, over splits n1+n2+n3 = n-1, m1+m2 = m-1,

    4^(n3)/(n1! n2! n3!) * sin(phi/2)^(n3)
      * int_0^phi w1(eta) w2(phi - eta) d eta,
    wi(x) = (x - sin x)^(ni) sin(x/2)^(n3+1) B_{ni,mi}(x).

Every factor is nonnegative, so the whole computation is cancellation-free;
B_{ni,mi} values come from Chebyshev proxies built level by level (bounded
smooth functions interpolate well; the L form would vanish to high order at
the endpoints and lose all relative accuracy there).  The n3 factor uses the
product form 4 sin((phi-eta)/2) sin(phi/2) sin(eta/2), never the cancelling
difference of sines.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .errors import DomainError, ToleranceNotMet
from . import recursion as rec
from . import trigring as tr

TWO_PI = tr.TWO_PI

#: Chebyshev proxy degree, doubled once if the error estimate fails
PROXY_DEGREE = 64
PROXY_TOL = 5e-9

_GL_ORDER = 48


# ---------------------------------------------------------------------------
# generic adaptive integrator (Gauss-Kronrod 7/15 with interval bisection)
# ---------------------------------------------------------------------------

_XGK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


def _panel(fvec, a: float, b: float):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = fvec(mid + half * _XGK)
    k15 = half * float(np.dot(_WGK, vals))
    g7 = half * float(np.dot(_WG, vals[1::2]))
    return k15, abs(k15 - g7)


def adaptive_integrate(f, a: float, b: float, tol: float,
                       vectorized: bool = False,
                       max_panels: int = 4096) -> float:
    """int_a^b f with absolute error estimate <= tol.

    Adaptive bisection on Gauss-Kronrod 7/15 panels; raises ToleranceNotMet
    if max_panels subdivisions cannot reach tol.  Pass vectorized=True when
    f maps ndarray -> ndarray (much faster)."""
    if b < a:
        raise DomainError("integration bounds must satisfy a <= b")
    if a == b:
        return 0.0
    fvec = f if vectorized else \
        (lambda xs: np.array([f(float(x)) for x in xs]))
    val, err = _panel(fvec, a, b)
    heap = [(-err, a, b, val)]
    total_val, total_err = val, err
    panels = 1
    while total_err > tol:
        if panels >= max_panels or not heap:
            raise ToleranceNotMet(
                f"error estimate {total_err:.3e} > tol {tol:.3e} "
                f"after {panels} panels")
        neg_err, pa, pb, pval = heappop(heap)
        total_err += neg_err  # remove this panel's error
        total_val -= pval
        mid = 0.5 * (pa + pb)
        for qa, qb in ((pa, mid), (mid, pb)):
            v, e = _panel(fvec, qa, qb)
            heappush(heap, (-e, qa, qb, v))
            total_val += v
            total_err += e
        panels += 1
    return total_val


# ---------------------------------------------------------------------------
# Chebyshev proxies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChebProxy:
    """Chebyshev interpolant on [lo, hi] with recorded sup-error estimate."""

    coeffs: np.ndarray
    lo: float
    hi: float
    sup_error: float

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        y = (2.0 * np.asarray(x, dtype=float) - self.lo - self.hi) \
            / (self.hi - self.lo)
        y2 = 2.0 * y
        d = np.zeros_like(y)
        dd = np.zeros_like(y)
        for c in self.coeffs[:0:-1]:  # Clenshaw
            d, dd = y2 * d - dd + c, d
        return y * d - dd + 0.5 * self.coeffs[0]

    @staticmethod
    def nodes(degree: int, lo: float, hi: float) -> np.ndarray:
        n = degree + 1
        x = np.cos(np.pi * (np.arange(n) + 0.5) / n)
        return 0.5 * (hi - lo) * x + 0.5 * (hi + lo)

    @classmethod
    def fit(cls, fvec, degree: int, lo: float, hi: float,
            check_points: int = 33) -> "ChebProxy":
        """Interpolate fvec at Chebyshev roots; the sup-error estimate comes
        from fresh samples at a finer node set."""
        n = degree + 1
        xs = cls.nodes(degree, lo, hi)
        samples = np.asarray(fvec(xs), dtype=float)
        k = np.arange(n)
        basis = np.cos(np.pi * np.outer(k, k + 0.5) / n)
        coeffs = (2.0 / n) * basis @ samples
        proxy = cls(coeffs=coeffs, lo=lo, hi=hi, sup_error=0.0)
        check_x = cls.nodes(check_points - 1, lo, hi)
        err = float(np.max(np.abs(proxy(check_x) - np.asarray(fvec(check_x)))))
        return cls(coeffs=coeffs, lo=lo, hi=hi, sup_error=err)


# ---------------------------------------------------------------------------
# stable scalar/array helpers
# ---------------------------------------------------------------------------

def x_minus_sin(x):
    """x - sin x without cancellation near 0 (series below 0.1)."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.1
    xs = np.where(small, x, 0.0)
    x2 = xs * xs
    series = xs * x2 * (1.0 / 6.0 + x2 * (-1.0 / 120.0
                        + x2 * (1.0 / 5040.0 - x2 / 362880.0)))
    return np.where(small, series, x - np.sin(x))


def _l_prefactor(x, n: int):
    """(x - sin x)^n * sin(x/2) / n!, stable at both endpoints."""
    x = np.asarray(x, dtype=float)
    return x_minus_sin(x) ** n * np.sin(0.5 * x) / math.factorial(n)


# ---------------------------------------------------------------------------
# the (n, m) table
# ---------------------------------------------------------------------------

def _valid_pair(n: int, m: int) -> bool:
    return (n == 0 and m == 0) or (n >= 1 and 1 <= m <= n)


def _split_terms(n: int, m: int):
    """Splits (n1,m1,n2,m2,n3,coeff) of the two-index decomposition."""
    out = []
    for n1 in range(n):
        for n2 in range(n - n1):
            n3 = n - 1 - n1 - n2
            for m1 in range(m):
                m2 = m - 1 - m1
                if _valid_pair(n1, m1) and _valid_pair(n2, m2):
                    coeff = 4.0 ** n3 / (math.factorial(n1)
                                         * math.factorial(n2)
                                         * math.factorial(n3))
                    out.append((n1, m1, n2, m2, n3, coeff))
    return out


class LnmEntry:
    """One member of the (n, m) table.

    Evaluates B_{n,m} (bounded form) and L_{n,m} = B * prefactor.  kind is
    'zero', 'one' (B identically 1), 'diag' (proxy sampled from the exact
    engine) or 'cheb' (proxy from the numeric recursion).
    """

    def __init__(self, n: int, m: int, kind: str, proxy: ChebProxy | None):
        self.n = n
        self.m = m
        self.kind = kind
        self.proxy = proxy

    def b_value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "one":
            return np.ones_like(x)
        return self.proxy(x)

    def l_value(self, x):
        if self.kind == "zero":
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.b_value(x) * _l_prefactor(x, self.n)

    def __call__(self, x):
        return self.l_value(x)

    @property
    def sup_error(self) -> float:
        return self.proxy.sup_error if self.proxy is not None else 0.0


class LnmTable:
    """Level-by-level table of B_{n,m} proxies.

    Diagonal entries are sampled from the exact recursion; k < l entries are
    exact zeros; off-diagonal entries are built from the double integral
    using lower levels.  Population is serialized on a lock; finished
    entries are immutable.
    """

    def __init__(self, degree: int = PROXY_DEGREE, tol: float = PROXY_TOL,
                 table: rec.LTable | None = None):
        self.degree = degree
        self.tol = tol
        self._ltable = table
        self._entries: dict[tuple[int, int], LnmEntry] = {}
        self._lock = threading.RLock()
        glx, glw = np.polynomial.legendre.leggauss(_GL_ORDER)
        self._glx = 0.5 * (glx + 1.0)  # nodes on (0, 1)
        self._glw = 0.5 * glw

    def entry(self, n: int, m: int) -> LnmEntry:
        if n < 0 or m < 0:
            raise DomainError("indices must be nonnegative")
        with self._lock:
            key = (n, m)
            if key not in self._entries:
                self._entries[key] = self._build(n, m)
            return self._entries[key]

    # --- construction --------------------------------------------------

    def _build(self, n: int, m: int) -> LnmEntry:
        if m > n or (m == 0 and n >= 1):
            return LnmEntry(n, m, "zero", None)
        if (n, m) in ((0, 0), (1, 1)):
            return LnmEntry(n, m, "one", None)
        if m == n:
            return self._build_diagonal(n)
        return self._build_offdiag(n, m)

    def _fit_with_refinement(self, fvec, kind, n, m) -> LnmEntry:
        proxy = ChebProxy.fit(fvec, self.degree, 0.0, TWO_PI)
        if proxy.sup_error > self.tol:
            proxy = ChebProxy.fit(fvec, 2 * self.degree, 0.0, TWO_PI)
        return LnmEntry(n, m, kind, proxy)

    def _build_diagonal(self, n: int) -> LnmEntry:
        def fvec(xs):
            return np.array([rec.eval_b(n, float(x), self._ltable)
                             for x in np.atleast_1d(xs)])
        return self._fit_with_refinement(fvec, "diag", n, n)

    def _build_offdiag(self, n: int, m: int) -> LnmEntry:
        terms = []
        for n1, m1, n2, m2, n3, coeff in _split_terms(n, m):
            e1 = self.entry(n1, m1)
            e2 = self.entry(n2, m2)
            if e1.kind == "zero" or e2.kind == "zero":
                continue
            terms.append((e1, e2, n1, n2, n3, coeff))

        def b_at(theta: float) -> float:
            # the kernel q^(2n+1) already carries sin(theta/2)^(2n+1)
            integral = self._outer_integral(theta, n, terms)
            pref = 2.0 * math.factorial(n) \
                / (float(x_minus_sin(theta)) ** n * math.sin(0.5 * theta))
            return pref * integral

        def fvec(xs):
            return np.array([b_at(float(x)) for x in np.atleast_1d(xs)])

        return self._fit_with_refinement(fvec, "cheb", n, m)

    def _ktilde(self, phi: np.ndarray, terms) -> np.ndarray:
        """K(phi) for an array of phi values; inner integral by fixed
        Gauss-Legendre on (0, phi).  Everything is nonnegative."""
        phi = np.atleast_1d(phi)
        eta = phi[:, None] * self._glx[None, :]
        wts = phi[:, None] * self._glw[None, :]
        rev = phi[:, None] - eta
        xms_eta = x_minus_sin(eta)
        xms_rev = x_minus_sin(rev)
        s_eta = np.sin(0.5 * eta)
        s_rev = np.sin(0.5 * rev)
        s_phi = np.sin(0.5 * phi)
        acc = np.zeros_like(phi)
        for e1, e2, n1, n2, n3, coeff in terms:
            w1 = xms_eta ** n1 * s_eta ** (n3 + 1) * e1.b_value(eta)
            w2 = xms_rev ** n2 * s_rev ** (n3 + 1) * e2.b_value(rev)
            inner = np.sum(w1 * w2 * wts, axis=1)
            acc += coeff * s_phi ** n3 * inner
        return acc

    def _outer_integral(self, theta: float, n: int, terms) -> float:
        """int_0^theta (sin(theta/2)/sin(phi/2))^(2n+1) K(phi) dphi.

        For theta near 2*pi the kernel concentrates in a boundary layer of
        width 2*pi - theta; that part is integrated in a log variable."""
        s_theta = math.sin(0.5 * theta)
        power = 2 * n + 1

        def h(phis):
            return self._ktilde(phis, terms) \
                * (s_theta / np.sin(0.5 * phis)) ** power

        eps = TWO_PI - theta
        if eps >= 0.5:
            coarse, _ = _panel(h, 0.0, theta)
            tol = max(1e-300, 1e-11 * abs(coarse))
            return adaptive_integrate(h, 0.0, theta, tol, vectorized=True)
        cut = TWO_PI - 0.5

        def h_log(w):
            v = eps * np.exp(w)
            return h(TWO_PI - v) * v

        w_max = math.log(0.5 / eps)
        c1, _ = _panel(h, 0.0, cut)
        c2, _ = _panel(h_log, 0.0, w_max)
        tol = max(1e-300, 0.5e-11 * (abs(c1) + abs(c2)))
        return adaptive_integrate(h, 0.0, cut, tol, vectorized=True) \
            + adaptive_integrate(h_log, 0.0, w_max, tol, vectorized=True)


_DEFAULT_TABLE = LnmTable()


def default_table() -> LnmTable:
    return _DEFAULT_TABLE


def compute_lnm(n: int, m: int, table: LnmTable | None = None) -> LnmEntry:
    """Proxy for L_{n,m}; call it at theta, or use .b_value for B_{n,m}.

    Entries with m > n (and m = 0 with n >= 1) are exact zero functions."""
    return (table or _DEFAULT_TABLE).entry(n, m)


def eval_bnm(n: int, m: int, theta: float,
             table: LnmTable | None = None) -> float:
    """B_{n,m}(theta) from the proxy table (endpoint-safe by construction)."""
    if not 0.0 < theta < TWO_PI:
        raise DomainError(f"theta = {theta} outside (0, 2*pi)")
    if not 1 <= m <= n:
        raise DomainError("eval_bnm requires 1 <= m <= n")
    return float((table or _DEFAULT_TABLE).entry(n, m).b_value(theta))


def _pdisk_pairs(n: int, m: int):
    """(n1,m1,n2,m2) with n1+n2 = n-2, m1+m2 = m-2 and both pairs valid.

    The touching-point bookkeeping of the disk decomposition fixes the index
    shift at 2 (the boundary point plus the normalization), which is also
    the only convention coherent with the diagonal closed integral; it is
    validated against the printed two-index values in the tests.
    """
    out = []
    for n1 in range(n - 1):
        n2 = n - 2 - n1
        for m1 in range(m - 1):
            m2 = m - 2 - m1
            if _valid_pair(n1, m1) and _valid_pair(n2, m2):
                out.append((n1, m1, n2, m2))
    return out


def p_disk_nm(n: int, m: int, table: LnmTable | None = None) -> float:
    """Probability that exactly m of n uniform disk points are hull
    vertices, via the reflection integral over two-index L proxies."""
    if n < 3:
        raise DomainError("p_disk_nm requires n >= 3")
    if not 3 <= m <= n:
        raise DomainError("a generic hull has at least 3 vertices")
    table = table or _DEFAULT_TABLE
    pairs = [(table.entry(n1, m1), table.entry(n2, m2))
             for n1, m1, n2, m2 in _pdisk_pairs(n, m)]
    pairs = [(e1, e2) for e1, e2 in pairs
             if e1.kind != "zero" and e2.kind != "zero"]
    if not pairs:
        return 0.0

    def integrand(phis):
        acc = np.zeros_like(phis)
        for e1, e2 in pairs:
            acc += e1.l_value(phis) * e2.l_value(TWO_PI - phis)
        return acc

    coarse, _ = _panel(integrand, 0.0, TWO_PI)
    tol = max(1e-14, 1e-10 * abs(coarse))
    integral = adaptive_integrate(integrand, 0.0, TWO_PI, tol,
                                  vectorized=True)
    prefactor = math.factorial(n - 2) / (2 ** (n - 2) * math.pi ** (n - 1))
    return prefactor * integral
