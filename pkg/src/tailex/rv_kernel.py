"""Regular-variation calculus kernels.

The building blocks of every expansion in this package are the iterated
integrals

    D_g(x)       = int_1^x y^{g-1} dy                    = (x^g - 1)/g
    H_{g,r}(x)   = int_1^x y^{g-1} D_r(y) dy
    R_{g,r,e}(x) = int_1^x y^{g-1} H_{r,e}(y) dy

with the convention D_0(x) = ln x.  All three are divided differences of the
entire function b |-> (x^b - 1)/b, which in turn are divided differences of
exp at the nodes {0, gL, (g+r)L, (g+r+e)L}, L = ln x:

    D_g(x)       = L   * exp[0, gL]
    H_{g,r}(x)   = L^2 * exp[0, gL, (g+r)L]
    R_{g,r,e}(x) = L^3 * exp[0, gL, (g+r)L, (g+r+e)L].

Divided differences of exp are smooth in the nodes, so every degenerate
parameter combination (g = 0, r = 0, g + r = 0, ...) is handled by one code
path with no catastrophic cancellation: clustered nodes switch to a centered
Taylor series, separated nodes use the classic recurrence.

The module also implements the three-term power-law ("Hall") representation
f(x) = a x^alpha (1 + c x^rho + d x^{2 rho}), its asymptotic inverse, the
auxiliary functions that make it third-order regularly varying, and an
empirical checker for the uniform error envelope of the third-order limit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "RvParams", "HallFunction", "DreesReport", "DreesGrid",
    "d_kernel", "h_kernel", "r_kernel",
    "hall_invert", "hall_invert_coeffs", "hall_auxiliaries",
    "drees_check",
]


@dataclass(frozen=True)
class RvParams:
    """Index triple of a third-order regularly varying function."""

    gamma: float
    rho: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if self.rho > 0 or self.eta > 0:
            raise ValueError("second/third-order indices must be <= 0")


# ---------------------------------------------------------------------------
# divided differences of exp
# ---------------------------------------------------------------------------

_SERIES_SPREAD = 1.0
_SERIES_TERMS = 60


def _exp_dd_series(nodes: tuple[float, ...]) -> float:
    """Centered Taylor series: exp[w0..wk] = e^c sum_n h_n(w-c) / (n+k)!.

    h_n is the complete homogeneous symmetric polynomial; valid for any node
    multiset, used when the spread is small (terms decay ~ (spread/2)^n/n!).
    """
    k = len(nodes) - 1
    c = sum(nodes) / len(nodes)
    w = [z - c for z in nodes]
    # h[n] via the one-variable-at-a-time recurrence
    # h_n(w1..wm) = h_n(w1..w{m-1}) + wm * h_{n-1}(w1..wm)
    h = [0.0] * (_SERIES_TERMS + 1)
    h[0] = 1.0
    for wi in w:
        for n in range(1, _SERIES_TERMS + 1):
            h[n] += wi * h[n - 1]
    fact = math.factorial(k)
    term_scale = 1.0 / fact
    total = h[0] * term_scale
    small = 0
    for n in range(1, _SERIES_TERMS + 1):
        term_scale /= (n + k)
        t = h[n] * term_scale
        total += t
        # h_n vanishes for symmetric node sets at odd n: stop only after two
        # consecutive negligible terms
        small = small + 1 if abs(t) < 1e-18 * abs(total) else 0
        if small >= 2:
            break
    return math.exp(c) * total


def _exp_dd(nodes: tuple[float, ...]) -> float:
    """Divided difference of exp over up to four real nodes, any coincidences."""
    if len(nodes) == 1:
        return math.exp(nodes[0])
    zs = tuple(sorted(nodes))
    spread = zs[-1] - zs[0]
    if spread <= _SERIES_SPREAD:
        return _exp_dd_series(zs)
    if len(zs) == 2:
        # exp[a,b] = e^{(a+b)/2} * sinh(h)/h, h = (b-a)/2
        hh = 0.5 * (zs[1] - zs[0])
        return math.exp(0.5 * (zs[0] + zs[1])) * math.sinh(hh) / hh
    return (_exp_dd(zs[1:]) - _exp_dd(zs[:-1])) / spread


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def _check_x(x: float) -> float:
    if not (x > 0) or not math.isfinite(x):
        raise ValueError(f"kernel argument must be a positive finite real, got {x}")
    return math.log(x)


def d_kernel(x: float, gamma: float) -> float:
    """(x^gamma - 1)/gamma, continuous in gamma (log branch at gamma = 0).

    Branch selection: exact log for |gamma| < 1e-12, a short Taylor series in
    z = gamma*ln(x) on the cancellation band |z| < 1e-4, plain formula
    elsewhere (via expm1, which is already stable in z).
    """
    L = _check_x(x)
    if abs(gamma) < 1e-12:
        return L
    z = gamma * L
    if abs(z) < 1e-4:
        return L * (1.0 + z / 2.0 + z * z / 6.0)
    return math.expm1(z) / gamma


def h_kernel(x: float, gamma: float, rho: float) -> float:
    """Second-order kernel H_{gamma,rho}(x); all degeneracies supported."""
    L = _check_x(x)
    if L == 0.0:
        return 0.0
    return L * L * _exp_dd((0.0, gamma * L, (gamma + rho) * L))


def r_kernel(x: float, params: RvParams) -> float:
    """Third-order kernel R_{gamma,rho,eta}(x); all degeneracies supported."""
    L = _check_x(x)
    if L == 0.0:
        return 0.0
    g, r, e = params.gamma, params.rho, params.eta
    return L ** 3 * _exp_dd((0.0, g * L, (g + r) * L, (g + r + e) * L))


def rv_second_limit(x: float, gamma: float, rho: float) -> float:
    """x^gamma * D_rho(x) / gamma: the second-order limit shape when the
    input is given in ratio (RV) form rather than difference (ERV) form."""
    return x ** gamma * d_kernel(x, rho) / gamma


def rv_third_limit(x: float, params: RvParams) -> float:
    """x^gamma * D_{rho+eta}(x) / gamma: ratio-form third-order limit."""
    g = params.gamma
    return x ** g * d_kernel(x, params.rho + params.eta) / g


# ---------------------------------------------------------------------------
# Hall representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HallFunction:
    """f(x) = a * x**alpha * (1 + c*x**rho + d*x**(2*rho)), rho < 0."""

    a: float
    alpha: float
    c: float = 0.0
    d: float = 0.0
    rho: float = -1.0

    def __post_init__(self):
        if self.a == 0.0:
            raise ValueError("scale a must be nonzero")
        if self.rho >= 0:
            raise ValueError("correction exponent rho must be negative")

    def value(self, x: float) -> float:
        w = x ** self.rho
        return self.a * x ** self.alpha * (1.0 + self.c * w + self.d * w * w)

    @property
    def aux_ratio(self) -> float:
        """Ratio between the second-order auxiliary of A and B itself.

        A(t) = rho*c*t^rho/(1+c*t^rho) satisfies A(tx)/A(t) =
        x^rho (1 + D_rho(x) * (-rho c t^rho) (1+o(1))), so A's own
        second-order auxiliary is -rho*c^2/(2d) times B = (2d/c) t^rho.
        Third-order cross terms in downstream expansions need this ratio.
        """
        if self.c == 0.0 or self.d == 0.0:
            return math.nan
        return -self.rho * self.c ** 2 / (2.0 * self.d)


def hall_invert_coeffs(f: HallFunction) -> tuple[float, float, float]:
    """Coefficients (1, k1, k2) of the three-term asymptotic inverse

        f^{<-}(t) = (t/a)^{1/alpha} (1 + k1 (t/a)^{rho/alpha}
                                       + k2 (t/a)^{2 rho/alpha}).
    """
    if f.alpha == 0.0:
        raise ValueError("inverse expansion requires a nonzero exponent")
    al, c, d, rho = f.alpha, f.c, f.d, f.rho
    k1 = -c / al
    k2 = (c * c / (2 * al * al)) * (1 + al + 2 * rho) - d / al
    return 1.0, k1, k2


def hall_invert(f: HallFunction, t: float) -> float:
    """Three-term expansion of the inverse, evaluated at t.

    For alpha > 0 the expansion is for t -> inf; for alpha < 0 for t -> 0+
    (then f maps large x to small t). Same coefficient formula either way.
    """
    _, k1, k2 = hall_invert_coeffs(f)
    base = (t / f.a) ** (1.0 / f.alpha)
    w = (t / f.a) ** (f.rho / f.alpha)
    return base * (1.0 + k1 * w + k2 * w * w)


def hall_auxiliaries(f: HallFunction) -> tuple[Callable[[float], float],
                                               Callable[[float], float]]:
    """(A, B) making f third-order regularly varying with indices
    (alpha, rho, rho):  A(t) = rho c t^rho / (1 + c t^rho),  B(t) = (2d/c) t^rho.

    c = 0 degenerates to an exact power law: A is identically zero (flagged by
    callers through `f.c == 0`), and B is undefined.
    """
    if f.c == 0.0:
        def A(t: float) -> float:
            return 0.0
        return A, None

    def A(t: float) -> float:
        w = t ** f.rho
        return f.rho * f.c * w / (1.0 + f.c * w)

    def B(t: float) -> float:
        return 2.0 * f.d / f.c * t ** f.rho

    return A, B


# ---------------------------------------------------------------------------
# empirical envelope checker for the third-order limit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DreesGrid:
    """Geometric t-ladder [t0, t_max] x explicit x-values."""

    t_count: int = 20
    t_max: float = 1e10
    x_values: tuple[float, ...] = (0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)


@dataclass
class DreesReport:
    epsilon: float
    t0: float
    grid: list[tuple[float, float]]
    violations: list[tuple[float, float]]
    max_slack: float
    calibrated: bool
    skipped: int = 0

    @property
    def clean(self) -> bool:
        return self.calibrated and not self.violations


_T0_LADDER = tuple(10.0 ** k for k in range(2, 11))


def drees_check(f_triple, params: RvParams, epsilon: float, t0: float,
                grid_spec: DreesGrid = DreesGrid(), *,
                limit_form: str = "erv", envelope_c: float = 1.0) -> DreesReport:
    """Empirically verify the uniform third-order error envelope

        | (f(tx)-f(t))/a(t) - D(x) - A(t) H(x) ) / (A(t) B(t)) - R(x) |
            <= eps (1 + x^g + 2 x^{g+r} + 4 x^{g+r+e} e^{eps|ln x|}
                      + 1{g=r=0} e^{C |ln x|})

    over a (t, x) grid with min(t, t*x) >= t0.  The bound is guaranteed for
    *some* t0(eps); none is constructive, so t0 is calibrated upward along a
    geometric ladder until the grid is clean (or the ladder caps out).

    f_triple = (f, a, A, B) of exact callables.  limit_form selects the pair
    of limit shapes: "erv" uses (H_{g,r}, R_{g,r,e}); "rv" uses the ratio-form
    shapes (x^g D_r(x)/g, x^g D_{r+e}(x)/g) appropriate when f is known through
    f(tx)/f(t) with a(t) = g*f(t).  envelope_c is the unquantified constant in
    the g = r = 0 envelope term.
    """
    f, a, A, B = f_triple
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    g, r, e = params.gamma, params.rho, params.eta
    probe = A(max(t0, 1e3))
    if probe == 0.0:
        raise ValueError("degenerate auxiliary: A vanishes, nothing to check")
    if limit_form == "erv":
        Hfun = lambda x: h_kernel(x, g, r)
        Rfun = lambda x: r_kernel(x, params)
    elif limit_form == "rv":
        Hfun = lambda x: rv_second_limit(x, g, r)
        Rfun = lambda x: rv_third_limit(x, params)
    else:
        raise ValueError(f"unknown limit_form {limit_form!r}")

    def envelope(x: float) -> float:
        lx = abs(math.log(x))
        env = 1.0 + x ** g + 2.0 * x ** (g + r) + 4.0 * x ** (g + r + e) * math.exp(epsilon * lx)
        if g == 0.0 and r == 0.0:
            env += math.exp(envelope_c * lx)
        return epsilon * env

    ladder = [v for v in _T0_LADDER if v >= t0] or [t0]
    if ladder[0] > t0:
        ladder.insert(0, t0)
    last = None
    for cand in ladder:
        grid, violations, skipped = [], [], 0
        max_slack = -math.inf
        ts = np.geomspace(cand, max(grid_spec.t_max, cand * 10), grid_spec.t_count)
        for t in ts:
            at, At = a(t), A(t)
            Bt = B(t)
            for x in grid_spec.x_values:
                if min(t, t * x) < cand:
                    continue
                if At == 0.0 or Bt == 0.0:
                    skipped += 1
                    warnings.warn(f"A(t)B(t)=0 at t={t:g}; point skipped")
                    continue
                grid.append((float(t), float(x)))
                lhs = ((f(t * x) - f(t)) / at - d_kernel(x, g) - At * Hfun(x)) / (At * Bt)
                dev = abs(lhs - Rfun(x)) - envelope(x)
                max_slack = max(max_slack, dev)
                if dev > 0:
                    violations.append((float(t), float(x)))
        last = DreesReport(epsilon=epsilon, t0=float(cand), grid=grid,
                           violations=violations, max_slack=max_slack,
                           calibrated=not violations, skipped=skipped)
        if last.calibrated:
            return last
    return last
