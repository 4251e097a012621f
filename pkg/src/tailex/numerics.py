"""Shared numerical infrastructure: adaptive quadrature, bracketed root
finding, and the special functions the tail calculus leans on.

Everything here is deterministic: identical inputs produce bitwise-identical
outputs, so the verification suites can freeze expected values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special


class NumericsError(Exception):
    """Base class for numerical failures (divergence, lost brackets...)."""


class QuadratureError(NumericsError):
    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class BracketError(NumericsError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and transform selection for `integrate`.

    transform:
      - "none": integrate on the given domain as-is.
      - "exp_sub": substitute s = exp(-u) (domain must be (0, 1); tames
        power/log endpoint behaviour at s -> 0).
      - "semi_infinite": substitute x = u/(1-u) (domain must be (0, inf)).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdiv: int = 10**6
    transform: str = "none"

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdiv < 1:
            raise ValueError("max_subdiv must be >= 1")
        if self.transform not in ("none", "exp_sub", "semi_infinite"):
            raise ValueError(f"unknown transform {self.transform!r}")


@dataclass(frozen=True)
class RootSpec:
    bracket: tuple[float, float]
    rel_tol: float = 1e-12
    max_iter: int = 200


def integrate_(f: Callable[[float], float], domain: tuple[float, float],
               spec: QuadratureSpec = QuadratureSpec()) -> tuple[float, float]:
    """Adaptive quadrature of f over domain; returns (value, error_estimate).

    Integrable endpoint singularities are fine; raises QuadratureError (with
    the best estimate attached) if the subdivision budget cannot reach the
    requested tolerance.
    """
    a, b = domain
    if spec.transform == "exp_sub":
        if not (a == 0.0 and b == 1.0):
            raise ValueError("exp_sub transform requires domain (0, 1)")
        g = lambda u: f(math.exp(-u)) * math.exp(-u)
        a, b = 0.0, np.inf
    elif spec.transform == "semi_infinite":
        if not (a == 0.0 and np.isinf(b)):
            raise ValueError("semi_infinite transform requires domain (0, inf)")
        g = lambda u: f(u / (1.0 - u)) / (1.0 - u) ** 2
        a, b = 0.0, 1.0
    else:
        g = f
    # scipy's limit is the max number of subintervals per quad call
    limit = int(min(spec.max_subdiv, 10_000))
    with np.errstate(over="ignore", invalid="ignore"):
        value, err = integrate.quad(g, a, b, epsabs=spec.abs_tol,
                                    epsrel=spec.rel_tol, limit=limit)
    if not math.isfinite(value):
        raise QuadratureError("integral evaluated to a non-finite value",
                              best_estimate=value, error_estimate=err)
    if err > 10.0 * max(spec.abs_tol, spec.rel_tol * abs(value)) and err > 1e-8 * abs(value):
        raise QuadratureError(
            f"quadrature did not reach tolerance (err={err:.3e}, value={value:.6e})",
            best_estimate=value, error_estimate=err)
    return value, err


def find_root(residual: Callable[[float], float], spec: RootSpec) -> float:
    """Bracketed root of a continuous residual; never leaves the bracket."""
    lo, hi = spec.bracket
    flo, fhi = residual(lo), residual(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise BracketError(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo:.6e}, f(hi)={fhi:.6e}")
    return optimize.brentq(residual, lo, hi,
                           rtol=max(spec.rel_tol, 4 * np.finfo(float).eps),
                           maxiter=spec.max_iter)


def expand_bracket(residual: Callable[[float], float], lo: float, hi: float,
                   *, lo_cap: float = -np.inf, hi_cap: float = np.inf,
                   factor: float = 2.0, max_steps: int = 200) -> tuple[float, float]:
    """Grow [lo, hi] geometrically (capped) until the residual changes sign."""
    flo, fhi = residual(lo), residual(hi)
    for _ in range(max_steps):
        if flo == 0.0 or fhi == 0.0 or flo * fhi < 0:
            return lo, hi
        if math.isfinite(lo_cap):
            lo = lo_cap + (lo - lo_cap) / factor
        else:
            lo = lo - factor * max(abs(lo), 1.0)
        if math.isfinite(hi_cap):
            hi = hi_cap - (hi_cap - hi) / factor
        else:
            hi = hi + factor * max(abs(hi), 1.0)
        flo, fhi = residual(lo), residual(hi)
    raise BracketError("bracket expansion exhausted without a sign change")


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def log_gamma(x: float) -> float:
    if x <= 0 and x == math.floor(x):
        raise ValueError(f"log_gamma pole at {x}")
    return float(special.gammaln(x))


def beta_fn(a: float, b: float) -> float:
    """Euler Beta function B(a, b), via log-gamma to dodge overflow."""
    for v in (a, b, a + b):
        if v <= 0 and v == math.floor(v):
            raise ValueError(f"beta pole at ({a}, {b})")
    sign = math.copysign(1.0, special.gammasgn(a) * special.gammasgn(b) *
                         special.gammasgn(a + b))
    return sign * math.exp(special.gammaln(a) + special.gammaln(b)
                           - special.gammaln(a + b))


def inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("inc_beta requires positive shape parameters")
    return float(special.betainc(a, b, min(max(x, 0.0), 1.0)))


def inc_beta_inv(a: float, b: float, p: float) -> float:
    if a <= 0 or b <= 0:
        raise ValueError("inc_beta_inv requires positive shape parameters")
    if not 0.0 <= p <= 1.0:
        raise ValueError("probability outside [0, 1]")
    return float(special.betaincinv(a, b, p))
