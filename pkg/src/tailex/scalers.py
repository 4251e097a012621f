"""Scaling factors S in (0, 1): moment maps, distribution functions, and the
power-form metadata of the transformed tail x |-> P(S > 1 - 1/x) that the
Gumbel/Weibull expansions consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from scipy import special

from .numerics import QuadratureSpec, beta_fn, integrate_
from .rv_kernel import HallFunction, hall_auxiliaries

__all__ = ["Scaler", "ScalerTailMeta", "beta_scaler", "unit_scaler",
           "uniform_scaler", "scaler_moment_vector", "parse_scaler_spec",
           "ScalerSpecError"]


@dataclass(frozen=True)
class ScalerTailMeta:
    """P(S > 1 - 1/x) = scale * x^-alpha_g (1 + c x^varrho_g + d x^{2 varrho_g}),
    with its regular-variation auxiliaries."""

    alpha_g: float
    varrho_g: float
    varsigma_g: float
    A_tilde: Callable[[float], float]
    B_tilde: Optional[Callable[[float], float]]
    A_is_zero: bool = False
    B_is_zero: bool = False
    aux_ratio: float = 1.0


@dataclass(frozen=True)
class Scaler:
    name: str
    cdf: Callable[[float], float]
    moment: Callable[[float], float]
    pdf: Optional[Callable[[float], float]] = None
    tail_meta: Optional[ScalerTailMeta] = None
    is_unit: bool = False

    def sf_shifted(self, z: float) -> float:
        """P(S > 1 - 1/z) for z >= 1."""
        return 1.0 - self.cdf(1.0 - 1.0 / z)


def beta_scaler(a: float, b: float) -> Scaler:
    """S ~ Beta(a, b); moment(l) = B(a+l, b)/B(a, b).

    P(S > 1 - s) = (s^b/(b B(a,b))) (1 - (b(a-1)/(b+1)) s
                   + (b(a-1)(a-2)/(2(b+2))) s^2 (1+o(1))), so the shifted
    tail is a three-term power form with indices (-b, -1, -1).  For a = 1 the
    tail is exactly s^b (all corrections vanish).
    """
    if a <= 0 or b <= 0:
        raise ValueError("Beta scaler parameters must be positive")
    Bab = beta_fn(a, b)

    def cdf(s: float) -> float:
        if s <= 0.0:
            return 0.0
        if s >= 1.0:
            return 1.0
        return float(special.betainc(a, b, s))

    def pdf(s: float) -> float:
        if not 0.0 < s < 1.0:
            return 0.0
        return s ** (a - 1.0) * (1.0 - s) ** (b - 1.0) / Bab

    def moment(l: float) -> float:
        if l < 0:
            raise ValueError("moments are defined for exponents l >= 0")
        return beta_fn(a + l, b) / Bab

    cg = -b * (a - 1.0) / (b + 1.0)
    dg = b * (a - 1.0) * (a - 2.0) / (2.0 * (b + 2.0))
    if a == 1.0:
        meta = ScalerTailMeta(alpha_g=b, varrho_g=-1.0, varsigma_g=-1.0,
                              A_tilde=lambda z: 0.0, B_tilde=None,
                              A_is_zero=True, B_is_zero=True,
                              aux_ratio=math.nan)
    else:
        hall = HallFunction(a=1.0 / (b * Bab), alpha=-b, c=cg, d=dg, rho=-1.0)
        A_t, B_t = hall_auxiliaries(hall)
        meta = ScalerTailMeta(alpha_g=b, varrho_g=-1.0, varsigma_g=-1.0,
                              A_tilde=A_t,
                              B_tilde=B_t if dg != 0.0 else (lambda z: 0.0),
                              B_is_zero=(dg == 0.0),
                              aux_ratio=hall.aux_ratio)
    return Scaler(name=f"beta(a={a:g},b={b:g})", cdf=cdf, moment=moment,
                  pdf=pdf, tail_meta=meta)


def uniform_scaler() -> Scaler:
    s = beta_scaler(1.0, 1.0)
    return Scaler(name="uniform", cdf=s.cdf, moment=lambda l: 1.0 / (l + 1.0),
                  pdf=s.pdf, tail_meta=s.tail_meta)


def unit_scaler() -> Scaler:
    """Degenerate scaler S == 1: no deflation at all."""

    def cdf(s: float) -> float:
        return 1.0 if s >= 1.0 else 0.0

    return Scaler(name="unit", cdf=cdf, moment=lambda l: 1.0, pdf=None,
                  tail_meta=None, is_unit=True)


def scaler_moment_vector(s: Scaler, exponents: Sequence[float]) -> list[float]:
    """Batch E[S^l]; exact Beta path when available, else quadrature of
    int_0^1 s^l dG(s) to 1e-10."""
    out = []
    for l in exponents:
        if l < 0:
            raise ValueError(f"negative exponent {l}: E[S^l] may diverge")
        if s.pdf is None:
            out.append(s.moment(l))
            continue
        val, _ = integrate_(lambda u, _l=l: u ** _l * s.pdf(u), (0.0, 1.0),
                            QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15))
        out.append(val)
    return out


class ScalerSpecError(ValueError):
    pass


def parse_scaler_spec(spec: str) -> Scaler:
    """Parse 'beta:a=1,b=2.5', 'uniform', or 'unit'."""
    head, _, tail = spec.strip().partition(":")
    head = head.lower()
    if head == "unit":
        return unit_scaler()
    if head == "uniform":
        return uniform_scaler()
    if head != "beta":
        raise ScalerSpecError(f"unknown scaler {head!r}; expected beta/uniform/unit")
    kwargs = {}
    for item in tail.split(",") if tail else []:
        key, eq, val = item.partition("=")
        key = key.strip()
        if not eq or key not in ("a", "b"):
            raise ScalerSpecError(f"bad scaler parameter {item!r} (takes a, b)")
        try:
            kwargs[key] = float(val)
        except ValueError:
            raise ScalerSpecError(f"parameter {key!r} has non-numeric value {val!r}")
    missing = [k for k in ("a", "b") if k not in kwargs]
    if missing:
        raise ScalerSpecError(f"beta scaler missing parameter(s) {missing}")
    try:
        return beta_scaler(**kwargs)
    except ValueError as exc:
        raise ScalerSpecError(str(exc)) from exc
