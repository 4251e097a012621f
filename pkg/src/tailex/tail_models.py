"""Concrete risk distributions with exact distribution functions and
hand-derived third-order regular-variation profiles.

Each model bundles two views of the same tail:

* exact callables (cdf, survival, quantile, tail quantile U) used by the
  numerical oracles, accurate to ~1e-12 relative;
* an RvProfile: the max-domain branch, the index triple (gamma, rho, eta),
  and the auxiliary functions a, A, B of the tail-quantile scale, which feed
  the asymptotic expansions.

Heavy-tailed (Frechet) models additionally carry the survival-scale
three-term power form of F-bar, used by the expansions that work directly in
x-scale.

`aux_ratio` on a profile is the ratio between the second-order auxiliary of A
and B itself.  Classical statements of third-order expansions take this ratio
to be 1; for three-term power-law models it is a different model constant,
and the cross coefficients of every third-order expansion downstream scale
with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import special

from .numerics import beta_fn, find_root, RootSpec, expand_bracket
from .rv_kernel import HallFunction, RvParams, hall_auxiliaries, hall_invert

__all__ = [
    "RvProfile", "SurvivalProfile", "TailModel",
    "make_burr", "make_student", "make_beta_model", "make_hall_model",
    "make_exponential", "parse_model_spec", "ModelSpecError",
]

FRECHET, GUMBEL, WEIBULL = "frechet", "gumbel", "weibull"


@dataclass(frozen=True)
class RvProfile:
    """Tail-quantile-scale regular variation data.

    branch "frechet": U itself is regularly varying (gamma > 0, ratio form).
    branch "weibull": x_F - U is regularly varying (gamma < 0, ratio form).
    branch "gumbel":  U is extended regularly varying (gamma = 0).
    """

    branch: str
    params: RvParams
    a: Callable[[float], float]
    A: Callable[[float], float]
    B: Optional[Callable[[float], float]]
    aux_ratio: float = 1.0
    A_is_zero: bool = False
    B_is_zero: bool = False
    # scale constant C in x_F - U(t) = C t^gamma (1 + A(t)/rho (1+o(1)));
    # only set on the weibull branch
    weibull_scale: Optional[float] = None
    # True when the second-order index is conceptually -infinity (exact
    # power-law tail quantile): every correction term is identically absent
    rho_is_minus_inf: bool = False

    @property
    def limit_form(self) -> str:
        """Shape family of the second/third-order limits ("rv" or "erv")."""
        return "erv" if self.branch == GUMBEL else "rv"


@dataclass(frozen=True)
class SurvivalProfile:
    """Survival-function-scale three-term power form of a heavy tail:
    F-bar(x) = scale * x^-alpha (1 + c x^varrho + d x^{2 varrho})."""

    hall: HallFunction
    A: Callable[[float], float]
    B: Optional[Callable[[float], float]]
    aux_ratio: float = 1.0
    A_is_zero: bool = False
    B_is_zero: bool = False

    @property
    def alpha(self) -> float:
        return -self.hall.alpha

    @property
    def varrho(self) -> float:
        return self.hall.rho

    @property
    def varsigma(self) -> float:
        return self.hall.rho


@dataclass(frozen=True)
class TailModel:
    name: str
    cdf: Callable[[float], float]
    sf: Callable[[float], float]
    quantile: Callable[[float], float]
    # inverse survival function; works directly in tail-mass scale so that
    # U(t) keeps full precision when 1/t is far below float resolution of 1-p
    isf: Callable[[float], float]
    mean: Optional[float]
    endpoint: float
    profile: RvProfile
    support_min: float = 0.0
    sf_profile: Optional[SurvivalProfile] = None

    def U(self, t: float) -> float:
        """Tail quantile function, the quantile at exceedance level 1/t."""
        if t <= 1.0:
            raise ValueError("tail quantile needs t > 1")
        return self.isf(1.0 / t)


def _zero(t: float) -> float:
    return 0.0


# ---------------------------------------------------------------------------
# Burr
# ---------------------------------------------------------------------------

def make_burr(a: float, b: float) -> TailModel:
    """Burr distribution, survival (1 + x^a)^-b on x >= 0.

    Tail quantile U(t) = (t^{1/b} - 1)^{1/a} is third-order regularly varying
    with indices (1/(ab), -1/b, -1/b).
    """
    if a <= 0 or b <= 0:
        raise ValueError("Burr parameters must be positive")
    ab = a * b

    def sf(x: float) -> float:
        if x <= 0.0:
            return 1.0
        z = a * math.log(x)
        if z > 700.0:
            return math.exp(-b * z)
        return math.exp(-b * math.log1p(math.exp(z)))

    def cdf(x: float) -> float:
        if x <= 0.0:
            return 0.0
        # 1 - (1+x^a)^-b, stable for small x
        return -math.expm1(-b * math.log1p(x ** a))

    def quantile(p: float) -> float:
        if not 0.0 <= p < 1.0:
            raise ValueError("quantile level must be in [0, 1)")
        if p == 0.0:
            return 0.0
        return (math.expm1(-math.log1p(-p) / b)) ** (1.0 / a)

    def isf(q: float) -> float:
        if not 0.0 < q <= 1.0:
            raise ValueError("tail mass must be in (0, 1]")
        return (math.expm1(-math.log(q) / b)) ** (1.0 / a)

    def a_aux(t: float) -> float:
        return (t ** (1.0 / b) - 1.0) ** (1.0 / a) / ab

    def A(t: float) -> float:
        w = t ** (-1.0 / b)
        return w / (ab - b * w)

    third_zero = (a == 1.0)

    def B(t: float) -> float:
        return (a - 1.0) / a * t ** (-1.0 / b)

    mean = beta_fn(b - 1.0 / a, 1.0 / a) / a if ab > 1.0 else None
    profile = RvProfile(
        branch=FRECHET,
        params=RvParams(1.0 / ab, -1.0 / b, -1.0 / b),
        a=a_aux, A=A, B=None if third_zero else B,
        aux_ratio=math.nan if third_zero else 1.0 / (b * (1.0 - a)),
        B_is_zero=third_zero,
    )
    # survival scale: x^-ab (1 - b x^-a + b(b+1)/2 x^-2a)
    hall = HallFunction(a=1.0, alpha=-ab, c=-b, d=b * (b + 1.0) / 2.0, rho=-a)
    A_sf, B_sf = hall_auxiliaries(hall)
    sfp = SurvivalProfile(hall=hall, A=A_sf, B=B_sf, aux_ratio=hall.aux_ratio)
    return TailModel(name=f"burr(a={a:g},b={b:g})", cdf=cdf, sf=sf,
                     quantile=quantile, isf=isf, mean=mean, endpoint=math.inf,
                     profile=profile, support_min=0.0, sf_profile=sfp)


# ---------------------------------------------------------------------------
# Student t
# ---------------------------------------------------------------------------

def student_tail_constant(v: float) -> float:
    """C_v with F-bar(x) ~ (C_v/v) x^-v."""
    return v ** (v / 2.0) / beta_fn(v / 2.0, 0.5)


def make_student(v: float) -> TailModel:
    """Student t with v > 1 degrees of freedom (finite mean, equal to 0).

    U is third-order regularly varying with indices (1/v, -2/v, -2/v).
    """
    if v <= 1.0:
        raise ValueError("degrees of freedom must exceed 1 (finite mean needed)")
    Cv = student_tail_constant(v)

    def sf(x: float) -> float:
        return float(special.stdtr(v, -x))

    def cdf(x: float) -> float:
        return float(special.stdtr(v, x))

    def quantile(p: float) -> float:
        if not 0.0 < p < 1.0:
            raise ValueError("quantile level must be in (0, 1)")
        return float(special.stdtrit(v, p))

    def isf(q: float) -> float:
        # sf(x) = I_{v/(v+x^2)}(v/2, 1/2)/2 for x > 0; invert in tail scale
        if not 0.0 < q < 1.0:
            raise ValueError("tail mass must be in (0, 1)")
        if q > 0.5:
            return -isf(1.0 - q)
        u = float(special.betaincinv(v / 2.0, 0.5, 2.0 * q))
        return math.sqrt(v * (1.0 - u) / u)

    gamma = 1.0 / v

    def a_aux(t: float) -> float:
        return gamma * isf(1.0 / t)

    def A(t: float) -> float:
        w = (Cv * t / v) ** (-2.0 / v)
        return (v + 1.0) * w / (v + 2.0 - v * (v + 1.0) * w / 2.0)

    def B(t: float) -> float:
        return v * v * (v + 3.0) / (2.0 * (v + 2.0) * (v + 4.0)) * (Cv * t / v) ** (-2.0 / v)

    mu = -2.0 * (v + 1.0) * (v + 4.0) / (v * v * (v + 3.0))
    profile = RvProfile(branch=FRECHET, params=RvParams(gamma, -2.0 / v, -2.0 / v),
                        a=a_aux, A=A, B=B, aux_ratio=mu)
    # survival scale: (C_v/v) x^-v (1 + k2 x^-2 + k3 x^-4)
    k2 = -v * v * (v + 1.0) / (2.0 * (v + 2.0))
    k3 = v ** 3 * (v + 1.0) * (v + 3.0) / (8.0 * (v + 4.0))
    hall = HallFunction(a=Cv / v, alpha=-v, c=k2, d=k3, rho=-2.0)
    A_sf, B_sf = hall_auxiliaries(hall)
    sfp = SurvivalProfile(hall=hall, A=A_sf, B=B_sf, aux_ratio=hall.aux_ratio)
    return TailModel(name=f"student(v={v:g})", cdf=cdf, sf=sf,
                     quantile=quantile, isf=isf, mean=0.0, endpoint=math.inf,
                     profile=profile, support_min=-math.inf, sf_profile=sfp)


# ---------------------------------------------------------------------------
# Beta
# ---------------------------------------------------------------------------

def make_beta_model(a: float, b: float) -> TailModel:
    """Beta(a, b) on (0, 1); finite endpoint, Weibull branch.

    1 - U(t) = (t/(b B(a,b)))^{-1/b} (1 + c1 tau + c2 tau^2 (1+o(1))) with
    tau = (t/(b B(a,b)))^{-1/b}, so x_F - U is third-order regularly varying
    with indices (-1/b, -1/b, -1/b).
    """
    if a <= 0 or b <= 0:
        raise ValueError("Beta parameters must be positive")
    Bab = beta_fn(a, b)
    scale = (b * Bab) ** (1.0 / b)     # x_F - U(t) ~ scale * t^{-1/b}
    cu = (a - 1.0) / (b + 1.0)
    du = cu * (cu + (a + b) / (2.0 * (b + 2.0)))

    def cdf(x: float) -> float:
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        return float(special.betainc(a, b, x))

    def sf(x: float) -> float:
        if x <= 0.0:
            return 1.0
        if x >= 1.0:
            return 0.0
        return float(special.betaincc(a, b, x))

    def quantile(p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise ValueError("quantile level must be in [0, 1]")
        return float(special.betaincinv(a, b, p))

    def isf(q: float) -> float:
        if not 0.0 < q <= 1.0:
            raise ValueError("tail mass must be in (0, 1]")
        return float(special.betainccinv(a, b, q))

    gamma = -1.0 / b
    tau = lambda t: (t / (b * Bab)) ** (-1.0 / b)

    def a_aux(t: float) -> float:
        return (1.0 - isf(1.0 / t)) / b

    second_zero = (a == 1.0)

    def A(t: float) -> float:
        w = tau(t)
        return -cu / b * w / (1.0 + cu * w)

    def B(t: float) -> float:
        return 2.0 * (cu + (a + b) / (2.0 * (b + 2.0))) * tau(t)

    if second_zero:
        # exact power: 1 - U(t) = scale * t^{-1/b} with no corrections
        profile = RvProfile(branch=WEIBULL, params=RvParams(gamma, -1.0 / b, -1.0 / b),
                            a=a_aux, A=_zero, B=None, aux_ratio=math.nan,
                            A_is_zero=True, B_is_zero=True,
                            weibull_scale=scale, rho_is_minus_inf=True)
    else:
        mu = (1.0 / b) * cu / (2.0 * (cu + (a + b) / (2.0 * (b + 2.0))))
        profile = RvProfile(branch=WEIBULL, params=RvParams(gamma, -1.0 / b, -1.0 / b),
                            a=a_aux, A=A, B=B, aux_ratio=mu,
                            weibull_scale=scale)
    return TailModel(name=f"beta(a={a:g},b={b:g})", cdf=cdf, sf=sf,
                     quantile=quantile, isf=isf, mean=a / (a + b), endpoint=1.0,
                     profile=profile, support_min=0.0)


# ---------------------------------------------------------------------------
# three-term power-law ("Hall") survival function taken literally
# ---------------------------------------------------------------------------

def _hall_support_min(hall: HallFunction) -> float:
    """Left endpoint: the unique point where the literal survival form first
    equals 1 while being monotone decreasing ever after; raises if the form
    is not a valid survival function on any tail."""
    al, c, d, rho = -hall.alpha, hall.c, hall.d, hall.rho
    if al <= 0:
        raise ValueError("survival exponent alpha must be positive")
    # monotonicity in w = x^rho: derivative sign is controlled by
    # q(w) = (2 rho - (-alpha))... work in terms of f'(x):
    #   f'(x) = scale * x^{-alpha-1} [ -alpha + (rho-alpha) c w + (2rho-alpha) d w^2 ]
    # need the bracket < 0 (and 1 + c w + d w^2 > 0) for all w in (0, w0]
    def bracket_roots(p2, p1, p0):
        if p2 == 0.0:
            return [-p0 / p1] if p1 != 0.0 else []
        disc = p1 * p1 - 4.0 * p2 * p0
        if disc < 0:
            return []
        r = math.sqrt(disc)
        return sorted([(-p1 - r) / (2.0 * p2), (-p1 + r) / (2.0 * p2)])

    deriv_roots = [w for w in bracket_roots((2 * rho - al) * d, (rho - al) * c, -al) if w > 0]
    pos_roots = [w for w in bracket_roots(d, c, 1.0) if w > 0]
    w_limit = min(deriv_roots + pos_roots + [math.inf])
    # x_limit: left edge of the region where the form is positive and
    # decreasing (rho < 0 maps small w to large x)
    x_limit = w_limit ** (1.0 / rho) if math.isfinite(w_limit) else 0.0
    if x_limit > 0 and hall.value(x_limit * (1 + 1e-12)) < 1.0:
        raise ValueError(
            "survival form never reaches 1 on its monotone tail; not a valid df")
    # bracket the unit level inside (x_limit, inf)
    hi = max(x_limit * 2, (3.0 * abs(hall.a)) ** (1.0 / al), 1.0)
    while hall.value(hi) >= 1.0:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("survival form does not decay below 1")
    lo = x_limit * (1 + 1e-12) if x_limit > 0 else hi
    while not (hall.value(lo) > 1.0):
        lo /= 2.0
        if lo < 1e-300 or lo <= x_limit:
            raise ValueError("survival form stays below 1; no left endpoint")
    x_min = find_root(lambda x: hall.value(x) - 1.0, RootSpec((lo, hi), rel_tol=1e-14))
    if math.isfinite(w_limit) and x_min < x_limit:
        raise ValueError("survival form is non-monotone beyond its unit level")
    return x_min


def make_hall_model(b: float, alpha: float, c: float, d: float, varrho: float) -> TailModel:
    """Distribution whose survival function is literally
    b x^-alpha (1 + c x^varrho + d x^{2 varrho}) on [x_min, inf), clipped to 1.

    The special case c = d = 0 is an exact Pareto.  Construction fails when
    the three-term form is not monotone beyond the point where it reaches 1.
    """
    if b <= 0 or alpha <= 0:
        raise ValueError("scale b and exponent alpha must be positive")
    if varrho >= 0:
        raise ValueError("correction exponent varrho must be negative")
    hall = HallFunction(a=b, alpha=-alpha, c=c, d=d, rho=varrho)
    x_min = _hall_support_min(hall)

    def sf(x: float) -> float:
        if x <= x_min:
            return 1.0
        return min(hall.value(x), 1.0)

    def cdf(x: float) -> float:
        return 1.0 - sf(x)

    def isf(q: float) -> float:
        if not 0.0 < q <= 1.0:
            raise ValueError("tail mass must be in (0, 1]")
        if q == 1.0:
            return x_min
        if c == 0.0 and d == 0.0:
            return (b / q) ** (1.0 / alpha)
        seed = max(hall_invert(hall, q), x_min * (1 + 1e-9))
        lo, hi = expand_bracket(lambda x: sf(x) - q,
                                min(seed * 0.5, x_min * (1 + 1e-9) + 1e-12), seed * 2.0,
                                lo_cap=x_min, factor=4.0)
        return find_root(lambda x: sf(x) - q, RootSpec((lo, hi), rel_tol=1e-14))

    def quantile(p: float) -> float:
        if not 0.0 <= p < 1.0:
            raise ValueError("quantile level must be in [0, 1)")
        return isf(1.0 - p)

    gamma = 1.0 / alpha
    A_sf, B_sf = hall_auxiliaries(hall)
    exact_power = (c == 0.0)
    third_zero = exact_power or (d == 0.0)
    sfp = SurvivalProfile(hall=hall, A=A_sf if not exact_power else _zero,
                          B=B_sf, aux_ratio=hall.aux_ratio,
                          A_is_zero=exact_power, B_is_zero=third_zero)
    # tail-quantile profile: U(t) = (bt)^{1/alpha}(1 + k1 w + k2 w^2) with
    # w = (bt)^{varrho/alpha}, from the three-term inverse of
    # 1/F-bar = (1/b) x^alpha (1 - c x^varrho + (c^2 - d) x^{2 varrho})
    from .rv_kernel import hall_invert_coeffs
    _, k1, k2 = hall_invert_coeffs(
        HallFunction(a=1.0 / b, alpha=alpha, c=-c, d=c * c - d, rho=varrho))
    cU = k1 * b ** (varrho / alpha)
    dU = k2 * b ** (2.0 * varrho / alpha)
    u_hall = None if exact_power else HallFunction(
        a=b ** gamma, alpha=gamma, c=cU, d=dU if dU != 0.0 else 0.0, rho=varrho / alpha)
    if exact_power:
        profile = RvProfile(branch=FRECHET, params=RvParams(gamma, varrho / alpha, varrho / alpha),
                            a=lambda t: gamma * isf(1.0 / t), A=_zero, B=None,
                            aux_ratio=math.nan, A_is_zero=True, B_is_zero=True,
                            rho_is_minus_inf=True)
    else:
        A_u, B_u = hall_auxiliaries(u_hall)
        profile = RvProfile(branch=FRECHET, params=RvParams(gamma, varrho / alpha, varrho / alpha),
                            a=lambda t: gamma * isf(1.0 / t),
                            A=A_u, B=B_u, aux_ratio=u_hall.aux_ratio,
                            B_is_zero=(dU == 0.0))
    if alpha > 1.0:
        # mean = x_min + int_{x_min}^inf sf:  closed form of the power pieces
        def piece(expnt):
            # int_{x_min}^inf x^expnt dx, expnt < -1
            return x_min ** (expnt + 1.0) / (-expnt - 1.0)
        mean = x_min + b * (piece(-alpha) + c * piece(-alpha + varrho)
                            + d * piece(-alpha + 2 * varrho))
    else:
        mean = None
    return TailModel(name=f"hall(b={b:g},alpha={alpha:g},c={c:g},d={d:g},varrho={varrho:g})",
                     cdf=cdf, sf=sf, quantile=quantile, isf=isf, mean=mean,
                     endpoint=math.inf, profile=profile, support_min=x_min,
                     sf_profile=sfp)


# ---------------------------------------------------------------------------
# exponential (Gumbel-branch oracle model)
# ---------------------------------------------------------------------------

def make_exponential(rate: float = 1.0) -> TailModel:
    """Unit-scale exponential: U(t) = ln(t)/rate, a == 1/rate, A == 0.

    A Gumbel-branch model whose extended-regular-variation limit is exact, so
    second/third-order corrections vanish identically; used to exercise the
    Gumbel expansion path against quadrature oracles.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")

    def sf(x: float) -> float:
        return math.exp(-rate * x) if x > 0 else 1.0

    def cdf(x: float) -> float:
        return -math.expm1(-rate * x) if x > 0 else 0.0

    def quantile(p: float) -> float:
        if not 0.0 <= p < 1.0:
            raise ValueError("quantile level must be in [0, 1)")
        return -math.log1p(-p) / rate

    def isf(q: float) -> float:
        if not 0.0 < q <= 1.0:
            raise ValueError("tail mass must be in (0, 1]")
        return -math.log(q) / rate

    profile = RvProfile(branch=GUMBEL, params=RvParams(0.0, 0.0, 0.0),
                        a=lambda t: 1.0 / rate, A=_zero, B=None,
                        aux_ratio=math.nan, A_is_zero=True, B_is_zero=True,
                        rho_is_minus_inf=True)
    return TailModel(name=f"exponential(rate={rate:g})", cdf=cdf, sf=sf,
                     quantile=quantile, isf=isf, mean=1.0 / rate, endpoint=math.inf,
                     profile=profile, support_min=0.0)


# ---------------------------------------------------------------------------
# spec-string parsing (CLI surface)
# ---------------------------------------------------------------------------

class ModelSpecError(ValueError):
    pass


_FACTORIES = {
    "burr": (make_burr, ("a", "b")),
    "student": (make_student, ("v",)),
    "beta": (make_beta_model, ("a", "b")),
    "hall": (make_hall_model, ("b", "alpha", "c", "d", "varrho")),
    "exponential": (make_exponential, ()),
}


def parse_model_spec(spec: str) -> TailModel:
    """Parse 'burr:a=2,b=1.5' style model strings; errors name the bad key."""
    head, _, tail = spec.strip().partition(":")
    head = head.lower()
    if head not in _FACTORIES:
        raise ModelSpecError(
            f"unknown model {head!r}; expected one of {sorted(_FACTORIES)}")
    factory, required = _FACTORIES[head]
    kwargs = {}
    if tail:
        for item in tail.split(","):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq:
                raise ModelSpecError(f"model parameter {item!r} is not key=value")
            if key not in required:
                raise ModelSpecError(
                    f"unknown parameter {key!r} for model {head!r} (takes {required})")
            try:
                kwargs[key] = float(val)
            except ValueError:
                raise ModelSpecError(f"parameter {key!r} has non-numeric value {val!r}")
    missing = [k for k in required if k not in kwargs]
    if missing:
        raise ModelSpecError(f"model {head!r} missing parameter(s) {missing}")
    try:
        return factory(**kwargs)
    except ValueError as exc:
        raise ModelSpecError(str(exc)) from exc
