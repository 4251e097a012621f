"""Asymptotic expansions of the scaled tail integral E[X^kappa 1{SX > x}].

Three machines live here:

* the heavy-tail (Frechet) route: when F-bar is a three-term power form, the
  integral divided by x^kappa F-bar(x) expands into moment combinations of
  the scaler S with correction terms along A(x), A^2(x) and A(x)B(x);

* the Gumbel/Weibull route: everything is rewritten on the tail-quantile
  scale, t = 1/F-bar(x), phi_t = U(t)/a(t), and the bracket expands into the
  quadrature constants

      L(al)        = int_0^1 D(1/s)^al ds
      M(al, l)     = C(al, l) int_0^1 D(1/s)^{al-l} H(1/s)^l ds
      N(al, l, vr) = C(al, l) int_0^1 D(1/s)^{al-l} H(1/s)^l
                                  * (D(1/s)^{-vr} - 1)/vr ds
      Q(al)        = al int_0^1 D(1/s)^{al-1} R(1/s) ds

  with D = D_gamma and (H, R) the second/third-order limit shapes in either
  difference ("erv") or ratio ("rv") form;

* the partial-moment specialisation E[(X - U(t))_+^kappa], whose constants
  collapse to Beta-function values xi and their difference quotients.

Third-order cross coefficients carry the profile's `aux_ratio` factor (the
ratio between the second-order auxiliary of A and B itself); it equals 1 only
when A's own second-order behaviour is governed exactly by B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import mpmath as mp

from .numerics import QuadratureSpec, integrate_
from .rv_kernel import RvParams, d_kernel, h_kernel, r_kernel, rv_second_limit, rv_third_limit
from .scalers import Scaler
from .tail_models import FRECHET, GUMBEL, WEIBULL, RvProfile, TailModel

__all__ = [
    "Expansion", "FrechetWeylCoeffs", "GwConstants", "KappaBetaCoeffs",
    "frechet_weyl_coeffs", "frechet_weyl_expand", "gw_constants", "gw_expand",
    "kappa_beta_coeffs", "partial_moment_expand",
    "omega_kl", "omega_tilde",
]

_DEGENERATE_INDEX = 1e-8     # |rho| or |eta| below this uses the limit branch


@dataclass(frozen=True)
class Expansion:
    """Ordered expansion result: value = leading * (1 + sum of contributions).

    terms: (label, coefficient, auxiliary product, contribution), where
    contribution = coefficient * auxiliary / base so that the multiplicative
    normal form above holds.  Labels follow the coefficient ledgers.
    """

    leading: float
    terms: tuple[tuple[str, float, float, float], ...]
    order: int
    value: float
    warnings: tuple[str, ...] = ()

    @property
    def pre_asymptotic(self) -> bool:
        return any("pre-asymptotic" in w for w in self.warnings)


def _mk_expansion(prefactor: float, base: float, base_label: str,
                  terms: list[tuple[str, float, float]], order: int,
                  warnings: tuple[str, ...] = ()) -> Expansion:
    leading = prefactor * base
    rows = []
    total = 1.0
    for label, coeff, aux in terms:
        contrib = coeff * aux / base
        rows.append((label, coeff, aux, contrib))
        total += contrib
    return Expansion(leading=leading,
                     terms=((base_label, base, 1.0, 1.0),) + tuple(rows),
                     order=order, value=leading * total, warnings=warnings)


# ---------------------------------------------------------------------------
# Frechet route
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrechetWeylCoeffs:
    d0: float
    d1: float
    d2: float
    d3: float
    kappa: float
    alpha: float
    varrho: float
    varsigma: float


def frechet_weyl_coeffs(kappa: float, alpha: float, varrho: float,
                        varsigma: float, s: Scaler,
                        aux_ratio: float = 1.0) -> FrechetWeylCoeffs:
    """Moment coefficients of the heavy-tail expansion.

    d0 = E S^{al-k}
    d1 = (E S^{al-k-vr} - E S^{al-k})/vr + k E S^{al-k-vr} / (al (al-k-vr))
    d2 = k (E S^{al-k-2vr} - E S^{al-k-vr}) / (al vr (al-k-vr))
    d3 = (k/al)(mu (E S^{al-k-vr-vs} - E S^{al-k-vr})/((al-k-vr) vs)
               + E S^{al-k-vr-vs}/(al-k-vr-vs))
         + (E S^{al-k-vr-vs} - E S^{al-k})/(vr+vs)

    The aux_ratio factor mu multiplies the piece of d3 that stems from the
    second-order behaviour of A itself.  Limit branches replace the vanishing
    denominators when vr or vs degenerate to 0.
    """
    if not kappa < alpha:
        raise ValueError(f"moment order must satisfy kappa < alpha ({kappa} >= {alpha})")
    if not alpha - kappa - varrho > 0:
        raise ValueError(f"alpha - kappa - varrho must be positive "
                         f"(= {alpha - kappa - varrho})")
    if not alpha - kappa - varrho - varsigma > 0:
        raise ValueError(f"alpha - kappa - varrho - varsigma must be positive "
                         f"(= {alpha - kappa - varrho - varsigma})")
    m = s.moment
    mu = 1.0 if math.isnan(aux_ratio) else aux_ratio
    e0 = m(alpha - kappa)
    e1 = m(alpha - kappa - varrho)
    e2 = m(alpha - kappa - 2 * varrho)
    e3 = m(alpha - kappa - varrho - varsigma)

    def dq(hi: float, lo: float, step: float, base: float) -> float:
        # (E S^{base-step-...} - E S^{base})/step with a central-difference
        # limit branch; moments are smooth in the exponent
        if abs(step) >= _DEGENERATE_INDEX:
            return (hi - lo) / step
        h = 1e-5
        return -(m(base + h) - m(base - h)) / (2.0 * h)

    d0 = e0
    d1 = dq(e1, e0, varrho, alpha - kappa) \
        + kappa * e1 / (alpha * (alpha - kappa - varrho))
    d2 = kappa * dq(e2, e1, varrho, alpha - kappa - varrho) / (alpha * (alpha - kappa - varrho))
    d3 = (kappa / alpha) * (mu * dq(e3, e1, varsigma, alpha - kappa - varrho)
                            / (alpha - kappa - varrho)
                            + e3 / (alpha - kappa - varrho - varsigma)) \
        + dq(e3, e0, varrho + varsigma, alpha - kappa)
    return FrechetWeylCoeffs(d0=d0, d1=d1, d2=d2, d3=d3, kappa=kappa,
                             alpha=alpha, varrho=varrho, varsigma=varsigma)


def frechet_weyl_expand(model: TailModel, s: Scaler, kappa: float, x: float,
                        order: int) -> Expansion:
    """E[X^kappa 1{SX>x}] ~ x^kappa F-bar(x) (al/(al-k)) *
    (d0 + d1 A(x) + d2 A(x)^2 + d3 A(x) B(x)), truncated to `order`."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    sfp = model.sf_profile
    if sfp is None:
        raise ValueError(f"{model.name} has no heavy-tail survival profile")
    al, vr, vs = sfp.alpha, sfp.varrho, sfp.varsigma
    c = frechet_weyl_coeffs(kappa, al, vr, vs, s, aux_ratio=sfp.aux_ratio)
    pref = x ** kappa * model.sf(x) * al / (al - kappa)
    Ax = sfp.A(x)
    terms = []
    if order >= 2 and not sfp.A_is_zero:
        terms.append(("d1*A", c.d1, Ax))
    if order >= 3 and not sfp.A_is_zero:
        terms.append(("d2*A^2", c.d2, Ax * Ax))
        if not sfp.B_is_zero:
            terms.append(("d3*A*B", c.d3, Ax * sfp.B(x)))
    return _mk_expansion(pref, c.d0, "d0", terms, order)


# ---------------------------------------------------------------------------
# Gumbel/Weibull route: quadrature constants
# ---------------------------------------------------------------------------

def _binom_falling(al: float, l: int) -> float:
    out = 1.0
    for j in range(l):
        out *= (al - j)
    return out / math.factorial(l)


_GW_SPEC = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-9, max_subdiv=10**6,
                          transform="exp_sub")


class GwConstants:
    """Memoized evaluator for the L/M/N/Q quadrature constants of one
    regular-variation profile (gamma, rho, eta) and one limit form."""

    def __init__(self, gamma: float, rho: float, eta: float, limit_form: str = "rv"):
        if limit_form not in ("rv", "erv"):
            raise ValueError(f"unknown limit form {limit_form!r}")
        self.gamma, self.rho, self.eta = gamma, rho, eta
        self.limit_form = limit_form
        params = RvParams(gamma, rho, eta)
        if limit_form == "rv":
            self._H = lambda x: rv_second_limit(x, gamma, rho)
            self._R = lambda x: rv_third_limit(x, params)
        else:
            self._H = lambda x: h_kernel(x, gamma, rho)
            self._R = lambda x: r_kernel(x, params)
        self._cache: dict = {}

    def _integral(self, f: Callable[[float], float]) -> float:
        val, _ = integrate_(lambda s: f(1.0 / s), (0.0, 1.0), _GW_SPEC)
        return val

    def _check_convergence(self, al: float):
        # D(1/s)^al grows like s^{-gamma al} near 0 when gamma > 0
        g = self.gamma
        if g > 0 and g * al >= 1.0:
            raise ValueError(f"constant diverges: gamma*alpha = {g * al:g} >= 1")

    def L(self, al: float) -> float:
        key = ("L", al)
        if key not in self._cache:
            self._check_convergence(al)
            g = self.gamma
            self._cache[key] = self._integral(lambda x: d_kernel(x, g) ** al)
        return self._cache[key]

    def M(self, al: float, l: int) -> float:
        key = ("M", al, l)
        if key not in self._cache:
            self._check_convergence(al)
            g, c = self.gamma, _binom_falling(al, l)
            self._cache[key] = c * self._integral(
                lambda x: d_kernel(x, g) ** (al - l) * self._H(x) ** l)
        return self._cache[key]

    def N(self, al: float, l: int, vr: float) -> float:
        key = ("N", al, l, vr)
        if key not in self._cache:
            self._check_convergence(al - vr)
            g, c = self.gamma, _binom_falling(al, l)
            if abs(vr) >= _DEGENERATE_INDEX:
                shift = lambda D: (D ** (-vr) - 1.0) / vr
            else:
                shift = lambda D: math.log(D)
            self._cache[key] = c * self._integral(
                lambda x: d_kernel(x, g) ** (al - l) * self._H(x) ** l
                * shift(d_kernel(x, g)))
        return self._cache[key]

    def Q(self, al: float) -> float:
        key = ("Q", al)
        if key not in self._cache:
            self._check_convergence(al)
            g = self.gamma
            self._cache[key] = al * self._integral(
                lambda x: d_kernel(x, g) ** (al - 1) * self._R(x))
        return self._cache[key]


@lru_cache(maxsize=256)
def gw_constants(gamma: float, rho: float, eta: float,
                 limit_form: str = "rv") -> GwConstants:
    return GwConstants(gamma, rho, eta, limit_form)


def gw_expand(model: TailModel, s: Scaler, kappa: float, x: float,
              order: int) -> Expansion:
    """Tail-quantile-scale expansion of E[X^kappa 1{SX>x}] for models with
    gamma <= 0, against a scaler whose shifted tail is regularly varying."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    prof = model.profile
    if prof.branch == FRECHET:
        raise ValueError("gw_expand applies to Gumbel/Weibull branches; "
                         "use frechet_weyl_expand for heavy tails")
    meta = s.tail_meta
    if meta is None:
        raise ValueError("scaler has no tail metadata (unit scaler is exact: "
                         "E[X^kappa 1{X>x}])")
    if meta.varrho_g >= 0:
        raise ValueError("scaler tail index varrho_g must be negative")
    g = prof.params.gamma
    al = meta.alpha_g
    Fbar = model.sf(x)
    if Fbar <= 0.0:
        raise ValueError("x at or beyond the endpoint: survival mass is zero")
    t = 1.0 / Fbar
    Ut = model.U(t)
    at = prof.a(t)
    phi = Ut / at
    warn: tuple[str, ...] = ()
    if phi < 10.0:
        warn = (f"pre-asymptotic regime: phi_t = {phi:.3g} < 10",)
    K = gw_constants(g, prof.params.rho, prof.params.eta, prof.limit_form)
    At = 0.0 if prof.A_is_zero else prof.A(t)
    Bt = 0.0 if (prof.B is None or prof.B_is_zero) else prof.B(t)
    Atil = 0.0 if meta.A_is_zero else meta.A_tilde(phi)
    Btil = 0.0 if (meta.B_tilde is None or meta.B_is_zero) else meta.B_tilde(phi)
    vr, vs = meta.varrho_g, meta.varsigma_g

    pref = x ** kappa * Fbar * s.sf_shifted(phi)
    base = K.L(al)
    terms: list[tuple[str, float, float]] = []
    if order >= 2:
        if At != 0.0:
            terms.append(("M(al,1)*A(t)", K.M(al, 1), At))
        if Atil != 0.0:
            terms.append(("N(al,0,vr)*At(phi)", K.N(al, 0, vr), Atil))
        terms.append(("(k-al)*L(al+1)/phi", (kappa - al) * K.L(al + 1), 1.0 / phi))
    if order >= 3:
        if At != 0.0:
            inner = [("M(al,2)*A(t)^2", K.M(al, 2), At * At)]
            if Bt != 0.0:
                inner.append(("Q(al)*A(t)B(t)", K.Q(al), At * Bt))
            if Atil != 0.0:
                inner.append(("N(al,1,vr)*A(t)At(phi)", K.N(al, 1, vr), At * Atil))
            inner.append(("(k-al)*M(al+1,1)*A(t)/phi",
                          (kappa - al) * K.M(al + 1, 1), At / phi))
            terms.extend(inner)
        terms.append(("(k-al)(k-al-1)*L(al+2)/(2 phi^2)",
                      (kappa - al) * (kappa - al - 1.0) * K.L(al + 2) / 2.0,
                      1.0 / phi ** 2))
        if Atil != 0.0:
            if Btil != 0.0:
                terms.append(("N(al,0,vr+vs)*At(phi)Bt(phi)",
                              K.N(al, 0, vr + vs), Atil * Btil))
            terms.append(("((k-al)N(al+1,0,vr)+L(al-vr+1))*At(phi)/phi",
                          (kappa - al) * K.N(al + 1, 0, vr) + K.L(al - vr + 1),
                          Atil / phi))
    return _mk_expansion(pref, base, "L(al)", terms, order, warnings=warn)


# ---------------------------------------------------------------------------
# partial moments E[(X - U(t))_+^kappa]: Beta-function constants
# ---------------------------------------------------------------------------

def _mp(x: float) -> mp.mpf:
    return mp.mpf(x)


def _xi_mp(kappa, rho, gamma):
    """xi_{kappa,rho} as Beta-function values (via gamma, full precision)."""
    if gamma > 0:
        a = (1 - rho) / gamma - kappa
    else:
        a = 1 - (1 - rho) / gamma
    if a <= 0:
        raise ValueError(f"xi pole: first Beta argument {float(a):g} <= 0")
    return mp.gamma(a) * mp.gamma(kappa) / mp.gamma(a + kappa)


def omega_kl(kappa: float, l: int, gamma: float) -> float:
    """Limit integral replacing the xi difference quotients when rho -> 0:
    (1/|g|) int_0^inf x^l (1-e^-x)^{k-l} exp(-(1 - k g 1{g>0} - g 1{g<0}) x/|g|) dx."""
    c = (1.0 - kappa * gamma * (gamma > 0) - gamma * (gamma < 0)) / abs(gamma)
    val, _ = integrate_(
        lambda u: u ** l * (-math.expm1(-u)) ** (kappa - l) * math.exp(-c * u),
        (0.0, math.inf), QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15,
                                        transform="semi_infinite"))
    return val / abs(gamma)


def omega_tilde(kappa: float, gamma: float) -> float:
    c = (1.0 - kappa * gamma * (gamma > 0) - gamma * (gamma < 0)) / abs(gamma)
    val, _ = integrate_(
        lambda u: u ** 2 * (-math.expm1(-u)) ** (kappa - 1) * math.exp(-c * u),
        (0.0, math.inf), QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15,
                                        transform="semi_infinite"))
    return val / abs(gamma)


@dataclass(frozen=True)
class KappaBetaCoeffs:
    """Constants of E[(X-U(t))_+^kappa] ~ t^-1 a(t)^kappa
    (L_k + M_k1 A(t) + M_k2 A(t)^2 + Q_k A(t) B(t))."""

    kappa: float
    gamma: float
    rho: float
    eta: float
    xi_0: float
    xi_rho: float
    L: float
    M1: float
    M2: float
    Q: float

    def xi(self, rho: float) -> float:
        with mp.workdps(40):
            return float(_xi_mp(_mp(self.kappa), _mp(rho), _mp(self.gamma)))


def kappa_beta_coeffs(profile: RvProfile, kappa: float) -> KappaBetaCoeffs:
    """Beta-function closed forms (high-precision path), with quadrature
    limit branches when rho or eta degenerate to zero."""
    g = profile.params.gamma
    rho, eta = profile.params.rho, profile.params.eta
    return _kappa_beta_coeffs_cached(g, rho, eta, kappa)


@lru_cache(maxsize=512)
def _kappa_beta_coeffs_cached(g: float, rho: float, eta: float,
                              kappa: float) -> KappaBetaCoeffs:
    if g == 0.0:
        raise ValueError("partial-moment constants need gamma != 0")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if g > 0 and kappa * g >= 1.0:
        raise ValueError(
            f"partial moment diverges: kappa*gamma = {kappa * g:g} >= 1")
    sgn = 1.0 if g > 0 else -1.0
    with mp.workdps(50):
        gk, kk = _mp(g), _mp(kappa)
        xi0 = _xi_mp(kk, _mp(0), gk)
        L = float(kk * xi0 / abs(gk) ** kk)
        rho_deg = abs(rho) < _DEGENERATE_INDEX
        eta_deg = abs(rho + eta) < _DEGENERATE_INDEX
        # M1: first difference quotient of xi in the second index
        if rho_deg:
            M1 = kappa * sgn / abs(g) ** (kappa + 1) * omega_kl(kappa, 1, g)
        else:
            M1 = float(kk * sgn / (abs(gk) ** (kk + 1) * _mp(rho))
                       * (_xi_mp(kk, _mp(rho), gk) - xi0))
        # Q: same structure at shift rho + eta
        if eta_deg:
            Q = kappa * sgn / abs(g) ** (kappa + 1) * omega_kl(kappa, 1, g)
        else:
            Q = float(kk * sgn / (abs(gk) ** (kk + 1) * _mp(rho + eta))
                      * (_xi_mp(kk, _mp(rho + eta), gk) - xi0))
        # M2: weighted second difference; high-precision tiny step at rho = 0
        if rho_deg and g > 0:
            M2 = _binom_falling(kappa, 2) * sgn / abs(g) ** (kappa + 2) \
                * omega_kl(kappa, 2, g)
        else:
            r_eff = _mp(rho) if not rho_deg else _mp("-1e-18")
            M2 = float(kk / (2 * abs(gk) ** (kk + 2) * r_eff ** 2)
                       * ((1 - 2 * r_eff - gk) * _xi_mp(kk, 2 * r_eff, gk)
                          - 2 * (1 - r_eff - gk) * _xi_mp(kk, r_eff, gk)
                          + (1 - gk) * xi0))
        xr = float(_xi_mp(kk, _mp(rho) if not rho_deg else _mp("-1e-18"), gk))
    return KappaBetaCoeffs(kappa=kappa, gamma=g, rho=rho, eta=eta,
                           xi_0=float(xi0), xi_rho=xr, L=L, M1=M1, M2=M2, Q=Q)


def partial_moment_expand(model: TailModel, kappa: float, t: float,
                          order: int) -> Expansion:
    """E[(X - U(t))_+^kappa] ~ t^-1 a(t)^kappa (L + M1 A + M2 A^2 + Q A B)."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    prof = model.profile
    c = kappa_beta_coeffs(prof, kappa)
    pref = (prof.a(t) ** kappa) / t
    At = 0.0 if prof.A_is_zero else prof.A(t)
    Bt = 0.0 if (prof.B is None or prof.B_is_zero) else prof.B(t)
    terms = []
    if order >= 2 and At != 0.0:
        terms.append(("M1*A(t)", c.M1, At))
    if order >= 3 and At != 0.0:
        terms.append(("M2*A(t)^2", c.M2, At * At))
        if Bt != 0.0:
            terms.append(("Q*A(t)B(t)", c.Q, At * Bt))
    return _mk_expansion(pref, c.L, "L", terms, order)
