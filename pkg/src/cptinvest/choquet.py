"""Prospect values of signed distributions via Choquet-type integrals.

Continuous laws are integrated in the quantile domain, where the weighting
derivative's endpoint singularities are explicit::

    v_plus  = integral_0^{S(0)} u_gain(Q(1 - q)) w_gain'(q) dq
    v_minus = integral_0^{F(0)} u_loss(-Q(q))    w_loss'(q) dq

Endpoints are regularized before handing panels to adaptive Gauss-Kronrod:
power-law blow-ups (inverse-S weightings) by the substitution
q = t**(1/(1-eps)), the near-hyperbolic lower tail of the exp-log weighting
by the change of variable q = exp(-s).  Discrete laws bypass quadrature and
are evaluated as exact rank-dependent sums, so no numerical noise enters the
closed-form binomial classification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .preferences import (
    CptPreference,
    ExponentialUtility,
    IdentityWeighting,
    Side,
    UtilityPair,
    WeightingPair,
)

__all__ = [
    "ProspectBreakdown",
    "ProspectDivergenceError",
    "prospect_value",
    "distorted_tail_integral",
    "rank_dependent_sum",
]

# convergence targets per integral side
_ABS_TARGET = 1e-10
_REL_TARGET = 1e-9
_MAX_PANELS = 2000

# quad is run tighter than the acceptance targets to leave headroom
_QUAD_EPSABS = 1e-12
_QUAD_EPSREL = 2e-10


class ProspectDivergenceError(ArithmeticError):
    """Raised when one side of a prospect integral fails to converge."""

    def __init__(self, side: str, detail: str):
        self.side = side
        self.detail = detail
        super().__init__(f"prospect {side} integral did not converge: {detail}")


@dataclass(frozen=True)
class ProspectBreakdown:
    """Gains part, losses part and their error estimates; total = v_plus - v_minus."""

    v_plus: float
    v_minus: float
    error_plus: float = 0.0
    error_minus: float = 0.0

    @property
    def total(self) -> float:
        return self.v_plus - self.v_minus

    @property
    def gain_finite(self) -> bool:
        return math.isfinite(self.v_plus)

    @property
    def loss_finite(self) -> bool:
        return math.isfinite(self.v_minus)


def _checked_quad(f, a: float, b: float, side: str):
    if b <= a:
        return 0.0, 0.0
    res = quad(f, a, b, epsabs=_QUAD_EPSABS, epsrel=_QUAD_EPSREL,
               limit=_MAX_PANELS, full_output=1)
    value, abserr = res[0], res[1]
    if not math.isfinite(value):
        raise ProspectDivergenceError(side, f"non-finite quadrature value {value}")
    return value, abserr


def distorted_tail_integral(
    outcome,
    weighting: WeightingPair,
    side: Side,
    upper: float,
    outcome_logq=None,
) -> tuple[float, float]:
    """Integrate outcome(q) * w'(q) over (0, upper), 0 <= upper <= 1.

    ``outcome`` must be smooth on (0, upper); ``outcome_logq(s)`` optionally
    evaluates outcome at q = exp(-s) without forming q, enabling the deep
    lower tail of exp-log weightings.  Returns (value, error_estimate).
    """
    if upper <= 0.0:
        return 0.0, 0.0
    upper = min(upper, 1.0)
    mid = 0.5 * upper

    def plain(q):
        return outcome(q) * weighting.derivative(side, q)

    total = 0.0
    err = 0.0

    # (0, mid]: weighting derivative blows up at q -> 0
    log_density = getattr(weighting, "log_tail_density", None)
    if log_density is not None:
        # q = exp(-s); integrand decays like exp(-delta * s**gamma)
        s_lo = -math.log(mid)
        delta = weighting.delta_gain if side == "gain" else weighting.delta_loss
        s_hi = (45.0 / delta) ** (1.0 / weighting.gamma)
        if outcome_logq is None:
            s_hi = min(s_hi, 700.0)  # q must stay representable

        def outcome_at_s(s):
            if outcome_logq is not None:
                return outcome_logq(s)
            return outcome(math.exp(-s))

        def log_integrand(s):
            return outcome_at_s(s) * log_density(side, s)

        cut = s_lo
        if s_hi > s_lo:
            v, e = _checked_quad(log_integrand, s_lo, s_hi, side)
            total += v
            err += e
            cut = s_hi
        # estimated unresolved mass beyond the truncation point
        tail_mass = weighting.weight(side, math.exp(-min(cut, 700.0)))
        if tail_mass > 0.0:
            err += tail_mass * abs(outcome_at_s(cut))
    else:
        power = weighting.endpoint_exponent(side)
        if power >= 1.0:
            v, e = _checked_quad(plain, 0.0, mid, side)
            total += v
            err += e
        else:
            m = 1.0 / power

            def lower_integrand(t):
                q = t**m
                return outcome(q) * weighting.derivative(side, q) * m * t ** (m - 1.0)

            v, e = _checked_quad(lower_integrand, 0.0, mid**power, side)
            total += v
            err += e

    # [mid, upper]: singular only when upper reaches 1
    if upper > 1.0 - 1e-11:
        power = weighting.endpoint_exponent(side)
        if power >= 1.0:
            v, e = _checked_quad(plain, mid, upper, side)
        else:
            m = 1.0 / power

            def upper_integrand(t):
                q = upper - t**m
                return outcome(q) * weighting.derivative(side, q) * m * t ** (m - 1.0)

            v, e = _checked_quad(upper_integrand, 0.0, (upper - mid) ** power, side)
    else:
        v, e = _checked_quad(plain, mid, upper, side)
    total += v
    err += e

    if err > max(_ABS_TARGET, _REL_TARGET * abs(total)):
        raise ProspectDivergenceError(
            side, f"error estimate {err:.3e} exceeds target for value {total:.6e}"
        )
    return total, err


def rank_dependent_sum(
    utility_value,
    weighting: WeightingPair,
    atoms,
) -> tuple[float, float]:
    """Exact Choquet sums over a finite law: (gains part, losses part).

    ``atoms`` are (value, prob) pairs; ``utility_value(side, x)`` maps
    nonnegative magnitudes.  Gains take weight differences of cumulative
    upper-tail probabilities, losses of cumulative lower-tail probabilities;
    atoms exactly at zero contribute to neither side.
    """
    ordered = sorted(atoms)
    v_plus = 0.0
    cum = 0.0
    for x, p in reversed(ordered):
        if x <= 0.0:
            break
        nxt = min(cum + p, 1.0)  # guard cumulative round-off past 1
        v_plus += utility_value("gain", x) * (
            weighting.weight("gain", nxt) - weighting.weight("gain", cum)
        )
        cum = nxt
    v_minus = 0.0
    cum = 0.0
    for x, p in ordered:
        if x >= 0.0:
            break
        nxt = min(cum + p, 1.0)
        v_minus += utility_value("loss", -x) * (
            weighting.weight("loss", nxt) - weighting.weight("loss", cum)
        )
        cum = nxt
    return v_plus, v_minus


def prospect_value(pref: CptPreference, dist) -> ProspectBreakdown:
    """CPT value of a signed distribution relative to reference zero."""
    if dist.atoms is not None:
        v_plus, v_minus = rank_dependent_sum(pref.utility.value, pref.weighting, dist.atoms)
        return ProspectBreakdown(v_plus, v_minus)

    utility = pref.utility
    weighting = pref.weighting

    s0 = dist.sf(0.0)
    f0 = dist.cdf(0.0)

    def gain_outcome(q):
        return utility.value("gain", max(dist.isf(q), 0.0))

    def loss_outcome(q):
        return utility.value("loss", max(-dist.ppf(q), 0.0))

    gain_logq = None
    loss_logq = None
    if getattr(dist, "has_log_tail_quantiles", False):

        def gain_logq(s):
            return utility.value("gain", max(dist.isf_logq(-s), 0.0))

        def loss_logq(s):
            return utility.value("loss", max(-dist.ppf_logq(-s), 0.0))

    v_plus, e_plus = distorted_tail_integral(
        gain_outcome, weighting, "gain", s0, outcome_logq=gain_logq
    )
    v_minus, e_minus = distorted_tail_integral(
        loss_outcome, weighting, "loss", f0, outcome_logq=loss_logq
    )
    return ProspectBreakdown(v_plus, v_minus, e_plus, e_minus)


def check_finiteness(pref: CptPreference, law) -> str:
    """'finite' when the prospect of any strategy is provably finite, else 'unverified'.

    Finiteness holds for bounded (discrete) return laws, for the bounded
    exponential utility, and for normal / lognormal / student-t returns
    whenever the weighting derivative grows no faster than q**(-eps) with
    eps < 1 at the probability endpoints.
    """
    from .market import Binomial, Empirical, Lognormal, Normal, StudentT

    if isinstance(law, (Binomial, Empirical)):
        return "finite"
    if isinstance(pref.utility, ExponentialUtility):
        return "finite"
    if isinstance(law, (Lognormal, Normal, StudentT)):
        w = pref.weighting
        if isinstance(w, IdentityWeighting) or w.tail_exponent_bound() < 1.0:
            return "finite"
    return "unverified"


def utility_limits(utility: UtilityPair) -> tuple[float, float]:
    """Suprema of the gain and loss branches (infinite for power utility)."""
    return utility.limit("gain"), utility.limit("loss")
