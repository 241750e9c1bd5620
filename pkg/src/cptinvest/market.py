"""Single-period frictional market: returns, wealth dynamics, reference point.

The risky asset trades at ask S and bid (1 - lam) * S; the risk-free leg is
frictionless.  The excess-return transforms expose, per unit of money traded,
the wealth difference against the do-nothing benchmark for the three trade
directions (buying, selling existing holdings, shorting).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

from .distributions import (
    ContinuousLaw,
    DiscreteLaw,
    LognormalBase,
    NormalBase,
    SignedDistribution,
    StudentTBase,
    constant_law,
)

__all__ = [
    "Lognormal",
    "Normal",
    "StudentT",
    "Binomial",
    "Empirical",
    "ReturnLaw",
    "MarketModel",
    "Portfolio",
    "TradeDirection",
    "ArbitrageCheck",
    "terminal_wealth",
    "reference_wealth",
    "reference_point",
    "check_no_arbitrage",
    "excess_transform",
    "loss_set_probabilities",
    "LossSetProbabilities",
]


@dataclass(frozen=True)
class Lognormal:
    """ln(1 + R) ~ N(mu, sigma^2)."""

    mu: float
    sigma: float

    discrete = False

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def gross_law(self) -> SignedDistribution:
        return ContinuousLaw(LognormalBase(self.mu, self.sigma))


@dataclass(frozen=True)
class Normal:
    """R ~ N(mu, sigma^2); the gross return 1 + R inherits the shift."""

    mu: float
    sigma: float

    discrete = False

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def gross_law(self) -> SignedDistribution:
        return ContinuousLaw(NormalBase(), shift=1.0 + self.mu, scale=self.sigma)


@dataclass(frozen=True)
class StudentT:
    """R ~ loc + scale * t(nu)."""

    nu: float
    loc: float = 0.0
    scale: float = 1.0

    discrete = False

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.scale <= 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")

    def gross_law(self) -> SignedDistribution:
        return ContinuousLaw(StudentTBase(self.nu), shift=1.0 + self.loc, scale=self.scale)


@dataclass(frozen=True)
class Binomial:
    """Two-state gross return: u with probability 1 - p, d with probability p."""

    u: float
    d: float
    p: float

    discrete = True

    def __post_init__(self):
        if not self.u > self.d > 0:
            raise ValueError(f"need u > d > 0, got u={self.u}, d={self.d}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"down-state probability must be in (0, 1), got {self.p}")

    def gross_law(self) -> DiscreteLaw:
        return DiscreteLaw([self.d, self.u], [self.p, 1.0 - self.p])


@dataclass(frozen=True)
class Empirical:
    """Equally weighted sample of observed gross returns."""

    values: tuple[float, ...]

    discrete = True

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("empirical law needs at least one observation")
        object.__setattr__(self, "values", tuple(sorted(float(v) for v in self.values)))

    def gross_law(self) -> DiscreteLaw:
        n = len(self.values)
        return DiscreteLaw(self.values, [1.0 / n] * n)


ReturnLaw = Union[Lognormal, Normal, StudentT, Binomial, Empirical]


@dataclass(frozen=True)
class MarketModel:
    """Risk-free return r over the period, cost rate lam, risky gross-return law."""

    r: float
    lam: float
    returns: ReturnLaw

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"risk-free return must be >= 0, got {self.r}")
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"cost rate must be in [0, 1), got {self.lam}")


@dataclass(frozen=True)
class Portfolio:
    """Initial money in the riskless (x0) and risky (y0) asset."""

    x0: float
    y0: float

    def __post_init__(self):
        if not (math.isfinite(self.x0) and math.isfinite(self.y0)):
            raise ValueError("portfolio positions must be finite")


class TradeDirection(enum.Enum):
    """Which excess-return transform governs the trade."""

    BUY = "buy"          # adding theta > 0 to the risky position
    SELL = "sell"        # selling owned shares, -y0 <= theta <= 0
    SHORT = "short"      # selling from a zero position, theta <= 0


def terminal_wealth(p: Portfolio, m: MarketModel, theta: float, gross: float) -> float:
    """Liquidation wealth after trading theta at time 0, given gross return."""
    held = p.y0 + theta
    cost = m.lam * (gross * max(held, 0.0) + (1.0 + m.r) * max(-theta, 0.0))
    return (1.0 + m.r) * (p.x0 - theta) + gross * held - cost


def reference_wealth(p: Portfolio, m: MarketModel, gross: float) -> float:
    """Terminal wealth of doing nothing (the reference point, pathwise).

    Evaluated through the same expression as ``terminal_wealth`` so the
    wealth difference at theta = 0 cancels exactly, bit for bit.
    """
    return terminal_wealth(p, m, 0.0, gross)


def reference_point(p: Portfolio, m: MarketModel) -> SignedDistribution:
    """Law of the reference wealth; a constant when y0 = 0."""
    scale = p.y0 - m.lam * max(p.y0, 0.0)
    shift = (1.0 + m.r) * p.x0
    if scale == 0.0:
        return constant_law(shift)
    return m.returns.gross_law().affine(shift, scale)


def excess_transform(m: MarketModel, direction: TradeDirection) -> SignedDistribution:
    """Per-unit wealth difference against the benchmark for the given direction."""
    gross = m.returns.gross_law()
    one_r = 1.0 + m.r
    keep = 1.0 - m.lam
    if direction is TradeDirection.BUY:
        return gross.affine(-one_r, keep)
    if direction is TradeDirection.SELL:
        return gross.affine(-keep * one_r, keep)
    if direction is TradeDirection.SHORT:
        return gross.affine(-keep * one_r, 1.0)
    raise ValueError(f"unknown trade direction {direction!r}")


@dataclass(frozen=True)
class ArbitrageCheck:
    passed: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def check_no_arbitrage(m: MarketModel) -> ArbitrageCheck:
    """Both strict trade opportunities must exist; degenerate identities fail too.

    Requires P(gross < (1+r)/(1-lam)) > 0 and P(gross > (1-lam)(1+r)) > 0; a
    gross return identically equal to either threshold is rejected as
    degenerate even though it admits no arbitrage.
    """
    law = m.returns.gross_law()
    thr_down = (1.0 + m.r) / (1.0 - m.lam)
    thr_up = (1.0 - m.lam) * (1.0 + m.r)

    atoms = law.atoms
    if atoms is not None:
        tol = 0.0 if len(atoms) > 1 else 1e-12 * max(1.0, abs(thr_down))
        if all(abs(x - thr_down) <= tol for x, _ in atoms):
            return ArbitrageCheck(False, "degenerate: discounted gross return identically risk-free")
        tol = 0.0 if len(atoms) > 1 else 1e-12 * max(1.0, abs(thr_up))
        if all(abs(x - thr_up) <= tol for x, _ in atoms):
            return ArbitrageCheck(False, "degenerate: gross return identically the bid-adjusted risk-free")

    if law.prob_below(thr_down) <= 0.0:
        return ArbitrageCheck(
            False,
            f"risky asset dominates: P(gross < {thr_down:.6g}) = 0",
        )
    if law.prob_above(thr_up) <= 0.0:
        return ArbitrageCheck(
            False,
            f"risk-free dominates: P(gross > {thr_up:.6g}) = 0",
        )
    return ArbitrageCheck(True)


@dataclass(frozen=True)
class LossSetProbabilities:
    """Probability of ending in a loss for each pure trade direction."""

    buy: float
    sell: float
    short: float


def loss_set_probabilities(m: MarketModel) -> LossSetProbabilities:
    """P(buying loses), P(selling loses), P(shorting loses).

    Buying loses where its excess return is negative; selling or shorting
    loses where the corresponding excess return is positive.
    """
    z_buy = excess_transform(m, TradeDirection.BUY)
    z_sell = excess_transform(m, TradeDirection.SELL)
    z_short = excess_transform(m, TradeDirection.SHORT)
    return LossSetProbabilities(
        buy=z_buy.prob_below(0.0),
        sell=z_sell.prob_above(0.0),
        short=z_short.prob_above(0.0),
    )
