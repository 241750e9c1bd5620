"""Scalar distributions exposing CDF, survival and quantile functions.

Continuous laws are represented as an exact affine transform ``shift +
scale * X`` of an analytic base distribution, so quantiles of derived
quantities (excess returns, wealth differences) are computed without any
resampling or interpolation.  Discrete laws carry their atoms explicitly.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri, ndtri_exp, stdtr, stdtrit

__all__ = [
    "SignedDistribution",
    "ContinuousLaw",
    "DiscreteLaw",
    "constant_law",
    "NormalBase",
    "LognormalBase",
    "StudentTBase",
]


class NormalBase:
    """Standard normal base; inverse CDF via scipy's rational approximation."""

    continuous = True

    def cdf(self, x: float) -> float:
        return float(ndtr(x))

    def sf(self, x: float) -> float:
        return float(ndtr(-x))

    def ppf_array(self, q):
        return ndtri(q)

    def isf_array(self, q):
        return -ndtri(q)

    def cdf_array(self, x):
        return ndtr(x)

    def sf_array(self, x):
        return ndtr(-np.asarray(x, dtype=float))

    def ppf(self, q: float) -> float:
        return float(ndtri(q))

    def isf(self, q: float) -> float:
        return -float(ndtri(q))

    def ppf_logq(self, log_q: float) -> float:
        """Quantile at q = exp(log_q), stable for arbitrarily deep tails."""
        return float(ndtri_exp(log_q))

    def isf_logq(self, log_q: float) -> float:
        return -float(ndtri_exp(log_q))


class LognormalBase:
    """Law of exp(mu + sigma * N) with N standard normal."""

    continuous = True

    def __init__(self, mu: float, sigma: float):
        if sigma <= 0:
            raise ValueError(f"lognormal sigma must be > 0, got {sigma}")
        self.mu = mu
        self.sigma = sigma

    def cdf(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        return float(ndtr((math.log(x) - self.mu) / self.sigma))

    def sf(self, x: float) -> float:
        if x <= 0.0:
            return 1.0
        return float(ndtr(-(math.log(x) - self.mu) / self.sigma))

    def ppf(self, q: float) -> float:
        return math.exp(self.mu + self.sigma * float(ndtri(q)))

    def isf(self, q: float) -> float:
        return math.exp(self.mu - self.sigma * float(ndtri(q)))

    def ppf_logq(self, log_q: float) -> float:
        return math.exp(self.mu + self.sigma * float(ndtri_exp(log_q)))

    def isf_logq(self, log_q: float) -> float:
        return math.exp(self.mu - self.sigma * float(ndtri_exp(log_q)))

    def ppf_array(self, q):
        return np.exp(self.mu + self.sigma * ndtri(q))

    def isf_array(self, q):
        return np.exp(self.mu - self.sigma * ndtri(q))

    def cdf_array(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = ndtr((np.log(x[pos]) - self.mu) / self.sigma)
        return out

    def sf_array(self, x):
        return 1.0 - self.cdf_array(x)


class StudentTBase:
    """Standard Student-t with ``nu`` degrees of freedom."""

    continuous = True

    def __init__(self, nu: float):
        if nu <= 0:
            raise ValueError(f"student-t nu must be > 0, got {nu}")
        self.nu = nu

    def cdf(self, x: float) -> float:
        return float(stdtr(self.nu, x))

    def sf(self, x: float) -> float:
        return float(stdtr(self.nu, -x))

    def ppf(self, q: float) -> float:
        return float(stdtrit(self.nu, q))

    def isf(self, q: float) -> float:
        # symmetric about 0
        return -float(stdtrit(self.nu, q))

    def ppf_array(self, q):
        return stdtrit(self.nu, q)

    def isf_array(self, q):
        return -stdtrit(self.nu, q)

    def cdf_array(self, x):
        return stdtr(self.nu, np.asarray(x, dtype=float))

    def sf_array(self, x):
        return stdtr(self.nu, -np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ContinuousLaw:
    """Law of ``shift + scale * X`` for an analytic base distribution."""

    base: object
    shift: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.scale == 0.0:
            raise ValueError("scale must be nonzero; use constant_law() for a point mass")

    @property
    def atoms(self):
        return None

    @property
    def has_log_tail_quantiles(self) -> bool:
        return hasattr(self.base, "ppf_logq")

    def cdf(self, x: float) -> float:
        z = (x - self.shift) / self.scale
        return self.base.cdf(z) if self.scale > 0 else self.base.sf(z)

    def sf(self, x: float) -> float:
        z = (x - self.shift) / self.scale
        return self.base.sf(z) if self.scale > 0 else self.base.cdf(z)

    def ppf(self, q: float) -> float:
        if not 0.0 < q < 1.0:
            raise ValueError(f"quantile level must be in (0, 1), got {q}")
        if self.scale > 0:
            return self.shift + self.scale * self.base.ppf(q)
        return self.shift + self.scale * self.base.isf(q)

    def isf(self, q: float) -> float:
        """Upper-tail quantile, exact for small q (no 1 - q cancellation)."""
        if not 0.0 < q < 1.0:
            raise ValueError(f"quantile level must be in (0, 1), got {q}")
        if self.scale > 0:
            return self.shift + self.scale * self.base.isf(q)
        return self.shift + self.scale * self.base.ppf(q)

    def cdf_array(self, x):
        z = (np.asarray(x, dtype=float) - self.shift) / self.scale
        return self.base.cdf_array(z) if self.scale > 0 else self.base.sf_array(z)

    def sf_array(self, x):
        z = (np.asarray(x, dtype=float) - self.shift) / self.scale
        return self.base.sf_array(z) if self.scale > 0 else self.base.cdf_array(z)

    def ppf_array(self, q):
        """Vectorized lower-tail quantiles (levels strictly inside (0, 1))."""
        if self.scale > 0:
            return self.shift + self.scale * self.base.ppf_array(q)
        return self.shift + self.scale * self.base.isf_array(q)

    def isf_array(self, q):
        if self.scale > 0:
            return self.shift + self.scale * self.base.isf_array(q)
        return self.shift + self.scale * self.base.ppf_array(q)

    def ppf_logq(self, log_q: float) -> float:
        """Lower-tail quantile at q = exp(log_q); requires a log-tail base."""
        if self.scale > 0:
            return self.shift + self.scale * self.base.ppf_logq(log_q)
        return self.shift + self.scale * self.base.isf_logq(log_q)

    def isf_logq(self, log_q: float) -> float:
        if self.scale > 0:
            return self.shift + self.scale * self.base.isf_logq(log_q)
        return self.shift + self.scale * self.base.ppf_logq(log_q)

    def prob_below(self, x: float) -> float:
        return self.cdf(x)

    def prob_above(self, x: float) -> float:
        return self.sf(x)

    def affine(self, shift: float, scale: float) -> "SignedDistribution":
        """Exact law of ``shift + scale * X``."""
        if scale == 0.0:
            return constant_law(shift)
        return ContinuousLaw(self.base, shift + scale * self.shift, scale * self.scale)


class DiscreteLaw:
    """Finite-support law; quantiles use midpoint steps at probability jumps."""

    def __init__(self, values, probs):
        pairs: dict[float, float] = {}
        for v, p in zip(values, probs, strict=True):
            if p < 0:
                raise ValueError(f"atom probability must be >= 0, got {p}")
            if p > 0:
                pairs[float(v)] = pairs.get(float(v), 0.0) + float(p)
        if not pairs:
            raise ValueError("discrete law needs at least one atom with positive mass")
        total = sum(pairs.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"atom probabilities must sum to 1, got {total}")
        xs = sorted(pairs)
        self._xs = tuple(xs)
        self._ps = tuple(pairs[x] / total for x in xs)
        cum = []
        c = 0.0
        for p in self._ps:
            c += p
            cum.append(c)
        cum[-1] = 1.0
        self._cum = tuple(cum)

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self._xs, self._ps))

    def cdf(self, x: float) -> float:
        i = bisect.bisect_right(self._xs, x)
        return self._cum[i - 1] if i > 0 else 0.0

    def sf(self, x: float) -> float:
        return 1.0 - self.cdf(x)

    def prob_below(self, x: float) -> float:
        """P(X < x), strict."""
        i = bisect.bisect_left(self._xs, x)
        return self._cum[i - 1] if i > 0 else 0.0

    def prob_above(self, x: float) -> float:
        """P(X > x), strict."""
        return 1.0 - self.cdf(x)

    def ppf(self, q: float) -> float:
        if not 0.0 < q < 1.0:
            raise ValueError(f"quantile level must be in (0, 1), got {q}")
        i = bisect.bisect_left(self._cum, q)
        if i < len(self._xs) and self._cum[i] == q and i + 1 < len(self._xs):
            return 0.5 * (self._xs[i] + self._xs[i + 1])
        return self._xs[min(i, len(self._xs) - 1)]

    def isf(self, q: float) -> float:
        return self.ppf(1.0 - q)

    def affine(self, shift: float, scale: float) -> "DiscreteLaw":
        if scale == 0.0:
            return constant_law(shift)
        return DiscreteLaw([shift + scale * x for x in self._xs], self._ps)

    def __eq__(self, other):
        return (
            isinstance(other, DiscreteLaw)
            and self._xs == other._xs
            and self._ps == other._ps
        )

    def __repr__(self):
        inside = ", ".join(f"{x!r}: {p!r}" for x, p in self.atoms)
        return f"DiscreteLaw({{{inside}}})"


def constant_law(c: float) -> DiscreteLaw:
    return DiscreteLaw([c], [1.0])


# Anything with cdf/sf/ppf/isf/prob_below/prob_above/atoms/affine.
SignedDistribution = ContinuousLaw | DiscreteLaw
