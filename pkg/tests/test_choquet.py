import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from cptinvest.choquet import (
    ProspectDivergenceError,
    check_finiteness,
    prospect_value,
    rank_dependent_sum,
)
from cptinvest.distributions import ContinuousLaw, DiscreteLaw, constant_law
from cptinvest.market import Binomial, Lognormal, Normal, StudentT
from cptinvest.preferences import (
    CptPreference,
    ExponentialUtility,
    IdentityWeighting,
    PowerUtility,
    PrelecWeighting,
    TverskyKahnemanWeighting,
)

TK = TverskyKahnemanWeighting(0.61, 0.69)
POWER = PowerUtility(0.88, 0.88, 2.25)


class _UniformBase:
    """Uniform(0,1) base distribution for closed-form cross-checks."""

    continuous = True

    def cdf(self, x):
        return min(max(x, 0.0), 1.0)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def ppf(self, q):
        return q

    def isf(self, q):
        return 1.0 - q


def uniform_law(lo, hi):
    return ContinuousLaw(_UniformBase(), shift=lo, scale=hi - lo)


def test_zero_distribution_has_zero_prospect():
    pref = CptPreference(POWER, TK)
    b = prospect_value(pref, constant_law(0.0))
    assert (b.v_plus, b.v_minus, b.total) == (0.0, 0.0, 0.0)


def test_two_point_prospect_closed_form():
    p = 0.3
    pref = CptPreference(POWER, TK)
    dist = DiscreteLaw([1.0, -1.0], [1.0 - p, p])
    b = prospect_value(pref, dist)
    assert b.v_plus == pytest.approx(TK.weight("gain", 1.0 - p) * POWER.value("gain", 1.0))
    assert b.v_minus == pytest.approx(TK.weight("loss", p) * POWER.value("loss", 1.0))


def test_uniform_closed_form_matches_quadrature():
    # identity weighting: v_plus = E[(D+)^a] = 1/(2(a+1)), v_minus = k/(2(b+1))
    alpha, beta, k = 0.7, 0.88, 2.25
    pref = CptPreference(PowerUtility(alpha, beta, k), IdentityWeighting())
    b = prospect_value(pref, uniform_law(-1.0, 1.0))
    assert b.v_plus == pytest.approx(0.5 / (alpha + 1), abs=1e-8)
    assert b.v_minus == pytest.approx(k * 0.5 / (beta + 1), abs=1e-8)


def test_atoms_at_zero_contribute_nothing():
    pref = CptPreference(POWER, TK)
    with_zero = DiscreteLaw([-1.0, 0.0, 2.0], [0.25, 0.5, 0.25])
    without = DiscreteLaw([-1.0, 2.0], [0.25, 0.25 + 0.5])
    # the zero atom may absorb probability on either side of the ranking;
    # only the tail weights seen by nonzero atoms matter
    b = prospect_value(pref, with_zero)
    assert b.v_plus == pytest.approx(TK.weight("gain", 0.25) * POWER.value("gain", 2.0))
    assert b.v_minus == pytest.approx(TK.weight("loss", 0.25) * POWER.value("loss", 1.0))
    assert without.atoms[0][0] == -1.0  # sanity on the comparison fixture


def test_comonotonic_additivity_exact():
    """Rank sums equal the definition-based telescoping tail sums exactly."""
    pref = CptPreference(PowerUtility(0.6, 0.9, 3.0), TverskyKahnemanWeighting(0.4, 0.8))
    atoms = [(-2.0, 0.15), (-0.5, 0.2), (0.0, 0.05), (0.3, 0.35), (1.7, 0.25)]
    got_plus, got_minus = rank_dependent_sum(pref.utility.value, pref.weighting, atoms)

    # independent route: telescoping sums of weighted cumulative tail probabilities
    w, u = pref.weighting, pref.utility
    pos = sorted([a for a in atoms if a[0] > 0], reverse=True)
    tails = []
    c = 0.0
    for _, prob in pos:
        c += prob
        tails.append(c)
    expect_plus = sum(
        u.value("gain", x) * (w.weight("gain", tails[i]) - w.weight("gain", tails[i - 1] if i else 0.0))
        for i, (x, _) in enumerate(pos)
    )
    neg = sorted([a for a in atoms if a[0] < 0])
    cums = []
    c = 0.0
    for _, prob in neg:
        c += prob
        cums.append(c)
    expect_minus = sum(
        u.value("loss", -x) * (w.weight("loss", cums[i]) - w.weight("loss", cums[i - 1] if i else 0.0))
        for i, (x, _) in enumerate(neg)
    )
    assert got_plus == expect_plus  # exact, no tolerance
    assert got_minus == expect_minus


@given(
    values=st.lists(st.floats(-5, 5), min_size=2, max_size=6, unique=True),
    bumps=st.lists(st.floats(0.0, 2.0), min_size=6, max_size=6),
    seed=st.integers(0, 10_000),
)
@settings(max_examples=60, deadline=None)
def test_first_order_stochastic_dominance(values, bumps, seed):
    import random

    bumps = bumps[: len(values)]
    rng = random.Random(seed)
    probs = [rng.random() + 0.05 for _ in values]
    total = sum(probs)
    probs = [p / total for p in probs]
    pref = CptPreference(PowerUtility(0.7, 0.9, 2.0), TK)
    lower = DiscreteLaw(values, probs)
    higher = DiscreteLaw([v + b for v, b in zip(values, bumps)], probs)
    assert prospect_value(pref, lower).total <= prospect_value(pref, higher).total + 1e-12


@given(c=st.floats(0.1, 8.0))
@settings(max_examples=30, deadline=None)
def test_power_scale_consistency_discrete(c):
    pref = CptPreference(PowerUtility(0.6, 0.85, 2.5), TK)
    dist = DiscreteLaw([-1.5, -0.2, 0.8, 2.0], [0.2, 0.3, 0.3, 0.2])
    base = prospect_value(pref, dist)
    scaled = prospect_value(pref, dist.affine(0.0, c))
    assert scaled.v_plus == pytest.approx(c**0.6 * base.v_plus, rel=1e-12)
    assert scaled.v_minus == pytest.approx(c**0.85 * base.v_minus, rel=1e-12)


def test_power_scale_consistency_continuous():
    pref = CptPreference(PowerUtility(0.6, 0.85, 2.5), TK)
    dist = ContinuousLaw(Lognormal(0.01, 0.3).gross_law().base).affine(-1.0, 1.0)
    c = 3.7
    base = prospect_value(pref, dist)
    scaled = prospect_value(pref, dist.affine(0.0, c))
    assert scaled.v_plus == pytest.approx(c**0.6 * base.v_plus, rel=1e-7)
    assert scaled.v_minus == pytest.approx(c**0.85 * base.v_minus, rel=1e-7)


def test_identity_weighting_gains_only_equals_expected_utility():
    """No distortion and no losses: the prospect is plain expected utility."""
    mu, sigma, alpha = 0.05, 0.4, 0.75
    pref = CptPreference(PowerUtility(alpha, 0.9, 2.0), IdentityWeighting())
    dist = Lognormal(mu, sigma).gross_law()  # strictly positive support

    def density(x):
        return math.exp(-((math.log(x) - mu) ** 2) / (2 * sigma**2)) / (
            x * sigma * math.sqrt(2 * math.pi)
        )

    expected, _ = quad(lambda x: x**alpha * density(x), 0.0, math.inf, limit=400)
    b = prospect_value(pref, dist)
    assert b.v_minus == 0.0
    assert b.v_plus == pytest.approx(expected, abs=1e-8)


def test_exponential_utility_prospect_bounded():
    pref = CptPreference(ExponentialUtility(0.8, 0.8, 2.0), TK)
    dist = Normal(0.3, 1.5).gross_law().affine(-1.0, 1.0)  # heavy spread
    b = prospect_value(pref, dist)
    assert 0.0 < b.v_plus < 1.0
    assert 0.0 < b.v_minus < 2.0


def test_prelec_weighting_continuous_law():
    pref = CptPreference(PowerUtility(0.7, 0.85, 2.0), PrelecWeighting(0.65, 1.0, 1.2))
    dist = Lognormal(0.02, 0.25).gross_law().affine(-1.01, 1.0)
    b = prospect_value(pref, dist)
    assert b.v_plus > 0 and b.v_minus > 0
    assert math.isfinite(b.total)


def test_genuine_divergence_is_reported_not_returned():
    # exp-log weighting with a small exponent under a lognormal tail and
    # power utility: the gains integral truly diverges
    pref = CptPreference(PowerUtility(0.9, 0.95, 2.0), PrelecWeighting(0.35, 1.0, 1.0))
    dist = Lognormal(0.0, 1.2).gross_law().affine(-1.0, 1.0)
    with pytest.raises(ProspectDivergenceError) as err:
        prospect_value(pref, dist)
    assert err.value.side in ("gain", "loss")


class TestFiniteness:
    def test_bounded_laws_always_finite(self):
        pref = CptPreference(POWER, TK)
        assert check_finiteness(pref, Binomial(1.2, 0.9, 0.5)) == "finite"

    def test_exponential_utility_always_finite(self):
        pref = CptPreference(ExponentialUtility(1.0, 1.0, 2.0), PrelecWeighting(0.3, 1.0, 1.0))
        assert check_finiteness(pref, Lognormal(0.0, 1.0)) == "finite"

    def test_power_lognormal_tk_finite(self):
        # weighting derivative exponents 1-gamma, 1-delta both below one
        pref = CptPreference(POWER, TverskyKahnemanWeighting(0.61, 0.69))
        assert check_finiteness(pref, Lognormal(3.2932e-4, 7.4383e-3)) == "finite"
        assert check_finiteness(pref, Normal(0.01, 0.1)) == "finite"
        assert check_finiteness(pref, StudentT(6.0, 0.0, 0.05)) == "finite"
