"""Brute-force verification of solver output, straight from definitions.

The objective is evaluated by building the law of the wealth difference
against the do-nothing benchmark pathwise (no per-unit factorization, no
case analysis) and feeding it to the generic prospect evaluator.  A refined
grid search then certifies finite optima; unbounded claims are certified by
monotone growth along a geometric ladder toward the stated limit prospect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .choquet import prospect_value
from .distributions import DiscreteLaw, constant_law
from .market import MarketModel, Portfolio, reference_wealth, terminal_wealth
from .preferences import CptPreference, ExponentialUtility
from .solution import Solution, SolutionKind

__all__ = [
    "GridSpec",
    "GridSearchResult",
    "OracleReport",
    "difference_law",
    "evaluate_objective",
    "evaluate_objective_grid",
    "grid_search",
    "verify",
]

_LADDER = (1.0, 10.0, 100.0, 1000.0)
_LIMIT_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Search grid; each refinement re-grids +-2 steps around the incumbent at 10x."""

    lo: float
    hi: float
    n_points: int = 4001
    refinement_rounds: int = 2

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.n_points < 3:
            raise ValueError(f"need at least 3 grid points, got {self.n_points}")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be >= 0")


@dataclass(frozen=True)
class GridSearchResult:
    argmax_theta: float
    max_value: float
    final_step: float
    n_evaluations: int


@dataclass(frozen=True)
class OracleReport:
    agreement: str  # "match" | "mismatch"
    detail: str
    closed_form_theta: float
    closed_form_value: float
    argmax_theta: float | None = None
    max_value: float | None = None
    final_step: float | None = None

    @property
    def matched(self) -> bool:
        return self.agreement == "match"


def difference_law(p: Portfolio, m: MarketModel, theta: float):
    """Law of terminal wealth minus the do-nothing benchmark, built pathwise.

    Both wealth and benchmark are affine in the realized gross return once
    the trade's sign fixes the cost legs, so two pathwise probes pin the law
    exactly; a third probe guards the extraction.
    """

    def diff(gross: float) -> float:
        return terminal_wealth(p, m, theta, gross) - reference_wealth(p, m, gross)

    law = m.returns.gross_law()
    atoms = law.atoms
    if atoms is not None:
        return DiscreteLaw([diff(x) for x, _ in atoms], [w for _, w in atoms])
    base = diff(0.0)
    slope = diff(1.0) - base
    probe = diff(2.0)
    if abs(base + 2.0 * slope - probe) > 1e-9 * (1.0 + abs(probe)):
        raise AssertionError("wealth difference is not affine in the gross return")
    if slope == 0.0:
        return constant_law(base)
    return law.affine(base, slope)


def evaluate_objective(p: Portfolio, m: MarketModel, pref: CptPreference,
                       theta: float) -> float:
    """Prospect of trading theta, from definitions only."""
    return prospect_value(pref, difference_law(p, m, theta)).total


@lru_cache(maxsize=8)
def _gauss_nodes(n_panels: int, order: int):
    # panels graded toward 0, where slowly varying log factors concentrate
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, n_panels + 1) ** 3
    nodes = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b)
                            for a, b in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([np.full(order, 0.5 * (b - a)) * w
                              for a, b in zip(edges[:-1], edges[1:])])
    return nodes, weights


def _affine_coefficients(p: Portfolio, m: MarketModel, thetas: np.ndarray):
    """Per-theta (base, slope) of the wealth difference as a function of gross."""
    one_r = 1.0 + m.r
    held = p.y0 + thetas
    base = -one_r * thetas - m.lam * one_r * np.maximum(-thetas, 0.0)
    slope = (held - m.lam * np.maximum(held, 0.0)) - (p.y0 - m.lam * max(p.y0, 0.0))
    return base, slope


def _utility_grid(pref: CptPreference, side: str, x: np.ndarray) -> np.ndarray:
    u = pref.utility
    if isinstance(u, ExponentialUtility):
        eta = u.eta_gain if side == "gain" else u.eta_loss
        out = -np.expm1(-eta * x)
        return out if side == "gain" else u.loss_aversion * out
    exponent = u.alpha if side == "gain" else u.beta
    out = np.power(x, exponent)
    return out if side == "gain" else u.loss_aversion * out


def _continuous_objective_grid(p: Portfolio, m: MarketModel, pref: CptPreference,
                               thetas: np.ndarray) -> np.ndarray:
    """Fixed-node Choquet evaluation of the whole theta grid at once.

    Each theta's wealth difference is an affine map of the gross return, so
    its quantile function reuses the return law's quantiles; gains and losses
    are integrated on shared Gauss-Legendre nodes after the same endpoint
    substitution the adaptive path uses.
    """
    law = m.returns.gross_law()
    base, slope = _affine_coefficients(p, m, thetas)
    out = np.zeros_like(thetas)

    const_rows = slope == 0.0
    if const_rows.any():
        vals = base[const_rows]
        out[const_rows] = np.where(
            vals > 0, _utility_grid(pref, "gain", np.maximum(vals, 0.0)),
            np.where(vals < 0, -_utility_grid(pref, "loss", np.maximum(-vals, 0.0)), 0.0),
        )

    weighting = pref.weighting
    utility = pref.utility
    nodes, node_weights = _gauss_nodes(12, 16)

    def kink_power(side):
        # local growth exponent of the utility at zero outcome
        if isinstance(utility, ExponentialUtility):
            return 1.0
        return utility.alpha if side == "gain" else utility.beta

    def side_value(side, b, s, upper, use_upper_tail):
        """integral of u(|Q_D|) w'(q) over (0, upper), both endpoints substituted."""
        live = upper > 1e-300
        if not live.any():
            return np.zeros_like(b)
        half = 0.5 * upper[live, None]
        pieces = np.zeros(int(live.sum()))
        m_w = 1.0 / weighting.endpoint_exponent(side)
        m_u = 1.0 / kink_power(side)
        for q, jac in (
            (half * nodes[None, :] ** m_w,
             m_w * nodes ** (m_w - 1.0) * node_weights),
            (upper[live, None] - half * nodes[None, :] ** m_u,
             m_u * nodes ** (m_u - 1.0) * node_weights),
        ):
            quantiles = law.isf_array(q) if use_upper_tail else law.ppf_array(q)
            d_vals = b[live, None] + s[live, None] * quantiles
            magnitude = np.maximum(d_vals if side == "gain" else -d_vals, 0.0)
            integrand = (_utility_grid(pref, side, magnitude)
                         * weighting.derivative_array(side, q))
            pieces = pieces + half[:, 0] * (integrand * jac[None, :]).sum(axis=1)
        result = np.zeros_like(b)
        result[live] = pieces
        return result

    chunk = 4096
    for sign in (1.0, -1.0):
        rows = (slope > 0.0) if sign > 0 else (slope < 0.0)
        if not rows.any():
            continue
        idx = np.nonzero(rows)[0]
        for start in range(0, idx.size, chunk):
            sel = idx[start:start + chunk]
            b = base[sel]
            s = slope[sel]
            cross = -b / s  # gross return where the difference changes sign
            prob_gain = law.sf_array(cross) if sign > 0 else law.cdf_array(cross)
            out[sel] = (side_value("gain", b, s, prob_gain, sign > 0)
                        - side_value("loss", b, s, 1.0 - prob_gain, sign < 0))
    return out


def evaluate_objective_grid(p: Portfolio, m: MarketModel, pref: CptPreference,
                            thetas: np.ndarray) -> np.ndarray:
    """Vectorized objective over a theta grid.

    Two-state laws use exact closed-form sums; continuous laws use the shared
    fixed-node Choquet evaluation (except the exp-log weighting, whose lower
    tail needs the adaptive path).
    """
    thetas = np.asarray(thetas, dtype=float)
    law = m.returns.gross_law()
    atoms = law.atoms
    if atoms is None:
        if getattr(pref.weighting, "log_tail_density", None) is not None:
            return np.array([evaluate_objective(p, m, pref, t) for t in thetas])
        return _continuous_objective_grid(p, m, pref, thetas)
    if len(atoms) != 2:
        return np.array([evaluate_objective(p, m, pref, t) for t in thetas])

    (x_lo, p_lo), (x_hi, p_hi) = atoms
    one_r = 1.0 + m.r
    held = p.y0 + thetas
    base = one_r * (p.x0 - thetas) - m.lam * one_r * np.maximum(-thetas, 0.0)
    bench_scale = p.y0 - m.lam * max(p.y0, 0.0)
    bench_base = one_r * p.x0

    def diff(gross):
        wealth = base + gross * (held - m.lam * np.maximum(held, 0.0))
        return wealth - (bench_base + gross * bench_scale)

    d_lo = diff(x_lo)
    d_hi = diff(x_hi)
    top = np.maximum(d_lo, d_hi)
    bot = np.minimum(d_lo, d_hi)
    hi_on_top = d_hi >= d_lo

    u = pref.utility
    w = pref.weighting

    def u_arr(side, x):
        if isinstance(u, ExponentialUtility):
            eta = u.eta_gain if side == "gain" else u.eta_loss
            out = -np.expm1(-eta * x)
            return out if side == "gain" else u.loss_aversion * out
        exponent = u.alpha if side == "gain" else u.beta
        out = np.power(x, exponent)
        return out if side == "gain" else u.loss_aversion * out

    # the top-atom probability takes only two values; weight them once
    w_top_gain = np.where(hi_on_top, w.weight("gain", p_hi), w.weight("gain", p_lo))
    w_bot_loss = np.where(hi_on_top, w.weight("loss", p_lo), w.weight("loss", p_hi))
    v_plus = np.where(top > 0, u_arr("gain", np.maximum(top, 0.0)) * w_top_gain, 0.0)
    v_plus += np.where(bot > 0, u_arr("gain", np.maximum(bot, 0.0)) * (1.0 - w_top_gain), 0.0)
    v_minus = np.where(bot < 0, u_arr("loss", np.maximum(-bot, 0.0)) * w_bot_loss, 0.0)
    v_minus += np.where(top < 0, u_arr("loss", np.maximum(-top, 0.0)) * (1.0 - w_bot_loss), 0.0)
    return v_plus - v_minus


def grid_search(p: Portfolio, m: MarketModel, pref: CptPreference,
                spec: GridSpec) -> GridSearchResult:
    """Deterministic refined grid argmax of the objective."""
    lo, hi = spec.lo, spec.hi
    grid = np.linspace(lo, hi, spec.n_points)
    values = evaluate_objective_grid(p, m, pref, grid)
    n_evals = spec.n_points
    best = int(np.argmax(values))
    best_theta = float(grid[best])
    best_value = float(values[best])
    step = (hi - lo) / (spec.n_points - 1)

    for _ in range(spec.refinement_rounds):
        sub_lo = max(lo, best_theta - 2.0 * step)
        sub_hi = min(hi, best_theta + 2.0 * step)
        step = step / 10.0
        count = max(3, int(round((sub_hi - sub_lo) / step)) + 1)
        grid = np.linspace(sub_lo, sub_hi, count)
        values = evaluate_objective_grid(p, m, pref, grid)
        n_evals += count
        best = int(np.argmax(values))
        if values[best] >= best_value:
            best_theta = float(grid[best])
            best_value = float(values[best])
        step = (sub_hi - sub_lo) / (count - 1)

    return GridSearchResult(best_theta, best_value, step, n_evals)


def _default_tol(m: MarketModel) -> float:
    # closed-form arithmetic for discrete laws, quadrature-limited otherwise
    return 1e-6 if m.returns.discrete else 1e-5


def _ladder_scale(pref: CptPreference) -> float:
    if isinstance(pref.utility, ExponentialUtility):
        return 1.0 / pref.utility.eta_gain
    return 1.0


def _certify_unbounded(solution: Solution, p: Portfolio, m: MarketModel,
                       pref: CptPreference, spec: GridSpec, tol: float) -> OracleReport:
    """Certify a claimed unbounded optimum along a geometric ladder.

    For bounded (exponential) utilities the objective may dip before rising
    toward its limit, so the requirements are: a nondecreasing outer ladder,
    the ladder end within 1e-9 of the claimed limit prospect, and no grid
    point beating the limit.  Unbounded power objectives on an infinite ray
    are monotone, so there strict increase along the whole ladder is required.
    """
    sign = 1.0 if solution.kind is SolutionKind.PLUS_INFINITY else -1.0
    scale = _ladder_scale(pref)
    atoms = m.returns.gross_law().atoms
    if atoms is not None and math.isfinite(solution.prospect):
        # stretch the ladder when a state's per-unit wealth difference is
        # small, so the bounded utility actually saturates by the last rung
        unit = [abs(terminal_wealth(p, m, sign, x) - reference_wealth(p, m, x))
                for x, _ in atoms]
        smallest = min((u for u in unit if u > 0), default=1.0)
        scale = scale * max(1.0, 0.04 / smallest)
    thetas = [sign * step * scale for step in _LADDER]
    values = [evaluate_objective(p, m, pref, t) for t in thetas]

    if not math.isfinite(solution.prospect):
        increasing = all(b > a for a, b in zip(values, values[1:]))
        if not increasing:
            return OracleReport(
                "mismatch",
                f"objective not strictly increasing along the ladder: {values}",
                solution.theta, solution.prospect,
            )
        return OracleReport("match", "monotone ladder certification passed",
                            solution.theta, solution.prospect)

    gap = abs(values[-1] - solution.prospect)
    if gap > _LIMIT_TOL:
        return OracleReport(
            "mismatch",
            f"ladder end misses the limit prospect by {gap:.3e}",
            solution.theta, solution.prospect,
        )
    if values[-1] < values[-2] - _LIMIT_TOL:
        return OracleReport(
            "mismatch",
            f"objective not approaching the limit from below: {values}",
            solution.theta, solution.prospect,
        )
    grid = np.linspace(spec.lo, spec.hi, min(spec.n_points, 2001))
    best = float(evaluate_objective_grid(p, m, pref, grid).max())
    if best > solution.prospect + tol:
        return OracleReport(
            "mismatch",
            f"a finite trade beats the claimed limit: {best:.10g} vs "
            f"{solution.prospect:.10g}",
            solution.theta, solution.prospect,
        )
    return OracleReport("match", "ladder limit and grid dominance certification passed",
                        solution.theta, solution.prospect)


def _certify_interval(solution: Solution, p: Portfolio, m: MarketModel,
                      pref: CptPreference, tol: float) -> OracleReport:
    lo = solution.lo if math.isfinite(solution.lo) else solution.hi - 10.0
    hi = min(solution.hi, lo + 10.0)
    worst_gap = 0.0
    worst_theta = lo
    for theta in np.linspace(lo, hi, 11):
        gap = abs(evaluate_objective(p, m, pref, float(theta)) - solution.prospect)
        if gap > worst_gap:
            worst_gap = gap
            worst_theta = float(theta)
    if worst_gap > tol:
        return OracleReport(
            "mismatch",
            f"objective deviates by {worst_gap:.3e} from the reported prospect "
            f"at theta={worst_theta:.6g}",
            solution.representative_theta, solution.prospect,
        )
    return OracleReport("match", "interval is flat at the reported prospect",
                        solution.representative_theta, solution.prospect)


def verify(solution: Solution, p: Portfolio, m: MarketModel, pref: CptPreference,
           spec: GridSpec, tol_value: float | None = None) -> OracleReport:
    """Certify a solver result against the definitional objective.

    Finite points must match the refined grid argmax within one final step
    and the grid maximum within tolerance; intervals must be flat; unbounded
    solutions must pass the geometric-ladder certification.
    """
    tol = _default_tol(m) if tol_value is None else tol_value
    if solution.kind in (SolutionKind.PLUS_INFINITY, SolutionKind.MINUS_INFINITY):
        return _certify_unbounded(solution, p, m, pref, spec, tol)
    if solution.kind is SolutionKind.INTERVAL:
        return _certify_interval(solution, p, m, pref, tol)

    result = grid_search(p, m, pref, spec)
    gap = result.max_value - solution.prospect
    if abs(gap) > tol:
        return OracleReport(
            "mismatch",
            f"grid maximum {result.max_value:.10g} vs reported {solution.prospect:.10g} "
            f"(gap {gap:.3e}, worst theta {result.argmax_theta:.6g})",
            solution.theta, solution.prospect,
            result.argmax_theta, result.max_value, result.final_step,
        )
    direct = evaluate_objective(p, m, pref, solution.theta)
    if abs(direct - solution.prospect) > tol:
        return OracleReport(
            "mismatch",
            f"objective at the reported theta is {direct:.10g}, not the reported "
            f"prospect {solution.prospect:.10g}",
            solution.theta, solution.prospect,
            result.argmax_theta, result.max_value, result.final_step,
        )
    theta_gap = abs(result.argmax_theta - solution.theta)
    if theta_gap > result.final_step * (1.0 + 1e-9) and result.max_value > direct + tol:
        # a distant argmax only disqualifies when it is strictly better
        # (machine-flat plateaus put the grid argmax arbitrarily far away)
        return OracleReport(
            "mismatch",
            f"grid argmax {result.argmax_theta:.6g} sits {theta_gap:.3e} away "
            f"with a strictly better value {result.max_value:.10g}",
            solution.theta, solution.prospect,
            result.argmax_theta, result.max_value, result.final_step,
        )
    return OracleReport("match", "grid search confirms the reported optimum",
                        solution.theta, solution.prospect,
                        result.argmax_theta, result.max_value, result.final_step)
