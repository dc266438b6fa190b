"""Brute-force bounds for small problems, independent of the solver.

:func:`grid_identified_set` enumerates every short-term law on a simplex
lattice of spacing ``1 / resolution`` that respects the lower bounds, and
evaluates the extreme link functions at each point: box corners where
the fiber is a box, and otherwise a linear program solved by
:func:`scipy.optimize.linprog` rather than the in-house simplex, so the
two sides of a comparison share no code beyond the data box.

Lattice coordinates are rounded *up* onto the lower bounds, so the
lattice sits inside the true polytope and the oracle interval is an
inner approximation.  The effect moves by at most ``LIPSCHITZ`` per unit
of mass, which bounds how far inside.

For assumptions that treat the two arms separately (worst-case,
``liv``, ``luc``) each arm is enumerated on its own and the endpoints
add up; the others enumerate the product of the two arms' lattices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ltebounds_core.assumptions import (
    FIBER_TOL,
    AssumptionKind,
    AssumptionSpec,
    luc_box,
    monotone_envelope,
    refine_box,
    residual_system,
)
from ltebounds_core.exceptions import ResolutionError
from ltebounds_core.logging import get_logger
from ltebounds_core.moments import (
    EPS_FEAS,
    Interval,
    ProblemMoments,
    ShortTermLaw,
    gamma_lower_bounds,
)
from ltebounds_core.solver import BoundsResult, SolverConfig, scoped_moments, solve_bounds

_logger = get_logger(__name__)

#: Per-coordinate Lipschitz bound of the effect on the normalized scale.
LIPSCHITZ: float = 2.0

#: Largest support the oracle will enumerate.
MAX_SUPPORT: int = 4

#: Smallest lattice resolution accepted.
MIN_RESOLUTION: int = 10

#: Largest joint lattice enumerated before giving up.
MAX_JOINT_POINTS: int = 5_000_000

# Pairs of per-arm points kept when building the attained segments of a
# separable problem.
_MAX_SEGMENT_PAIRS = 1_000_000

_SEPARABLE = frozenset({AssumptionKind.WORST_CASE, AssumptionKind.LIV, AssumptionKind.LUC})

# Joint points evaluated per vectorized block.
_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Brute-force bounds.

    Attributes:
        interval: Bounds on the original outcome scale.
        attained: One ``[min, max]`` row of effects per evaluated lattice
            point, normalized scale.  The fiber is convex, so every value
            in a row is attained at that point.
        lattice_points: Feasible lattice points, joint count.
        lower_point: Lattice law attaining the lower bound.
        upper_point: Lattice law attaining the upper bound.
        resolution: Lattice resolution.
        scale: ``(y_low, y_high)``.
    """

    interval: Interval
    attained: np.ndarray
    lattice_points: int
    lower_point: ShortTermLaw
    upper_point: ShortTermLaw
    resolution: int
    scale: tuple[float, float] = (0.0, 1.0)

    @property
    def normalized(self) -> Interval:
        return self.interval.scaled(1.0 / (self.scale[1] - self.scale[0]))

    @property
    def max_gap(self) -> float:
        """Widest stretch of the interval no attained segment covers, normalized scale."""
        order = np.argsort(self.attained[:, 0], kind="stable")
        starts = self.attained[order, 0]
        reach = np.maximum.accumulate(self.attained[order, 1])
        if starts.size < 2:
            return 0.0
        return float(np.max(np.maximum(starts[1:] - reach[:-1], 0.0)))


@dataclass(frozen=True)
class CertificationReport:
    """Solver bounds checked against the oracle.

    Attributes:
        result: Solver output.
        oracle: Oracle output.
        lower_gap: Solver minus oracle lower bound, normalized scale.
        upper_gap: Solver minus oracle upper bound, normalized scale.
        threshold: Largest gap that still passes, normalized scale.
        passed: Whether both gaps are within the threshold.
    """

    result: BoundsResult
    oracle: OracleResult
    lower_gap: float
    upper_gap: float
    threshold: float
    passed: bool


def _compositions(total: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([[total]])
    slots = total + parts - 1
    bars = np.array(list(itertools.combinations(range(slots), parts - 1)), dtype=int)
    edges = np.hstack(
        [np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), slots)]
    )
    return np.diff(edges, axis=1) - 1


def simplex_lattice(lower: np.ndarray, resolution: int) -> np.ndarray:
    """Probability vectors on the ``1 / resolution`` lattice at or above *lower*.

    Returns:
        Array of shape ``(points, k)``; empty when the rounded lower
        bounds already exceed one.
    """
    floor = np.ceil(np.asarray(lower) * resolution - 1e-9).astype(int)
    free = resolution - int(floor.sum())
    if free < 0:
        return np.zeros((0, floor.size))
    return (floor + _compositions(free, floor.size)) / resolution


def _data_boxes(pm: ProblemMoments, points: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Data boxes of arm *d*, vectorized over lattice rows."""
    pi = np.divide(pm.obs.mass[d], points, out=np.zeros_like(points), where=points > 0.0)
    pi = np.clip(pi, 0.0, 1.0)
    lo = pm.obs.mean[d] * pi
    hi = lo + 1.0 - pi
    if pm.slack:
        lo, hi = lo - pm.slack, hi + pm.slack
    return np.clip(lo, 0.0, 1.0), np.clip(hi, 0.0, 1.0)


def _arm_boxes(
    a: AssumptionSpec, pm: ProblemMoments, points: np.ndarray, d: int
) -> tuple[np.ndarray, np.ndarray]:
    if a.kind is AssumptionKind.LUC:
        lo, hi = luc_box(pm)
        return np.broadcast_to(lo[d], points.shape), np.broadcast_to(hi[d], points.shape)
    lo, hi = _data_boxes(pm, points, d)
    if a.kind is AssumptionKind.LIV:
        lo, hi = monotone_envelope(lo, hi, a.direction)
    return lo, hi


_Enumeration = tuple[np.ndarray, int, tuple[float, float], tuple[ShortTermLaw, ShortTermLaw]]


def _separable(a: AssumptionSpec, pm: ProblemMoments, lattices: list[np.ndarray]) -> _Enumeration:
    arms = []
    for d, points in enumerate(lattices):
        lo, hi = _arm_boxes(a, pm, points, d)
        ok = np.all(hi - lo >= -FIBER_TOL, axis=1)
        low_end, high_end = (points * lo).sum(axis=1), (points * hi).sum(axis=1)
        if d == 0:
            low_end, high_end = -high_end, -low_end
        arms.append((points[ok], low_end[ok], high_end[ok]))

    (p0, min0, max0), (p1, min1, max1) = arms
    if min0.size == 0 or min1.size == 0:
        raise ResolutionError("no lattice point has a nonempty fiber; raise the resolution")
    i0_lo, i1_lo = int(np.argmin(min0)), int(np.argmin(min1))
    i0_hi, i1_hi = int(np.argmax(max0)), int(np.argmax(max1))

    per_arm = int(np.sqrt(_MAX_SEGMENT_PAIRS))
    picks = []
    for low_end, extremes in ((min0, [i0_lo, i0_hi]), (min1, [i1_lo, i1_hi])):
        order = np.argsort(low_end, kind="stable")
        if order.size > per_arm:
            order = order[np.linspace(0, order.size - 1, per_arm).astype(int)]
        picks.append(np.union1d(order, extremes))
    pick0, pick1 = picks
    segments = np.column_stack(
        [
            (min0[pick0][:, None] + min1[pick1][None, :]).ravel(),
            (max0[pick0][:, None] + max1[pick1][None, :]).ravel(),
        ]
    )
    return (
        segments,
        min0.size * min1.size,
        (float(min0[i0_lo] + min1[i1_lo]), float(max0[i0_hi] + max1[i1_hi])),
        (
            ShortTermLaw(np.vstack([p0[i0_lo], p1[i1_lo]])),
            ShortTermLaw(np.vstack([p0[i0_hi], p1[i1_hi]])),
        ),
    )


def _ti_block(
    g1: np.ndarray,
    g0: np.ndarray,
    boxes1: tuple[np.ndarray, np.ndarray],
    boxes0: tuple[np.ndarray, np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    """Effect range under treatment invariance at each pair ``(g0[j], g1[i])``.

    ``nan`` where the shared box is empty.
    """
    lo = np.maximum(boxes1[0][:, None, :], boxes0[0][None, :, :])
    hi = np.minimum(boxes1[1][:, None, :], boxes0[1][None, :, :])
    coef = g1[:, None, :] - g0[None, :, :]
    positive = coef >= 0.0
    t_min = (coef * np.where(positive, lo, hi)).sum(axis=2)
    t_max = (coef * np.where(positive, hi, lo)).sum(axis=2)
    ok = np.all(hi - lo >= -FIBER_TOL, axis=2)
    return np.where(ok, t_min, np.nan), np.where(ok, t_max, np.nan)


def _linprog_range(
    a: AssumptionSpec, pm: ProblemMoments, gamma: np.ndarray
) -> tuple[float, float]:
    lo, hi = refine_box(a, pm, gamma)
    if np.any(hi - lo < -FIBER_TOL):
        return np.nan, np.nan
    bounds = list(zip(lo.ravel(), np.maximum(hi, lo).ravel(), strict=True))
    system = residual_system(a, pm.k)
    rows = {}
    if system is not None and system.a_ineq.shape[0]:
        rows["A_ub"], rows["b_ub"] = -system.a_ineq, -system.b_ineq
    if system is not None and system.a_eq.shape[0]:
        rows["A_eq"], rows["b_eq"] = system.a_eq, system.b_eq
    c = np.concatenate([-gamma[0], gamma[1]])
    low = linprog(c, bounds=bounds, method="highs", **rows)
    if low.status != 0:
        return np.nan, np.nan
    high = linprog(-c, bounds=bounds, method="highs", **rows)
    return float(low.fun), float(-high.fun)


def _joint(a: AssumptionSpec, pm: ProblemMoments, lattices: list[np.ndarray]) -> _Enumeration:
    g0, g1 = lattices
    total = g0.shape[0] * g1.shape[0]
    if total > MAX_JOINT_POINTS:
        raise ResolutionError(
            f"joint lattice has {total} points (limit {MAX_JOINT_POINTS}); lower the resolution"
        )
    t_min = np.full((g1.shape[0], g0.shape[0]), np.nan)
    t_max = np.full_like(t_min, np.nan)
    if a.kind is AssumptionKind.TI:
        boxes0 = _data_boxes(pm, g0, 0)
        boxes1 = _data_boxes(pm, g1, 1)
        rows = max(1, _BLOCK // g0.shape[0])
        for start in range(0, g1.shape[0], rows):
            block = slice(start, start + rows)
            t_min[block], t_max[block] = _ti_block(
                g1[block], g0, (boxes1[0][block], boxes1[1][block]), boxes0
            )
    else:
        for i, j in itertools.product(range(g1.shape[0]), range(g0.shape[0])):
            t_min[i, j], t_max[i, j] = _linprog_range(a, pm, np.vstack([g0[j], g1[i]]))

    ok = ~np.isnan(t_min)
    if not ok.any():
        raise ResolutionError("no lattice point has a nonempty fiber; raise the resolution")
    i_lo, j_lo = np.unravel_index(np.nanargmin(t_min), t_min.shape)
    i_hi, j_hi = np.unravel_index(np.nanargmax(t_max), t_max.shape)
    return (
        np.column_stack([t_min[ok], t_max[ok]]),
        int(ok.sum()),
        (float(t_min[i_lo, j_lo]), float(t_max[i_hi, j_hi])),
        (
            ShortTermLaw(np.vstack([g0[j_lo], g1[i_lo]])),
            ShortTermLaw(np.vstack([g0[j_hi], g1[i_hi]])),
        ),
    )


def grid_identified_set(
    pm: ProblemMoments, a: AssumptionSpec, resolution: int
) -> OracleResult:
    """Bounds by exhaustive enumeration of lattice short-term laws.

    Args:
        pm: Problem moments, already restricted to the wanted scope.
        a: Maintained assumption.
        resolution: Lattice points per unit mass.

    Rounding the lower bounds up costs each arm up to ``k / resolution``
    of its free mass.  The ``2 * LIPSCHITZ / resolution`` band of
    :func:`certify` holds only when every arm has at least that much
    free mass, or none at all.

    Raises:
        ResolutionError: If ``k`` exceeds :data:`MAX_SUPPORT`, the
            resolution is below :data:`MIN_RESOLUTION`, an arm's free
            mass is positive but smaller than the rounding loss, the
            joint lattice is too large, or no lattice point has a
            nonempty fiber.
    """
    if pm.k > MAX_SUPPORT:
        raise ResolutionError(f"oracle enumerates k <= {MAX_SUPPORT}, got k = {pm.k}")
    if resolution < MIN_RESOLUTION:
        raise ResolutionError(f"resolution must be at least {MIN_RESOLUTION}, got {resolution}")
    lower = gamma_lower_bounds(pm)
    free = 1.0 - lower.sum(axis=1)
    rounding = pm.k / resolution
    thin = (free > EPS_FEAS) & (free < rounding)
    if thin.any():
        raise ResolutionError(
            f"free mass {float(free[thin].min()):.3g} is below the rounding loss "
            f"{rounding:.3g} at resolution {resolution}; raise the resolution"
        )
    lattices = [simplex_lattice(lower[d], resolution) for d in (0, 1)]
    if any(points.shape[0] == 0 for points in lattices):
        raise ResolutionError(
            f"rounded lower bounds exceed one at resolution {resolution}; raise the resolution"
        )
    _logger.debug(
        "oracle lattice for %s: %d x %d points", a.label, lattices[0].shape[0], lattices[1].shape[0]
    )
    enumerate_ = _separable if a.kind in _SEPARABLE else _joint
    segments, count, bounds, points = enumerate_(a, pm, lattices)
    scale = pm.support.scale
    return OracleResult(
        interval=Interval(float(bounds[0]), float(bounds[1])).scaled(scale),
        attained=segments,
        lattice_points=count,
        lower_point=points[0],
        upper_point=points[1],
        resolution=resolution,
        scale=(pm.support.y_low, pm.support.y_high),
    )


def certify(
    result: BoundsResult, oracle: OracleResult, *, tol_obj: float = 1e-10
) -> CertificationReport:
    """Compare solver bounds with oracle bounds.

    A gap beyond ``2 * LIPSCHITZ / resolution + tol_obj`` on either end
    fails.  An infeasible solver result fails against any oracle result.
    """
    threshold = 2.0 * LIPSCHITZ / oracle.resolution + tol_obj
    if not result.feasible:
        return CertificationReport(result, oracle, np.nan, np.nan, threshold, False)
    solved, brute = result.normalized, oracle.normalized
    lower_gap = solved.lo - brute.lo
    upper_gap = solved.hi - brute.hi
    passed = abs(lower_gap) <= threshold and abs(upper_gap) <= threshold
    _logger.info(
        "certification of %s: gaps %.3g / %.3g against %.3g, %s",
        result.assumption.label,
        lower_gap,
        upper_gap,
        threshold,
        "PASS" if passed else "FAIL",
    )
    return CertificationReport(result, oracle, lower_gap, upper_gap, threshold, passed)


def oracle_compare(
    pm: ProblemMoments,
    a: AssumptionSpec,
    cfg: SolverConfig | None = None,
    resolution: int = 400,
) -> CertificationReport:
    """Run the solver and the oracle on the same problem and compare."""
    cfg = cfg or SolverConfig()
    result = solve_bounds(pm, a, cfg)
    oracle = grid_identified_set(scoped_moments(pm, cfg.scope), a, resolution)
    return certify(result, oracle, tol_obj=cfg.tol_obj)
