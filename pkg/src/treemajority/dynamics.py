"""Fixed points, stability, trajectories, and phase thresholds of the update map.

The update map is a degree-m polynomial sending [0,1] into itself, so its
fixed points are roots of h(x) = g(x) - x.  Roots are located by a dense scan
for sign changes followed by bisection; points where the curve merely touches
the diagonal (double roots) are recovered from near-zero local minima of |h|
polished by Newton steps on h'.  Limits of the recursion pi_{t+1} = g(pi_t)
are predicted from the fixed-point layout using the cobweb argument for
strictly increasing maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import MAX_CHILDREN, ModelParams
from .update_map import UpdateMap, g_double_prime, g_eval, g_prime, g_prime_at_half

__all__ = [
    "ATTRACTIVE",
    "REPULSIVE",
    "NEUTRAL",
    "SolverError",
    "UnsupportedRegimeError",
    "IdentityMapError",
    "FixedPoint",
    "FixedPointSet",
    "Trajectory",
    "ThresholdResult",
    "find_fixed_points",
    "classify_stability",
    "iterate_dynamics",
    "predict_limit",
    "solve_threshold",
    "m3_pb1_closed_form",
]

ATTRACTIVE = "attractive"
REPULSIVE = "repulsive"
NEUTRAL = "neutral"

_STABILITY_TOL = 1e-8
_MERGE_TOL = 1e-7
_TOUCH_TOL = 1e-7  # |h| threshold for a tangency candidate
_SCAN_POINTS = 10_001


class SolverError(RuntimeError):
    """Root polishing or bracketing failed; carries the best bracket found."""

    def __init__(self, message: str, bracket: Optional[tuple] = None):
        super().__init__(message)
        self.bracket = bracket


class UnsupportedRegimeError(RuntimeError):
    """The requested analysis is outside the regimes with proven structure."""


class IdentityMapError(UnsupportedRegimeError):
    """The update map is the identity, so every point of [0,1] is fixed."""


@dataclass(frozen=True)
class FixedPoint:
    value: float
    stability: str  # one of ATTRACTIVE / REPULSIVE / NEUTRAL
    tangent: bool  # curve touches the diagonal without crossing it
    residual: float  # |g(value) - value|


@dataclass(frozen=True)
class FixedPointSet:
    points: tuple  # FixedPoint entries, ascending by value
    params: ModelParams

    @property
    def values(self) -> np.ndarray:
        return np.array([fp.value for fp in self.points])


@dataclass(frozen=True)
class Trajectory:
    pi_0: float
    values: np.ndarray  # pi_0 .. pi_T
    converged: bool
    limit: Optional[float]


@dataclass(frozen=True)
class ThresholdResult:
    m: int
    p_threshold: float
    bracket_width: float
    evaluations: int
    at_boundary: bool = False  # m = 2: the slope reaches 1 only at p = 1


def _stability_label(slope: float) -> str:
    mag = abs(slope)
    if mag < 1.0 - _STABILITY_TOL:
        return ATTRACTIVE
    if mag > 1.0 + _STABILITY_TOL:
        return REPULSIVE
    return NEUTRAL


def _bisect(h, a: float, b: float, fa: float, fb: float, tol: float) -> float:
    for _ in range(200):
        if b - a <= tol:
            break
        mid = 0.5 * (a + b)
        fm = h(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (fa > 0.0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return 0.5 * (a + b)


def _newton_polish(h, hp, x: float, lo: float, hi: float) -> float:
    for _ in range(3):
        d = hp(x)
        if abs(d) < 1e-8:
            break
        step = h(x) / d
        x_new = x - step
        if not lo <= x_new <= hi:
            break
        x = x_new
    return x


def find_fixed_points(params: ModelParams, tol: float = 1e-13) -> FixedPointSet:
    """All solutions of g(x) = x in [0, 1], with stability and tangency flags.

    Endpoint fixed points are matched exactly (g(0) = 0 iff p_r = 1, g(1) = 1
    iff p_b = 1).  Interior simple roots come from sign changes of h on a
    10^4-cell grid, bisected to ``tol``; tangential double roots are detected
    as near-zero local minima of |h| away from the crossing roots, polished by
    damped Newton iteration on h'.  Roots closer than 1e-7 merge into a single
    point whose tangency is decided by a local crossing test.
    """
    if tol < 1e-13:
        raise ValueError(f"tol must be at least 1e-13, got {tol!r}")
    gm = UpdateMap.from_params(params)
    m = params.m
    if np.max(np.abs(gm.coeffs - np.arange(m + 1) / m)) < 1e-12:
        raise IdentityMapError(
            "update map coincides with the identity; every point of [0,1] is fixed"
        )

    def h(x: float) -> float:
        return g_eval(gm, x) - x

    def hp(x: float) -> float:
        return g_prime(gm, x) - 1.0

    def hpp(x: float) -> float:
        return g_double_prime(gm, x)

    xs = np.linspace(0.0, 1.0, _SCAN_POINTS)
    hs = g_eval(gm, xs) - xs
    cell = xs[1] - xs[0]

    # (value, tangent-or-None); None means "decide by the crossing test later"
    roots: list[tuple[float, Optional[bool]]] = []
    if gm.coeffs[0] == 0.0:
        roots.append((0.0, False))
    if gm.coeffs[-1] == 1.0:
        roots.append((1.0, False))

    for i in np.nonzero(hs[1:-1] == 0.0)[0] + 1:
        roots.append((float(xs[i]), False))

    for i in range(_SCAN_POINTS - 1):
        fa, fb = hs[i], hs[i + 1]
        if fa == 0.0 or fb == 0.0:
            continue
        if (fa > 0.0) != (fb > 0.0):
            root = _bisect(h, float(xs[i]), float(xs[i + 1]), float(fa), float(fb), tol)
            lo = max(0.0, float(xs[i]) - cell)
            hi = min(1.0, float(xs[i + 1]) + cell)
            roots.append((_newton_polish(h, hp, root, lo, hi), False))

    # Tangency pass.  Candidates within two cells of a crossing root are the
    # crossing root's own shoulder, not a tangency; skip them.
    guard = 2.0 * cell

    def near_known(x: float) -> bool:
        return any(abs(x - r) < guard for r, _ in roots)

    ah = np.abs(hs)
    for i in range(1, _SCAN_POINTS - 1):
        if ah[i] >= _TOUCH_TOL or ah[i] > ah[i - 1] or ah[i] > ah[i + 1]:
            continue
        x0 = float(xs[i])
        if near_known(x0):
            continue
        lo, hi = max(0.0, x0 - guard), min(1.0, x0 + guard)
        x = x0
        for _ in range(60):
            d2 = hpp(x)
            if d2 == 0.0:
                break
            step = hp(x) / d2
            step = min(max(step, -cell), cell)
            x_new = min(max(x - step, lo), hi)
            if abs(x_new - x) < 1e-15:
                x = x_new
                break
            x = x_new
        if abs(h(x)) <= _TOUCH_TOL and abs(hp(x)) <= 1e-4 and not near_known(x):
            roots.append((x, None))

    roots.sort(key=lambda rt: rt[0])
    merged: list[tuple[float, Optional[bool]]] = []
    for val, tang in roots:
        if merged and val - merged[-1][0] <= _MERGE_TOL:
            merged[-1] = (0.5 * (merged[-1][0] + val), None)
        else:
            merged.append((val, tang))

    points = []
    for val, tang in merged:
        if tang is None:
            left = h(val - cell) if val - cell >= 0.0 else None
            right = h(val + cell) if val + cell <= 1.0 else None
            if left is None or right is None or left == 0.0 or right == 0.0:
                tang = False  # one-sided at the boundary; not a tangency
            else:
                tang = (left > 0.0) == (right > 0.0)
        slope = g_prime(gm, val)
        points.append(
            FixedPoint(
                value=val,
                stability=_stability_label(slope),
                tangent=bool(tang),
                residual=abs(h(val)),
            )
        )
    return FixedPointSet(points=tuple(points), params=params)


def classify_stability(gm: UpdateMap, x_star: float) -> str:
    """Attractive / repulsive / neutral by |g'(x*)| against 1 (tolerance 1e-8)."""
    x_star = float(x_star)
    if abs(g_eval(gm, x_star) - x_star) > 1e-8:
        raise ValueError(f"x_star={x_star!r} is not a fixed point of the map")
    return _stability_label(g_prime(gm, x_star))


def iterate_dynamics(
    params: ModelParams,
    pi_0: float,
    max_steps: int = 10**6,
    conv_tol: float = 1e-13,
) -> Trajectory:
    """Iterate pi_{t+1} = g(pi_t) until successive iterates differ by < conv_tol.

    Convergence is declared on the successive-difference criterion (residuals
    creep too slowly near tangencies); on convergence the limit is the nearest
    located fixed point when it lies within 100 * conv_tol of the final
    iterate, else None.
    """
    pi_0 = float(pi_0)
    if not 0.0 <= pi_0 <= 1.0:
        raise ValueError("pi_0 must lie in [0, 1]")
    if max_steps < 1:
        raise ValueError("max_steps must be positive")
    if conv_tol <= 0.0:
        raise ValueError("conv_tol must be positive")
    gm = UpdateMap.from_params(params)
    values = [pi_0]
    x = pi_0
    converged = False
    for _ in range(max_steps):
        x_next = g_eval(gm, x)
        values.append(x_next)
        if abs(x_next - x) < conv_tol:
            x = x_next
            converged = True
            break
        x = x_next
    limit: Optional[float] = None
    if converged:
        try:
            fps = find_fixed_points(params)
            nearest = min(fps.points, key=lambda fp: abs(fp.value - x))
            if abs(nearest.value - x) <= 100.0 * conv_tol:
                limit = nearest.value
        except IdentityMapError:
            limit = x  # every point is fixed, the trajectory is constant
    return Trajectory(pi_0=pi_0, values=np.array(values), converged=converged, limit=limit)


def predict_limit(params: ModelParams, pi_0: float) -> float:
    """Limit of the recursion from pi_0, read off the fixed-point layout.

    A unique fixed point attracts every initial value (no monotonicity
    needed).  With two or three fixed points the map must be strictly
    increasing, and the trajectory is monotone toward the nearest fixed point
    in its direction of motion; regimes with more fixed points or a
    non-monotone map are refused rather than guessed.
    """
    pi_0 = float(pi_0)
    if not 0.0 <= pi_0 <= 1.0:
        raise ValueError("pi_0 must lie in [0, 1]")
    gm = UpdateMap.from_params(params)
    fps = find_fixed_points(params)
    vals = [fp.value for fp in fps.points]
    for v in vals:
        if abs(pi_0 - v) <= 1e-12:
            return v
    if len(vals) == 1:
        return vals[0]
    if len(vals) > 3:
        raise UnsupportedRegimeError(
            f"{len(vals)} fixed points found; limit prediction covers at most 3"
        )
    grid = np.linspace(0.0, 1.0, 2001)
    if np.min(g_prime(gm, grid)) < -1e-12 or np.any(np.diff(g_eval(gm, grid)) <= 0.0):
        raise UnsupportedRegimeError("update map is not strictly increasing on [0, 1]")
    if g_eval(gm, pi_0) > pi_0:
        above = [v for v in vals if v > pi_0]
        if not above:
            raise SolverError("increasing trajectory but no fixed point above pi_0")
        return min(above)
    below = [v for v in vals if v < pi_0]
    if not below:
        raise SolverError("decreasing trajectory but no fixed point below pi_0")
    return max(below)


def solve_threshold(m: int, tol: float = 1e-12) -> ThresholdResult:
    """The success rate at which the symmetric-regime slope at 1/2 crosses 1.

    Bisection on p -> g'(1/2) - 1 over [1e-6, 1 - 1e-6]; valid because the
    slope is strictly increasing in p.  For m = 2 the slope equals 2p - p^2,
    which reaches 1 only at p = 1, so the boundary value is reported with
    ``at_boundary=True`` instead of bisecting.
    """
    m = int(m)
    if m < 2 or m > MAX_CHILDREN:
        raise ValueError(f"m must lie in 2..{MAX_CHILDREN}, got {m}")
    if tol < 1e-12:
        raise ValueError(f"tol must be at least 1e-12, got {tol!r}")
    if m == 2:
        return ThresholdResult(
            m=2, p_threshold=1.0, bracket_width=0.0, evaluations=0, at_boundary=True
        )

    def excess(p: float) -> float:
        return g_prime_at_half(ModelParams.symmetric(m, p)) - 1.0

    lo, hi = 1e-6, 1.0 - 1e-6
    f_lo, f_hi = excess(lo), excess(hi)
    evaluations = 2
    if f_lo >= 0.0 or f_hi <= 0.0:
        raise SolverError(
            f"slope-excess does not bracket a crossing on [{lo}, {hi}]", bracket=(lo, hi)
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        evaluations += 1
        if excess(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(
        m=m,
        p_threshold=0.5 * (lo + hi),
        bracket_width=hi - lo,
        evaluations=evaluations,
        at_boundary=False,
    )


def m3_pb1_closed_form(p_r: float) -> FixedPointSet:
    """Fixed points for m = 3, p_b = 1 from the exact quadratic factorization.

    h(x) = (1 - x) * (A x^2 + B x + C) with, writing q = 1 - p_r,

        A = q^3/2 - 3q + 2,   B = -q^3 + 3q - 1,   C = q^3/2,

    and discriminant B^2 - 4AC = (2 p_r - 1)(p_r + 1 + sqrt3)(p_r - (sqrt3 - 1)).
    The root 1 is always present; the quadratic contributes no root for
    p_r < sqrt3 - 1, a double (tangent) root at sqrt3 - 1, and two simple
    roots above it.
    """
    p_r = float(p_r)
    if not 0.0 <= p_r <= 1.0:
        raise ValueError("p_r must lie in [0, 1]")
    params = ModelParams(3, 1.0, p_r)
    gm = UpdateMap.from_params(params)
    boundary = math.sqrt(3.0) - 1.0
    entries: list[tuple[float, bool]] = []
    if p_r < boundary:
        pass
    elif p_r == boundary:
        entries.append((2.0 / 3.0 - 1.0 / math.sqrt(3.0), True))
    else:
        q = 1.0 - p_r
        a = 0.5 * q**3 - 3.0 * q + 2.0
        b = -(q**3) + 3.0 * q - 1.0
        disc = (2.0 * p_r - 1.0) * (p_r + 1.0 + math.sqrt(3.0)) * (p_r - boundary)
        sq = math.sqrt(max(disc, 0.0))
        for root in ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)):
            entries.append((min(max(root, 0.0), 1.0), False))
    entries.append((1.0, False))
    points = tuple(
        FixedPoint(
            value=val,
            stability=_stability_label(g_prime(gm, val)),
            tangent=tang,
            residual=abs(g_eval(gm, val) - val),
        )
        for val, tang in sorted(entries)
    )
    return FixedPointSet(points=points, params=params)
