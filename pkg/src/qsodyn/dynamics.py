"""Trajectory iteration, fixed points, convergence certificates, Cesaro averages.

For the two-sex family with a single male (``build_single_male``), the
functional ``lyapunov(x) = x1 * (1 - x0 - x1)`` contracts at least
quadratically per step, which certifies doubly exponential convergence
of every trajectory to the absorbing vertex (1, 0, ..., 0).  This
module records and checks that certificate stepwise, finds fixed points
both algebraically (three states) and by seeded multistart search, and
computes Cesaro (ergodic) averages.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import least_squares

from .core import (
    TOL_FIX,
    TOL_SUM,
    ClassificationError,
    CubicMatrix,
    DimensionError,
    InvalidPointError,
    SimplexPoint,
    classify,
    matches_partition,
    renormalize,
    require_valid,
)
from .operators import apply, apply_unnormalized, build_fqso_m2

#: Once the Lyapunov value falls below this, a single-male trajectory is
#: snapped to the exact vertex: the next true iterate is provably within
#: twice this distance of it, and denormal arithmetic adds only noise.
PHI_UNDERFLOW = 1e-300

STOP_MAX_STEPS = "max_steps"
STOP_CONVERGED = "converged"
STOP_INVALID = "invalid_state"


def _lyapunov_raw(v: np.ndarray) -> float:
    # x1 times the total female-side mass; the tail-sum form keeps the
    # value exactly nonnegative and equals x1*(1 - x0 - x1) within TOL_SUM.
    return float(v[1] * v[2:].sum())


def lyapunov(x: SimplexPoint) -> float:
    """Convergence functional ``x1 * sum_{i >= 2} x_i`` (equals x1*x2 for dim 3).

    Defined for dim >= 3, with coordinate 1 playing the single-male role.
    Always >= 0, and at most 1/4 on the simplex.
    """
    if x.dim < 3:
        raise DimensionError("the convergence functional needs dim >= 3")
    return _lyapunov_raw(x.coords)


def lyapunov_closed_form(b: float, c: float, phi0: float, n: int) -> float:
    """Value after ``n`` steps of the scalar recurrence ``phi -> 4bc phi^2``.

    Equals ``(4bc)^{-1} (4bc phi0)^{2^n}`` for bc != 0, evaluated by a
    squaring chain so huge ``n`` underflows cleanly to 0.  ``n = 0``
    returns ``phi0`` itself (zero applications), also when bc = 0.
    """
    if b < 0.0 or c < 0.0:
        raise ValueError("b and c must be nonnegative")
    if not -1e-15 <= phi0 <= 0.25 + 1e-15:
        raise ValueError(f"phi0={phi0!r} outside [0, 1/4], impossible on the simplex")
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return float(phi0)
    t = (4.0 * b * c) * phi0
    if t == 0.0:
        return 0.0
    for _ in range(n):
        t = t * t
        if t == 0.0:
            return 0.0
    return t / (4.0 * b * c)


@dataclass(frozen=True)
class LyapunovBound:
    """The step-``n`` certificate bound (1/4)^(2^n).

    ``value`` is the bound as a double (0.0 once it falls below the
    smallest positive representable number, flagged by ``is_exact``);
    ``log2`` carries the exact base-2 logarithm -2^(n+1) regardless.
    """

    value: float
    log2: float
    is_exact: bool


def lyapunov_bound(n: int) -> LyapunovBound:
    """Upper bound (1/4)^(2^n) for the functional after ``n`` certified steps."""
    if n < 0:
        raise ValueError("n must be >= 0")
    log2 = -(2.0 ** (n + 1))
    if n <= 60:
        exponent = 2 ** (n + 1)
        value = math.ldexp(1.0, -exponent)
        return LyapunovBound(value=value, log2=log2, is_exact=exponent <= 1074)
    return LyapunovBound(value=0.0, log2=log2, is_exact=False)


def is_single_male_shape(P: CubicMatrix) -> bool:
    """True iff ``P`` matches the two-sex pattern with males M = {1}."""
    if P.n < 3:
        return False
    return matches_partition(P, frozenset(range(2, P.n)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """An orbit x(0), x(1) = V(x(0)), ... with per-step diagnostics.

    ``lyapunov_values[n]`` is the convergence functional at step n (NaN
    when dim < 3); ``dist_to_limit`` holds max-norm distances to the
    reference point when one was given.  Each point is the image of its
    predecessor, with one documented exception: when a single-male
    trajectory's functional drops below ``PHI_UNDERFLOW`` the final
    point is snapped to the exact vertex (the true iterate differs from
    it by at most twice that threshold).
    """

    points: tuple[SimplexPoint, ...]
    lyapunov_values: np.ndarray
    dist_to_limit: np.ndarray | None
    stop_reason: str
    tol: float | None

    @property
    def coords(self) -> np.ndarray:
        """All points stacked into an array of shape (len(points), n)."""
        return np.stack([pt.coords for pt in self.points])

    def __len__(self) -> int:
        return len(self.points)


def trajectory(
    P: CubicMatrix,
    x0: SimplexPoint,
    max_steps: int,
    tol: float | None = None,
    reference: SimplexPoint | None = None,
) -> Trajectory:
    """Iterate the operator from ``x0``, recording diagnostics per step.

    Stops after ``max_steps`` applications, or earlier with
    ``stop_reason="converged"`` when a reference point and tolerance are
    given and the max-norm distance to the reference falls within
    ``tol`` (checked from step 0 onward), or when the single-male
    underflow snap fires.
    """
    require_valid(P)
    if x0.dim != P.n:
        raise DimensionError(f"start of dim {x0.dim} does not match operator with n={P.n}")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if reference is not None and reference.dim != P.n:
        raise DimensionError("reference dimension does not match the operator")

    snap_enabled = is_single_male_shape(P)
    vertex = SimplexPoint.vertex(P.n) if snap_enabled else None
    ref = reference.coords if reference is not None else None
    has_phi = P.n >= 3

    points = [x0]
    phis = [_lyapunov_raw(x0.coords) if has_phi else math.nan]
    dists = [float(np.max(np.abs(x0.coords - ref)))] if ref is not None else None
    stop = STOP_MAX_STEPS

    def converged_here(pt: SimplexPoint) -> bool:
        if ref is None or tol is None:
            return False
        return float(np.max(np.abs(pt.coords - ref))) <= tol

    def snap_allowed() -> bool:
        # The snap claims convergence to the vertex; honor a user-supplied
        # reference only when the vertex itself satisfies it.
        if not snap_enabled:
            return False
        if ref is None or tol is None:
            return True
        return float(np.max(np.abs(vertex.coords - ref))) <= tol

    def record(pt: SimplexPoint) -> None:
        points.append(pt)
        phis.append(_lyapunov_raw(pt.coords) if has_phi else math.nan)
        if dists is not None:
            dists.append(float(np.max(np.abs(pt.coords - ref))))

    x = x0
    if converged_here(x0):
        stop = STOP_CONVERGED
    else:
        for _ in range(max_steps):
            if snap_allowed() and phis[-1] < PHI_UNDERFLOW:
                if np.array_equal(x.coords, vertex.coords):
                    stop = STOP_CONVERGED
                    break
                record(vertex)
                stop = STOP_CONVERGED
                break
            try:
                x = apply(P, x)
            except Exception:
                stop = STOP_INVALID
                break
            record(x)
            if converged_here(x):
                stop = STOP_CONVERGED
                break

    return Trajectory(
        points=tuple(points),
        lyapunov_values=np.asarray(phis),
        dist_to_limit=np.asarray(dists) if dists is not None else None,
        stop_reason=stop,
        tol=tol,
    )


def iterate_batch(P: CubicMatrix, starts: np.ndarray, steps: int, return_history: bool = False):
    """Vectorized iteration of many points at once.

    ``starts`` has shape (B, n); returns the array after ``steps``
    applications, or the full history of shape (steps+1, B, n) when
    ``return_history`` is set.  Each step renormalizes by the row sum.
    """
    X = np.array(starts, dtype=float, copy=True)
    if X.ndim != 2 or X.shape[1] != P.n:
        raise DimensionError(f"starts of shape {X.shape} do not match operator with n={P.n}")
    history = [X.copy()] if return_history else None
    for _ in range(steps):
        X = np.einsum("ijk,bi,bj->bk", P.p, X, X)
        X /= X.sum(axis=1, keepdims=True)
        if return_history:
            history.append(X.copy())
    if return_history:
        return np.stack(history)
    return X


class FixedPointCandidate(NamedTuple):
    point: np.ndarray
    residual: float
    in_simplex: bool


@dataclass(frozen=True, eq=False)
class FixedPointReport:
    """Candidate fixed points with residuals and simplex-membership flags.

    ``unique_in_simplex`` is set iff exactly one candidate lies in the
    simplex.  Every candidate flagged in-simplex has max-norm residual
    at most ``TOL_FIX``.
    """

    candidates: tuple[FixedPointCandidate, ...]
    unique_in_simplex: SimplexPoint | None


def _residual(P: CubicMatrix, x: np.ndarray) -> float:
    return float(np.max(np.abs(apply_unnormalized(P, x) - x)))


def _in_simplex(x: np.ndarray) -> bool:
    return bool(np.all(x >= -TOL_SUM) and abs(float(x.sum()) - 1.0) <= TOL_SUM)


def fixed_points_m2(a: float, b: float, c: float) -> FixedPointReport:
    """Algebraic fixed points of the three-state single-pair operator.

    The vertex (1, 0, 0) is always fixed.  For bc != 0 the remaining
    algebraic solution is

        x* = ((2bc - b - c) / (2bc),  1/(2c),  1/(2b)),

    which never lies in the simplex: 1/(2b) <= 1 and 1/(2c) <= 1 would
    force b = c = 1/2, making x1* = x2* = 1 contradict the unit sum.  It
    is reported with ``in_simplex=False`` as a diagnostic.
    """
    P = build_fqso_m2(a, b, c)
    vertex = np.array([1.0, 0.0, 0.0])
    candidates = [FixedPointCandidate(vertex, _residual(P, vertex), True)]
    if b * c != 0.0:
        x_star = np.array([(2.0 * b * c - b - c) / (2.0 * b * c), 1.0 / (2.0 * c), 1.0 / (2.0 * b)])
        candidates.append(FixedPointCandidate(x_star, _residual(P, x_star), _in_simplex(x_star)))
    in_simplex = [cand for cand in candidates if cand.in_simplex]
    unique = SimplexPoint(in_simplex[0].point) if len(in_simplex) == 1 else None
    return FixedPointReport(candidates=tuple(candidates), unique_in_simplex=unique)


def _polish(P: CubicMatrix, guess: np.ndarray) -> np.ndarray | None:
    """Damped residual minimization of ||V(x) - x|| over the simplex."""

    def fun(x):
        return np.concatenate([apply_unnormalized(P, x) - x, [x.sum() - 1.0]])

    x0 = np.clip(guess, 0.0, 1.0)
    try:
        sol = least_squares(fun, x0, bounds=(0.0, 1.0), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    except Exception:
        return None
    x = np.clip(sol.x, 0.0, None)
    total = x.sum()
    if total <= 0.0:
        return None
    return x / total


def find_fixed_points(P: CubicMatrix, starts: int = 100, seed: int = 0) -> FixedPointReport:
    """Seeded multistart fixed-point search: iterate, then polish.

    Pure map iteration from each random start finds attracting points;
    when it does not settle, a damped residual minimization (run from
    both the start and the iteration endpoint) catches repelling or
    neutral ones.  Candidates with max-norm residual at most ``TOL_FIX``
    are clustered within 1e-8 and reported with the best residual per
    cluster.  An empty candidate list is a legal outcome.
    """
    require_valid(P)
    if starts < 1:
        raise ValueError("starts must be >= 1")
    rng = np.random.default_rng(seed)
    n = P.n

    found: list[tuple[np.ndarray, float]] = []

    def consider(x: np.ndarray | None) -> bool:
        if x is None:
            return False
        r = _residual(P, x)
        if r <= TOL_FIX:
            found.append((x, r))
            return True
        return False

    for _ in range(starts):
        draw = rng.standard_exponential(n)
        x0 = draw / draw.sum()
        x = x0
        for _ in range(200):
            x_next = apply_unnormalized(P, x)
            x_next /= x_next.sum()
            settled = np.array_equal(x_next, x)
            x = x_next
            if settled:
                break
        if consider(x):
            continue
        consider(_polish(P, x0))
        consider(_polish(P, x))

    # Greedy clustering: best residual first, 1e-8 max-norm radius.
    found.sort(key=lambda item: item[1])
    representatives: list[tuple[np.ndarray, float]] = []
    for x, r in found:
        if all(float(np.max(np.abs(x - y))) > 1e-8 for y, _ in representatives):
            representatives.append((x, r))
    representatives.sort(key=lambda item: tuple(item[0]))

    candidates = tuple(
        FixedPointCandidate(x, r, _in_simplex(x)) for x, r in representatives
    )
    in_simplex = [cand for cand in candidates if cand.in_simplex]
    unique = renormalize(in_simplex[0].point) if len(in_simplex) == 1 else None
    return FixedPointReport(candidates=candidates, unique_in_simplex=unique)


def cesaro_average(P: CubicMatrix, x0: SimplexPoint, n: int) -> SimplexPoint:
    """Mean of the first ``n`` trajectory points, (1/n) sum_{j<n} x(j).

    A convex combination of simplex points, so the result is a valid
    point; ``n = 1`` returns ``x0`` itself.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    require_valid(P)
    if x0.dim != P.n:
        raise DimensionError(f"start of dim {x0.dim} does not match operator with n={P.n}")
    acc = np.zeros(P.n)
    x = x0.coords
    for _ in range(n):
        acc += x
        y = apply_unnormalized(P, x)
        x = y / y.sum()
    mean = acc / n
    try:
        return SimplexPoint(mean)
    except InvalidPointError:  # accumulated rounding; project back
        return renormalize(mean)


def cesaro_running(P: CubicMatrix, x0: SimplexPoint, schedule: list[int]) -> list[tuple[int, np.ndarray]]:
    """Running Cesaro averages at the given increasing point counts."""
    if not schedule or schedule[0] < 1 or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing and start at >= 1")
    require_valid(P)
    out: list[tuple[int, np.ndarray]] = []
    acc = np.zeros(P.n)
    x = x0.coords
    targets = iter(schedule)
    target = next(targets)
    for count in range(1, schedule[-1] + 1):
        acc += x
        if count == target:
            out.append((count, acc / count))
            target = next(targets, None)
            if target is None:
                break
        y = apply_unnormalized(P, x)
        x = y / y.sum()
    return out


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Stepwise certificate record for a two-sex trajectory.

    ``mode`` is "certified" for the single-male shape, where the bound
    (1/4)^(2^n), the squared contraction, and the coordinate bound
    x_k(n+1) <= 2*phi(n) are proved, and "empirical" for any other
    F-QSO, where the same quantities are logged without a guarantee.
    ``male_identity_residuals`` (three states only) holds
    |x1(n) - 2b*phi(n-1)|, which is an exact identity of the family.
    ``first_below`` is the first step at which every coordinate except
    x0 falls below ``tol``.
    """

    mode: str
    trajectory: Trajectory
    bounds: np.ndarray
    bound_ok: np.ndarray
    squared_contraction_ok: np.ndarray
    coordinate_bound_ok: np.ndarray
    male_identity_residuals: np.ndarray | None
    first_below: int | None
    tol: float


def convergence_report(
    P: CubicMatrix, x0: SimplexPoint, n_max: int, tol: float = 1e-9
) -> ConvergenceReport:
    """Run a trajectory and check the decay certificate at every step.

    Requires a two-sex (F-QSO) operator; raises
    :class:`ClassificationError` otherwise.  Checks, for each recorded
    step n:

    * ``phi(x(n)) <= (1/4)^(2^n) + 1e-15`` (tail bound),
    * ``phi(x(n+1)) <= phi(x(n))^2 + 1e-15`` (squared contraction),
    * ``x_k(n+1) <= 2 phi(x(n)) + 1e-12`` for every k >= 1,
    * for three states, ``x1(n) = 2b phi(x(n-1))`` with b the mixed
      pair's male-child probability (reported as residuals).
    """
    if is_single_male_shape(P):
        mode = "certified"
    else:
        report = classify(P)
        if report.f_qso_sets:
            mode = "empirical"
        else:
            raise ClassificationError("convergence certificate requires a two-sex (F-QSO) operator")

    traj = trajectory(P, x0, max_steps=n_max)
    coords = traj.coords
    phis = traj.lyapunov_values
    steps = len(traj.points)

    bounds = np.array([lyapunov_bound(n).value for n in range(steps)])
    bound_ok = phis <= bounds + 1e-15
    squared_contraction_ok = phis[1:] <= phis[:-1] ** 2 + 1e-15
    coordinate_bound_ok = np.array(
        [bool(np.all(coords[n + 1, 1:] <= 2.0 * phis[n] + 1e-12)) for n in range(steps - 1)]
    )

    male_identity_residuals = None
    if P.n == 3:
        b = float(P.p[1, 2, 1])
        male_identity_residuals = np.abs(coords[1:, 1] - 2.0 * b * phis[:-1])

    below = np.nonzero(np.all(coords[:, 1:] < tol, axis=1))[0]
    first_below = int(below[0]) if below.size else None

    return ConvergenceReport(
        mode=mode,
        trajectory=traj,
        bounds=bounds,
        bound_ok=bound_ok,
        squared_contraction_ok=squared_contraction_ok,
        coordinate_bound_ok=coordinate_bound_ok,
        male_identity_residuals=male_identity_residuals,
        first_below=first_below,
        tol=tol,
    )
