"""Core types for quadratic stochastic operators (QSOs) on the simplex.

A QSO maps the probability simplex to itself through a cubic array of
heredity coefficients ``p[i, j, k]``: the probability that parents of
types ``i`` and ``j`` produce a child of type ``k``.  This module holds
the validated containers (:class:`SimplexPoint`, :class:`CubicMatrix`),
stochasticity checking, and detection of the classical operator classes
(Volterra, strictly non-Volterra, and two-sex partition operators,
called F-QSOs throughout the package).

States are 0-based everywhere.  For F-QSOs, state 0 is the absorbing
"empty body" element; the female set F and male set M partition the
remaining states {1, ..., n-1}.
"""

import itertools
from dataclasses import InitVar, dataclass
from typing import NamedTuple

import numpy as np

#: Tolerance for sums that must equal 1 (simplex coordinates, coefficient rows).
TOL_SUM = 1e-12

#: Tolerance for fixed-point residuals ``max_k |V(x)_k - x_k|``.
TOL_FIX = 1e-10

#: Largest |E| = n - 1 for which F-subset enumeration is attempted (2^|E| subsets).
F_ENUM_LIMIT = 16


class QsoError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(QsoError):
    """Structural problem: array extents inconsistent or dimension too small."""


class InvalidPointError(QsoError):
    """A coordinate vector cannot be interpreted as a simplex point."""


class StochasticityError(QsoError):
    """An operation requiring a stochastic matrix received an invalid one."""


class ClassificationError(QsoError):
    """An operation requiring a specific operator class received another."""


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A probability vector: nonnegative coordinates summing to 1.

    Construction validates the invariants exactly: every coordinate must
    be >= 0 and the sum must lie within ``TOL_SUM`` of 1.  Use
    :func:`renormalize` for raw data that needs clamping or rescaling.
    """

    coords: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=float)
        if arr.ndim != 1:
            raise DimensionError(f"simplex point must be 1-d, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise DimensionError("simplex point needs at least 2 coordinates")
        if not np.all(np.isfinite(arr)):
            raise InvalidPointError("coordinates must be finite")
        if np.any(arr < 0.0):
            raise InvalidPointError(f"negative coordinate in {arr!r}")
        total = float(arr.sum())
        if abs(total - 1.0) > TOL_SUM:
            raise InvalidPointError(f"coordinates sum to {total!r}, not 1")
        object.__setattr__(self, "coords", _as_readonly(arr))

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    @staticmethod
    def uniform(n: int) -> "SimplexPoint":
        """The barycenter (1/n, ..., 1/n)."""
        return SimplexPoint(np.full(n, 1.0 / n))

    @staticmethod
    def vertex(n: int, k: int = 0) -> "SimplexPoint":
        """The vertex with all mass on state ``k``."""
        coords = np.zeros(n)
        coords[k] = 1.0
        return SimplexPoint(coords)

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"SimplexPoint({np.array2string(self.coords, separator=', ')})"


def renormalize(values) -> SimplexPoint:
    """Clamp tolerable negatives to 0, rescale, and return a SimplexPoint.

    Coordinates below ``-TOL_SUM`` or a nonpositive total raise
    :class:`InvalidPointError`; anything else is projected exactly onto
    the simplex by clamping and dividing by the sum.
    """
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1 or arr.shape[0] < 2:
        raise DimensionError(f"expected a 1-d vector of length >= 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidPointError("coordinates must be finite")
    if np.any(arr < -TOL_SUM):
        raise InvalidPointError(f"coordinate below -{TOL_SUM:g} in {arr!r}")
    np.clip(arr, 0.0, None, out=arr)
    total = float(arr.sum())
    if total <= 0.0:
        raise InvalidPointError("coordinates sum to a nonpositive value")
    return SimplexPoint(arr / total)


@dataclass(frozen=True, eq=False)
class CubicMatrix:
    """Heredity coefficients ``p[i, j, k]`` of a quadratic operator.

    Construction checks structure only (a cube of finite floats, with an
    optional declared state count that must match the extents).  The
    stochasticity invariants - symmetry in (i, j), nonnegativity, unit
    row sums over k - are checked by :func:`validate_stochastic`, so that
    defective data can be loaded and reported on.
    """

    p: np.ndarray
    declared_n: InitVar[int | None] = None

    def __post_init__(self, declared_n):
        arr = np.asarray(self.p, dtype=float)
        if arr.ndim != 3 or len(set(arr.shape)) != 1:
            raise DimensionError(f"expected a cubic array, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise DimensionError("need at least 2 states")
        if declared_n is not None and declared_n != arr.shape[0]:
            raise DimensionError(
                f"declared n={declared_n} does not match array extent {arr.shape[0]}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidPointError("coefficients must be finite")
        object.__setattr__(self, "p", _as_readonly(arr))

    @property
    def n(self) -> int:
        return self.p.shape[0]


class StochasticityViolation(NamedTuple):
    kind: str  # "asymmetry" | "negative" | "row_sum"
    i: int
    j: int
    k: int | None  # None for row-sum violations, which concern the pair (i, j)
    residual: float


@dataclass(frozen=True, eq=False)
class StochasticityReport:
    ok: bool
    violations: tuple[StochasticityViolation, ...]

    @property
    def max_row_residual(self) -> float:
        rows = [v.residual for v in self.violations if v.kind == "row_sum"]
        return max(rows, default=0.0)


def validate_stochastic(P: CubicMatrix) -> StochasticityReport:
    """Check symmetry, nonnegativity, and unit row sums of a cubic matrix.

    Returns a report with ``ok`` true iff all three invariants hold
    (symmetry exact, sums within ``TOL_SUM``); every violation is listed
    with its residual magnitude.  Symmetry and negativity witnesses are
    reported once per unordered pair.
    """
    p = P.p
    violations: list[StochasticityViolation] = []

    asym = p != np.transpose(p, (1, 0, 2))
    for i, j, k in zip(*np.nonzero(asym)):
        if i < j:
            residual = abs(float(p[i, j, k] - p[j, i, k]))
            violations.append(StochasticityViolation("asymmetry", int(i), int(j), int(k), residual))

    for i, j, k in zip(*np.nonzero(p < 0.0)):
        if i <= j:
            violations.append(
                StochasticityViolation("negative", int(i), int(j), int(k), abs(float(p[i, j, k])))
            )

    row_sums = p.sum(axis=2)
    bad = np.abs(row_sums - 1.0) > TOL_SUM
    for i, j in zip(*np.nonzero(bad)):
        if i <= j:
            violations.append(
                StochasticityViolation("row_sum", int(i), int(j), None, abs(float(row_sums[i, j] - 1.0)))
            )

    return StochasticityReport(ok=not violations, violations=tuple(violations))


def require_valid(P: CubicMatrix) -> None:
    """Raise :class:`StochasticityError` unless ``P`` passes validation."""
    report = validate_stochastic(P)
    if not report.ok:
        first = report.violations[0]
        raise StochasticityError(
            f"matrix fails stochasticity: {len(report.violations)} violation(s), "
            f"first is {first.kind} at ({first.i},{first.j},{first.k})"
        )


def proper_subsets(m: int) -> list[frozenset[int]]:
    """All nonempty proper subsets of {1, ..., m}, ordered by size then lexicographically."""
    elements = range(1, m + 1)
    out: list[frozenset[int]] = []
    for size in range(1, m):
        for combo in itertools.combinations(elements, size):
            out.append(frozenset(combo))
    return out


class ClassWitness(NamedTuple):
    i: int
    j: int
    k: int
    reason: str


@dataclass(frozen=True, eq=False)
class ClassReport:
    """Operator-class membership of a cubic matrix.

    ``f_qso_sets`` lists every female set F in {1, ..., n-1} (nonempty,
    proper) whose two-sex pattern the matrix matches; note F and its
    complement describe the same partition, so they appear in pairs.  It
    is ``None`` when n - 1 exceeds ``F_ENUM_LIMIT`` and enumeration of
    the 2^(n-1) - 2 candidates was refused.
    """

    is_volterra: bool
    is_strictly_non_volterra: bool
    f_qso_sets: tuple[frozenset[int], ...] | None
    violations: tuple[ClassWitness, ...]


def _empty_body_pattern(p: np.ndarray) -> np.ndarray:
    """Boolean pair matrix: the (i, j) row is exactly the point mass on state 0."""
    return (p[:, :, 0] == 1.0) & np.all(p[:, :, 1:] == 0.0, axis=2)


def matches_partition(P: CubicMatrix, females: frozenset[int]) -> bool:
    """True iff ``P`` matches the two-sex pattern for female set ``females``.

    Same-class pairs (both parents in F+{0}, or both in M+{0}) must map
    exactly to the point mass on state 0; mixed pairs are unconstrained
    beyond nonnegativity, which validation already guarantees.
    Comparisons with 0 and 1 are exact: pattern membership is
    structural, not numeric.
    """
    n = P.n
    if not females or not females < set(range(1, n)):
        raise ValueError(f"female set {set(females)} must be a nonempty proper subset of {{1,...,{n - 1}}}")
    in_f = np.zeros(n, dtype=bool)
    in_f[list(females)] = True
    f_side = in_f.copy()
    f_side[0] = True
    m_side = ~in_f  # includes state 0
    same_class = (f_side[:, None] & f_side[None, :]) | (m_side[:, None] & m_side[None, :])
    return bool(np.all(_empty_body_pattern(P.p)[same_class]))


def classify(P: CubicMatrix) -> ClassReport:
    """Detect Volterra, strictly non-Volterra, and F-QSO membership.

    Requires a validated matrix (raises :class:`StochasticityError`
    otherwise).  Volterra means every child type lies in its parent
    pair; strictly non-Volterra means it never does; both checks use
    exact comparison with 0.  Witnesses for whichever of the two
    conditions fail are collected in ``violations``.
    """
    require_valid(P)
    p = P.p
    n = P.n

    idx = np.arange(n)
    child_in_pair = (idx[None, None, :] == idx[:, None, None]) | (
        idx[None, None, :] == idx[None, :, None]
    )
    nonzero = p != 0.0

    witnesses: list[ClassWitness] = []
    volterra_bad = nonzero & ~child_in_pair
    if volterra_bad.any():
        i, j, k = (int(v[0]) for v in np.nonzero(volterra_bad))
        witnesses.append(ClassWitness(i, j, k, "child type outside the parent pair has positive probability"))
    snv_bad = nonzero & child_in_pair
    if snv_bad.any():
        i, j, k = (int(v[0]) for v in np.nonzero(snv_bad))
        witnesses.append(ClassWitness(i, j, k, "child repeats a parent type with positive probability"))

    if n - 1 > F_ENUM_LIMIT:
        f_sets: tuple[frozenset[int], ...] | None = None
    else:
        f_sets = tuple(
            females for females in proper_subsets(n - 1) if matches_partition(P, females)
        )

    return ClassReport(
        is_volterra=not volterra_bad.any(),
        is_strictly_non_volterra=not snv_bad.any(),
        f_qso_sets=f_sets,
        violations=tuple(witnesses),
    )
