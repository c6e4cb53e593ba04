"""Differential of the Moore-Penrose inverse and its Jacobian operator.

For Y = pinv(X) the matrix of differentials is

    dY = -Y dX Y + Y Y' dX' (I_n - X Y) + (I_m - Y X) dX' Y' Y,

valid where the rank is locally constant.  Vectorizing with
vec(A B C) = (C' kron A) vec(B) and K vec(dX) = vec(dX') turns this into a
single nm x nm operator acting on vec(dX):

    -(Y' kron Y) + [ (I_n - X Y) kron (Y Y') + (Y' Y) kron (I_m - Y X) ] K.

Both projector terms use symmetric middle factors, so no extra transposes
appear.  The finite-difference oracles here are the independent checks for
the analytic forms; they pin the rank of every evaluation point to the rank
of the base point, because the pseudoinverse is discontinuous across rank
changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import CoordinateChart, assemble, perturbed_assemble
from .errors import NotFullRank, RankDrift, ShapeMismatch
from .matcore import (
    RankInfo,
    as_matrix,
    commutation_matrix,
    kron,
    pinv,
    pinv_fixed_rank,
    rank_profile,
    vec,
)


@dataclass(frozen=True)
class FdConfig:
    """Central finite-difference settings.

    ``step`` is the nominal step; with ``scale`` set it is multiplied by the
    max-abs entry of the base matrix.
    """

    step: float = 1e-5
    scheme: str = "central"
    scale: bool = True

    def __post_init__(self):
        if not 1e-9 <= self.step <= 1e-2:
            raise ValueError(f"step must lie in [1e-9, 1e-2], got {self.step}")
        if self.scheme != "central":
            raise ValueError("only the central scheme is implemented")

    def effective_step(self, x: np.ndarray) -> float:
        if not self.scale:
            return self.step
        return self.step * max(float(np.max(np.abs(x))), 1e-12)


@dataclass(frozen=True)
class JacobianOperator:
    """The nm x nm linear map sending vec(dX) to vec(dY)."""

    matrix: np.ndarray
    n: int
    m: int
    rank_info: RankInfo


def pinv_differential(x, dx, tol: float | None = None) -> np.ndarray:
    """Analytic differential of the pseudoinverse at X along dX."""
    x = as_matrix(x)
    dx = as_matrix(dx)
    if dx.shape != x.shape:
        raise ShapeMismatch(f"dX shape {dx.shape} != X shape {x.shape}")
    n, m = x.shape
    y = pinv(x, tol)
    left_proj = np.eye(n) - x @ y
    right_proj = np.eye(m) - y @ x
    return -y @ dx @ y + y @ y.T @ dx.T @ left_proj + right_proj @ dx.T @ y.T @ y


def jacobian_operator(x, tol: float | None = None) -> JacobianOperator:
    """Vectorized form of :func:`pinv_differential` as an explicit matrix."""
    x = as_matrix(x)
    n, m = x.shape
    y = pinv(x, tol)
    left_proj = np.eye(n) - x @ y
    right_proj = np.eye(m) - y @ x
    k = commutation_matrix(m, n)
    op = -kron(y.T, y) + (kron(left_proj, y @ y.T) + kron(y.T @ y, right_proj)) @ k
    return JacobianOperator(matrix=op, n=n, m=m, rank_info=rank_profile(op))


def jacobian_det_operator(x, tol: float | None = None) -> float:
    """Absolute determinant of the vectorized differential operator.

    Vanishes (up to rounding) whenever rank(X) < min(n, m): the operator
    annihilates every direction of the form (I - X Y) V (I - Y X).
    """
    return float(abs(np.linalg.det(jacobian_operator(x, tol).matrix)))


def jacobian_det_full_rank(x) -> float:
    """Closed-form |det| for full-rank X: |X'X|^-n when m <= n, else |XX'|^-m."""
    x = as_matrix(x)
    n, m = x.shape
    info = rank_profile(x)
    if info.rank != min(n, m):
        raise NotFullRank(f"rank {info.rank} < min(n, m) = {min(n, m)}")
    if m <= n:
        return float(abs(np.linalg.det(x.T @ x)) ** (-n))
    return float(abs(np.linalg.det(x @ x.T)) ** (-m))


def _pinned_pinv_at(point: np.ndarray, q: int, rel_drift_cut: float) -> np.ndarray:
    s = np.linalg.svd(point, compute_uv=False)
    if q < min(point.shape) and s.size > q and s[q] > rel_drift_cut * s[0]:
        raise RankDrift(
            f"evaluation point has sigma[{q}] = {s[q]:.3e} above the drift cut "
            f"{rel_drift_cut * s[0]:.3e}; direction is not rank-preserving"
        )
    return pinv_fixed_rank(point, q)


def fd_pinv_differential(x, dx, cfg: FdConfig = FdConfig(), tol: float | None = None) -> np.ndarray:
    """Central-difference oracle for the pseudoinverse differential.

    Both evaluations keep the base-point rank q.  For deficient-rank X the
    direction must be rank-preserving to first order; a first-order rank
    change shows up as sigma_{q+1} growing like h rather than h^2 and is
    reported as RankDrift.
    """
    x = as_matrix(x)
    dx = as_matrix(dx)
    if dx.shape != x.shape:
        raise ShapeMismatch(f"dX shape {dx.shape} != X shape {x.shape}")
    info = rank_profile(x, tol)
    q = info.rank
    h = cfg.effective_step(x)
    # Tangent directions leave sigma_{q+1} at O(h^2), first-order rank
    # changes push it to O(h); h^1.5 sits between the two.
    sigma1 = info.singular_values[0] if info.singular_values.size else 1.0
    rel_cut = (h / max(sigma1, 1e-300)) ** 1.5
    plus = _pinned_pinv_at(x + h * dx, q, rel_cut)
    minus = _pinned_pinv_at(x - h * dx, q, rel_cut)
    return (plus - minus) / (2.0 * h)


# ---------------------------------------------------------------------------
# Matrix-map descriptors for chart-to-chart Jacobians.  Closed enumeration,
# no user-supplied code.

@dataclass(frozen=True)
class PinvMap:
    """X -> pinv(X); with ``rank`` set the evaluation is rank-pinned."""

    rank: int | None = None
    tol: float | None = None

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.rank is not None:
            return pinv_fixed_rank(x, self.rank)
        return pinv(x, self.tol)


@dataclass(frozen=True)
class ScaleMap:
    """X -> c X."""

    factor: float

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.factor * x


class OrthogonalSandwichMap:
    """X -> H X Q with fixed orthogonal H (n x n) and Q (m x m)."""

    def __init__(self, left, right):
        self.left = as_matrix(left)
        self.right = as_matrix(right)
        for name, f in (("left", self.left), ("right", self.right)):
            if f.shape[0] != f.shape[1]:
                raise ShapeMismatch(f"{name} factor must be square, got {f.shape}")
            gap = np.max(np.abs(f.T @ f - np.eye(f.shape[0])))
            if gap > 1e-12:
                raise ValueError(f"{name} factor deviates from orthogonality by {gap:.2e}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.left @ x @ self.right


MatrixMap = PinvMap | ScaleMap | OrthogonalSandwichMap


def _read_positions(a: np.ndarray, chart: CoordinateChart) -> np.ndarray:
    return np.array([a[r, c] for r, c in chart.positions])


def fd_chart_jacobian(
    f: MatrixMap,
    x,
    in_chart: CoordinateChart,
    out_chart: CoordinateChart,
    cfg: FdConfig = FdConfig(),
) -> np.ndarray:
    """Partial derivatives of out-chart coordinates of f with respect to
    in-chart coordinates, by central differences.

    Perturbing a free coordinate moves the dependent trailing block along
    with it, so every evaluation point stays exactly on the rank-q set.
    For equal-size charts the absolute determinant of the returned matrix
    is the chart-to-chart Jacobian of f.
    """
    x = as_matrix(x)
    if in_chart.block is None:
        raise ShapeMismatch("in_chart must carry its block decomposition")
    base = assemble(in_chart.block)
    scale = max(float(np.max(np.abs(x))), 1e-12)
    if np.max(np.abs(base - x)) > 1e-8 * scale:
        raise ShapeMismatch("in_chart does not reassemble the given X")
    h = cfg.effective_step(x)
    jac = np.empty((len(out_chart), len(in_chart)))
    deltas = np.zeros(len(in_chart))
    for k in range(len(in_chart)):
        deltas[k] = h
        plus = f.apply(perturbed_assemble(in_chart, deltas))
        deltas[k] = -h
        minus = f.apply(perturbed_assemble(in_chart, deltas))
        deltas[k] = 0.0
        jac[:, k] = (_read_positions(plus, out_chart) - _read_positions(minus, out_chart)) / (2.0 * h)
    return jac
