"""Differential and Jacobian-operator tests against finite-difference oracles."""

import numpy as np
import pytest

from mpjl import chart, matcore as mc
from mpjl import differential as df
from mpjl.errors import NotFullRank, RankDrift


def _unit(a):
    return a / np.linalg.norm(a)


def test_differential_of_identity_perturbation():
    # Invertible case: projector terms vanish, dY = -inv(X) dX inv(X).
    e11 = np.zeros((2, 2))
    e11[0, 0] = 1.0
    np.testing.assert_allclose(df.pinv_differential(np.eye(2), e11), -e11, atol=1e-14)


def test_differential_full_column_rank_vs_fd():
    rng = mc.make_rng(40)
    x = mc.random_rank_q(3, 2, 2, rng)
    dx = _unit(rng.standard_normal((3, 2)))
    analytic = df.pinv_differential(x, dx)
    fd = df.fd_pinv_differential(x, dx)
    assert np.linalg.norm(analytic - fd) <= 1e-6 * np.linalg.norm(analytic)


def test_differential_rank_deficient_along_curve():
    # FD along the in-chart curve t -> assemble(X11 + t dX11, ...).
    x = np.array([[1.0, 2.0], [3.0, 6.0]])
    b = chart.decompose(x, 1)
    dx = chart.tangent_perturbation(b, [[1.0]], [[0.0]], [[0.0]])
    analytic = df.pinv_differential(x, dx)

    h = 1e-5

    def curve(t):
        moved = chart.make_blocks(
            b.x11 + t * np.ones((1, 1)), b.x12, b.x21,
            n=2, m=2, row_perm=b.row_perm, col_perm=b.col_perm,
        )
        return mc.pinv(chart.assemble(moved))

    fd = (curve(h) - curve(-h)) / (2 * h)
    assert np.linalg.norm(analytic - fd) <= 1e-6 * max(np.linalg.norm(analytic), 1.0)


def test_differential_linearity():
    rng = mc.make_rng(41)
    x = mc.random_rank_q(4, 3, 2, rng)
    d1 = rng.standard_normal((4, 3))
    d2 = rng.standard_normal((4, 3))
    combo = df.pinv_differential(x, 2.5 * d1 - 0.75 * d2)
    split = 2.5 * df.pinv_differential(x, d1) - 0.75 * df.pinv_differential(x, d2)
    np.testing.assert_allclose(combo, split, rtol=0, atol=1e-12 * np.linalg.norm(split))


def test_operator_scalar():
    op = df.jacobian_operator(np.array([[1.0]]))
    np.testing.assert_allclose(op.matrix, [[-1.0]])


def test_operator_consistent_with_differential():
    rng = mc.make_rng(42)
    x = mc.random_rank_q(3, 2, 2, rng)
    op = df.jacobian_operator(x)
    for _ in range(10):
        dx = rng.standard_normal((3, 2))
        lhs = op.matrix @ mc.vec(dx)
        rhs = mc.vec(df.pinv_differential(x, dx))
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)


def test_operator_consistency_across_shapes_and_ranks():
    rng = mc.make_rng(43)
    for _ in range(15):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 7))
        q = int(rng.integers(1, min(n, m) + 1))
        x = mc.random_rank_q(n, m, q, rng)
        op = df.jacobian_operator(x)
        dx = rng.standard_normal((n, m))
        lhs = op.matrix @ mc.vec(dx)
        rhs = mc.vec(df.pinv_differential(x, dx))
        scale = max(np.linalg.norm(rhs), np.linalg.norm(op.matrix) * np.linalg.norm(dx))
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * scale


def test_operator_rank_law_hand_case():
    op = df.jacobian_operator(np.array([[1.0, 2.0], [3.0, 6.0]]))
    assert op.rank_info.rank == 3  # nq + mq - q^2 = 2 + 2 - 1


def test_operator_rank_law_sweep():
    rng = mc.make_rng(44)
    for _ in range(15):
        q = int(rng.integers(1, 4))
        n = int(rng.integers(q + 1, 7))
        m = int(rng.integers(q + 1, 7))
        x = mc.random_rank_q(n, m, q, rng)
        op = df.jacobian_operator(x)
        assert op.rank_info.rank == n * q + m * q - q * q


def test_operator_annihilates_normal_directions():
    rng = mc.make_rng(45)
    for _ in range(10):
        q = int(rng.integers(1, 4))
        n = int(rng.integers(q + 1, 7))
        m = int(rng.integers(q + 1, 7))
        x = mc.random_rank_q(n, m, q, rng)
        y = mc.pinv(x)
        op = df.jacobian_operator(x)
        v = rng.standard_normal((n, m))
        projected = (np.eye(n) - x @ y) @ v @ (np.eye(m) - y @ x)
        image = op.matrix @ mc.vec(projected)
        scale = np.linalg.norm(op.matrix) * np.linalg.norm(projected)
        assert np.linalg.norm(image) <= 1e-12 * scale


def test_det_operator_scalar():
    assert abs(df.jacobian_det_operator(np.array([[2.0]])) - 0.25) <= 1e-15


def test_det_operator_matches_closed_form_tall():
    x = mc.random_rank_q(4, 2, 2, mc.make_rng(46))
    det_op = df.jacobian_det_operator(x)
    closed = abs(np.linalg.det(x.T @ x)) ** -4.0
    assert abs(det_op - closed) <= 1e-8 * closed


def test_det_operator_vanishes_when_deficient():
    x = np.array([[1.0, 2.0], [3.0, 6.0]])
    op = df.jacobian_operator(x)
    scale = op.rank_info.singular_values[0] ** 4
    assert df.jacobian_det_operator(x) <= 1e-12 * scale


def test_det_full_rank_examples():
    assert df.jacobian_det_full_rank(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])) == 1.0
    x = np.array([[2.0, 0.0], [0.0, 3.0], [0.0, 0.0]])
    assert abs(df.jacobian_det_full_rank(x) - 36.0 ** -3) <= 1e-20


def test_det_full_rank_square_branches_agree():
    x = mc.random_rank_q(4, 4, 4, mc.make_rng(47))
    value = df.jacobian_det_full_rank(x)
    alt = abs(np.linalg.det(x)) ** -8.0
    assert abs(value - alt) <= 1e-10 * alt


def test_det_full_rank_rejects_deficient():
    with pytest.raises(NotFullRank):
        df.jacobian_det_full_rank(np.array([[1.0, 2.0], [3.0, 6.0]]))


def test_det_agreement_both_orientations():
    rng = mc.make_rng(48)
    for _ in range(20):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        x = mc.random_rank_q(n, m, min(n, m), rng)
        det_op = df.jacobian_det_operator(x)
        closed = df.jacobian_det_full_rank(x)
        assert abs(det_op - closed) <= 1e-8 * closed


def test_fd_differential_identity_case():
    e11 = np.zeros((2, 2))
    e11[0, 0] = 1.0
    fd = df.fd_pinv_differential(np.eye(2), e11)
    assert np.max(np.abs(fd + e11)) <= 1e-9


def test_fd_matches_analytic_full_rank_sweep():
    rng = mc.make_rng(49)
    for _ in range(30):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, 9))
        x = mc.random_rank_q(n, m, min(n, m), rng)
        dx = _unit(rng.standard_normal((n, m)))
        analytic = df.pinv_differential(x, dx)
        fd = df.fd_pinv_differential(x, dx)
        assert np.linalg.norm(analytic - fd) <= 1e-6 * np.linalg.norm(analytic)


def test_fd_raises_rank_drift_off_manifold():
    x = mc.random_rank_q(4, 3, 2, mc.make_rng(50))
    dx = _unit(mc.make_rng(51).standard_normal((4, 3)))
    with pytest.raises(RankDrift):
        df.fd_pinv_differential(x, dx)


def test_fd_convergence_order():
    # Central scheme: halving h should reduce the error about 4x.
    rng = mc.make_rng(52)
    x = mc.random_rank_q(4, 3, 3, rng)
    dx = _unit(rng.standard_normal((4, 3)))
    analytic = df.pinv_differential(x, dx)
    errors = []
    for h in (1e-3, 5e-4, 2.5e-4):
        fd = df.fd_pinv_differential(x, dx, df.FdConfig(step=h, scale=False))
        errors.append(np.linalg.norm(fd - analytic))
    assert 2.5 <= errors[0] / errors[1] <= 6.0
    assert 2.5 <= errors[1] / errors[2] <= 6.0


def test_projector_differential_stays_symmetric():
    # d(X Y) from the analytic differential must be symmetric: XY is an
    # orthogonal projector along the whole rank-preserving motion.
    rng = mc.make_rng(53)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(2, 7))
        q = int(rng.integers(1, min(n, m) + 1))
        x = mc.random_rank_q(n, m, q, rng)
        dx = rng.standard_normal((n, m))
        y = mc.pinv(x)
        dxy = dx @ y + x @ df.pinv_differential(x, dx)
        assert np.max(np.abs(dxy - dxy.T)) <= 1e-10 * max(np.max(np.abs(dxy)), 1.0)


def test_fd_chart_jacobian_identity_map():
    x = mc.random_rank_q(4, 3, 2, mc.make_rng(54))
    b = chart.decompose(x, 2)
    positions = chart.chart_positions(4, 3, 2, b)
    jac = df.fd_chart_jacobian(df.ScaleMap(1.0), x, positions, positions)
    np.testing.assert_allclose(jac, np.eye(len(positions)), atol=1e-9)


def test_fd_chart_jacobian_scaling_map():
    x = np.array([[1.0, 2.0], [3.0, 6.0]])
    in_chart = chart.chart_positions(2, 2, 1, chart.decompose(x, 1))
    out_chart = chart.chart_positions(2, 2, 1, chart.decompose(2 * x, 1))
    jac = df.fd_chart_jacobian(df.ScaleMap(2.0), x, in_chart, out_chart)
    assert abs(abs(np.linalg.det(jac)) - 8.0) <= 1e-6


def test_fd_chart_jacobian_rejects_pivot_degeneration():
    # A step that cancels the pivot block's determinant must be refused,
    # not silently differentiated across the singularity.
    from mpjl.errors import ChartInvalid

    x11 = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-5 + 1e-9]])
    b = chart.make_blocks(x11, np.zeros((2, 1)), np.zeros((1, 2)))
    x = chart.assemble(b)
    positions = chart.chart_positions(3, 3, 2, b)
    cfg = df.FdConfig(step=1e-5, scale=False)
    with pytest.raises(ChartInvalid):
        df.fd_chart_jacobian(df.ScaleMap(1.0), x, positions, positions, cfg)


def test_fd_chart_jacobian_pinv_full_rank():
    x = mc.random_rank_q(3, 2, 2, mc.make_rng(55))
    in_chart = chart.chart_positions(3, 2, 2, chart.decompose(x, 2))
    assert len(in_chart) == 6
    y = mc.pinv(x)
    out_chart = chart.chart_positions(2, 3, 2, chart.decompose(y, 2))
    jac = df.fd_chart_jacobian(df.PinvMap(rank=2), x, in_chart, out_chart)
    closed = df.jacobian_det_full_rank(x)
    assert abs(abs(np.linalg.det(jac)) - closed) <= 1e-4 * closed
