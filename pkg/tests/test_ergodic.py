import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inverse_wishart.ensembles import RngStream, inverse_wishart_matrices, mu_spectra
from inverse_wishart.ergodic import (
    CornerTrajectory,
    F_from_alphas,
    OmegaPoint,
    alpha1_stability,
    alpha_minus_report,
    corner_trajectory,
    count_above,
    decomposition_check,
    evaluate_F_omega,
    extract_omega,
    gamma_diagnostics,
    sample_trajectories,
    tail_sum,
    tail_sum_below,
)
from inverse_wishart.kernels import tail_integral_K

alphas = st.lists(st.floats(0, 5), max_size=6).map(lambda v: sorted(v, reverse=True))


@st.composite
def omegas(draw):
    ap, am = np.array(draw(alphas)), np.array(draw(alphas))
    g2 = draw(st.floats(0, 3))
    return OmegaPoint(ap, am, draw(st.floats(-5, 5)), float(np.sum(ap**2) + np.sum(am**2)) + g2)


# ---------------------------------------------------------------------------
# extraction


def test_extract_mixed_spectrum():
    w = extract_omega(np.array([3.0, 1.0, -2.0]))
    np.testing.assert_allclose(w.alpha_plus, [1.0, 1 / 3])
    np.testing.assert_allclose(w.alpha_minus, [2 / 3])
    assert w.gamma1 == pytest.approx(2 / 3)
    assert w.delta == pytest.approx(14 / 9)
    assert w.gamma2 == pytest.approx(0.0, abs=1e-15)


def test_extract_positive_spectrum():
    w = extract_omega(np.array([4.0, 2.0, 0.0, 0.0]))
    assert w.alpha_minus.size == 0
    np.testing.assert_allclose(w.alpha_plus, [1.0, 0.5])
    assert w.gamma1 == pytest.approx(1.5)


def test_extract_empty():
    with pytest.raises(ValueError):
        extract_omega(np.array([]))


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=20))
@settings(max_examples=100, deadline=None)
def test_extracted_gamma2_is_zero(values):
    w = extract_omega(np.sort(values)[::-1])
    assert abs(w.gamma2) <= 1e-12 * max(w.delta, 1e-300)
    assert w.gamma1 == pytest.approx(np.sum(values) / len(values), abs=1e-9)


def test_omega_validation():
    with pytest.raises(ValueError):
        OmegaPoint(np.array([1.0, 2.0]), np.array([]), 0.0, 10.0)
    with pytest.raises(ValueError):
        OmegaPoint(np.array([-1.0]), np.array([]), 0.0, 10.0)
    with pytest.raises(ValueError):
        OmegaPoint(np.array([2.0]), np.array([]), 0.0, 3.0)
    with pytest.raises(ValueError):
        OmegaPoint(np.array([]), np.array([]), 0.0, -1.0)
    w = OmegaPoint(np.array([1.0]), np.array([0.5]), 0.0, 2.0)
    assert w.gamma2 == pytest.approx(0.75)
    with pytest.raises(ValueError):
        w.alpha_plus[0] = 3.0


# ---------------------------------------------------------------------------
# trajectories


def test_trajectory_full_dim_matches_extract():
    x = inverse_wishart_matrices(RngStream(1), 0.0, 6, 1)[0]
    t = corner_trajectory(x, [6])
    ref = extract_omega(np.linalg.eigvalsh(x)[::-1])
    np.testing.assert_allclose(t.omega_points[0].alpha_plus, ref.alpha_plus, rtol=1e-12)


def test_trajectory_of_diagonal_matrix():
    x = 3.0 * np.diag([4.0, 3.0, 2.0, 1.0]).astype(complex)
    t = corner_trajectory(x, [2, 4])
    assert [p.alpha_plus[0] for p in t.omega_points] == pytest.approx([6.0, 3.0])
    np.testing.assert_allclose(t.omega_points[0].alpha_plus, [6.0, 4.5])


def test_trajectory_validation():
    x = np.eye(4, dtype=complex)
    for dims in ([], [0, 2], [2, 5], [3, 2], [2, 2]):
        with pytest.raises(ValueError):
            corner_trajectory(x, dims)
    w = extract_omega(np.array([1.0]))
    with pytest.raises(ValueError):
        CornerTrajectory((1, 2), (w,))


def test_inverse_wishart_has_no_negative_part():
    trajs = sample_trajectories(0.0, 12, [3, 6, 12], 1000, RngStream(2))
    report = alpha_minus_report(trajs)
    assert report.passed and report.statistic == 1.0


def test_alpha_minus_report_fails_on_indefinite_corner():
    t = corner_trajectory(np.diag([1.0, -1.0]).astype(complex), [2])
    assert not alpha_minus_report([t]).passed


def test_trajectories_independent_of_workers():
    a = sample_trajectories(0.5, 8, [4, 8], 60, RngStream(3), workers=1)
    b = sample_trajectories(0.5, 8, [4, 8], 60, RngStream(3), workers=3)
    for ta, tb in zip(a, b):
        for pa, pb in zip(ta.omega_points, tb.omega_points):
            np.testing.assert_array_equal(pa.alpha_plus, pb.alpha_plus)


def test_count_above_and_stability_helpers():
    trajs = sample_trajectories(0.0, 40, [10, 20, 40], 50, RngStream(4))
    counts = count_above(trajs, 0.05)
    assert counts.shape == (50, 3) and np.all(counts >= 0)
    assert 0.0 <= alpha1_stability(trajs) <= 1.0


# ---------------------------------------------------------------------------
# characteristic function


def test_F_trivial_omega():
    w = OmegaPoint(np.array([]), np.array([]), 0.0, 0.0)
    np.testing.assert_array_equal(evaluate_F_omega(w, np.linspace(-5, 5, 11)), 1.0)


def test_F_single_alpha():
    a = 0.7
    w = OmegaPoint(np.array([a]), np.array([]), a, a * a)
    x = np.linspace(-10, 10, 21)
    np.testing.assert_allclose(evaluate_F_omega(w, x), 1 / (1 - 1j * a * x), rtol=1e-14)
    np.testing.assert_allclose(F_from_alphas(np.array([[a]]), 2.0), 1 / (1 - 2j * a), rtol=1e-14)


def test_F_gaussian_and_drift_parts():
    w = OmegaPoint(np.array([]), np.array([]), 1.5, 2.0)
    assert evaluate_F_omega(w, 0.4) == pytest.approx(np.exp(1.5j * 0.4 - 0.5 * 2.0 * 0.16))


@given(omegas(), st.floats(-100, 100))
@settings(max_examples=200, deadline=None)
def test_F_properties(w, x):
    f = evaluate_F_omega(w, x)
    assert abs(f) <= 1 + 1e-12
    assert evaluate_F_omega(w, 0.0) == 1
    assert evaluate_F_omega(w, -x) == pytest.approx(np.conj(f), abs=1e-12)


def test_F_truncation():
    w = OmegaPoint(np.array([1.0, 0.5]), np.array([0.2]), 1.0, 2.0)
    assert evaluate_F_omega(w, 1.3, truncation=5) == evaluate_F_omega(w, 1.3)
    with pytest.raises(ValueError):
        evaluate_F_omega(w, 1.3, truncation=1)


def test_F_matches_batch_form_for_extracted_points():
    x = mu_spectra(RngStream(5), 0.0, 8, 4)
    for row in x:
        w = extract_omega(row)
        assert evaluate_F_omega(w, 0.37) == pytest.approx(F_from_alphas(row / 8, 0.37), rel=1e-12)


# ---------------------------------------------------------------------------
# diagnostics


def test_tail_sums():
    w = extract_omega(np.array([8.0, 4.0, 2.0, 1.0]))
    assert tail_sum(w, 4) == 0.0
    assert tail_sum(w, 2) == pytest.approx(0.75)
    assert tail_sum_below(w, 0.6) == pytest.approx(0.75)


def test_first_moment_identity_small():
    nu, N, delta = 0.0, 30, 0.05
    x = mu_spectra(RngStream(6), nu, N, 4000) / N
    sums = np.where(x < delta, x, 0.0).sum(axis=1)
    se = sums.std(ddof=1) / np.sqrt(sums.size)
    assert abs(sums.mean() - tail_integral_K(nu, N, delta)) < 3 * se


def test_gamma_diagnostics_small_run():
    trajs = sample_trajectories(0.0, 80, [10, 20, 40, 80], 100, RngStream(7))
    g2, g1, c = gamma_diagnostics(trajs, k_top=30)
    assert g2.passed and g2.statistic > 0.99
    assert g1.passed, g1.details
    assert len(g1.details["rows"]) == 4
    assert c.name.startswith("c-stability")


def test_gamma_diagnostics_validation():
    trajs = sample_trajectories(0.0, 8, [4, 8], 4, RngStream(8))
    with pytest.raises(ValueError):
        gamma_diagnostics([], k_top=3)
    with pytest.raises(ValueError):
        gamma_diagnostics(trajs, k_top=0)
    odd = sample_trajectories(0.0, 8, [2, 8], 2, RngStream(8))
    with pytest.raises(ValueError):
        gamma_diagnostics(trajs + odd)
    bare = [CornerTrajectory(t.dims, t.omega_points) for t in trajs]
    with pytest.raises(ValueError):
        gamma_diagnostics(bare)


# ---------------------------------------------------------------------------
# decomposition


def test_decomposition_at_zero_is_exact():
    rep = decomposition_check(0.0, 20, 50, [0.0], RngStream(9))
    row = rep.details["rows"][0]
    assert row["empirical"] == 1 and row["predicted"] == 1 and rep.passed


def test_decomposition_small_pass_and_anti_test():
    grid = np.linspace(-0.1, 0.1, 9)
    ok = decomposition_check(0.0, 100, 1000, grid, RngStream(5))
    assert ok.passed, ok.details["rows"]
    bad = decomposition_check(0.0, 100, 1000, grid, RngStream(5), alpha_scale=2.0)
    assert not bad.passed


def test_decomposition_validation():
    with pytest.raises(ValueError):
        decomposition_check(0.0, 10, 0, [0.1], RngStream(0))
