import numpy as np
import pytest
from numpy.testing import assert_allclose

from infobell import (
    REFERENCE_THETAS,
    ViolationCurve,
    WernerFit,
    bell_state,
    fit_werner,
    model_curve,
    modified_werner,
    sweep,
)
from infobell.fitting import LAMBDA_STEP, PHASE_STEP, _coarse_grid

THETAS = np.array(REFERENCE_THETAS)


def curve_for(lam, phase, thetas=THETAS):
    return ViolationCurve(thetas, model_curve(lam, phase, thetas))


def test_model_curve_agrees_with_full_quantum_pipeline():
    for lam, phase in ((1.0, 0.0), (0.998, 0.225), (0.6, 1.9), (0.0, 0.4)):
        direct = sweep(modified_werner(lam, phase), THETAS).v
        assert_allclose(model_curve(lam, phase, THETAS), direct, atol=1e-12)


def test_model_curve_is_even_in_phase():
    """The curve depends on the phase only through its cosine."""
    for phase in (0.3, 1.0, 2.5):
        assert_allclose(
            model_curve(0.9, phase, THETAS),
            model_curve(0.9, 2 * np.pi - phase, THETAS),
            atol=1e-12,
        )


def test_fit_recovers_reference_parameters():
    fit = fit_werner(curve_for(0.998, 0.225))
    assert fit.lam == pytest.approx(0.998, abs=1e-3)
    assert fit.phase == pytest.approx(0.225, abs=1e-3)


def test_fit_bell_curve_gives_unit_lambda():
    fit = fit_werner(sweep(bell_state("phi+").density_matrix(), THETAS))
    assert fit.lam == pytest.approx(1.0, abs=2e-3)
    assert fit.residual_sum < 1e-8


def test_fit_phase_zero_truth():
    fit = fit_werner(curve_for(0.95, 0.0))
    assert min(fit.phase, 2 * np.pi - fit.phase) < 1e-3


def test_fit_idempotent():
    first = fit_werner(curve_for(0.998, 0.225))
    second = fit_werner(curve_for(first.lam, first.phase))
    assert second.lam == pytest.approx(first.lam, abs=1e-6)
    assert second.phase == pytest.approx(first.phase, abs=1e-6)


def test_fit_noise_robust_median():
    """Zero-mean noise of 0.02 moves the median recovered lambda < 0.01."""
    recovered = []
    for seed in range(50):
        rng = np.random.default_rng(seed)
        noisy = model_curve(0.9, 0.5, THETAS) + rng.normal(0.0, 0.02, size=THETAS.size)
        recovered.append(fit_werner(ViolationCurve(THETAS, noisy)).lam)
    assert abs(float(np.median(recovered)) - 0.9) < 0.01


def test_fit_beats_every_coarse_grid_candidate():
    rng = np.random.default_rng(3)
    v_obs = model_curve(0.85, 0.7, THETAS) + rng.normal(0.0, 0.03, size=THETAS.size)
    fit = fit_werner(ViolationCurve(THETAS, v_obs))
    _, _, curves = _coarse_grid(tuple(float(t) for t in THETAS))
    grid_best = float(((curves - v_obs) ** 2).sum(axis=-1).min())
    assert fit.residual_sum <= grid_best + 1e-12


def test_grid_steps_match_documented_resolution():
    lam_grid, phase_grid, _ = _coarse_grid(tuple(float(t) for t in THETAS))
    assert lam_grid[1] - lam_grid[0] == pytest.approx(LAMBDA_STEP)
    assert phase_grid[1] - phase_grid[0] == pytest.approx(PHASE_STEP)
    assert lam_grid[0] == 0.0 and lam_grid[-1] == pytest.approx(1.0)


def test_weighted_fit_requires_uncertainties():
    curve = curve_for(0.9, 0.3)
    with pytest.raises(ValueError):
        fit_werner(curve, weighted=True)
    bad = ViolationCurve(THETAS, curve.v, np.zeros_like(THETAS))
    with pytest.raises(ValueError):
        fit_werner(bad, weighted=True)


def test_weighted_fit_downweights_noisy_points():
    rng = np.random.default_rng(11)
    v = model_curve(0.9, 0.0, THETAS).copy()
    v[-1] += 0.3  # one wildly off point
    dv = np.full(THETAS.size, 0.01)
    dv[-1] = 10.0
    weighted = fit_werner(ViolationCurve(THETAS, v, dv), weighted=True)
    unweighted = fit_werner(ViolationCurve(THETAS, v))
    assert abs(weighted.lam - 0.9) < abs(unweighted.lam - 0.9)
    assert weighted.lam == pytest.approx(0.9, abs=2e-3)


def test_fit_requires_two_points():
    with pytest.raises(ValueError):
        fit_werner(ViolationCurve(np.array([0.3]), np.array([0.2])))


def test_werner_fit_validation_and_json():
    residuals = np.array([0.01, -0.02])
    fit = WernerFit(
        lam=0.9,
        phase=0.3,
        residual_sum=float((residuals**2).sum()),
        per_point_residuals=residuals,
    )
    payload = fit.to_json_dict()
    assert set(payload) == {"lambda", "phase", "residual_sum", "residuals"}
    assert payload["lambda"] == 0.9
    with pytest.raises(ValueError):
        WernerFit(lam=1.2, phase=0.0, residual_sum=0.0, per_point_residuals=np.zeros(2))
    with pytest.raises(ValueError):
        WernerFit(lam=0.5, phase=7.0, residual_sum=0.0, per_point_residuals=np.zeros(2))
    with pytest.raises(ValueError):
        WernerFit(lam=0.5, phase=0.0, residual_sum=0.5, per_point_residuals=residuals)
