import numpy as np
import pytest
from numpy.testing import assert_allclose

from infobell import (
    MODE_LABELS,
    OPTIMAL_BELL_SETTINGS,
    DensityMatrix,
    MeasurementSetting,
    TomoDataset,
    TomographyError,
    bell_state,
    chsh,
    concurrence,
    correlation,
    expected_counts,
    fidelity,
    joint_probabilities,
    linear_inversion,
    mle_reconstruct,
    modified_werner,
    tomo_modes,
)
from infobell.tomography import (
    _negative_log_likelihood,
    _project_physical,
    _rho_to_t,
    mode_probabilities,
)
from conftest import random_density

BELL = bell_state("phi+").density_matrix()
WERNER = modified_werner(0.998, 0.225)


def trace_distance(a, b) -> float:
    ma = getattr(a, "matrix", a)
    mb = getattr(b, "matrix", b)
    eigs = np.linalg.eigvalsh(ma - mb)
    return 0.5 * float(np.abs(eigs).sum())


def noisy_dataset(rho, per_basis, seed):
    rng = np.random.default_rng(seed)
    p = mode_probabilities(rho.matrix)
    return TomoDataset(rng.poisson(per_basis * p).astype(np.int64))


def test_mode_labels_canonical_order():
    assert len(MODE_LABELS) == 16
    assert MODE_LABELS[:4] == ("HH", "HV", "VV", "VH")
    assert len(set(MODE_LABELS)) == 16


def test_tomo_modes_are_normalized_product_states():
    for mode in tomo_modes():
        assert np.linalg.norm(mode.joint_state) == pytest.approx(1.0, abs=1e-12)
        p = mode.projector_a
        assert_allclose(p @ p, p, atol=1e-12)


def test_mode_probabilities_first_quartet_sums_to_one(rng):
    rho = random_density(rng)
    p = mode_probabilities(rho.matrix)
    assert p.shape == (16,)
    assert (p > -1e-12).all() and (p < 1 + 1e-12).all()
    assert p[:4].sum() == pytest.approx(1.0, abs=1e-10)


def test_expected_counts_returns_dataset():
    data = expected_counts(BELL, 1000)
    assert isinstance(data, TomoDataset)
    assert data.counts.dtype == np.int64
    assert data.counts[MODE_LABELS.index("HH")] == 500


def test_linear_inversion_exact_round_trip(rng):
    rho = random_density(rng)
    data = expected_counts(rho, 10**7)
    recovered = linear_inversion(data)
    assert trace_distance(recovered, rho) < 1e-5


def test_linear_inversion_rejects_empty_scale():
    with pytest.raises(TomographyError):
        linear_inversion(TomoDataset(np.zeros(16, dtype=np.int64)))


def test_dataset_csv_round_trip(tmp_path):
    data = expected_counts(WERNER, 5000)
    path = tmp_path / "counts.csv"
    path.write_text(data.to_csv())
    back = TomoDataset.from_csv(str(path))
    assert np.array_equal(back.counts, data.counts)


def test_dataset_from_csv_rejects_duplicates(tmp_path):
    path = tmp_path / "dup.csv"
    rows = ["label,counts"] + [f"{lab},10" for lab in MODE_LABELS] + ["HH,3"]
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(ValueError, match="HH"):
        TomoDataset.from_csv(str(path))


def test_dataset_from_csv_rejects_missing_and_unknown(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("label,counts\nHH,10\n")
    with pytest.raises(ValueError):
        TomoDataset.from_csv(str(path))
    path.write_text("label,counts\n" + "\n".join(f"{lab},1" for lab in MODE_LABELS) + "\nXX,5\n")
    with pytest.raises(ValueError, match="XX"):
        TomoDataset.from_csv(str(path))


def test_dataset_from_csv_rejects_bad_count_with_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("label,counts\nHH,ten\n")
    with pytest.raises(ValueError, match="line 2"):
        TomoDataset.from_csv(str(path))


def test_dataset_from_mapping():
    mapping = {lab: 7 for lab in MODE_LABELS}
    data = TomoDataset.from_mapping(mapping)
    assert (data.counts == 7).all()
    with pytest.raises(ValueError):
        TomoDataset.from_mapping({lab: 7 for lab in MODE_LABELS[:-1]})


def test_mle_output_is_always_physical(rng):
    for seed in range(5):
        data = noisy_dataset(random_density(rng), 300, seed)
        result = mle_reconstruct(data)
        rho = result.rho_mle
        assert isinstance(rho, DensityMatrix)  # constructor enforces the axioms
        assert np.linalg.eigvalsh(rho.matrix).min() >= -1e-9


def test_mle_beats_projected_linear_inversion():
    data = noisy_dataset(WERNER, 800, seed=21)
    result = mle_reconstruct(data)
    projected = _project_physical(linear_inversion(data))
    counts = data.counts.astype(float)
    nll_mle = _negative_log_likelihood(_rho_to_t(result.rho_mle.matrix), counts)
    nll_li = _negative_log_likelihood(_rho_to_t(projected), counts)
    assert nll_mle <= nll_li + 1e-9


def test_mle_round_trip_error_shrinks_with_counts():
    """Median reconstruction error over 20 seeds decreases as counts grow."""
    medians = []
    for per_basis in (10**3, 10**4, 10**5):
        errors = [
            trace_distance(mle_reconstruct(noisy_dataset(WERNER, per_basis, seed)).rho_mle, WERNER)
            for seed in range(20)
        ]
        medians.append(float(np.median(errors)))
    assert medians[0] > medians[1] > medians[2]


def test_mle_reports_target_comparison():
    result = mle_reconstruct(expected_counts(BELL, 10**5), target=bell_state("phi+"))
    assert result.report.fidelity >= 0.999
    assert result.converged
    payload = result.to_json_dict()
    assert set(payload) >= {"rho_mle", "rho_linear", "report", "log_likelihood", "converged"}


def test_correlation_matches_direct_computation(rng):
    rho = random_density(rng)
    a, b = MeasurementSetting(0.4), MeasurementSetting(1.1)
    p = joint_probabilities(rho, (a, b)).probs
    assert correlation(rho, a, b) == pytest.approx(
        p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0], abs=1e-12
    )


def test_chsh_bell_optimal_settings():
    assert chsh(BELL, *OPTIMAL_BELL_SETTINGS) == pytest.approx(2 * np.sqrt(2), abs=1e-9)


def test_chsh_maximally_mixed_is_zero():
    mixed = DensityMatrix(2, np.eye(4) / 4)
    assert chsh(mixed, *OPTIMAL_BELL_SETTINGS) == pytest.approx(0.0, abs=1e-9)


def test_chsh_exchange_invariance(rng):
    for _ in range(20):
        rho = random_density(rng)
        a1, a2, b1, b2 = (MeasurementSetting(x) for x in rng.uniform(-4, 4, size=4))
        s = chsh(rho, a1, a2, b1, b2)
        swapped = chsh(rho, a2, a1, b2, b1)
        assert abs(s) == pytest.approx(abs(swapped), abs=1e-9)


def test_chsh_tsirelson_sample(rng):
    for _ in range(50):
        rho = random_density(rng)
        settings = [MeasurementSetting(x) for x in rng.uniform(-7, 7, size=4)]
        assert abs(chsh(rho, *settings)) <= 2 * np.sqrt(2) + 1e-9


def test_tomography_round_trip_concurrence():
    result = mle_reconstruct(expected_counts(WERNER, 10**4))
    assert concurrence(result.rho_mle) == pytest.approx(0.997, abs=0.02)
    assert fidelity(result.rho_mle, bell_state("phi+")) > 0.9
