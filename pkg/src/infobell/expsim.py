"""Finite-statistics simulation of coincidence measurements.

One "edge" measurement draws ``n_trials`` coincidences multinomially
over the four pass/block outcome pairs of an analyzer-pair setting,
adds Poisson accidental coincidences per bin, and estimates the outcome
table by subtracting the known accidental mean, clamping at zero and
renormalizing. Edge uncertainties come from the usual quadrature
propagation: finite-difference sensitivities of the information
distance to the two analyzer angles (times the calibration sigma) and
to the four mode counts (times the Poisson sqrt(N) count errors).

Note the plug-in entropy estimate gives the distance a small negative
bias, about -2/(n ln 2) (-0.008 at n = 350); it is left uncorrected,
matching plain plug-in practice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .infogeo import QuadrilateralGeometry, info_distance, schumacher_settings, stream_rng
from .states import DensityMatrix, JointDistribution, MeasurementSetting, joint_probabilities, modified_werner

__all__ = [
    "DEFAULT_ACCIDENTAL_MEAN",
    "DEFAULT_ANGLE_SIGMA",
    "NoiseConfig",
    "CoincidenceRecord",
    "EstimationError",
    "ConfigError",
    "SimulationConfig",
    "sample_counts",
    "add_accidentals",
    "estimate_distribution",
    "propagate_error",
    "simulate_schumacher_run",
    "simulate_sweep",
]

DEFAULT_ACCIDENTAL_MEAN = 6.0
DEFAULT_ANGLE_SIGMA = 0.0030

_ANGLE_STEP = 1e-5
_COUNT_STEP_FRACTION = 1e-3

# Stream tags keeping multinomial and accidental draws on distinct substreams.
_STREAM_SAMPLE = 0
_STREAM_ACCIDENTAL = 1


class EstimationError(RuntimeError):
    """Counts could not be turned into a probability estimate."""


class ConfigError(ValueError):
    """A run configuration is missing fields or malformed."""


@dataclass(frozen=True)
class NoiseConfig:
    """Noise model: mean accidental coincidences per bin, analyzer
    calibration sigma (radians, Stokes), and the run seed."""

    accidental_mean: float = DEFAULT_ACCIDENTAL_MEAN
    angle_sigma: float = DEFAULT_ANGLE_SIGMA
    seed: int = 0

    def __post_init__(self):
        if self.accidental_mean < 0.0:
            raise ValueError("accidental_mean must be nonnegative")
        if self.angle_sigma < 0.0:
            raise ValueError("angle_sigma must be nonnegative")


@dataclass(frozen=True, eq=False)
class CoincidenceRecord:
    """Integer counts per outcome pair for one analyzer-pair setting.

    counts[i, j] is the number of coincidences with party A in outcome i
    and party B in outcome j (0 = pass, 1 = block); accidental_estimate
    holds the expected spurious coincidences per bin. total_trials always
    equals the current count sum.
    """

    settings: tuple | None
    counts: np.ndarray
    accidental_estimate: np.ndarray
    total_trials: int

    def __post_init__(self):
        counts = np.asarray(self.counts)
        acc = np.asarray(self.accidental_estimate, dtype=float)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "accidental_estimate", acc)
        if counts.shape != (2, 2) or acc.shape != (2, 2):
            raise ValueError("counts and accidental_estimate must be 2x2 tables")
        if not np.issubdtype(counts.dtype, np.integer):
            raise ValueError("counts must be integers")
        if counts.min() < 0 or acc.min() < 0.0:
            raise ValueError("counts and accidental estimates must be nonnegative")
        if int(counts.sum()) != self.total_trials:
            raise ValueError("total_trials must equal the count sum")


def sample_counts(dist: JointDistribution, n_trials: int, seed: int,
                  stream: tuple = (), settings=None) -> CoincidenceRecord:
    """One multinomial draw of n_trials coincidences from a two-party table.

    ``stream`` extends the RNG key (see infogeo.stream_rng) so that
    independent draws inside a larger run stay order-independent.
    """
    if dist.n_parties != 2:
        raise ValueError("sample_counts needs a two-party distribution")
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    rng = stream_rng(seed, _STREAM_SAMPLE, *stream)
    p = dist.probs.ravel()
    counts = rng.multinomial(n_trials, p / p.sum()).reshape(2, 2)
    return CoincidenceRecord(
        settings=None if settings is None else tuple(settings),
        counts=counts,
        accidental_estimate=np.zeros((2, 2)),
        total_trials=int(n_trials),
    )


def add_accidentals(record: CoincidenceRecord, noise: NoiseConfig,
                    stream: tuple = ()) -> CoincidenceRecord:
    """Add Poisson(accidental_mean) spurious coincidences to every bin.

    The configured mean, not the realized draw, is recorded in
    accidental_estimate: subtraction later uses the known level.
    """
    if noise.accidental_mean == 0.0:
        return record
    rng = stream_rng(noise.seed, _STREAM_ACCIDENTAL, *stream)
    extra = rng.poisson(noise.accidental_mean, size=(2, 2))
    counts = record.counts + extra
    return CoincidenceRecord(
        settings=record.settings,
        counts=counts,
        accidental_estimate=record.accidental_estimate + noise.accidental_mean,
        total_trials=int(counts.sum()),
    )


def estimate_distribution(record: CoincidenceRecord) -> JointDistribution:
    """Accidental-subtracted probability estimate: max(0, N - acc), renormalized."""
    est = np.clip(record.counts - record.accidental_estimate, 0.0, None)
    total = est.sum()
    if total <= 0.0:
        raise EstimationError("all outcome bins are empty after accidental subtraction")
    return JointDistribution(est / total)


def _model_distance(rho: DensityMatrix, alpha: float, beta: float) -> float:
    dist = joint_probabilities(rho, [MeasurementSetting(alpha), MeasurementSetting(beta)])
    return info_distance(dist)


def _estimator_distance(counts: np.ndarray, accidental_mean: float) -> float:
    """Distance through the estimate chain, for continuous perturbed counts."""
    est = np.clip(counts - accidental_mean, 0.0, None)
    total = est.sum()
    if total <= 0.0:
        raise EstimationError("perturbed counts vanished under accidental subtraction")
    return info_distance(JointDistribution(est.reshape(2, 2) / total))


def _edge_uncertainty(rho: DensityMatrix, alpha: float, beta: float,
                      n_trials: int, noise: NoiseConfig) -> float:
    """Quadrature uncertainty of one edge distance.

    Two angle terms (dD/dalpha, dD/dbeta by central differences on the
    exact model, each times angle_sigma) plus four count terms (dD/dN_j
    by central differences through the estimator at the expected
    counts, each times sqrt of the expected observed count).
    """
    h = _ANGLE_STEP
    d_dalpha = (_model_distance(rho, alpha + h, beta) - _model_distance(rho, alpha - h, beta)) / (2 * h)
    d_dbeta = (_model_distance(rho, alpha, beta + h) - _model_distance(rho, alpha, beta - h)) / (2 * h)
    variance = (d_dalpha * noise.angle_sigma) ** 2 + (d_dbeta * noise.angle_sigma) ** 2

    p = joint_probabilities(rho, [MeasurementSetting(alpha), MeasurementSetting(beta)]).probs.ravel()
    expected = n_trials * p + noise.accidental_mean
    step = max(1.0, _COUNT_STEP_FRACTION * n_trials)
    for j in range(4):
        up = expected.copy()
        up[j] += step
        down = expected.copy()
        down[j] = max(0.0, down[j] - step)
        slope = (
            _estimator_distance(up, noise.accidental_mean)
            - _estimator_distance(down, noise.accidental_mean)
        ) / (up[j] - down[j])
        variance += slope**2 * expected[j]
    return float(np.sqrt(variance))


def propagate_error(rho_model: DensityMatrix, theta: float, counts_per_mode: int,
                    noise: NoiseConfig) -> QuadrilateralGeometry:
    """Exact model edge distances dressed with propagated uncertainties.

    The distances are the noise-free model values; the uncertainties are
    what a counts_per_mode-trial measurement with the configured noise
    would assign to each edge. In the limit angle_sigma -> 0 and
    counts -> infinity every uncertainty goes to zero.
    """
    if counts_per_mode < 1:
        raise ValueError("counts_per_mode must be at least 1")
    a1, a2, b1, b2 = schumacher_settings(theta)
    pairs = [(a1, b1), (a2, b1), (a2, b2), (a1, b2)]
    distances = [_model_distance(rho_model, a.stokes_angle, b.stokes_angle) for a, b in pairs]
    deltas = [
        _edge_uncertainty(rho_model, a.stokes_angle, b.stokes_angle, counts_per_mode, noise)
        for a, b in pairs
    ]
    return QuadrilateralGeometry(*distances, *deltas)


def simulate_schumacher_run(rho: DensityMatrix, theta: float, counts_per_mode: int,
                            noise: NoiseConfig, stream: tuple = ()) -> QuadrilateralGeometry:
    """Simulate one full four-edge measurement at angle theta.

    Per edge: multinomial coincidence draw, Poisson accidentals,
    accidental subtraction, then the information distance of the
    estimated table. Edge k of the run uses substream (*stream, k), so
    edges are independent and the whole run repeats bit-identically for
    a fixed seed. The attached uncertainties are the model-propagated
    ones (they depend on the model and noise settings, not on the
    realized counts, mirroring how error bars are assigned from expected
    count levels).
    """
    propagated = propagate_error(rho, theta, counts_per_mode, noise)
    a1, a2, b1, b2 = schumacher_settings(theta)
    estimates = []
    for k, (a, b) in enumerate([(a1, b1), (a2, b1), (a2, b2), (a1, b2)]):
        dist = joint_probabilities(rho, [a, b])
        record = sample_counts(dist, counts_per_mode, noise.seed, stream=(*stream, k), settings=(a, b))
        record = add_accidentals(record, noise, stream=(*stream, k))
        estimates.append(info_distance(estimate_distribution(record)))
    return QuadrilateralGeometry(
        *estimates,
        propagated.dd_a1b1,
        propagated.dd_a2b1,
        propagated.dd_a2b2,
        propagated.dd_a1b2,
    )


def simulate_sweep(rho: DensityMatrix, thetas, counts_per_mode: int,
                   noise: NoiseConfig) -> list:
    """Simulated runs at each angle; returns [(theta, QuadrilateralGeometry), ...].

    The run at thetas[i] uses substream (i,), so adding, dropping or
    reordering angles never changes the draws of the others.
    """
    return [
        (float(t), simulate_schumacher_run(rho, float(t), counts_per_mode, noise, stream=(i,)))
        for i, t in enumerate(thetas)
    ]


@dataclass(frozen=True)
class SimulationConfig:
    """Parsed run configuration for the simulate pipeline."""

    lam: float
    phase: float
    thetas: tuple
    counts_per_mode: int
    accidental_mean: float = DEFAULT_ACCIDENTAL_MEAN
    angle_sigma: float = DEFAULT_ANGLE_SIGMA
    seed: int = 0

    @classmethod
    def from_dict(cls, payload: dict) -> "SimulationConfig":
        """Build from a config mapping.

        Required: state.lambda, state.phase, thetas (strictly
        increasing), counts_per_mode, seed. Optional: accidental_mean
        (default 6), angle_sigma (default 0.003).
        """
        try:
            state = payload["state"]
            lam = float(state["lambda"])
            phase = float(state["phase"])
            thetas = tuple(float(t) for t in payload["thetas"])
            counts = int(payload["counts_per_mode"])
            seed = int(payload["seed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"missing or malformed config field: {exc}") from exc
        if not thetas:
            raise ConfigError("thetas must be a nonempty list")
        if any(b <= a for a, b in zip(thetas, thetas[1:])):
            raise ConfigError("thetas must be strictly increasing")
        if counts < 1:
            raise ConfigError("counts_per_mode must be at least 1")
        if not 0.0 <= lam <= 1.0:
            raise ConfigError(f"state.lambda = {lam!r} outside [0, 1]")
        try:
            accidental = float(payload.get("accidental_mean", DEFAULT_ACCIDENTAL_MEAN))
            sigma = float(payload.get("angle_sigma", DEFAULT_ANGLE_SIGMA))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed noise field: {exc}") from exc
        if accidental < 0.0 or sigma < 0.0:
            raise ConfigError("accidental_mean and angle_sigma must be nonnegative")
        return cls(
            lam=lam,
            phase=phase,
            thetas=thetas,
            counts_per_mode=counts,
            accidental_mean=accidental,
            angle_sigma=sigma,
            seed=seed,
        )

    @classmethod
    def load(cls, path) -> "SimulationConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(payload)

    def noise(self) -> NoiseConfig:
        return NoiseConfig(self.accidental_mean, self.angle_sigma, self.seed)

    def state(self) -> DensityMatrix:
        return modified_werner(self.lam, self.phase)
