"""Shannon-entropy information geometry on measurement outcomes.

The central object is the Rokhlin-Rajski distance
D(A, B) = H(A|B) + H(B|A) = 2 H(A,B) - H(A) - H(B), a true metric on
jointly distributed random variables. Schumacher's single-angle
quadrilateral (Phys. Rev. A 44, 7047 (1991)) measures four such
distances between two settings per party; for entangled states the
direct edge can exceed the three-edge path, which no set of four
classical variables with a common joint distribution can do. The
multipartite area/volume functionals and their Monte Carlo "reactivity"
ratio generalize the same construction to four qubits.

All entropies are base 2 (bits); 0 log 0 counts as 0 and probabilities
below 1e-15 are treated as exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import DensityMatrix, JointDistribution, MeasurementSetting, joint_probabilities

__all__ = [
    "REFERENCE_THETAS",
    "QuadrilateralGeometry",
    "ViolationCurve",
    "MetricAxiomsReport",
    "ReactivityResult",
    "shannon_entropy",
    "joint_entropy",
    "conditional_entropy",
    "info_distance",
    "schumacher_settings",
    "quadrilateral",
    "violation",
    "sweep",
    "max_violation",
    "metric_axioms_check",
    "info_area",
    "info_volume",
    "reactivity",
    "stream_rng",
    "golden_section_min",
]

# Eight-angle reference grid for sweep demos, strictly increasing.
REFERENCE_THETAS = (0.175, 0.227, 0.279, 0.328, 0.393, 0.436, 0.471, 0.503)

_ZERO_CUTOFF = 1e-15


def shannon_entropy(dist) -> float:
    """Shannon entropy in bits of a distribution or bare probability table."""
    p = dist.probs if isinstance(dist, JointDistribution) else np.asarray(dist, dtype=float)
    p = p.ravel()
    p = p[p > _ZERO_CUTOFF]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


def joint_entropy(dist: JointDistribution) -> float:
    """Entropy of the full outcome tuple, H(A, B, ...)."""
    return shannon_entropy(dist)


def conditional_entropy(dist: JointDistribution, given) -> float:
    """H(rest | given) = H(all) - H(given); ``given`` is a party index or tuple."""
    g = (given,) if isinstance(given, int) else tuple(given)
    return shannon_entropy(dist) - shannon_entropy(dist.marginal(g))


def info_distance(dist: JointDistribution) -> float:
    """Rokhlin-Rajski distance D = 2 H(A,B) - H(A) - H(B) in bits.

    Zero for identical variables, H(A) + H(B) for independent ones,
    symmetric under party swap, and a metric on any family of variables
    sharing one joint distribution.
    """
    if dist.n_parties != 2:
        raise ValueError("info_distance needs a two-party distribution")
    d = (
        2.0 * shannon_entropy(dist)
        - shannon_entropy(dist.marginal(0))
        - shannon_entropy(dist.marginal(1))
    )
    return max(0.0, float(d))


def schumacher_settings(theta: float, offset: float = 0.0):
    """Stokes angles (a1, a2, b1, b2) = (0, 2t, t, 3t), plus an optional common offset.

    A single angle theta generates both parties' setting pairs: the three
    side edges (a1,b1), (a2,b1), (a2,b2) each span a relative angle of
    theta, while the direct edge (a1,b2) spans 3 theta.
    """
    return (
        MeasurementSetting(offset),
        MeasurementSetting(offset + 2.0 * theta),
        MeasurementSetting(offset + theta),
        MeasurementSetting(offset + 3.0 * theta),
    )


@dataclass(frozen=True)
class QuadrilateralGeometry:
    """Information distances (bits) on the four measured edges.

    d_a1b1, d_a2b1, d_a2b2 are the side edges; d_a1b2 is the direct base
    edge. The dd_* fields carry per-edge uncertainties when known
    (simulated or propagated runs) and stay None for exact model values.
    """

    d_a1b1: float
    d_a2b1: float
    d_a2b2: float
    d_a1b2: float
    dd_a1b1: float | None = None
    dd_a2b1: float | None = None
    dd_a2b2: float | None = None
    dd_a1b2: float | None = None

    def __post_init__(self):
        for name in ("d_a1b1", "d_a2b1", "d_a2b2", "d_a1b2"):
            d = getattr(self, name)
            if not -1e-9 <= d <= 2.0 + 1e-9:
                raise ValueError(f"{name} = {d!r} outside [0, 2]")
        for name in ("dd_a1b1", "dd_a2b1", "dd_a2b2", "dd_a1b2"):
            dd = getattr(self, name)
            if dd is not None and dd < 0.0:
                raise ValueError(f"{name} = {dd!r} is negative")

    @property
    def edges(self) -> tuple:
        return (self.d_a1b1, self.d_a2b1, self.d_a2b2, self.d_a1b2)

    @property
    def sides(self) -> tuple:
        return (self.d_a1b1, self.d_a2b1, self.d_a2b2)

    @property
    def base(self) -> float:
        return self.d_a1b2

    @property
    def uncertainties(self) -> tuple | None:
        dds = (self.dd_a1b1, self.dd_a2b1, self.dd_a2b2, self.dd_a1b2)
        return None if any(dd is None for dd in dds) else dds

    @property
    def violation(self) -> float:
        """Direct edge minus the three-edge path; positive certifies violation."""
        return self.d_a1b2 - (self.d_a1b1 + self.d_a2b1 + self.d_a2b2)

    @property
    def violation_uncertainty(self) -> float | None:
        dds = self.uncertainties
        if dds is None:
            return None
        return float(np.sqrt(sum(dd * dd for dd in dds)))


def quadrilateral(rho: DensityMatrix, theta: float, offset: float = 0.0) -> QuadrilateralGeometry:
    """Exact Born-rule edge distances of the single-angle scheme at theta."""
    a1, a2, b1, b2 = schumacher_settings(theta, offset)

    def edge(a: MeasurementSetting, b: MeasurementSetting) -> float:
        return info_distance(joint_probabilities(rho, [a, b]))

    return QuadrilateralGeometry(edge(a1, b1), edge(a2, b1), edge(a2, b2), edge(a1, b2))


def violation(rho: DensityMatrix, theta: float, offset: float = 0.0) -> float:
    """Triangle-violation functional V = D(a1,b2) - sum of the three sides.

    Positive values cannot occur for outcomes of four classical variables
    with a common joint distribution (metric_axioms_check shows why); the
    quadrilateral evades the constraint because its diagonal pairs are
    never measured together.
    """
    return quadrilateral(rho, theta, offset).violation


@dataclass(frozen=True, eq=False)
class ViolationCurve:
    """Sequence of (theta, V, dV) points with strictly increasing theta."""

    thetas: np.ndarray
    v: np.ndarray
    dv: np.ndarray | None = None

    def __post_init__(self):
        thetas = np.asarray(self.thetas, dtype=float)
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "v", v)
        if thetas.ndim != 1 or thetas.shape != v.shape:
            raise ValueError("thetas and v must be 1-d arrays of equal length")
        if thetas.size >= 2 and not np.all(np.diff(thetas) > 0):
            raise ValueError("thetas must be strictly increasing")
        if self.dv is not None:
            dv = np.asarray(self.dv, dtype=float)
            object.__setattr__(self, "dv", dv)
            if dv.shape != thetas.shape:
                raise ValueError("dv must match thetas in length")
            if dv.size and dv.min() < 0:
                raise ValueError("dv entries must be nonnegative")

    def __len__(self) -> int:
        return self.thetas.size

    def __iter__(self):
        for i in range(len(self)):
            yield (
                float(self.thetas[i]),
                float(self.v[i]),
                None if self.dv is None else float(self.dv[i]),
            )


def sweep(rho: DensityMatrix, thetas) -> ViolationCurve:
    """Exact violation curve over a strictly increasing list of angles."""
    thetas = np.asarray(list(thetas), dtype=float)
    values = np.array([violation(rho, float(t)) for t in thetas])
    return ViolationCurve(thetas, values)


def golden_section_min(f, lo: float, hi: float, tol: float = 1e-8) -> float:
    """Golden-section minimizer on [lo, hi]; returns the abscissa.

    Derivative-free and fully deterministic, which keeps every scan and
    fit in this package bit-reproducible.
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def max_violation(rho: DensityMatrix, lo: float = 0.1, hi: float = 0.6,
                  step: float = 1e-4, tol: float = 1e-6):
    """Locate the angle maximizing V by dense scan plus golden-section refinement.

    Returns (theta_star, v_star).
    """
    grid = np.arange(lo, hi + step / 2.0, step)
    values = np.array([violation(rho, float(t)) for t in grid])
    i = int(np.argmax(values))
    bracket_lo = grid[max(0, i - 1)]
    bracket_hi = grid[min(grid.size - 1, i + 1)]
    theta_star = golden_section_min(lambda t: -violation(rho, t), bracket_lo, bracket_hi, tol)
    return float(theta_star), float(violation(rho, theta_star))


@dataclass(frozen=True)
class MetricAxiomsReport:
    """Residuals of the metric axioms on one classical three-party distribution."""

    max_symmetry_residual: float
    min_distance: float
    max_triangle_excess: float

    @property
    def ok(self) -> bool:
        return (
            self.max_symmetry_residual <= 1e-12
            and self.min_distance >= -1e-12
            and self.max_triangle_excess <= 1e-9
        )


def metric_axioms_check(dist: JointDistribution) -> MetricAxiomsReport:
    """Symmetry, nonnegativity and triangle residuals for all pairs of a triple.

    For any classical joint distribution these axioms hold identically;
    max_triangle_excess is the largest D(x,y) - D(x,z) - D(z,y) over the
    six ordered assignments and should never exceed numerical noise.
    """
    if dist.n_parties != 3:
        raise ValueError("metric_axioms_check needs a three-party distribution")
    d = {}
    for i in range(3):
        for j in range(3):
            if i != j:
                d[i, j] = info_distance(dist.marginal((i, j)))
    symmetry = max(abs(d[i, j] - d[j, i]) for i in range(3) for j in range(i + 1, 3))
    triangle = max(
        d[i, j] - d[i, k] - d[k, j]
        for i in range(3)
        for j in range(3)
        for k in range(3)
        if len({i, j, k}) == 3
    )
    return MetricAxiomsReport(symmetry, min(d.values()), triangle)


def _leave_one_out_conditionals(dist: JointDistribution) -> np.ndarray:
    """H(X_i | all others) for each party, clamped at zero."""
    n = dist.n_parties
    h_all = shannon_entropy(dist)
    h = np.array(
        [h_all - shannon_entropy(dist.marginal(tuple(j for j in range(n) if j != i))) for i in range(n)]
    )
    return np.clip(h, 0.0, None)


def info_area(dist: JointDistribution) -> float:
    """Sum of pairwise products of the three conditional entropies H(X|rest), bits^2.

    Symmetric under party relabeling; 3 for independent uniform bits, 0
    for perfectly correlated ones.
    """
    if dist.n_parties != 3:
        raise ValueError("info_area needs a three-party distribution")
    h = _leave_one_out_conditionals(dist)
    return float(h[0] * h[1] + h[1] * h[2] + h[2] * h[0])


def info_volume(dist: JointDistribution) -> float:
    """Sum of the four triple products of conditional entropies H(X|rest), bits^3."""
    if dist.n_parties != 4:
        raise ValueError("info_volume needs a four-party distribution")
    h = _leave_one_out_conditionals(dist)
    return float(sum(np.prod([h[j] for j in range(4) if j != k]) for k in range(4)))


def stream_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-keyed random stream.

    The same (seed, stream...) key always yields the same sequence, and
    distinct keys are independent, so samples drawn under different keys
    do not depend on evaluation order or interleaving.
    """
    entropy = (int(seed),) + tuple(int(s) for s in stream)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _random_local_bases(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    """One uniformly random rank-1 projective basis per qubit.

    Each basis comes from a normalized complex-Gaussian pure state (a, b)
    with orthogonal partner (-conj(b), conj(a)); rows are basis states.
    """
    z = rng.standard_normal((n_qubits, 4))
    a = z[:, 0] + 1j * z[:, 1]
    b = z[:, 2] + 1j * z[:, 3]
    norm = np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2)
    a /= norm
    b /= norm
    bases = np.empty((n_qubits, 2, 2), dtype=complex)
    bases[:, 0, 0] = a
    bases[:, 0, 1] = b
    bases[:, 1, 0] = -b.conj()
    bases[:, 1, 1] = a.conj()
    return bases


_FACES = tuple(tuple(j for j in range(4) if j != k) for k in range(4))


@dataclass(frozen=True)
class ReactivityResult:
    """Monte Carlo means of information area and volume, and their ratio.

    ``reactivity`` is mean_area / mean_volume (ratio of the means, not
    mean of ratios); a degenerate zero mean volume is flagged by an
    infinite reactivity instead of a division error.
    """

    mean_area: float
    mean_volume: float
    reactivity: float
    n_samples: int
    seed: int

    def __post_init__(self):
        if self.mean_area < 0.0 or self.mean_volume < 0.0:
            raise ValueError("mean area and volume must be nonnegative")
        if self.mean_volume > 0.0:
            expected = self.mean_area / self.mean_volume
            if abs(self.reactivity - expected) > 1e-12 * max(1.0, abs(expected)):
                raise ValueError("reactivity must equal mean_area / mean_volume")
        elif np.isfinite(self.reactivity):
            raise ValueError("zero mean volume must be flagged as infinite reactivity")

    @property
    def volume_degenerate(self) -> bool:
        return not np.isfinite(self.reactivity)

    def to_json_dict(self) -> dict:
        return {
            "mean_area": self.mean_area,
            "mean_volume": self.mean_volume,
            "reactivity": self.reactivity,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "volume_degenerate": self.volume_degenerate,
        }


def reactivity(rho: DensityMatrix, n_samples: int, seed: int) -> ReactivityResult:
    """Measurement-averaged area-to-volume ratio of a four-qubit state.

    For each sample one random projective basis per qubit is drawn, the
    16-outcome distribution computed, the four three-party face areas
    averaged, and the four-party volume evaluated. Means are taken over
    samples first and the ratio last. The sample-i stream depends only on
    (seed, i), so the result is independent of evaluation order and
    repeats bit-identically for a fixed seed.
    """
    if rho.n_qubits != 4:
        raise ValueError("reactivity is implemented for 4-qubit states")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    areas = np.empty(n_samples)
    volumes = np.empty(n_samples)
    for i in range(n_samples):
        bases = _random_local_bases(stream_rng(seed, i), 4)
        u = bases[0]
        for k in (1, 2, 3):
            u = np.kron(u, bases[k])
        p = np.einsum("oi,ij,oj->o", u.conj(), rho.matrix, u).real
        p = np.clip(p, 0.0, None)
        dist = JointDistribution((p / p.sum()).reshape(2, 2, 2, 2))
        volumes[i] = info_volume(dist)
        areas[i] = np.mean([info_area(dist.marginal(face)) for face in _FACES])
    mean_area = float(areas.mean())
    mean_volume = float(volumes.mean())
    ratio = mean_area / mean_volume if mean_volume > 0.0 else float("inf")
    return ReactivityResult(mean_area, mean_volume, ratio, n_samples, seed)
