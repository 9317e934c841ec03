"""Quantum states, polarizer measurements, and entanglement metrics.

Conventions fixed here and used everywhere else:

* ``|0>`` is vertical polarization, ``|1>`` horizontal.
* Analyzer settings are Stokes angles. A polarizer rotated by ``t`` from
  vertical has Stokes angle ``2 t`` and is driven by a half-wave plate
  at ``t / 2``; only angle differences are physical, the absolute zero
  is a convention.
* The polarizer at Stokes angle ``a`` passes ``cos(a/2)|0> + sin(a/2)|1>``.
* Measurement outcomes are binary: 0 means the photon passed the
  analyzer, 1 that it went to the orthogonal port.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MeasurementSetting",
    "PureState",
    "DensityMatrix",
    "JointDistribution",
    "EntanglementReport",
    "bell_state",
    "modified_werner",
    "polarizer_projector",
    "joint_probabilities",
    "partial_trace",
    "fidelity",
    "concurrence",
    "entanglement_report",
    "visibility",
]

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
MIN_EIGENVALUE = -1e-9
NORM_TOL = 1e-12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)


def _stokes(setting) -> float:
    """Accept a MeasurementSetting or a bare Stokes angle in radians."""
    return float(getattr(setting, "stokes_angle", setting))


@dataclass(frozen=True)
class MeasurementSetting:
    """A linear-polarizer setting, stored as a Stokes angle in radians.

    The physical rotation of the polarizer from vertical is half the
    Stokes angle; the half-wave plate implementing that rotation sits at
    a quarter of it. Both views are exact halvings, so round trips
    through them are lossless.
    """

    stokes_angle: float

    @property
    def physical_angle(self) -> float:
        return self.stokes_angle / 2

    @property
    def hwp_angle(self) -> float:
        return self.stokes_angle / 4


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector on one or more qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        dim = amps.shape[0] if amps.ndim == 1 else 0
        if dim < 2 or dim & (dim - 1):
            raise ValueError("amplitudes must be a 1-d vector of power-of-2 length")
        if abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
            raise ValueError(f"squared norm {np.vdot(amps, amps).real!r} is not 1")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, trace-one, positive-semidefinite matrix on n qubits.

    The three physicality conditions are checked at construction
    (Hermiticity and trace to 1e-10, smallest eigenvalue above -1e-9)
    so every instance in circulation is a valid state.
    """

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be at least 1")
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        dim = 2 ** self.n_qubits
        if mat.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix for {self.n_qubits} qubit(s)")
        if np.abs(mat - mat.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("matrix is not Hermitian")
        tr = np.trace(mat)
        if abs(tr.real - 1.0) > TRACE_TOL or abs(tr.imag) > TRACE_TOL:
            raise ValueError(f"trace {tr!r} is not 1")
        if np.linalg.eigvalsh(mat)[0] < MIN_EIGENVALUE:
            raise ValueError("matrix has a negative eigenvalue beyond tolerance")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def purity(self) -> float:
        return float(np.vdot(self.matrix, self.matrix).real)

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "DensityMatrix":
        mat = np.asarray(payload["re"], dtype=float) + 1j * np.asarray(payload["im"], dtype=float)
        return cls(int(payload["n_qubits"]), mat)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probability table over binary outcome tuples, one axis per party.

    Index 0 on an axis means that party's photon passed its analyzer,
    index 1 that it was blocked. Entries are clamped at zero (tiny
    negative floating-point noise is tolerated up to -1e-12) and the
    table must sum to 1 within 1e-10.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim < 1 or p.shape != (2,) * p.ndim:
            raise ValueError("probability table must have one binary axis per party")
        if p.min() < -1e-12:
            raise ValueError(f"negative probability {p.min()!r}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def n_parties(self) -> int:
        return self.probs.ndim

    def marginal(self, parties) -> "JointDistribution":
        """Marginal over the named parties, in the order given."""
        keep = (parties,) if isinstance(parties, int) else tuple(parties)
        axes = range(self.probs.ndim)
        if not keep or len(set(keep)) != len(keep) or any(a not in axes for a in keep):
            raise ValueError(f"invalid party selection {parties!r}")
        rest = tuple(a for a in axes if a not in keep)
        arr = np.transpose(self.probs, keep + rest)
        if rest:
            arr = arr.reshape(arr.shape[: len(keep)] + (-1,)).sum(axis=-1)
        return JointDistribution(arr)


@dataclass(frozen=True)
class EntanglementReport:
    """Standard two-qubit state-quality numbers, all in [0, 1]."""

    fidelity: float
    tangle: float
    concurrence: float
    linear_entropy: float
    purity: float

    def __post_init__(self):
        for name in ("fidelity", "tangle", "concurrence", "linear_entropy", "purity"):
            value = getattr(self, name)
            if not -1e-9 <= value <= 1.0 + 1e-9:
                raise ValueError(f"{name} = {value!r} outside [0, 1]")
        if abs(self.tangle - self.concurrence**2) > 1e-9:
            raise ValueError("tangle must equal concurrence squared")

    def to_json_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "tangle": self.tangle,
            "concurrence": self.concurrence,
            "linear_entropy": self.linear_entropy,
            "purity": self.purity,
        }


_BELL_TABLE = {
    "phi+": (1, 0, 0, 1),
    "phi-": (1, 0, 0, -1),
    "psi+": (0, 1, 1, 0),
    "psi-": (0, 1, -1, 0),
}


def bell_state(kind: str = "phi+") -> PureState:
    """One of the four maximally entangled two-qubit states.

    ``kind`` is "phi+", "phi-", "psi+" or "psi-" (case-insensitive).
    """
    key = kind.strip().lower()
    if key not in _BELL_TABLE:
        raise ValueError(f"unknown Bell state {kind!r}; expected one of {sorted(_BELL_TABLE)}")
    return PureState(np.array(_BELL_TABLE[key], dtype=complex) / np.sqrt(2))


def modified_werner(lam: float, phase: float, n_qubits: int = 2) -> DensityMatrix:
    """Phase-tagged pure state mixed with white noise.

    rho = lam |psi><psi| + (1 - lam) / 2**n * identity, where
    |psi> = (|0...0> + exp(i*phase) |1...1>) / sqrt(2).

    Parameters
    ----------
    lam : float
        Mixing weight in [0, 1]; 1 is the pure state, 0 maximally mixed.
    phase : float
        Relative phase of the all-ones branch, radians.
    n_qubits : int
        Number of qubits (2 for the photon-pair model, 4 for the
        multipartite generalization).
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda = {lam!r} outside [0, 1]")
    dim = 2 ** n_qubits
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0 / np.sqrt(2.0)
    psi[-1] = np.exp(1j * phase) / np.sqrt(2.0)
    mat = lam * np.outer(psi, psi.conj()) + (1.0 - lam) / dim * np.eye(dim)
    return DensityMatrix(n_qubits, mat)


def polarizer_projector(setting) -> np.ndarray:
    """Rank-1 projector onto the pass state of a linear polarizer.

    For Stokes angle ``a`` the pass state is cos(a/2)|0> + sin(a/2)|1>
    with |0> vertical; the returned 2x2 matrix is idempotent and has
    unit trace by construction.
    """
    half = _stokes(setting) / 2.0
    v = np.array([np.cos(half), np.sin(half)], dtype=complex)
    return np.outer(v, v.conj())


def joint_probabilities(rho: DensityMatrix, settings) -> JointDistribution:
    """Born-rule outcome table for one analyzer per qubit.

    Entry ``p[o1, ..., on]`` is Tr(rho M1^o1 x ... x Mn^on) with M^0 the
    pass projector for that party's setting and M^1 its complement.
    """
    settings = list(settings)
    if len(settings) != rho.n_qubits:
        raise ValueError(
            f"got {len(settings)} settings for {rho.n_qubits} qubit(s); need one per qubit"
        )
    eye = np.eye(2, dtype=complex)
    effects = []
    for s in settings:
        proj = polarizer_projector(s)
        effects.append((proj, eye - proj))
    table = np.empty((2,) * rho.n_qubits)
    for outcome in np.ndindex(*table.shape):
        op = effects[0][outcome[0]]
        for k in range(1, len(outcome)):
            op = np.kron(op, effects[k][outcome[k]])
        table[outcome] = np.trace(rho.matrix @ op).real
    return JointDistribution(table)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the qubits named in ``keep`` (0-based, kept in index order)."""
    keep = (keep,) if isinstance(keep, int) else tuple(keep)
    n = rho.n_qubits
    if not keep or len(set(keep)) != len(keep) or any(not 0 <= k < n for k in keep):
        raise ValueError(f"invalid subsystem selection {keep!r} for {n} qubit(s)")
    keep = tuple(sorted(keep))
    letters = "abcdefghijklmnop"
    row, col, out_row, out_col = [], [], [], []
    free = iter(letters)
    for i in range(n):
        if i in keep:
            r, c = next(free), next(free)
            row.append(r)
            col.append(c)
            out_row.append(r)
            out_col.append(c)
        else:
            t = next(free)
            row.append(t)
            col.append(t)
    sub = "".join(row) + "".join(col) + "->" + "".join(out_row) + "".join(out_col)
    tensor = rho.matrix.reshape((2,) * (2 * n))
    reduced = np.einsum(sub, tensor)
    k = len(keep)
    return DensityMatrix(k, reduced.reshape(2**k, 2**k))


def fidelity(rho: DensityMatrix, target: PureState) -> float:
    """Overlap <target| rho |target> with a pure target state."""
    if not isinstance(target, PureState):
        raise TypeError("fidelity target must be a PureState")
    if target.dim != rho.dim:
        raise ValueError("state and target dimensions differ")
    amps = target.amplitudes
    return float(np.real(amps.conj() @ rho.matrix @ amps))


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit state.

    Square roots of the eigenvalues of rho (sy x sy) rho* (sy x sy) in
    decreasing order l1 >= ... >= l4 give C = max(0, l1 - l2 - l3 - l4).
    """
    if rho.n_qubits != 2:
        raise ValueError("concurrence is defined for 2-qubit states")
    m = rho.matrix
    product = m @ _SPIN_FLIP @ m.conj() @ _SPIN_FLIP
    lam = np.sqrt(np.clip(np.linalg.eigvals(product).real, 0.0, None))
    lam = np.sort(lam)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _clip01(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


def entanglement_report(rho: DensityMatrix, target: PureState) -> EntanglementReport:
    """Fidelity to a pure target plus the standard entanglement metrics.

    Linear entropy uses the normalized convention (d/(d-1))(1 - Tr rho^2)
    with d = 4 so the value runs over the full [0, 1] range; tangle is
    the squared concurrence.
    """
    if rho.n_qubits != 2:
        raise ValueError("entanglement report is defined for 2-qubit states")
    conc = _clip01(concurrence(rho))
    pur = _clip01(rho.purity())
    return EntanglementReport(
        fidelity=_clip01(fidelity(rho, target)),
        tangle=conc**2,
        concurrence=conc,
        linear_entropy=_clip01((4.0 / 3.0) * (1.0 - pur)),
        purity=pur,
    )


def visibility(rho: DensityMatrix, basis: str) -> float:
    """Coincidence-fringe visibility with one analyzer held fixed.

    Party A's analyzer is fixed in the named basis ("HV" means Stokes 0,
    "DA" Stokes pi/2) while party B's Stokes angle sweeps a full turn.
    The pass-pass probability is affine in (cos b, sin b), so its
    extrema follow exactly from four probe evaluations; the returned
    value is (max - min) / (max + min), or 0 when there is no signal.
    """
    if rho.n_qubits != 2:
        raise ValueError("visibility is defined for 2-qubit states")
    try:
        alpha = {"hv": 0.0, "da": np.pi / 2.0}[basis.strip().lower()]
    except KeyError:
        raise ValueError(f"basis must be 'HV' or 'DA', got {basis!r}") from None

    def pass_pass(beta: float) -> float:
        dist = joint_probabilities(rho, [MeasurementSetting(alpha), MeasurementSetting(beta)])
        return float(dist.probs[0, 0])

    p0, p90, p180, p270 = (pass_pass(b) for b in (0.0, np.pi / 2, np.pi, 3 * np.pi / 2))
    offset = 0.5 * (p0 + p180)
    amp = np.hypot(0.5 * (p0 - p180), 0.5 * (p90 - p270))
    if offset + amp <= 0.0:
        return 0.0
    return float(amp / offset) if amp < offset else 1.0
