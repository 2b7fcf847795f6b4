"""Sampling pure states from the maximum-entropy ensemble and measuring their entanglement."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ensemble import MaxEntEnsemble
from .fock_space import SystemPartition, popcounts

NORM_TOL = 1e-12
EIG_TOL = 1e-10
MAX_SAMPLING_N = 24


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        n = amps.size.bit_length() - 1
        if amps.ndim != 1 or amps.size != 1 << n:
            raise ValueError(f"state vector length {amps.size} is not a power of two")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: <psi|psi> = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @classmethod
    def from_unnormalized(cls, amps) -> "PureState":
        amps = np.asarray(amps, dtype=complex)
        return cls(amps / np.linalg.norm(amps))

    def matrix(self, partition: SystemPartition) -> np.ndarray:
        """Amplitudes as the ``(D_A, D_B)`` matrix ``Psi[a, b]``."""
        if partition.n_total != self.n:
            raise ValueError(f"partition is for {partition.n_total} qubits, state has {self.n}")
        return self.amplitudes.reshape(partition.dim_a, partition.dim_b)


@dataclass(frozen=True)
class ReducedDensityMatrix:
    entries: np.ndarray = field(repr=False)
    partition: SystemPartition

    def eigenvalues(self) -> np.ndarray:
        return _clamped_spectrum(np.linalg.eigvalsh(self.entries))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    values: np.ndarray = field(repr=False, compare=False)

    @property
    def std(self) -> float:
        return self.stderr * math.sqrt(self.samples)


def sample_rng(seed: int, index: int | None = None) -> np.random.Generator:
    """Generator for sample ``index`` of a campaign with master ``seed``.

    Streams depend only on ``(seed, index)``, never on scheduling.
    """
    if index is None:
        return np.random.default_rng(np.random.SeedSequence(seed))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return sample_rng(seed)


def amplitude_scales(e: MaxEntEnsemble) -> np.ndarray:
    """Per-basis-state standard deviation ``sqrt(rho(Q_n))``."""
    return np.sqrt(e.rho_sector)[popcounts(e.n)]


def sample_state(e: MaxEntEnsemble, seed) -> PureState:
    """Draw complex Gaussian amplitudes with sector variances, then normalize exactly."""
    if e.n > MAX_SAMPLING_N:
        raise ValueError(f"refusing to sample {e.n} qubits (limit {MAX_SAMPLING_N})")
    rng = _as_rng(seed)
    scale = amplitude_scales(e)
    z = rng.standard_normal((2, e.dim))
    amps = scale * (z[0] + 1j * z[1]) / math.sqrt(2.0)
    return PureState.from_unnormalized(amps)


def measure_charge_distribution(s: PureState) -> np.ndarray:
    """Born weight of each excitation-count sector."""
    return np.bincount(popcounts(s.n), weights=np.abs(s.amplitudes) ** 2, minlength=s.n + 1)


def reduced_density_matrix(s: PureState, partition: SystemPartition) -> ReducedDensityMatrix:
    m = s.matrix(partition)
    return ReducedDensityMatrix(m @ m.conj().T, partition)


def _clamped_spectrum(evals: np.ndarray) -> np.ndarray:
    if evals.size and evals.min() < -EIG_TOL:
        raise ArithmeticError(f"reduced density matrix has eigenvalue {evals.min()!r} < 0")
    return np.clip(evals, 0.0, None)


def schmidt_spectrum(s: PureState, partition: SystemPartition) -> np.ndarray:
    """Eigenvalues of whichever reduced density matrix is smaller; same nonzero spectrum for A and B."""
    m = s.matrix(partition)
    gram = m @ m.conj().T if partition.n_a <= partition.n_b else m.conj().T @ m
    return _clamped_spectrum(np.linalg.eigvalsh(gram))


def _von_neumann(evals: np.ndarray) -> float:
    nz = evals[evals > 0]
    return float(-np.sum(nz * np.log(nz)))


def _renyi(evals: np.ndarray, order: int) -> float:
    if order < 2:
        raise ValueError(f"Renyi order must be an integer >= 2, got {order}")
    return float(math.log(np.sum(evals ** order)) / (1 - order))


def entanglement_entropy(rho_a: ReducedDensityMatrix) -> float:
    return _von_neumann(rho_a.eigenvalues())


def renyi_entropy(rho_a: ReducedDensityMatrix, order: int) -> float:
    return _renyi(rho_a.eigenvalues(), order)


def state_entropy(s: PureState, partition: SystemPartition) -> float:
    """Von Neumann entanglement entropy of a pure state across ``partition``."""
    return _von_neumann(schmidt_spectrum(s, partition))


def parallel_map(fn, n_items: int, workers: int = 1) -> np.ndarray:
    """``[fn(i) for i in range(n_items)]`` as a float array, optionally threaded.

    Output order is by index, so the result does not depend on ``workers``.
    """
    if workers <= 1:
        return np.array([fn(i) for i in range(n_items)], dtype=float)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(fn, range(n_items), chunksize=1)), dtype=float)


def summarize(values: np.ndarray, seed: int) -> McEstimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 2:
        raise ValueError("need at least two samples for an error bar")
    return McEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(n)), n, seed, values)


def monte_carlo_entropy(e: MaxEntEnsemble, partition: SystemPartition, samples: int,
                        seed: int, workers: int = 1) -> McEstimate:
    """Mean and standard error of the entanglement entropy over independent samples."""
    if samples < 2:
        raise ValueError("need at least two samples")
    if partition.n_total != e.n:
        raise ValueError("partition and ensemble disagree on N")

    def one(i: int) -> float:
        return state_entropy(sample_state(e, sample_rng(seed, i)), partition)

    return summarize(parallel_map(one, samples, workers), seed)


@dataclass(frozen=True)
class MixedStateCheck:
    max_offdiag: float
    max_diag_dev: float
    samples: int
    average: np.ndarray = field(repr=False)


def mixed_state_check(e: MaxEntEnsemble, samples: int, seed: int, batch: int = 256) -> MixedStateCheck:
    """Compare the sample average of ``|Psi><Psi|`` with ``diag(rho_n)``."""
    if e.n > 12:
        raise ValueError(f"dense D x D accumulation limited to N <= 12, got {e.n}")
    dim = e.dim
    acc = np.zeros((dim, dim), dtype=complex)
    for start in range(0, samples, batch):
        rows = np.stack([sample_state(e, sample_rng(seed, i)).amplitudes
                         for i in range(start, min(start + batch, samples))])
        acc += rows.T @ rows.conj()
    acc /= samples
    target = e.rho_sector[popcounts(e.n)]
    off = acc - np.diag(np.diag(acc))
    return MixedStateCheck(
        max_offdiag=float(np.abs(off).max()),
        max_diag_dev=float(np.abs(np.diag(acc).real - target).max()),
        samples=samples,
        average=acc,
    )
