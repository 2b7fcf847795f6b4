"""Cat-product state preparation and charge-conserving scrambling.

Chaotic, S_z-conserving dynamics is modeled either by its fixed point, an
independent Haar unitary on every total-charge sector, or by a finite
brickwork circuit of random two-qubit gates that commute with S_z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import cat_product, induced_subsystem_distribution
from .entropy import delta_s_average_exact, page_entropy, predicted_entropy
from .fock_space import LN2, SystemPartition, popcounts, spectral_density
from .sampler import (
    McEstimate,
    PureState,
    measure_charge_distribution,
    parallel_map,
    sample_rng,
    state_entropy,
    summarize,
)

MODES = ("per_sector_haar", "brickwork_conserving")


@dataclass(frozen=True)
class CatProductSpec:
    blocks: int
    block_size: int

    def __post_init__(self):
        if self.blocks < 1 or self.block_size < 1:
            raise ValueError("blocks and block_size must be positive")

    @property
    def n(self) -> int:
        return self.blocks * self.block_size

    def width(self) -> float:
        """Standard deviation of S_z in the cat product, ``L sqrt(M) / 2``."""
        return self.block_size * math.sqrt(self.blocks) / 2


@dataclass(frozen=True)
class ScrambleSpec:
    mode: str = "per_sector_haar"
    steps: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown scramble mode {self.mode!r}; expected one of {MODES}")
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")


def cat_product_state(spec: CatProductSpec, n: int | None = None) -> PureState:
    """Product of ``M`` cat states ``(|up..up> + |dn..dn>)/sqrt(2)``, block j on bits ``[jL, (j+1)L)``."""
    if n is not None and n != spec.n:
        raise ValueError(f"blocks*block_size = {spec.n} does not match N = {n}")
    block_mask = (1 << spec.block_size) - 1
    amps = np.zeros(1 << spec.n, dtype=complex)
    for pattern in range(1 << spec.blocks):
        idx = 0
        for j in range(spec.blocks):
            if pattern >> j & 1:
                idx |= block_mask << (j * spec.block_size)
        amps[idx] = 2.0 ** (-spec.blocks / 2)
    return PureState(amps)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def sector_indices(n: int) -> list[np.ndarray]:
    pc = popcounts(n)
    order = np.argsort(pc, kind="stable")
    bounds = np.searchsorted(pc[order], np.arange(n + 2))
    return [order[bounds[k]:bounds[k + 1]] for k in range(n + 1)]


def _haar_rotate(block: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # For a single vector v, U v with Haar U is uniform on the sphere of radius |v|.
    if block.size == 1:
        return block * np.exp(2j * math.pi * rng.random())
    g = rng.standard_normal(block.size) + 1j * rng.standard_normal(block.size)
    return g * (np.linalg.norm(block) / np.linalg.norm(g))


def conserving_gate(rng: np.random.Generator) -> np.ndarray:
    """Random 4x4 gate on basis (00, 01, 10, 11): phases on 00 and 11, Haar U(2) on {01, 10}."""
    g = np.zeros((4, 4), dtype=complex)
    phases = np.exp(2j * math.pi * rng.random(2))
    g[0, 0], g[3, 3] = phases
    g[1:3, 1:3] = haar_unitary(2, rng)
    return g


def _apply_two_qubit(psi: np.ndarray, gate: np.ndarray, n: int, bit: int) -> np.ndarray:
    """Apply ``gate`` to bits ``bit + 1`` (high) and ``bit`` (low)."""
    t = psi.reshape(1 << (n - bit - 2), 4, 1 << bit)
    return np.einsum("ij,ajb->aib", gate, t).reshape(-1)


def brickwork_layers(n: int, steps: int, rng: np.random.Generator):
    """Yield ``(bit, gate)`` pairs: even bonds then odd bonds, ``steps`` times."""
    for _ in range(steps):
        for parity in (0, 1):
            for bit in range(parity, n - 1, 2):
                yield bit, conserving_gate(rng)


def scramble(s: PureState, spec: ScrambleSpec) -> PureState:
    rng = sample_rng(spec.seed)
    n = s.n
    amps = s.amplitudes.copy()
    if spec.mode == "per_sector_haar":
        for idx in sector_indices(n):
            amps[idx] = _haar_rotate(amps[idx], rng)
    else:
        for bit, gate in brickwork_layers(n, spec.steps, rng):
            amps = _apply_two_qubit(amps, gate, n, bit)
    # Unitary up to rounding; renormalize only the last ulp.
    return PureState(amps / np.linalg.norm(amps))


def brickwork_unitary(n: int, steps: int, seed: int) -> np.ndarray:
    """Dense matrix of the brickwork circuit ``scramble`` applies for the same seed."""
    rng = sample_rng(seed)
    u = np.eye(1 << n, dtype=complex)
    for bit, gate in brickwork_layers(n, steps, rng):
        u = np.stack([_apply_two_qubit(u[:, j], gate, n, bit) for j in range(1 << n)], axis=1)
    return u


@dataclass(frozen=True)
class EthComparison:
    spec: CatProductSpec
    cut: SystemPartition
    measured: McEstimate
    prediction: float
    average_prediction: float
    page_value: float
    initial_entropy: float
    charge_residual: float
    p_table: np.ndarray

    def as_dict(self) -> dict:
        return {
            "blocks": self.spec.blocks,
            "block_size": self.spec.block_size,
            "n": self.spec.n,
            "n_a": self.cut.n_a,
            "trials": self.measured.samples,
            "seed": self.measured.seed,
            "measured_mean": self.measured.mean,
            "measured_stderr": self.measured.stderr,
            "prediction": self.prediction,
            "average_prediction": self.average_prediction,
            "page_value": self.page_value,
            "initial_entropy": self.initial_entropy,
            "charge_residual": self.charge_residual,
        }


def eth_deviation_experiment(spec: CatProductSpec, cut: SystemPartition, trials: int, seed: int,
                             mode: str = "per_sector_haar", steps: int = 0,
                             workers: int = 1) -> EthComparison:
    """Scramble a cat product ``trials`` times and compare its entanglement with the maxent prediction."""
    if cut.n_total != spec.n:
        raise ValueError(f"cut is for {cut.n_total} qubits, cat product has {spec.n}")
    spectral = spectral_density(spec.n)
    p = cat_product(spectral, spec.blocks, spec.block_size)
    psi0 = cat_product_state(spec)
    q0 = measure_charge_distribution(psi0)

    residuals = np.zeros(trials)

    def one(i: int) -> float:
        out = scramble(psi0, ScrambleSpec(mode, steps, _trial_seed(seed, i)))
        residuals[i] = np.abs(measure_charge_distribution(out) - q0).max()
        return state_entropy(out, cut)

    measured = summarize(parallel_map(one, trials, workers), seed)
    report = predicted_entropy(p, cut, spectral)
    small = cut if cut.n_a <= cut.n_b else cut.swapped()
    p_a = induced_subsystem_distribution(p, spectral, small)
    return EthComparison(
        spec=spec,
        cut=cut,
        measured=measured,
        prediction=report.total,
        average_prediction=small.n_a * LN2 + delta_s_average_exact(p_a),
        page_value=page_entropy(cut),
        initial_entropy=state_entropy(psi0, cut),
        charge_residual=float(residuals.max()) if trials else 0.0,
        p_table=p.table,
    )


def _trial_seed(seed: int, i: int) -> int:
    # Scramble seeds are plain ints so a single trial can be replayed from the CLI.
    return int(np.random.SeedSequence(seed, spawn_key=(i,)).generate_state(1, np.uint64)[0])
