"""Input charge distributions p(Q) and the distribution they induce on a subsystem."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .fock_space import SpectralDensity, SystemPartition, spectral_density, log_binomial

KINDS = ("gaussian", "microcanonical", "flat", "cat_product", "tabulated", "spectral")

NORM_TOL = 1e-12


@dataclass(frozen=True)
class ChargeDistribution:
    """Normalized weights over the ``n + 1`` charge sectors of ``n`` qubits.

    The log-weights are authoritative so that narrow distributions on large
    systems keep their tails; ``table`` is their exponential.
    """

    kind: str
    n: int
    log_table: np.ndarray = field(repr=False)
    params: dict = field(default_factory=dict)

    @property
    def table(self) -> np.ndarray:
        return np.exp(self.log_table)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(np.isfinite(self.log_table))

    def mean_q(self) -> float:
        q = np.arange(self.n + 1) - self.n / 2
        return float(np.sum(self.table * q))

    def std_q(self) -> float:
        q = np.arange(self.n + 1) - self.n / 2
        w = self.table
        mu = np.sum(w * q)
        return float(math.sqrt(np.sum(w * (q - mu) ** 2)))

    def describe(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}({inner})"


@dataclass(frozen=True)
class ReducedChargeDistribution:
    partition: SystemPartition
    log_table: np.ndarray = field(repr=False)

    @property
    def table(self) -> np.ndarray:
        return np.exp(self.log_table)

    @property
    def n(self) -> int:
        return self.partition.n_a


def _normalized(log_w: np.ndarray) -> np.ndarray:
    log_w = np.asarray(log_w, dtype=float)
    if not np.any(np.isfinite(log_w)):
        raise ValueError("distribution has no weight on any sector")
    out = log_w - logsumexp(log_w)
    out.setflags(write=False)
    return out


def _log(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(w)


def gaussian(spectral: SpectralDensity, q_bar: float, delta_q: float) -> ChargeDistribution:
    """Normal density in Q evaluated at the sector charges and renormalized."""
    if not delta_q > 0:
        raise ValueError(f"width must be positive, got {delta_q}")
    q = spectral.q_values
    log_w = -0.5 * ((q - q_bar) / delta_q) ** 2
    return ChargeDistribution("gaussian", spectral.n, _normalized(log_w),
                              {"q_bar": float(q_bar), "delta_q": float(delta_q)})


def microcanonical(spectral: SpectralDensity, q0: float) -> ChargeDistribution:
    k0 = q0 + spectral.n / 2
    if abs(k0 - round(k0)) > 1e-9 or not 0 <= round(k0) <= spectral.n:
        raise ValueError(f"Q0={q0} is not a charge sector of {spectral.n} qubits")
    log_w = np.full(spectral.n + 1, -np.inf)
    log_w[int(round(k0))] = 0.0
    return ChargeDistribution("microcanonical", spectral.n, _normalized(log_w), {"q0": float(q0)})


def flat(spectral: SpectralDensity) -> ChargeDistribution:
    """Uniform over the ``n + 1`` sectors (not over states)."""
    return ChargeDistribution("flat", spectral.n, _normalized(np.zeros(spectral.n + 1)))


def cat_product(spectral: SpectralDensity, blocks: int, block_size: int) -> ChargeDistribution:
    """Charge distribution of a product of ``blocks`` cat states on ``block_size`` spins each.

    ``a`` blocks pointing up give ``k = a * block_size`` with weight ``C(M, a) / 2**M``.
    """
    if blocks < 1 or block_size < 1 or blocks * block_size != spectral.n:
        raise ValueError(f"blocks*block_size must equal N={spectral.n}, got {blocks}*{block_size}")
    a = np.arange(blocks + 1)
    log_w = np.full(spectral.n + 1, -np.inf)
    log_w[a * block_size] = log_binomial(blocks, a) - blocks * math.log(2.0)
    return ChargeDistribution("cat_product", spectral.n, _normalized(log_w),
                              {"blocks": blocks, "block_size": block_size})


def tabulated(spectral: SpectralDensity, weights) -> ChargeDistribution:
    w = np.asarray(weights, dtype=float)
    if w.shape != (spectral.n + 1,):
        raise ValueError(f"expected {spectral.n + 1} weights for N={spectral.n}, got shape {w.shape}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    return ChargeDistribution("tabulated", spectral.n, _normalized(_log(w)))


def native(spectral: SpectralDensity) -> ChargeDistribution:
    """p = Omega: no conditioning beyond the spectrum itself."""
    return ChargeDistribution("spectral", spectral.n, _normalized(spectral.log_omega))


def discretize(kind: str, spectral: SpectralDensity, **params) -> ChargeDistribution:
    """Build a distribution of the named kind on ``spectral``'s sectors.

    ``gaussian`` takes ``q_bar`` and ``delta_q``; ``microcanonical`` takes
    ``q0``; ``cat_product`` takes ``blocks`` and ``block_size``;
    ``tabulated`` takes ``weights``.
    """
    builders = {
        "gaussian": gaussian,
        "microcanonical": microcanonical,
        "flat": flat,
        "cat_product": cat_product,
        "tabulated": tabulated,
        "spectral": native,
    }
    if kind not in builders:
        raise ValueError(f"unknown distribution kind {kind!r}; expected one of {KINDS}")
    return builders[kind](spectral, **params)


def load_tabulated(path) -> ChargeDistribution:
    """Read ``{"n": N, "weights": [w_0, ..., w_N]}`` (weights over excitation counts)."""
    doc = json.loads(Path(path).read_text())
    try:
        n = int(doc["n"])
        weights = doc["weights"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: expected keys 'n' and 'weights'") from exc
    return tabulated(spectral_density(n), weights)


def dump_tabulated(p: ChargeDistribution, path) -> None:
    Path(path).write_text(json.dumps({"n": p.n, "weights": p.table.tolist()}))


def induced_log_matrix(p: ChargeDistribution, spectral: SpectralDensity,
                       partition: SystemPartition) -> np.ndarray:
    """``ln[Omega_A(k_a) Omega_B(k_b) p(k_a + k_b) / Omega(k_a + k_b)]`` on the (k_a, k_b) grid.

    Row sums give p_A, column sums p_B.
    """
    if p.n != spectral.n or partition.n_total != spectral.n:
        raise ValueError("distribution, spectrum and partition disagree on N")
    sa = spectral_density(partition.n_a)
    sb = spectral_density(partition.n_b)
    ka = np.arange(partition.n_a + 1)[:, None]
    kb = np.arange(partition.n_b + 1)[None, :]
    k = ka + kb
    with np.errstate(invalid="ignore"):
        return sa.log_omega[ka] + sb.log_omega[kb] + p.log_table[k] - spectral.log_omega[k]


def induced_subsystem_distribution(p: ChargeDistribution, spectral: SpectralDensity,
                                   partition: SystemPartition) -> ReducedChargeDistribution:
    """Charge distribution imprinted on subsystem A by the maximum-entropy ensemble.

    Exact double sum over sectors carried out in log space.  The result is
    not renormalized: unit weight follows from Vandermonde's identity and is
    checked here.
    """
    log_pa = logsumexp(induced_log_matrix(p, spectral, partition), axis=1)
    total = float(np.exp(logsumexp(log_pa)))
    if abs(total - 1.0) > 1e-9:
        raise ArithmeticError(f"induced distribution has weight {total!r}, expected 1")
    log_pa.setflags(write=False)
    return ReducedChargeDistribution(partition, log_pa)


def induced_gaussian_params(p: ChargeDistribution, partition: SystemPartition,
                            spectral: SpectralDensity) -> tuple[float, float]:
    """Center and width Lambda of the Gaussian surrogate for p_A.

    The surrogate is ``p_A(Q_A) ~ (N/N_A) Normal(Q_A N / N_A; Q_bar, Lambda)``
    with ``Lambda**2 = Gamma**2 N_B / N_A + dQ**2``.
    """
    if p.kind != "gaussian":
        raise ValueError(f"Gaussian surrogate needs a gaussian distribution, got {p.kind}")
    big_gamma2 = spectral.big_gamma ** 2
    lam2 = big_gamma2 * partition.n_b / partition.n_a + p.params["delta_q"] ** 2
    return p.params["q_bar"], math.sqrt(lam2)


def kl_divergence(log_p: np.ndarray, log_q: np.ndarray) -> float:
    """``sum p ln(p/q)`` from log-weights, with ``0 ln 0 = 0``."""
    log_p = np.asarray(log_p)
    mask = np.isfinite(log_p)
    if np.any(~np.isfinite(np.asarray(log_q)[mask])):
        return math.inf
    p = np.exp(log_p[mask])
    return float(np.sum(p * (log_p[mask] - np.asarray(log_q)[mask])))


def input_information(p: ChargeDistribution, spectral: SpectralDensity) -> float:
    """``sum_Q p ln(p / Omega)``: the information put in by choosing p over Omega."""
    if p.n != spectral.n:
        raise ValueError("distribution and spectrum disagree on N")
    return kl_divergence(p.log_table, spectral.log_omega)
