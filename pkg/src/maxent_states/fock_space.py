"""Fock-space bookkeeping for N qubits with conserved total S_z.

Charges are handled internally as excitation counts ``k`` (number of up
spins).  The half-integer charge ``Q = k - N/2`` only appears at the
presentation boundary.

Bit convention: subsystem A owns the ``n_a`` most significant bits of a
basis index, B the ``n_b`` least significant ones, so ``n = a * D_B + b``
and a state vector reshaped to ``(D_A, D_B)`` in C order is the bipartite
amplitude matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

LN2 = math.log(2.0)

# Exact integer multiplicities are kept up to this size; beyond it only
# the log-space table is authoritative.
EXACT_MAX_N = 60
# Up to here Omega_k = C(N, k) / 2**N is a normal double, obtained by
# correctly rounded big-integer division before taking the log.
EXACT_LOG_MAX_N = 1000


@dataclass(frozen=True)
class SystemPartition:
    """Bipartition of N qubits into A (high bits) and B (low bits)."""

    n_total: int
    n_a: int

    def __post_init__(self):
        if self.n_total < 2:
            raise ValueError(f"need at least 2 qubits for a bipartition, got {self.n_total}")
        if not 1 <= self.n_a <= self.n_total - 1:
            raise ValueError(f"n_a must lie in [1, {self.n_total - 1}], got {self.n_a}")

    @property
    def n_b(self) -> int:
        return self.n_total - self.n_a

    @property
    def dim(self) -> int:
        return 1 << self.n_total

    @property
    def dim_a(self) -> int:
        return 1 << self.n_a

    @property
    def dim_b(self) -> int:
        return 1 << self.n_b

    def swapped(self) -> "SystemPartition":
        return SystemPartition(self.n_total, self.n_b)


@dataclass(frozen=True)
class ChargeValue:
    """Excitation count ``k`` of an ``n``-qubit state and its spin charge."""

    k: int
    n: int

    def __post_init__(self):
        if not 0 <= self.k <= self.n:
            raise ValueError(f"excitation count {self.k} outside [0, {self.n}]")

    @property
    def q_value(self) -> float:
        return self.k - self.n / 2

    @property
    def q_scaled(self) -> float:
        """Charge per site, ``Q / N``."""
        return self.q_value / self.n

    @classmethod
    def from_charge(cls, q_value: float, n: int) -> "ChargeValue":
        k = q_value + n / 2
        if abs(k - round(k)) > 1e-9:
            raise ValueError(f"Q={q_value} is not a charge sector of {n} qubits")
        return cls(int(round(k)), n)


def charge_of(basis_index: int, n: int) -> ChargeValue:
    """Charge of a product basis state (population count of its bits)."""
    if not 0 <= basis_index < (1 << n):
        raise ValueError(f"basis index {basis_index} out of range for {n} qubits")
    return ChargeValue(int(basis_index).bit_count(), n)


def split_index(basis_index: int, partition: SystemPartition) -> tuple[int, int]:
    if not 0 <= basis_index < partition.dim:
        raise ValueError(f"basis index {basis_index} out of range for {partition.n_total} qubits")
    return basis_index >> partition.n_b, basis_index & (partition.dim_b - 1)


def join_index(a: int, b: int, partition: SystemPartition) -> int:
    if not (0 <= a < partition.dim_a and 0 <= b < partition.dim_b):
        raise ValueError(f"subsystem indices ({a}, {b}) out of range")
    return (a << partition.n_b) | b


@lru_cache(maxsize=32)
def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        counts += (idx >> bit) & 1
    counts.setflags(write=False)
    return counts


def popcounts(n: int) -> np.ndarray:
    """Read-only array of excitation counts for all ``2**n`` basis states."""
    return _popcounts(n)


def log_binomial(n: int, k) -> np.ndarray:
    """``ln C(n, k)`` elementwise; ``-inf`` outside ``0 <= k <= n``."""
    k = np.asarray(k)
    out = np.full(k.shape, -np.inf)
    ok = (k >= 0) & (k <= n)
    kk = k[ok].astype(float)
    out[ok] = gammaln(n + 1.0) - gammaln(kk + 1.0) - gammaln(n - kk + 1.0)
    return out


@dataclass(frozen=True)
class SpectralDensity:
    """Discrete charge spectrum of N qubits.

    ``log_omega[k] = ln(C(N, k) / 2**N)``.  For ``N <= 60`` the exact
    integer multiplicities ``C(N, k)`` are kept alongside.
    """

    n: int
    log_omega: np.ndarray = field(repr=False)
    multiplicities: tuple[int, ...] | None = field(default=None, repr=False)
    gamma: float = 0.5

    @property
    def big_gamma(self) -> float:
        return math.sqrt(self.n) * self.gamma

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def k_values(self) -> np.ndarray:
        return np.arange(self.n + 1)

    @property
    def q_values(self) -> np.ndarray:
        return self.k_values - self.n / 2

    @property
    def omega(self) -> np.ndarray:
        return np.exp(self.log_omega)

    @property
    def log_sector_dims(self) -> np.ndarray:
        """``ln(D * Omega)``, the log of each sector's dimension."""
        return self.log_omega + self.n * LN2

    def sector_dim(self, k: int) -> int:
        if self.multiplicities is not None:
            return self.multiplicities[k]
        return math.comb(self.n, k)

    def log_total(self) -> float:
        """``ln sum_k Omega_k``; zero up to rounding."""
        return float(logsumexp(self.log_omega))


@lru_cache(maxsize=256)
def spectral_density(n: int) -> SpectralDensity:
    if n < 1:
        raise ValueError(f"need at least one qubit, got {n}")
    if n <= EXACT_LOG_MAX_N:
        exact = [math.comb(n, k) for k in range(n + 1)]
        log_omega = np.array([math.log(m / (1 << n)) for m in exact])
        mult = tuple(exact) if n <= EXACT_MAX_N else None
    else:
        mult = None
        log_omega = log_binomial(n, np.arange(n + 1)) - n * LN2
    log_omega.setflags(write=False)
    return SpectralDensity(n=n, log_omega=log_omega, multiplicities=mult)
