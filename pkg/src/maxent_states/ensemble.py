"""Maximum-entropy pure-state ensemble for a prescribed charge distribution.

Amplitudes are independent complex Gaussians whose variance depends only on
the charge sector: ``rho(Q) = p(Q) / (D Omega(Q))``.  Everything here is
stored per sector (length ``N + 1``); per-state arrays are only built by the
sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import ChargeDistribution
from .fock_space import SpectralDensity


@dataclass(frozen=True)
class MaxEntEnsemble:
    p: ChargeDistribution
    spectral: SpectralDensity
    log_rho: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.spectral.n

    @property
    def dim(self) -> int:
        return self.spectral.dim

    @property
    def rho_sector(self) -> np.ndarray:
        """Per-state variance ``<|Psi_n|^2>`` for a state in each sector."""
        return np.exp(self.log_rho)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(np.isfinite(self.log_rho))

    @property
    def lambda0(self) -> float:
        # Only lambda0 + lambda(Q) is fixed; lambda0 = D makes lambda(Q) vanish for p = Omega.
        return float(self.dim)

    @property
    def multipliers(self) -> dict[int, float]:
        """``lambda0 + lambda(Q_k)`` on the support of p; sectors without weight are absent."""
        return {int(k): math.exp(-self.log_rho[k]) for k in self.support}

    @property
    def lambdas(self) -> dict[int, float]:
        return {k: total - self.lambda0 for k, total in self.multipliers.items()}

    def sector_weights(self) -> np.ndarray:
        """``D Omega(Q) rho(Q)``, which reproduces p."""
        with np.errstate(invalid="ignore"):
            return np.exp(self.spectral.log_sector_dims + self.log_rho)

    def normalization_residual(self) -> float:
        """``sum_Q D Omega(Q) / (lambda0 + lambda(Q)) - 1``."""
        return float(np.sum(self.sector_weights()) - 1.0)


def build_ensemble(p: ChargeDistribution, spectral: SpectralDensity) -> MaxEntEnsemble:
    if p.n != spectral.n:
        raise ValueError(f"distribution is for N={p.n} but spectrum for N={spectral.n}")
    log_rho = p.log_table - spectral.log_sector_dims
    log_rho.setflags(write=False)
    return MaxEntEnsemble(p, spectral, log_rho)


def ensemble_entropy(e: MaxEntEnsemble) -> float:
    """Shannon entropy of the average Fock-space weights, ``-sum_n rho_n ln rho_n``."""
    mask = np.isfinite(e.log_rho)
    w = np.exp(e.p.log_table[mask])
    return float(-np.sum(w * e.log_rho[mask]))
