"""Analytic and exact-sum entanglement entropy predictions.

All entropies are in nats.  ``average`` quantities refer to the entropy of
the ensemble-averaged reduced density matrix; fluctuation corrections are
only available for the microcanonical (single-sector) input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfcx

from .distributions import (
    ChargeDistribution,
    ReducedChargeDistribution,
    induced_subsystem_distribution,
    kl_divergence,
)
from .fock_space import LN2, ChargeValue, SpectralDensity, SystemPartition, spectral_density

DEFAULT_N_A_VALUES = tuple(2.0 ** -j for j in range(9, 0, -1))


def default_delta_grid(points: int = 200, lo: float = 0.05, hi: float = 4.0) -> np.ndarray:
    """Uniform grid on [lo, hi] with delta = 1 always included."""
    return np.unique(np.concatenate([np.linspace(lo, hi, points), [1.0]]))


@dataclass(frozen=True)
class GaussianParams:
    """Relative subsystem size, relative width and relative offset of a Gaussian input."""

    n_a: float
    delta: float
    kappa: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.n_a < 1.0:
            raise ValueError(f"n_a must lie in (0, 1), got {self.n_a}")
        if self.delta < 0 or self.kappa < 0:
            raise ValueError("delta and kappa must be nonnegative")

    @classmethod
    def from_distribution(cls, p: ChargeDistribution, partition: SystemPartition,
                          spectral: SpectralDensity) -> "GaussianParams":
        if p.kind != "gaussian":
            raise ValueError(f"expected a gaussian distribution, got {p.kind}")
        g = spectral.big_gamma
        return cls(partition.n_a / partition.n_total, p.params["delta_q"] / g, abs(p.params["q_bar"]) / g)


@dataclass(frozen=True)
class EntropyReport:
    """Entropy prediction with its decomposition.

    Terms set to ``None`` are not part of this prediction; ``total`` is the
    sum of the others.  ``methods`` records how each term was obtained.
    """

    s_thermal: float
    delta_s_average: float
    page_term: float | None = None
    wedge_term: float | None = None
    erfc_term: float | None = None
    methods: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(t for t in self.terms().values() if t is not None))

    @property
    def average(self) -> float:
        """Entropy of the averaged state, without fluctuation corrections."""
        return self.s_thermal + self.delta_s_average

    def terms(self) -> dict[str, float | None]:
        return {
            "s_thermal": self.s_thermal,
            "delta_s_average": self.delta_s_average,
            "page_term": self.page_term,
            "wedge_term": self.wedge_term,
            "erfc_term": self.erfc_term,
        }

    def as_dict(self) -> dict:
        out = dict(self.terms())
        out["total"] = self.total
        out["methods"] = dict(self.methods)
        return out


def delta_s_average_exact(p_a: ReducedChargeDistribution, spectral_a: SpectralDensity | None = None) -> float:
    """``-KL(p_A || Omega_A)``, the deficit of the averaged-state entropy below ``N_A ln 2``."""
    if spectral_a is None:
        spectral_a = spectral_density(p_a.n)
    if spectral_a.n != p_a.n:
        raise ValueError("reduced distribution and subsystem spectrum disagree on N_A")
    return -kl_divergence(p_a.log_table, spectral_a.log_omega)


def average_entropy_deficit(p: ChargeDistribution, partition: SystemPartition,
                            spectral: SpectralDensity | None = None) -> float:
    """Full pipeline p -> p_A -> Delta S^a for subsystem A."""
    spectral = spectral or spectral_density(p.n)
    return delta_s_average_exact(induced_subsystem_distribution(p, spectral, partition))


def delta_s_gaussian_closed_form(g: GaussianParams) -> float:
    arg = 1.0 + g.n_a * (g.delta ** 2 - 1.0)
    if arg <= 0:
        raise ValueError(
            f"log argument 1 + n_a (delta^2 - 1) = {arg} <= 0 "
            f"(need delta^2 > 1 - 1/n_a = {1 - 1 / g.n_a})"
        )
    return -0.5 * g.n_a * (g.delta ** 2 + g.kappa ** 2 - 1.0) + 0.5 * math.log(arg)


def figure1_sweep(n_a_list=DEFAULT_N_A_VALUES, delta_grid=None, kappa: float = 0.0) -> np.ndarray:
    """Rows ``(n_a, delta, kappa, delta_s)`` of the closed form, one curve per n_a."""
    if delta_grid is None:
        delta_grid = default_delta_grid()
    n_a = np.asarray(n_a_list, dtype=float)[:, None]
    delta = np.asarray(delta_grid, dtype=float)[None, :]
    if np.any(n_a <= 0) or np.any(n_a >= 1):
        raise ValueError("n_a values must lie in (0, 1)")
    if np.any(delta < 0) or kappa < 0:
        raise ValueError("delta and kappa must be nonnegative")
    arg = 1.0 + n_a * (delta ** 2 - 1.0)
    ds = -0.5 * n_a * (delta ** 2 + kappa ** 2 - 1.0) + 0.5 * np.log(arg)
    n_a_b, delta_b = np.broadcast_arrays(n_a, delta)
    return np.column_stack([n_a_b.ravel(), delta_b.ravel(), np.full(ds.size, kappa), ds.ravel()])


def crossover_delta(n_a: float) -> float:
    """Width beyond which broadening reduces the entropy more than a sharp input does.

    Solves ``Delta S^a(delta) = Delta S^a(0)`` for ``delta > 1``; tends to
    sqrt(2) as ``n_a -> 0``.
    """
    sharp = delta_s_gaussian_closed_form(GaussianParams(n_a, 0.0))
    f = lambda d: delta_s_gaussian_closed_form(GaussianParams(n_a, d)) - sharp
    hi = 2.0
    while f(hi) > 0:
        hi *= 2
    return brentq(f, 1.0 + 1e-9, hi, xtol=1e-14)


def page_correction(d_a: int, d_b: int) -> float:
    """``-D_small / (2 D_large)``: Page's correction for the smaller subsystem."""
    if d_a < 1 or d_b < 1:
        raise ValueError("dimensions must be positive")
    return -min(d_a, d_b) / (2.0 * max(d_a, d_b))


def page_entropy(partition: SystemPartition) -> float:
    n_small = min(partition.n_a, partition.n_b)
    return n_small * LN2 + page_correction(partition.dim_a, partition.dim_b)


def narayana(r: int, k: int) -> int:
    if not 1 <= k <= r:
        raise ValueError(f"Narayana number N({r}, {k}) needs 1 <= k <= r")
    num = math.comb(r, k) * math.comb(r, k - 1)
    assert num % r == 0
    return num // r


def catalan(r: int) -> int:
    if r < 0:
        raise ValueError("Catalan index must be nonnegative")
    return math.comb(2 * r, r) // (r + 1)


def _as_k(q_bar, n: int) -> int:
    if isinstance(q_bar, ChargeValue):
        if q_bar.n != n:
            raise ValueError("charge value belongs to a different system size")
        return q_bar.k
    return ChargeValue.from_charge(q_bar, n).k


def microcanonical_entropy_with_fluctuations(q_bar, partition: SystemPartition,
                                             spectral: SpectralDensity | None = None) -> EntropyReport:
    """Entropy of single-sector random states from the branch-selected pairing sum.

    Each pair ``(Q_A, Q_B = Q_bar - Q_A)`` with sector dimensions ``F_A``,
    ``F_B`` contributes

        -(F_A F_B / F) ln(F_large / F) - F_small**2 / (2 F)

    where the larger of ``F_A``, ``F_B`` sets the branch (``F_B > F_A``
    strictly selects B as large, so ties count once).  ``q_bar`` is a
    :class:`ChargeValue` or the spin charge ``Q``.
    """
    n = partition.n_total
    spectral = spectral or spectral_density(n)
    k = _as_k(q_bar, n)
    n_a, n_b = partition.n_a, partition.n_b
    lo, hi = max(0, k - n_b), min(n_a, k)
    if lo > hi:
        raise ValueError(f"sector k={k} is empty")

    sa, sb = spectral_density(n_a), spectral_density(n_b)
    log_f = spectral.log_sector_dims[k]
    log_sum = 0.0
    half_sum = 0.0
    for ka in range(lo, hi + 1):
        kb = k - ka
        lfa = sa.log_sector_dims[ka]
        lfb = sb.log_sector_dims[kb]
        weight = math.exp(lfa + lfb - log_f)
        if math.comb(n_b, kb) > math.comb(n_a, ka):
            log_sum -= weight * (lfb - log_f)
            half_sum -= 0.5 * math.exp(2 * lfa - log_f)
        else:
            log_sum -= weight * (lfa - log_f)
            half_sum -= 0.5 * math.exp(2 * lfb - log_f)

    p = ChargeDistribution("microcanonical", n, _point_mass(n, k), {"q0": k - n / 2})
    ds_avg = average_entropy_deficit(p, partition, spectral)
    s_th = n_a * LN2
    return EntropyReport(
        s_thermal=s_th,
        delta_s_average=ds_avg,
        wedge_term=log_sum - (s_th + ds_avg),
        erfc_term=half_sum,
        methods={
            "delta_s_average": "exact_kl",
            "wedge_term": "exact_branch_sum",
            "erfc_term": "exact_branch_sum",
        },
    )


def _point_mass(n: int, k: int) -> np.ndarray:
    out = np.full(n + 1, -np.inf)
    out[k] = 0.0
    out.setflags(write=False)
    return out


def wedge_correction(q_bar_scaled: float, n: int, gamma: float = 0.5) -> float:
    """Equal-cut logarithmic correction ``-sqrt(N) |q| / (sqrt(2 pi) gamma)``, with ``q = Q / N``."""
    return -math.sqrt(n) * abs(q_bar_scaled) / (math.sqrt(2 * math.pi) * gamma)


def erfc_correction(q_bar_scaled: float, n: int, gamma: float = 0.5) -> float:
    """Equal-cut non-logarithmic correction ``-exp(x**2) erfc(x) / 2``, ``x = sqrt(N) |q| / (sqrt(2) gamma)``.

    Equals -1/2 at ``q = 0`` and approaches ``-gamma / (sqrt(2 pi N) q)``
    for large ``x``.
    """
    x = math.sqrt(n) * abs(q_bar_scaled) / (math.sqrt(2.0) * gamma)
    return -0.5 * float(erfcx(x))


def predicted_entropy(p: ChargeDistribution, partition: SystemPartition,
                      spectral: SpectralDensity | None = None) -> EntropyReport:
    """Best available prediction of the mean entanglement entropy for input ``p``.

    Microcanonical inputs use the branch-selected pairing sum.  Everything
    else uses the averaged-state entropy of the smaller subsystem, plus
    Page's correction when ``p`` is the native spectrum.
    """
    spectral = spectral or spectral_density(p.n)
    if p.kind == "microcanonical" or len(p.support) == 1:
        return microcanonical_entropy_with_fluctuations(ChargeValue(int(p.support[0]), p.n), partition, spectral)
    small = partition if partition.n_a <= partition.n_b else partition.swapped()
    ds = average_entropy_deficit(p, small, spectral)
    methods = {"delta_s_average": "exact_kl_smaller_side"}
    page = None
    if p.kind == "spectral" or _is_native(p, spectral):
        page = page_correction(small.dim_a, small.dim_b)
        methods["page_term"] = "page"
    return EntropyReport(s_thermal=small.n_a * LN2, delta_s_average=ds, page_term=page, methods=methods)


def _is_native(p: ChargeDistribution, spectral: SpectralDensity, tol: float = 1e-12) -> bool:
    return bool(np.allclose(p.table, spectral.omega, rtol=0, atol=tol))
