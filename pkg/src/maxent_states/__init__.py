"""Maximum-entropy pure-state ensembles conditioned on a conserved-charge distribution."""

__version__ = "0.1.0"

from .fock_space import (
    ChargeValue,
    SpectralDensity,
    SystemPartition,
    charge_of,
    join_index,
    spectral_density,
    split_index,
)
from .distributions import (
    ChargeDistribution,
    ReducedChargeDistribution,
    discretize,
    induced_gaussian_params,
    induced_subsystem_distribution,
    input_information,
    load_tabulated,
)
from .ensemble import MaxEntEnsemble, build_ensemble, ensemble_entropy
from .entropy import (
    EntropyReport,
    GaussianParams,
    delta_s_average_exact,
    delta_s_gaussian_closed_form,
    erfc_correction,
    figure1_sweep,
    microcanonical_entropy_with_fluctuations,
    narayana,
    page_correction,
    predicted_entropy,
    wedge_correction,
)
from .sampler import (
    McEstimate,
    PureState,
    ReducedDensityMatrix,
    entanglement_entropy,
    measure_charge_distribution,
    mixed_state_check,
    monte_carlo_entropy,
    reduced_density_matrix,
    renyi_entropy,
    sample_state,
)
from .scramble import CatProductSpec, ScrambleSpec, cat_product_state, eth_deviation_experiment, scramble
