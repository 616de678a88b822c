"""Loschmidt echo and disentanglement of qubits locally coupled to an XY chain.

The pipeline: a ``ChainSpec`` plus qubit labels selects an effective
quadratic fermion Hamiltonian; its canonical quasiparticle basis, the
Bogoliubov map to the unperturbed basis, and a determinant per time point
give the echo; closed forms map the echo to two-qubit purity, negativity,
and sudden-death events; envelope and sweep tools extract revival trends.
Brute-force Fock- and spin-space oracles validate everything at small sizes.
"""

__version__ = "0.1.0"

from .analysis import (
    Envelope,
    FitResult,
    RevivalRecord,
    SweepPoint,
    SweepResult,
    detect_revival,
    extract_envelope,
    fit_exponential,
    fit_linear,
    fit_power,
    select_model,
    sweep_distance,
    sweep_lambda,
)
from .bogoliubov import BogoliubovMap, compose, connect, mode_populations
from .chain import (
    ChainSpec,
    DiagonalizationError,
    EigenBasis,
    QuadraticForm,
    QubitLabels,
    analytic_spectrum,
    build_effective_fields,
    build_quadratic_form,
    diagonalize,
)
from .echo import (
    EchoQualityError,
    EchoSeries,
    TimeGrid,
    default_grid,
    echo_at,
    echo_series,
    fingerprint,
    limit_check_independent,
    limit_check_same_site,
    single_qubit_echo,
)
from .entanglement import (
    EntanglementReport,
    SystemState,
    density_matrix,
    detect_events,
    entanglement_report,
    negativity,
    negativity_from_matrix,
    partial_transpose,
    purity,
    purity_from_matrix,
    signed_negativity,
    sudden_death_threshold,
)

__all__ = [
    "__version__",
    "ChainSpec",
    "QubitLabels",
    "QuadraticForm",
    "EigenBasis",
    "DiagonalizationError",
    "build_effective_fields",
    "build_quadratic_form",
    "diagonalize",
    "analytic_spectrum",
    "BogoliubovMap",
    "connect",
    "compose",
    "mode_populations",
    "TimeGrid",
    "EchoSeries",
    "EchoQualityError",
    "fingerprint",
    "echo_at",
    "echo_series",
    "single_qubit_echo",
    "default_grid",
    "limit_check_same_site",
    "limit_check_independent",
    "SystemState",
    "EntanglementReport",
    "purity",
    "negativity",
    "signed_negativity",
    "sudden_death_threshold",
    "detect_events",
    "entanglement_report",
    "density_matrix",
    "partial_transpose",
    "purity_from_matrix",
    "negativity_from_matrix",
    "Envelope",
    "RevivalRecord",
    "FitResult",
    "SweepPoint",
    "SweepResult",
    "extract_envelope",
    "detect_revival",
    "fit_linear",
    "fit_power",
    "fit_exponential",
    "select_model",
    "sweep_distance",
    "sweep_lambda",
]
