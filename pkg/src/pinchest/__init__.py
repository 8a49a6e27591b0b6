"""Channel estimation simulator for pinching-antenna systems.

Library layout:

- waveguide: in-waveguide transfer vectors and radiation power models
- channel: stochastic wireless channel between a UE and the PA array
- activation: serial / S-matrix / Hadamard activation matrices and
  observation matrices
- estimation: least-squares estimation, closed-form MSE, conditioning and
  measurement-SNR diagnostics
- experiments: seeded Monte Carlo sweeps behind the bundled CLI
- report: CSV and SVG artifact writers
"""

from .activation import (
    ActivationMatrix,
    ObservationMatrix,
    active_set,
    gram_crosstalk,
    hadamard,
    observation_matrix,
    s_matrix,
    serial_activation,
)
from .channel import (
    DeploymentRegion,
    ScattererSet,
    UePlacement,
    free_space_reference,
    los_component,
    nlos_component,
    sample_channel,
    visibility_vector,
)
from .config import ExperimentConfig, build_config, config_digest
from .errors import ConfigError, PinchestError, SingularSystemError
from .estimation import (
    EstimationReport,
    condition_bound_check,
    condition_number,
    downlink_snr,
    estimation_report,
    ls_estimate,
    mse_closed_form,
    nmse,
    uplink_parallel_snr,
    uplink_serial_snr,
)
from .experiments import (
    EstimationScenario,
    ExperimentResult,
    McPoint,
    monte_carlo_nmse,
    run_downlink_nmse_vs_snr,
    run_nmse_vs_beta,
    run_power_profile,
    run_uplink_nmse_vs_snr,
)
from .waveguide import (
    CouplingSpec,
    WaveguideLayout,
    downlink_transfer,
    equalize_radiation,
    ideal_transfer,
    pa_power_profile,
    parallel_transfer,
    serial_transfer,
)

__version__ = "0.1.0"
