"""Gaussian simulation of PSA-assisted homodyne measurement of CV entanglement."""
from .gaussian_core import (
    GainParam,
    GaussianState,
    LossChannel,
    QuadratureSelector,
    apply_beamsplitter,
    apply_degenerate_psa,
    apply_loss,
    apply_nondegenerate_psa,
    apply_phase,
    apply_two_mode_pa,
    mean_photon_number,
    check_physicality,
    linear_combo_variance,
    quad_variance,
    vacuum_state,
)
from .measurement import (
    BHDConfig,
    CombinerConfig,
    IntensityReading,
    bhd_variance,
    degenerate_psa_intensity,
    joint_bhd_variance,
    nondegenerate_psa_intensity,
    snl_of,
)
from .metrics import (
    MeasurementReport,
    SchemeSpec,
    SourceSpec,
    psa_joint_metrics,
    psa_power_detector_metrics,
    psa_single_bhd_metrics,
    psa_single_bhd_phase_scan,
    source_metrics,
    traditional_metrics,
)

__version__ = "0.1.0"
