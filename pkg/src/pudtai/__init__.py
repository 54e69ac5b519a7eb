"""Simulator and analysis toolkit for pulse-division time-axis-inversion spectroscopy."""

__version__ = "0.1.0"

from .estimate import CountRecord, EstimatorReport, bootstrap, improvement_ratio, mle_pudtai, mle_qmti, sample_counts
from .estimators import PudtaiSeparationEstimator, QmtiSeparationEstimator
from .fisher import (
    FisherCurve,
    QmtiNoiseModel,
    SpectrometerSpec,
    aperture_flux_efficiencies,
    di_spectrometer_s,
    f_pudtai,
    f_sliver,
    fi_density,
    fisher_di,
    fisher_numeric,
    qfi,
    s_factor,
    s_pudtai_closed_form,
)
from .model import DeviceCalibration, PortProbabilities, aux_f, port_distributions, port_probabilities
from .phasespace import PhaseProfile, WignerGrid, apply_phase, coordinate_map, wigner, wigner_shear_check
from .processor import PortAmplitudes, ProcessorParams, pudtai_pipeline, pudtai_ports_ideal, qmti_spectrum
from .signals import (
    ApertureSpec,
    GaussianParams,
    SampledField,
    TwoSourceSpec,
    apply_aperture,
    gaussian_spectrum,
    hermite_gauss1_spectrum,
    synthesize_two_source,
)
