"""Randomized uplink pilot training against spoofing and jamming attacks.

A multi-antenna base station that randomizes its user's pilot choice can
detect an eavesdropper's training-phase attack, identify the legitimate
pilot, estimate both channels, and beamform the downlink securely.  This
package provides the full chain as composable pieces plus a Monte Carlo
harness and analytic error-rate evaluators.
"""

from .analysis import (
    EdrReport,
    edr12_analytic,
    edr22_power_analytic,
    edr_upper_approx,
    pf_pja_bound,
    pf_psa_bound,
)
from .attacks import AttackConfig, AttackRealization, no_attack, pja_attack, psa_attack
from .beamforming import (
    Beamformer,
    DownlinkParams,
    link_rates,
    matched_filter as matched_filter_beam,
    sb_lowcomplexity,
    sb_optimal,
    secrecy_rate,
    zf_pja,
)
from .channel import (
    CovarianceModel,
    PowerAzimuthSpectrum,
    covariance_from_pas,
    identity_covariance,
    pas_from_degrees,
    steering_vector,
)
from .detection import (
    AttackState,
    DetectionOutcome,
    Hypothesis,
    ThresholdSpec,
    detect_spoof_presence,
    gllr_k2,
    identify_lu_pja,
    identify_lu_psa,
    llr_k1,
    min_phase_distance,
    min_scale_distance,
    pja_threshold,
    power_test,
    psa_threshold,
    resolve_unknown_k,
)
from .errors import (
    ConfigError,
    DimensionError,
    NotPSDError,
    PilotsecError,
    SingularMatrixError,
    TooFewObservationsError,
    TruncationFailure,
)
from .estimation import (
    ChannelEstimate,
    combine_eve_obs,
    eve_direction_pja,
    lmmse_hl_pja,
    mmse_he_psa_multi,
    mmse_he_psa_single,
    mmse_hl_psa,
    prior_estimate,
)
from .harness import (
    ExperimentConfig,
    Summary,
    SweepPoint,
    TrialRecord,
    emit_results,
    emit_trials,
    run_edr_trials,
    run_secrecy_trials,
)
from .quadform import quadform_tail, quadform_tail_mc, spectrum_decompose
from .training import (
    ObservationSet,
    PilotSet,
    TrainingParams,
    dbm_to_watt,
    default_lambda_c,
    generate_pilots,
    matched_filter,
    prescreen,
    synthesize_uplink,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
