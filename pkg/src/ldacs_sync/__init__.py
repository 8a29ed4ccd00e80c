"""Baseband simulator and data-aided synchronizer for L-DACS1-style OFDM frames.

The package splits into five layers:

    sigmodel   numerology, preamble/frame synthesis, energy template
    _kernels   hot metric kernels (numba njit with a pure-numpy fallback)
    sync       streaming + batch metrics, detection, STO and CFO estimation
    channel    CFO, AWGN, Rician multipath, phase noise, DME interference
    harness    Monte Carlo trials, campaigns, CSV/JSON emitters

Backend selection for the metric kernels is controlled by the environment
variable LDACS_SYNC_BACKEND (auto | numba | numpy), read at import time.
"""

from .sigmodel import (
    Numerology,
    PreambleWaveform,
    EnergyTemplate,
    make_numerology,
    generate_preamble,
    energy_template,
    build_frame,
    write_iq,
    read_iq,
)
from ._kernels import active_backend
from .sync import (
    MetricSnapshot,
    SyncPhase,
    SyncState,
    SyncResult,
    push_sample,
    detect,
    metrics_direct,
    metric_stream,
    estimate_sto,
    estimate_cfo,
    synchronize,
    baseline_xsig,
    baseline_xene,
)
from .channel import (
    ChannelTap,
    ChannelProfile,
    DmeInterferer,
    DmeScenario,
    ImpairmentConfig,
    apply_cfo,
    apply_awgn,
    apply_multipath,
    apply_phase_noise,
    apply_dme,
    make_enr_profile,
    make_tma_profile,
    make_dme_scenario,
    run_pipeline,
)
from .harness import (
    Scenario,
    TrialRecord,
    CampaignStats,
    run_trial,
    run_campaign,
    load_scenario,
    write_campaign_csv,
    write_campaign_json,
    write_trial_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Numerology",
    "PreambleWaveform",
    "EnergyTemplate",
    "make_numerology",
    "generate_preamble",
    "energy_template",
    "build_frame",
    "write_iq",
    "read_iq",
    "active_backend",
    "MetricSnapshot",
    "SyncPhase",
    "SyncState",
    "SyncResult",
    "push_sample",
    "detect",
    "metrics_direct",
    "metric_stream",
    "estimate_sto",
    "estimate_cfo",
    "synchronize",
    "baseline_xsig",
    "baseline_xene",
    "ChannelTap",
    "ChannelProfile",
    "DmeInterferer",
    "DmeScenario",
    "ImpairmentConfig",
    "apply_cfo",
    "apply_awgn",
    "apply_multipath",
    "apply_phase_noise",
    "apply_dme",
    "make_enr_profile",
    "make_tma_profile",
    "make_dme_scenario",
    "run_pipeline",
    "Scenario",
    "TrialRecord",
    "CampaignStats",
    "run_trial",
    "run_campaign",
    "load_scenario",
    "write_campaign_csv",
    "write_campaign_json",
    "write_trial_csv",
]
