"""Estimation of sinusoid count, frequencies, and gains over the continuum.

The estimator interleaves grid detection with Newton refinement of each
frequency directly on [0, 2*pi), so accuracy is not limited by any grid.
Supporting pieces: CFAR and information-criterion stopping, Cramer-Rao and
Ziv-Zakai floors, compressive (randomly projected) measurements, and a
reproducible Monte-Carlo harness with a command-line front end.
"""

from .atoms import (
    AtomProvider,
    FourierAtoms,
    ParameterSet,
    SinusoidParam,
    atom_derivs,
    canonical_omega,
    fourier_atom,
    fourier_atom_derivs,
    glrt,
    glrt_grid,
    grid_freqs,
    reconstruct,
    residual,
    wrap_dist,
)
from .bounds import crb_frequencies, crb_single, fisher_matrix, zzb_single
from .compressive import CompressiveAtoms, MeasurementMatrix, compressive_provider, gen_matrix
from .estimator import (
    BicStop,
    CfarStop,
    EstimateReport,
    EstimatorConfig,
    MaxIterStop,
    extract_spectrum,
    verify_rate_bound,
)
from .refine import RefineOutcome, cyclic_refine, identify, ls_update, newton_refine
from .scenarios import (
    CampaignSummary,
    CompressiveSpec,
    FixedSnr,
    InfeasibleScenarioError,
    ScenarioConfig,
    TrialReport,
    UniformSnr,
    campaign_csv_text,
    gen_scenario,
    match_and_score,
    run_campaign,
    run_trial,
    scenario_preset,
    write_campaign_csv,
)
from .stopping import (
    CfarSpec,
    bic_score,
    cfar_threshold,
    estimate_noise_var,
    marcum_q1,
    p_miss_model,
    stop_check,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
