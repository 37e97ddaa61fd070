"""Top-level estimator: greedy detection with interleaved Newton refinement.

One outer iteration detects the strongest remaining frequency on an
oversampled grid, polishes it against the residual, re-polishes every
component in turn against its own local measurement, and re-fits all gains
jointly by least squares.  Iterations continue until the configured
stopping rule fires.  Ablation variants reduce to classic grid-based
matching pursuit (``domp``: no refinement at all) or drop only the cyclic
re-polishing (``nomp_minus``).

The report's residual trajectory records energies ``[E_0, E_1, ...,
E_m]`` with E_0 the input energy, so entry m is the residual energy with m
components fitted.  Whenever an iteration runs because the threshold test
still fired, E_{m-1} - E_m >= tau: the detected grid value is itself a
lower bound on the energy the new component removes, and every later stage
of the iteration only lowers the residual further.

Detection interleaves refinement with a growing model, so components found
late never see a fully populated neighbourhood during the loop itself.
Once detection stops, the estimator therefore keeps running the same
cyclic-descent rounds until one fails to lower the residual energy.  The
final trajectory entry reflects this settled state, so it always equals
the residual energy of the returned parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .atoms import AtomProvider, ParameterSet, SinusoidParam, TWO_PI, _as_signal, residual
from .refine import cyclic_refine, identify, ls_update, merge_duplicates, newton_refine
from .stopping import CfarSpec, bic_score, cfar_threshold, stop_check

VARIANTS = ("nomp", "nomp_minus", "domp")

# Hard cap on post-detection settling rounds.  Well-separated mixtures hit
# double-precision floor within about ten rounds; the cap only guards
# against pathological slow creep near that floor.
TERMINAL_ROUNDS = 64


@dataclass(frozen=True)
class CfarStop:
    """Stop when no grid frequency of the residual clears the CFAR threshold."""

    sigma_sq: float
    p_fa: float
    mode: str = "exact"


@dataclass(frozen=True)
class BicStop:
    """Stop when the newest component's information score falls below ``threshold``."""

    sigma_sq: float
    threshold: float = 10.0


@dataclass(frozen=True)
class MaxIterStop:
    """Run exactly ``count`` iterations (bounded by the global cap)."""

    count: int


StoppingRule = Union[CfarStop, BicStop, MaxIterStop]


@dataclass(frozen=True)
class EstimatorConfig:
    gamma: int = 4
    r_s: int = 1
    r_c: int = 3
    stopping: StoppingRule = field(default_factory=lambda: MaxIterStop(1))
    variant: str = "nomp"
    max_iterations: int | None = None  # defaults to the observation dimension

    def __post_init__(self) -> None:
        if int(self.gamma) != self.gamma or self.gamma < 1:
            raise ValueError(f"gamma must be a positive integer, got {self.gamma!r}")
        if self.r_s < 0 or self.r_c < 0:
            raise ValueError("r_s and r_c must be non-negative")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")

    @property
    def effective_r_s(self) -> int:
        return 0 if self.variant == "domp" else self.r_s

    @property
    def effective_r_c(self) -> int:
        return 0 if self.variant in ("domp", "nomp_minus") else self.r_c


@dataclass(frozen=True)
class EstimateReport:
    params: ParameterSet
    iterations: int
    residual_trajectory: np.ndarray
    stop_reason: str
    rank_deficiency_flag: bool

    @property
    def order(self) -> int:
        return len(self.params)


def _terminal_polish(
    y: np.ndarray,
    params: ParameterSet,
    provider: AtomProvider,
    steps: int,
) -> tuple[ParameterSet, bool, float]:
    """Settle all components by extra descent rounds once detection is over.

    Each round re-runs one cyclic pass plus the joint gain fit and is kept
    only if it strictly lowers the residual energy, so the sequence is
    monotone and terminates at the numerical floor.
    """
    flagged = False
    y_r = residual(y, params, provider)
    energy = float(np.vdot(y_r, y_r).real)
    for _ in range(TERMINAL_ROUNDS):
        trial = cyclic_refine(y, params, provider, 1, steps)
        trial, merged = merge_duplicates(trial)
        trial, deficient = ls_update(y, trial, provider)
        y_r = residual(y, trial, provider)
        new_energy = float(np.vdot(y_r, y_r).real)
        if not new_energy < energy:
            break
        params = trial
        energy = new_energy
        flagged = flagged or merged or deficient
    return params, flagged, energy


def extract_spectrum(y: np.ndarray, provider: AtomProvider, config: EstimatorConfig) -> EstimateReport:
    """Estimate the number, frequencies, and gains of sinusoids in ``y``.

    Deterministic: no randomness anywhere in the loop, so identical inputs
    give identical reports.  The stopping test runs before the first
    detection, so a sub-threshold measurement yields an empty estimate.
    """
    y = _as_signal(y, provider.dim)
    rule = config.stopping
    cap = config.max_iterations if config.max_iterations is not None else provider.dim
    if isinstance(rule, MaxIterStop):
        if rule.count < 0:
            raise ValueError("max_iters stopping needs a non-negative count")
        cap = min(cap, rule.count)
    tau = None
    if isinstance(rule, CfarStop):
        tau = cfar_threshold(CfarSpec(rule.sigma_sq, provider.n, rule.p_fa, rule.mode))

    r_s = config.effective_r_s
    r_c = config.effective_r_c
    params: ParameterSet = []
    y_r = y.copy()
    trajectory = [float(np.vdot(y, y).real)]
    rank_flag = False
    stop_reason = "max_iterations"

    while True:
        if len(params) >= cap:
            stop_reason = "max_iterations"
            break
        if tau is not None and stop_check(y_r, provider, tau):
            stop_reason = "cfar"
            break

        snapshot = list(params)
        picked = identify(y_r, provider, config.gamma)
        outcome = newton_refine(y_r, picked, provider, r_s)
        params = params + [outcome.param]
        params = cyclic_refine(y, params, provider, r_c, r_s)
        params, merged = merge_duplicates(params)
        params, deficient = ls_update(y, params, provider)
        rank_flag = rank_flag or merged or deficient
        y_r = residual(y, params, provider)
        energy = float(np.vdot(y_r, y_r).real)

        if isinstance(rule, BicStop):
            score = bic_score(trajectory[-1] - energy, rule.sigma_sq, provider.dim)
            if score < rule.threshold:
                # The newest component explains too little energy to be
                # believed; roll the whole iteration back and stop.
                params = snapshot
                y_r = residual(y, params, provider)
                stop_reason = "bic"
                break
        trajectory.append(energy)

    if params and r_c > 0:
        params, flagged, energy = _terminal_polish(y, params, provider, r_s)
        rank_flag = rank_flag or flagged
        trajectory[-1] = energy

    return EstimateReport(
        params=params,
        iterations=len(params),
        residual_trajectory=np.asarray(trajectory),
        stop_reason=stop_reason,
        rank_deficiency_flag=rank_flag,
    )


def verify_rate_bound(report: EstimateReport, gain_l1: float, gamma: int) -> bool:
    """Check the residual-decay guarantee ||y_r(P_m)|| <= (m+1)^(-1/2) * C * gain_l1.

    The constant C = (1 - 2*pi/gamma)^(-1) is meaningful only for
    oversampling factors above 2*pi, so smaller factors are rejected.
    ``gain_l1`` is the l1 norm of the true gains (an upper bound on the
    atomic norm of the clean signal).
    """
    if gamma <= TWO_PI:
        raise ValueError(f"rate bound requires gamma > 2*pi, got {gamma}")
    if gain_l1 < 0.0:
        raise ValueError("gain_l1 must be non-negative")
    coeff = gain_l1 / (1.0 - TWO_PI / gamma)
    norms = np.sqrt(report.residual_trajectory)
    bounds = coeff / np.sqrt(np.arange(norms.size) + 1.0)
    return bool(np.all(norms <= bounds))


def iteration_cap(y: np.ndarray, tau: float, dim: int) -> int:
    """Upper bound on threshold-driven iterations: min(dim, ||y||^2 / tau)."""
    energy = float(np.vdot(y, y).real)
    return int(min(dim, np.floor(energy / tau)))
