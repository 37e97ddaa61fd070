"""Stopping rules: CFAR thresholds, a BIC score, and the miss-rate model.

The CFAR threshold tau is calibrated on the plain N-point DFT grid: under
noise only, the GLRT values at the N grid nodes are i.i.d. exponential with
mean sigma^2, so requiring Pr{max > tau} = P_fa gives the exact threshold

    tau = -sigma^2 * log(1 - (1 - P_fa)^(1/N))

and the large-N approximation sigma^2*(log N - log log(1/(1 - P_fa))).
The stopping test itself always scans the unoversampled grid, regardless of
the oversampling used for detection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gammaln

from .atoms import AtomProvider, _as_signal


@dataclass(frozen=True)
class CfarSpec:
    """Threshold calibration inputs: noise variance, grid size, target rate."""

    sigma_sq: float
    n: int
    p_fa: float
    mode: str = "exact"

    def __post_init__(self) -> None:
        if self.sigma_sq <= 0.0:
            raise ValueError(f"sigma_sq must be positive, got {self.sigma_sq}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0.0 < self.p_fa < 1.0:
            raise ValueError(f"p_fa must lie in (0, 1), got {self.p_fa}")
        if self.mode not in ("exact", "asymptotic"):
            raise ValueError(f"mode must be 'exact' or 'asymptotic', got {self.mode!r}")


def cfar_threshold(spec: CfarSpec) -> float:
    """Per-bin GLRT threshold with false-alarm rate ``p_fa`` over the N-bin grid."""
    if spec.mode == "exact":
        # 1 - (1-p)^{1/N} via expm1/log1p to keep precision for small p_fa.
        tail = -np.expm1(np.log1p(-spec.p_fa) / spec.n)
        return float(-spec.sigma_sq * np.log(tail))
    return float(spec.sigma_sq * (np.log(spec.n) - np.log(-np.log1p(-spec.p_fa))))


def stop_check(y_r: np.ndarray, provider: AtomProvider, tau: float) -> bool:
    """True when no frequency on the plain DFT grid clears the threshold."""
    y_r = _as_signal(y_r, provider.dim)
    return bool(provider.grid_values(y_r, 1).max() < tau)


def marcum_q1(a: float, b: float) -> float:
    """First-order Marcum Q function, by the canonical series.

    Q_1(a, b) is expanded as a Poisson(a^2/2) mixture of upper incomplete
    gamma tails, summed in log space until the neglected Poisson mass is
    below 1e-13; the neglected terms are each at most that mass, so the
    absolute error is comfortably below 1e-10.
    """
    if a < 0.0 or b < 0.0:
        raise ValueError("marcum_q1 expects non-negative arguments")
    lam = 0.5 * a * a
    x = 0.5 * b * b
    if lam == 0.0:
        return float(np.exp(-x))
    kmax = int(np.ceil(lam + 12.0 * np.sqrt(lam + 1.0) + 50.0))
    k = np.arange(kmax + 1)
    log_w = k * np.log(lam) - lam - gammaln(k + 1.0)
    weights = np.exp(log_w)
    if 1.0 - weights.sum() > 1e-13:
        raise RuntimeError("Poisson mixture truncated too early")
    return float(np.sum(weights * gammaincc(k + 1.0, x)))


def p_miss_model(snr: float, tau: float, sigma_sq: float) -> float:
    """Modeled per-tone miss probability at threshold ``tau``.

    The matched-filter output for a tone of signal-to-noise ratio ``snr``
    scalloped onto the nearest grid bin retains an average amplitude factor
    of 0.88, so the detection statistic is Rician and

        P_miss = 1 - Q_1(0.88*sqrt(2*snr), sqrt(2*tau/sigma^2)).
    """
    if snr < 0.0:
        raise ValueError(f"snr must be non-negative, got {snr}")
    if tau < 0.0 or sigma_sq <= 0.0:
        raise ValueError("tau must be non-negative and sigma_sq positive")
    a = 0.88 * np.sqrt(2.0 * snr)
    b = np.sqrt(2.0 * tau / sigma_sq)
    return float(min(1.0, max(0.0, 1.0 - marcum_q1(a, b))))


def bic_score(delta_energy: float, sigma_sq: float, n_obs: int) -> float:
    """Information score for one more sinusoid absorbing ``delta_energy``.

    (2/sigma^2) * delta_energy - 2*log(n_obs): the likelihood gain from the
    residual-energy drop minus the cost of the extra parameters.  Detection
    keeps going while the score clears the configured threshold.
    """
    if sigma_sq <= 0.0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    return float(2.0 * delta_energy / sigma_sq - 2.0 * np.log(n_obs))


def estimate_noise_var(y: np.ndarray) -> float:
    """Median-based noise-variance estimate from the quiet half of the periodogram.

    Bins occupied by sinusoids land in the upper half of the sorted
    periodogram, so the median of the lower half (the 25th percentile of an
    exponential under noise) divided by -log(3/4) is robust to them.
    """
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1 or y.size < 4:
        raise ValueError("need a 1-d signal with at least 4 samples")
    pgram = np.abs(np.fft.fft(y)) ** 2 / y.size
    lower = np.sort(pgram)[: y.size // 2]
    return float(np.median(lower) / -np.log(0.75))
