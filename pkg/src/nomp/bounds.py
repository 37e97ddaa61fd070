"""Estimation-theoretic floors: Cramer-Rao and Ziv-Zakai bounds, Fisher info.

The single-tone frequency CRB has the closed form 6 / (snr * (N^2 - 1)).
The Ziv-Zakai bound folds the detection ambiguity of the periodic
correlation envelope into the error floor,

    zzb = int_0^pi Q( sqrt(snr * (1 - |h(u)|)) ) * u du,

with h the Dirichlet kernel sin(N*u/2) / (N*sin(u/2)) and Q the Gaussian
tail.  At snr = 0 the integrand collapses to u/2 and the bound equals
pi^2/4; at high snr the quadratic neighborhood of u = 0 dominates and the
bound rides the CRB.

Multi-tone floors come from the full Fisher matrix over the parameter
vector ordered (|g_l|, arg g_l, omega_l) per component.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from .atoms import AtomProvider, SinusoidParam

# Fisher matrices with condition numbers beyond this are treated as
# numerically singular and yield infinite per-component bounds.
FISHER_COND_LIMIT = 1e12


def crb_single(snr: float, n: int) -> float:
    """Frequency CRB for one sinusoid of ``snr`` in ``n`` samples, in rad^2."""
    if snr <= 0.0:
        raise ValueError(f"snr must be positive, got {snr}")
    if n < 2:
        raise ValueError(f"need at least 2 samples, got n={n}")
    return 6.0 / (snr * (n * n - 1.0))


def _gaussian_tail(x: float) -> float:
    return 0.5 * erfc(x / np.sqrt(2.0))


def _dirichlet_mag(u: float, n: int) -> float:
    s = np.sin(0.5 * u)
    if abs(s) < 1e-300:
        return 1.0
    return abs(np.sin(0.5 * n * u) / (n * s))


def zzb_single(snr: float, n: int, abs_tol: float = 1e-8) -> float:
    """Ziv-Zakai frequency bound for one sinusoid, in rad^2.

    The integrand has derivative kinks at the Dirichlet-kernel nulls
    u = 2*pi*k/n, so adaptive Gauss-Kronrod quadrature runs per nulled
    segment and the per-segment tolerances sum below ``abs_tol``.
    """
    if snr < 0.0:
        raise ValueError(f"snr must be non-negative, got {snr}")
    if n < 2:
        raise ValueError(f"need at least 2 samples, got n={n}")

    def integrand(u: float) -> float:
        arg = snr * (1.0 - _dirichlet_mag(u, n))
        return _gaussian_tail(np.sqrt(max(arg, 0.0))) * u

    edges = [2.0 * np.pi * k / n for k in range(n // 2 + 1)]
    edges = [e for e in edges if e < np.pi] + [np.pi]
    seg_tol = abs_tol / (10.0 * len(edges))
    total = 0.0
    err_sum = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = quad(integrand, lo, hi, epsabs=seg_tol, epsrel=1e-10, limit=200)
        total += val
        err_sum += err
    if err_sum > abs_tol:
        raise RuntimeError(f"quadrature error estimate {err_sum:.3e} exceeds {abs_tol:.1e}")
    return total


def fisher_matrix(params: Sequence[SinusoidParam], sigma_sq: float, provider: AtomProvider) -> np.ndarray:
    """Fisher information for the 3K-vector (|g_l|, arg g_l, omega_l) per component.

    Entry (m, n) is (2/sigma^2) * Re{ d_m^H d_n } with d_m the partial of
    the clean signal in parameter m:

        d/d|g|   = exp(1j*arg g) * s(omega)
        d/darg g = 1j * g * s(omega)
        d/domega = g * ds/domega
    """
    if sigma_sq <= 0.0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    cols = []
    for p in params:
        if p.gain == 0:
            raise ValueError("zero gain makes phase and frequency unidentifiable")
        s, ds, _ = provider.derivs(p.omega)
        phase = p.gain / abs(p.gain)
        cols.append(phase * s)
        cols.append(1j * p.gain * s)
        cols.append(p.gain * ds)
    d = np.column_stack(cols)
    return (2.0 / sigma_sq) * (d.conj().T @ d).real


def crb_frequencies(params: Sequence[SinusoidParam], sigma_sq: float, provider: AtomProvider) -> np.ndarray:
    """Per-component frequency CRBs from the inverse Fisher matrix, in rad^2.

    Numerically singular geometries (condition number past
    ``FISHER_COND_LIMIT``) report +inf rather than a garbage inverse.
    """
    if not params:
        return np.empty(0)
    f = fisher_matrix(params, sigma_sq, provider)
    if np.linalg.cond(f) >= FISHER_COND_LIMIT:
        return np.full(len(params), np.inf)
    inv = np.linalg.inv(f)
    return np.asarray([inv[3 * k + 2, 3 * k + 2] for k in range(len(params))])
