"""Fourier atoms, GLRT costs, and the atom-provider abstraction.

Everything downstream (detection, refinement, stopping, bounds) talks to a
sinusoidal dictionary only through an atom provider: an object that evaluates
the atom s(omega), its first two derivatives in omega, its squared norm, and
the GLRT cost on a regular frequency grid.  The plain Fourier provider here
covers the standard model; a compressive provider with the same surface lives
in :mod:`nomp.compressive`.

Conventions
-----------
Inner product <v, u> = u^H v.  Frequencies live on [0, 2*pi).  The Fourier
atom is unit norm by construction, x_n(omega) = exp(1j*n*omega)/sqrt(N).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

TWO_PI = 2.0 * np.pi


def canonical_omega(omega: float) -> float:
    """Map a frequency in radians/sample onto the canonical interval [0, 2*pi)."""
    w = float(omega) % TWO_PI
    # Rounding can push values like -1e-18 up to exactly 2*pi.
    if w >= TWO_PI:
        w = 0.0
    return w


def wrap_dist(omega_a: float, omega_b: float) -> float:
    """Wrap-around distance between two frequencies, in [0, pi]."""
    d = abs(omega_a - omega_b) % TWO_PI
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class SinusoidParam:
    """One estimated or true component: complex gain and canonical frequency."""

    gain: complex
    omega: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "gain", complex(self.gain))
        object.__setattr__(self, "omega", canonical_omega(self.omega))


# A parameter set is an ordered list of components, in detection order.
ParameterSet = list


def fourier_atom(omega: float, n: int) -> np.ndarray:
    """Unit-norm Fourier atom of length ``n`` at frequency ``omega``.

    Entry ``m`` equals exp(1j*m*omega)/sqrt(n) for m = 0..n-1.
    """
    m = np.arange(n)
    return np.exp(1j * m * omega) / np.sqrt(n)


def fourier_atom_derivs(omega: float, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Atom plus first and second frequency derivatives, entrywise.

    Returns (x, dx, d2x) with dx_m = (1j*m)*x_m and d2x_m = -(m**2)*x_m.
    """
    m = np.arange(n)
    x = np.exp(1j * m * omega) / np.sqrt(n)
    dx = 1j * m * x
    d2x = -(m.astype(float) ** 2) * x
    return x, dx, d2x


def atom_derivs(omega: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """First and second frequency derivatives of the Fourier atom."""
    _, dx, d2x = fourier_atom_derivs(omega, n)
    return dx, d2x


@runtime_checkable
class AtomProvider(Protocol):
    """Dictionary interface used by detection, refinement, and bounds.

    Attributes
    ----------
    n : int
        Base frequency-grid size; the gamma-oversampled grid has gamma*n
        nodes at omega_k = 2*pi*k/(gamma*n).
    dim : int
        Length of the observation vector the atoms live in (equals ``n``
        for the plain Fourier dictionary, M for compressive measurements).
    """

    n: int
    dim: int

    def value(self, omega: float) -> np.ndarray: ...

    def first_deriv(self, omega: float) -> np.ndarray: ...

    def second_deriv(self, omega: float) -> np.ndarray: ...

    def derivs(self, omega: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]: ...

    def atom_norm_sq(self, omega: float) -> float: ...

    def norm_sq_derivs(self, omega: float) -> tuple[float, float, float]: ...

    def grid_values(self, y: np.ndarray, gamma: int) -> np.ndarray: ...


class FourierAtoms:
    """Atom provider for the standard length-``n`` Fourier dictionary."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"need at least 2 samples, got n={n}")
        self.n = int(n)
        self.dim = int(n)

    def value(self, omega: float) -> np.ndarray:
        return fourier_atom(omega, self.n)

    def first_deriv(self, omega: float) -> np.ndarray:
        return fourier_atom_derivs(omega, self.n)[1]

    def second_deriv(self, omega: float) -> np.ndarray:
        return fourier_atom_derivs(omega, self.n)[2]

    def derivs(self, omega: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return fourier_atom_derivs(omega, self.n)

    def atom_norm_sq(self, omega: float) -> float:
        return 1.0

    def norm_sq_derivs(self, omega: float) -> tuple[float, float, float]:
        # The 1/sqrt(n) scaling makes the norm identically one.
        return 1.0, 0.0, 0.0

    def grid_values(self, y: np.ndarray, gamma: int) -> np.ndarray:
        """GLRT cost at the gamma-oversampled DFT frequencies.

        A single zero-padded FFT of length gamma*n evaluates
        <y, x(omega_k)> for all omega_k = 2*pi*k/(gamma*n) at once.
        """
        y = _as_signal(y, self.dim)
        gamma = _check_gamma(gamma)
        coeffs = np.fft.fft(y, n=gamma * self.n)
        return np.abs(coeffs) ** 2 / self.n


def _check_gamma(gamma: int) -> int:
    if int(gamma) != gamma or gamma < 1:
        raise ValueError(f"oversampling factor must be a positive integer, got {gamma!r}")
    return int(gamma)


def _as_signal(y: np.ndarray, dim: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1 or y.shape[0] != dim:
        raise ValueError(f"expected a length-{dim} vector, got shape {y.shape}")
    return y


def grid_freqs(n: int, gamma: int) -> np.ndarray:
    """Frequencies of the gamma-oversampled grid, 2*pi*k/(gamma*n)."""
    gamma = _check_gamma(gamma)
    size = gamma * n
    return TWO_PI * np.arange(size) / size


def glrt(y: np.ndarray, provider: AtomProvider, omega: float) -> float:
    """Generalized likelihood ratio cost |<y, s(omega)>|^2 / ||s(omega)||^2.

    This is the residual-energy drop obtained by admitting a single atom at
    ``omega`` with its least-squares gain; it is invariant to the phase and
    scale of the atom.
    """
    y = _as_signal(y, provider.dim)
    s = provider.value(omega)
    q = provider.atom_norm_sq(omega)
    if q <= 0.0:
        raise ValueError(f"atom at omega={omega} has zero norm")
    return float(np.abs(np.vdot(s, y)) ** 2 / q)


def glrt_grid(y: np.ndarray, provider: AtomProvider, gamma: int) -> np.ndarray:
    """GLRT cost over the gamma-oversampled frequency grid (``gamma*n`` nodes)."""
    return provider.grid_values(y, gamma)


def reconstruct(params: Sequence[SinusoidParam], provider: AtomProvider) -> np.ndarray:
    """Sum of gain-weighted atoms for a parameter set."""
    model = np.zeros(provider.dim, dtype=np.complex128)
    for p in params:
        model += p.gain * provider.value(p.omega)
    return model


def residual(y: np.ndarray, params: Sequence[SinusoidParam], provider: AtomProvider) -> np.ndarray:
    """Measurement minus the reconstruction of ``params``."""
    y = _as_signal(y, provider.dim)
    return y - reconstruct(params, provider)
