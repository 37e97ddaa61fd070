"""Compressive measurements: random projection matrices and their atoms.

An M x N matrix A with i.i.d. entries of variance 1/N maps the length-N
sinusoid manifold into C^M.  The working dictionary is the normalized image

    s(omega) = A x(omega) / ||A x(omega)||,

so atoms stay unit norm and the detection/refinement machinery applies
unchanged.  First and second frequency derivatives go through the
normalization by the quotient rule, keeping Re{<ds, s>} = 0 on the unit
sphere, which is what the Newton refinement's curvature formulas assume.

Grid evaluation stays FFT-based: <y, s(omega_k)> needs one zero-padded FFT
of A^H y, plus per-node norms ||A x(omega_k)|| precomputed once per
oversampling factor from row-wise FFTs of A.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .atoms import _as_signal, _check_gamma, fourier_atom_derivs

DISTRIBUTIONS = ("qpsk", "pm_one", "gaussian")


@dataclass(frozen=True)
class MeasurementMatrix:
    """A realized projection matrix together with its provenance tag."""

    entries: np.ndarray
    dist: str
    seed: int | None = None

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


def gen_matrix(m: int, n: int, dist: str = "qpsk", seed: int | None = None) -> MeasurementMatrix:
    """Draw an M x N matrix with i.i.d. entries of variance 1/N.

    ``qpsk`` draws uniformly from {+-1, +-1j}/sqrt(N), ``pm_one`` from
    {+-1}/sqrt(N), ``gaussian`` from N(0, 1/N).
    """
    if m < 1 or n < 2:
        raise ValueError(f"need m >= 1 and n >= 2, got m={m}, n={n}")
    if dist not in DISTRIBUTIONS:
        raise ValueError(f"dist must be one of {DISTRIBUTIONS}, got {dist!r}")
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(n)
    if dist == "qpsk":
        symbols = np.array([scale, -scale, 1j * scale, -1j * scale])
        entries = rng.choice(symbols, size=(m, n))
    elif dist == "pm_one":
        entries = rng.choice(np.array([scale, -scale]), size=(m, n)).astype(np.complex128)
    else:
        entries = (rng.standard_normal((m, n)) * scale).astype(np.complex128)
    return MeasurementMatrix(entries=entries, dist=dist, seed=seed)


class CompressiveAtoms:
    """Atom provider over the normalized compressive manifold A x(omega)/||A x(omega)||."""

    def __init__(self, matrix: MeasurementMatrix):
        a = np.asarray(matrix.entries, dtype=np.complex128)
        if a.ndim != 2:
            raise ValueError(f"matrix must be 2-d, got shape {a.shape}")
        self.matrix = matrix
        self._a = a
        self._ah = a.conj().T
        self.n = a.shape[1]
        self.dim = a.shape[0]
        self._norm_cache: dict[int, np.ndarray] = {}

    def _raw(self, omega: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x, dx, d2x = fourier_atom_derivs(omega, self.n)
        return self._a @ x, self._a @ dx, self._a @ d2x

    def value(self, omega: float) -> np.ndarray:
        v = self._a @ fourier_atom_derivs(omega, self.n)[0]
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError(f"projected atom at omega={omega} has zero norm")
        return v / norm

    def first_deriv(self, omega: float) -> np.ndarray:
        return self.derivs(omega)[1]

    def second_deriv(self, omega: float) -> np.ndarray:
        return self.derivs(omega)[2]

    def derivs(self, omega: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Normalized atom and its exact first two derivatives.

        With v = A x, q = ||v||^2 and u = q^(-1/2), the chain rule gives
        s = v*u, ds = dv*u + v*du, d2s = d2v*u + 2*dv*du + v*d2u.
        """
        v, dv, d2v = self._raw(omega)
        q = float(np.vdot(v, v).real)
        if q == 0.0:
            raise ValueError(f"projected atom at omega={omega} has zero norm")
        dq = 2.0 * float(np.vdot(v, dv).real)
        d2q = 2.0 * (float(np.vdot(dv, dv).real) + float(np.vdot(v, d2v).real))
        u = q**-0.5
        du = -0.5 * q**-1.5 * dq
        d2u = 0.75 * q**-2.5 * dq * dq - 0.5 * q**-1.5 * d2q
        s = v * u
        ds = dv * u + v * du
        d2s = d2v * u + 2.0 * dv * du + v * d2u
        return s, ds, d2s

    def atom_norm_sq(self, omega: float) -> float:
        return 1.0  # normalized by construction

    def norm_sq_derivs(self, omega: float) -> tuple[float, float, float]:
        return 1.0, 0.0, 0.0

    def unnormalized_norm(self, omega: float) -> float:
        """||A x(omega)||, the per-frequency gain the projection imposes."""
        return float(np.linalg.norm(self._raw(omega)[0]))

    def _node_norms_sq(self, gamma: int) -> np.ndarray:
        """||A x(omega_k)||^2 over the gamma-oversampled grid, cached per gamma."""
        gamma = _check_gamma(gamma)
        cached = self._norm_cache.get(gamma)
        if cached is not None:
            return cached
        size = gamma * self.n
        # Row r of A evaluated against exp(+1j*n*omega_k) is size * ifft.
        row_eval = np.fft.ifft(self._a, n=size, axis=1) * size
        norms_sq = (np.abs(row_eval) ** 2).sum(axis=0) / self.n
        if np.any(norms_sq == 0.0):
            raise ValueError("projection annihilates a grid atom; matrix is degenerate")
        self._norm_cache[gamma] = norms_sq
        return norms_sq

    def grid_values(self, y: np.ndarray, gamma: int) -> np.ndarray:
        y = _as_signal(y, self.dim)
        gamma = _check_gamma(gamma)
        norms_sq = self._node_norms_sq(gamma)
        coeffs = np.fft.fft(self._ah @ y, n=gamma * self.n)
        return np.abs(coeffs) ** 2 / self.n / norms_sq


def compressive_provider(matrix: MeasurementMatrix) -> CompressiveAtoms:
    """Build the atom provider for measurements taken through ``matrix``."""
    return CompressiveAtoms(matrix)
