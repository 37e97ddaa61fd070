"""Detection and Newton refinement of single-sinusoid parameters.

The refinement step maximizes the gain-concentrated amplitude cost

    A(omega) = |<y, s(omega)>| / ||s(omega)||,

whose square is the GLRT cost G(omega).  Concentrating out the complex gain
before differentiating matters: with the gain held fixed at its current
value, the curvature of the likelihood surface picks up a large
phase-frequency coupling term (the atom's phase center sits at the first
sample, not mid-aperture), and a Newton step on that surrogate shrinks the
frequency error only by a constant factor per step.  The concentrated
amplitude cost cancels the coupling exactly -- for a clean isolated tone it
reduces to Newton's method on the Dirichlet-kernel envelope itself -- which
restores the wide basin (about 0.45 DFT bins) and the superlinear
convergence the rest of the pipeline relies on.

A refinement candidate is kept only under the acceptance condition that the
GLRT cost strictly increases (equivalently, that the residual energy
strictly decreases); otherwise the input parameter is returned untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .atoms import (
    AtomProvider,
    ParameterSet,
    SinusoidParam,
    TWO_PI,
    _as_signal,
    canonical_omega,
    glrt,
)

# Singular values below this fraction of the largest are treated as zero
# when solving the joint least-squares gain update.
LS_RCOND = 1e-10


@dataclass(frozen=True)
class RefineOutcome:
    """Result of refining one component against a local measurement."""

    param: SinusoidParam
    accepted: bool
    glrt_before: float
    glrt_after: float


def identify(y: np.ndarray, provider: AtomProvider, gamma: int) -> SinusoidParam:
    """Pick the strongest grid frequency and its least-squares gain.

    Scans the gamma-oversampled grid for the GLRT argmax (lowest index wins
    ties, which is what ``argmax`` does) and attaches the closed-form gain
    <y, s(omega)> / ||s(omega)||^2.
    """
    y = _as_signal(y, provider.dim)
    costs = provider.grid_values(y, gamma)
    k = int(np.argmax(costs))
    omega = TWO_PI * k / costs.size
    s = provider.value(omega)
    gain = np.vdot(s, y) / provider.atom_norm_sq(omega)
    return SinusoidParam(gain=complex(gain), omega=omega)


def _cost_derivs(y: np.ndarray, provider: AtomProvider, omega: float) -> tuple[float, float, float]:
    """GLRT cost G(omega) and its first two frequency derivatives.

    Works for any provider: with rho = <y, s> and q = ||s||^2, the cost is
    G = |rho|^2 / q, differentiated by the quotient rule so non-constant
    atom norms are handled for free.
    """
    s, ds, d2s = provider.derivs(omega)
    q, dq, d2q = provider.norm_sq_derivs(omega)
    rho = np.vdot(s, y)
    drho = np.vdot(ds, y)
    d2rho = np.vdot(d2s, y)
    u = abs(rho) ** 2
    du = 2.0 * (np.conj(rho) * drho).real
    d2u = 2.0 * (abs(drho) ** 2 + (np.conj(rho) * d2rho).real)
    g = u / q
    dg = (du * q - u * dq) / q**2
    d2g = (d2u * q * q - u * q * d2q - 2.0 * dq * du * q + 2.0 * u * dq * dq) / q**3
    return float(g), float(dg), float(d2g)


def newton_refine(
    y: np.ndarray,
    param: SinusoidParam,
    provider: AtomProvider,
    steps: int = 1,
) -> RefineOutcome:
    """Refine one component against ``y`` with up to ``steps`` Newton updates.

    Each update moves the frequency by -A'(omega)/A''(omega) on the
    amplitude cost A = sqrt(G) (expressed below purely in terms of G and
    its derivatives), refreshes the gain to its closed form at the new
    frequency, and keeps the candidate only if the GLRT strictly
    increases.  Where the cost is not locally concave (A'' >= 0) the
    frequency move is skipped, but the gain still snaps to its closed form
    at the unmoved frequency.  The first rejected candidate ends the loop:
    the frequency did not change, so further iterations would retrace it.
    """
    y = _as_signal(y, provider.dim)
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")

    g0 = glrt(y, provider, param.omega)
    cur = param
    cur_cost = g0
    accepted = False
    for _ in range(steps):
        g, dg, d2g = _cost_derivs(y, provider, cur.omega)
        if g <= 0.0:
            break  # zero correlation: no direction to move in
        # A'' < 0 at fixed A > 0 is equivalent to d2g - dg^2/(2g) < 0.
        curvature = d2g - dg * dg / (2.0 * g)
        if curvature >= 0.0:
            gain_cur = np.vdot(provider.value(cur.omega), y) / provider.atom_norm_sq(cur.omega)
            cur = SinusoidParam(gain=complex(gain_cur), omega=cur.omega)
            break
        omega_new = canonical_omega(cur.omega - dg / curvature)
        s_new = provider.value(omega_new)
        gain_new = np.vdot(s_new, y) / provider.atom_norm_sq(omega_new)
        cost_new = glrt(y, provider, omega_new)
        if not cost_new > cur_cost:
            break
        cur = SinusoidParam(gain=complex(gain_new), omega=omega_new)
        cur_cost = cost_new
        accepted = True

    if accepted:
        return RefineOutcome(param=cur, accepted=True, glrt_before=g0, glrt_after=cur_cost)
    return RefineOutcome(param=cur, accepted=False, glrt_before=g0, glrt_after=g0)


def cyclic_refine(
    y: np.ndarray,
    params: Sequence[SinusoidParam],
    provider: AtomProvider,
    rounds: int,
    steps: int = 1,
) -> ParameterSet:
    """Re-refine every component against its own local measurement.

    One round visits the components in order; the local measurement for
    component l is y minus the reconstruction of all the others, maintained
    incrementally.  A rejected refinement leaves the frequency untouched
    but may still snap the gain to its closed form, which minimizes the
    local residual at that frequency; either way the full-set residual
    energy is non-increasing across the sweep.
    """
    y = _as_signal(y, provider.dim)
    if rounds < 0:
        raise ValueError(f"rounds must be non-negative, got {rounds}")
    out: ParameterSet = list(params)
    if rounds == 0 or not out:
        return out

    contribs = [p.gain * provider.value(p.omega) for p in out]
    model = np.sum(contribs, axis=0)
    for _ in range(rounds):
        for i, p in enumerate(out):
            y_local = y - model + contribs[i]
            result = newton_refine(y_local, p, provider, steps)
            if result.accepted or result.param.gain != p.gain:
                new_contrib = result.param.gain * provider.value(result.param.omega)
                model += new_contrib - contribs[i]
                contribs[i] = new_contrib
                out[i] = result.param
    return out


def ls_update(
    y: np.ndarray,
    params: Sequence[SinusoidParam],
    provider: AtomProvider,
) -> tuple[ParameterSet, bool]:
    """Joint least-squares re-fit of all gains at fixed frequencies.

    Solves min_g ||y - X g|| through a rank-revealing (SVD-based) solver
    with singular values below ``LS_RCOND`` times the largest treated as
    zero, returning the minimum-norm solution.  The second return value
    flags rank deficiency; it is informational, not fatal.
    """
    y = _as_signal(y, provider.dim)
    out = list(params)
    if not out:
        return out, False
    if len(out) > provider.dim:
        raise ValueError(f"{len(out)} atoms exceed the observation dimension {provider.dim}")
    basis = np.column_stack([provider.value(p.omega) for p in out])
    gains, _, rank, _ = np.linalg.lstsq(basis, y, rcond=LS_RCOND)
    deficient = rank < len(out)
    refit = [SinusoidParam(gain=complex(g), omega=p.omega) for g, p in zip(gains, out)]
    return refit, bool(deficient)


def merge_duplicates(params: Sequence[SinusoidParam], tol: float = 1e-12) -> tuple[ParameterSet, bool]:
    """Collapse components whose frequencies coincide to within ``tol``.

    Gains are summed onto the earliest component.  Needed before the joint
    gain update: coincident atoms make the basis exactly rank deficient.
    """
    out: ParameterSet = []
    merged = False
    for p in params:
        for i, kept in enumerate(out):
            d = abs(p.omega - kept.omega) % TWO_PI
            if min(d, TWO_PI - d) < tol:
                out[i] = SinusoidParam(gain=kept.gain + p.gain, omega=kept.omega)
                merged = True
                break
        else:
            out.append(p)
    return out, merged
