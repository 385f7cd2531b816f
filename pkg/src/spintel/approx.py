"""Closed-form approximations of the pi/2 rotation matrix and its consequences.

Two families of approximations to the inner products R[k', k] between x- and
z-basis number states are provided: a harmonic-oscillator (Hermite-function)
form that is accurate for x-basis labels near the edges k' ~ 0, N, and a
WKB-style cosine form with an amplitude envelope that performs best around
k' ~ N/2.  On top of these sits the "four-copy" picture of the
post-measurement state: keeping only the phase factors of the approximate R
elements, the conditional state on the receiving ensemble is a superposition
of four z-rotated, index-shifted copies of the input state.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .spincore import EnsembleState

__all__ = [
    "phi_angle", "peak_quantum_number", "oscillator_energy",
    "hermite_function", "amplitude_envelope",
    "r_approx_ho", "r_approx_wkb", "four_circle_state",
]


def phi_angle(n_atoms: int, k_prime: int) -> float:
    """Azimuthal rotation angle arccos(2k'/N - 1) attached to x-label k'."""
    if not 0 <= k_prime <= n_atoms:
        raise DomainError(f"k'={k_prime} outside [0, {n_atoms}]")
    return math.acos(min(max(2.0 * k_prime / n_atoms - 1.0, -1.0), 1.0))


def peak_quantum_number(n_atoms: int, k: int) -> int:
    """Effective oscillator quantum number n_k = N/2 - |k - N/2| = min(k, N-k)."""
    return min(k, n_atoms - k)


def oscillator_energy(n_atoms: int, k_prime: int) -> float:
    """Effective energy k' + 1/2 - k'^2/N, symmetric under k' -> N - k'."""
    return k_prime + 0.5 - k_prime**2 / n_atoms


def hermite_function(n: int, x: float) -> float:
    """Normalized Hermite function Phi_n(x) = e^{-x^2/2} H_n(x) / sqrt(2^n n! sqrt(pi)).

    Evaluated by the upward recurrence on the normalized functions themselves,
    Phi_{n+1} = x sqrt(2/(n+1)) Phi_n - sqrt(n/(n+1)) Phi_{n-1}, which never
    overflows (the raw Hermite polynomials do).
    """
    if n < 0:
        raise DomainError("Hermite order must be >= 0")
    prev = 0.0
    cur = math.pi ** -0.25 * math.exp(-0.5 * x * x)
    for m in range(n):
        prev, cur = cur, x * math.sqrt(2.0 / (m + 1)) * cur - math.sqrt(m / (m + 1)) * prev
    return cur


def _half_split(n_atoms: int, k_prime: int) -> bool:
    """Whether k' falls in the upper half; the exact N/2 midpoint is assigned
    to the upper branch so the sign choice is deterministic."""
    return 2 * k_prime >= n_atoms


def r_approx_ho(n_atoms: int, k_prime: int, k: int) -> float:
    """Harmonic-oscillator approximation of R[k', k].

    For upper-half labels the x-basis column is approximated by the Hermite
    function of order N - k' in the scaled variable (2k - N)/sqrt(2N), with
    normalization (2/N)^(1/4) (so the squared amplitudes sum to one over the
    index grid) and overall sign (-1)^(N - k') fixed by the rotation
    exponential; lower-half labels follow from the exact reflection identity
    R[N - k', k] = (-1)^k R[k', k].  Accurate near k' ~ 0, N; toward
    k' ~ N/2 the oscillator wavefunction spills outside the physical index
    range and visible deviations appear.
    """
    if not (0 <= k <= n_atoms and 0 <= k_prime <= n_atoms):
        raise DomainError("indices outside [0, N]")
    if not _half_split(n_atoms, k_prime):
        return (-1.0) ** k * r_approx_ho(n_atoms, n_atoms - k_prime, k)
    x = (2.0 * k - n_atoms) / math.sqrt(2.0 * n_atoms)
    n = peak_quantum_number(n_atoms, k_prime)
    sign = -1.0 if (n_atoms - k_prime) % 2 else 1.0
    return sign * (2.0 / n_atoms) ** 0.25 * hermite_function(n, x)


def classically_allowed(n_atoms: int, k_prime: int, k: int) -> bool:
    """Whether (2k - N)^2 < 2(N + 2k'N - 2k'^2), the oscillating region."""
    return (2.0 * k - n_atoms) ** 2 < 2.0 * (
        n_atoms + 2.0 * k_prime * n_atoms - 2.0 * k_prime**2)


def amplitude_envelope(n_atoms: int, k_prime: int, k: int) -> float:
    """WKB envelope (2/sqrt(pi)) [2(N + 2k'N - 2k'^2) - (2k - N)^2]^(-1/4).

    The quartic-root denominator is the distance to the turning points of the
    spin's classically allowed region; the constant normalizes the squared
    amplitudes to sum to one over the index grid (a half-average of cos^2
    against the arcsine measure).  Returns 0 outside the allowed region,
    the decaying-tail limit, since the expression is singular at the turning
    points themselves.
    """
    arg = (2.0 * (n_atoms + 2.0 * k_prime * n_atoms - 2.0 * k_prime**2)
           - (2.0 * k - n_atoms) ** 2)
    if arg <= 0.0:
        return 0.0
    return 2.0 / math.sqrt(math.pi) * arg ** -0.25


def _local_wavevector_phase(n_atoms: int, k_prime: int, k: float) -> float:
    """Accumulated oscillation phase of the x-basis column from the center.

    The column R[k', .] solves a three-term recurrence whose local phase
    increment per index step is arccos(m / (2 sqrt((t+1)(N-t)))) with
    m = 2k' - N; at the center this equals phi_k', so linearizing around
    N/2 recovers the simple closed form phi_k' (2k - N)/2.  The integral is
    taken by a midpoint rule, which is plenty for a smooth integrand.
    """
    m = 2.0 * k_prime - n_atoms
    center = 0.5 * n_atoms
    if k == center:
        return 0.0
    steps = 48
    ts = np.linspace(center, k, steps + 1)
    mid = 0.5 * (ts[:-1] + ts[1:])
    ratio = np.clip(m / (2.0 * np.sqrt((mid + 1.0) * (n_atoms - mid))), -1.0, 1.0)
    return float(np.sum(np.arccos(ratio)) * (ts[1] - ts[0]))


def r_approx_wkb(n_atoms: int, k_prime: int, k: int,
                 linear_phase: bool = False) -> float:
    """WKB approximation of R[k', k]: amplitude envelope times a cosine.

    With ``linear_phase`` the cosine argument is the simple closed form
    n_k' pi/2 + phi_k' (2k - N)/2; by default the phase is the accumulated
    local wavevector, which has exactly that slope at the center but bends
    correctly toward the turning points (the linearized form runs ahead
    there and can flip the outermost lobes).  Lower-half labels use the
    exact reflection identity, keeping the global sign consistent between
    the two halves.  Nearly exact around k' ~ N/2; the worst region is
    k' ~ N/4, 3N/4.  Returns 0 outside the classically allowed region.
    """
    if not (0 <= k <= n_atoms and 0 <= k_prime <= n_atoms):
        raise DomainError("indices outside [0, N]")
    if not _half_split(n_atoms, k_prime):
        return (-1.0) ** k * r_approx_wkb(n_atoms, n_atoms - k_prime, k,
                                          linear_phase)
    envelope = amplitude_envelope(n_atoms, k_prime, k)
    if envelope == 0.0:
        return 0.0
    n = peak_quantum_number(n_atoms, k_prime)
    if linear_phase:
        wave = 0.5 * phi_angle(n_atoms, k_prime) * (2.0 * k - n_atoms)
    else:
        wave = _local_wavevector_phase(n_atoms, k_prime, k)
    return envelope * math.cos(0.5 * math.pi * n + wave)


def shift_amplitudes(amplitudes: np.ndarray, delta: int) -> np.ndarray:
    """Apply the index-shift operator: amplitude at k moves to k + delta,
    dropping anything pushed outside [0, N]."""
    out = np.zeros_like(amplitudes)
    n = amplitudes.size - 1
    lo, hi = max(0, -delta), min(n, n - delta)
    if lo <= hi:
        out[lo + delta:hi + delta + 1] = amplitudes[lo:hi + 1]
    return out


def four_circle_state(psi0: EnsembleState, k1: int, k2: int,
                      delta: int) -> EnsembleState:
    """Phase-only approximation of the post-measurement state on ensemble 3.

    Superposes four z-rotated copies of the shifted input, one per choice of
    sign in exp(+-i(phi_k1 +- phi_k2) S^z / 2), with the parity factors
    (-1)^{n_k1}, (-1)^{n_k2} and the constant phases exp(-+i phi_k1 delta).
    The result is left unnormalized.
    """
    n = psi0.n_atoms
    if abs(delta) > n:
        raise DomainError(f"|delta|={abs(delta)} exceeds N={n}")
    if not (0 <= k1 <= n and 0 <= k2 <= n):
        raise DomainError("k1, k2 outside [0, N]")
    p1, p2 = phi_angle(n, k1), phi_angle(n, k2)
    n1, n2 = peak_quantum_number(n, k1), peak_quantum_number(n, k2)
    shifted = shift_amplitudes(psi0.amplitudes, delta)
    sz = 2.0 * np.arange(n + 1) - n
    terms = [
        (np.exp(-1j * p1 * delta), 0.5 * (p1 + p2)),
        ((-1.0) ** n1 * np.exp(1j * p1 * delta), -0.5 * (p1 - p2)),
        ((-1.0) ** n2 * np.exp(-1j * p1 * delta), 0.5 * (p1 - p2)),
        ((-1.0) ** (n1 + n2) * np.exp(1j * p1 * delta), -0.5 * (p1 + p2)),
    ]
    out = np.zeros(n + 1, dtype=complex)
    for pref, rot in terms:
        out += pref * np.exp(1j * rot * sz) * shifted
    return EnsembleState(n, 0.5 * out)
