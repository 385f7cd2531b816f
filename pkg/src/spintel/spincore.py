"""Collective-spin states and operators in the Dicke basis.

An ensemble of N qubits restricted to the permutation-symmetric subspace is
represented by an (N+1)-component complex vector over the Dicke states |k>,
k = 0..N, where k counts the excited (a-mode) qubits so that
S^z |k> = (2k - N) |k>.  Collective spin operators are the sums of the
single-qubit Paulis, hence their commutators carry a factor of 2:
[S^i, S^j] = 2i eps_ijk S^k.

The module provides Dicke and spin-coherent state constructors, spin
expectation values, axis-angle rotations, the pi/2 rotation matrix that maps
between the z and x number bases, and Q-function evaluation.  Rotations are
evaluated through eigendecompositions of the tridiagonal generators rather
than factorial sums, which lose all precision from catastrophic cancellation
once N grows past a few tens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import ContractViolation, DomainError

NORM_TOL = 1e-9


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlochAngles:
    """Point on the Bloch sphere: theta in [0, pi], phi folded to (-pi, pi]."""

    theta: float
    phi: float

    def __post_init__(self):
        theta = float(self.theta)
        phi = float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise DomainError("Bloch angles must be finite")
        if not -1e-12 <= theta <= math.pi + 1e-12:
            raise DomainError(f"theta={theta} outside [0, pi]")
        theta = min(max(theta, 0.0), math.pi)
        # fold phi into the principal interval (-pi, pi]
        phi = math.remainder(phi, 2.0 * math.pi)
        if phi <= -math.pi:
            phi += 2.0 * math.pi
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    def unit_vector(self) -> np.ndarray:
        """Cartesian unit vector (x, y, z) for these angles."""
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi),
                         st * math.sin(self.phi),
                         math.cos(self.theta)])


@dataclass(frozen=True)
class SpinVector:
    """Expectation values of the collective spin, each in [-N, N]."""

    sx: float
    sy: float
    sz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz])

    def norm(self) -> float:
        return float(math.sqrt(self.sx**2 + self.sy**2 + self.sz**2))


@dataclass(frozen=True)
class EnsembleState:
    """Pure state of one ensemble: complex amplitudes over |k>, k = 0..N."""

    n_atoms: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = int(self.n_atoms)
        if n < 1:
            raise DomainError("n_atoms must be >= 1")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (n + 1,):
            raise DomainError(
                f"amplitude vector must have length N+1={n + 1}, got {amps.shape}")
        object.__setattr__(self, "n_atoms", n)
        object.__setattr__(self, "amplitudes", amps)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "EnsembleState":
        n2 = self.norm_sq()
        if n2 <= 0.0:
            raise DomainError("cannot normalize a zero state")
        return EnsembleState(self.n_atoms, self.amplitudes / math.sqrt(n2))

    def overlap(self, other: "EnsembleState") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class RotationMatrix:
    """Matrix R[k', k] = <k'|(x) |k> of the pi/2 rotation about y.

    Rows are indexed by the x-basis label k', columns by the z-basis label k.
    All entries are real and the matrix is orthogonal; because of that the
    transpose identity R[k', k] = <k | k'>(x) holds entry-wise.
    """

    n_atoms: int
    entries: np.ndarray = field(repr=False)


# ---------------------------------------------------------------------------
# operator matrices
# ---------------------------------------------------------------------------

def sz_diagonal(n_atoms: int) -> np.ndarray:
    """Eigenvalues 2k - N of S^z along the Dicke basis."""
    return 2.0 * np.arange(n_atoms + 1) - n_atoms


def ladder_weights(n_atoms: int) -> np.ndarray:
    """Matrix elements sqrt((k+1)(N-k)) of the raising part, k = 0..N-1."""
    k = np.arange(n_atoms)
    return np.sqrt((k + 1.0) * (n_atoms - k))


def sx_matrix(n_atoms: int) -> np.ndarray:
    w = ladder_weights(n_atoms)
    return np.diag(w, 1) + np.diag(w, -1)


def sy_matrix(n_atoms: int) -> np.ndarray:
    w = ladder_weights(n_atoms)
    return np.diag(1j * w, 1) + np.diag(-1j * w, -1)


def sz_matrix(n_atoms: int) -> np.ndarray:
    return np.diag(sz_diagonal(n_atoms))


@lru_cache(maxsize=64)
def _axis_eigensystem(n_atoms: int, axis: tuple) -> tuple:
    generator = (axis[0] * sx_matrix(n_atoms)
                 + axis[1] * sy_matrix(n_atoms)
                 + axis[2] * sz_matrix(n_atoms))
    evals, evecs = np.linalg.eigh(generator)
    evals.flags.writeable = False
    evecs.flags.writeable = False
    return evals, evecs


# ---------------------------------------------------------------------------
# state constructors
# ---------------------------------------------------------------------------

def make_dicke(n_atoms: int, k: int) -> EnsembleState:
    """The Dicke state |k>, the S^z eigenstate with eigenvalue 2k - N."""
    if not 0 <= k <= n_atoms:
        raise DomainError(f"k={k} outside [0, {n_atoms}]")
    amps = np.zeros(n_atoms + 1, dtype=complex)
    amps[k] = 1.0
    return EnsembleState(n_atoms, amps)


def _log_binomials(n_atoms: int) -> np.ndarray:
    k = np.arange(n_atoms + 1)
    return gammaln(n_atoms + 1) - gammaln(k + 1) - gammaln(n_atoms - k + 1)


def coherent_amplitudes(n_atoms: int, theta: float, phi: float) -> np.ndarray:
    """Dicke amplitudes of the product state of N qubits at (theta, phi).

    Amplitude at k is sqrt(C(N,k)) cos(theta/2)^k sin(theta/2)^(N-k)
    exp(-i phi (2k - N)/2); magnitudes are assembled in the log domain so the
    binomials never overflow.
    """
    n = n_atoms
    k = np.arange(n + 1)
    c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
    log_mag = 0.5 * _log_binomials(n)
    with np.errstate(invalid="ignore"):
        log_mag = log_mag + np.where(k > 0, k * _safe_log(c), 0.0)
        log_mag = log_mag + np.where(k < n, (n - k) * _safe_log(s), 0.0)
    phase = np.exp(-0.5j * phi * (2 * k - n))
    return np.exp(log_mag) * phase


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def make_spin_coherent(n_atoms: int, angles: BlochAngles) -> EnsembleState:
    """Spin coherent state |theta, phi>>: every qubit aligned with (theta, phi)."""
    return EnsembleState(n_atoms,
                         coherent_amplitudes(n_atoms, angles.theta, angles.phi))


# ---------------------------------------------------------------------------
# expectation values and rotations
# ---------------------------------------------------------------------------

def transition_sums(amplitudes: np.ndarray, n_atoms: int) -> tuple:
    """Raw quadratic sums (coherence, sz_sum, norm_sq) of a branch vector.

    ``coherence`` is sum_k conj(c_k) c_{k+1} sqrt((k+1)(N-k)), from which
    <S^x> = 2 Re and <S^y> = -2 Im; ``sz_sum`` is sum_k (2k-N) |c_k|^2.
    No normalization is applied, so the sums can be accumulated over branches.
    """
    w = ladder_weights(n_atoms)
    coh = complex(np.sum(np.conj(amplitudes[:-1]) * amplitudes[1:] * w))
    pops = np.abs(amplitudes) ** 2
    return coh, float(np.sum(sz_diagonal(n_atoms) * pops)), float(np.sum(pops))


def spin_expectation(state: EnsembleState) -> SpinVector:
    """Expectation values (<S^x>, <S^y>, <S^z>) of a normalized state."""
    if abs(state.norm_sq() - 1.0) > NORM_TOL:
        raise ContractViolation(
            f"state norm^2 deviates from 1 by {abs(state.norm_sq() - 1.0):.3e}")
    coh, sz_sum, _ = transition_sums(state.amplitudes, state.n_atoms)
    return SpinVector(2.0 * coh.real, -2.0 * coh.imag, sz_sum)


def apply_rotation(state: EnsembleState, axis, angle: float) -> EnsembleState:
    """Rotate by exp(-i (axis . S) angle / 2) via the generator eigensystem."""
    ax = np.asarray(axis, dtype=float)
    if ax.shape != (3,) or abs(np.linalg.norm(ax) - 1.0) > 1e-9:
        raise DomainError("rotation axis must be a 3-component unit vector")
    evals, evecs = _axis_eigensystem(state.n_atoms, tuple(np.round(ax, 15)))
    phases = np.exp(-0.5j * angle * evals)
    rotated = evecs @ (phases * (evecs.conj().T @ state.amplitudes))
    return EnsembleState(state.n_atoms, rotated)


# ---------------------------------------------------------------------------
# the pi/2 y-rotation matrix (z basis <-> x basis)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def half_pi_y_rotation(n_atoms: int) -> np.ndarray:
    """Matrix of exp(-i S^y pi/4); column k' is the x-basis state |k'>(x).

    Computed as a function of the Hermitian S^y through its eigensystem, which
    stays accurate for any practical N.  The generator -i S^y is real, so the
    exponential is a real orthogonal matrix; the imaginary residue is checked
    and dropped.
    """
    evals, evecs = np.linalg.eigh(sy_matrix(n_atoms))
    mat = (evecs * np.exp(-0.25j * math.pi * evals)) @ evecs.conj().T
    resid = float(np.max(np.abs(mat.imag)))
    if resid > 1e-11:
        raise ContractViolation(f"pi/2 rotation not real: residue {resid:.3e}")
    out = np.ascontiguousarray(mat.real)
    out.flags.writeable = False
    return out


def r_matrix(n_atoms: int) -> RotationMatrix:
    """R[k', k] = <k'|(x) |k> for the pi/2 rotation between z and x bases."""
    if n_atoms < 1:
        raise DomainError("n_atoms must be >= 1")
    return RotationMatrix(n_atoms, half_pi_y_rotation(n_atoms).T)


def r_matrix_reference(n_atoms: int, k_prime: int, k: int) -> float:
    """Alternating factorial-sum form of R[k', k], exact in rational arithmetic.

    Retained solely as a small-N oracle (N <~ 30): the alternating sum is the
    textbook closed form but cancels catastrophically in floating point for
    larger N, which is why `r_matrix` uses the eigendecomposition route.
    """
    n = n_atoms
    if not (0 <= k <= n and 0 <= k_prime <= n):
        raise DomainError("indices outside [0, N]")
    total = Fraction(0)
    for m in range(max(k - k_prime, 0), min(k, n - k_prime) + 1):
        term = Fraction(
            (-1) ** m,
            math.factorial(k - m) * math.factorial(n - k_prime - m)
            * math.factorial(m) * math.factorial(k_prime - k + m))
        total += term
    if total == 0:
        return 0.0
    log_pref = 0.5 * (gammaln(k + 1) + gammaln(n - k + 1)
                      + gammaln(k_prime + 1) + gammaln(n - k_prime + 1)
                      - n * math.log(2.0))
    num, den = total.numerator, total.denominator
    sign = 1.0 if num > 0 else -1.0
    log_sum = math.log(abs(num)) - math.log(den)
    return sign * math.exp(log_pref + log_sum)


# ---------------------------------------------------------------------------
# Q function
# ---------------------------------------------------------------------------

def coherent_amplitude_table(n_atoms: int, thetas: np.ndarray,
                             phis: np.ndarray) -> np.ndarray:
    """Matrix C[g, k] of coherent-state amplitudes for paired angle arrays."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    k = np.arange(n_atoms + 1)
    half = 0.5 * thetas[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_c = np.where(k[None, :] > 0,
                         k[None, :] * np.log(np.maximum(np.cos(half), 0.0)),
                         0.0)
        log_s = np.where(k[None, :] < n_atoms,
                         (n_atoms - k[None, :]) * np.log(np.maximum(np.sin(half), 0.0)),
                         0.0)
    log_mag = 0.5 * _log_binomials(n_atoms)[None, :] + log_c + log_s
    phase = np.exp(-0.5j * phis[:, None] * (2 * k - n_atoms)[None, :])
    return np.exp(log_mag) * phase


def q_function(state: EnsembleState, grid) -> np.ndarray:
    """Q(theta, phi) = |<state | theta, phi>>|^2 on a list of Bloch angles.

    The state is used as given; no normalization is applied.
    """
    angles = list(grid)
    thetas = np.array([a.theta for a in angles])
    phis = np.array([a.phi for a in angles])
    table = coherent_amplitude_table(state.n_atoms, thetas, phis)
    overlaps = table @ np.conj(state.amplitudes)
    return np.abs(overlaps) ** 2


def q_function_grid(state: EnsembleState, thetas: np.ndarray,
                    phis: np.ndarray) -> np.ndarray:
    """Q function on the outer product of theta and phi arrays, shape (T, P)."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    out = np.empty((thetas.size, phis.size))
    conj_state = np.conj(state.amplitudes)
    for i, th in enumerate(thetas):
        table = coherent_amplitude_table(
            state.n_atoms, np.full(phis.size, th), phis)
        out[i] = np.abs(table @ conj_state) ** 2
    return out
