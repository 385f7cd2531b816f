"""Outcome statistics, classical bounds, and the dephasing channel.

Aggregation turns an enumerated (or sampled) outcome set into the average
teleported spin, the average Bloch angles, the angular error against the
reference input, and the directional standard deviations along the local
theta and phi unit vectors of the reference point.

The classical benchmark is the quantum-state-estimation bound: a
measure-and-transmit strategy on N qubit copies cannot beat an angular error
of 1/sqrt(N+2).

Dephasing is a Gaussian mixture of collective x-rotations applied to all
three ensembles after the initial-state preparation and again after the
measurements.  The rotations acting on the receiving ensemble integrate out
exactly (each Gaussian contributes e^(-gamma t / 2) to the damping of the
y and z spin components); the rotation of Alice's input survives inside the
measurement pipeline and is integrated numerically by Gauss-Hermite
quadrature.  The closed-form shortcut damps the y and z components of a
branch's spin by e^(-2 gamma t) and leaves x alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractViolation, DomainError
from .spincore import BlochAngles, SpinVector, sx_matrix
from .teleport import (InitialConfig, OutcomeRecord, OutcomeTable,
                       apply_corrections, delta_plus, outcome_sums,
                       table_from_sums)

__all__ = [
    "TeleportStats", "DephasingChannel", "ScanRow",
    "aggregate", "tel_error", "qse_bound",
    "c_coefficient", "c_coefficient_root",
    "dephase_closed_form", "dephase_quadrature_oracle",
    "dephased_outcome_table", "dephased_error_scan",
]


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TeleportStats:
    """Ensemble statistics of one protocol run against a reference input."""

    avg_spin: SpinVector
    avg_angles: BlochAngles
    eps_tel: float
    dtheta: float
    dphi: float
    prob_sum: float
    phi_defined_weight: float


def tel_error(ref: BlochAngles, avg: BlochAngles) -> float:
    """Half the Euclidean distance between the two Bloch unit vectors."""
    return float(0.5 * np.linalg.norm(ref.unit_vector() - avg.unit_vector()))


def _as_arrays(outcomes):
    """Accept an OutcomeTable or a list of OutcomeRecord."""
    if isinstance(outcomes, OutcomeTable):
        return (outcomes.n_atoms, outcomes.probs, outcomes.tel,
                outcomes.phi_defined)
    records = list(outcomes)
    if not records:
        raise DomainError("empty outcome set")
    n = records[0].n_atoms
    probs = np.array([r.probability for r in records])
    tel = np.array([[r.tel_spin.sx, r.tel_spin.sy, r.tel_spin.sz]
                    for r in records])
    defined = np.array([r.phi_defined for r in records], dtype=bool)
    return n, probs, tel, defined


def aggregate(outcomes, reference: BlochAngles) -> TeleportStats:
    """Average spin, average angles, angular error, and angular spreads.

    Outcomes with an undefined azimuth still contribute their spin vectors to
    the averages and to the theta spread; they are excluded (with the weights
    renormalized) only from the phi spread, where their direction carries no
    information.
    """
    n, probs, tel, defined = _as_arrays(outcomes)
    if probs.size == 0:
        raise DomainError("empty outcome set")
    prob_sum = float(probs.sum())
    if abs(prob_sum - 1.0) > 1e-9:
        raise ContractViolation(
            f"outcome probabilities sum to {prob_sum}, not 1")
    avg = probs @ tel
    theta_av = math.acos(min(max(avg[2] / n, -1.0), 1.0))
    phi_av = math.atan2(avg[1], avg[0])
    avg_angles = BlochAngles(theta_av, phi_av)
    eps = tel_error(reference, avg_angles)

    ct, st = math.cos(reference.theta), math.sin(reference.theta)
    cp, sp = math.cos(reference.phi), math.sin(reference.phi)
    s_theta = (ct * cp * tel[:, 0] + ct * sp * tel[:, 1] - st * tel[:, 2]) / n
    dtheta = _weighted_std(s_theta, probs)

    s_phi = (-sp * tel[:, 0] + cp * tel[:, 1]) / n
    def_weight = float(probs[defined].sum())
    if def_weight > 0.0:
        dphi = _weighted_std(s_phi[defined], probs[defined] / def_weight)
    else:
        dphi = 0.0
    return TeleportStats(SpinVector(*avg), avg_angles, eps, dtheta, dphi,
                         prob_sum, def_weight)


def _weighted_std(values: np.ndarray, weights: np.ndarray) -> float:
    mean = float(weights @ values)
    second = float(weights @ (values * values))
    return math.sqrt(max(second - mean * mean, 0.0))


# ---------------------------------------------------------------------------
# classical bound and attenuation coefficient
# ---------------------------------------------------------------------------

def qse_bound(n_atoms: int) -> float:
    """Best angular error of the classical estimate-and-resend strategy,
    1/sqrt(N+2), from the optimal qubit estimation fidelity (N+1)/(N+2)."""
    if n_atoms < 0:
        raise DomainError("n_atoms must be >= 0")
    return 1.0 / math.sqrt(n_atoms + 2.0)


def c_coefficient(n_atoms: int, delta: int) -> float:
    """Transverse attenuation sum_(k') (2k'-N)(2k'+2 delta-N)/N^2.

    The sum runs over the x-basis labels admitted by the shift delta.  This
    form is authoritative; the factorized root form reproduces it only up to
    an overall N^2, so it is used solely as a sign oracle.
    """
    n = n_atoms
    if abs(delta) > n:
        raise DomainError("|delta| exceeds N")
    kp = np.arange(max(0, -delta), min(n, n - delta) + 1)
    return float(np.sum((2 * kp - n) * (2 * kp + 2 * delta - n)) / n**2)


def c_coefficient_root(n_atoms: int, delta: int) -> float:
    """Factorized form (2/3)(|d|-d+)(|d|-d-)(|d|-N-1); same sign pattern as
    the sum form (negative exactly for d+ < |d| < N+1), N^2 times its size."""
    n = n_atoms
    a = abs(delta)
    dp = delta_plus(n)
    dm = 0.5 * (-n - 1.0 - math.sqrt(3.0 * n * n + 6.0 * n + 1.0))
    return (2.0 / 3.0) * (a - dp) * (a - dm) * (a - n - 1.0)


# ---------------------------------------------------------------------------
# dephasing channel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DephasingChannel:
    """Collective x-dephasing of strength gamma_t, with the quadrature order
    used when the remaining Gaussian integral is evaluated numerically."""

    gamma_t: float
    quadrature_order: int = 64

    def __post_init__(self):
        if self.gamma_t < 0.0:
            raise DomainError("gamma_t must be >= 0")
        if self.quadrature_order < 1:
            raise DomainError("quadrature order must be >= 1")


def dephase_closed_form(record: OutcomeRecord, ch: DephasingChannel) -> SpinVector:
    """Closed-form dephased teleported spin of one outcome.

    Damps the branch's raw y and z components by e^(-2 gamma t), leaves x
    unchanged, and reapplies the outcome's correction law.
    """
    damp = math.exp(-2.0 * ch.gamma_t)
    raw = record.raw_spin
    damped = SpinVector(raw.sx, damp * raw.sy, damp * raw.sz)
    return apply_corrections(record.protocol, record.n_atoms, record.indices,
                             damped)


@lru_cache(maxsize=32)
def _sx_eigensystem(n_atoms: int):
    evals, evecs = np.linalg.eigh(sx_matrix(n_atoms))
    evals.flags.writeable = False
    evecs.flags.writeable = False
    return evals, evecs


def _dephasing_nodes(ch: DephasingChannel):
    """Nodes and weights for averaging over the Gaussian rotation angle."""
    if ch.gamma_t == 0.0:
        return np.array([0.0]), np.array([1.0])
    u, w = np.polynomial.hermite.hermgauss(ch.quadrature_order)
    return math.sqrt(2.0 * ch.gamma_t) * u, w / math.sqrt(math.pi)


def _rotated_inputs(n_atoms: int, psi: np.ndarray, xis: np.ndarray) -> np.ndarray:
    """Inputs under the stochastic x-rotation by each angle xi.

    The rotation acts as a Bloch rotation by the raw Gaussian variable, so a
    single Gaussian average damps a transverse expectation by exactly
    e^(-gamma t / 2); this is the normalization under which the closed-form
    e^(-2 gamma t) damping emerges from the four independent noises.
    """
    evals, evecs = _sx_eigensystem(n_atoms)
    coeffs = evecs.T @ psi
    phases = np.exp(0.5j * np.outer(xis, evals))
    return (phases * coeffs[None, :]) @ evecs.T


def _damp_yz(ch: DephasingChannel) -> float:
    # three unit-variance Gaussians act on the receiving ensemble: the two
    # initial-state noises pushed through the entangled pairing plus the
    # post-measurement noise
    return math.exp(-1.5 * ch.gamma_t)


def dephased_outcome_table(cfg: InitialConfig, protocol: str,
                           ch: DephasingChannel) -> OutcomeTable:
    """Full outcome lattice with dephasing folded in.

    Accumulates the unnormalized branch sums over the quadrature nodes of the
    input-rotation integral, applies the exact e^(-3 gamma t / 2) damping of
    the remaining noises to the y and z sums, then normalizes and corrects.
    Probabilities are the dephased outcome probabilities.
    """
    n = cfg.n_atoms
    protocol = protocol.upper()
    xis, weights = _dephasing_nodes(ch)
    states = _rotated_inputs(n, cfg.psi0.amplitudes, xis)
    indices = None
    probs = coh = szs = None
    for q in range(xis.size):
        idx, p, c, s = outcome_sums(n, states[q], protocol)
        if probs is None:
            indices, probs = idx, weights[q] * p
            coh, szs = weights[q] * c, weights[q] * s
        else:
            probs += weights[q] * p
            coh += weights[q] * c
            szs += weights[q] * s
    return table_from_sums(protocol, n, indices, probs, coh, szs,
                           damp_yz=_damp_yz(ch))


def dephase_quadrature_oracle(cfg: InitialConfig, protocol: str,
                              outcome_indices: tuple,
                              ch: DephasingChannel) -> SpinVector:
    """Dephased raw spin of a single outcome, by quadrature.

    Rebuilds the exact conditional branch for every rotated input, averages
    the unnormalized spin sums over the Gaussian, applies the analytic
    damping of the receiving-side noises, and normalizes by the dephased
    outcome probability.  Requires quadrature order >= 8.
    """
    if ch.gamma_t > 0.0 and ch.quadrature_order < 8:
        raise DomainError("oracle path requires quadrature order >= 8")
    from .spincore import EnsembleState
    from .teleport import protocol1_branch, protocol2_branch, transition_branch_sums

    n = cfg.n_atoms
    protocol = protocol.upper()
    xis, weights = _dephasing_nodes(ch)
    states = _rotated_inputs(n, cfg.psi0.amplitudes, xis)
    coh_acc = 0.0 + 0.0j
    sz_acc = 0.0
    p_acc = 0.0
    for q in range(xis.size):
        sub = InitialConfig(n, EnsembleState(n, states[q]))
        if protocol == "I":
            branched, _ = protocol1_branch(sub, *outcome_indices)
        else:
            branched, _ = protocol2_branch(sub, *outcome_indices)
        coh, szsum, prob = transition_branch_sums(branched)
        coh_acc += weights[q] * coh
        sz_acc += weights[q] * szsum
        p_acc += weights[q] * prob
    if p_acc <= 0.0:
        return SpinVector(0.0, 0.0, 0.0)
    damp = _damp_yz(ch)
    return SpinVector(2.0 * coh_acc.real / p_acc,
                      -2.0 * coh_acc.imag * damp / p_acc,
                      sz_acc * damp / p_acc)


# ---------------------------------------------------------------------------
# error scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRow:
    """One point of a dephased-error scan."""

    protocol: str
    n_atoms: int
    theta0: float
    phi0: float
    gamma_t: float
    eps_tel: float
    dtheta: float


def dephased_error_scan(protocol: str, n_list, theta0_grid, phi0_list,
                        gamma_t_list, quadrature_order: int = 64) -> list:
    """Average teleportation error over a (N, theta0, phi0, gamma_t) grid.

    Every point runs the dephased enumeration (quadrature pipeline) and
    aggregates against its own reference angles.
    """
    n_list = list(n_list)
    theta0_grid = list(theta0_grid)
    phi0_list = list(phi0_list)
    gamma_t_list = list(gamma_t_list)
    if not (n_list and theta0_grid and phi0_list and gamma_t_list):
        raise DomainError("scan grids must be nonempty")
    rows = []
    for n in n_list:
        for theta0 in theta0_grid:
            for phi0 in phi0_list:
                cfg = InitialConfig.coherent(n, theta0, phi0)
                ref = BlochAngles(theta0, phi0)
                for gt in gamma_t_list:
                    ch = DephasingChannel(gt, quadrature_order)
                    table = dephased_outcome_table(cfg, protocol, ch)
                    stats = aggregate(table, ref)
                    rows.append(ScanRow(protocol.upper(), n, theta0, phi0,
                                        gt, stats.eps_tel, stats.dtheta))
    return rows
