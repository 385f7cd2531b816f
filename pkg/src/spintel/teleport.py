"""The two measurement-based teleportation protocols, exactly.

Both protocols start from Alice's input state on ensemble 1 and a maximally
entangled pairing shared between ensembles 2 and 3.

Protocol I performs one relative-number QND measurement in the z basis
(outcome delta) followed by local x-basis number measurements of Alice's two
ensembles (outcomes k1, k2).  Ensemble 3 then holds the pure branch whose
amplitude at index k + delta is psi_k R[k1, k] R[k2, k + delta] / sqrt(N+1),
with R the pi/2 rotation matrix between the bases.

Protocol II replaces the local measurements by a second QND measurement in
the x basis (outcomes delta1, delta2); ensemble 3 stays entangled with the
others, leaving one branch vector per x-basis label k'.

Bob corrects his measured spin according to the classically communicated
outcomes: a sign flip of the transverse components keyed to the outcome
labels, a shift of the longitudinal component by twice the z-basis QND
outcome, and the matching azimuth convention.  The module enumerates every
outcome with its exact Born probability, applies the corrections, and can
also draw single runs from the exact joint distribution with a seeded
generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DomainError
from .spincore import (BlochAngles, EnsembleState, SpinVector,
                       half_pi_y_rotation, ladder_weights, make_spin_coherent,
                       sz_diagonal)

PHI_UNDEFINED_TOL = 1e-11


def delta_plus(n_atoms: int) -> float:
    """Positive root (-N - 1 + sqrt(3N^2 + 6N + 1)) / 2 of the transverse
    attenuation coefficient; Protocol II flips signs for |delta2| past it."""
    n = n_atoms
    return 0.5 * (-n - 1.0 + math.sqrt(3.0 * n * n + 6.0 * n + 1.0))


def heaviside(x: float) -> int:
    """Step function with H(0) = 1."""
    return 1 if x >= 0 else 0


# ---------------------------------------------------------------------------
# configuration and result records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialConfig:
    """Alice's input: ensemble size and the normalized state to teleport."""

    n_atoms: int
    psi0: EnsembleState

    def __post_init__(self):
        if self.psi0.n_atoms != self.n_atoms:
            raise DomainError("psi0 ensemble size mismatch")
        if abs(self.psi0.norm_sq() - 1.0) > 1e-9:
            raise ContractViolation("psi0 must be normalized")

    @staticmethod
    def coherent(n_atoms: int, theta: float, phi: float) -> "InitialConfig":
        return InitialConfig(
            n_atoms, make_spin_coherent(n_atoms, BlochAngles(theta, phi)))

    @staticmethod
    def squeezed(n_atoms: int, theta: float, phi: float) -> "InitialConfig":
        """Coherent input sheared by the one-axis phase exp(i (S^z)^2 / 2N).

        Exposed for exploration: non-coherent inputs are not covered by the
        zero-error guarantees of the protocols.
        """
        base = make_spin_coherent(n_atoms, BlochAngles(theta, phi))
        sz = sz_diagonal(n_atoms)
        sheared = np.exp(0.5j * sz * sz / n_atoms) * base.amplitudes
        return InitialConfig(n_atoms, EnsembleState(n_atoms, sheared))


@dataclass(frozen=True)
class OutcomeRecord:
    """One measurement outcome with spins before and after correction."""

    protocol: str                 # "I" or "II"
    n_atoms: int
    indices: tuple                # (delta, k1, k2) or (delta1, delta2)
    probability: float
    raw_spin: SpinVector          # <S_3> of the normalized conditional state
    tel_spin: SpinVector          # after the protocol's correction law
    tel_angles: BlochAngles
    uncorrected_angles: BlochAngles
    phi_defined: bool


@dataclass(frozen=True)
class BranchedState:
    """Conditional state on ensemble 3: one vector per branch label.

    Protocol I outcomes disentangle ensemble 3, leaving a single branch
    (labels is None); Protocol II outcomes keep one vector per x-basis label
    k' of Alice's first ensemble.  The vectors are unnormalized and their
    total squared weight equals the outcome probability.
    """

    n_atoms: int
    labels: tuple | None
    vectors: np.ndarray = field(repr=False)

    def total_weight(self) -> float:
        return float(np.sum(np.abs(self.vectors) ** 2))

    def reduced_rho3(self) -> np.ndarray:
        return np.einsum("lj,lk->jk", self.vectors, np.conj(self.vectors))


def transition_branch_sums(branched: BranchedState):
    """Unnormalized (coherence, sz_sum, weight) accumulated over branches."""
    n = branched.n_atoms
    w = ladder_weights(n)
    vecs = branched.vectors
    coh = complex(np.sum(np.conj(vecs[:, :-1]) * vecs[:, 1:] * w[None, :]))
    pops = np.abs(vecs) ** 2
    return coh, float(np.sum(pops @ sz_diagonal(n))), float(np.sum(pops))


# ---------------------------------------------------------------------------
# outcome tables (vectorized enumeration)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OutcomeTable:
    """Flat arrays over the full outcome lattice of one protocol run."""

    protocol: str
    n_atoms: int
    indices: np.ndarray           # (M, 3) for I, (M, 2) for II
    probs: np.ndarray             # (M,)
    raw: np.ndarray               # (M, 3) normalized conditional spins
    tel: np.ndarray               # (M, 3) corrected spins
    phi_defined: np.ndarray       # (M,) bool

    def theta_tel(self) -> np.ndarray:
        return np.arccos(np.clip(self.tel[:, 2] / self.n_atoms, -1.0, 1.0))

    def phi_tel(self) -> np.ndarray:
        """Azimuth of the corrected spin; 0 where undefined."""
        return np.where(self.phi_defined,
                        np.arctan2(self.tel[:, 1], self.tel[:, 0]), 0.0)

    def uncorrected_theta(self) -> np.ndarray:
        return np.arccos(np.clip(self.raw[:, 2] / self.n_atoms, -1.0, 1.0))

    def uncorrected_phi(self) -> np.ndarray:
        return np.where(self.phi_defined,
                        np.arctan2(self.raw[:, 1], self.raw[:, 0]), 0.0)

    def records(self) -> list:
        theta_t, phi_t = self.theta_tel(), self.phi_tel()
        theta_u, phi_u = self.uncorrected_theta(), self.uncorrected_phi()
        out = []
        for m in range(self.probs.size):
            out.append(OutcomeRecord(
                protocol=self.protocol,
                n_atoms=self.n_atoms,
                indices=tuple(int(i) for i in self.indices[m]),
                probability=float(self.probs[m]),
                raw_spin=SpinVector(*self.raw[m]),
                tel_spin=SpinVector(*self.tel[m]),
                tel_angles=BlochAngles(float(theta_t[m]), float(phi_t[m])),
                uncorrected_angles=BlochAngles(float(theta_u[m]),
                                               float(phi_u[m])),
                phi_defined=bool(self.phi_defined[m]),
            ))
        return out


_SIGN_ERROR = False   # test hook: deliberately corrupt the correction law


class corrupted_corrections:
    """Context manager that flips the correction signs (mutation canary)."""

    def __enter__(self):
        global _SIGN_ERROR
        _SIGN_ERROR = True
        return self

    def __exit__(self, *exc):
        global _SIGN_ERROR
        _SIGN_ERROR = False
        return False


def _finalize_raw(coh: np.ndarray, szs: np.ndarray, probs: np.ndarray,
                  damp_yz: float = 1.0):
    """Normalized (sx, sy, sz) per outcome from accumulated quadratic sums.

    ``damp_yz`` scales the y and z components; the dephasing channel damps
    exactly those two while leaving the x component untouched.
    """
    safe = np.where(probs > 0.0, probs, 1.0)
    sx = 2.0 * coh.real / safe
    sy = -2.0 * coh.imag * damp_yz / safe
    sz = szs * damp_yz / safe
    zero = probs <= 0.0
    raw = np.stack([sx, sy, sz], axis=-1)
    raw[zero] = 0.0
    return raw


def _protocol1_sums(n: int, psi: np.ndarray):
    """Unnormalized per-outcome sums for Protocol I.

    Returns (deltas, probs, coh, szs) with outcome axes [delta, k1, k2].
    """
    rot = half_pi_y_rotation(n)
    r = rot.T                                   # r[k', k]
    w = ladder_weights(n)                       # sqrt((j+1)(N-j))
    szd = sz_diagonal(n)
    deltas = np.arange(-n, n + 1)
    shape = (deltas.size, n + 1, n + 1)
    probs = np.zeros(shape)
    coh = np.zeros(shape, dtype=complex)
    szs = np.zeros(shape)
    r2 = r * r
    for i, delta in enumerate(deltas):
        lo, hi = max(0, -delta), min(n, n - delta)
        ks = np.arange(lo, hi + 1)
        js = ks + delta
        pk = psi[ks]
        a2 = r2[:, ks]
        b2 = r2[:, js]
        mags = np.abs(pk) ** 2
        probs[i] = np.einsum("k,ak,bk->ab", mags, a2, b2) / (n + 1)
        szs[i] = np.einsum("k,ak,bk->ab", mags * szd[js], a2, b2) / (n + 1)
        if ks.size > 1:
            g = np.conj(pk[:-1]) * pk[1:] * w[js[:-1]]
            pa = r[:, ks[:-1]] * r[:, ks[1:]]
            pb = r[:, js[:-1]] * r[:, js[1:]]
            coh[i] = np.einsum("k,ak,bk->ab", g, pa, pb) / (n + 1)
    return deltas, probs, coh, szs


def _protocol2_sums(n: int, psi: np.ndarray):
    """Unnormalized per-outcome sums for Protocol II over [delta1, delta2]."""
    rot = half_pi_y_rotation(n)
    r = rot.T
    w = ladder_weights(n)
    szd = sz_diagonal(n)
    deltas = np.arange(-n, n + 1)
    shape = (deltas.size, deltas.size)
    probs = np.zeros(shape)
    coh = np.zeros(shape, dtype=complex)
    szs = np.zeros(shape)
    for i1, d1 in enumerate(deltas):
        lo, hi = max(0, -d1), min(n, n - d1)
        ks = np.arange(lo, hi + 1)
        js = ks + d1
        pk = psi[ks]
        for i2, d2 in enumerate(deltas):
            kps = np.arange(max(0, -d2), min(n, n - d2) + 1)
            c = pk[None, :] * r[np.ix_(kps, ks)] * r[np.ix_(kps + d2, js)]
            mags = np.abs(c) ** 2
            probs[i1, i2] = mags.sum() / (n + 1)
            szs[i1, i2] = (mags @ szd[js]).sum() / (n + 1)
            if ks.size > 1:
                pair = np.conj(c[:, :-1]) * c[:, 1:]
                coh[i1, i2] = (pair @ w[js[:-1]]).sum() / (n + 1)
    return deltas, probs, coh, szs


def lattice_indices(protocol: str, n: int) -> np.ndarray:
    """Flat outcome index lists: (delta, k1, k2) rows or (delta1, delta2)."""
    deltas = np.arange(-n, n + 1)
    if protocol == "I":
        dd, k1, k2 = np.meshgrid(deltas, np.arange(n + 1), np.arange(n + 1),
                                 indexing="ij")
        return np.stack([dd.ravel(), k1.ravel(), k2.ravel()], axis=-1)
    d1, d2 = np.meshgrid(deltas, deltas, indexing="ij")
    return np.stack([d1.ravel(), d2.ravel()], axis=-1)


def outcome_sums(n: int, psi: np.ndarray, protocol: str):
    """Flat unnormalized per-outcome sums (indices, probs, coherence, sz).

    The coherence column holds sum_j conj(b_j) b_{j+1} sqrt((j+1)(N-j)) of
    each conditional branch, from which the transverse spins follow; sums are
    additive over branches and over input mixtures, so the dephasing
    quadrature accumulates them across rotated inputs before normalizing.
    """
    protocol = protocol.upper()
    if protocol == "I":
        _, probs, coh, szs = _protocol1_sums(n, psi)
    elif protocol == "II":
        _, probs, coh, szs = _protocol2_sums(n, psi)
    else:
        raise DomainError(f"unknown protocol {protocol!r}")
    return (lattice_indices(protocol, n), probs.reshape(-1),
            coh.reshape(-1), szs.reshape(-1))


def correction_signs(protocol: str, n: int, indices: np.ndarray) -> np.ndarray:
    """Outcome-conditioned sign of the transverse correction, vectorized."""
    if protocol == "I":
        sign = np.where(((2 * indices[:, 1] >= n).astype(int)
                         + (2 * indices[:, 2] >= n).astype(int)) % 2 == 1,
                        -1.0, 1.0)
    else:
        sign = np.where(np.abs(indices[:, 1]) >= delta_plus(n), -1.0, 1.0)
    if _SIGN_ERROR:
        sign = -sign
    return sign


def table_from_sums(protocol: str, n: int, indices: np.ndarray,
                    probs: np.ndarray, coh: np.ndarray, szs: np.ndarray,
                    damp_yz: float = 1.0) -> OutcomeTable:
    """Assemble an OutcomeTable from accumulated sums, applying corrections."""
    raw = _finalize_raw(coh, szs, probs, damp_yz)
    sign = correction_signs(protocol, n, indices)
    tel = raw.copy()
    tel[:, 0] *= sign
    tel[:, 1] *= sign
    tel[:, 2] -= 2.0 * indices[:, 0]
    defined = np.hypot(raw[:, 0], raw[:, 1]) > PHI_UNDEFINED_TOL
    return OutcomeTable(protocol, n, indices, probs, raw, tel, defined)


def outcome_table(cfg: InitialConfig, protocol: str,
                  psi_override: np.ndarray | None = None) -> OutcomeTable:
    """Enumerate the full outcome lattice of either protocol as flat arrays.

    ``psi_override`` substitutes a different (normalized) input amplitude
    vector while keeping the configured ensemble size; the dephasing
    quadrature uses it to rebuild branches from rotated inputs.
    """
    psi = cfg.psi0.amplitudes if psi_override is None else psi_override
    protocol = protocol.upper()
    indices, probs, coh, szs = outcome_sums(cfg.n_atoms, psi, protocol)
    return table_from_sums(protocol, cfg.n_atoms, indices, probs, coh, szs)


# ---------------------------------------------------------------------------
# single-outcome branches
# ---------------------------------------------------------------------------

def _correct(protocol: str, n: int, indices: tuple, raw: SpinVector) -> SpinVector:
    """Apply the protocol's correction law to a raw conditional spin."""
    if protocol == "I":
        delta, k1, k2 = indices
        sign = (-1.0) ** (heaviside(k1 - 0.5 * n) + heaviside(k2 - 0.5 * n))
        shift = 2.0 * delta
    else:
        delta1, delta2 = indices
        sign = (-1.0) ** heaviside(abs(delta2) - delta_plus(n))
        shift = 2.0 * delta1
    if _SIGN_ERROR:
        sign = -sign
    return SpinVector(sign * raw.sx, sign * raw.sy, raw.sz - shift)


def apply_corrections(protocol: str, n_atoms: int, indices: tuple,
                      raw: SpinVector) -> SpinVector:
    """Public entry point for the outcome-conditioned correction law."""
    return _correct(protocol.upper(), n_atoms, tuple(indices), raw)


def _record_from_branch(protocol: str, n: int, indices: tuple,
                        coh: complex, szsum: float, prob: float) -> OutcomeRecord:
    if prob > 0.0:
        raw = SpinVector(2.0 * coh.real / prob, -2.0 * coh.imag / prob,
                         szsum / prob)
    else:
        raw = SpinVector(0.0, 0.0, 0.0)
    tel = _correct(protocol, n, indices, raw)
    defined = math.hypot(raw.sx, raw.sy) > PHI_UNDEFINED_TOL
    theta_t = math.acos(min(max(tel.sz / n, -1.0), 1.0))
    phi_t = math.atan2(tel.sy, tel.sx) if defined else 0.0
    theta_u = math.acos(min(max(raw.sz / n, -1.0), 1.0))
    phi_u = math.atan2(raw.sy, raw.sx) if defined else 0.0
    return OutcomeRecord(protocol, n, indices, prob, raw, tel,
                         BlochAngles(theta_t, phi_t),
                         BlochAngles(theta_u, phi_u), defined)


def protocol1_branch(cfg: InitialConfig, delta: int, k1: int, k2: int):
    """Exact conditional state and record for one Protocol I outcome."""
    n = cfg.n_atoms
    if abs(delta) > n:
        raise DomainError(f"|delta|={abs(delta)} exceeds N={n}")
    if not (0 <= k1 <= n and 0 <= k2 <= n):
        raise DomainError("k1, k2 outside [0, N]")
    r = half_pi_y_rotation(n).T
    psi = cfg.psi0.amplitudes
    lo, hi = max(0, -delta), min(n, n - delta)
    ks = np.arange(lo, hi + 1)
    branch = np.zeros(n + 1, dtype=complex)
    branch[ks + delta] = (psi[ks] * r[k1, ks] * r[k2, ks + delta]
                          / math.sqrt(n + 1))
    branched = BranchedState(n, None, branch[None, :])
    coh, szsum, prob = transition_branch_sums(branched)
    record = _record_from_branch("I", n, (delta, k1, k2), coh, szsum, prob)
    return branched, record


def protocol2_branch(cfg: InitialConfig, delta1: int, delta2: int):
    """Exact conditional branches and record for one Protocol II outcome."""
    n = cfg.n_atoms
    if abs(delta1) > n or abs(delta2) > n:
        raise DomainError("|delta| exceeds N")
    r = half_pi_y_rotation(n).T
    psi = cfg.psi0.amplitudes
    ks = np.arange(max(0, -delta1), min(n, n - delta1) + 1)
    kps = np.arange(max(0, -delta2), min(n, n - delta2) + 1)
    c = (psi[None, ks] * r[np.ix_(kps, ks)] * r[np.ix_(kps + delta2, ks + delta1)]
         / math.sqrt(n + 1))
    vectors = np.zeros((kps.size, n + 1), dtype=complex)
    vectors[:, ks + delta1] = c
    branched = BranchedState(n, tuple(int(k) for k in kps), vectors)
    coh, szsum, prob = transition_branch_sums(branched)
    record = _record_from_branch("II", n, (delta1, delta2), coh, szsum, prob)
    return branched, record


# ---------------------------------------------------------------------------
# enumeration and sampling
# ---------------------------------------------------------------------------

def protocol1_enumerate(cfg: InitialConfig) -> list:
    """All (delta, k1, k2) outcomes of Protocol I; probabilities sum to 1."""
    return outcome_table(cfg, "I").records()


def protocol2_enumerate(cfg: InitialConfig) -> list:
    """All (delta1, delta2) outcomes of Protocol II; probabilities sum to 1."""
    return outcome_table(cfg, "II").records()


def _draw_inverse_cdf(probs: np.ndarray, rng) -> int:
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(idx, probs.size - 1)


def sample_run(cfg: InitialConfig, protocol: str, seed,
               mode: str = "joint") -> OutcomeRecord:
    """Draw one outcome from the exact joint distribution.

    ``seed`` may be an integer or a numpy Generator.  ``mode`` selects the
    sampling route: "joint" inverts the CDF of the flattened lattice, "chain"
    draws the z-basis outcome from its marginal first and the remaining
    indices from the conditional, which is distributionally identical.
    """
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    table = outcome_table(cfg, protocol)
    if mode == "joint":
        flat = _draw_inverse_cdf(table.probs, rng)
    elif mode == "chain":
        n = cfg.n_atoms
        lattice = table.probs.reshape(2 * n + 1, -1)
        marginal = lattice.sum(axis=1)
        first = _draw_inverse_cdf(marginal, rng)
        rest = _draw_inverse_cdf(lattice[first], rng)
        flat = first * lattice.shape[1] + rest
    else:
        raise DomainError(f"unknown sampling mode {mode!r}")
    return _single_record(table, flat)


def _single_record(table: OutcomeTable, m: int) -> OutcomeRecord:
    theta_t = float(np.arccos(np.clip(table.tel[m, 2] / table.n_atoms, -1, 1)))
    theta_u = float(np.arccos(np.clip(table.raw[m, 2] / table.n_atoms, -1, 1)))
    defined = bool(table.phi_defined[m])
    phi_t = float(np.arctan2(table.tel[m, 1], table.tel[m, 0])) if defined else 0.0
    phi_u = float(np.arctan2(table.raw[m, 1], table.raw[m, 0])) if defined else 0.0
    return OutcomeRecord(
        table.protocol, table.n_atoms,
        tuple(int(i) for i in table.indices[m]),
        float(table.probs[m]),
        SpinVector(*table.raw[m]), SpinVector(*table.tel[m]),
        BlochAngles(theta_t, phi_t), BlochAngles(theta_u, phi_u), defined)
