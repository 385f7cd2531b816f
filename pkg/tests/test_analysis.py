import math

import numpy as np
import pytest

from spintel import (BlochAngles, ContractViolation, DomainError,
                     InitialConfig, OutcomeRecord, SpinVector, aggregate,
                     c_coefficient, c_coefficient_root, dephase_closed_form,
                     dephase_quadrature_oracle, dephased_error_scan,
                     dephased_outcome_table, outcome_table, qse_bound,
                     tel_error)
from spintel.analysis import DephasingChannel
from spintel.teleport import apply_corrections


def _record(protocol, n, indices, prob, raw, tel=None, defined=True):
    tel = tel if tel is not None else raw
    angles = BlochAngles(math.acos(min(max(tel.sz / n, -1), 1)),
                         math.atan2(tel.sy, tel.sx) if defined else 0.0)
    return OutcomeRecord(protocol, n, indices, prob, raw, tel, angles,
                         angles, defined)


# ---------------------------------------------------------------------------
# error measure and aggregation
# ---------------------------------------------------------------------------

def test_tel_error_basic_values():
    a = BlochAngles(1.0, 0.5)
    assert tel_error(a, a) == 0.0
    assert abs(tel_error(BlochAngles(0.0, 0.0), BlochAngles(math.pi, 0.0))
               - 1.0) < 1e-15
    assert abs(tel_error(BlochAngles(0.0, 0.0),
                         BlochAngles(math.pi / 2, 0.0))
               - 1.0 / math.sqrt(2)) < 1e-15


def test_aggregate_single_perfect_outcome():
    n = 8
    ref = BlochAngles(1.1, -0.4)
    tel = SpinVector(*(n * ref.unit_vector()))
    stats = aggregate([_record("I", n, (0, 1, 2), 1.0, tel)], ref)
    assert stats.eps_tel < 1e-15
    assert stats.dtheta < 1e-12 and stats.dphi < 1e-12


def test_aggregate_antipodal_pair_cancels_transverse():
    n = 6
    ref = BlochAngles(math.pi / 2, 0.3)
    up = SpinVector(*(n * ref.unit_vector()))
    down = SpinVector(-up.sx, -up.sy, up.sz)
    stats = aggregate([_record("I", n, (0, 0, 0), 0.5, up),
                       _record("I", n, (0, 0, 1), 0.5, down)], ref)
    assert abs(stats.avg_spin.sx) < 1e-12
    assert abs(stats.avg_spin.sy) < 1e-12


def test_aggregate_full_enumeration_zero_error():
    cfg = InitialConfig.coherent(10, math.pi / 2, math.pi / 4)
    stats = aggregate(outcome_table(cfg, "I"),
                      BlochAngles(math.pi / 2, math.pi / 4))
    assert stats.eps_tel <= 1e-10
    assert stats.dphi <= 1e-10


def test_aggregate_rejects_bad_input():
    with pytest.raises(DomainError):
        aggregate([], BlochAngles(1.0, 0.0))
    bad = [_record("I", 4, (0, 0, 0), 0.5, SpinVector(0, 0, 4))]
    with pytest.raises(ContractViolation):
        aggregate(bad, BlochAngles(0.0, 0.0))


def test_dtheta_independent_of_phi0():
    n = 9
    theta0 = 1.0
    values = []
    for phi0 in (-2.2, 0.0, 0.7, 2.9):
        cfg = InitialConfig.coherent(n, theta0, phi0)
        stats = aggregate(outcome_table(cfg, "I"), BlochAngles(theta0, phi0))
        values.append(stats.dtheta)
    assert max(values) - min(values) < 1e-9


def test_dtheta_trends_with_n():
    for protocol in ("I", "II"):
        at_equator = []
        at_quarter = []
        for n in (6, 8, 10, 12, 14):
            for theta0, bucket in ((math.pi / 2, at_equator),
                                   (math.pi / 4, at_quarter)):
                cfg = InitialConfig.coherent(n, theta0, math.pi / 4)
                stats = aggregate(outcome_table(cfg, protocol),
                                  BlochAngles(theta0, math.pi / 4))
                bucket.append(stats.dtheta)
        assert all(a > b for a, b in zip(at_equator, at_equator[1:]))
        assert all(0.05 <= v <= 0.3 for v in at_quarter)


# ---------------------------------------------------------------------------
# classical bound and attenuation coefficient
# ---------------------------------------------------------------------------

def test_qse_bound_values():
    assert qse_bound(2) == 0.5
    assert abs(qse_bound(0) - 1.0 / math.sqrt(2)) < 1e-15
    with pytest.raises(DomainError):
        qse_bound(-1)


def test_teleportation_beats_classical_bound():
    for n in range(4, 13, 2):
        cfg = InitialConfig.coherent(n, 1.0, 0.5)
        stats = aggregate(outcome_table(cfg, "I"), BlochAngles(1.0, 0.5))
        assert stats.eps_tel < qse_bound(n)


def test_c_coefficient_small_cases():
    assert c_coefficient(2, 2) == -1.0
    assert c_coefficient(2, 0) == 2.0


def test_c_coefficient_root_is_scaled_sum():
    for n in (2, 5, 9, 14):
        for d in range(-n, n + 1):
            assert abs(c_coefficient_root(n, d)
                       - n**2 * c_coefficient(n, d)) < 1e-9 * n**3


def test_c_coefficient_sign_structure():
    # negative exactly in the band delta_plus < |d| < N + 1, zero on the root
    from spintel.teleport import delta_plus
    for n in range(1, 51):
        dp = delta_plus(n)
        for d in range(-n, n + 1):
            c_sum = c_coefficient(n, d)
            c_root = c_coefficient_root(n, d)
            if abs(c_sum) > 1e-12:
                assert np.sign(c_sum) == np.sign(c_root)
                assert (c_sum < 0) == (dp < abs(d))
            else:
                assert abs(abs(d) - dp) < 1e-9


# ---------------------------------------------------------------------------
# dephasing
# ---------------------------------------------------------------------------

def test_dephase_closed_form_limits():
    raw = SpinVector(1.0, 2.0, 3.0)
    tel = apply_corrections("I", 10, (1, 2, 3), raw)
    rec = _record("I", 10, (1, 2, 3), 0.1, raw, tel)
    ident = dephase_closed_form(rec, DephasingChannel(0.0))
    assert (ident.sx, ident.sy, ident.sz) == (tel.sx, tel.sy, tel.sz)
    killed = dephase_closed_form(rec, DephasingChannel(50.0))
    expected = apply_corrections("I", 10, (1, 2, 3), SpinVector(1.0, 0.0, 0.0))
    assert abs(killed.sy - expected.sy) < 1e-40
    assert abs(killed.sz - expected.sz) < 1e-12
    assert killed.sx == expected.sx


def test_quadrature_oracle_identity_at_zero():
    cfg = InitialConfig.coherent(8, 1.2, 0.3)
    _, record = (lambda b: b)(None), None
    from spintel import protocol1_branch
    _, record = protocol1_branch(cfg, 1, 2, 6)
    raw = dephase_quadrature_oracle(cfg, "I", (1, 2, 6), DephasingChannel(0.0))
    assert abs(raw.sx - record.raw_spin.sx) < 1e-12
    assert abs(raw.sy - record.raw_spin.sy) < 1e-12
    assert abs(raw.sz - record.raw_spin.sz) < 1e-12


def test_quadrature_oracle_requires_order():
    cfg = InitialConfig.coherent(6, 1.0, 0.0)
    with pytest.raises(DomainError):
        dephase_quadrature_oracle(cfg, "I", (0, 1, 2),
                                  DephasingChannel(0.1, quadrature_order=4))


def test_dephased_table_reduces_to_ideal_at_zero():
    cfg = InitialConfig.coherent(9, 0.9, 1.3)
    ideal = outcome_table(cfg, "II")
    dep = dephased_outcome_table(cfg, "II", DephasingChannel(0.0))
    np.testing.assert_allclose(dep.probs, ideal.probs, atol=1e-15)
    np.testing.assert_allclose(dep.tel, ideal.tel, atol=1e-10)


def test_quadrature_order_convergence():
    cfg = InitialConfig.coherent(8, 1.0, 0.0)
    ref = BlochAngles(1.0, 0.0)
    eps = {}
    for order in (64, 128):
        table = dephased_outcome_table(cfg, "I",
                                       DephasingChannel(0.1, order))
        eps[order] = aggregate(table, ref).eps_tel
    assert abs(eps[64] - eps[128]) < 1e-8


def test_dephased_error_n_independent_on_meridian():
    theta0 = math.pi / 4
    ref = BlochAngles(theta0, 0.0)
    for gamma_t in (0.01, 0.1):
        for protocol in ("I", "II"):
            eps = []
            for n in (4, 8, 12):
                cfg = InitialConfig.coherent(n, theta0, 0.0)
                table = dephased_outcome_table(cfg, protocol,
                                               DephasingChannel(gamma_t))
                eps.append(aggregate(table, ref).eps_tel)
            spread = (max(eps) - min(eps)) / np.mean(eps)
            assert spread < 0.01


def test_equatorial_x_state_immune():
    cfg = InitialConfig.coherent(10, math.pi / 2, 0.0)
    table = dephased_outcome_table(cfg, "I", DephasingChannel(0.1))
    stats = aggregate(table, BlochAngles(math.pi / 2, 0.0))
    assert stats.eps_tel <= 1e-6


def test_scan_zero_gamma_row_is_ideal():
    rows = dephased_error_scan("I", [6], [0.7, 1.4], [0.3], [0.0],
                               quadrature_order=16)
    assert all(row.eps_tel <= 1e-10 for row in rows)


def test_scan_monotone_from_pole_to_equator():
    thetas = np.linspace(0.15, math.pi / 2, 8)
    rows = dephased_error_scan("I", [10], thetas, [0.0], [0.1])
    eps = [row.eps_tel for row in rows]
    assert all(a >= b - 1e-12 for a, b in zip(eps, eps[1:]))


def test_scan_rejects_empty_grid():
    with pytest.raises(DomainError):
        dephased_error_scan("I", [], [1.0], [0.0], [0.1])


def test_closed_form_tracks_oracle_at_small_gamma():
    # the per-branch closed form is a first-order shortcut; at small gamma_t
    # it tracks the exact quadrature, with the documented O(gamma_t)
    # deviation growing toward gamma_t ~ 0.1 (see the acceptance suite)
    n = 10
    cfg = InitialConfig.coherent(n, 1.1, 0.7)
    ch = DephasingChannel(0.02)
    table = outcome_table(cfg, "I")
    quad = dephased_outcome_table(cfg, "I", ch)
    records = table.records()
    devs, weights = [], []
    for m, rec in enumerate(records):
        if quad.probs[m] < 1e-6:
            continue
        cf = dephase_closed_form(rec, ch)
        qt = quad.tel[m]
        den = np.linalg.norm(qt)
        if den < 0.05 * n:
            continue
        devs.append(np.linalg.norm([cf.sx - qt[0], cf.sy - qt[1],
                                    cf.sz - qt[2]]) / den)
        weights.append(quad.probs[m])
    devs, weights = np.array(devs), np.array(weights)
    assert float(np.sum(weights * devs) / np.sum(weights)) < 0.02
