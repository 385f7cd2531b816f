"""Versioned CSV/JSON emission for outcome sets, statistics, and scans.

The outcome CSV schema is fixed: one row per measurement outcome with the
header below; the third index column is left empty for Protocol II rows.
Floats are written with 17 significant digits so that values round-trip
exactly through the text form.  JSON artifacts carry a ``schema_version``
field that downstream figure rendering checks before consuming anything.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .analysis import ScanRow, TeleportStats
from .teleport import OutcomeTable

SCHEMA_VERSION = 1

OUTCOME_HEADER = [
    "protocol", "N", "idx1", "idx2", "idx3", "prob",
    "sx_raw", "sy_raw", "sz_raw", "sx_tel", "sy_tel", "sz_tel",
    "theta_tel", "phi_tel", "phi_defined",
]


def fmt(x) -> str:
    """17-significant-digit text form of a float."""
    return format(float(x), ".17g")


def write_outcomes_csv(path, table: OutcomeTable) -> None:
    """One row per outcome of an enumerated or sampled lattice."""
    theta_t = table.theta_tel()
    phi_t = table.phi_tel()
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(OUTCOME_HEADER)
        three = table.indices.shape[1] == 3
        for m in range(table.probs.size):
            idx3 = str(int(table.indices[m, 2])) if three else ""
            defined = bool(table.phi_defined[m])
            writer.writerow([
                table.protocol,
                int(table.n_atoms),
                int(table.indices[m, 0]),
                int(table.indices[m, 1]),
                idx3,
                fmt(table.probs[m]),
                fmt(table.raw[m, 0]), fmt(table.raw[m, 1]), fmt(table.raw[m, 2]),
                fmt(table.tel[m, 0]), fmt(table.tel[m, 1]), fmt(table.tel[m, 2]),
                fmt(theta_t[m]),
                fmt(phi_t[m]) if defined else "",
                "true" if defined else "false",
            ])


def stats_payload(stats: TeleportStats, **meta) -> dict:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "avg_spin": {"sx": stats.avg_spin.sx, "sy": stats.avg_spin.sy,
                     "sz": stats.avg_spin.sz},
        "avg_theta": stats.avg_angles.theta,
        "avg_phi": stats.avg_angles.phi,
        "eps_tel": stats.eps_tel,
        "dtheta": stats.dtheta,
        "dphi": stats.dphi,
        "prob_sum": stats.prob_sum,
        "phi_defined_weight": stats.phi_defined_weight,
    }
    payload.update(meta)
    return payload


def write_stats_json(path, stats: TeleportStats, **meta) -> None:
    with open(path, "w") as handle:
        json.dump(stats_payload(stats, **meta), handle, indent=2,
                  sort_keys=True)
        handle.write("\n")


def write_qgrid_csv(path, thetas: np.ndarray, phis: np.ndarray,
                    grid: np.ndarray) -> None:
    """Long-format Q-function table with columns theta, phi, q."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["theta", "phi", "q"])
        for i, th in enumerate(thetas):
            for j, ph in enumerate(phis):
                writer.writerow([fmt(th), fmt(ph), fmt(grid[i, j])])


def write_dtheta_csv(path, rows) -> None:
    """Spread table with columns N, theta0, phi0, dtheta."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["N", "theta0", "phi0", "dtheta"])
        for n, theta0, phi0, dtheta in rows:
            writer.writerow([int(n), fmt(theta0), fmt(phi0), fmt(dtheta)])


def write_scan_csv(path, rows) -> None:
    """Dephased-error table with one ScanRow per line."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["protocol", "N", "theta0", "phi0", "gamma_t",
                         "eps_tel", "dtheta"])
        for row in rows:
            assert isinstance(row, ScanRow)
            writer.writerow([row.protocol, int(row.n_atoms), fmt(row.theta0),
                             fmt(row.phi0), fmt(row.gamma_t),
                             fmt(row.eps_tel), fmt(row.dtheta)])


def write_manifest(path, figure: str, files: dict, params: dict) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "figure": figure,
        "files": files,
        "params": params,
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_prep_trace(path, trace) -> None:
    payload = {"schema_version": SCHEMA_VERSION}
    payload.update(trace.to_dict())
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out
