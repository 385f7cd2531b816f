"""Render static figure analogues from the simulator's CSV/JSON outputs.

The renderer is strictly presentational: it reads the versioned manifest and
data files emitted by `spintel figure <name>` and turns them into PNG images.
The only arithmetic applied is coordinate conversion of spin columns into
Bloch angles for the uncorrected panels.  Styling is pinned so identical
inputs produce byte-identical images.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

SCHEMA_VERSION = 1

OUTCOME_HEADER = [
    "protocol", "N", "idx1", "idx2", "idx3", "prob",
    "sx_raw", "sy_raw", "sz_raw", "sx_tel", "sy_tel", "sz_tel",
    "theta_tel", "phi_tel", "phi_defined",
]

STYLE = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
}

PNG_METADATA = {"Software": "spintel-figures"}


class SchemaError(RuntimeError):
    """Input files are missing, empty, or not the expected schema."""


@dataclass(frozen=True)
class FigureSpec:
    """What to render: figure name plus input/output directories."""

    figure: str
    input_dir: Path
    output_dir: Path
    marker_scale: float = 900.0
    manifest: dict = field(default=None, repr=False)


def load_manifest(spec: FigureSpec) -> dict:
    path = Path(spec.input_dir) / f"{spec.figure}_manifest.json"
    if not path.exists():
        raise SchemaError(f"manifest not found: {path}")
    manifest = json.loads(path.read_text())
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"schema_version {manifest.get('schema_version')} != "
            f"{SCHEMA_VERSION}")
    if manifest.get("figure") != spec.figure:
        raise SchemaError("manifest describes a different figure")
    return manifest


def _read_csv(path: Path, expected_header: list) -> list:
    if not path.exists():
        raise SchemaError(f"input file missing: {path}")
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != expected_header:
        raise SchemaError(f"unexpected header in {path}")
    if len(rows) == 1:
        raise SchemaError(f"no data rows in {path}")
    return rows[1:]


def read_outcomes(path: Path) -> dict:
    rows = _read_csv(path, OUTCOME_HEADER)
    def col(i, cast=float):
        return np.array([cast(row[i]) for row in rows])
    prob = col(5)
    raw = np.stack([col(6), col(7), col(8)], axis=-1)
    tel = np.stack([col(9), col(10), col(11)], axis=-1)
    theta_tel = col(12)
    defined = np.array([row[14] == "true" for row in rows])
    phi_tel = np.array([float(row[13]) if row[14] == "true" else 0.0
                        for row in rows])
    n_atoms = int(rows[0][1])
    return {"n_atoms": n_atoms, "prob": prob, "raw": raw, "tel": tel,
            "theta_tel": theta_tel, "phi_tel": phi_tel, "defined": defined}


def read_stats(path: Path) -> dict:
    if not path.exists():
        raise SchemaError(f"stats file missing: {path}")
    stats = json.loads(path.read_text())
    if stats.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError("stats schema mismatch")
    return stats


# ---------------------------------------------------------------------------
# panel helpers
# ---------------------------------------------------------------------------

def _angles_from_spins(spins: np.ndarray, n_atoms: int):
    theta = np.arccos(np.clip(spins[:, 2] / n_atoms, -1.0, 1.0))
    phi = np.arctan2(spins[:, 1], spins[:, 0])
    return theta, phi


def _scatter_panel(ax, phi, theta, prob, scale):
    sizes = scale * prob / max(prob.max(), 1e-300)
    ax.scatter(phi, theta, s=sizes, facecolor="C0", edgecolor="none",
               alpha=0.75)
    ax.set_xlim(-math.pi, math.pi)
    ax.set_ylim(0.0, math.pi)
    ax.set_xlabel(r"$\phi$")
    ax.set_ylabel(r"$\theta$")


def _reference_marker(ax, theta0, phi0):
    ax.plot([phi0], [theta0], marker="o", markersize=11,
            markerfacecolor="none", markeredgecolor="C3",
            markeredgewidth=1.6, linestyle="none", label="input")


def _render_scatter_figure(spec: FigureSpec, manifest: dict) -> plt.Figure:
    fig, axes = plt.subplots(2, 2, figsize=(7.0, 6.4))
    for row, tag in enumerate(("ab", "cd")):
        data = read_outcomes(Path(spec.input_dir)
                             / manifest["files"][f"{tag}_outcomes"])
        stats = read_stats(Path(spec.input_dir)
                           / manifest["files"][f"{tag}_stats"])
        theta0, phi0 = stats["theta0"], stats["phi0"]
        n = data["n_atoms"]
        # uncorrected panel: angles derived from the raw spin columns
        theta_u, phi_u = _angles_from_spins(data["raw"], n)
        phi_u = np.where(data["defined"], phi_u, 0.0)
        ax = axes[row, 0]
        _scatter_panel(ax, phi_u, theta_u, data["prob"], spec.marker_scale)
        _reference_marker(ax, theta0, phi0)
        ax.set_title(f"uncorrected, N={n}")
        # corrected panel
        ax = axes[row, 1]
        _scatter_panel(ax, data["phi_tel"], data["theta_tel"], data["prob"],
                       spec.marker_scale)
        _reference_marker(ax, theta0, phi0)
        ax.errorbar([stats["avg_phi"]], [stats["avg_theta"]],
                    yerr=[stats["dtheta"]], fmt="s", color="k",
                    markersize=4, capsize=3, label="average")
        ax.set_title(f"corrected, N={n}")
        ax.legend(loc="upper right")
    fig.tight_layout()
    return fig


def _render_fig2(spec: FigureSpec, manifest: dict) -> plt.Figure:
    rows = _read_csv(Path(spec.input_dir) / manifest["files"]["qgrid"],
                     ["theta", "phi", "q"])
    thetas = np.array(sorted({float(r[0]) for r in rows}))
    phis = np.array(sorted({float(r[1]) for r in rows}))
    grid = np.zeros((thetas.size, phis.size))
    t_index = {t: i for i, t in enumerate(thetas)}
    p_index = {p: j for j, p in enumerate(phis)}
    for r in rows:
        grid[t_index[float(r[0])], p_index[float(r[1])]] = float(r[2])
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    mesh = ax.pcolormesh(phis, thetas, grid, shading="nearest",
                         cmap="inferno")
    fig.colorbar(mesh, ax=ax, label="Q")
    ax.set_xlabel(r"$\phi$")
    ax.set_ylabel(r"$\theta$")
    params = manifest.get("params", {})
    ax.set_title(f"post-measurement Q function, N={params.get('N')}")
    fig.tight_layout()
    return fig


def _render_spread(spec: FigureSpec, manifest: dict) -> plt.Figure:
    rows = _read_csv(Path(spec.input_dir) / manifest["files"]["dtheta"],
                     ["N", "theta0", "phi0", "dtheta"])
    n_vals = np.array([int(r[0]) for r in rows])
    theta0 = np.array([float(r[1]) for r in rows])
    dtheta = np.array([float(r[3]) for r in rows])
    fig, (left, right) = plt.subplots(1, 2, figsize=(7.4, 3.4))
    for n in sorted(set(n_vals)):
        sel = n_vals == n
        order = np.argsort(theta0[sel])
        left.plot(theta0[sel][order], dtheta[sel][order], label=f"N={n}")
    left.set_xlabel(r"$\theta_0$")
    left.set_ylabel(r"$\delta\theta$")
    left.legend()
    for target, style in ((math.pi / 2, "o-"), (math.pi / 4, "s--")):
        xs, ys = [], []
        for n in sorted(set(n_vals)):
            sel = n_vals == n
            nearest = np.argmin(np.abs(theta0[sel] - target))
            xs.append(1.0 / n)
            ys.append(dtheta[sel][nearest])
        right.plot(xs, ys, style,
                   label=rf"$\theta_0 \approx {target:.2f}$")
    right.set_xlabel("1/N")
    right.set_ylabel(r"$\delta\theta$")
    right.set_xlim(left=0.0)
    right.legend()
    fig.tight_layout()
    return fig


def _render_fig7(spec: FigureSpec, manifest: dict) -> plt.Figure:
    rows = _read_csv(Path(spec.input_dir) / manifest["files"]["scan"],
                     ["protocol", "N", "theta0", "phi0", "gamma_t",
                      "eps_tel", "dtheta"])
    protocol = np.array([r[0] for r in rows])
    n_vals = np.array([int(r[1]) for r in rows])
    theta0 = np.array([float(r[2]) for r in rows])
    phi0 = np.array([float(r[3]) for r in rows])
    gamma = np.array([float(r[4]) for r in rows])
    eps = np.array([float(r[5]) for r in rows])
    fig, axes = plt.subplots(2, 2, figsize=(7.4, 6.0))
    gammas = sorted(set(gamma))
    for col, proto in enumerate(("I", "II")):
        ax = axes[0, col]
        for g in gammas:
            style = "--" if g == min(gammas) else "-"
            sel = ((protocol == proto) & (gamma == g)
                   & (np.abs(theta0 - math.pi / 4) < 1e-9) & (phi0 == 0.0))
            order = np.argsort(n_vals[sel])
            ax.plot(n_vals[sel][order], eps[sel][order], style, marker="o",
                    label=rf"$\gamma t = {g}$")
        ax.set_xlabel("N")
        ax.set_ylabel(r"$\varepsilon_{\mathrm{tel}}$")
        ax.set_title(f"protocol {proto}")
        ax.legend()
        ax = axes[1, col]
        for g in gammas:
            style = "--" if g == min(gammas) else "-"
            for p0 in sorted(set(phi0[(protocol == proto) & (n_vals == 10)])):
                sel = ((protocol == proto) & (gamma == g) & (n_vals == 10)
                       & (phi0 == p0) & (np.abs(theta0 - math.pi / 4) > 1e-9))
                if not np.any(sel):
                    continue
                order = np.argsort(theta0[sel])
                ax.plot(theta0[sel][order], eps[sel][order], style,
                        label=rf"$\phi_0={p0:.2f},\ \gamma t={g}$")
        ax.set_xlabel(r"$\theta_0$")
        ax.set_ylabel(r"$\varepsilon_{\mathrm{tel}}$")
        ax.legend(fontsize=6)
    fig.tight_layout()
    return fig


_RENDERERS = {
    "fig2": _render_fig2,
    "fig3": _render_scatter_figure,
    "fig4": _render_scatter_figure,
    "fig5": _render_spread,
    "fig6": _render_spread,
    "fig7": _render_fig7,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure to PNG; returns the written image path."""
    if spec.figure not in _RENDERERS:
        raise SchemaError(f"unknown figure {spec.figure!r}")
    manifest = spec.manifest or load_manifest(spec)
    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig = _RENDERERS[spec.figure](spec, manifest)
        target = out_dir / f"{spec.figure}.png"
        fig.savefig(target, metadata=PNG_METADATA)
        plt.close(fig)
    return target
