"""Command-line driver: run protocols, emit figure data, prepare entanglement,
and validate the build.

All artifacts land in --out (or $SPINTEL_OUTPUT_DIR, or the working
directory).  Every random draw flows from the single --seed flag; runs are
bit-reproducible.  Exit codes: 0 success, 1 numeric contract violation or
failed validation, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import io as sio
from .analysis import (DephasingChannel, aggregate, c_coefficient,
                       c_coefficient_root, dephased_error_scan,
                       dephased_outcome_table, qse_bound, tel_error)
from .errors import ContractViolation, DomainError
from .prep import band_probabilities, max_entangled, prep_adaptive
from .spincore import (BlochAngles, EnsembleState, q_function_grid, r_matrix,
                       r_matrix_reference, sx_matrix, sy_matrix, sz_matrix)
from .teleport import (InitialConfig, OutcomeTable, corrupted_corrections,
                       outcome_table, protocol1_branch)

FIGURE_NAMES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")


def _out_dir(args) -> Path:
    root = args.out or os.environ.get("SPINTEL_OUTPUT_DIR") or "."
    return sio.ensure_dir(root)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _sampled_table(table: OutcomeTable, n_samples: int, seed: int) -> OutcomeTable:
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(table.probs)
    picks = np.searchsorted(cdf, rng.random(n_samples) * cdf[-1], side="right")
    picks = np.minimum(picks, table.probs.size - 1)
    return OutcomeTable(
        table.protocol, table.n_atoms,
        table.indices[picks],
        np.full(n_samples, 1.0 / n_samples),
        table.raw[picks], table.tel[picks], table.phi_defined[picks])


def cmd_run(args) -> int:
    out = _out_dir(args)
    cfg = InitialConfig.coherent(args.n, args.theta, args.phi)
    ref = BlochAngles(args.theta, args.phi)
    if args.gamma_t > 0.0:
        table = dephased_outcome_table(cfg, args.protocol,
                                       DephasingChannel(args.gamma_t))
    else:
        table = outcome_table(cfg, args.protocol)
    if args.mode == "sample":
        emitted = _sampled_table(table, args.samples, args.seed)
    else:
        emitted = table
    stats = aggregate(emitted, ref)
    sio.write_outcomes_csv(out / "outcomes.csv", emitted)
    sio.write_stats_json(
        out / "stats.json", stats,
        protocol=args.protocol, n_atoms=args.n,
        theta0=args.theta, phi0=args.phi, mode=args.mode,
        samples=args.samples if args.mode == "sample" else None,
        seed=args.seed if args.mode == "sample" else None,
        gamma_t=args.gamma_t,
        n_outcomes=int(emitted.probs.size),
        qse_bound=qse_bound(args.n))
    print(f"wrote {out / 'outcomes.csv'} ({emitted.probs.size} rows) "
          f"and {out / 'stats.json'}")
    return 0


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def _figure_fig2(args, out: Path) -> dict:
    n, k1, k2, delta = args.n or 100, args.k1, args.k2, args.delta
    theta0 = args.theta if args.theta is not None else math.pi / 2
    phi0 = args.phi if args.phi is not None else 0.0
    make = InitialConfig.squeezed if args.squeezed else InitialConfig.coherent
    cfg = make(n, theta0, phi0)
    branched, record = protocol1_branch(cfg, delta, k1, k2)
    state = EnsembleState(n, branched.vectors[0])
    thetas = np.linspace(0.0, math.pi, 121)
    phis = np.linspace(-math.pi, math.pi, 257)[:-1]
    grid = q_function_grid(state, thetas, phis)
    sio.write_qgrid_csv(out / "fig2_qgrid.csv", thetas, phis, grid)
    return {"qgrid": "fig2_qgrid.csv",
            "params": {"N": n, "k1": k1, "k2": k2, "delta": delta,
                       "squeezed": bool(args.squeezed),
                       "probability": record.probability}}


def _figure_scatter(args, out: Path, name: str, protocol: str) -> dict:
    configs = [("ab", 10, math.pi / 2, math.pi / 4),
               ("cd", 11, math.pi / 4, -math.pi / 2)]
    files = {}
    params = {}
    for tag, n, theta0, phi0 in configs:
        cfg = InitialConfig.coherent(n, theta0, phi0)
        table = outcome_table(cfg, protocol)
        stats = aggregate(table, BlochAngles(theta0, phi0))
        csv_name = f"{name}_{tag}_outcomes.csv"
        json_name = f"{name}_{tag}_stats.json"
        sio.write_outcomes_csv(out / csv_name, table)
        sio.write_stats_json(out / json_name, stats, protocol=protocol,
                             n_atoms=n, theta0=theta0, phi0=phi0,
                             mode="enumerate", gamma_t=0.0,
                             n_outcomes=int(table.probs.size),
                             qse_bound=qse_bound(n))
        files[f"{tag}_outcomes"] = csv_name
        files[f"{tag}_stats"] = json_name
        params[tag] = {"N": n, "theta0": theta0, "phi0": phi0}
    return {"files": files, "params": params}


def _figure_spread(args, out: Path, name: str, protocol: str) -> dict:
    n_list = (6, 8, 10, 12, 14)
    phi0 = math.pi / 4
    thetas = np.linspace(0.1, math.pi - 0.1, 25)
    rows = []
    for n in n_list:
        for theta0 in thetas:
            cfg = InitialConfig.coherent(n, float(theta0), phi0)
            stats = aggregate(outcome_table(cfg, protocol),
                              BlochAngles(float(theta0), phi0))
            rows.append((n, float(theta0), phi0, stats.dtheta))
    csv_name = f"{name}_dtheta.csv"
    sio.write_dtheta_csv(out / csv_name, rows)
    return {"files": {"dtheta": csv_name},
            "params": {"protocol": protocol, "N": list(n_list), "phi0": phi0}}


def _figure_fig7(args, out: Path) -> dict:
    gammas = (0.01, 0.1)
    order = args.order
    rows = []
    for protocol in ("I", "II"):
        rows += dephased_error_scan(protocol, (4, 6, 8, 10, 12),
                                    (math.pi / 4,), (0.0,), gammas,
                                    quadrature_order=order)
        rows += dephased_error_scan(protocol, (10,),
                                    np.linspace(0.15, math.pi - 0.15, 13),
                                    (0.0, math.pi / 4, math.pi / 2), gammas,
                                    quadrature_order=order)
    csv_name = "fig7_dephased.csv"
    sio.write_scan_csv(out / csv_name, rows)
    return {"files": {"scan": csv_name},
            "params": {"gamma_t": list(gammas), "order": order}}


def cmd_figure(args) -> int:
    if args.name not in FIGURE_NAMES:
        print(f"unknown figure {args.name!r}; choose from {FIGURE_NAMES}",
              file=sys.stderr)
        return 2
    out = _out_dir(args)
    if args.name == "fig2":
        result = _figure_fig2(args, out)
        files = {"qgrid": result["qgrid"]}
        params = result["params"]
    elif args.name in ("fig3", "fig4"):
        protocol = "I" if args.name == "fig3" else "II"
        result = _figure_scatter(args, out, args.name, protocol)
        files, params = result["files"], result["params"]
    elif args.name in ("fig5", "fig6"):
        protocol = "I" if args.name == "fig5" else "II"
        result = _figure_spread(args, out, args.name, protocol)
        files, params = result["files"], result["params"]
    else:
        result = _figure_fig7(args, out)
        files, params = result["files"], result["params"]
    sio.write_manifest(out / f"{args.name}_manifest.json", args.name, files,
                       params)
    print(f"wrote {args.name} data to {out}")
    return 0


# ---------------------------------------------------------------------------
# prep
# ---------------------------------------------------------------------------

def cmd_prep(args) -> int:
    out = _out_dir(args)
    state, trace = prep_adaptive(args.n, args.seed, max_rounds=args.max_rounds)
    sio.write_prep_trace(out / "prep_trace.json", trace)
    print(f"final fidelity {trace.final_fidelity:.6f} "
          f"({'converged' if trace.converged else 'not converged'}); "
          f"trace in {out / 'prep_trace.json'}")
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _check(name, condition, detail=""):
    status = "PASS" if condition else "FAIL"
    print(f"[{status}] {name}" + (f"  ({detail})" if detail and not condition
                                  else ""))
    return bool(condition)


def _validation_suite() -> bool:
    ok = True
    n = 12
    sx, sy, sz = sx_matrix(n), sy_matrix(n), sz_matrix(n)
    comm = np.max(np.abs((sx @ sy - sy @ sx) - 2j * sz))
    ok &= _check("spin commutator", comm < 1e-10, f"residual {comm:.2e}")
    casimir = np.max(np.abs(sx @ sx + sy @ sy + sz @ sz
                            - n * (n + 2) * np.eye(n + 1)))
    ok &= _check("Casimir invariant", casimir < 1e-10, f"{casimir:.2e}")

    r60 = r_matrix(60).entries
    uni = np.max(np.abs(r60.T @ r60 - np.eye(61)))
    ok &= _check("rotation matrix unitarity", uni < 1e-12, f"{uni:.2e}")
    r12 = r_matrix(12).entries
    oracle = max(abs(r12[kp, k] - r_matrix_reference(12, kp, k))
                 for kp in range(13) for k in range(13))
    ok &= _check("rotation matrix vs factorial-sum oracle", oracle < 1e-10,
                 f"{oracle:.2e}")

    phi = max_entangled(9)
    probs = band_probabilities(phi)
    ok &= _check("maximally entangled state is a delta=0 eigenstate",
                 abs(probs[9] - 1.0) < 1e-12 and probs.sum() - probs[9] < 1e-12)

    for protocol in ("I", "II"):
        cfg = InitialConfig.coherent(8, 1.1, 0.6)
        table = outcome_table(cfg, protocol)
        total = float(table.probs.sum())
        ok &= _check(f"protocol {protocol} probabilities sum to 1",
                     abs(total - 1.0) < 1e-12, f"{total - 1.0:.2e}")
        stats = aggregate(table, BlochAngles(1.1, 0.6))
        ok &= _check(f"protocol {protocol} zero average error",
                     stats.eps_tel <= 1e-10, f"eps {stats.eps_tel:.2e}")
        ok &= _check(f"protocol {protocol} zero azimuthal spread",
                     stats.dphi <= 1e-10, f"dphi {stats.dphi:.2e}")
        ok &= _check(f"protocol {protocol} beats the classical bound",
                     stats.eps_tel < qse_bound(8))

    from .measurement import DenseTriState, QndOutcome, qnd_project_dense, \
        project_number_dense
    n3 = 3
    cfg = InitialConfig.coherent(n3, 0.9, -1.2)
    dense0 = DenseTriState.from_product(cfg.psi0.amplitudes,
                                        max_entangled(n3).amplitudes)
    worst = 0.0
    from .teleport import protocol2_branch
    for d1 in range(-n3, n3 + 1):
        b1, _ = qnd_project_dense(dense0, QndOutcome(d1, "z"))
        for d2 in range(-n3, n3 + 1):
            b2, p2 = qnd_project_dense(b1, QndOutcome(d2, "x"))
            branched, rec = protocol2_branch(cfg, d1, d2)
            worst = max(worst, abs(p2 - rec.probability),
                        float(np.max(np.abs(b2.reduced_rho3()
                                            - branched.reduced_rho3()))))
    ok &= _check("dense-oracle equivalence (protocol II, N=3)", worst < 1e-12,
                 f"{worst:.2e}")

    csum = all(np.sign(c_coefficient(nn, d))
               == np.sign(c_coefficient_root(nn, d))
               for nn in (4, 9, 16) for d in range(-nn, nn + 1)
               if abs(c_coefficient(nn, d)) > 1e-13)
    ok &= _check("attenuation coefficient sign oracle", csum)
    return ok


def cmd_validate(args) -> int:
    if args.inject_sign_error:
        with corrupted_corrections():
            good = _validation_suite()
    else:
        good = _validation_suite()
    print("validation " + ("passed" if good else "FAILED"))
    return 0 if good else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spintel",
        description="Simulate measurement-based teleportation of collective "
                    "spin variables between qubit ensembles.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="enumerate or sample one protocol run")
    run.add_argument("--protocol", choices=("I", "II"), required=True)
    run.add_argument("--n", type=int, required=True, help="atoms per ensemble")
    run.add_argument("--theta", type=float, required=True,
                     help="input polar angle (radians)")
    run.add_argument("--phi", type=float, required=True,
                     help="input azimuth (radians)")
    run.add_argument("--mode", choices=("enumerate", "sample"),
                     default="enumerate")
    run.add_argument("--samples", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--gamma-t", type=float, default=0.0, dest="gamma_t")
    run.add_argument("--out", default=None)
    run.set_defaults(func=cmd_run)

    fig = sub.add_parser("figure", help="emit the data behind one figure")
    fig.add_argument("name", help="fig2..fig7")
    fig.add_argument("--n", type=int, default=None)
    fig.add_argument("--k1", type=int, default=20)
    fig.add_argument("--k2", type=int, default=60)
    fig.add_argument("--delta", type=int, default=0)
    fig.add_argument("--theta", type=float, default=None)
    fig.add_argument("--phi", type=float, default=None)
    fig.add_argument("--squeezed", action="store_true",
                     help="shear the input with the one-axis phase (fig2)")
    fig.add_argument("--order", type=int, default=64,
                     help="dephasing quadrature order (fig7)")
    fig.add_argument("--out", default=None)
    fig.set_defaults(func=cmd_figure)

    prep = sub.add_parser("prep", help="adaptive entangled-state preparation")
    prep.add_argument("--n", type=int, required=True)
    prep.add_argument("--seed", type=int, required=True)
    prep.add_argument("--max-rounds", type=int, default=20, dest="max_rounds")
    prep.add_argument("--out", default=None)
    prep.set_defaults(func=cmd_prep)

    val = sub.add_parser("validate", help="run the invariant suite")
    val.add_argument("--inject-sign-error", action="store_true",
                     help="corrupt the correction law first (the suite must "
                          "catch it); test hook")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
