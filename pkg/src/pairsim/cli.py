"""Command-line entry point: ``pairsim <subcommand> [options]``.

Exit codes: 0 on success, 2 on invalid input (including unreadable files),
3 when a request exceeds the dense-size caps.  JSON goes to stdout unless
``--out DIR`` is given; floats are written with full precision so repeated
runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .adiabatic import prepare_adiabatic, prepare_basis_state, prepare_quasi_adiabatic
from .errors import CapExceededError, InsufficientPeaksError, PairsimError
from .model import PairingModel, block_weights, build_hp, check_full_cap, load_model, random_model
from .oracle import block_eigensystem, distinct_levels, exact_gap, exact_propagator, full_eigensystem
from .pulses import (
    NmrMachine,
    compile_trotter_step,
    default_machine,
    paper_step_count,
    program_unitary,
    scaling_program,
)
from .ops import phase_aligned_distance
from .spectroscopy import run_pipeline
from .trotter import TrotterPlan, evolve, trotter_step

SCHEMA = 1


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(payload: dict) -> str:
    return json.dumps({"schema": SCHEMA, **_plain(payload)}, indent=2, sort_keys=False) + "\n"


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(args: argparse.Namespace, payload: dict, name: str) -> None:
    text = dumps(payload)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text)


def _write(args: argparse.Namespace, name: str, text: str) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------


def _model(args: argparse.Namespace) -> PairingModel:
    spec = args.model
    if spec is None:
        raise PairsimError("--model is required")
    if spec.startswith("random:"):
        try:
            N = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise PairsimError(f"bad random model spec {spec!r}") from exc
        check_full_cap(N)
        return random_model(N, np.random.default_rng(args.seed))
    return load_model(spec)


def _machine(args: argparse.Namespace, N: int) -> NmrMachine:
    if args.machine is None:
        return default_machine(N)
    try:
        data = json.loads(Path(args.machine).read_text())
        return NmrMachine(omega=data["omega"], J=data["J"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise PairsimError(f"cannot read machine file {args.machine}: {exc}") from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_oracle(args: argparse.Namespace) -> int:
    model = _model(args)
    if args.n is None:
        es = full_eigensystem(model)
        payload = {"n": None, "energies": es.energies, "two_delta": None}
    else:
        es = block_eigensystem(model, args.n)
        has_gap = len(distinct_levels(es.energies)) > 1
        two_delta = exact_gap(model, args.n).two_delta if has_gap else None
        payload = {"n": args.n, "energies": es.energies, "two_delta": two_delta}
    _emit(args, payload, "oracle.json")
    return 0


def cmd_evolve(args: argparse.Namespace) -> int:
    model = _model(args)
    psi0 = prepare_basis_state(model.N, args.initial)
    psi = evolve(psi0, model, TrotterPlan(args.tau, args.k))
    exact = exact_propagator(build_hp(model), args.tau * args.k) @ psi0
    payload = {
        "N": model.N,
        "tau": args.tau,
        "k": args.k,
        "block_weights": block_weights(psi, model.N),
        "fidelity_vs_exact": abs(np.vdot(exact, psi)) ** 2,
    }
    _emit(args, payload, "evolve.json")
    return 0


def cmd_compile(args: argparse.Namespace) -> int:
    model = _model(args)
    machine = _machine(args, model.N)
    prog = compile_trotter_step(machine, model, args.tau, args.c)
    U = program_unitary(machine, prog)
    target = trotter_step(model, args.tau, args.c)
    payload = {
        "N": model.N,
        "step_count": prog.step_count,
        "layer_count": prog.layer_count,
        "fidelity_vs_target": phase_aligned_distance(U, target),
        "paper_s_of_N": paper_step_count(model.N),
    }
    if args.pulses:
        rows = [[r[k] for k in ("index", "kind", "qubit", "axis", "angle", "duration")]
                for r in prog.listing()]
        _write(args, args.pulses, csv_text(["index", "kind", "qubit", "axis", "angle", "duration"], rows))
    _emit(args, payload, "compile.json")
    return 0


def cmd_prepare(args: argparse.Namespace) -> int:
    model = _model(args)
    if (args.T is None) == (args.target_theta is None):
        raise PairsimError("give exactly one of --T and --target-theta")
    if args.T is not None:
        report = prepare_adiabatic(model, args.initial, args.T, args.tau)
    else:
        report = prepare_quasi_adiabatic(model, args.initial, args.target_theta, args.tau)
    payload = report.summary()
    if args.dump_state:
        payload["state_re"] = report.final_state.real
        payload["state_im"] = report.final_state.imag
    _emit(args, payload, "prepare.json")
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    model = _model(args)
    machine = _machine(args, model.N) if args.backend == "pulse" else None
    try:
        res = run_pipeline(
            model, args.initial, args.tau, args.samples, args.alpha, args.tilt, args.theta,
            backend=args.backend, prep_tau=args.prep_tau, window=args.window, machine=machine,
        )
    except InsufficientPeaksError as exc:
        raise InsufficientPeaksError(f"{exc}; sweep --alpha and --tilt") from exc
    t = res.trace.times
    _write(args, "fid.csv", csv_text(
        ["k", "t", "re", "im"],
        [[k, t[k], v.real, v.imag] for k, v in enumerate(res.trace.samples)],
    ))
    _write(args, "spectrum.csv", csv_text(
        ["omega", "amplitude"], list(zip(res.spectrum.freqs, res.spectrum.amps))
    ))
    payload = {
        "peaks": [{"omega": p.omega, "amplitude": p.amplitude} for p in res.spectrum.peaks],
        "gap": {
            "n": res.gap.n,
            "two_delta_est": res.gap.two_delta_est,
            "uncertainty": res.gap.uncertainty,
            "matched_lines": [{"omega": w, "label": lab} for w, lab in res.gap.matched_lines],
            "two_delta_exact": res.exact_two_delta,
        },
        "preparation": res.preparation.summary(),
        "margins": res.margins,
        "resources": res.resources,
    }
    _write(args, "summary.json", dumps(payload))
    return 0


def cmd_scaling(args: argparse.Namespace) -> int:
    if not 2 <= args.min_n <= args.max_n <= 10:
        raise PairsimError("scaling range must satisfy 2 <= min-n <= max-n <= 10")
    rows = []
    for N in range(args.min_n, args.max_n + 1):
        measured = scaling_program(N).step_count
        reference = paper_step_count(N)
        rows.append([N, measured, reference, measured / reference])
    text = csv_text(["N", "step_count", "paper_step_count", "ratio"], rows)
    if args.out:
        _write(args, "scaling.csv", text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model JSON file, or random:N")
    common.add_argument("--machine", help="machine JSON file {omega: [...], J: [...]}")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="pairsim", description="Pairing-model quantum simulation toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", parents=[common], help="exact spectrum and gap")
    p.add_argument("--n", type=int, help="pair sector (full spectrum if omitted)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("evolve", parents=[common], help="split-step evolution vs exact")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--initial", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("compile", parents=[common], help="compile one step to pulses")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--pulses", help="write pulse listing CSV with this name")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("prepare", parents=[common], help="adiabatic state preparation")
    p.add_argument("--initial", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--T", type=float)
    p.add_argument("--target-theta", type=float)
    p.add_argument("--dump-state", action="store_true")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("spectrum", parents=[common], help="FID spectroscopy of a sector gap")
    p.add_argument("--initial", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--tilt", type=float, default=0.1)
    p.add_argument("--backend", choices=("exact", "trotter", "pulse"), default="exact")
    p.add_argument("--window", choices=("hann",))
    p.add_argument("--theta", type=float, default=0.2)
    p.add_argument("--prep-tau", type=float, help="ramp step (defaults to --tau)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("scaling", parents=[common], help="compiled step count vs N")
    p.add_argument("--min-n", type=int, default=2)
    p.add_argument("--max-n", type=int, default=6)
    p.set_defaults(func=cmd_scaling)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"pairsim: cap exceeded: {exc}", file=sys.stderr)
        return 3
    except (PairsimError, ValueError) as exc:
        print(f"pairsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
