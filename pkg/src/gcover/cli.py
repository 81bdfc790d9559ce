"""Command-line front end: gcover <subcommand> [--input F] [--output F] [--format json|csv] ...

Inputs use the repo-wide JSON schemas: a matrix object, a cover element, or a
superposition state. Without --input, commands that take a generator draw a
random one from --seed.
"""

import argparse
import csv
import io as _io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import case_study
from .double_cover import CoverElement, lift_generator
from .errors import GCoverError, InvariantViolation
from .expectation import expectation, phase_trajectory
from .io import dumps, fmt, matrix_from_json, matrix_to_json
from .oracle import exact_expectation, gaussian_amplitude_ode
from .phase_space import Statistics, random_generator, standard_kahler
from .superposition import SuperpositionState, evolve_step, moment
from .wick import wick_moment


def _read_input(args):
    if not args.input:
        return None
    text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text()
    return json.loads(text)


def _generator(args, obj):
    """(K, KahlerStructure) from a matrix object, {"generator": matrix}, or the seed."""
    if obj is None:
        kah = standard_kahler(args.n_modes, args.statistics)
        return random_generator(args.n_modes, args.statistics, seed=args.seed, scale=args.scale).k, kah
    if "generator" in obj:
        obj = obj["generator"]
    k, st = matrix_from_json(obj)
    return k, standard_kahler(len(k) // 2, st)


def _complex(z):
    return [float(np.real(z)), float(np.imag(z))]


def _cmd_phase(args):
    k, kah = _generator(args, _read_input(args))
    ev = expectation(k, kah)
    out = {"modulus": ev.modulus, "phase": ev.phase if ev.defined else None, "defined": ev.defined,
           "squared": _complex(ev.squared), "value": _complex(ev.value), "generator": matrix_to_json(k, kah.statistics)}
    if args.normal_form and kah.is_boson:
        from .normal_form import symplectic_normal_form
        out["normal_form"] = symplectic_normal_form(k, kah).to_dict()
    return out


def _cmd_oracle(args):
    k, kah = _generator(args, _read_input(args))
    if kah.is_boson and kah.n_modes > 2:
        vals = gaussian_amplitude_ode(k, kah, [1.0])
        val, method = vals[0], "riccati"
    else:
        val = exact_expectation(k, kah, cutoff=args.cutoff) if kah.is_boson else exact_expectation(k, kah)
        method = "fock"
    return {"value": _complex(val), "modulus": abs(val), "phase": float(np.angle(val)), "method": method}


def _cmd_trajectory(args):
    obj = _read_input(args)
    k, kah = _generator(args, obj)
    t_max = float((obj or {}).get("t_max", args.t_max))
    n = int((obj or {}).get("n_points", args.points))
    return phase_trajectory(k, kah, np.linspace(0.0, t_max, n), workers=args.workers)


def _cmd_overlap(args):
    obj = _read_input(args)
    if obj is None:
        raise InvariantViolation("overlap needs --input with a superposition state")
    st = SuperpositionState.from_dict(obj)
    x = st.overlaps
    return {"real": x.real.tolist(), "imag": x.imag.tolist(), "norm_squared": _complex(st.norm_squared())}


def _cover(args, obj):
    if obj is not None and "cover" in obj:
        return CoverElement.from_dict(obj["cover"])
    k, kah = _generator(args, obj)
    return lift_generator(k, kah)


def _cmd_wick(args):
    obj = _read_input(args)
    idx = (obj or {}).get("indices", args.indices)
    if idx is None:
        raise InvariantViolation("wick needs indices (input field or --indices)")
    cover = _cover(args, obj)
    return {"indices": list(idx), "value": _complex(wick_moment(idx, cover, one_based=True))}


def _cmd_evolve(args):
    obj = _read_input(args)
    if obj is None or "state" not in obj:
        raise InvariantViolation("evolve needs --input with state, directions, epsilon and steps")
    st = SuperpositionState.from_dict(obj["state"])
    dirs = [matrix_from_json(d)[0] for d in obj["directions"]]
    eps, steps = float(obj["epsilon"]), int(obj["steps"])
    rows = []
    for i in range(steps + 1):
        if i:
            st = evolve_step(st, dirs, eps)
        row = {"step": i, "t": i * eps, "norm_squared": st.norm_squared().real}
        x = st.overlaps
        for a in range(st.size):
            for b in range(a + 1, st.size):
                row[f"x{a}{b}_re"], row[f"x{a}{b}_im"] = x[a, b].real, x[a, b].imag
        rows.append(row)
    return rows


def _cmd_case_study(args):
    if args.system == "boson":
        return case_study.boson_sweep(args.points, args.extent)
    return case_study.fermion_sweep(args.points, args.extent, half=args.half)


def _cmd_moment(args):
    obj = _read_input(args)
    st = SuperpositionState.from_dict(obj["state"])
    return {"value": _complex(moment(st, obj["indices"], one_based=True))}


def _cmd_selftest(args):
    root = Path(__file__).resolve().parents[2]
    target = root / "tests" / "test_acceptance.py"
    if not target.exists():
        raise InvariantViolation(f"acceptance suite not found at {target}")
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-s", str(target)], cwd=root)
    return proc.returncode


COMMANDS = {"phase": _cmd_phase, "oracle": _cmd_oracle, "trajectory": _cmd_trajectory, "overlap": _cmd_overlap,
            "wick": _cmd_wick, "evolve": _cmd_evolve, "case-study": _cmd_case_study, "moment": _cmd_moment,
            "selftest": _cmd_selftest}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON input file ('-' for stdin)")
    common.add_argument("--output", help="output file (default stdout)")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cutoff", type=int, default=120, help="bosonic Fock cutoff for the oracle")
    common.add_argument("--tol", type=float, default=None, help="tolerance override (reported, not used by all commands)")
    common.add_argument("--n-modes", type=int, default=1)
    common.add_argument("--statistics", type=Statistics.parse, default=Statistics.BOSON)
    common.add_argument("--scale", type=float, default=1.0)
    common.add_argument("--workers", type=int, default=1)

    p = argparse.ArgumentParser(prog="gcover", description="Phases of Gaussian unitaries via double covers.")
    sub = p.add_subparsers(dest="command", required=True)
    ph = sub.add_parser("phase", parents=[common], help="<J|exp(K^)|J> with its full phase")
    ph.add_argument("--normal-form", action="store_true", help="include the bosonic normal form")
    sub.add_parser("oracle", parents=[common], help="brute-force Fock or Riccati value")
    tr = sub.add_parser("trajectory", parents=[common], help="phase along exp(tK^)")
    tr.add_argument("--t-max", type=float, default=10.0)
    tr.add_argument("--points", type=int, default=201)
    sub.add_parser("overlap", parents=[common], help="overlap matrix of a superposition state")
    wk = sub.add_parser("wick", parents=[common], help="generalized Wick moment (1-based indices)")
    wk.add_argument("--indices", type=lambda s: [int(x) for x in s.split(",") if x], default=None,
                    help="comma-separated 1-based phase-space indices")
    sub.add_parser("evolve", parents=[common], help="step-wise evolution with sign continuation")
    sub.add_parser("moment", parents=[common], help="moment of a superposition state")
    cs = sub.add_parser("case-study", parents=[common], help="closed-form example grids")
    cs.add_argument("system", choices=["boson", "fermion"])
    cs.add_argument("--points", type=int, default=21)
    cs.add_argument("--extent", type=float, default=3.0)
    cs.add_argument("--half", action="store_true", help="fermion: even-sector vector n/2")
    sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    return p


def to_csv(rows):
    if isinstance(rows, dict):
        rows = [rows]
    keys = list(rows[0].keys()) if rows else []
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow([_cell(r[k]) for k in keys])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    if v is None:
        return "nan"
    return str(v)


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
    except GCoverError as exc:
        sys.stdout.write(dumps(exc.to_dict()))
        return 2
    except (OSError, ValueError, KeyError) as exc:
        sys.stdout.write(dumps({"error": "InvalidInput", "message": str(exc)}))
        return 2
    if args.command == "selftest":
        return result
    _emit(to_csv(result) if args.format == "csv" else dumps(result), args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
