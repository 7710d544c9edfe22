"""Command line: eval, coeffs, transform, invert, simulate, validate.

Every command writes headered CSV with 17 significant digits. A first line
``# generated <timestamp>`` is added unless --no-timestamp is given, so two
runs with the same flags differ at most in that line.
"""
import argparse
import csv
import logging
import sys
from datetime import datetime, timezone
from fractions import Fraction
from typing import List, Optional

import numpy as np
from dotenv import dotenv_values
from pydantic import ValidationError

from . import coeffs, inversion, simulate, transforms, validate, wright
from .config import DEFAULT_SEED, configure_logging, default_threads
from .errors import InvalidInput, NumericalError
from .models import InversionConfig, RunConfig, as_index
from .results import MCEstimate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

COEFF_FAMILIES = ("B", "c", "d", "omega", "delta", "moment", "neg_moment")
LAW_TRANSFORMS = {
    "excursion": transforms.theorem1_alt_rhs,
    "meander": transforms.theorem2_rhs,
    "conditioned": transforms.theorem3_rhs,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return str(value)


def write_csv(stream, header: List[str], rows, timestamp: bool = True) -> None:
    if timestamp:
        stream.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def parse_grid(text: str) -> np.ndarray:
    """lo:hi:n, geometric."""
    try:
        lo, hi, n = text.split(":")
        return inversion.geometric_grid(float(lo), float(hi), int(n))
    except ValueError:
        raise InvalidInput("cli", f"grid must look like lo:hi:n, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--alpha", type=float, default=1.5, help="Stability index in (1, 2] (default: 1.5).")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Seed for Monte Carlo runs.")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (default: STABLE_AREA_THREADS).")
    common.add_argument("--tol", type=float, default=None, dest="target_abs_tol", help="Target absolute tolerance.")
    common.add_argument("--nodes", type=int, default=None, dest="node_count", help="Inversion node count.")
    common.add_argument("--output", "-o", default=None, dest="output_path", help="CSV path (default: stdout).")
    common.add_argument("--no-timestamp", action="store_false", dest="header", help="Omit the timestamp line.")
    common.add_argument("--config", default=None, help="key=value file; flags take precedence.")
    common.add_argument("--log-level", default=None, help="Logging level (default: STABLE_AREA_LOG_LEVEL).")

    parser = _Parser(prog="stable_area", description="Area functionals of spectrally positive stable processes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="Evaluate Phi, Psi, their derivatives or F.")
    p.add_argument("--fn", choices=["phi", "psi", "phi_prime", "psi_prime", "f_alpha"], default="phi")
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--x-imag", type=float, default=0.0, dest="x_imag")
    p.add_argument("--route", choices=["series", "quadrature", "asymptotic"], default=None)

    p = sub.add_parser("coeffs", parents=[common], help="Coefficient families and moments.")
    p.add_argument("--family", choices=COEFF_FAMILIES, default="c")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--k", type=int, default=None, help="Column of B; the whole row when omitted.")
    p.add_argument("--exact", action="store_true", help="Rational arithmetic (B, c, d, omega).")
    p.add_argument("--table", action="store_true", help="All indices up to n.")

    p = sub.add_parser("transform", parents=[common], help="Theorem right-hand sides and the joint transform.")
    p.add_argument("--law", choices=["ex", "me", "up", "excursion", "meander", "conditioned"], default="ex")
    p.add_argument("--lambda", type=float, default=1.0, dest="lam")
    p.add_argument("--mu", type=float, default=None, help="With --mu, the joint transform of (T_0, area).")
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--validate", action="store_true", help="Add a Monte Carlo estimate and z-score.")
    p.add_argument("--n", type=int, default=4000)
    p.add_argument("--steps", type=int, default=400)

    p = sub.add_parser("invert", parents=[common], help="E[exp(-s A)] or a density estimate.")
    p.add_argument("--law", choices=["ex", "me", "up", "excursion", "meander", "conditioned"], default="ex")
    p.add_argument("--s-grid", default="0.1:10:9", dest="s_grid")
    p.add_argument("--method", choices=["stehfest", "talbot"], default="stehfest")
    p.add_argument("--density", action="store_true")
    p.add_argument("--x-grid", default="0.1:4:20", dest="x_grid")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimates or raw samples.")
    p.add_argument("--target", choices=list(simulate.TARGETS), default="excursion")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--s", type=float, default=1.0, help="Laplace variable for the area.")
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--lambda", type=float, default=0.0, dest="lam")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--samples", action="store_true", help="Emit raw samples instead of a summary.")

    p = sub.add_parser("validate", parents=[common], help="Closed forms against oracles.")
    p.add_argument("--quick", action="store_true")
    return parser


def _config_defaults(argv: List[str]) -> dict:
    """Defaults from a --config file, keys spelled like the long flags."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    values = dotenv_values(known.config)
    renames = {"tol": "target_abs_tol", "nodes": "node_count", "output": "output_path", "lambda": "lam"}
    defaults = {}
    for key, raw in values.items():
        if raw is None:
            continue
        name = key.strip().lower().replace("-", "_")
        defaults[renames.get(name, name)] = raw
    return defaults


def parse_args(argv: Optional[List[str]] = None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    defaults = _config_defaults(argv)
    if defaults:
        for action in parser._subparsers._group_actions[0].choices.values():
            known = {a.dest: a for a in action._actions}
            for dest, raw in defaults.items():
                if dest in known:
                    kind = known[dest].type
                    action.set_defaults(**{dest: kind(raw) if kind else _flag(raw)})
    return parser.parse_args(argv)


def _flag(raw: str):
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    return raw


def run_config(args) -> RunConfig:
    reserved = {"command", "alpha", "seed", "threads", "target_abs_tol", "node_count", "output_path", "header"}
    options = {k: v for k, v in vars(args).items() if k not in reserved}
    try:
        return RunConfig(
            command=args.command,
            alpha=args.alpha,
            seed=args.seed,
            threads=args.threads or default_threads(),
            target_abs_tol=args.target_abs_tol,
            node_count=args.node_count,
            output_path=args.output_path,
            header=args.header,
            options=options,
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(p) for p in first["loc"])
        raise InvalidInput("cli", f"{field}: {first['msg']}")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _cmd_eval(cfg: RunConfig):
    opts = cfg.options
    x = complex(opts["x"], opts["x_imag"]) if opts["x_imag"] else opts["x"]
    fn = getattr(wright, opts["fn"])
    result = fn(cfg.alpha, x, cfg.eval_config(), route=opts["route"])
    value = result.value
    if isinstance(value, complex):
        header = ["fn", "alpha", "x", "x_imag", "real", "imag", "abs_error_estimate", "route"]
        row = [opts["fn"], cfg.alpha, opts["x"], opts["x_imag"], value.real, value.imag,
               result.abs_error_estimate, result.route.value]
    else:
        header = ["fn", "alpha", "x", "value", "abs_error_estimate", "route"]
        row = [opts["fn"], cfg.alpha, opts["x"], value, result.abs_error_estimate, result.route.value]
    return header, [row]


def _coefficient(family: str, alpha, n: int, k: Optional[int], exact: bool):
    if family == "B":
        return coeffs.bell_B(alpha, n, k, exact=exact)
    if family == "c":
        return coeffs.c_p(alpha, n, exact=exact)
    if family == "d":
        return coeffs.d_p(alpha, n, exact=exact)
    if family == "omega":
        return coeffs.omega_n(alpha, n, exact=exact)
    if exact:
        raise InvalidInput("cli", f"{family} involves Gamma values and has no exact mode")
    if family == "delta":
        return coeffs.delta_n(alpha, n)
    if family == "moment":
        return coeffs.moment_ex(alpha, n)
    return coeffs.neg_moment_ex(alpha, n)


def _alpha_argument(cfg: RunConfig, exact: bool):
    # exact tables want the decimal the user typed, not its binary value
    return Fraction(repr(cfg.alpha)) if exact else cfg.alpha


def _cmd_coeffs(cfg: RunConfig):
    opts = cfg.options
    family, n, exact = opts["family"], opts["n"], opts["exact"]
    alpha = _alpha_argument(cfg, exact)
    if family == "B":
        rows = []
        ns = range(1, n + 1) if opts["table"] else [n]
        for m in ns:
            ks = [opts["k"]] if opts["k"] is not None else range(1, m + 1)
            rows.extend([family, m, k, _coefficient(family, alpha, m, k, exact)] for k in ks)
        return ["family", "n", "k", "value"], rows
    start = 0 if family in ("c", "d") else 1
    ns = range(start, n + 1) if opts["table"] else [n]
    return ["family", "n", "value"], [[family, m, _coefficient(family, alpha, m, None, exact)] for m in ns]


def _cmd_transform(cfg: RunConfig):
    opts = cfg.options
    law = inversion.normalize_law(opts["law"])
    lam = opts["lam"]
    if opts["mu"] is not None:
        value = transforms.joint_laplace_T0_area(cfg.alpha, opts["z"], lam, opts["mu"])
        header = ["quantity", "alpha", "z", "lambda", "mu", "value"]
        row = ["joint", cfg.alpha, opts["z"], lam, opts["mu"], value]
        if opts["validate"]:
            estimate = simulate.first_passage_functional(cfg.alpha, opts["z"], lam, opts["mu"], opts["n"],
                                                         1.0 / opts["steps"], cfg.seed, cfg.threads)
            header += ["mc_mean", "mc_stderr", "z_score"]
            row += [estimate.mean, estimate.stderr, estimate.z_score(value)]
        return header, [row]
    value = LAW_TRANSFORMS[law](cfg.alpha, lam)
    header = ["law", "alpha", "lambda", "value"]
    row = [law, cfg.alpha, lam, value]
    if opts["validate"]:
        estimate = validate.theorem_lhs_mc(law, cfg.alpha, lam, opts["n"], opts["steps"], cfg.seed, cfg.threads)
        header += ["mc_mean", "mc_stderr", "z_score"]
        row += [estimate.mean, estimate.stderr, estimate.z_score(value)]
    return header, [row]


def _cmd_invert(cfg: RunConfig):
    opts = cfg.options
    law = inversion.normalize_law(opts["law"])
    icfg: InversionConfig = cfg.inversion_config(opts["method"])
    if opts["density"]:
        xs = parse_grid(opts["x_grid"])
        density = inversion.density_curve(law, cfg.alpha, xs, icfg, cfg.threads)
        return ["x", "density"], list(zip(xs, density))
    curve = inversion.laplace_curve(law, cfg.alpha, parse_grid(opts["s_grid"]), icfg, cfg.threads)
    return ["s", "value", "err_est"], list(zip(curve.s_grid, curve.values, curve.errors))


def _cmd_simulate(cfg: RunConfig):
    opts = cfg.options
    target, n, steps, s = opts["target"], opts["n"], opts["steps"], opts["s"]
    alpha, seed, threads = cfg.alpha, cfg.seed, cfg.threads
    if target == "passage":
        area, hit_time, absorbed, _ = simulate.passage_samples(alpha, opts["z"], n, 1.0 / steps,
                                                               opts["lam"], opts["mu"], seed, threads)
        if opts["samples"]:
            return ["area", "t_hit", "absorbed"], list(zip(area, hit_time, absorbed))
        estimate = simulate.first_passage_functional(alpha, opts["z"], opts["lam"], opts["mu"], n,
                                                     1.0 / steps, seed, threads)
        return _summary([("joint_transform", estimate)])
    if target == "a1":
        pairs = simulate.area_identity_check(alpha, n, (s,), steps, seed, threads)
        rows = []
        for q, path, direct in pairs:
            rows += [(f"path_area_laplace_q{q:g}", path), (f"stable_laplace_q{q:g}", direct)]
        return _summary(rows)
    if target == "conditioned":
        if opts["samples"]:
            areas, weights = simulate.resampled_samples(alpha, simulate.CONDITIONED_START, n, steps, seed, threads)
            return ["area", "weight"], list(zip(areas, weights))
        estimate = simulate.sample_conditioned_weighted(alpha, simulate.CONDITIONED_START, steps,
                                                        lambda a: np.exp(-s * a), n_samples=n, seed=seed,
                                                        threads=threads)
        extra = estimate.extra
        normalization = MCEstimate(mean=extra["normalization"], stderr=extra["normalization_stderr"],
                                   n=estimate.n, seed=seed)
        return _summary([("normalization", normalization), (f"laplace_s{s:g}", estimate)])
    areas = simulate.sample_areas(target, alpha, n, steps, seed, threads)
    if opts["samples"]:
        return ["area"], [[a] for a in areas]
    return _summary([
        ("mean", simulate.mc_moment(areas, 1.0, seed)),
        ("second_moment", simulate.mc_moment(areas, 2.0, seed)),
        (f"laplace_s{s:g}", simulate.laplace_of_samples(areas, s, seed=seed)),
    ])


def _summary(named):
    header = ["quantity", "mean", "stderr", "n", "seed", "truncated", "tail_bound"]
    return header, [[name, e.mean, e.stderr, e.n, e.seed, e.truncated, e.tail_bound] for name, e in named]


def _cmd_validate(cfg: RunConfig):
    checks = validate.run_validation(cfg.alpha, cfg.options["quick"], cfg.seed, cfg.threads)
    header = ["check", "computed", "reference", "kind", "statistic", "tolerance", "status"]
    rows = [[c.as_row()[h] for h in header] for c in checks]
    return header, rows, validate.exit_status(checks)


COMMANDS = {
    "eval": _cmd_eval,
    "coeffs": _cmd_coeffs,
    "transform": _cmd_transform,
    "invert": _cmd_invert,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
}


def run(config: RunConfig) -> int:
    """Run one command and write its CSV; returns the exit status."""
    as_index(config.alpha, "cli")
    produced = COMMANDS[config.command](config)
    status = EXIT_OK
    if len(produced) == 3:
        header, rows, status = produced
    else:
        header, rows = produced
    if config.output_path:
        with open(config.output_path, "w", newline="") as stream:
            write_csv(stream, header, rows, config.header)
    else:
        write_csv(sys.stdout, header, rows, config.header)
    return status


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(argv)
        configure_logging(args.log_level)
        config = run_config(args)
        return run(config)
    except UsageError as exc:
        print(f"error [cli]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidInput as exc:
        print(f"error [{exc.module}]: {exc.detail}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"error [{exc.module}]: {exc.detail}", file=sys.stderr)
        return exc.exit_code
