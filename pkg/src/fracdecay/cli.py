"""Command-line experiment runner.

Subcommands ``ml-eval``, ``spectrum``, ``decay`` and ``verify`` read an
optional INI configuration (``--config``), apply command-line overrides and
write CSV files into ``--out`` (stdout for ``ml-eval`` without ``--out``).

Exit codes: 0 success, 1 a verification check failed, 2 invalid
configuration or parameters.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys
import warnings
from pathlib import Path

import numpy as np

from fracdecay import __version__
from fracdecay.mlf import UnsupportedParameters, ml_eval
from fracdecay.norms_decay import decay_study
from fracdecay.propagator import grid_for, preset_data
from fracdecay.spectral_model import build_model, fit_lambda, parse_descriptor
from fracdecay.verification import (
    additional_bound_battery,
    corrupted_psi,
    ml_identity_battery,
    residual_battery,
    semigroup_checks,
    transform_battery,
)

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2

SCHEMA = {
    "model": {
        "descriptor", "kind", "n", "cutoff", "box_length", "group", "order",
        "table", "generators", "lambda", "c", "preset",
    },
    "equation": {"beta", "p", "q"},
    "data": {"preset", "velocity", "sigma", "points", "csv"},
    "grid": {"t_min", "t_max", "t_points", "s_min", "s_max", "s_points", "fit_t_min", "fit_t_max"},
    "ml": {"alpha", "delta", "z"},
    "verify": {"cases", "psi"},
    "run": {"seed", "out"},
}

DEFAULTS = {
    "model": {"descriptor": "euclidean:1:box_length=400"},
    "equation": {"beta": "0.5", "p": "1.3333333333333333", "q": "4"},
    "data": {"preset": "gaussian-mean-zero", "velocity": "gaussian-mean-zero", "sigma": "0.05", "points": "8192"},
    "grid": {
        "t_min": "0.1", "t_max": "1000", "t_points": "25",
        "s_points": "41",
    },
    "ml": {"alpha": "1", "delta": "1", "z": "-1"},
    "verify": {"cases": "1000", "psi": "default"},
    "run": {"seed": "0"},
}


class ConfigError(ValueError):
    pass


def load_config(path=None):
    """Read and validate an INI file; unknown sections or keys are errors."""
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.read_dict(DEFAULTS)
    if path is not None:
        user = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as fh:
                user.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for section in user.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            unknown = set(user[section]) - SCHEMA[section]
            if unknown:
                raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
            if section == "model":
                # a user [model] section replaces the default descriptor entirely
                cfg.remove_section("model")
                cfg.add_section("model")
            for key, value in user[section].items():
                cfg[section][key] = value
    return cfg


def _float(cfg, section, key):
    try:
        return float(cfg[section][key])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key} must be a number") from exc


def _int(cfg, section, key):
    value = _float(cfg, section, key)
    if not value.is_integer():
        raise ConfigError(f"[{section}] {key} must be an integer")
    return int(value)


def _model_spec(cfg):
    sec = dict(cfg["model"])
    if "descriptor" in sec:
        spec = parse_descriptor(sec.pop("descriptor"))
        spec.update(sec)
    else:
        spec = sec
    for key in ("n", "order"):
        if key in spec:
            spec[key] = int(float(spec[key]))
    for key in ("cutoff", "box_length", "lambda", "c"):
        if key in spec:
            spec[key] = float(spec[key])
    return spec


def _build(cfg):
    try:
        return build_model(_model_spec(cfg))
    except (KeyError, ValueError, TypeError, OSError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _out_dir(args, cfg):
    out = args.out or cfg["run"].get("out") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------- commands


def cmd_ml_eval(args, cfg):
    alpha = args.alpha if args.alpha is not None else _float(cfg, "ml", "alpha")
    delta = args.delta if args.delta is not None else _float(cfg, "ml", "delta")
    if args.z is not None:
        zs = args.z
    else:
        try:
            zs = [float(v) for v in cfg["ml"]["z"].split(",")]
        except ValueError as exc:
            raise ConfigError("[ml] z must be a comma-separated list of numbers") from exc
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnsupportedParameters)
        for z in zs:
            try:
                res = ml_eval(alpha, delta, z)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            rows.append((float(z), res.value, res.abs_error_estimate, res.regime))
    path = None if args.out is None else _out_dir(args, cfg) / "ml_eval.csv"
    _write_csv(path, ["z", "value", "err_estimate", "regime"], rows)
    return EXIT_OK


def _s_grid(cfg, model):
    # torus counting is only a power law well above the first lattice shells
    lo_default, hi_default = (1e2, min(1e4, model.cutoff)) if model.kind == "torus" else (1e-2, 1e2)
    lo = _float(cfg, "grid", "s_min") if "s_min" in cfg["grid"] else lo_default
    hi = _float(cfg, "grid", "s_max") if "s_max" in cfg["grid"] else hi_default
    n = _int(cfg, "grid", "s_points")
    if not (0 < lo < hi) or n < 2:
        raise ConfigError("[grid] needs 0 < s_min < s_max and s_points >= 2")
    return np.geomspace(lo, hi, n)


def cmd_spectrum(args, cfg):
    model = _build(cfg)
    out = _out_dir(args, cfg)
    if model.kind == "cayley":
        # a finite spectrum has no growth exponent: dump atoms and N just above each
        s = np.nextafter(model.eigenvalues[model.eigenvalues > 0], np.inf)
        _write_csv(out / "spectrum.csv", ["s", "N"], zip(s, model.counting(s)))
        _write_csv(out / "atoms.csv", ["eigenvalue", "weight"], zip(model.eigenvalues, model.weights))
        return EXIT_OK
    s = _s_grid(cfg, model)
    try:
        N = model.counting(s)
        fit = fit_lambda(model, s)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _write_csv(out / "spectrum.csv", ["s", "N"], zip(s, N))
    _write_csv(
        out / "lambda_fit.csv",
        ["lambda_hat", "c_hat", "r_squared", "s_min", "s_max"],
        [(fit.lambda_hat, fit.c_hat, fit.r_squared, fit.s_range[0], fit.s_range[1])],
    )
    return EXIT_OK


def _read_samples_csv(path, shape):
    """Rows of ``index_0, ..., index_{d-1}, value``."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if data.shape[1] != len(shape) + 1:
        raise ConfigError(f"{path}: expected {len(shape)} index columns and one value column")
    f = np.zeros(shape)
    idx = tuple(data[:, k].astype(int) for k in range(len(shape)))
    f[idx] = data[:, -1]
    return f


def _data(cfg, model, name, seed):
    sec = cfg["data"]
    if model.kind == "cayley":
        shape = (model.group.order,)
    else:
        shape = (_int(cfg, "data", "points"),) * model.params["n"]
    try:
        grid_for(model, shape)
        if name == "csv":
            return _read_samples_csv(sec["csv"], shape)
        return preset_data(model, name, shape, sigma=_float(cfg, "data", "sigma"), seed=seed)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid data: {exc}") from exc


def cmd_decay(args, cfg):
    beta = args.beta if args.beta is not None else _float(cfg, "equation", "beta")
    p = args.p if args.p is not None else _float(cfg, "equation", "p")
    q = args.q if args.q is not None else _float(cfg, "equation", "q")
    if not (0 < beta < 2) or not (1 <= p <= 2 <= q):
        raise ConfigError("need 0 < beta < 2 and 1 <= p <= 2 <= q")
    model = _build(cfg)
    if not model.is_compact and model.kind != "euclidean":
        raise ConfigError("decay studies need a model with a spatial grid")
    seed = args.seed if args.seed is not None else _int(cfg, "run", "seed")
    t_lo, t_hi = _float(cfg, "grid", "t_min"), _float(cfg, "grid", "t_max")
    n_t = _int(cfg, "grid", "t_points")
    if not (0 < t_lo < t_hi) or n_t < 3:
        raise ConfigError("[grid] needs 0 < t_min < t_max and t_points >= 3")
    t = np.geomspace(t_lo, t_hi, n_t)
    window = None
    if "fit_t_min" in cfg["grid"] or "fit_t_max" in cfg["grid"]:
        lo = float(cfg["grid"].get("fit_t_min", t_lo))
        hi = float(cfg["grid"].get("fit_t_max", t_hi))
        idx = np.nonzero((t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12)))[0]
        if idx.size < 2:
            raise ConfigError("fit window contains fewer than two t points")
        window = (int(idx[0]), int(idx[-1]) + 1)
    if beta > 1:
        w0 = np.zeros_like(_data(cfg, model, cfg["data"]["preset"], seed))
        w1 = _data(cfg, model, cfg["data"]["velocity"], seed)
    else:
        w0, w1 = _data(cfg, model, cfg["data"]["preset"], seed), None
    s_grid = _s_grid(cfg, model)
    try:
        study = decay_study(model, beta, p, q, w0, w1, t_grid=t, window=window, s_grid=s_grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(args, cfg)
    _write_csv(out / "decay.csv", ["t", "norm_q", "normalizer", "local_slope"], study.rows())
    _write_csv(
        out / "fit.csv",
        ["slope", "target", "rel_dev", "r_squared", "t_fit_min", "t_fit_max"],
        [(study.fit.slope, study.target, study.rel_dev, study.fit.r_squared, *study.fit.t_range)],
    )
    return EXIT_OK


def cmd_verify(args, cfg):
    seed = args.seed if args.seed is not None else _int(cfg, "run", "seed")
    cases = _int(cfg, "verify", "cases")
    psi_mode = cfg["verify"]["psi"]
    if psi_mode not in ("default", "increasing"):
        raise ConfigError("[verify] psi must be 'default' or 'increasing'")
    if cases < 1:
        raise ConfigError("[verify] cases must be positive")
    psi = corrupted_psi() if psi_mode == "increasing" else None
    checks = (
        ml_identity_battery()
        + transform_battery(seed)
        + residual_battery()
        + semigroup_checks()
        + additional_bound_battery(cases, seed, psi_override=psi)
    )
    out = _out_dir(args, cfg)
    _write_csv(
        out / "verify.csv",
        ["check", "value", "threshold", "passed", "detail"],
        [(c.name, c.value, c.threshold, int(c.passed), c.detail) for c in checks],
    )
    failed = [c for c in checks if not c.passed]
    for c in failed:
        print(f"FAIL {c.name}: {c.value!r} (threshold {c.threshold!r}) {c.detail}", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {"ml-eval": cmd_ml_eval, "spectrum": cmd_spectrum, "decay": cmd_decay, "verify": cmd_verify}


def build_parser():
    parser = argparse.ArgumentParser(prog="fracdecay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="random seed")
        if name == "ml-eval":
            sp.add_argument("--alpha", type=float)
            sp.add_argument("--delta", type=float)
            sp.add_argument("--z", type=float, nargs="+", help="arguments z <= 0")
        if name in ("spectrum", "decay"):
            sp.add_argument("--model", help="model descriptor, e.g. torus:2 or cayley:cyclic:4")
        if name == "decay":
            sp.add_argument("--beta", type=float)
            sp.add_argument("--p", type=float)
            sp.add_argument("--q", type=float)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        if getattr(args, "model", None):
            cfg.remove_section("model")
            cfg.add_section("model")
            cfg["model"]["descriptor"] = args.model
        if args.seed is not None and args.seed < 0:
            raise ConfigError("seed must be nonnegative")
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
