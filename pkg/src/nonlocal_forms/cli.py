"""Command-line front end.

Every command accepts ``--config PATH`` (a JSON object whose keys are the
command's option names with dashes or underscores); flags given on the
command line override the file.  The JSON report, which embeds the resolved
configuration, goes to ``--report PATH`` or to standard output.

Exit codes: 0 success, 2 invalid input, 3 inconclusive QR verdict, 4 QR fail.
The log level is read from ``NONLOCAL_FORMS_LOG``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import forms, generators, measures, process, qr
from .spaces import EigenSequence, PowerLaw

log = logging.getLogger("nonlocal_forms")

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_FAIL = 0, 2, 3, 4
LOG_ENV = "NONLOCAL_FORMS_LOG"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


# -- parsing helpers -----------------------------------------------------------


def _floats(text, field):
    if isinstance(text, (list, tuple)):
        vals = text
    else:
        vals = [t for t in str(text).replace(";", ",").split(",") if t.strip()]
    try:
        return np.array([float(v) for v in vals])
    except (TypeError, ValueError):
        raise ConfigError(f"{field}: expected a list of numbers, got {text!r}") from None


def _matrix(rows, field):
    try:
        M = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{field}: expected a numeric matrix") from None
    if M.ndim != 2:
        raise ConfigError(f"{field}: expected a 2-d matrix")
    return M


def _sequence(spec, field, n=None):
    """A PowerLaw from text like ``"i^-1"`` or an array from a list."""
    if isinstance(spec, str):
        try:
            return PowerLaw.parse(spec)
        except ValueError as e:
            raise ConfigError(f"{field}: {e}") from None
    if isinstance(spec, (int, float)):
        return PowerLaw(float(spec), 0.0)
    return _floats(spec, field)


def _get(cfg, key, field_prefix, cast=None, default=...):
    if key not in cfg:
        if default is ...:
            raise ConfigError(f"{field_prefix}.{key}: required")
        return default
    v = cfg[key]
    if cast is None:
        return v
    try:
        return cast(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{field_prefix}.{key}: invalid value {v!r}") from None


def _check_keys(cfg, allowed, field_prefix):
    if not isinstance(cfg, dict):
        raise ConfigError(f"{field_prefix}: expected an object")
    extra = sorted(set(cfg) - set(allowed))
    if extra:
        raise ConfigError(f"{field_prefix}.{extra[0]}: unknown field")


def parse_conditional(spec, field):
    _check_keys(spec, {"kind", "values", "weights", "mean", "var", "a", "b"}, field)
    kind = _get(spec, "kind", field, str)
    if kind == "atoms":
        return measures.Conditional1D.atoms(_floats(_get(spec, "values", field), f"{field}.values"),
                                            _floats(_get(spec, "weights", field), f"{field}.weights"))
    if kind == "gaussian":
        return measures.Conditional1D.gaussian(_get(spec, "mean", field, float, 0.0), _get(spec, "var", field, float, 1.0))
    if kind == "uniform":
        return measures.Conditional1D.uniform(_get(spec, "a", field, float, 0.0), _get(spec, "b", field, float, 1.0))
    raise ConfigError(f"{field}.kind: unknown marginal kind {kind!r}")


def parse_measure(spec, field="measure"):
    """Measure from JSON: ``product``, ``gaussian-spectral`` or ``phi4``."""
    if not isinstance(spec, dict):
        raise ConfigError(f"{field}: expected an object")
    kind = _get(spec, "type", field, str)
    if kind == "product":
        _check_keys(spec, {"type", "marginals"}, field)
        margs = _get(spec, "marginals", field)
        if not isinstance(margs, list) or not margs:
            raise ConfigError(f"{field}.marginals: expected a non-empty list")
        return measures.ProductMeasure(tuple(parse_conditional(m, f"{field}.marginals[{k}]")
                                             for k, m in enumerate(margs)))
    if kind == "gaussian-spectral":
        _check_keys(spec, {"type", "variances", "lambda", "n"}, field)
        if "variances" in spec:
            return measures.GaussianSpectralMeasure(_floats(spec["variances"], f"{field}.variances"))
        return measures.GaussianSpectralMeasure.from_eigen(_eigen(spec.get("lambda"), spec.get("n"), field))
    if kind == "phi4":
        _check_keys(spec, {"type", "d", "eps", "side", "a_eps", "coupling", "boundary"}, field)
        return measures.LatticePhi4Measure(
            d=_get(spec, "d", field, int, 1), eps=_get(spec, "eps", field, float, 1.0),
            side=_get(spec, "side", field, int, 2), a_eps=_get(spec, "a_eps", field, float, 1.0),
            coupling=_get(spec, "coupling", field, float, 0.0),
            boundary=_get(spec, "boundary", field, str, measures.FREE))
    raise ConfigError(f"{field}.type: unknown measure type {kind!r}")


def _eigen(lam, n, field):
    if lam is None:
        raise ConfigError(f"{field}.lambda: required")
    seq = _sequence(lam, f"{field}.lambda")
    if isinstance(seq, PowerLaw):
        if n is None:
            raise ConfigError(f"{field}.n: required with a power-law lambda")
        if seq.coef != 1.0:
            raise ConfigError(f"{field}.lambda: power laws must have coefficient 1")
        return EigenSequence.power_law(-seq.exponent, int(n))
    return EigenSequence(seq)


def parse_function(spec, field):
    _check_keys(spec, {"kind", "i", "clip", "indices", "radius", "coeffs", "cutoff", "c"}, field)
    kind = _get(spec, "kind", field, str)
    if kind == "projection":
        return forms.projection(_get(spec, "i", field, int), _get(spec, "clip", field, float, 1e6))
    if kind == "bump":
        return forms.bump_product(_get(spec, "indices", field, lambda v: [int(x) for x in v]),
                                  _get(spec, "radius", field, float, 1.0))
    if kind == "polynomial":
        return forms.clipped_polynomial(_get(spec, "i", field, int), _floats(_get(spec, "coeffs", field), f"{field}.coeffs"),
                                        _get(spec, "cutoff", field, float, 1.0))
    if kind == "constant":
        return forms.constant(_get(spec, "c", field, float, 1.0))
    raise ConfigError(f"{field}.kind: unknown function kind {kind!r}")


def parse_form_config(spec, seed):
    spec = spec or {}
    _check_keys(spec, {"alpha", "kernel_profile", "mc_samples", "inner_samples"}, "form")
    try:
        return forms.FormConfig(alpha=float(spec.get("alpha", 0.5)),
                                kernel_profile=str(spec.get("kernel_profile", forms.EQ8)),
                                mc_samples=int(spec.get("mc_samples", 2000)),
                                inner_samples=int(spec.get("inner_samples", 16)),
                                seed=0 if seed is None else int(seed))
    except ValueError as e:
        raise ConfigError(f"form: {e}") from None


# -- output helpers --------------------------------------------------------------


def matrix_csv(M) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(M):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def _jsonable(x):
    return qr._jsonable(x)


def _write_artifact(path, fmt, csv_text, payload):
    if path is None:
        return
    fmt = fmt or ("csv" if str(path).endswith(".csv") else "json")
    if fmt == "csv":
        if csv_text is None:
            raise ConfigError("format: this command has no CSV artifact")
        Path(path).write_text(csv_text)
    else:
        Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _require_seed(args, command):
    if args.seed is None:
        raise ConfigError(f"seed: command {command!r} is randomized and needs --seed")
    return int(args.seed)


# -- commands ----------------------------------------------------------------------


def cmd_toy(args, cfg):
    p = float(cfg.get("p", 0.5))
    t = float(cfg.get("t", 1.0))
    alpha = float(cfg.get("alpha", 0.5))
    try:
        model = generators.toy_model(p, t, alpha)
    except ValueError as e:
        raise ConfigError(f"p: {e}") from None
    Mt = model.numeric
    mu = np.array([p, 1 - p])
    result = {
        "A": model.A, "M_t": Mt, "M_t_closed_form": model.closed_form,
        "max_abs_diff": float(np.max(np.abs(Mt - model.closed_form))),
        "row_sum_residual": float(np.max(np.abs(Mt.sum(axis=1) - 1))),
        "invariance_residual": float(np.max(np.abs(mu @ Mt - mu))),
    }
    _write_artifact(args.out, args.format, matrix_csv(Mt), result)
    return {"p": p, "t": t, "alpha": alpha}, result, EXIT_OK


def cmd_quantize(args, cfg):
    if "mu" not in cfg:
        raise ConfigError("mu: required")
    mu = _floats(cfg["mu"], "mu")
    prop = cfg.get("proposal", "uniform")
    Q = generators.uniform_proposal(mu.size) if prop == "uniform" else _matrix(prop, "proposal")
    try:
        M = generators.metropolis_quantize(mu, Q)
    except ValueError as e:
        raise ConfigError(f"mu/proposal: {e}") from None
    flow = mu[:, None] * M
    result = {"M": M, "invariance_residual": float(np.max(np.abs(mu @ M - mu))),
              "detailed_balance_residual": float(np.max(np.abs(flow - flow.T)))}
    _write_artifact(args.out, args.format, matrix_csv(M), result)
    return {"mu": mu, "proposal": prop if prop == "uniform" else Q}, result, EXIT_OK


def cmd_form_eval(args, cfg):
    seed = _require_seed(args, "form-eval")
    measure = parse_measure(_get(cfg, "measure", "config"))
    u = parse_function(_get(cfg, "u", "config"), "u")
    v = parse_function(cfg.get("v", cfg["u"]), "v")
    fcfg = parse_form_config(cfg.get("form"), seed)
    method = str(cfg.get("method", "auto"))
    if "coordinate" in cfg:
        est = forms.form_coordinate(u, v, int(cfg["coordinate"]), measure, fcfg, method)
    else:
        est = forms.form_total(u, v, measure, fcfg, method)
    result = {"value": est.value, "se": est.se, "exact": est.exact, "n": est.n, "warning": est.warning}
    _write_artifact(args.out, args.format, None, result)
    return cfg, result, EXIT_OK


def _qr_input(args, cfg):
    if args.preset or "preset" in cfg:
        name = args.preset or cfg["preset"]
        lam = args.lam or cfg.get("lambda")
        n = int(args.n_terms or cfg.get("n_terms", 10**6))
        eig = _eigen(lam, n, "qr")
        inp = qr.preset(name, eig, alpha=float(cfg.get("alpha", 1.0)))
        return _qr_overrides(inp, args, cfg)
    field = "qr"
    flavor = _get(cfg, "flavor", field, str)
    n = int(args.n_terms or _get(cfg, "n_terms", field))
    tail = _tail_source(cfg.get("tail"), args)
    L = cfg.get("density_bounds")
    if isinstance(L, list):
        L = _floats(L, "density_bounds")
    try:
        inp = qr.QRInput(
            flavor=flavor,
            beta=_sequence(cfg["beta"], "beta") if "beta" in cfg else None,
            gamma=_sequence(_get(cfg, "gamma", field), "gamma"),
            n_terms=n, M0=float(cfg.get("M0", 1.0)), alpha=float(cfg.get("alpha", 1.0)),
            p=float(cfg.get("p", 2.0)), tail=tail, density_bounds=L,
            seed=0 if args.seed is None else int(args.seed), name=str(cfg.get("name", "")),
        )
    except ValueError as e:
        raise ConfigError(f"qr: {e}") from None
    return _qr_overrides(inp, args, cfg)


def _qr_overrides(inp, args, cfg):
    changes = {"support_samples": int(cfg.get("support_samples", 32)) if args.seed is not None else 0}
    if args.seed is not None:
        changes["seed"] = int(args.seed)
    for key in ("pass_tol", "fail_floor"):
        if key in cfg:
            changes[key] = float(cfg[key])
    if "m_cap_log2" in cfg:
        changes["m_cap_log2"] = int(cfg["m_cap_log2"])
    return dataclasses.replace(inp, **changes)


def _tail_source(spec, args):
    if spec is None:
        raise ConfigError("tail: missing tail source")
    _check_keys(spec, {"kind", "measure", "n_samples"}, "tail")
    kind = _get(spec, "kind", "tail", str)
    measure = parse_measure(spec["measure"], "tail.measure") if "measure" in spec else None
    if kind == qr.EMPIRICAL:
        _require_seed(args, "qr-check with empirical tails")
    try:
        return qr.TailSource(kind, measure, n_samples=int(spec.get("n_samples", 0)))
    except ValueError as e:
        raise ConfigError(f"tail: {e}") from None


def cmd_qr_check(args, cfg):
    inp = _qr_input(args, cfg)
    try:
        report = qr.check(inp)
    except ValueError as e:
        raise ConfigError(f"qr: {e}") from None
    code = {qr.PASS: EXIT_OK, qr.FAIL: EXIT_FAIL, qr.INCONCLUSIVE: EXIT_INCONCLUSIVE}[report.verdict]
    result = report.to_dict()
    head = next((c for c in report.conditions if c.series is not None), None)
    if head is not None:
        result["sum"] = head.series.partial_sum
        result["bracket"] = head.series.bracket
    args.table = report.table()
    _write_artifact(args.out, "json", None, result)
    return inp.describe(), result, code


def cmd_phi4_sample(args, cfg):
    seed = _require_seed(args, "phi4-sample")
    measure = parse_measure(cfg.get("measure", {"type": "phi4"}))
    if not isinstance(measure, measures.LatticePhi4Measure):
        raise ConfigError("measure.type: phi4-sample needs a phi4 measure")
    n_sweeps = int(cfg.get("n_sweeps", 10_000))
    burn_in = int(cfg.get("burn_in", 1000))
    thin = int(cfg.get("thin", 1))
    if n_sweeps < 1 or burn_in < 0 or thin < 1:
        raise ConfigError("n_sweeps/burn_in/thin: must be positive")
    res = measures.run_chain(measure, n_sweeps, np.random.default_rng(seed), burn_in=burn_in, thin=thin)
    X = res.samples
    result = {"acceptance": res.acceptance, "step": res.step, "n_samples": int(X.shape[0]),
              "site_variance": X.var(axis=0), "two_point": measures.two_point_function(X, measure)}
    if measure.coupling == 0:
        result["exact_site_variance"] = np.diag(measure.gaussian_covariance())
    _write_artifact(args.out, args.format, matrix_csv(X), result)
    resolved = {"measure": cfg.get("measure", {"type": "phi4"}), "n_sweeps": n_sweeps,
                "burn_in": burn_in, "thin": thin}
    return resolved, result, EXIT_OK


def cmd_simulate(args, cfg):
    seed = _require_seed(args, "simulate")
    T = float(cfg.get("T", 100.0))
    if not T > 0:
        raise ConfigError("T: horizon must be positive")
    if "states" in cfg:
        states = np.array(cfg["states"], dtype=float)
        mu = _floats(_get(cfg, "mu", "config"), "mu")
        fcfg = parse_form_config(cfg.get("form"), seed)
        try:
            space = generators.DiscreteStateSpace(states, mu)
        except ValueError as e:
            raise ConfigError(f"states/mu: {e}") from None
        gen = generators.build_generator(space, fcfg)
    else:
        p = float(cfg.get("p", 0.5))
        if not 0 < p < 1:
            raise ConfigError("p: must lie in (0, 1)")
        space = generators.DiscreteStateSpace.toy(p)
        gen = generators.build_generator(space, forms.FormConfig(alpha=float(cfg.get("alpha", 0.5)),
                                                                 kernel_profile=forms.TOY))
    x0 = cfg.get("x0", "stationary")
    x0 = process.stationary_start(space.mu, [seed, 1]) if x0 == "stationary" else int(x0)
    traj = process.simulate(gen, x0, T, seed)
    inv = process.empirical_invariance(traj, space.mu)
    result = {"n_jumps": traj.n_jumps, "x0": x0, "occupation": inv.occupation, "tv": inv.tv,
              "inconclusive": inv.inconclusive}
    coords = space.states
    _write_artifact(args.out, args.format, traj.to_csv(coords),
                    {**result, "jump_times": traj.jump_times, "states": traj.states})
    return {k: cfg[k] for k in cfg}, result, EXIT_OK


COMMANDS = {
    "toy": cmd_toy,
    "quantize": cmd_quantize,
    "form-eval": cmd_form_eval,
    "qr-check": cmd_qr_check,
    "phi4-sample": cmd_phi4_sample,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with command options")
    common.add_argument("--seed", type=int, help="RNG seed (required for randomized commands)")
    common.add_argument("--out", help="artifact path (CSV matrix/trajectory or JSON)")
    common.add_argument("--format", choices=("json", "csv", "table"), help="artifact/stdout format")
    common.add_argument("--report", help="write the JSON report here instead of standard output")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp (byte-stable reports)")

    parser = argparse.ArgumentParser(prog="nonlocal-forms", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toy", parents=[common], help="two-point model semigroup")
    p.add_argument("--p", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--alpha", type=float)

    p = sub.add_parser("quantize", parents=[common], help="Metropolis matrix for a target mu")
    p.add_argument("--mu", help="comma-separated probabilities")

    sub.add_parser("form-eval", parents=[common], help="evaluate the form on cylinder functions")

    p = sub.add_parser("qr-check", parents=[common], help="quasi-regularity summability checks")
    p.add_argument("--preset", choices=qr.PRESETS)
    p.add_argument("--lambda", dest="lam", help='eigenvalue law such as "i^-1"')
    p.add_argument("--n-terms", type=int)

    sub.add_parser("phi4-sample", parents=[common], help="Metropolis sampling of the lattice measure")

    p = sub.add_parser("simulate", parents=[common], help="jump-process path from a generator")
    p.add_argument("--p", type=float)
    p.add_argument("--T", type=float)
    return parser


_FLAG_KEYS = {"p": "p", "t": "t", "alpha": "alpha", "mu": "mu", "T": "T"}


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config: file not found: {path}")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config: not valid JSON ({e})") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config: top level must be an object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for flag, key in _FLAG_KEYS.items():
        val = getattr(args, flag, None)
        if val is not None:
            cfg[key] = val
    return cfg


def run(argv=None) -> int:
    logging.basicConfig(level=os.environ.get(LOG_ENV, "WARNING").upper(), format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        resolved, result, code = COMMANDS[args.command](args, cfg)
    except ValueError as e:  # includes ConfigError
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    report = {"command": args.command, "version": __version__, "seed": args.seed,
              "config": resolved, "result": result, "exit_code": code}
    if not args.no_timestamp:
        report["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    table = getattr(args, "table", None)
    if args.report:
        Path(args.report).write_text(text)
    if table is not None and (args.report or args.format == "table"):
        print(table)
    elif not args.report:
        sys.stdout.write(text)
    log.info("%s finished with exit code %d", args.command, code)
    return code


def main() -> None:
    sys.exit(run())
