"""Command-line front end.

Subcommands mirror the library modules: ``gen`` (instances), ``solve``
(certified extension), ``run`` (one trajectory), ``tau`` (Monte-Carlo
approximation times), ``spectral`` (gap + hitting times), ``verify``
(inequality and bound suites), ``scaling`` (size sweeps).

Every command prints exactly one JSON summary line to stdout (embedding the
fully resolved config, so the run can be replayed via ``--config``), writes
declared outputs atomically, and uses exit codes 0 = success,
1 = verification violation, 2 = usage/config error, 3 = non-convergence.
"""

from __future__ import annotations

import argparse
import inspect
import json
import os
import sys
import tempfile

import numpy as np

from . import analysis, suites
from .dynamics import Schedule, estimate_expected_tau, make_state, step
from .extension import InvalidBoundary, NonConvergence, p_harmonic_extension
from .graph import (GraphFormatError, generate, parse_graph, parse_profile,
                    serialize_graph, serialize_profile, validate)
from .kernel import validate_p


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(summary: dict) -> None:
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")


def _load_graph(path: str):
    if path is None:
        raise ValueError("missing required field 'graph'")
    try:
        with open(path) as fh:
            return parse_graph(fh.read())
    except OSError as e:
        raise ValueError(f"graph file {path!r}: {e.strerror}") from e


def _parse_id_list(spec) -> list[int]:
    if spec is None:
        return []
    if isinstance(spec, (list, tuple)):
        return [int(x) for x in spec]
    return [int(x) for x in str(spec).replace(",", " ").split()]


def _load_initial_profile(spec: str, graph) -> np.ndarray:
    """Full initial profile from a profile file, or from inline boundary
    pairs ``v=x,...`` (interior then starts at the max boundary value)."""
    if spec is None:
        raise ValueError("missing required field 'boundary'")
    if not isinstance(spec, str):
        raise ValueError("field 'boundary' must name a profile file or give "
                         "inline v=value pairs")
    if "=" in spec:
        pairs = {}
        for item in spec.replace(",", " ").split():
            k, _, x = item.partition("=")
            pairs[int(k)] = float(x)
        for b in graph.boundary:
            if int(b) not in pairs:
                raise InvalidBoundary(f"boundary vertex {int(b)} missing from {spec!r}")
        for k in pairs:
            if not graph.boundary_mask[k]:
                raise InvalidBoundary(f"vertex {k} in {spec!r} is not boundary")
        f0 = np.full(graph.n, max(pairs.values()))
        for k, x in pairs.items():
            f0[k] = x
        return f0
    try:
        with open(spec) as fh:
            return parse_profile(fh.read(), graph.n)
    except OSError as e:
        raise ValueError(f"profile file {spec!r}: {e.strerror}") from e


def _parse_schedule(spec: str, seed: int) -> Schedule:
    if spec in (None, "uniform"):
        return Schedule.uniform(seed)
    if spec == "cyclic":
        return Schedule.cyclic()
    if spec == "sync":
        return Schedule.synchronous()
    if spec.startswith("script:"):
        path = spec[len("script:"):]
        try:
            with open(path) as fh:
                return Schedule.scripted(_parse_id_list(fh.read()))
        except OSError as e:
            raise ValueError(f"schedule script {path!r}: {e.strerror}") from e
    raise ValueError(f"unknown schedule {spec!r} "
                     "(expected uniform|cyclic|sync|script:<file>)")


# ---------------------------------------------------------------------------
# Config handling: JSON file overridden by explicit flags, unknown keys
# rejected so typos fail loudly.
# ---------------------------------------------------------------------------

_FIELDS = {
    "gen": ("kind", "n", "leaves", "prob", "seed", "boundary", "out"),
    "solve": ("graph", "boundary", "p", "tol", "out"),
    "run": ("graph", "boundary", "p", "eps", "schedule", "seed",
            "max_steps", "tol", "out"),
    "tau": ("graph", "boundary", "p", "eps", "trials", "seed",
            "max_steps", "tol", "workers", "out"),
    "spectral": ("graph", "out"),
    "verify": ("suite", "n", "eps", "trials", "seed", "workers", "out"),
    "scaling": ("sizes", "eps", "trials", "seed", "workers", "out"),
}

_DEFAULTS = {
    "tol": None, "seed": 0, "max_steps": 10 ** 9, "trials": None,
    "workers": None, "schedule": "uniform", "eps": None, "out": None,
    "n": None, "leaves": None, "prob": None, "boundary": None,
    "sizes": "8,16,32",
}


def _worker_count(cfg: dict) -> int:
    # default: available parallelism (affects wall-clock only, never results)
    if cfg.get("workers"):
        return int(cfg["workers"])
    return os.cpu_count() or 1

# verify forwards overrides into a suite only when given explicitly, so the
# suites' own deterministic defaults stay in charge otherwise
_COMMAND_DEFAULTS = {"verify": {"seed": None, "workers": None}}


def _resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except OSError as e:
            raise ValueError(f"config file {args.config!r}: {e.strerror}") from e
        except json.JSONDecodeError as e:
            raise ValueError(f"config file {args.config!r}: {e}") from e
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        loaded.pop("command", None)
        for key in loaded:
            if key not in _FIELDS[command]:
                raise ValueError(f"unknown config key {key!r} for {command!r}")
        cfg.update(loaded)
    overrides = _COMMAND_DEFAULTS.get(command, {})
    for key in _FIELDS[command]:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
        cfg.setdefault(key, overrides.get(key, _DEFAULTS.get(key)))
    return _coerce_types(cfg)


_INT_FIELDS = ("n", "leaves", "seed", "max_steps", "trials", "workers")
_FLOAT_FIELDS = ("p", "eps", "tol", "prob")


def _coerce_types(cfg: dict) -> dict:
    for key in _INT_FIELDS:
        if cfg.get(key) is not None:
            try:
                cfg[key] = int(cfg[key])
            except (TypeError, ValueError):
                raise ValueError(f"field {key!r} must be an integer, "
                                 f"got {cfg[key]!r}") from None
    for key in _FLOAT_FIELDS:
        if cfg.get(key) is not None:
            try:
                cfg[key] = float(cfg[key])
            except (TypeError, ValueError):
                raise ValueError(f"field {key!r} must be a number, "
                                 f"got {cfg[key]!r}") from None
    for key in ("graph", "out", "suite", "schedule", "kind"):
        if cfg.get(key) is not None and not isinstance(cfg[key], str):
            raise ValueError(f"field {key!r} must be a string, got {cfg[key]!r}")
    if cfg.get("boundary") is not None and not isinstance(cfg["boundary"],
                                                          (str, list, tuple)):
        raise ValueError("field 'boundary' must be a string or id list")
    return cfg


def _require(cfg: dict, *keys):
    for key in keys:
        if cfg.get(key) is None:
            raise ValueError(f"missing required field {key!r}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_gen(cfg: dict) -> int:
    _require(cfg, "kind", "out")
    boundary = _parse_id_list(cfg["boundary"]) if cfg["boundary"] else None
    graph, f0 = generate(cfg["kind"], n=cfg["n"], leaves=cfg["leaves"],
                         prob=cfg["prob"],
                         seed=cfg["seed"] if cfg["kind"] == "erdos_renyi" else None,
                         boundary=boundary)
    outputs = [cfg["out"]]
    _atomic_write(cfg["out"], serialize_graph(graph))
    if f0 is not None:
        f0_path = cfg["out"] + ".f0"
        _atomic_write(f0_path, serialize_profile(f0))
        outputs.append(f0_path)
    rep = validate(graph)
    _emit({"command": "gen", "config": cfg, "outputs": outputs,
           "n": graph.n, "m": graph.m, "n_star": graph.n_star,
           "valid": rep.all_pass})
    return 0


def _cmd_solve(cfg: dict) -> int:
    _require(cfg, "graph", "boundary", "p", "out")
    graph = _load_graph(cfg["graph"])
    p = validate_p(cfg["p"])
    f0 = _load_initial_profile(cfg["boundary"], graph)
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-8
    res = p_harmonic_extension(graph, f0, p, tol=tol)
    _atomic_write(cfg["out"], serialize_profile(res.h))
    diag = {"cert_gap": res.cert_gap, "residual": res.residual,
            "sweeps": res.sweeps}
    diag_path = cfg["out"] + ".json"
    _atomic_write(diag_path, json.dumps(diag, sort_keys=True) + "\n")
    _emit({"command": "solve", "config": cfg,
           "outputs": [cfg["out"], diag_path], **diag})
    return 0


def _cmd_run(cfg: dict) -> int:
    _require(cfg, "graph", "boundary", "p", "eps")
    graph = _load_graph(cfg["graph"])
    p = validate_p(cfg["p"])
    f0 = _load_initial_profile(cfg["boundary"], graph)
    eps = float(cfg["eps"])
    tol = cfg["tol"] if cfg["tol"] is not None else eps / 10.0
    h = p_harmonic_extension(graph, f0, p, tol=min(tol, eps / 10.0)).h
    schedule = _parse_schedule(cfg["schedule"], cfg["seed"])
    state = make_state(graph, f0, p, schedule)
    trace = bool(cfg["out"])
    rows = []
    sup = float(np.max(np.abs(state.f - h)))
    censored = False
    while sup > eps:
        if state.t >= cfg["max_steps"]:
            censored = True
            break
        step(graph, state, schedule)
        sup = float(np.max(np.abs(state.f - h)))
        if trace:
            rows.append((state.t,
                         -1 if state.last_vertex is None else state.last_vertex,
                         sup, analysis.energy(graph, state.f, p)))
    outputs = []
    if cfg["out"]:
        lines = ["t,v,sup_error,energy"]
        lines += [f"{t},{v},{s!r},{e!r}" for t, v, s, e in rows]
        _atomic_write(cfg["out"], "\n".join(lines) + "\n")
        outputs.append(cfg["out"])
    _emit({"command": "run", "config": cfg, "outputs": outputs,
           "steps": state.t, "censored": censored, "sup_error": sup})
    return 0


def _cmd_tau(cfg: dict) -> int:
    _require(cfg, "graph", "boundary", "p", "eps", "trials", "out")
    graph = _load_graph(cfg["graph"])
    p = validate_p(cfg["p"])
    f0 = _load_initial_profile(cfg["boundary"], graph)
    eps = float(cfg["eps"])
    est = estimate_expected_tau(graph, f0, p, eps, int(cfg["trials"]),
                                int(cfg["seed"]),
                                max_steps=int(cfg["max_steps"]),
                                workers=_worker_count(cfg))
    json_path = cfg["out"] + ".json"
    csv_path = cfg["out"] + ".csv"
    _atomic_write(json_path, json.dumps(est.to_json(), sort_keys=True) + "\n")
    lines = ["trial,tau,censored"]
    lines += [f"{i},{t},{int(c)}"
              for i, (t, c) in enumerate(zip(est.taus, est.censored_flags))]
    _atomic_write(csv_path, "\n".join(lines) + "\n")
    _emit({"command": "tau", "config": cfg,
           "outputs": [json_path, csv_path], **est.to_json()})
    return 0


def _cmd_spectral(cfg: dict) -> int:
    _require(cfg, "graph")
    graph = _load_graph(cfg["graph"])
    spec = analysis.spectral_gamma(graph)
    hit = analysis.hitting_times(graph)
    payload = {
        "lambda": spec.lam, "gamma": spec.gamma,
        "power_iters": spec.power_iters,
        "rayleigh_residual": spec.rayleigh_residual,
        "eigvec": [float(x) for x in spec.eigvec],
        "hitting_times": [float(x) for x in hit.times],
        "t_max": hit.t_max,
    }
    outputs = []
    if cfg["out"]:
        _atomic_write(cfg["out"], json.dumps(payload, sort_keys=True) + "\n")
        outputs.append(cfg["out"])
    _emit({"command": "spectral", "config": cfg, "outputs": outputs,
           "lambda": spec.lam, "gamma": spec.gamma, "t_max": hit.t_max})
    return 0


def _cmd_verify(cfg: dict) -> int:
    _require(cfg, "suite")
    fn = suites.SUITES.get(cfg["suite"])
    if fn is None:
        raise ValueError(f"unknown suite {cfg['suite']!r}; "
                         f"available: {sorted(suites.SUITES)}")
    params = inspect.signature(fn).parameters
    kwargs = {}
    for src, dst in (("n", "n"), ("trials", "trials"), ("seed", "seed"),
                     ("eps", "epsilon"), ("workers", "workers"),
                     ("trials", "samples"), ("trials", "count"),
                     ("n", "n_max")):
        if cfg.get(src) is not None and dst in params and dst not in kwargs:
            kwargs[dst] = cfg[src]
    result = fn(**kwargs)
    outputs = []
    if cfg["out"]:
        _atomic_write(cfg["out"], json.dumps(result.to_json(), sort_keys=True) + "\n")
        outputs.append(cfg["out"])
        k = 0
        for rep in result.reports:
            for inst in rep.violating_instances:
                path = f"{cfg['out']}.violation-{k}.json"
                _atomic_write(path, json.dumps(
                    {"report": rep.name, "instance": inst}, sort_keys=True) + "\n")
                outputs.append(path)
                k += 1
    _emit({"command": "verify", "config": cfg, "outputs": outputs,
           "suite": result.name, "ok": result.ok,
           "violations": sum(r.violations for r in result.reports),
           "summary": result.summary})
    return 0 if result.ok else 1


def _cmd_scaling(cfg: dict) -> int:
    sizes = tuple(_parse_id_list(str(cfg["sizes"])))
    kwargs = {"sizes": sizes}
    if cfg["eps"] is not None:
        kwargs["epsilon"] = float(cfg["eps"])
    if cfg["trials"] is not None:
        kwargs["trials"] = int(cfg["trials"])
    kwargs["seed"] = int(cfg["seed"])
    kwargs["workers"] = _worker_count(cfg)
    result = suites.suite_scaling(**kwargs)
    rows = result.summary["rows"]
    outputs = []
    if cfg["out"]:
        csv_path = cfg["out"] + ".csv"
        lines = ["n,mean,stderr,censored"]
        lines += [f"{r['n']},{r['mean']!r},{r['stderr']!r},{r['censored']}"
                  for r in rows]
        _atomic_write(csv_path, "\n".join(lines) + "\n")
        json_path = cfg["out"] + ".json"
        _atomic_write(json_path, json.dumps(result.to_json(), sort_keys=True) + "\n")
        outputs = [csv_path, json_path]
    _emit({"command": "scaling", "config": cfg, "outputs": outputs,
           "slope": result.summary["slope"], "ok": result.ok})
    return 0 if result.ok else 1


_COMMANDS = {
    "gen": _cmd_gen, "solve": _cmd_solve, "run": _cmd_run, "tau": _cmd_tau,
    "spectral": _cmd_spectral, "verify": _cmd_verify, "scaling": _cmd_scaling,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lprelax",
        description="lp-relaxation dynamics on graphs with boundary")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **flags):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config; flags override it")
        for flag, (typ, hlp) in flags.items():
            sp.add_argument(f"--{flag.replace('_', '-')}", dest=flag,
                            type=typ, help=hlp)
        return sp

    add("gen", kind=(str, "path|cycle|complete|star|erdos_renyi|k4_lower_bound"),
        n=(int, "vertex count"), leaves=(int, "star leaves"),
        prob=(float, "edge probability"), seed=(int, "generator seed"),
        boundary=(str, "comma-separated boundary ids"),
        out=(str, "graph file to write"))
    add("solve", graph=(str, "graph file"),
        boundary=(str, "profile file or inline v=x,..."),
        p=(float, "exponent"), tol=(float, "certificate tolerance"),
        out=(str, "extension profile to write"))
    add("run", graph=(str, "graph file"),
        boundary=(str, "initial profile file or inline boundary"),
        p=(float, "exponent"), eps=(float, "stopping threshold"),
        schedule=(str, "uniform|cyclic|sync|script:<file>"),
        seed=(int, "seed for the uniform schedule"),
        max_steps=(int, "step budget"), tol=(float, "solver tolerance"),
        out=(str, "trajectory CSV"))
    add("tau", graph=(str, "graph file"),
        boundary=(str, "initial profile file or inline boundary"),
        p=(float, "exponent"), eps=(float, "threshold"),
        trials=(int, "Monte-Carlo trials"), seed=(int, "master seed"),
        max_steps=(int, "per-trial cap"), tol=(float, "solver tolerance"),
        workers=(int, "parallel workers (results identical)"),
        out=(str, "output prefix (.json/.csv)"))
    add("spectral", graph=(str, "graph file"), out=(str, "report JSON"))
    add("verify", suite=(str, f"one of {sorted(suites.SUITES)}"),
        n=(int, "instance size override"), eps=(float, "threshold override"),
        trials=(int, "trial/sample/count override"), seed=(int, "seed override"),
        workers=(int, "parallel workers"), out=(str, "report JSON"))
    add("scaling", sizes=(str, "comma-separated sizes"),
        eps=(float, "threshold"), trials=(int, "trials per size"),
        seed=(int, "master seed"), workers=(int, "parallel workers"),
        out=(str, "output prefix (.csv/.json)"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if not e.code else 2
    try:
        cfg = _resolve_config(args.command, args)
        return _COMMANDS[args.command](cfg)
    except NonConvergence as e:
        sys.stderr.write(f"error: non-convergence: {e}\n")
        return 3
    except analysis.NonConvergence as e:
        sys.stderr.write(f"error: non-convergence: {e}\n")
        return 3
    except (GraphFormatError, InvalidBoundary, ValueError, KeyError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
