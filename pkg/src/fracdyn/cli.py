"""Reproduction front-end: declarative experiment configs in, CSV/JSON out.

Each run takes a JSON config (one experiment per file, discriminated by a
``command`` key), validates it against a schema, executes the corresponding
pipeline, and writes CSV artifacts whose comment header records the config
digest, artifact version, and column schema.  Identical config and seed
produce byte-identical output, regardless of ``--threads``.

Exit codes: 0 success, 2 config error, 3 numerical-accuracy failure,
4 non-convergence (fit).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np

from . import __version__
from .errors import (AccuracyError, DomainError, NonConvergenceError,
                     NumericalInstabilityError, ValidationError)
from .fitting import FitWindow, fit_fractional
from .fracsolve import fam_solve, fam_solve_soe, ml_propagate
from .kernels import soe_compress
from .lindblad import (DensityMatrix, GKSLGenerator, density_from_json,
                       dephasing_qubit, generator_from_json, plus_state)
from .spinboson import (AsymptoticRegime, BathSpec, asymptotic_Q,
                        dephasing_Q, exact_coherence, markov_coherence,
                        markov_fit_rate, tcl_coherence)
from .subordination import (divisibility_defect, subordinated_propagate,
                            trajectory_estimate)

__all__ = ["main"]

_OUT_DIR_ENV = "FRACDYN_OUT_DIR"

_OBSERVABLES = {
    "sigma_x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "sigma_y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "sigma_z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

_REGIMES = {
    "short_time": AsymptoticRegime.ShortTime,
    "sub_ohmic": AsymptoticRegime.SubOhmic,
    "ohmic": AsymptoticRegime.Ohmic,
    "super_ohmic": AsymptoticRegime.SuperOhmic,
}


class ConfigError(Exception):
    """Configuration rejected before execution (exit code 2)."""


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

_BATH_SCHEMA = {
    "type": "object",
    "properties": {
        "eta": {"type": "number", "exclusiveMinimum": 0},
        "chi": {"type": "number", "exclusiveMinimum": 0},
        "omega_c": {"type": "number", "exclusiveMinimum": 0},
        "beta": {
            "oneOf": [{"type": "number", "exclusiveMinimum": 0},
                      {"const": "inf"}],
        },
    },
    "required": ["eta", "chi"],
    "additionalProperties": False,
}

_GRID_SCHEMA = {
    "type": "object",
    "properties": {
        "t_min": {"type": "number", "minimum": 0},
        "t_max": {"type": "number", "exclusiveMinimum": 0},
        "n_points": {"type": "integer", "minimum": 1},
        "spacing": {"enum": ["linear", "log"]},
    },
    "required": ["t_min", "t_max", "n_points"],
    "additionalProperties": False,
}

_WINDOW_SCHEMA = {
    "type": "object",
    "properties": {
        "t_start": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["t_start", "t_end"],
    "additionalProperties": False,
}

_SCHEMAS = {
    "exact": {
        "type": "object",
        "properties": {
            "command": {"const": "exact"},
            "bath": _BATH_SCHEMA,
            "grid": _GRID_SCHEMA,
            "regime": {"enum": sorted(_REGIMES)},
        },
        "required": ["command", "bath", "grid", "regime"],
        "additionalProperties": False,
    },
    "markov": {
        "type": "object",
        "properties": {
            "command": {"const": "markov"},
            "bath": _BATH_SCHEMA,
            "grid": _GRID_SCHEMA,
            "window": _WINDOW_SCHEMA,
            "epsilon": {"type": "number"},
        },
        "required": ["command", "bath", "grid", "window"],
        "additionalProperties": False,
    },
    "fracfit": {
        "type": "object",
        "properties": {
            "command": {"const": "fracfit"},
            "bath": _BATH_SCHEMA,
            "grid": _GRID_SCHEMA,
            "window": _WINDOW_SCHEMA,
            "epsilon": {"type": "number"},
            "plateau": {
                "oneOf": [{"type": "number", "minimum": 0,
                           "exclusiveMaximum": 1},
                          {"const": "auto"}, {"type": "null"}],
            },
        },
        "required": ["command", "bath", "grid", "window"],
        "additionalProperties": False,
    },
    "subordinate": {
        "type": "object",
        "properties": {
            "command": {"const": "subordinate"},
            "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            "gamma": {"type": "number", "exclusiveMinimum": 0},
            "epsilon": {"type": "number"},
            "grid": _GRID_SCHEMA,
            "n_samples": {"type": "integer", "minimum": 2},
            "seed": {"type": "integer", "minimum": 0},
            "observable": {"enum": sorted(_OBSERVABLES)},
            "divisibility": {
                "type": "object",
                "properties": {
                    "lam": {"type": "number", "exclusiveMinimum": 0},
                    "tau_fraction": {"type": "number", "exclusiveMinimum": 0,
                                     "exclusiveMaximum": 1},
                },
                "required": ["lam"],
                "additionalProperties": False,
            },
        },
        "required": ["command", "alpha", "grid", "n_samples"],
        "additionalProperties": False,
    },
    "solve": {
        "type": "object",
        "properties": {
            "command": {"const": "solve"},
            "generator": {"type": "object"},
            "init": {"type": "object"},
            "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            "h": {"type": "number", "exclusiveMinimum": 0},
            "n_steps": {"type": "integer", "minimum": 1},
            "scheme": {"enum": ["standard_dff", "paper_printed"]},
            "history": {"enum": ["dense", "soe"]},
            "soe_tol": {"type": "number", "exclusiveMinimum": 0},
            "mode": {"enum": ["trajectory", "convergence"]},
            "horizon": {"type": "number", "exclusiveMinimum": 0},
            "h_values": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 2,
            },
        },
        "required": ["command", "generator", "alpha"],
        "additionalProperties": False,
    },
}

_DEFAULTS = {
    "exact": {},
    "markov": {"epsilon": 0.0},
    "fracfit": {"epsilon": 0.0, "plateau": None},
    "subordinate": {"gamma": 1.0, "epsilon": 0.0, "seed": 0,
                    "observable": "sigma_x"},
    "solve": {"scheme": "standard_dff", "history": "dense", "soe_tol": 1e-8,
              "mode": "trajectory", "horizon": 1.0},
}


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    command = doc.get("command")
    if command not in _SCHEMAS:
        raise ConfigError(
            f"$.command: must be one of {sorted(_SCHEMAS)}, got {command!r}"
        )
    validator = jsonschema.Draft202012Validator(_SCHEMAS[command])
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigError(f"{err.json_path}: {err.message}")
    effective = dict(_DEFAULTS[command])
    effective.update(doc)
    if "divisibility" in effective:
        block = dict(effective["divisibility"])
        block.setdefault("tau_fraction", 0.5)
        effective["divisibility"] = block
    return effective


def _config_digest(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _build_bath(cfg: dict) -> BathSpec:
    beta = cfg.get("beta", "inf")
    return BathSpec(eta=cfg["eta"], chi=cfg["chi"],
                    omega_c=cfg.get("omega_c", 1.0),
                    beta=math.inf if beta == "inf" else float(beta))


def _build_grid(cfg: dict) -> np.ndarray:
    t_min, t_max = float(cfg["t_min"]), float(cfg["t_max"])
    n = int(cfg["n_points"])
    spacing = cfg.get("spacing", "linear")
    if not t_max > t_min:
        raise ConfigError("$.grid: t_max must exceed t_min")
    if spacing == "log":
        if t_min <= 0.0:
            raise ConfigError("$.grid: log spacing requires t_min > 0")
        return np.geomspace(t_min, t_max, n)
    return np.linspace(t_min, t_max, n)


def _resolve_out(out: str) -> Path:
    path = Path(out)
    override = os.environ.get(_OUT_DIR_ENV)
    if override and not path.is_absolute():
        path = Path(override) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _emit_csv(path: Path, digest: str, columns: Sequence[str], rows,
              extra_comments: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_digest: {digest}\n")
        fh.write(f"# artifact: fracdyn {__version__}\n")
        for comment in extra_comments:
            fh.write(f"# {comment}\n")
        fh.write(f"# columns: {','.join(columns)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_exact(config: dict, out: Path, digest: str) -> int:
    bath = _build_bath(config["bath"])
    grid = _build_grid(config["grid"])
    regime = _REGIMES[config["regime"]]
    q = np.array([dephasing_Q(bath, t) for t in grid])
    q_asym = np.empty_like(q)
    for i, t in enumerate(grid):
        if t == 0.0:
            if regime in (AsymptoticRegime.Ohmic, AsymptoticRegime.SuperOhmic):
                raise ConfigError(
                    "$.grid: t=0 is outside this regime's asymptote; "
                    "use t_min > 0"
                )
            q_asym[i] = 0.0
        else:
            q_asym[i] = asymptotic_Q(bath, float(t), regime)
    denom = float(np.dot(q_asym, q_asym))
    prefactor = float(np.dot(q, q_asym) / denom) if denom > 0.0 else 1.0
    rows = [(t, q[i], math.exp(-q[i]), prefactor * q_asym[i],
             math.exp(-prefactor * q_asym[i])) for i, t in enumerate(grid)]
    _emit_csv(out, digest, ["t", "Q", "absu", "Q_asym", "absu_asym"], rows,
              extra_comments=[f"amplitude_prefactor: {prefactor!r}"])
    return 0


def _cmd_markov(config: dict, out: Path, digest: str) -> int:
    bath = _build_bath(config["bath"])
    grid = _build_grid(config["grid"])
    epsilon = float(config["epsilon"])
    window = (config["window"]["t_start"], config["window"]["t_end"])
    exact = exact_coherence(bath, epsilon, grid)
    gamma = markov_fit_rate(exact, window)
    markov = markov_coherence(gamma, epsilon, grid)
    tcl = tcl_coherence(bath, epsilon, grid)
    abs_exact = np.abs(exact.values)
    abs_markov = np.abs(markov.values)
    abs_tcl = np.abs(tcl.values)
    rows = [
        (t, exact.values[i].real, exact.values[i].imag, abs_exact[i],
         abs_markov[i], abs_tcl[i], abs(abs_markov[i] - abs_exact[i]),
         abs(abs_tcl[i] - abs_exact[i]))
        for i, t in enumerate(grid)
    ]
    _emit_csv(out, digest,
              ["t", "re_u_exact", "im_u_exact", "abs_u_exact",
               "abs_u_markov", "abs_u_tcl", "dev_markov", "dev_tcl"],
              rows, extra_comments=[f"gamma: {gamma!r}"])
    return 0


def _cmd_fracfit(config: dict, out: Path, digest: str) -> int:
    bath = _build_bath(config["bath"])
    grid = _build_grid(config["grid"])
    epsilon = float(config["epsilon"])
    window = FitWindow(config["window"]["t_start"], config["window"]["t_end"])
    plateau = config["plateau"]
    exact = exact_coherence(bath, epsilon, grid)
    result = fit_fractional(exact, window, plateau=plateau, bath=bath)
    model = result.model(grid)
    abs_exact = np.abs(exact.values)
    rows = [(t, abs_exact[i], model[i], abs(model[i] - abs_exact[i]))
            for i, t in enumerate(grid)]
    _emit_csv(out, digest,
              ["t", "abs_u_exact", "abs_u_fit", "deviation"], rows)
    json_path = out.with_suffix(".json")
    with open(json_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(result.to_json())
        fh.write("\n")
    if not result.converged:
        print("fracfit: optimizer did not converge; best-so-far written",
              file=sys.stderr)
        return 4
    return 0


def _cmd_subordinate(config: dict, out: Path, digest: str,
                     threads: int) -> int:
    alpha = float(config["alpha"])
    gen = dephasing_qubit(float(config["epsilon"]), float(config["gamma"]))
    init = plus_state()
    obs = _OBSERVABLES[config["observable"]]
    grid = _build_grid(config["grid"])
    n_samples = int(config["n_samples"])
    seed = int(config["seed"])
    obs0 = float(np.real(np.trace(obs @ init.entries)))

    def compute_row(i: int):
        t = float(grid[i])
        if t == 0.0:
            return (t, obs0, obs0, obs0, 0.0, n_samples, seed)
        rho_quad = subordinated_propagate(gen, alpha, t, init)
        quad = float(np.real(np.trace(obs @ rho_quad.entries)))
        rho_ml = ml_propagate(gen, alpha, t, init)
        ml = float(np.real(np.trace(obs @ rho_ml.entries)))
        if alpha == 1.0:
            # Degenerate clock u = t: every trajectory yields the
            # semigroup value, so the estimator is exact with zero spread.
            return (t, quad, ml, ml, 0.0, n_samples, seed + i)
        est = trajectory_estimate(gen, alpha, t, init, obs, n_samples,
                                  seed + i)
        return (t, quad, ml, est.mean, est.stderr, n_samples, seed + i)

    # Per-trajectory seeding makes each row a pure function of (config,
    # seed, row index): thread count cannot change the output bytes.
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(compute_row, range(grid.size)))
    _emit_csv(out, digest,
              ["t", "obs_quad", "obs_ml", "mc_mean", "mc_stderr",
               "n_samples", "seed"], rows)

    if "divisibility" in config:
        block = config["divisibility"]
        lam = float(block["lam"])
        frac = float(block["tau_fraction"])
        div_rows = [(t, divisibility_defect(alpha, lam, float(t),
                                            frac * float(t)))
                    for t in grid if t > 0.0]
        div_path = out.with_name(out.stem + "_divisibility" + out.suffix)
        _emit_csv(div_path, digest, ["t", "defect"], div_rows,
                  extra_comments=[f"lam: {lam!r}",
                                  f"tau_fraction: {frac!r}"])
    return 0


def _solve_init(config: dict, gen: GKSLGenerator) -> DensityMatrix:
    if "init" in config:
        return density_from_json(config["init"])
    if gen.dim == 2:
        return plus_state()
    raise ConfigError("$.init: required when the generator dimension is not 2")


def _cmd_solve(config: dict, out: Path, digest: str) -> int:
    gen = generator_from_json(config["generator"])
    init = _solve_init(config, gen)
    alpha = float(config["alpha"])
    mode = config["mode"]

    if mode == "convergence":
        if "h_values" not in config:
            raise ConfigError("$.h_values: required in convergence mode")
        horizon = float(config["horizon"])
        reference = ml_propagate(gen, alpha, horizon, init).entries
        errors = []
        for h in config["h_values"]:
            n = max(1, int(round(horizon / float(h))))
            h_eff = horizon / n
            traj = fam_solve(gen, alpha, h_eff, n, init,
                             scheme=config["scheme"])
            err = float(np.max(np.abs(traj.final().entries - reference)))
            errors.append((h_eff, err))
        rows = []
        for i, (h_eff, err) in enumerate(errors):
            if i == 0:
                rows.append((h_eff, err, ""))
            else:
                h_prev, e_prev = errors[i - 1]
                order = math.log(e_prev / err) / math.log(h_prev / h_eff)
                rows.append((h_eff, err, order))
        _emit_csv(out, digest, ["h", "error", "order"], rows,
                  extra_comments=[f"horizon: {horizon!r}"])
        return 0

    if "h" not in config or "n_steps" not in config:
        raise ConfigError("$.h and $.n_steps: required in trajectory mode")
    h, n_steps = float(config["h"]), int(config["n_steps"])
    if config["history"] == "soe":
        kernel = soe_compress(alpha, h, h * n_steps, float(config["soe_tol"]))
        traj = fam_solve_soe(gen, alpha, h, n_steps, init, kernel,
                             scheme=config["scheme"])
    else:
        traj = fam_solve(gen, alpha, h, n_steps, init,
                         scheme=config["scheme"])
    dim = gen.dim
    columns = ["t"]
    for r in range(dim):
        for c in range(dim):
            columns += [f"re_{r}{c}", f"im_{r}{c}"]
    rows = []
    for t, state in zip(traj.times(), traj.states):
        row = [float(t)]
        for entry in state.entries.reshape(-1):
            row += [entry.real, entry.imag]
        rows.append(tuple(row))
    _emit_csv(out, digest, columns, rows)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracdyn",
        description="Fractional open-quantum-dynamics reproduction runner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("exact", "exact dephasing curve with asymptote columns"),
        ("markov", "constant-rate fit vs time-local vs exact curves"),
        ("fracfit", "fractional (alpha, lambda) fit artifacts"),
        ("subordinate", "subordination validation: quadrature/ML/Monte-Carlo"),
        ("solve", "fractional Adams-Moulton run on a generator JSON"),
    ]:
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True,
                         help="path to the experiment JSON")
        cmd.add_argument("--out", required=True,
                         help=f"output CSV path (${_OUT_DIR_ENV} prefixes "
                              "relative paths)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the config seed (subordinate only)")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker threads for the Monte-Carlo rows")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        if config["command"] != args.command:
            raise ConfigError(
                f"$.command: config says {config['command']!r} but the "
                f"{args.command!r} subcommand was invoked"
            )
        if args.seed is not None:
            if config["command"] != "subordinate":
                raise ConfigError("--seed applies to subordinate runs only")
            config["seed"] = int(args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        digest = _config_digest(config)
        out = _resolve_out(args.out)
        if config["command"] == "exact":
            return _cmd_exact(config, out, digest)
        if config["command"] == "markov":
            return _cmd_markov(config, out, digest)
        if config["command"] == "fracfit":
            return _cmd_fracfit(config, out, digest)
        if config["command"] == "subordinate":
            return _cmd_subordinate(config, out, digest, args.threads)
        return _cmd_solve(config, out, digest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (AccuracyError, NumericalInstabilityError) as exc:
        print(f"numerical-accuracy failure: {exc}", file=sys.stderr)
        return 3
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
