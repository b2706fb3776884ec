"""``loewner-ito`` command-line front end.

    loewner-ito <command> [--config cfg.json] [--set key=value ...] [--out DIR]

The config is one JSON document; ``--set`` applies dotted-path overrides
whose values are parsed as JSON when possible (``--set grid.n_steps=512``,
``--set kappa=[1,0.5]``).  Precedence: defaults < config file <
$LOEWNER_ITO_SEED (seed only) < --set.

Exit status: 0 success, 1 invalid configuration or failed validation,
2 runtime or domain error.
"""
from __future__ import annotations

import argparse
import copy
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import admissibility, generator, herglotz, ito, tau
from .errors import InvariantError, LoewnerItoError
from .flow import integrate_classical_batch, integrate_randomized_batch
from .parallel import map_ordered
from .paths import TimeGrid, generate_ensemble

SEED_ENV = "LOEWNER_ITO_SEED"
CHUNK = 64

_COMMON = {"seed": 0, "workers": 1}

DEFAULTS = {
    "simulate": {
        "mode": "classical",
        "herglotz": {"variant": "constant", "value": 1.0},
        "tau": {"variant": "exponential", "kappa": [1.0]},
        "initial_points": [0.5],
        "grid": {"t_end": 1.0, "n_steps": 1000},
        "scheme": None,
        "n_paths": 1,
        "dump_increments": False,
    },
    "sde": {
        "kappa": [1.0],
        "herglotz": {"variant": "constant", "value": 1.0},
        "initial_points": [0.0],
        "grid": {"t_end": 1.0, "n_steps": 1000},
        "n_paths": 10,
        "dump_increments": False,
    },
    "verify-transform": {
        "kappa": [1.0, 0.5],
        "herglotz": {"variant": "atomic", "atoms": [[0.0, 1.0]]},
        "z": 0.0,
        "grid": {"t_end": 0.5, "n_steps": 256},
        "n_paths": 100,
        "n_levels": 5,
        "scheme": "euler",
    },
    "generator": {
        "kappa": [2.0],
        "herglotz": {"variant": "constant", "value": 1.0},
        "z": 0.5,
        "coefficients": [0.0, 0.0, 1.0],
        "h": generator.DEFAULT_H,
        "substeps": generator.DEFAULT_SUBSTEPS,
        "n_samples": 100_000,
    },
    "classify": {
        "tau": {"variant": "exponential", "kappa": [2.0, -1.0]},
        "grid": None,
        "tol": None,
        "method": "analytic",
        "fd_step": 1e-4,
        "fiber": {"psi0": 0.5, "herglotz": {"variant": "constant", "value": 1.0}, "y_grid": None},
    },
    "validate-herglotz": {
        "herglotz": {"variant": "constant", "value": 1.0},
        "radii": list(herglotz.DEFAULT_RADII),
        "n_angles": herglotz.DEFAULT_N_ANGLES,
    },
}

COMMANDS = tuple(DEFAULTS)


class ConfigError(Exception):
    def __init__(self, key, message):
        super().__init__(message)
        self.key = key
        self.message = message


# -- config handling ---------------------------------------------------------

def _merge(base: dict, override: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        key = f"{prefix}{k}"
        if k not in base:
            raise ConfigError(key, f"unknown config key {key!r}")
        if isinstance(base[k], dict) and isinstance(v, dict) and k not in ("herglotz", "tau"):
            out[k] = _merge(base[k], v, key + ".")
        else:
            out[k] = copy.deepcopy(v)
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _set_dotted(cfg: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = cfg
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def resolve_config(command: str, text=None, overrides=(), env=None) -> dict:
    """Defaults, then file contents, then env seed, then --set overrides."""
    env = os.environ if env is None else env
    base = {**_COMMON, **DEFAULTS[command]}
    user = {}
    if text is not None:
        user = json.loads(text)
        if not isinstance(user, dict):
            raise ConfigError(None, "config must be a JSON object")
    if SEED_ENV in env:
        try:
            user["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError("seed", f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        _set_dotted(user, key.strip(), _parse_value(raw))
    return _merge(base, user)


def _complex(value, key: str) -> complex:
    try:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, str):
            return complex(value.replace(" ", ""))
        if isinstance(value, bool):
            raise ValueError
        return complex(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"{key}: cannot read {value!r} as a complex number")


def _disk_point(value, key: str) -> complex:
    z = _complex(value, key)
    if not abs(z) < 1:
        raise ConfigError(key, f"{key}: point {z} is not inside the unit disk")
    return z


def _int(cfg, key, minimum=1) -> int:
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(key, f"{key} must be an integer >= {minimum}, got {v!r}")
    return v


def _kappa(value, key="kappa") -> tuple:
    if not isinstance(value, list) or not value or not all(
            isinstance(k, (int, float)) and not isinstance(k, bool) for k in value):
        raise ConfigError(key, f"{key} must be a nonempty list of reals")
    return tuple(float(k) for k in value)


def _wrap(key, fn, *args):
    try:
        return fn(*args)
    except (InvariantError, LoewnerItoError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(key, f"{key}: {exc}")


def _grid(cfg) -> TimeGrid:
    g = cfg["grid"]
    if not isinstance(g, dict):
        raise ConfigError("grid", "grid must be an object {t_end, n_steps}")
    return _wrap("grid", lambda: TimeGrid(float(g["t_end"]), g["n_steps"]))


# -- commands ----------------------------------------------------------------

def _trajectory_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("path_id,t,re,im,exited\n")
    for path_id, tr in rows:
        times = tr.times
        last = len(tr.states) - 1
        for j, (t, s) in enumerate(zip(times, tr.states)):
            exited = int(tr.exit is not None and j == last)
            buf.write(f"{path_id},{t:.17g},{s.real:.17g},{s.imag:.17g},{exited}\n")
    return buf.getvalue()


def _summary(trajectories) -> dict:
    return {"n_trajectories": len(trajectories),
            "n_exited": sum(tr.exit is not None for tr in trajectories)}


def _run_simulate(cfg):
    mode = cfg["mode"]
    if mode not in ("classical", "randomized"):
        raise ConfigError("mode", f"mode must be 'classical' or 'randomized', got {mode!r}")
    p = _wrap("herglotz", herglotz.from_json, cfg["herglotz"])
    grid = _grid(cfg)
    zs = [_disk_point(z, f"initial_points.{i}") for i, z in enumerate(cfg["initial_points"])]
    if not zs:
        raise ConfigError("initial_points", "initial_points must not be empty")
    scheme = cfg["scheme"] or ("rk4" if mode == "classical" else "euler")
    allowed = ("euler", "heun", "rk4") if mode == "classical" else ("euler", "heun")
    if scheme not in allowed:
        raise ConfigError("scheme", f"scheme for {mode} flow must be one of {allowed}, got {scheme!r}")
    files = {}
    if mode == "classical":
        def work():
            return list(enumerate(integrate_classical_batch(zs, p, grid, scheme)))
        return work, files
    d = _wrap("tau", tau.from_json, cfg["tau"])
    n_paths = _int(cfg, "n_paths")

    def work():
        ens = generate_ensemble(d.n_dims, grid, n_paths, cfg["seed"])
        if cfg["dump_increments"]:
            files["increments.bin"] = ens.to_bytes()
        rows = []
        for i, z in enumerate(zs):
            chunks = [slice(s, min(s + CHUNK, n_paths)) for s in range(0, n_paths, CHUNK)]
            parts = map_ordered(
                lambda sl: integrate_randomized_batch(z, p, d, ens.values[sl], grid, scheme),
                chunks, cfg["workers"])
            rows += [(i * n_paths + k, tr) for k, tr in enumerate(t for part in parts for t in part)]
        return rows
    return work, files


def _run_sde(cfg):
    kappa = _kappa(cfg["kappa"])
    p = _wrap("herglotz", herglotz.from_json, cfg["herglotz"])
    grid = _grid(cfg)
    zs = [_disk_point(z, f"initial_points.{i}") for i, z in enumerate(cfg["initial_points"])]
    if not zs:
        raise ConfigError("initial_points", "initial_points must not be empty")
    n_paths = _int(cfg, "n_paths")
    files = {}

    def work():
        ens = generate_ensemble(len(kappa), grid, n_paths, cfg["seed"])
        if cfg["dump_increments"]:
            files["increments.bin"] = ens.to_bytes()
        rows = []
        for i, z in enumerate(zs):
            chunks = [slice(s, min(s + CHUNK, n_paths)) for s in range(0, n_paths, CHUNK)]
            parts = map_ordered(
                lambda sl: ito.integrate_sde_batch(z, kappa, p, ens.increments[sl], grid),
                chunks, cfg["workers"])
            rows += [(i * n_paths + k, tr) for k, tr in enumerate(t for part in parts for t in part)]
        return rows
    return work, files


def _run_verify(cfg):
    kappa = _kappa(cfg["kappa"])
    p = _wrap("herglotz", herglotz.from_json, cfg["herglotz"])
    z = _disk_point(cfg["z"], "z")
    grid = _grid(cfg)
    n_paths = _int(cfg, "n_paths")
    n_levels = _int(cfg, "n_levels")
    if cfg["scheme"] not in ("euler", "heun"):
        raise ConfigError("scheme", f"scheme must be 'euler' or 'heun', got {cfg['scheme']!r}")

    def work():
        ens = generate_ensemble(len(kappa), grid, n_paths, cfg["seed"])
        return ito.verify_transform(z, kappa, p, ens, n_levels, cfg["scheme"],
                                    workers=cfg["workers"]).to_dict()
    return work


def _run_generator(cfg):
    kappa = _kappa(cfg["kappa"])
    p = _wrap("herglotz", herglotz.from_json, cfg["herglotz"])
    z = _disk_point(cfg["z"], "z")
    coefs = cfg["coefficients"]
    if not isinstance(coefs, list) or not coefs:
        raise ConfigError("coefficients", "coefficients must be a nonempty list")
    f = generator.PolynomialTestFunction(
        tuple(_complex(c, f"coefficients.{i}") for i, c in enumerate(coefs)))
    h = cfg["h"]
    if not isinstance(h, (int, float)) or not 0 < h <= 1e-2:
        raise ConfigError("h", f"h must lie in (0, 1e-2], got {h!r}")
    n_samples = _int(cfg, "n_samples", 2)
    substeps = _int(cfg, "substeps")

    def work():
        return generator.estimate_generator_mc(f, z, kappa, p, float(h), n_samples, cfg["seed"],
                                               substeps, workers=cfg["workers"]).to_dict()
    return work


def _points(value, key, n_dims):
    if value is None:
        return None
    if not isinstance(value, list) or not value:
        raise ConfigError(key, f"{key} must be a nonempty list of points")
    pts = []
    for i, pt in enumerate(value):
        pt = pt if isinstance(pt, list) else [pt]
        if len(pt) != n_dims or not all(isinstance(v, (int, float)) for v in pt):
            raise ConfigError(key, f"{key}.{i} must be a list of {n_dims} reals")
        pts.append(np.array(pt, dtype=float))
    return pts


def _run_classify(cfg):
    d = _wrap("tau", tau.from_json, cfg["tau"])
    grid = _points(cfg["grid"], "grid", d.n_dims)
    if cfg["method"] not in ("analytic", "fd"):
        raise ConfigError("method", f"method must be 'analytic' or 'fd', got {cfg['method']!r}")
    tol = cfg["tol"]
    if tol is not None and not (isinstance(tol, (int, float)) and tol > 0):
        raise ConfigError("tol", f"tol must be a positive number, got {tol!r}")
    fiber = cfg["fiber"]
    fiber_p = _wrap("fiber.herglotz", herglotz.from_json, fiber["herglotz"])
    psi0 = _disk_point(fiber["psi0"], "fiber.psi0")
    y_grid = _points(fiber["y_grid"], "fiber.y_grid", d.n_dims)

    def work():
        report = admissibility.classify(d, grid, tol, cfg["method"], cfg["fd_step"]).to_dict()
        fr = admissibility.fiber_variation(d, fiber_p, psi0, y_grid, method=cfg["method"])
        report["fiber"] = fr.to_dict()
        return report
    return work


def _run_validate(cfg):
    p = _wrap("herglotz", herglotz.from_json, cfg["herglotz"])
    radii = cfg["radii"]
    if not isinstance(radii, list) or not radii or not all(
            isinstance(r, (int, float)) and 0 < r < 1 for r in radii):
        raise ConfigError("radii", "radii must be a nonempty list of reals in (0, 1)")
    n_angles = _int(cfg, "n_angles")

    def work():
        return herglotz.validate(p, radii, n_angles).to_dict()
    return work


# -- output ------------------------------------------------------------------

def _clean(obj):
    """Make an object JSON-safe and deterministic: NaN/inf become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _locate(text, key):
    """1-based line of the first occurrence of the last component of ``key``."""
    if text is None or not key:
        return None
    name = str(key).split(".")[-1]
    if name.isdigit() and "." in str(key):
        name = str(key).split(".")[-2]
    for lineno, line in enumerate(text.splitlines(), 1):
        if f'"{name}"' in line:
            return lineno
    return None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted-path override, value parsed as JSON if possible")
    common.add_argument("--out", default=".", help="output directory")
    parser = argparse.ArgumentParser(prog="loewner-ito", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(command: str, config_path=None, overrides=(), out_dir=".", env=None) -> int:
    text = None
    where = config_path or "<defaults>"
    try:
        if config_path is not None:
            text = Path(config_path).read_text()
        cfg = resolve_config(command, text, overrides, env)
        if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool):
            raise ConfigError("seed", f"seed must be an integer, got {cfg['seed']!r}")
        _int(cfg, "workers")
        setup = {
            "simulate": _run_simulate, "sde": _run_sde, "verify-transform": _run_verify,
            "generator": _run_generator, "classify": _run_classify,
            "validate-herglotz": _run_validate,
        }[command](cfg)
    except OSError as exc:
        print(f"{where}: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        line = _locate(text, exc.key)
        anchor = f"{where}:{line}" if line else where
        print(f"{anchor}: {exc.message}", file=sys.stderr)
        return 1

    out = Path(out_dir)
    files = {}
    status = 0
    try:
        if command in ("simulate", "sde"):
            work, extra = setup
            rows = work()
            files[f"{command}.csv"] = _trajectory_csv(rows)
            files.update(extra)
            result = _summary([tr for _, tr in rows])
        else:
            result = setup()
            if command == "validate-herglotz" and not result["passed"]:
                status = 1
        files[f"{command}.json"] = dump_json(
            {"command": command, "seed": cfg["seed"], "config": cfg, "result": result})
    except (LoewnerItoError, ValueError, FloatingPointError) as exc:
        print(f"{command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    out.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        target = out / name
        if isinstance(content, bytes):
            target.write_bytes(content)
        else:
            with open(target, "w", newline="\n") as fh:
                fh.write(content)
        print(target)
    if status:
        print(f"{command}: validation failed", file=sys.stderr)
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.set, args.out)


if __name__ == "__main__":
    sys.exit(main())
