"""Command-line interface: config parsing, dispatch, seeded reproducible
runs, and machine-readable JSON reports.

Exit codes: 0 success, 1 config error, 2 estimator failure, 3 oracle
tolerance unreachable.  Reports are written atomically; timestamps and wall
times live under keys that `canonical_bytes` strips, so reports from equal
seeds compare byte-identical regardless of thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, activity as act, connective, counting, geometry as geom
from . import potential as pot, ssm, thermo
from .backend import BACKEND
from .backend.reference import RejectionGuardError
from .counting import EstimatorFailure, OracleToleranceError
from .estimators import Estimate
from .sampler import BlockDynamicsConfig, GibbsModel, run_chain, write_csv

COMMANDS = ("sample", "logz", "logz-oracle", "pressure", "surface-pressure",
            "connective", "ssm-test", "torus-gap")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    command: str
    dim: int = 1
    potential_kind: str = "hard-sphere"
    r: float = 1.0
    A: float = 1.0
    potential_file: str | None = None
    level: float = 1.0
    region: dict = field(default_factory=dict)
    activity: dict = field(default_factory=dict)
    epsilon: float = 0.05
    L: float | None = None
    mixing_const: float = 10.0
    sample_const: float = 64.0
    N: int | None = None
    T: int | None = None
    window: float | None = None
    side: float | None = None
    k_max: int = 8
    method: str | None = None
    seed: int = 42
    threads: int = 1
    out: str | None = None

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["lambda"] = d.pop("level")
        return d


def _build_potential(cfg: RunConfig):
    if cfg.potential_kind == "hard-sphere":
        return pot.HardSphere(cfg.r)
    if cfg.potential_kind == "strauss":
        return pot.Strauss(cfg.r, cfg.A)
    if cfg.potential_kind == "tabulated":
        return pot.load_tabulated(cfg.potential_file)
    raise AssertionError(cfg.potential_kind)


def _build_region(cfg: RunConfig):
    spec = cfg.region
    if spec.get("kind") == "torus" or (not spec and cfg.command == "torus-gap"):
        side = spec.get("side", cfg.side)
        return geom.Torus(float(side), cfg.dim)
    if spec:
        return geom.Box(spec["lo"], spec["hi"])
    side = cfg.side if cfg.side is not None else 2.0
    return geom.Box([0.0] * cfg.dim, [side] * cfg.dim)


def _build_activity(cfg: RunConfig, region):
    spec = cfg.activity
    kind = spec.get("kind", "constant")
    if kind == "constant":
        fn = act.uniform_on(region, cfg.level)
    elif kind == "half-space":
        fn = act.half_space(cfg.dim, spec["direction"], cfg.level,
                            spec.get("offset", 0.0))
    elif kind == "slab":
        fn = act.slab(cfg.dim, spec["direction"], cfg.level,
                      spec["offsets"][0], spec["offsets"][1])
    elif kind == "quadrant":
        fn = act.quadrant(cfg.dim, spec["direction"], spec["direction2"], cfg.level)
    else:
        raise AssertionError(kind)
    for p in spec.get("tilt_points", []):
        fn = act.tilt_by_points(fn, np.asarray([p], dtype=float),
                                _build_potential(cfg))
    return fn


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config, reporting every error at once."""
    errors = []
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"invalid JSON: {e}"])
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])
    return _validate(raw)


def _validate(raw: dict) -> RunConfig:
    errors = []
    known = {
        "command", "dim", "potential", "r", "A", "potential_file", "lambda",
        "region", "activity", "epsilon", "L", "C", "sample_const", "N", "T",
        "window", "side", "k_max", "method", "seed", "threads", "out",
    }
    for k in raw:
        if k not in known:
            errors.append(f"unknown field '{k}'")
    cmd = raw.get("command")
    if cmd not in COMMANDS:
        errors.append(f"command must be one of {COMMANDS}, got {cmd!r}")
    cfg = RunConfig(command=cmd if cmd in COMMANDS else "logz")
    cfg.dim = int(raw.get("dim", 1))
    if cfg.dim < 1:
        errors.append("dim must be >= 1")
    kind = raw.get("potential", "hard-sphere")
    if kind not in ("hard-sphere", "strauss", "tabulated"):
        errors.append(f"unknown potential kind {kind!r}")
    cfg.potential_kind = kind
    cfg.r = float(raw.get("r", 1.0))
    if cfg.r <= 0:
        errors.append("field 'r': potential range must be positive")
    cfg.A = float(raw.get("A", 1.0))
    if cfg.A < 0:
        errors.append("field 'A': strength must be nonnegative")
    cfg.potential_file = raw.get("potential_file")
    if kind == "tabulated":
        if not cfg.potential_file:
            errors.append("tabulated potential needs 'potential_file'")
        elif not os.path.exists(cfg.potential_file):
            errors.append(f"potential file not found: {cfg.potential_file}")
    cfg.level = float(raw.get("lambda", 1.0))
    if cfg.level < 0:
        errors.append("field 'lambda': activity must be nonnegative")
    if cmd in ("pressure", "surface-pressure", "torus-gap", "ssm-test") and cfg.level <= 0:
        errors.append(f"field 'lambda': {cmd} requires a positive activity")
    cfg.region = raw.get("region", {})
    cfg.activity = raw.get("activity", {})
    cfg.epsilon = float(raw.get("epsilon", 0.05))
    if not 0 < cfg.epsilon < 1:
        errors.append("field 'epsilon': must lie in (0, 1)")
    cfg.L = raw.get("L")
    if cfg.L is not None:
        cfg.L = float(cfg.L)
        if cfg.L < cfg.r:
            errors.append("field 'L': update radius must be >= potential range")
    cfg.mixing_const = float(raw.get("C", 10.0))
    if cfg.mixing_const <= 0:
        errors.append("field 'C': mixing constant must be positive")
    cfg.sample_const = float(raw.get("sample_const", 64.0))
    cfg.N = int(raw["N"]) if raw.get("N") is not None else None
    cfg.T = int(raw["T"]) if raw.get("T") is not None else None
    cfg.window = float(raw["window"]) if raw.get("window") is not None else None
    cfg.side = float(raw["side"]) if raw.get("side") is not None else None
    if cmd == "torus-gap" and cfg.side is None and "side" not in cfg.region:
        errors.append("torus-gap needs 'side'")
    cfg.k_max = int(raw.get("k_max", 8))
    cfg.method = raw.get("method")
    cfg.seed = int(raw.get("seed", 42))
    cfg.threads = int(raw.get("threads", 1))
    cfg.out = raw.get("out")
    if errors:
        raise ConfigError(errors)
    return cfg


def render_config(cfg: RunConfig) -> str:
    raw = {
        "command": cfg.command, "dim": cfg.dim, "potential": cfg.potential_kind,
        "r": cfg.r, "A": cfg.A, "lambda": cfg.level, "epsilon": cfg.epsilon,
        "seed": cfg.seed, "threads": cfg.threads, "C": cfg.mixing_const,
        "sample_const": cfg.sample_const, "k_max": cfg.k_max,
    }
    for key, val in (("potential_file", cfg.potential_file), ("region", cfg.region or None),
                     ("activity", cfg.activity or None), ("L", cfg.L), ("N", cfg.N),
                     ("T", cfg.T), ("window", cfg.window), ("side", cfg.side),
                     ("method", cfg.method), ("out", cfg.out)):
        if val is not None:
            raw[key] = val
    return json.dumps(raw, sort_keys=True, indent=2)


def _chain_cfg(cfg: RunConfig) -> BlockDynamicsConfig:
    return BlockDynamicsConfig(L=cfg.L, T=cfg.T, mixing_const=cfg.mixing_const)


def execute(cfg: RunConfig) -> dict:
    """Dispatch a validated config and assemble the run report."""
    t0 = time.perf_counter()
    potential = _build_potential(cfg)
    chain = _chain_cfg(cfg)
    results: dict = {}
    purposes: list[str] = []

    if cfg.command == "sample":
        region = _build_region(cfg)
        model = GibbsModel(region, potential, _build_activity(cfg, region))
        n = cfg.N or 1
        configs = [run_chain(model, chain, cfg.seed, chain_id=j, purpose="sample")
                   for j in range(n)]
        purposes.append("sample")
        results["n_chains"] = n
        results["counts"] = [len(c) for c in configs]
        if cfg.out:
            csv_path = os.path.splitext(cfg.out)[0] + ".csv"
            write_csv(configs, csv_path)
            results["csv_path"] = csv_path

    elif cfg.command == "logz":
        region = _build_region(cfg)
        model = GibbsModel(region, potential, act.uniform_on(region, cfg.level))
        if cfg.method == "sweep":
            est = counting.logz_sweep(model, cfg.seed, n_samples=cfg.N or 2000,
                                      chain_cfg=chain, threads=cfg.threads)
            purposes.append("logz.sweep")
        else:
            est = counting.approx_log_partition(
                model, cfg.epsilon, cfg.seed, sample_const=cfg.sample_const,
                chain_cfg=chain, threads=cfg.threads)
            purposes.append("logz.factor")
        results["log_z"] = est.as_dict()

    elif cfg.command == "logz-oracle":
        region = _build_region(cfg)
        model = GibbsModel(region, potential, act.uniform_on(region, cfg.level))
        value = counting.series_log_partition_oracle(model, cfg.epsilon)
        results["log_z_series"] = value
        if cfg.dim == 1 and isinstance(potential, pot.HardSphere) \
                and isinstance(region, geom.Box):
            length = region.hi[0] - region.lo[0]
            results["log_z_rods_closed_form"] = counting.tonks_log_partition(
                length, potential.r, cfg.level)

    elif cfg.command == "pressure":
        res = thermo.estimate_pressure(
            potential, cfg.level, cfg.epsilon, cfg.seed, dim=cfg.dim,
            n_samples=cfg.N, window=cfg.window, chain_cfg=chain,
            threads=cfg.threads)
        purposes.append("pressure.single")
        results["pressure"] = res.as_dict()
        if cfg.method in ("interpolation", "both"):
            alt = thermo.pressure_via_interpolation(
                potential, cfg.level, cfg.epsilon, cfg.seed, dim=cfg.dim,
                window=cfg.window, chain_cfg=chain, threads=cfg.threads)
            purposes.append("pressure.interp")
            results["pressure_interpolation"] = alt.as_dict()
        if cfg.dim == 1 and isinstance(potential, pot.HardSphere):
            results["rods_oracle"] = thermo.tonks_pressure_oracle(cfg.level, potential.r)

    elif cfg.command == "surface-pressure":
        har = thermo.surface_pressure_harness(
            potential, cfg.level, cfg.epsilon, cfg.seed, dim=cfg.dim,
            n_samples=cfg.N or 2000, chain_cfg=chain, threads=cfg.threads)
        purposes.extend(["sp.interp", "sp.edge"])
        results["interpolation"] = har["interpolation"].as_dict()
        results["box"] = har["box"].as_dict() if har["box"] else None
        results["edge_integral"] = har["edge_integral"].as_dict()
        results["references"] = har["references"]
        if "oracle" in har:
            results["oracle"] = har["oracle"]

    elif cfg.command == "connective":
        rep = connective.connective_report(potential, cfg.dim, cfg.k_max,
                                           cfg.N or 100_000, cfg.seed,
                                           threads=cfg.threads)
        purposes.append("connective")
        results["connective"] = rep.as_dict()

    elif cfg.command == "ssm-test":
        w = cfg.window or thermo.window_radius(cfg.epsilon, potential)
        region = geom.Box([-w] * cfg.dim, [w] * cfg.dim)
        model = GibbsModel(region, potential, act.uniform_on(region, cfg.level))
        r = pot.range_of(potential)
        ladder = [r, 2 * r, 3 * r, 4 * r]
        vk = {k: connective.estimate_vk(potential, cfg.dim, k, 50_000, cfg.seed)
              for k in range(1, 5)}
        fit = ssm.decay_profile(model, np.zeros(cfg.dim), ladder, cfg.epsilon,
                                cfg.N or 2000, chain, cfg.seed,
                                vk_estimates=vk, threads=cfg.threads)
        purposes.append("ssm.ladder")
        results["decay"] = fit.as_dict()

    elif cfg.command == "torus-gap":
        side = cfg.side or cfg.region.get("side")
        gap = thermo.torus_pressure_gap(potential, cfg.level, float(side),
                                        cfg.epsilon, cfg.seed, dim=cfg.dim,
                                        sample_const=cfg.sample_const,
                                        chain_cfg=chain, threads=cfg.threads)
        purposes.extend(["logz.factor", "pressure.single"])
        results["gap"] = gap["gap"].as_dict()
        results["log_z"] = gap["log_z"].as_dict()
        results["pressure"] = gap["pressure"].as_dict()
        if cfg.dim == 1 and isinstance(potential, pot.HardSphere):
            p = thermo.tonks_pressure_oracle(cfg.level, potential.r)
            results["exact_gap"] = counting.tonks_ring_log_partition(
                float(side), potential.r, cfg.level) - float(side) * p

    report = {
        "command": cfg.command,
        "config": json.loads(render_config(cfg)),
        "results": results,
        "versions": {
            "pointgas": __version__,
            "numpy": np.__version__,
            "backend": BACKEND,
        },
        "rng": {"master_seed": cfg.seed, "purposes": sorted(set(purposes))},
        "meta": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                 "wall_time_s": time.perf_counter() - t0},
    }
    return report


def canonical_bytes(report: dict) -> bytes:
    """Report bytes with volatile fields (timestamps, wall times) removed."""

    def strip(obj):
        if isinstance(obj, dict):
            return {k: strip(v) for k, v in obj.items()
                    if k not in ("meta", "wall_time_s")}
        if isinstance(obj, list):
            return [strip(x) for x in obj]
        return obj

    return json.dumps(strip(report), sort_keys=True).encode()


def write_report(report: dict, path: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(report, fh, sort_keys=True, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pointgas",
                                 description="Repulsive point-process sampling and estimation")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config file; flags override its fields")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out", help="report output path")
    ap.add_argument("--dim", type=int)
    ap.add_argument("--potential", choices=["hard-sphere", "strauss", "tabulated"])
    ap.add_argument("--potential-file")
    ap.add_argument("--r", type=float)
    ap.add_argument("--A", type=float)
    ap.add_argument("--lambda", dest="level", type=float)
    ap.add_argument("--epsilon", type=float)
    ap.add_argument("--L", type=float)
    ap.add_argument("--side", type=float)
    ap.add_argument("--N", type=int)
    ap.add_argument("--window", type=float)
    ap.add_argument("--k-max", type=int)
    ap.add_argument("--method")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    raw: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            print(f"config error: {e}", file=sys.stderr)
            return 1
    raw["command"] = args.command
    overrides = {
        "seed": args.seed, "threads": args.threads, "out": args.out,
        "dim": args.dim, "potential": args.potential,
        "potential_file": args.potential_file, "r": args.r, "A": args.A,
        "lambda": args.level, "epsilon": args.epsilon, "L": args.L,
        "side": args.side, "N": args.N, "window": args.window,
        "k_max": args.k_max, "method": args.method,
    }
    for k, v in overrides.items():
        if v is not None:
            raw[k] = v
    try:
        cfg = _validate(raw)
    except ConfigError as e:
        for msg in e.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return 1

    try:
        report = execute(cfg)
    except OracleToleranceError as e:
        print(f"oracle error: {e}", file=sys.stderr)
        return 3
    except (EstimatorFailure, RejectionGuardError, FloatingPointError,
            RuntimeError, ValueError) as e:
        print(f"estimator error: {e}", file=sys.stderr)
        return 2

    if cfg.out:
        write_report(report, cfg.out)
    else:
        json.dump(report, sys.stdout, sort_keys=True, indent=2)
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
