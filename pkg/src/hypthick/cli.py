"""Command-line experiment runner.

Every subcommand reads one INI section (plus an optional [run] section for
seed and threads), validates it against a fixed schema, and writes CSV data
and a JSON summary into the output directory.  The resolved configuration
is hashed; the hash is written as a comment line in every CSV and the full
resolved configuration goes into the JSON summary.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import HypThickError, NumericalError, ValidationError

# key -> (type, default)
Schema = dict[str, tuple[str, object]]

SENSOR_DEFAULT = '{"root": {"primitive": "all"}}'

SCHEMAS: dict[str, Schema] = {
    "run": {"seed": ("int", 0), "threads": ("int", 1)},
    "thickness": {
        "region": ("str", "cusp"), "ell": ("float", 1.0), "y_max": ("float", 1000.0),
        "depth": ("float", 4.0), "x0": ("float", -1.0), "x1": ("float", 1.0),
        "y0": ("float", 0.5), "y1": ("float", 4.0), "R": ("float", 1.0),
        "centers": ("int", 4096), "delta": ("float", 0.0), "rtol": ("float", 1e-8),
        "sensor": ("str", SENSOR_DEFAULT),
    },
    "cover": {
        "region": ("str", "funnel"), "ell": ("float", 1.0), "depth": ("float", 4.0),
        "y_max": ("float", 50.0), "x0": ("float", -1.0), "x1": ("float", 1.0),
        "y0": ("float", 0.5), "y1": ("float", 4.0), "R": ("float", 1.0),
        "samples_per_ball": ("float", 200.0), "probes": ("int", 10000), "repair": ("bool", True),
    },
    "spectral": {
        "a": ("float", 1.0), "Y": ("float", math.exp(math.pi)), "n": ("int", 800),
        "k_max": ("int", 8), "modes": ("int", 30), "lambdas": ("floats", "2,3,4,5,6,7,8,9,10"),
        "sensor": ("str", '{"root": {"primitive": "theta_strip", "t0": 0.0, "t1": 0.5}}'),
        "basis_cache": ("str", ""),
    },
    "extension": {
        "a": ("float", 1.0), "Y": ("float", math.exp(math.pi)), "n": ("int", 800),
        "k_max": ("int", 8), "modes": ("int", 30), "Lambda": ("float", 8.0), "T": ("float", 1.0),
        "t_points": ("ints", "33,65,129,257"), "n_theta": ("ints", "64,128,256,512"),
        "row_stride": ("int", 16), "trials": ("int", 20), "R": ("float", 0.5),
        "eta": ("float", 0.5), "z_x": ("float", 0.0), "z_y": ("float", 3.0),
        "energy_lambdas": ("floats", "2,4,8,16"),
    },
    "heat-necessity": {
        "C_D": ("float", 4.0), "C1": ("float", 0.0), "C2": ("float", 0.0),
        "fit_envelope": ("bool", False), "certify": ("bool", True), "centers": ("int", 256),
    },
    "observability": {
        "a": ("float", 1.0), "Y": ("float", math.exp(math.pi)), "n": ("int", 800),
        "k_max": ("int", 8), "modes": ("int", 30), "times": ("floats", "0.1,1.0"),
        "caps": ("floats", "4,6,8,10"), "sensor": ("str", SENSOR_DEFAULT),
    },
    "gaussian": {
        "alphas": ("floats", "0.5,1,2,4,8"), "betas": ("floats", "0.5,1,2,4,8"),
        "C_D": ("float", 4.0),
    },
}


def _convert(kind: str, raw, key: str):
    try:
        if kind == "str":
            return str(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError("not finite")
            return v
        if kind == "bool":
            if isinstance(raw, bool):
                return raw
            s = str(raw).strip().lower()
            if s in ("1", "true", "yes", "on"):
                return True
            if s in ("0", "false", "no", "off"):
                return False
            raise ValueError("not a boolean")
        if kind in ("floats", "ints"):
            parts = [p for p in str(raw).replace(" ", "").split(",") if p]
            conv = int if kind == "ints" else float
            return [conv(p) for p in parts]
    except ValueError as e:
        raise ValidationError(f"bad value for {key!r}: {raw!r} ({e})") from None
    raise ValidationError(f"unknown schema type {kind}")


def load_config(command: str, path: str | None, seed: int | None = None,
                threads: int | None = None) -> dict:
    """Resolve the configuration of one command: defaults, file, then flags."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive
    base = Path(".")
    if path:
        p = Path(path)
        if not p.is_file():
            raise ValidationError(f"config file not found: {path}")
        try:
            cp.read(p, encoding="utf-8")
        except configparser.Error as e:
            raise ValidationError(f"cannot parse config: {e}") from None
        base = p.parent
    unknown = [s for s in cp.sections() if s not in SCHEMAS]
    if unknown:
        raise ValidationError(f"unknown config sections {unknown}")
    out: dict = {}
    for section in ("run", command):
        schema = SCHEMAS[section]
        given = dict(cp[section]) if cp.has_section(section) else {}
        bad = sorted(set(given) - set(schema))
        if bad:
            raise ValidationError(f"unknown keys in [{section}]: {bad}")
        vals = {k: _convert(t, given.get(k, d), k) for k, (t, d) in schema.items()}
        out[section] = vals
    if seed is not None:
        out["run"]["seed"] = int(seed)
    if threads is not None:
        out["run"]["threads"] = int(threads)
    if out["run"]["seed"] < 0 or out["run"]["seed"] >= 2**64:
        raise ValidationError("seed must be an unsigned 64-bit integer")
    if out["run"]["threads"] < 1:
        raise ValidationError("threads must be >= 1")
    sec = out[command]
    if "sensor" in sec:
        sec["sensor"] = _resolve_sensor(sec["sensor"], base)
    return out


def _resolve_sensor(value: str, base: Path) -> dict:
    text = value.strip()
    if not text.startswith("{"):
        p = Path(text)
        p = p if p.is_absolute() else base / p
        if not p.is_file():
            raise ValidationError(f"sensor file not found: {p}")
        text = p.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"sensor set is not valid JSON: {e}") from None


def config_hash(cfg: dict) -> str:
    """SHA-256 of the resolved config; the thread count does not change results so it is left out."""
    run = {k: v for k, v in cfg.get("run", {}).items() if k != "threads"}
    blob = json.dumps({**cfg, "run": run}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Writer:
    """Single writer for one run's artifacts."""

    def __init__(self, out: Path, cfg: dict, command: str):
        self.out = out
        self.cfg = cfg
        self.command = command
        self.hash = config_hash(cfg)
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# config_sha256={self.hash}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        return path

    def json(self, name: str, summary: dict) -> Path:
        doc = {"command": self.command, "config": self.cfg, "config_sha256": self.hash,
               "result": summary}
        path = self.out / name
        path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


# -- commands -------------------------------------------------------------------

def _sensor(d: dict, end=None):
    from .thickness import SensorSet

    s = SensorSet.from_dict(d)
    if s.end is None and end is not None:
        s = SensorSet(s.root, end)
    return s


def _basis(c: dict):
    from .spectral import ModeBasis, TruncatedCusp, solve_modes

    cache = c.get("basis_cache") or ""
    dom = TruncatedCusp(c["a"], c["Y"], c["n"], c["k_max"])
    if cache and Path(cache).with_suffix(".json").is_file():
        b = ModeBasis.load(cache)
        if b.domain == dom and len(b) == c["modes"]:
            return b
    b = solve_modes(dom, c["modes"])
    if cache:
        b.save(cache)
    return b


def cmd_thickness(cfg: dict, w: Writer) -> dict:
    from .covering import CuspDomain, FunnelDomain, RectRegion
    from .geom import ChartRect
    from .quotient import EndModel
    from .thickness import is_thick, thickness_profile

    c = cfg["thickness"]
    kind = c["region"]
    if kind == "cusp":
        end = EndModel.cusp(c["ell"])
        region = CuspDomain(end, c["y_max"])
    elif kind == "funnel":
        end = EndModel.funnel(c["ell"])
        region = FunnelDomain(end, c["depth"])
    elif kind == "ambient":
        end = None
        region = RectRegion(ChartRect(c["x0"], c["x1"], c["y0"], c["y1"]))
    else:
        raise ValidationError(f"unknown thickness region {kind!r}")
    omega = _sensor(c["sensor"], end)
    rep = thickness_profile(omega, region, c["R"], c["centers"], cfg["run"]["seed"], c["rtol"],
                            threads=cfg["run"]["threads"])
    w.csv("thickness.csv", ["center_x", "center_y", "vol_ball", "vol_cap", "ratio"], rep.rows())
    s = rep.summary()
    s["is_thick"] = is_thick(rep, c["delta"]) if c["delta"] > 0 else None
    w.json("thickness.json", s)
    return s


def cmd_cover(cfg: dict, w: Writer) -> dict:
    from .covering import (CuspDomain, FunnelDomain, RectRegion, VerticalSegment,
                           build_maximal_separated, intersection_bound, intersection_number,
                           verify_covering)
    from .geom import ChartRect, ball_volume
    from .quotient import EndModel

    c = cfg["cover"]
    kind = c["region"]
    if kind == "funnel":
        region = FunnelDomain(EndModel.funnel(c["ell"]), c["depth"])
    elif kind == "cusp":
        region = CuspDomain(EndModel.cusp(c["ell"]), c["y_max"])
    elif kind == "rect":
        region = RectRegion(ChartRect(c["x0"], c["x1"], c["y0"], c["y1"]))
    elif kind == "segment":
        region = VerticalSegment(c["x0"], c["y0"], c["y1"])
    else:
        raise ValidationError(f"unknown cover region {kind!r}")
    R = c["R"]
    per = ball_volume(R) if region.dim == 2 else 2 * R
    n = max(1, int(math.ceil(c["samples_per_ball"] * region.volume / per)))
    seed = cfg["run"]["seed"]
    s = build_maximal_separated(region, R, n, seed, repair=c["repair"])
    rep = verify_covering(s, c["probes"], seed + 1)
    w.csv("centers.csv", ["x", "y", "R"], ([x, y, R] for x, y in zip(s.x, s.y)))
    inter = intersection_number(s, 2 * R)
    summary = {"centers": len(s), "samples": n, "coverage": rep.coverage,
               "violators": len(rep.violators), "intersection_number_2R": inter,
               "intersection_bound": intersection_bound(R),
               "within_bound": inter <= intersection_bound(R), **s.meta}
    w.json("cover.json", summary)
    return summary


def cmd_spectral(cfg: dict, w: Writer) -> dict:
    from .spectral import fit_exponential, spectral_constant

    c = cfg["spectral"]
    b = _basis(c)
    omega = _sensor(c["sensor"])
    L = c["lambdas"]
    C = [spectral_constant(omega, lam, b, raise_singular=False) for lam in L]
    finite = [(l, v) for l, v in zip(L, C) if math.isfinite(v)]
    fit = None
    if len(finite) >= 3:
        C0, slope, res = fit_exponential(*zip(*finite))
        fit = {"C0": C0, "c": slope, "residual": res}
    modes = [int(np.sum(b.lam <= l)) for l in L]
    w.csv("spectral.csv", ["Lambda", "modes", "C", "log_C"],
          ([l, m, v, math.log(v) if math.isfinite(v) else math.inf] for l, m, v in zip(L, modes, C)))
    summary = {"fit": fit, "lam_max": float(b.lam.max()),
               "nondecreasing": bool(np.all(np.diff(C) >= -1e-10 * np.abs(C[:-1])))}
    w.json("spectral.json", summary)
    return summary


def cmd_extension(cfg: dict, w: Writer) -> dict:
    from .spectral import (energy_bound_check, extension_residual, harmonic_extension,
                           random_window, smallness_experiment)

    c = cfg["extension"]
    b = _basis(c)
    seed = cfg["run"]["seed"]
    win = random_window(b, c["Lambda"], seed)
    if len(c["t_points"]) != len(c["n_theta"]):
        raise ValidationError("t_points and n_theta must have the same length")
    rows = []
    for tp, nt in zip(c["t_points"], c["n_theta"]):
        ext = harmonic_extension(win, c["T"], tp)
        rows.append([tp, nt, extension_residual(ext, "fd", nt, c["row_stride"])])
    w.csv("extension.csv", ["t_points", "n_theta", "residual"], rows)
    ext = harmonic_extension(win, c["T"], c["t_points"][0])
    sm = smallness_experiment(b, c["Lambda"], c["T"], (c["z_x"], c["z_y"]), c["R"], c["eta"],
                              trials=c["trials"], seed=seed)
    w.csv("smallness.csv", ["sup_K", "sup_E", "sup_Omega", "holds"], sm.rows())
    energy = [[lam, energy_bound_check(random_window(b, lam, seed), c["T"]).ratio]
              for lam in c["energy_lambdas"]]
    w.csv("energy.csv", ["Lambda", "ratio"], energy)
    summary = {
        "residual_spectral": extension_residual(ext, "spectral"),
        "residual_operator": extension_residual(ext, "operator"),
        "fd_ratios": [rows[i][2] / rows[i + 1][2] for i in range(len(rows) - 1) if rows[i + 1][2] > 0],
        "smallness": {"C": sm.C, "alpha": sm.alpha, "all_hold": bool(sm.holds.all()),
                      "skipped": sm.skipped},
    }
    w.json("extension.json", summary)
    return summary


def cmd_heat_necessity(cfg: dict, w: Writer) -> dict:
    from .covering import RectRegion
    from .geom import ChartRect
    from .heat import CurvatureParams, envelope_fit, necessity_pipeline
    from .thickness import SensorSet, is_thick, thickness_profile

    c = cfg["heat-necessity"]
    base = CurvatureParams()
    C1, C2 = c["C1"] or base.C1, c["C2"] or base.C2
    env = None
    if c["fit_envelope"]:
        env = envelope_fit()
        C1, C2 = env.C1, env.C2
        w.csv("envelope.csv", ["d", "t", "log_p", "log_lower", "log_upper"], env.rows())
    cp = CurvatureParams(C_D=c["C_D"], C1=C1, C2=C2)
    p = necessity_pipeline(cp)
    summary = {"curvature": {"C_D": cp.C_D, "C1": cp.C1, "C2": cp.C2}, "necessity": p.to_dict()}
    if env is not None:
        summary["envelope_holds"] = env.holds
    if c["certify"]:
        region = RectRegion(ChartRect(-2.0, 2.0, 0.25, 8.0))
        rep = thickness_profile(SensorSet.full(), region, p.R, c["centers"], cfg["run"]["seed"])
        summary["certificate"] = {"delta_min": rep.delta_min, "is_thick": is_thick(rep, p.delta),
                                  "centers": len(rep.center_x)}
    w.json("necessity.json", summary)
    return summary


def cmd_observability(cfg: dict, w: Writer) -> dict:
    from .heat import observability_constant

    c = cfg["observability"]
    b = _basis(c)
    omega = _sensor(c["sensor"])
    rows = []
    for T in c["times"]:
        for cap in c["caps"]:
            C = observability_constant(omega, T, b, cap, raise_singular=False)
            rows.append([T, cap, int(np.sum(b.lam <= cap)), C, C * T])
    w.csv("observability.csv", ["T", "Lambda_cap", "modes", "C_obs", "C_obs_times_T"], rows)
    summary = {"max_C_obs_times_T": max(r[4] for r in rows) if rows else None}
    w.json("observability.json", summary)
    return summary


def cmd_gaussian(cfg: dict, w: Writer) -> dict:
    from .heat import gaussian_integral, gaussian_integral_closed, gaussian_quotient_bound, gaussian_quotient_numeric

    c = cfg["gaussian"]
    rows = []
    for a in c["alphas"]:
        for b in c["betas"]:
            lo = gaussian_quotient_bound(a, b, c["C_D"])
            num = gaussian_quotient_numeric(a, b)
            rows.append([a, b, lo, num, lo <= num])
    w.csv("gaussian.csv", ["alpha", "beta", "bound", "numeric", "ok"], rows)
    summary = {"violations": sum(not r[4] for r in rows),
               "numerator_alpha1": gaussian_integral(1.0),
               "numerator_alpha1_closed": gaussian_integral_closed(1.0)}
    w.json("gaussian.json", summary)
    return summary


COMMANDS = {
    "thickness": cmd_thickness,
    "cover": cmd_cover,
    "spectral": cmd_spectral,
    "extension": cmd_extension,
    "heat-necessity": cmd_heat_necessity,
    "observability": cmd_observability,
    "gaussian": cmd_gaussian,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypthick", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="INI file with a section named after the command")
    ap.add_argument("--out", default="out", help="output directory (default: ./out)")
    ap.add_argument("--seed", type=int, help="u64 seed, overrides [run] seed")
    ap.add_argument("--threads", type=int, help="worker threads, overrides [run] threads")
    return ap


def run(command: str, config: str | None = None, out: str = "out", seed: int | None = None,
        threads: int | None = None) -> int:
    out_dir = Path(out)
    try:
        cfg = load_config(command, config, seed, threads)
        w = Writer(out_dir, cfg, command)
        summary = COMMANDS[command](cfg, w)
        print(json.dumps(_jsonable(summary), sort_keys=True))
        return 0
    except (ValidationError, NumericalError) as e:
        code = 2 if isinstance(e, ValidationError) else 3
        err = {"error": type(e).__name__, "message": str(e), "exit_code": code, "command": command}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "error.json").write_text(json.dumps(err, indent=2, sort_keys=True) + "\n")
        except OSError:
            pass
        return code
    except HypThickError as e:  # pragma: no cover - every library error is one of the two
        print(json.dumps({"error": type(e).__name__, "message": str(e), "exit_code": 3}), file=sys.stderr)
        return 3


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
