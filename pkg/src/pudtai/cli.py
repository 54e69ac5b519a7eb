"""Command-line front end.

    pudtai --mode compare --out results/ [--config run.json] [--seed 7]
           [--verbose-stages] [--calibration.v_minus=0.98 ...]

Every run writes one or more CSV files and ``manifest.json`` into the
output directory. The thread count for bootstrap workers comes from the
PUDTAI_NUM_THREADS environment variable (default 1).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODE_BLOCKS, MODES, ConfigError, RunConfig, parse_value, set_path
from .estimate import REPORT_COLUMNS, bootstrap, crb, crb_qmti, mle_pudtai, sample_counts
from .fisher import (
    QmtiNoiseModel,
    SpectrometerSpec,
    comparison_curves,
    f_pudtai,
    f_pudtai_ports,
    fisher_di,
    fisher_numeric,
    fisher_qmti,
    pudtai_family,
    s_curves,
    s_pudtai_closed_form,
)
from .model import DeviceCalibration, port_probabilities
from .processor import ORDER_EFFICIENCY, ProcessorParams, pipeline_port_powers, pudtai_pipeline
from .signals import ApertureSpec, GaussianParams, TwoSourceSpec, centered_axis, phase_average, synthesize_two_source

THREADS_ENV = "PUDTAI_NUM_THREADS"
_MAX_STAGE_ROWS = 16384


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.12g}"


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


# -- parameter blocks -> objects ------------------------------------------


def _calibration(p) -> DeviceCalibration:
    c = p["calibration"]
    return DeviceCalibration(c["v_minus"], c["v_plus"], c["eta_plus"], c["t_a_sigma"])


def _qmti(p) -> QmtiNoiseModel:
    q = p["qmti"]
    bwl = float("inf") if q["bwl_ratio"] is None else q["bwl_ratio"]
    return QmtiNoiseModel(q["sigma_rl_ratio"], bwl, q["dark_fraction"])


def _processor(p) -> ProcessorParams:
    q = p["processor"]
    return ProcessorParams(
        alpha=q["alpha"],
        kappa=q["kappa"],
        alpha_di=q["alpha_di"],
        beta=q["beta"],
        theta=q["theta"],
        aperture=ApertureSpec(q["t_a"]),
        omega0=q["omega0"],
        band_fraction=q["band_fraction"],
        pad=int(q["pad"]),
    )


def _signal(p, epsilon=None, phi=None) -> TwoSourceSpec:
    s = p["signal"]
    return TwoSourceSpec(
        s["epsilon"] if epsilon is None else epsilon,
        s["phi"] if phi is None else phi,
        GaussianParams(s["sigma"], s["omega0"]),
        s["mean_photons"],
    )


def _grid(p) -> np.ndarray:
    return centered_axis(int(p["grid"]["n"]), p["grid"]["half_span"] / p["signal"]["sigma"])


def _epsilons(p) -> list[float]:
    return [float(e) for e in p["sweep"]["epsilons"]]


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}", THREADS_ENV) from exc
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1", THREADS_ENV)
    return n


# -- modes -------------------------------------------------------------------


def _run_synthesize(cfg, out, verbose):
    p = cfg.params
    grid = _grid(p)
    spec = _signal(p)
    s = synthesize_two_source(spec, grid)
    avg = phase_average(lambda phi: synthesize_two_source(_signal(p, phi=phi), grid).intensity(), int(p["processor"]["n_phases"]))
    rows = zip(grid, s.samples.real, s.samples.imag, s.intensity(), avg)
    write_csv(out / "synthesize.csv", ["t", "re", "im", "intensity", "intensity_phase_avg"], rows)
    return ["synthesize.csv"]


def _run_pipeline(cfg, out, verbose):
    p = cfg.params
    grid = _grid(p)
    params = _processor(p)
    model_cal = DeviceCalibration.ideal(params.aperture.t_a * p["signal"]["sigma"])
    rows = []
    for eps in _epsilons(p):
        pm, pp = pipeline_port_powers(_signal(p, epsilon=eps), grid, params, int(p["processor"]["n_phases"]))
        prob = port_probabilities(eps, model_cal)
        rows.append((eps, pm, pp, prob.p_minus, prob.p_plus))
    cols = ["epsilon", "p_minus_sim", "p_plus_sim", "p_minus_model", "p_plus_model"]
    write_csv(out / "pipeline.csv", cols, rows)
    files = ["pipeline.csv"]
    if verbose:
        stages = []
        pudtai_pipeline(synthesize_two_source(_signal(p), grid), params, record=lambda n, f: stages.append((n, f)))
        for i, (name, fld) in enumerate(stages):
            stride = max(1, len(fld) // _MAX_STAGE_ROWS)
            fname = f"stage_{i:02d}_{name}.csv"
            ax = fld.axis[::stride]
            sm = fld.samples[::stride]
            write_csv(out / fname, ["t", "re", "im", "intensity"], zip(ax, sm.real, sm.imag, np.abs(sm) ** 2))
            files.append(fname)
    return files


def _run_probabilities(cfg, out, verbose):
    cal = _calibration(cfg.params)
    rows = []
    for eps in _epsilons(cfg.params):
        pr = port_probabilities(eps, cal)
        rows.append((eps, pr.p_minus, pr.p_plus, pr.p_cross))
    write_csv(out / "probabilities.csv", ["epsilon", "p_minus", "p_plus", "p_cross"], rows)
    return ["probabilities.csv"]


def _run_fisher(cfg, out, verbose):
    cal = _calibration(cfg.params)
    fam = pudtai_family(cal, 3)
    rows = []
    for eps in _epsilons(cfg.params):
        fm, fp = f_pudtai_ports(eps, cal)
        rows.append((eps, fm + fp, fm, fp, fisher_numeric(fam, eps), fisher_di(eps)))
    cols = ["epsilon", "F_PuDTAI", "F_minus", "F_plus", "F_numeric_3outcome", "F_DI"]
    write_csv(out / "fisher.csv", cols, rows)
    return ["fisher.csv"]


def _run_estimate(cfg, out, verbose):
    p = cfg.params
    cal = _calibration(p)
    eps_list = _epsilons(p)
    seqs = np.random.SeedSequence(cfg.seed).spawn(len(eps_list))
    n = int(p["estimate"]["photons_per_set"])
    rows = []
    for eps, ss in zip(eps_list, seqs):
        c = sample_counts(eps, cal, n, ss, shot_mode=p["estimate"]["shot_mode"], mean_photons=p["signal"]["mean_photons"])
        rows.append((eps, c.n_minus, c.n_plus, c.n_total, mle_pudtai(c, cal)))
    write_csv(out / "estimate.csv", ["epsilon_true", "n_minus", "n_plus", "n_total", "eps_hat"], rows)
    return ["estimate.csv"]


def _run_bootstrap(cfg, out, verbose):
    p = cfg.params
    cal = _calibration(p)
    qm = _qmti(p)
    eps_list = _epsilons(p)
    seqs = np.random.SeedSequence(cfg.seed).spawn(len(eps_list))
    est = p["estimate"]
    n_jobs = _threads()
    rows = []
    for eps, ss in zip(eps_list, seqs):
        r = bootstrap(
            eps, cal, int(est["photons_per_set"]), int(est["n_boot"]), ss,
            n_jobs=n_jobs, shot_mode=est["shot_mode"], mean_photons=p["signal"]["mean_photons"],
        )
        rows.append((eps, r.eps_hat_mean, r.variance_per_10_photons, r.bias, crb(eps, cal, 10), crb_qmti(eps, 10, qm)))
    write_csv(out / "bootstrap.csv", REPORT_COLUMNS, rows)
    return ["bootstrap.csv"]


def _run_sweep(cfg, out, verbose):
    p = cfg.params
    cal = _calibration(p)
    qm = _qmti(p)
    rows = []
    for eps in _epsilons(p):
        fp = f_pudtai(eps, cal)
        fq = fisher_qmti(eps, qm)
        rows.append((eps, fp, fq, fp / fq if fq > 0 else float("inf")))
    write_csv(out / "sweep.csv", ["epsilon", "F_PuDTAI", "F_QMTI", "improvement_ratio"], rows)
    return ["sweep.csv"]


def _run_compare(cfg, out, verbose):
    p = cfg.params
    cal = _calibration(p)
    curves = comparison_curves(_epsilons(p), cal, _qmti(p))
    eps = curves[0].epsilons
    write_csv(out / "compare.csv", ["epsilon"] + [c.label for c in curves], zip(eps, *[c.values for c in curves]))
    specs = [SpectrometerSpec(v["sigma_rl"], v["sigma_bwl"], k) for k, v in sorted(p["spectrometers"].items())]
    rows = []
    for label, sigma, s in s_curves(specs, cal, int(p["s_curve_points"])):
        rows.extend((label, a, b) for a, b in zip(sigma, s))
    write_csv(out / "s_curves.csv", ["instrument", "sigma", "s"], rows)
    write_csv(out / "s_factor.csv", ["instrument", "s"], [("PuDTAI", s_pudtai_closed_form(cal))])
    return ["compare.csv", "s_curves.csv", "s_factor.csv"]


RUNNERS = {
    "synthesize": _run_synthesize,
    "pipeline": _run_pipeline,
    "probabilities": _run_probabilities,
    "fisher": _run_fisher,
    "estimate": _run_estimate,
    "bootstrap": _run_bootstrap,
    "sweep": _run_sweep,
    "compare": _run_compare,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


_BUILDERS = {
    "signal": _signal,
    "grid": _grid,
    "processor": _processor,
    "calibration": _calibration,
    "qmti": _qmti,
}


def _error_path(block: str, tree, message: str) -> str:
    # validators name the offending field first
    if isinstance(tree, dict):
        for key in sorted(tree, key=len, reverse=True):
            if message.startswith(key):
                return f"{block}.{key}"
    return block


def validate(cfg: RunConfig) -> None:
    """Build every domain object the mode needs; map failures to ConfigError."""
    for block in MODE_BLOCKS[cfg.mode]:
        builder = _BUILDERS.get(block)
        if builder is None:
            continue
        try:
            builder(cfg.params)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc), _error_path(block, cfg.params.get(block), str(exc))) from exc
    if cfg.mode == "compare":
        for name, v in cfg.params["spectrometers"].items():
            try:
                SpectrometerSpec(v["sigma_rl"], v["sigma_bwl"], name)
            except ValueError as exc:
                raise ConfigError(str(exc), f"spectrometers.{name}") from exc


def run(cfg: RunConfig, verbose_stages: bool = False) -> list[Path]:
    """Execute ``cfg`` and write CSV files plus manifest.json. Returns written paths."""
    validate(cfg)
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    files = RUNNERS[cfg.mode](cfg, out, verbose_stages)
    manifest = {
        "library": "pudtai",
        "version": __version__,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "verbose_stages": verbose_stages,
        "order_efficiency": ORDER_EFFICIENCY,
        "config": cfg.to_dict(),
        "files": {name: _sha256(out / name) for name in files},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return [out / f for f in files] + [out / "manifest.json"]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pudtai", description="Two-line super-resolution spectroscopy simulator.")
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--mode", help=f"override the configured mode ({', '.join(MODES)})")
    ap.add_argument("--seed", type=int, help="64-bit RNG seed")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--verbose-stages", action="store_true", help="dump per-stage pipeline fields")
    return ap


def _apply_overrides(data: dict, extras: list[str]) -> None:
    i = 0
    while i < len(extras):
        tok = extras[i]
        if not tok.startswith("--") or len(tok) < 3:
            raise ConfigError(f"unexpected argument '{tok}'", tok)
        body = tok[2:]
        if "=" in body:
            key, raw = body.split("=", 1)
        else:
            if i + 1 >= len(extras):
                raise ConfigError(f"override '{tok}' has no value", body)
            key, raw = body, extras[i + 1]
            i += 1
        i += 1
        value = parse_value(raw)
        if key in ("mode", "seed", "output_path"):
            data[key] = value
            continue
        if key.startswith("params."):
            key = key[len("params.") :]
        set_path(data.setdefault("params", {}), key, value)


def main(argv=None) -> int:
    ap = build_parser()
    args, extras = ap.parse_known_args(argv)
    try:
        data = {}
        if args.config:
            try:
                data = json.loads(Path(args.config).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}", "config") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON: {exc}", "config") from exc
            if not isinstance(data, dict):
                raise ConfigError("configuration must be a JSON object")
        _apply_overrides(data, extras)
        if args.mode:
            data["mode"] = args.mode
        if args.seed is not None:
            data["seed"] = args.seed
        if args.out:
            data["output_path"] = args.out
        cfg = RunConfig.from_dict(data)
        written = run(cfg, args.verbose_stages)
    except ConfigError as exc:
        print(json.dumps(exc.report()), file=sys.stderr)
        return 2
    except ValueError as exc:
        print(json.dumps({"error": {"type": "ValueError", "path": "", "message": str(exc)}}), file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
