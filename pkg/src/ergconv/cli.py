"""Command-line front end.

Subcommands: analyze, iterate, spectrum, reproduce-paper.  Exit codes: 0 success,
1 configuration error, 2 resource guard tripped, 3 consistency violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import signal
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import limits
from .config import ClassifyParams, IterateParams, JobConfig, SpectrumParams, VagueParams, load_config
from .ergodicity import ClassifyOptions, EngineOptions, classify, cross_check, fixed_point_analysis
from .errors import ConfigError, ConsistencyError, ResourceError, StructuralError
from .groups import FINITE, FREE
from .measure import vague_probe
from .operator import ConvOperator, SupportedVector, iterate_cesaro, operator_norm
from .spectral import DualSampler, radius_estimate, spectrum2, square_spectrum_relation

log = logging.getLogger("ergconv")

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_CONSISTENCY = 0, 1, 2, 3
SIG_DIGITS = 10


def normalize(obj):
    """JSON-ready copy with floats rounded to 10 significant digits."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, (complex, np.complexfloating)):
        return [normalize(obj.real), normalize(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [normalize(v) for v in obj.tolist()]
    return obj


def dumps(obj) -> str:
    return json.dumps(normalize(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _ptag(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


def _vector_json(g, v: SupportedVector, limit: int = 64) -> list:
    items = sorted(v.entries.items(), key=lambda kv: g.sort_key(kv[0]))[:limit]
    return [{"element": g.to_json(x), "re": c.real, "im": c.imag} for x, c in items]


# ---- analyses ----------------------------------------------------------------------

def run_classify(cfg: JobConfig, params: ClassifyParams) -> dict:
    mu = cfg.measure
    out = {}
    problems = []
    for p in params.p:
        rep = classify(mu, p, ClassifyOptions())
        block = rep.to_json()
        if not math.isinf(p):
            fp = fixed_point_analysis(mu, p)
            block["fixed_points"] = {
                "kind": fp.kind,
                "reason": fp.reason,
                "witness": None if fp.witness is None else _vector_json(mu.group, fp.witness),
            }
        if params.cross_check:
            recs = cross_check(mu, p, rep, EngineOptions(horizon=params.horizon))
            block["cross_check"] = [r.to_json() for r in recs]
            problems += [f"p={_ptag(p)}: {r.verdict} {r.detail}" for r in recs if r.kind == "discrepancy"]
        out[_ptag(p)] = block
    return {"reports": out, "discrepancies": problems}


def run_iterate(cfg: JobConfig, params: IterateParams) -> dict:
    g, mu = cfg.group, cfg.measure
    tests = [SupportedVector.delta(g, g.parse(t)) for t in params.tests] or [SupportedVector.delta(g)]
    it = iterate_cesaro(ConvOperator(mu, params.p), tests, params.horizon, params.tol)
    traces = []
    for t in it.traces:
        traces.append({
            "n": t.n, "gap": t.gap, "power_norm_over_n": t.power_norm_over_n, "cesaro_norm": t.cesaro_norm,
            "verdict": t.verdict, "reason": t.reason, "fixed_point_is_zero": t.fixed_point_is_zero,
            "tail_bound": t.tail_bound,
        })
    lims = it.limit_vectors
    return {
        "p": params.p, "horizon": params.horizon, "tol": params.tol,
        "sot_converges": it.sot_converges, "fixed_point_is_zero": it.fixed_point_is_zero,
        "traces": traces,
        "limits": None if lims is None else [_vector_json(g, v) for v in lims],
        "_csv": it.csv_rows(),
    }


def run_spectrum(cfg: JobConfig, params: SpectrumParams, seed: int) -> dict:
    g, mu = cfg.group, cfg.measure
    out: dict = {}
    if g.kind == FREE:
        r = radius_estimate(mu, 2)
        out["radius"] = {"lo": r.lo, "hi": r.hi, "note": r.note}
        nrm = operator_norm(ConvOperator(mu, 2), "window_lower", window=params.window, seed=seed)
        out["norm2"] = {"lo": nrm.lo, "hi": nrm.hi, "note": nrm.note}
    else:
        sampler = DualSampler.for_group(g, params.grid, params.refine)
        rep = spectrum2(mu, sampler, samples=params.samples, tol=params.gap_tol)
        out["spectrum2"] = rep.to_json()
        if g.is_abelian:
            sq = square_spectrum_relation(mu, sampler)
            out["square"] = {"multiplicative_error": sq.multiplicative_error, "plus_one": sq.plus_one,
                             "minus_one": sq.minus_one, "symmetric": sq.symmetric}
        if rep.samples is not None:
            out["_samples"] = rep.samples
    norms = {}
    for p in params.norms:
        method = "exact_matrix" if g.kind == FINITE else "window_lower"
        nrm = operator_norm(ConvOperator(mu, p), method, window=params.window, seed=seed)
        norms[_ptag(p)] = {"lo": nrm.lo, "hi": nrm.hi, "method": nrm.method, "note": nrm.note}
    if norms:
        out["operator_norms"] = norms
    return out


def run_vague(cfg: JobConfig, params: VagueParams) -> dict:
    tr = vague_probe(cfg.measure, params.horizon, params.monitor, params.tol, monitor_radius=params.monitor_radius)
    g = cfg.group
    last = tr.records[-1] if tr.records else None
    return {
        "horizon": tr.horizon, "computed_horizon": tr.computed_horizon,
        "cesaro_bounded": tr.cesaro_bounded, "cesaro_bounded_witness": tr.cesaro_bounded_witness,
        "power_bounded": tr.power_bounded, "power_bounded_witness": tr.power_bounded_witness,
        "vague_limit": None if tr.vague_limit is None else tr.vague_limit.to_json(),
        "last_cesaro_norm": None if last is None else last.cesaro_norm,
        "monitored": [g.to_json(x) for x in tr.monitored],
        "note": tr.note,
    }


# ---- orchestration -----------------------------------------------------------------

@contextmanager
def time_guard(seconds: float):
    """Raise ResourceError when the wall-clock budget runs out (main thread only)."""
    if not hasattr(signal, "SIGALRM") or seconds <= 0:
        yield
        return

    def _fire(signum, frame):
        raise ResourceError(f"time guard of {seconds:g} s exceeded")

    old = signal.signal(signal.SIGALRM, _fire)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def run_job(cfg: JobConfig, only: str | None = None, threads: int = 1) -> dict:
    jobs = [(k, prm) for k, prm in cfg.analyses if only is None or k == only]
    if only is not None and not jobs:
        default = {"iterate": IterateParams(), "spectrum": SpectrumParams(), "classify": ClassifyParams(),
                   "vague": VagueParams()}[only]
        jobs = [(only, default)]

    def one(job):
        kind, prm = job
        if kind == "classify":
            return run_classify(cfg, prm)
        if kind == "iterate":
            return run_iterate(cfg, prm)
        if kind == "spectrum":
            return run_spectrum(cfg, prm, cfg.seed)
        return run_vague(cfg, prm)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, jobs))
    else:
        results = [one(j) for j in jobs]

    g, mu = cfg.group, cfg.measure
    report = {
        "inputs": {"group": g.to_json_spec() if g.kind != FINITE else cfg.group_block, "measure": mu.to_json(),
                   "measure_digest": mu.digest(), "seed": cfg.seed, "label": cfg.label},
        "analyses": [],
    }
    for (kind, _), res in zip(jobs, results):
        report["analyses"].append({"type": kind, "result": res})
        if kind == "classify" and "verdicts" not in report:
            first = next(iter(res["reports"].values()))
            report["verdicts"] = first["verdicts"]
            report["trace"] = first["trace"]
            report["facts"] = first["facts"]
    return report


def _write_outputs(report: dict, cfg: JobConfig, out_dir: Path) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    csv_rows, samples = [], None
    for a in report["analyses"]:
        res = a["result"]
        if "_csv" in res:
            csv_rows += res.pop("_csv")
        if "_samples" in res:
            samples = res.pop("_samples")
    jpath = out_dir / cfg.output.json
    jpath.write_text(dumps(report))
    written.append(jpath)
    if cfg.output.csv:
        cpath = out_dir / cfg.output.csv
        with cpath.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vector", "n", "gap", "powernorm_over_n"])
            for k, n, gap, pn in csv_rows:
                w.writerow([k, n, f"{gap:.10g}", f"{pn:.10g}"])
        written.append(cpath)
        if samples is not None:
            spath = cpath.with_name(cpath.stem + "_samples.csv")
            with spath.open("w", newline="") as fh:
                w = csv.writer(fh)
                d = samples.shape[1] - 1
                w.writerow((["t"] if d == 1 else [f"t{i + 1}" for i in range(d)]) + ["re", "im"])
                for row in samples:
                    w.writerow([f"{v.real:.10g}" for v in row[:-1]] + [f"{row[-1].real:.10g}", f"{row[-1].imag:.10g}"])
            written.append(spath)
    if cfg.output.svg:
        written.append(write_svg(cfg, out_dir / cfg.output.svg))
    return written


def write_svg(cfg: JobConfig, path: Path) -> Path:
    """The curve t -> mu^(e^{it}) against the unit circle and the point 1."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .spectral import transform_at, transform_grid

    g, mu = cfg.group, cfg.measure
    plt.rcParams["svg.hashsalt"] = "ergconv"
    fig, ax = plt.subplots(figsize=(5, 5))
    t = np.linspace(0, 2 * np.pi, 721)
    ax.plot(np.cos(t), np.sin(t), color="0.7", lw=0.8, label="unit circle")
    if g.kind == FREE:
        raise ConfigError("the transform plot needs an abelian group")
    if g.kind == FINITE:
        vals = transform_grid(mu, DualSampler.for_group(g))
        ax.plot(vals.real, vals.imag, "o", ms=4, label="mu^ on the dual")
    elif g.rank == 1:
        vals = transform_at(mu, t[:, None])
        ax.plot(vals.real, vals.imag, lw=1.2, label="mu^(e^{it})")
    else:
        vals = transform_grid(mu, DualSampler.for_group(g, 64))
        ax.plot(vals.real, vals.imag, ".", ms=1, label="mu^ on a torus grid")
    ax.plot([1], [0], "r*", ms=10, label="1")
    ax.set_aspect("equal")
    ax.legend(loc="lower left", fontsize=7)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


# ---- commands ------------------------------------------------------------------------

def _job_command(args, only: str | None) -> int:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        cfg.seed = args.seed
    mem = args.guard_mem_mb if args.guard_mem_mb is not None else cfg.guards.memory_mb
    if mem <= 0:
        raise ConfigError("--guard-mem-mb must be positive")
    with limits.atom_limit(limits.atoms_for_megabytes(mem)), time_guard(cfg.guards.time_s):
        report = run_job(cfg, only, max(1, args.threads))
    out_dir = Path(args.out or ".")
    for path in _write_outputs(report, cfg, out_dir):
        log.info("wrote %s", path)
    problems = [d for a in report["analyses"] if a["type"] == "classify" for d in a["result"]["discrepancies"]]
    if problems:
        for d in problems:
            print(f"discrepancy: {d}", file=sys.stderr)
        return EXIT_CONSISTENCY
    if "verdicts" in report:
        print(json.dumps(normalize(report["verdicts"]), sort_keys=True))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from .golden import format_table, rows

    rs = rows()
    print(format_table(rs))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "golden.json").write_text(dumps([r.to_json() for r in rs]))
    failed = [r.case for r in rs if not r.passed]
    print(f"{len(rs) - len(failed)}/{len(rs)} rows pass")
    return EXIT_OK if not failed else EXIT_CONSISTENCY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON job description")
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--threads", type=int, default=1, help="run analyses in parallel")
    common.add_argument("--guard-mem-mb", type=float, default=None, help="memory budget for exact expansions")
    common.add_argument("-v", "--verbose", action="store_true")
    ap = argparse.ArgumentParser(prog="ergconv", description="Ergodic properties of convolution operators on discrete groups")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="run every analysis in the config")
    sub.add_parser("iterate", parents=[common], help="run only the Cesaro iteration analyses")
    sub.add_parser("spectrum", parents=[common], help="run only the spectral analyses")
    sub.add_parser("reproduce-paper", parents=[common], help="recompute the worked examples")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "reproduce-paper":
            return cmd_reproduce(args)
        only = {"analyze": None, "iterate": "iterate", "spectrum": "spectrum"}[args.command]
        return _job_command(args, only)
    except (ConfigError, StructuralError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResourceError, MemoryError) as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConsistencyError as exc:
        print(f"consistency violation: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


if __name__ == "__main__":
    sys.exit(main())
