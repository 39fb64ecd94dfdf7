"""Command-line entry point.

Commands: genmaps (write a fault-map corpus), run (execute the injection
campaign), report (render CSV/SVG views from a results file), heatmap
(per-bit fault probability as CSV + PGM). Exit codes: 0 success, 1
usage/config error, 2 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import multiprocessing
import os
import sys
from pathlib import Path

from .cachesim import CacheGeometry
from .config import CampaignConfig, ConfigError, load_config
from .faultmap import (
    FaultMapFormatError,
    VOLTAGE_SWEEP_MV,
    generate_corpus,
    match_random_map,
    parse_fault_map,
    probability_heatmap,
    serialize_fault_map,
)
from .harness import (
    GoldenRunError,
    ResultsFormatError,
    canonical_order,
    format_quality,
    golden_run,
    records_from_csv,
    records_to_csv,
    run_experiment,
)
from .pgm import encode_pgm, scale_to_u8
from .report import write_reports
from .rng import substream
from .workloads import WorkloadConfig

INDEX_NAME = "index.csv"
INDEX_HEADER = "method,sram_id,voltage_mv,fault_count,path"

_METHOD_BY_TOKEN = {"hw": "HW_FI", "rnd": "RND_FI"}


class _Parser(argparse.ArgumentParser):
    # usage errors are exit code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="voltfi", description=__doc__)
    p.add_argument("--config", metavar="PATH", help="campaign config file")
    p.add_argument("--seed", type=int, metavar="U64", help="override corpus.seed")
    p.add_argument("--out", default="out", metavar="DIR", help="output directory (default: out)")
    p.add_argument("--jobs", type=int, metavar="N", help="override run.jobs (0 = all cores)")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("genmaps", help="generate the fault-map corpus")
    sub.add_parser("run", help="run the fault-injection campaign over the corpus")
    rp = sub.add_parser("report", help="render reports from a results CSV")
    rp.add_argument("results", nargs="?", help="results CSV (default: <out>/results.csv)")
    hp = sub.add_parser("heatmap", help="per-bit fault probability of a corpus")
    hp.add_argument("corpus", nargs="?", help="corpus directory (default: <out>)")
    hp.add_argument("--method", choices=("hw", "rnd", "all"), default="all")
    return p


# ---------------------------------------------------------------------------
# genmaps
# ---------------------------------------------------------------------------


def cmd_genmaps(cfg: CampaignConfig, out: Path) -> None:
    maps_dir = out / "maps"
    maps_dir.mkdir(parents=True, exist_ok=True)
    corpus = generate_corpus(cfg.n_srams, cfg.corpus_params(), cfg.seed)
    n_voltages = len(VOLTAGE_SWEEP_MV)
    index = [INDEX_HEADER]
    for i in range(cfg.n_srams):
        sram_maps = corpus[i * n_voltages:(i + 1) * n_voltages]
        sram_dir = maps_dir / sram_maps[0].sram_id
        sram_dir.mkdir(exist_ok=True)
        for vidx, hw in enumerate(sram_maps):
            rel = f"maps/{hw.sram_id}/hw_{hw.voltage_mv}.fm"
            (out / rel).write_bytes(serialize_fault_map(hw).encode("utf-8"))
            index.append(f"hw,{hw.sram_id},{hw.voltage_mv},{hw.fault_count},{rel}")
            if hw.fault_count:
                rnd = match_random_map(hw, substream(cfg.seed, 1, i, vidx))
                rel = f"maps/{hw.sram_id}/rnd_{hw.voltage_mv}.fm"
                (out / rel).write_bytes(serialize_fault_map(rnd).encode("utf-8"))
                index.append(f"rnd,{rnd.sram_id},{rnd.voltage_mv},{rnd.fault_count},{rel}")
    (out / INDEX_NAME).write_bytes(("\n".join(index) + "\n").encode("utf-8"))
    print(f"wrote {len(index) - 1} maps under {out}")


def read_index(out: Path) -> list[dict]:
    text = (out / INDEX_NAME).read_text(encoding="utf-8")
    lines = text.strip("\n").split("\n")
    if not lines or lines[0] != INDEX_HEADER:
        raise RuntimeError(f"bad corpus index header in {out / INDEX_NAME}")
    entries = []
    for line in lines[1:]:
        method, sram_id, voltage, count, path = line.split(",")
        entries.append({
            "method": method,
            "sram_id": sram_id,
            "voltage_mv": int(voltage),
            "fault_count": int(count),
            "path": path,
        })
    return entries


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

_WORKER: dict = {}


def _init_worker(out: str, geometry: CacheGeometry, workload_seed: int, step_budget: int) -> None:
    _WORKER.update(out=Path(out), geometry=geometry, workload_seed=workload_seed,
                   step_budget=step_budget, goldens={})


def _run_task(task: tuple[str, str, str]):
    benchmark, method, rel_path = task
    wcfg = WorkloadConfig(benchmark, seed=_WORKER["workload_seed"],
                          step_budget=_WORKER["step_budget"])
    golden = _WORKER["goldens"].get(benchmark)
    if golden is None:
        golden = golden_run(benchmark, wcfg, _WORKER["geometry"])
        _WORKER["goldens"][benchmark] = golden
    fmap = parse_fault_map((_WORKER["out"] / rel_path).read_text(encoding="utf-8"))
    return run_experiment(benchmark, wcfg, fmap, method, golden, _WORKER["geometry"])


def cmd_run(cfg: CampaignConfig, out: Path) -> None:
    entries = read_index(out)
    voltages = set(cfg.voltages)
    tasks = []
    for e in entries:
        method = _METHOD_BY_TOKEN[e["method"]]
        # only maps that manifest errors are simulated
        if e["fault_count"] < 1 or method not in cfg.methods or e["voltage_mv"] not in voltages:
            continue
        for benchmark in cfg.benchmarks:
            tasks.append((benchmark, method, e["path"]))
    jobs = cfg.jobs if cfg.jobs > 0 else (os.cpu_count() or 1)
    init_args = (str(out), cfg.cache_geometry(), cfg.workload_seed, cfg.step_budget)
    if jobs == 1 or len(tasks) < 2:
        _init_worker(*init_args)
        records = [_run_task(t) for t in tasks]
    else:
        with multiprocessing.Pool(jobs, initializer=_init_worker, initargs=init_args) as pool:
            records = list(pool.imap_unordered(_run_task, tasks, chunksize=8))
    (out / "results.csv").write_bytes(records_to_csv(canonical_order(records)).encode("utf-8"))
    print(f"ran {len(records)} experiments -> {out / 'results.csv'}")


# ---------------------------------------------------------------------------
# report / heatmap
# ---------------------------------------------------------------------------


def cmd_report(results_path: Path, out: Path) -> None:
    records = records_from_csv(results_path.read_text(encoding="utf-8"))
    if not records:
        raise RuntimeError(f"no experiment records in {results_path}")
    names = write_reports(records, out / "report")
    print(f"wrote {', '.join(names)} under {out / 'report'}")


def cmd_heatmap(corpus_dir: Path, out: Path, method: str) -> None:
    entries = read_index(corpus_dir)
    maps = []
    for e in entries:
        if method != "all" and e["method"] != method:
            continue
        maps.append(parse_fault_map((corpus_dir / e["path"]).read_text(encoding="utf-8")))
    if not maps:
        raise RuntimeError(f"no {method} maps found in {corpus_dir}")
    matrix = probability_heatmap(maps)
    rows = [",".join(format_quality(v) for v in row) for row in matrix]
    out.mkdir(parents=True, exist_ok=True)
    (out / f"heatmap_{method}.csv").write_bytes(("\n".join(rows) + "\n").encode("utf-8"))
    (out / f"heatmap_{method}.pgm").write_bytes(encode_pgm(scale_to_u8(matrix)))
    print(f"wrote heatmap_{method}.csv and heatmap_{method}.pgm under {out}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = load_config(args.config, seed=args.seed, jobs=args.jobs)
        if args.command == "genmaps":
            cmd_genmaps(cfg, out)
        elif args.command == "run":
            cmd_run(cfg, out)
        elif args.command == "report":
            cmd_report(Path(args.results) if args.results else out / "results.csv", out)
        else:
            cmd_heatmap(Path(args.corpus) if args.corpus else out, out, args.method)
    except ConfigError as e:
        print(f"voltfi: config error: {e}", file=sys.stderr)
        return 1
    except (OSError, RuntimeError, FaultMapFormatError, ResultsFormatError, ValueError) as e:
        print(f"voltfi: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
