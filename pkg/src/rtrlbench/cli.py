"""Command-line entry point: ``rtrlbench {run,search,sweep,repeat,report}``.

Exit codes: 0 success, 2 configuration error, 3 divergence or failed validation.
"""
from __future__ import annotations

import argparse
import logging
import re
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np
import yaml

from . import experiment, stats
from .agents import AGENT_IDS
from .config import ALGORITHMS, load_configs, save_configs
from .errors import ConfigurationError, DivergenceError, NoDataError
from .hypersearch import sample_configs
from .records import read_run
from .tasks import TASKS

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 2, 3
log = logging.getLogger("rtrlbench")


def _pick_config(path, index: int):
    if path is None:
        return None
    configs = load_configs(path)
    if not 0 <= index < len(configs):
        raise ConfigurationError(f"{path} holds {len(configs)} configs; index {index} is out of range")
    return configs[index]


def _device_params(path):
    if path is None:
        return None
    with open(path) as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: device parameters must be a mapping")
    return doc


def cmd_run(args) -> int:
    config = _pick_config(args.config, args.index)
    out = args.out or Path("runs") / f"{args.task}_{args.agent}_s{args.seed}.ndjson"
    rec = experiment.run_experiment(
        args.task, args.agent, config, env_seed=args.seed, init_seed=args.init_seed,
        steps=args.steps, preset=args.preset, log_path=out, clock=args.clock,
        device_params=_device_params(args.device_params))
    print(f"{args.task} {args.agent}: {len(rec.episodes)} episodes, {rec.total_steps} steps, "
          f"average return {stats.average_return(rec):.5f}")
    print(f"log written to {out}")
    return EXIT_OK


def cmd_search(args) -> int:
    configs = sample_configs(args.algorithm, args.count, args.seed)
    manifest = {"algorithm": args.algorithm, "count": args.count, "master_seed": args.seed}
    save_configs(args.out, configs, manifest)
    print(f"wrote {len(configs)} {args.algorithm} configs to {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    configs = load_configs(args.configs)
    if args.limit is not None:
        configs = configs[:args.limit]
    paths = experiment.sweep(args.task, configs, args.out, seeds=args.seeds, steps=args.steps,
                             preset=args.preset, workers=args.workers)
    print(f"{len(paths)} runs written under {args.out}")
    return EXIT_OK


def cmd_repeat(args) -> int:
    config = _pick_config(args.config, args.index)
    if config is None and args.agent in experiment.DEFAULT_CONFIGS:
        config = experiment.default_config(args.agent)
    tasks = list(TASKS) if args.task == "all" else [args.task]
    ok = True
    for task in tasks:
        report = experiment.repeatability_experiment(
            task, args.agent, config, seed=args.seed, count=args.count, steps=args.steps,
            clock=args.clock)
        print(report.summary())
        ok = ok and report.identical
    return EXIT_OK if ok else EXIT_DIVERGED


def _collect(paths) -> list:
    files = []
    for p in map(Path, paths):
        files.extend(sorted(p.glob("*.ndjson")) if p.is_dir() else [p])
    if not files:
        raise NoDataError("no run logs found")
    return files


_CONFIG_INDEX = re.compile(r"^c(\d+)_s\d+$")


def _per_config_returns(directory) -> dict:
    """Average return per config index, averaged over seeds, from a sweep directory."""
    by_config = defaultdict(list)
    for f in _collect([directory]):
        m = _CONFIG_INDEX.match(f.stem)
        if m:
            by_config[int(m.group(1))].append(stats.average_return(read_run(f)))
    return {k: float(np.mean(v)) for k, v in sorted(by_config.items())}


def build_report(run_paths, bins: int = stats.DEFAULT_BINS, bin_steps=None,
                 correlate=None) -> tuple:
    """Report text and per-group learning-curve CSVs (``{name: csv_text}``)."""
    files = _collect(run_paths)
    runs = [read_run(f) for f in files]
    lines = ["# runs", "file\ttask\tagent\tepisodes\tsteps\taverage_return"]
    groups = defaultdict(list)
    for f, r in zip(files, runs):
        lines.append(f"{f.name}\t{r.task_id}\t{r.agent_id}\t{len(r.episodes)}\t{r.total_steps}\t"
                     f"{stats.average_return(r):.6f}")
        groups[(r.task_id, r.agent_id)].append(r)
    curves = {}
    for (task, agent), members in sorted(groups.items()):
        avg = [stats.average_return(r) for r in members]
        lines.append("")
        lines.append(f"# {task} / {agent}: {len(members)} runs")
        if len(avg) >= 4:
            s = stats.tukey_summary(avg)
            lines.append(f"median {s.median:.6f}  Q1 {s.q1:.6f}  Q3 {s.q3:.6f}  "
                         f"whiskers [{s.whisker_lo:.6f}, {s.whisker_hi:.6f}]  "
                         f"outliers {[round(o, 6) for o in s.outliers]}")
        if len(members) >= 2:
            curve = stats.learning_curve(members, bin_steps, bins)
            rows = ["end_step,mean,stderr,carried_forward"]
            rows += [f"{e},{m:.6f},{se:.6f},{int(fl)}" for e, m, se, fl in curve.rows()]
            curves[f"curve_{task}_{agent}"] = "\n".join(rows) + "\n"
            lines.append(f"learning curve: {len(curve.edges)} bins -> curve_{task}_{agent}.csv")
    if correlate:
        a, b = (_per_config_returns(d) for d in correlate)
        common = sorted(set(a) & set(b))
        lines.append("")
        lines.append(f"# correlation {correlate[0]} vs {correlate[1]} over {len(common)} configs")
        for method in ("pearson", "spearman"):
            r, p = stats.cross_task_correlation([a[k] for k in common], [b[k] for k in common],
                                                method)
            lines.append(f"{method}: r = {r:.6f}, p = {p:.6g}")
    return "\n".join(lines) + "\n", curves


def _render_svg(csv_text: str, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.loadtxt(csv_text.splitlines()[1:], delimiter=",", ndmin=2)
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.plot(data[:, 0], data[:, 1])
    ax.fill_between(data[:, 0], data[:, 1] - data[:, 2], data[:, 1] + data[:, 2], alpha=0.3)
    ax.set_xlabel("steps")
    ax.set_ylabel("episodic return")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_report(args) -> int:
    text, curves = build_report(args.runs, args.bins, args.bin_steps, args.correlate)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text)
        for name, csv_text in curves.items():
            (out / f"{name}.csv").write_text(csv_text)
            if args.svg:
                _render_svg(csv_text, out / f"{name}.svg")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rtrlbench", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, task_all=False):
        p.add_argument("--task", required=True,
                       choices=list(TASKS) + (["all"] if task_all else []))
        p.add_argument("--agent", required=True, choices=AGENT_IDS)
        p.add_argument("--config", type=Path, help="YAML config file (one config or a list)")
        p.add_argument("--index", type=int, default=0, help="which config in a list file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--clock", choices=("virtual", "wall"), default="virtual")

    p = sub.add_parser("run", help="run one agent on one task and log every episode")
    common(p)
    p.add_argument("--init-seed", type=int, help="network init seed (default: the config's)")
    p.add_argument("--steps", type=int)
    p.add_argument("--preset", choices=sorted(experiment.PRESETS), default="full")
    p.add_argument("--device-params", type=Path, help="YAML device parameter overrides")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("search", help="sample a reproducible set of configs")
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sweep", help="run every config of a config file")
    p.add_argument("--task", required=True, choices=list(TASKS))
    p.add_argument("--configs", type=Path, required=True)
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--steps", type=int)
    p.add_argument("--preset", choices=sorted(experiment.PRESETS), default="full")
    p.add_argument("--limit", type=int, help="only the first N configs")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("repeat", help="identical-seed repeatability check")
    common(p, task_all=True)
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--steps", type=int, default=2000)
    p.set_defaults(func=cmd_repeat)

    p = sub.add_parser("report", help="statistics, learning curves and correlations from logs")
    p.add_argument("runs", nargs="+", help="run logs or directories of logs")
    p.add_argument("--bins", type=int, default=stats.DEFAULT_BINS)
    p.add_argument("--bin-steps", type=int)
    p.add_argument("--correlate", nargs=2, metavar=("SWEEP_A", "SWEEP_B"))
    p.add_argument("--out", type=Path, help="directory for report.txt and curve CSVs")
    p.add_argument("--svg", action="store_true", help="also render curves as SVG")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, NoDataError, FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
