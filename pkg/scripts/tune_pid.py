"""Grid-search PID gains for the DXL tasks and write them to the package data file.

    python3 scripts/tune_pid.py [--episodes 20] [--out src/rtrlbench/data/pid_gains.yaml]
"""
import argparse
from pathlib import Path

import yaml

from rtrlbench.agents.scripted import tune_pid

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "rtrlbench" / "data" / "pid_gains.yaml"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    table = {}
    for task_id in ("dxl-reacher", "dxl-tracker"):
        gains, score = tune_pid(task_id, episodes=args.episodes, seed=args.seed)
        print(f"{task_id}: {gains} average return {score:.5f}")
        table[task_id] = gains
    header = "# written by scripts/tune_pid.py (grid search on the simulated devices)\n"
    args.out.write_text(header + yaml.safe_dump(table, sort_keys=True))


if __name__ == "__main__":
    main()
