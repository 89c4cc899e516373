#!/usr/bin/env python3
"""Total consumed power versus antenna and small-cell counts.

Runs one n_sca sweep per BS antenna count and writes per-trial records plus
grouped summaries under out/.  The summaries show the two headline trends:
total power falls when small cells are added and when BS antennas are added,
with the multiflow fraction staying small.

    python3 scripts/sweep_topology.py --trials 100 --out out/topology
"""

import argparse
import pathlib
import sys
from dataclasses import replace

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from softcell.cli import desk_config
from softcell.simulate import SweepSpec, records_csv, run_sweep, summary_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-bs", default="8,16,24", help="comma-separated BS antenna counts")
    parser.add_argument("--n-sca", default="0,1,2", help="comma-separated SCA antenna counts")
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=101)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="out/topology", help="output directory")
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    values = tuple(int(v) for v in args.n_sca.split(","))
    for n_bs in (int(v) for v in args.n_bs.split(",")):
        base = replace(desk_config(seed=args.seed), n_bs=n_bs)
        spec = SweepSpec(axis="n_sca", values=values, trials=args.trials,
                         algorithms=("optimal",), base=base)
        records, summary = run_sweep(spec, workers=args.workers)
        (out / f"records_nbs{n_bs}.csv").write_text(records_csv(records))
        (out / f"summary_nbs{n_bs}.csv").write_text(summary_csv(summary))
        print(f"n_bs={n_bs}:")
        for row in summary:
            print(f"  n_sca={row['axis_value']}: mean {row['mean_total_dbm']:.2f} dBm "
                  f"(std {row['std_total_dbm']:.2f}, feasible {row['n_feasible']}/{row['n_trials']}, "
                  f"multiflow {row['multiflow_fraction']:.3f})")
    print(f"wrote per-trial records and summaries to {out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
