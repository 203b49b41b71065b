"""The same workflow through the command-line interface.

Writes an experiment config, runs it (`driftlab run`), re-audits the
saved split manifest (`driftlab audit`), and reshapes the artifacts for
plotting (`driftlab plotdata`) — all via the same entry point the shell
command uses. Outputs land in ./demo_run/.
"""

import json
from pathlib import Path

from driftlab.cli import main as driftlab


def run():
    out = Path("demo_run")
    out.mkdir(exist_ok=True)
    config = {
        "dataset": {
            "synthetic": {
                "months": 16,
                "samples_per_month": 120,
                "drift_velocity": 0.3,
                "family_churn": 0.2,
            }
        },
        "split": {
            "origin": "2014-01-01",
            "train_window": "8m",
            "test_window": "8m",
            "slot_width": "1m",
        },
        "ratios": {"sigma_hat": 0.10, "phi": 0.10, "delta": 0.10},
        "classifier": {"kind": "linear_sgd", "epochs": 25},
        "scenario": "realistic",
        "tuning": {"mu": 0.1, "target": "f1", "validation_fraction": 0.34},
        "delay": {"kind": "active_learning", "al_budget": [0.05, 0.25]},
        "seeds": [0, 1, 2],
        "output_dir": str(out / "artifacts"),
    }
    cfg_path = out / "experiment.json"
    cfg_path.write_text(json.dumps(config, indent=2))

    rc = driftlab(["run", "--config", str(cfg_path)])
    print(f"run -> exit {rc}")

    manifest = out / "artifacts" / "split_manifest_seed0.json"
    rc = driftlab(["audit", "--manifest", str(manifest), "--out", str(out / "audit.json")])
    print(f"audit -> exit {rc}  (report in {out / 'audit.json'})")

    rc = driftlab(["plotdata", "--run-dir", str(out / "artifacts")])
    print(f"plotdata -> exit {rc}")
    for p in sorted((out / "artifacts").glob("plot_*.csv")):
        print(f"  {p}")


if __name__ == "__main__":
    run()
