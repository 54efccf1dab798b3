"""Run the default experiment over several master seeds and summarize weighted F1.

    python scripts/seed_sweep.py --seeds 0 1 2 3 4 --out runs/seeds

Prints one row per model with the reference F1, the per-seed values, their
mean/std, and whether every seed landed inside the acceptance band.
"""
import argparse
import statistics
from pathlib import Path

from attrition.config import default_config, load_config
from attrition.experiment import run_experiment
from attrition.learners.specs import DISPLAY_NAMES

REFERENCE_F1 = {
    "LogisticRegression": 0.78, "KNN": 0.71, "SVM": 0.82, "DecisionTree": 0.80,
    "RandomForest": 0.80, "AdaBoost": 0.79, "GradientBoost": 0.80,
}
BAND = 0.08


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="YAML config (default: bundled)")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--out", default="runs/seeds")
    args = ap.parse_args(argv)

    base = load_config(args.config) if args.config else default_config()
    f1 = {name: [] for name in base.learner_names()}
    for seed in args.seeds:
        manifest = run_experiment(base.replace(seed=seed), Path(args.out) / f"seed{seed}")
        for name in f1:
            f1[name].append(manifest["metrics"][name]["f1"])
        print(f"seed {seed}: done in {sum(manifest['timings'].values()):.1f}s", flush=True)

    head = f"{'Model':<22}{'ref':>6}" + "".join(f"{'s' + str(s):>8}" for s in args.seeds)
    print("\n" + head + f"{'mean':>8}{'std':>8}  in band")
    for name, vals in f1.items():
        ref = REFERENCE_F1.get(name)
        sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
        ok = "-" if ref is None else ("yes" if all(abs(v - ref) <= BAND for v in vals) else "NO")
        ref_s = f"{ref:>6.2f}" if ref is not None else f"{'-':>6}"
        print(f"{DISPLAY_NAMES[name]:<22}{ref_s}" + "".join(f"{v:>8.4f}" for v in vals)
              + f"{statistics.mean(vals):>8.4f}{sd:>8.4f}  {ok}")


if __name__ == "__main__":
    main()
