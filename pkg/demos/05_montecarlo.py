# Monte Carlo over random Ornstein towers, through the same entry point the CLI uses.

import tempfile

from stacklab.experiment import ExperimentConfig, run_experiment

config = ExperimentConfig.from_dict({
    "experiment": "montecarlo",
    "spec": {"K": 12, "p": 4, "t": {"power": 2}},
    "eps": "1/50",
    "window": [6, 12],
    "trials": 20,
    "master_seed": 1,
})

with tempfile.TemporaryDirectory() as out:
    manifest = run_experiment(config, out)
    by_end = manifest["summary"]["fraction_empty_by_end"]
    for k, v in by_end.items():
        print(f"window end {k}: fraction empty {v['exact']}")
    print("files:", manifest["files"])

# divergent vs convergent half-ranges for the +1 spacer step
for label, t, K in [("t = 2", 2, 50), ("t = 2^k", {"exp": 2}, 30)]:
    cfg = ExperimentConfig.from_dict(
        {"experiment": "chacon-scan", "spec": {"K": K, "p": 4, "t": t}, "trials": 100, "master_seed": 1}
    )
    with tempfile.TemporaryDirectory() as out:
        frac = run_experiment(cfg, out)["summary"]["fraction_with_pattern"]
    print(f"{label}: fraction with pattern {frac['display']}")
