"""Run the polynomial hull enumeration and report each accepted set."""

import argparse
import json
from dataclasses import dataclass

from specsci import hausdorff
from specsci.hulls import hull_enumeration
from specsci.operators import load_spec, section


@dataclass
class Config:
    op: str = "operators/diag14.json"
    steps: int = 4
    budget: int = 10_000
    state: str = "hull_state.json"


def main(cfg: Config):
    spec = load_spec(cfg.op)
    state = hull_enumeration(spec, cfg.steps, cfg.budget)
    eig = None
    if spec.finite:
        import numpy as np

        eig = np.linalg.eigvals(section(spec, spec.dim).entries)
    for m, entry in enumerate(state.accepted):
        line = f"K_{m + 1}: index {entry['index']}, p = {state.poly(m)}, ||p(a)|| = {state.norm(m).value:.6g}"
        if eig is not None:
            line += f", d_H to spectrum {hausdorff(state.sample(m), eig):.4g}"
        print(line)
    print(f"status {state.status}, indices spent {state.budget_spent['indices']}")
    with open(cfg.state, "w") as fh:
        json.dump(state.to_json(), fh)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for k, v in vars(Config()).items():
        ap.add_argument(f"--{k}", type=type(v), default=v)
    main(Config(**vars(ap.parse_args())))
