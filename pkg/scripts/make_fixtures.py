"""Regenerate the bundled fixtures in src/todacurves/data."""

import json
from pathlib import Path

from todacurves import fixtures as fx
from todacurves.curve_io import dumps_curve

DATA = Path(__file__).resolve().parent.parent / "src" / "todacurves" / "data"

ELASTICA_SETS = {
    "elastic": {"a": 1.25, "b": 0.0, "c0": 0.0, "kappa0": 0.3, "kappa1": 0.5, "n": 80},
    "circle": {"a": 1.25, "b": 0.0, "c0": 0.0, "kappa0": 1.0, "kappa1": 1.0, "n": 40},
    "line": {"a": 1.25, "b": 0.0, "c0": 0.0, "kappa0": 0.0, "kappa1": 0.0, "n": 20},
    "generalized": {"a": 1.1, "b": 0.05, "c0": 0.02, "kappa0": 0.2, "kappa1": 0.4, "n": 60},
}

QUADRIC_SEED = {"gamma0": [1.0, 0.0, 0.0, 0.0], "gamma1": [0.3, 0.0, 1.0, 0.0],
                "u": [0.8, 0.0], "g": [1.0, 0.0], "n": 1000}


def main():
    DATA.mkdir(exist_ok=True)
    curves = {
        "octagon_plane": (fx.regular_polygon(8), None),
        "octagon_lift": (fx.regular_lift(8), None),
        "random8": (fx.random_arclength_curve(8, seed=0), {"seed": 0}),
        "toda6": (fx.toda_curve(6, seed=1), {"seed": 1}),
    }
    p = ELASTICA_SETS["elastic"]
    _, chain = fx.elastica_chain(p["a"], p["kappa0"], p["kappa1"], p["n"])
    curves["elastica_chain"] = (chain, dict(p))
    for name, (curve, meta) in curves.items():
        (DATA / f"{name}.json").write_text(dumps_curve(curve, meta))
    (DATA / "elastica_sets.json").write_text(json.dumps(ELASTICA_SETS, indent=1) + "\n")
    (DATA / "quadric_seed.json").write_text(json.dumps(QUADRIC_SEED, indent=1) + "\n")


if __name__ == "__main__":
    main()
