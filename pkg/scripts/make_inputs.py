#!/usr/bin/env python3
"""Write a set of sample inputs for the command-line runner into a directory."""

import argparse
import json
from pathlib import Path

import nulldist as nd
from nulldist.formats import save_distance_matrix_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dir", type=Path, default=Path("sample_inputs"))
    args = ap.parse_args()
    d = args.dir
    d.mkdir(parents=True, exist_ok=True)

    save_distance_matrix_csv(d / "fiber.csv", nd.path_space(41, 1.0))
    (d / "edges.csv").write_text(
        "src,dst,weight\n0,1,1.0\n1,2,1.0\n2,3,1.0\n3,0,1.0\n", encoding="utf-8"
    )
    (d / "cone.json").write_text(
        json.dumps(
            {
                "interval": [0.0, 1.0],
                "n_t": 40,
                "fiber": "fiber.csv",
                "warping": {"kind": "constant", "params": {"value": 1.0}},
            },
            indent=1,
        ),
        encoding="utf-8",
    )
    (d / "sequence.json").write_text(
        json.dumps(
            {
                "cone": "cone.json",
                "limit": {"kind": "constant", "params": {"value": 1.0}},
                "family": [
                    {"kind": "constant", "params": {"value": 1.1}},
                    {"kind": "constant", "params": {"value": 1.01}},
                ],
                "lower_bound": 0.9,
            },
            indent=1,
        ),
        encoding="utf-8",
    )
    (d / "curvature.json").write_text(
        json.dumps(
            {
                "interval": [0.0, 2.0],
                "n_t": 40,
                "fiber": "fiber.csv",
                "warping": {"kind": "constant", "params": {"value": 1.0}},
                "bound": 0.0,
                "direction": "lower",
                "n_triangles": 5,
                "n_probe": 4,
                "tol": 0.1,
                "seed": 7,
            },
            indent=1,
        ),
        encoding="utf-8",
    )
    for cmd, inputs, params in (
        ("nulldist", {"cone": "cone.json"}, {}),
        ("timesep", {"cone": "cone.json"}, {"sources": [[0, 0], [20, 20]]}),
        ("nullcurve", {"cone": "cone.json"}, {"p": [0, 0], "q": [0, 20]}),
        ("converge", {"scenario": "sequence.json"}, {}),
        ("curvature", {"experiment": "curvature.json"}, {}),
        ("net", {"space": "fiber.csv"}, {"eps": 0.25}),
        ("validate", {"space": "edges.csv"}, {}),
    ):
        (d / f"scenario_{cmd}.json").write_text(
            json.dumps(
                {"command": cmd, "inputs": inputs, "params": params, "seed": 1,
                 "output_dir": f"out_{cmd}"},
                indent=1,
            ),
            encoding="utf-8",
        )
    print(f"sample inputs in {d}")


if __name__ == "__main__":
    main()
