#!/usr/bin/env python3
"""Regenerate the bundled two-block demo dataset (data/demo/).

Thirty batches of a synthetic production process: a block of process
conditions and a block of end-product quality measures, tied together by
two latent factors plus noise. Values are rounded so the files stay diff-
friendly; the seed is fixed so the files are reproducible.
"""

from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "data" / "demo"
N = 30
SEED = 20240


def main():
    rng = np.random.default_rng(SEED)
    latent = rng.standard_normal((N, 2))

    process = np.column_stack([
        60 + 8 * latent[:, 0] + rng.normal(0, 1.5, N),          # temperature
        4 + 0.6 * latent[:, 0] - 0.3 * latent[:, 1] + rng.normal(0, 0.2, N),  # pressure
        12 - 2 * latent[:, 1] + rng.normal(0, 0.8, N),          # flow
        7 + 0.4 * latent[:, 0] + 0.5 * latent[:, 1] + rng.normal(0, 0.3, N),  # ph
        1.5 + 0.2 * latent[:, 1] + rng.normal(0, 0.1, N),       # catalyst
    ])
    quality = np.column_stack([
        240 + 25 * latent[:, 0] + rng.normal(0, 6, N),          # strength
        95 + 2 * latent[:, 0] + 1.5 * latent[:, 1] + rng.normal(0, 0.8, N),  # purity
        82 - 4 * latent[:, 1] + rng.normal(0, 1.5, N),          # yield
        0.8 - 0.15 * latent[:, 0] + rng.normal(0, 0.08, N),     # haze
    ])

    OUT.mkdir(parents=True, exist_ok=True)
    _write(OUT / "process.csv", ["temperature", "pressure", "flow", "ph", "catalyst"], process)
    _write(OUT / "quality.csv", ["strength", "purity", "yield", "haze"], quality)
    print(f"wrote {OUT}/process.csv and {OUT}/quality.csv")


def _write(path: Path, columns, data):
    lines = ["batch," + ",".join(columns)]
    for i, row in enumerate(data, start=1):
        lines.append(f"B{i:02d}," + ",".join(f"{x:.4f}" for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
