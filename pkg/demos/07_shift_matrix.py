"""
Distribution-shift harness
==========================

The robustness question: a model trained on one generation method (or one
function family) is tested on another. This demo fakes the "model" with the
reference solutions themselves, so the matrix shape and plumbing are visible
without any training: rows = training distribution, columns = test
distribution, each cell an accuracy report.
"""

import json
import tempfile
from pathlib import Path

from symforge import generate_samples, preset_profile, shift_matrix
from symforge.datafiles import write_dataset

workdir = Path(tempfile.mkdtemp(prefix="symforge_shift_"))
profiles = {
    "poly": preset_profile("poly").with_ops_range(1, 5),
    "trig": preset_profile("trig").with_ops_range(1, 5),
    "log": preset_profile("log").with_ops_range(1, 5),
}

# one bwd test set per type-dominant profile, plus an echo "model" per row
for tag, profile in profiles.items():
    pairs = generate_samples("bwd", profile, 30, seed=5)
    write_dataset(workdir / f"ref_{tag}.tsv", pairs)
    (workdir / f"pred_{tag}.txt").write_text(
        "\n".join(" ".join(p.solution) for p in pairs) + "\n"
    )

cells = [
    (train, test, workdir / f"pred_{test}.txt", workdir / f"ref_{test}.tsv", "bwd")
    for train in profiles
    for test in profiles
]
matrix = shift_matrix(cells)

print("rows (train):", matrix["rows"])
print("cols (test): ", matrix["cols"])
for train in matrix["rows"]:
    row = [f"{matrix['cells'][train][test]['accuracy']:6.1f}" for test in matrix["cols"]]
    print(f"  {train:5s} {' '.join(row)}")
print()
print("full cell record:", json.dumps(matrix["cells"]["poly"]["trig"], indent=2))
