"""CSV and JSON artifact writers.

Floats are written with ``repr`` so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from importlib import resources
from pathlib import Path

SCHEMAS = ("certificate_report", "coupling_report", "simulation_summary", "consistency_summary")


def _fmt(x):
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (list, tuple)):
        return ";".join(str(v) for v in x)
    if hasattr(x, "item"):
        return _fmt(x.item())
    return str(x)


def write_csv(path: Path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_json(path: Path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n")
    return path


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def load_schema(name: str) -> dict:
    return json.loads(resources.files("cmjtrees").joinpath("schemas", f"{name}.schema.json").read_text())


# -- specific artifacts -------------------------------------------------------

def genealogy_csv(path, g):
    deg = g.out_degree.tolist()
    rows = ((i, int(p), float(t), deg[i]) for i, (p, t) in enumerate(zip(g.parent.tolist(), g.birth_time.tolist())))
    return write_csv(path, ["id", "parent", "birth_time", "out_degree_final"], rows)


def trajectory_csv(path, trajectory):
    return write_csv(path, ["n", "tau_n"], trajectory)


def tree_csv(path, tree):
    return write_csv(path, ["id", "parent"], enumerate(tree.parent.tolist()))


def diagnostics_csv(path, diag):
    rows = [(n, d, h) for (n, d), (_, h) in zip(diag.max_degree_trajectory, diag.height_trajectory)]
    return write_csv(path, ["n", "max_degree", "height"], rows)


def probe_csv(path, probe):
    return write_csv(path, ["horizon", "probability", "se", "N", "reps"],
                     [(T, p, se, probe.N, probe.reps) for T, p, se in probe.rows()])


def evidence_csv(path, report):
    rows = [(e.name, e.index if e.index is not None else "", e.value, e.threshold, e.holds)
            for e in report.evidence]
    return write_csv(path, ["name", "index", "value", "threshold", "holds"], rows)


def window_csv(path, table):
    return write_csv(path, ["n", "exact", "asymptotic", "ratio"], table.rows)


COUNTEREXAMPLE_COLUMNS = [
    "i", "M_log2", "M_exceeds_4_pow_i2", "S0_bound_log2", "S0_target_log2", "S1_gamma_log2",
    "S1_stated_log2", "markov_set_size", "D", "D_bound", "stated_product_log2",
    "combined_mid_log2", "combined_final_log2", "sharp_product_log2", "main_product_log2",
    "main_product_combined_log2", "main_target_log2",
]


def counterexample_csv(path, report):
    return write_csv(path, COUNTEREXAMPLE_COLUMNS,
                     ([r[c] for c in COUNTEREXAMPLE_COLUMNS] for r in report.rows))
