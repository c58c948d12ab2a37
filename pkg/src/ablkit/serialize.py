"""File formats: scenario JSON, scan CSV, and JSON summaries/reports.

Complex numbers are written as ``[re, im]`` pairs. All floats are rounded to
9 significant digits on output.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .abl import TwoState
from .errors import AblkitError, ParseError, ValidationError
from .hilbert import StateVector
from .scenarios import DichotomicSetting

SIG_DIGITS = 9


def fmt(x) -> Optional[float]:
    """Round to 9 significant digits; non-finite values become None."""
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def fmt_str(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else f"{x:.{SIG_DIGITS}g}"


def complex_to_json(v) -> list:
    return [[fmt(z.real), fmt(z.imag)] for z in np.asarray(v, dtype=np.complex128)]


def _parse_vector(raw, name):
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"{name}: expected a non-empty list of [re, im] pairs")
    out = []
    for entry in raw:
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            out.append(complex(entry))
        elif (isinstance(entry, list) and len(entry) == 2
              and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                      for x in entry)):
            out.append(complex(entry[0], entry[1]))
        else:
            raise ParseError(f"{name}: malformed amplitude {entry!r}")
    return np.array(out, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    two_state: TwoState
    settings: tuple
    labels: tuple = ()

    @property
    def dim(self) -> int:
        return self.two_state.dim


def parse_scenario(data) -> ScenarioFile:
    """Build a scenario from decoded JSON. Vectors are normalized on load."""
    if not isinstance(data, dict):
        raise ParseError("scenario must be a JSON object")
    for key in ("dim", "pre", "post", "settings"):
        if key not in data:
            raise ParseError(f"missing key {key!r}")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ParseError("dim must be an integer")
    if not isinstance(data["settings"], list):
        raise ParseError("settings must be a list")
    pre = _parse_vector(data["pre"], "pre")
    post = _parse_vector(data["post"], "post")
    vectors = []
    for i, s in enumerate(data["settings"]):
        if not isinstance(s, dict) or "vector" not in s:
            raise ParseError(f"settings[{i}] must be an object with a 'vector'")
        vectors.append(_parse_vector(s["vector"], f"settings[{i}].vector"))
    labels = data.get("labels", [])
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise ParseError("labels must be a list of strings")

    for name, v in [("pre", pre), ("post", post)] + [
            (f"settings[{i}]", v) for i, v in enumerate(vectors)]:
        if v.shape[0] != dim:
            raise ValidationError(f"{name} has length {v.shape[0]}, expected dim {dim}")
    try:
        ts = TwoState(StateVector(pre), StateVector(post))
        settings = tuple(DichotomicSetting.from_vector(v) for v in vectors)
    except AblkitError as exc:
        raise ValidationError(str(exc)) from exc
    if labels and len(labels) != len(settings):
        raise ValidationError("labels must match settings one-to-one")
    return ScenarioFile(ts, settings, tuple(labels))


def load_scenario(path) -> ScenarioFile:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_scenario(data)


def scenario_dict(pre, post, vectors: Sequence, labels: Sequence[str] = ()) -> dict:
    pre = np.asarray(pre, dtype=np.complex128)
    out = {
        "dim": int(pre.shape[0]),
        "pre": complex_to_json(pre),
        "post": complex_to_json(post),
        "settings": [{"vector": complex_to_json(v)} for v in vectors],
    }
    if labels:
        out["labels"] = list(labels)
    return out


def instance_scenario(inst, pre, post) -> dict:
    """A cycle instance as a scenario file (unnormalized vectors kept)."""
    vectors = inst.vectors or [np.linalg.eigh(p.matrix)[1][:, -1] for p in inst.projectors]
    return scenario_dict(pre, post, vectors, [f"P{i}" for i in range(inst.n)])


def scan_header(n: int, phases: bool = False) -> list:
    cols = ["theta", "phi"]
    if phases:
        cols += ["alpha", "beta"]
    return cols + [f"zeta{i}" for i in range(n)] + ["k", "exclusive", "defined"]


def write_scan_csv(scan, path) -> None:
    phases = scan.has_phases
    n = scan.zetas.shape[1]
    lines = [",".join(scan_header(n, phases))]
    for i in range(len(scan)):
        row = [fmt_str(scan.theta[i]), fmt_str(scan.phi[i])]
        if phases:
            row += [fmt_str(scan.alpha[i]), fmt_str(scan.beta[i])]
        row += [fmt_str(z) for z in scan.zetas[i]]
        row += [fmt_str(scan.k[i]), str(int(scan.exclusive[i])),
                str(int(scan.defined[i]))]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def scan_summary(scan, best, thresholds: Sequence[float], n: int) -> dict:
    from .cycles import noncontextual_bound
    from .scan import region_mask
    return {
        "n": n,
        "theta_steps": scan.grid.theta_steps,
        "phi_steps": scan.grid.phi_steps,
        "phase_steps": scan.grid.phase_steps,
        "cells": len(scan),
        "defined_cells": int(scan.defined.sum()),
        "feasible_cells": int(scan.feasible.sum()),
        "noncontextual_bound": noncontextual_bound(n),
        "grid_k_max": fmt(best.grid_k),
        "k_star": fmt(best.k_star),
        "theta_star": fmt(best.theta_star),
        "phi_star": fmt(best.phi_star),
        "zetas_star": [fmt(z) for z in best.zetas],
        "region_counts": [{"k_min": fmt(t), "count": int(region_mask(scan, t).sum())}
                          for t in thresholds],
    }


def report_dicts(report) -> list:
    return [{"outcome": r.outcome, "zeta": fmt(r.zeta), "freq": fmt(r.freq),
             "se": fmt(r.se), "sigma_distance": fmt(r.sigma_distance),
             "flag": bool(r.flag)} for r in report]


def write_witness_csv(witnesses, path, labels=("zeta_i", "zeta_j")) -> None:
    lines = [",".join(["theta", "phi", *labels, "sum"])]
    for w in witnesses:
        lines.append(",".join(fmt_str(x) for x in
                              (w.theta, w.phi, w.zeta1, w.zeta2, w.zeta1 + w.zeta2)))
    Path(path).write_text("\n".join(lines) + "\n")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def load_schema(name: str) -> dict:
    """One of the JSON schemas shipped in ``ablkit/schemas``."""
    from importlib.resources import files
    return json.loads(files("ablkit").joinpath("schemas", f"{name}.schema.json").read_text())
