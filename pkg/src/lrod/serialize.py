"""File formats: parameter JSON, loss-curve CSV/JSON and run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .completion import MARKOV, RANDOM, Params, technique_of
from .errors import DataError
from .forecast_markov import N_STATES, TransitionMatrix
from .forecast_random import RandomDefaultsParams
from .loss import LossCurve, McSummary

CURVE_COLUMNS = ("d", "loss", "loss_rate")
MC_COLUMNS = CURVE_COLUMNS + ("mean", "var", "ci_low", "ci_high")


def _num(v) -> str:
    # repr round-trips floats exactly, which keeps output digests stable.
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


# -- technique parameters ---------------------------------------------------

def params_to_dict(params: Params, sample: Optional[str] = None) -> dict:
    technique = technique_of(params)
    if technique == RANDOM:
        out = {"technique": RANDOM, "b": params.b}
        out["dist"] = None if not params.truncates else {
            "family": params.family, "params": list(params.dist_params)}
        if params.fit is not None:
            out["fit"] = {"log_likelihood": params.fit.log_likelihood, "aic": params.fit.aic,
                          "ks_statistic": params.fit.ks_statistic, "n": params.fit.n}
    else:
        out = {"technique": MARKOV, "states": N_STATES, "p": params.p.tolist(),
               "counts": params.counts.tolist()}
    if sample is not None:
        out["sample"] = sample
    return out


def params_from_dict(data: dict) -> Params:
    technique = data.get("technique")
    try:
        if technique == RANDOM:
            dist = data.get("dist")
            if not dist:
                return RandomDefaultsParams(float(data["b"]))
            return RandomDefaultsParams(float(data["b"]), dist["family"],
                                        tuple(float(v) for v in dist["params"]))
        if technique == MARKOV:
            if int(data.get("states", N_STATES)) != N_STATES:
                raise DataError(f"Markov parameters must have {N_STATES} states")
            return TransitionMatrix(np.array(data["p"], dtype=float), data.get("counts"))
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed {technique} parameter record: {exc}") from None
    raise DataError(f"unknown technique {technique!r} in parameter record")


def write_params(params: Params, path, sample: Optional[str] = None) -> Path:
    path = Path(path)
    path.write_text(json.dumps(params_to_dict(params, sample), indent=2) + "\n", encoding="utf-8")
    return path


def read_params(path):
    """Return ``(params, sample or None)``."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    return params_from_dict(data), data.get("sample")


def params_filename(technique: str, sample: str) -> str:
    return f"params_{technique}_{sample}.json"


# -- curves -----------------------------------------------------------------

def _write_rows(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])
    return path


def write_curve_csv(curve: LossCurve, path) -> Path:
    return _write_rows(path, CURVE_COLUMNS, curve.rows())


def write_mc_csv(summary: McSummary, path) -> Path:
    return _write_rows(path, MC_COLUMNS, summary.rows())


def read_curve_csv(path) -> dict:
    """Columns of a curve CSV as float arrays keyed by header name."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return {}
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def curve_to_dict(curve: LossCurve) -> dict:
    return {"label": curve.label, "thresholds": list(curve.thresholds),
            "losses": curve.losses.tolist(), "loss_rates": curve.loss_rates.tolist(),
            "denominator": curve.denominator, "minimum_loss": curve.minimum_loss,
            "optimal_threshold": curve.optimal_threshold}


def mc_to_dict(summary: McSummary) -> dict:
    return {"n_trials": summary.n_trials, "thresholds": list(summary.thresholds),
            "mean": summary.mean.tolist(), "var": summary.var.tolist(),
            "ci_low": summary.ci_low.tolist(), "ci_high": summary.ci_high.tolist(),
            "mean_loss": summary.mean_loss.tolist(), "denominator": summary.denominator,
            "minimum_mean": summary.minimum_mean, "optimal_threshold": summary.optimal_threshold}


def write_json(data, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return path


# -- manifests --------------------------------------------------------------

def file_digest(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def inputs_digest(paths) -> str:
    """One sha256 over the named inputs' contents, in the given order."""
    h = hashlib.sha256()
    for p in paths:
        if p is None:
            continue
        h.update(file_digest(p).encode("ascii"))
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: Optional[str]
    seed: Optional[int]
    input_digest: str
    outputs: list = field(default_factory=list)
    version: str = ""
    wall_clock_seconds: float = 0.0
    arguments: dict = field(default_factory=dict)

    def write(self, path) -> Path:
        return write_json({
            "command": self.command, "config": self.config, "seed": self.seed,
            "input_digest": self.input_digest, "outputs": [str(o) for o in self.outputs],
            "output_digests": {str(o): file_digest(o) for o in self.outputs},
            "version": self.version, "wall_clock_seconds": self.wall_clock_seconds,
            "arguments": self.arguments,
        }, path)
