"""Multi-energy system flexibility optimisation."""

import json as _json

from ._core import (
    FlexoptError,
    annuity_factor,
    context_names,
    export_mps,
    metrics,
    run_study_json,
    scenario_names,
    synth,
)

__all__ = [
    "FlexoptError",
    "annuity_factor",
    "context_names",
    "export_mps",
    "metrics",
    "run_study",
    "scenario_names",
    "synth",
]


def run_study(dataset=None, synth_seed=None, horizon=168, contexts=(), scenarios=(), mip_gap=0.0, jobs=1):
    """Solve the selected cells and return the study as a dict."""
    text = run_study_json(dataset=None if dataset is None else str(dataset), synth_seed=synth_seed,
                          horizon=horizon, contexts=list(contexts), scenarios=list(scenarios),
                          mip_gap=mip_gap, jobs=jobs)
    return _json.loads(text)
