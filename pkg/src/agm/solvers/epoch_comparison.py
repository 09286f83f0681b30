"""With- versus without-replacement epoch comparison panels.

Each panel fixes a design matrix and a unit ``x_star``, starts from
``x_0 = 0`` and runs the same trial indices under both schemes, so trial
``t`` shares its noise draw between the two (a paired comparison).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..io import write_csv
from .iterative import SolverRun, make_instance, make_rows, run_igm, run_kaczmarz
from .sampling import WO, WR, SamplerConfig

__all__ = ["Panel", "PanelResult", "default_panels", "run_panel", "run_epoch_comparison",
           "LONG_HEADER", "SUMMARY_HEADER", "write_panel_csv"]

LONG_HEADER = ["iter", "trial", "scheme", "error"]
SUMMARY_HEADER = ["iter", "scheme", "median_error", "mean_error", "stderr"]


@dataclass(frozen=True)
class Panel:
    name: str
    method: str  # "kaczmarz" or "igm"
    rows: str
    n: int
    d: int
    rho: float = 0.0


@dataclass
class PanelResult:
    panel: Panel
    runs: dict[str, SolverRun] = field(default_factory=dict)

    def median_final(self, scheme: str) -> float:
        return float(np.nanmedian(self.runs[scheme].final_errors))

    @property
    def wo_not_worse(self) -> bool:
        return self.median_final(WO) <= self.median_final(WR)

    def to_dict(self) -> dict:
        return {
            "panel": self.panel.name,
            "n": self.panel.n,
            "d": self.panel.d,
            "median_final_wo": self.median_final(WO),
            "median_final_wr": self.median_final(WR),
            "wo_not_worse": self.wo_not_worse,
        }


def default_panels(d: int = 40, ns=(42, 80), rho: float = 0.01) -> list[Panel]:
    panels = []
    for n in ns:
        panels += [
            Panel(f"kaczmarz-harmonic-n{n}", "kaczmarz", "harmonic", n, d),
            Panel(f"igm-harmonic-n{n}", "igm", "harmonic", n, d, rho),
            Panel(f"kaczmarz-haar-n{n}", "kaczmarz", "haar", n, d),
        ]
    return panels


def run_panel(panel: Panel, trials: int, epochs: int, seed: int,
              gamma: float | None = None) -> PanelResult:
    rows = make_rows(panel.rows, panel.n, panel.d, seed)
    inst = make_instance(rows, panel.rho, seed)
    k = epochs * panel.n
    out = PanelResult(panel)
    for scheme in (WO, WR):
        sampler = SamplerConfig(scheme, seed)
        if panel.method == "kaczmarz":
            out.runs[scheme] = run_kaczmarz(inst, sampler, k, trials)
        else:
            out.runs[scheme] = run_igm(inst, sampler, k, trials, "constant", gamma)
    return out


def run_epoch_comparison(trials: int = 100, epochs: int = 3, seed: int = 0, full_size: bool = False,
                d: int | None = None, ns=None) -> list[PanelResult]:
    """All six panels; ``full_size`` uses ``d = 100``, ``n = 105, 200``."""
    if full_size:
        d, ns = 100, (105, 200)
    d = 40 if d is None else d
    ns = (42, 80) if ns is None else tuple(ns)
    return [run_panel(p, trials, epochs, seed) for p in default_panels(d, ns)]


def write_panel_csv(result: PanelResult, directory) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    long_path = directory / f"{result.panel.name}.csv"
    summary_path = directory / f"{result.panel.name}_summary.csv"
    write_csv(long_path, LONG_HEADER,
              (row for run in result.runs.values() for row in run.long_rows()))
    write_csv(summary_path, SUMMARY_HEADER,
              (row for run in result.runs.values() for row in run.summary_rows()))
    return long_path, summary_path
