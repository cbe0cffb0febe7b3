"""Monte Carlo sweeps over one scenario parameter, paired across architectures.

Every (grid value, architecture) cell runs the same trials, and trial ``i``
draws its channels from the same stream for every architecture, so the
curves compare architectures on identical realizations. Results are reduced
in index order, so the output does not depend on worker scheduling.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .ao import AoStatus, ao_run, is_feasible
from .channel import draw_channels
from .config import Architecture, ConfigError, Scenario, dbm_to_watt, scenario_from_mapping

log = logging.getLogger(__name__)

CSV_HEADER = ["arch", "param", "value", "mean_min_ee", "stderr", "trials", "failures"]
TRIAL_HEADER = ["arch", "param", "value", "trial", "min_ee", "min_rate", "status", "iterations", "failed", "channels"]
SWEEP_PARAMS = ("P_t", "P_t_dBm", "P_risn", "P_risn_dBm", "N", "P", "P_dB")
ALL_ARCHS = (Architecture.NORIS, Architecture.LPD, Architecture.GPD, Architecture.GPBD)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def code_digest() -> str:
    """SHA-256 over this package's source files, to tie results to the code that made them."""
    h = hashlib.sha256()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()


@dataclass(frozen=True)
class SweepSpec:
    param: str
    grid: tuple
    architectures: tuple = ALL_ARCHS
    trials: int = 50
    base: Scenario = field(default_factory=Scenario)
    out: Path | None = None

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ConfigError(f"cannot sweep {self.param!r}; choose one of {', '.join(SWEEP_PARAMS)}", "param")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ConfigError("sweep grid is empty", "grid")
        if list(grid) != sorted(grid):
            raise ConfigError("sweep grid must be sorted ascending", "grid")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "architectures", tuple(Architecture.parse(a) for a in self.architectures))
        if int(self.trials) < 1:
            raise ConfigError("trials must be >= 1", "trials")
        object.__setattr__(self, "trials", int(self.trials))

    def scenario(self, value: float, arch: Architecture) -> Scenario:
        v = int(value) if self.param == "N" else value
        return scenario_from_mapping({self.param: v}, self.base).replace(architecture=arch)


@dataclass
class TrialOutcome:
    min_ee: float
    min_rate: float
    rates: list
    status: str
    iterations: int
    failed: bool
    channels: str  # channel digest, the pairing evidence
    error: str = ""


@dataclass
class CellResult:
    arch: Architecture
    value: float
    mean_min_ee: float
    stderr: float
    successes: int
    failures: int
    mean_rates: list


@dataclass
class SweepResult:
    param: str
    grid: tuple
    architectures: tuple
    trials: int
    cells: list  # CellResult, grid-major then architecture order
    outcomes: dict  # (arch value, grid index, trial) -> TrialOutcome
    provenance: dict
    elapsed: float = field(default=math.nan, compare=False)  # wall seconds, kept out of the CSVs

    def cell(self, arch, value: float) -> CellResult:
        arch = Architecture.parse(arch)
        for c in self.cells:
            if c.arch is arch and c.value == value:
                return c
        raise KeyError((arch, value))

    def means(self, arch) -> np.ndarray:
        arch = Architecture.parse(arch)
        return np.array([self.cell(arch, v).mean_min_ee for v in self.grid])

    def trial_values(self, arch, value: float) -> np.ndarray:
        """Per-trial min-EE of one cell (NaN where the trial failed)."""
        arch = Architecture.parse(arch)
        i = self.grid.index(value)
        out = [self.outcomes[(arch.value, i, t)] for t in range(self.trials)]
        return np.array([np.nan if o.failed else o.min_ee for o in out])


def run_trial(s: Scenario, trial: int) -> TrialOutcome:
    """One AO run; any error is captured as a failed outcome."""
    try:
        cs = draw_channels(s, trial)
        digest = cs.digest()
    except Exception as exc:  # noqa: BLE001 - recorded, never aborts a sweep
        return TrialOutcome(math.nan, math.nan, [], "error", 0, True, "", repr(exc))
    try:
        state, rep = ao_run(cs, s)
    except Exception as exc:  # noqa: BLE001
        log.warning("trial %d (%s) failed: %r", trial, s.architecture.value, exc)
        return TrialOutcome(math.nan, math.nan, [], "error", 0, True, digest, repr(exc))
    failed = state.status is AoStatus.INFEASIBLE or not is_feasible(cs, state.psi, state.W, s, s.architecture, s.feas_tol)
    return TrialOutcome(float(rep.min_ee), float(np.min(rep.rates)), [float(r) for r in rep.rates],
                        state.status.value, state.iteration, bool(failed), digest)


def _task(args):
    key, s, trial = args
    return key, run_trial(s, trial)


def _ris_free(s: Scenario) -> Scenario:
    """Scenario with the RIS power constants zeroed; NoRIS results do not depend on them."""
    return s.replace(P_ris0=0.0, P_risn=0.0)


def aggregate(values: Sequence[float]) -> tuple[float, float]:
    """Two-pass mean and standard error of the mean (NaN when undefined)."""
    x = [float(v) for v in values]
    n = len(x)
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(x) / n
    if n < 2:
        return mean, math.nan
    var = math.fsum((v - mean) ** 2 for v in x) / (n - 1)
    return mean, math.sqrt(var / n)


def run_sweep(spec: SweepSpec, workers: int = 1, progress=None) -> SweepResult:
    """Run every (grid value, architecture, trial) and reduce per cell."""
    started = time.time()
    jobs = {}  # task key -> (scenario, trial)
    cell_keys = {}  # (arch value, grid index, trial) -> task key
    for i, value in enumerate(spec.grid):
        for arch in spec.architectures:
            s = spec.scenario(value, arch)
            # NoRIS does not see the RIS power constants: share those runs across such grids
            task_s = _ris_free(s) if arch is Architecture.NORIS else s
            for t in range(spec.trials):
                key = (task_s, t)
                jobs.setdefault(key, (task_s, t))
                cell_keys[(arch.value, i, t)] = key

    results = {}
    todo = [(key, s, t) for key, (s, t) in jobs.items()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for done, (key, outcome) in enumerate(pool.map(_task, todo, chunksize=1), 1):
                results[key] = outcome
                if progress:
                    progress(done, len(todo))
    else:
        for done, args in enumerate(todo, 1):
            key, outcome = _task(args)
            results[key] = outcome
            if progress:
                progress(done, len(todo))

    outcomes = {ck: results[key] for ck, key in cell_keys.items()}
    for i in range(len(spec.grid)):
        for t in range(spec.trials):
            digests = {outcomes[(a.value, i, t)].channels for a in spec.architectures} - {""}
            if len(digests) > 1:
                raise RuntimeError(f"architectures saw different channels at grid index {i}, trial {t}")
    cells = []
    for i, value in enumerate(spec.grid):
        for arch in spec.architectures:
            outs = [outcomes[(arch.value, i, t)] for t in range(spec.trials)]
            ok = [o for o in outs if not o.failed]
            mean, se = aggregate([o.min_ee for o in ok])
            mean_rates = np.mean([o.rates for o in ok], axis=0).tolist() if ok else []
            cells.append(CellResult(arch, value, mean, se, len(ok), len(outs) - len(ok), mean_rates))
    provenance = {
        "seed": spec.base.seed,
        "param": spec.param,
        "grid": list(spec.grid),
        "architectures": [a.value for a in spec.architectures],
        "trials": spec.trials,
        "code_version": __version__,
        "code_digest": code_digest(),
        "base_scenario": spec.base.to_dict(),
    }
    elapsed = time.time() - started
    log.info("sweep %s finished: %d runs in %.1f s", spec.param, len(todo), elapsed)
    return SweepResult(spec.param, spec.grid, spec.architectures, spec.trials, cells, outcomes, provenance, elapsed)


# --- presets -----------------------------------------------------------------------

def preset(name: str, trials: int = 50, base: Scenario | None = None) -> SweepSpec:
    """Figure presets: ``fig1`` sweeps P_t in W, ``fig2`` sweeps P_risn in dBm."""
    base = base or Scenario()
    common = dict(K=5, L=5, P=10.0)
    if name == "fig1":
        b = base.replace(N=20, P_risn=dbm_to_watt(1.0), **common)
        return SweepSpec("P_t", tuple(float(v) for v in range(1, 11)), ALL_ARCHS, trials, b)
    if name == "fig2":
        b = base.replace(N=40, P_t=3.0, **common)
        return SweepSpec("P_risn_dBm", tuple(float(v) for v in range(-10, 21, 5)), ALL_ARCHS, trials, b)
    raise ConfigError(f"unknown preset {name!r}; expected fig1 or fig2", "preset")


# --- output ------------------------------------------------------------------------

PLOT_SCRIPT = '''"""Plot mean max-min EE per architecture from {csv_name}.

Usage: python {script_name} [output.png]
"""
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open({csv_name!r}, newline="")))
fig, ax = plt.subplots(figsize=(6, 4))
for arch in {archs!r}:
    pts = sorted((float(r["value"]), float(r["mean_min_ee"]), float(r["stderr"]))
                 for r in rows if r["arch"] == arch)
    if not pts:
        continue
    x, y, e = zip(*pts)
    ax.errorbar(x, y, yerr=[0 if v != v else v for v in e], marker="o", capsize=3, label=arch)
ax.set_xlabel({xlabel!r})
ax.set_ylabel("average max-min EE (bit/J/use)")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else {png_name!r}, dpi=150)
'''

_XLABELS = {"P_t": "P_t (W)", "P_t_dBm": "P_t (dBm)", "P_risn": "P_RIS,n (W)", "P_risn_dBm": "P_RIS,n (dBm)",
            "N": "N", "P": "P", "P_dB": "P (dB)"}


def write_csv(result: SweepResult, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for c in result.cells:
            w.writerow([c.arch.value, result.param, _fmt(c.value), _fmt(c.mean_min_ee), _fmt(c.stderr),
                        c.successes, c.failures])


def write_trials_csv(result: SweepResult, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_HEADER)
        for i, value in enumerate(result.grid):
            for arch in result.architectures:
                for t in range(result.trials):
                    o = result.outcomes[(arch.value, i, t)]
                    w.writerow([arch.value, result.param, _fmt(value), t, _fmt(o.min_ee), _fmt(o.min_rate),
                                o.status, o.iterations, int(o.failed), o.channels])


def emit(result: SweepResult, out_dir, stem: str = "sweep") -> dict:
    """Write the summary CSV, per-trial CSV, provenance JSON and a plotting script."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / f"{stem}.csv",
        "trials": out / f"{stem}_trials.csv",
        "provenance": out / f"{stem}.json",
        "plot": out / f"plot_{stem}.py",
    }
    write_csv(result, paths["csv"])
    write_trials_csv(result, paths["trials"])
    prov = dict(result.provenance)
    prov["elapsed_seconds"] = result.elapsed
    prov["mean_rates"] = {f"{c.arch.value}@{_fmt(c.value)}": c.mean_rates for c in result.cells}
    paths["provenance"].write_text(json.dumps(prov, indent=2, sort_keys=True) + "\n")
    paths["plot"].write_text(PLOT_SCRIPT.format(
        csv_name=paths["csv"].name, script_name=paths["plot"].name, png_name=f"{stem}.png",
        archs=[a.value for a in result.architectures], xlabel=_XLABELS.get(result.param, result.param)))
    return paths


def read_csv(path) -> list[dict]:
    """Parse a summary CSV back into typed rows."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for r in reader:
            rows.append({
                "arch": Architecture.parse(r["arch"]),
                "param": r["param"],
                "value": float(r["value"]),
                "mean_min_ee": float(r["mean_min_ee"]),
                "stderr": float(r["stderr"]),
                "trials": int(r["trials"]),
                "failures": int(r["failures"]),
            })
    return rows


def read_trials_csv(path) -> list[dict]:
    """Parse a per-trial CSV back into typed rows."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRIAL_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for r in reader:
            rows.append({
                "arch": Architecture.parse(r["arch"]),
                "param": r["param"],
                "value": float(r["value"]),
                "trial": int(r["trial"]),
                "min_ee": float(r["min_ee"]),
                "min_rate": float(r["min_rate"]),
                "status": r["status"],
                "iterations": int(r["iterations"]),
                "failed": bool(int(r["failed"])),
                "channels": r["channels"],
            })
    return rows
