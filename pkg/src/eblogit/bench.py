"""Experiment orchestration: named scenario presets, seeded replication
loops with optional process-level parallelism, method comparison, and
result serialization.

Per-replication seeds are derived from (master seed, scenario id,
replication index), so results do not depend on the worker count or on
scheduling order.
"""

from __future__ import annotations

import json
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cavi import CaviConfig, run_cavi
from .dataset import Dataset, SimScenario, generate_design, sample_response
from .glm import Configuration
from .mcmc import ChainConfig, mh_run
from .metrics import confusion, d_distance, fdr, mcc, tnr, tpr
from .pilot import fit_l1_logistic, jitter_zeros
from .posterior import HyperParams

METHODS = ("ebvi", "ebmcmc", "pilot")

_TIMING_KEYS = ("wall_time_s", "pilot_time_s", "time_mean_s")


def _table2_cells():
    cells = {}
    for p in (200, 400):
        for s in (4, 8):
            for r, tag in ((0.0, "r0"), (0.2, "r02")):
                cells[f"table2_p{p}_s{s}_{tag}"] = SimScenario(
                    n=100, p=p, s=s, signal=3.0, design="ar1", r=r)
    return cells


def _dtable_cells():
    cells = {}
    for n, p, s, amp in ((100, 200, 4, 3), (100, 200, 6, 3), (100, 200, 4, 6), (200, 400, 4, 3)):
        cells[f"dtable_n{n}_p{p}_s{s}_A{amp}"] = SimScenario(
            n=n, p=p, s=s, signal=float(amp), design="iid", sigma=1.0)
    return cells


PRESETS: dict[str, SimScenario] = {
    "test1": SimScenario(n=250, p=500, s=5, signal=4.0, design="iid", sigma=0.25),
    "test2": SimScenario(n=250, p=500, s=10, signal=6.0, design="iid", sigma=2.0),
    "test3": SimScenario(n=250, p=500, s=15, signal=(-2.0, 2.0), design="iid", sigma=0.5),
    "test4": SimScenario(n=2500, p=5000, s=25, signal=2.0, design="iid", sigma=0.5),
    "test5": SimScenario(n=2500, p=5000, s=10, signal=(-1.0, 1.0), design="iid", sigma=1.0),
    **_table2_cells(),
    **_dtable_cells(),
}


def resolve_scenario(scenario: str | SimScenario) -> SimScenario:
    if isinstance(scenario, SimScenario):
        return scenario
    try:
        return PRESETS[scenario]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario!r}; presets: {', '.join(sorted(PRESETS))}") from None


def scenario_id(scenario: str | SimScenario) -> str:
    if isinstance(scenario, str):
        return scenario
    sig = scenario.signal
    amp = f"U({sig[0]},{sig[1]})" if isinstance(sig, tuple) else f"{sig}"
    return (f"inline_n{scenario.n}_p{scenario.p}_s{scenario.s}_A{amp}"
            f"_{scenario.design}_sigma{scenario.sigma}_r{scenario.r}")


def replication_seed(master_seed: int, scenario_key: str, rep: int) -> np.random.SeedSequence:
    """Deterministic per-replication seed, independent of scheduling."""
    return np.random.SeedSequence(
        [int(master_seed), zlib.crc32(scenario_key.encode()), int(rep)]
    )


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str | SimScenario
    methods: tuple[str, ...] = ("ebvi",)
    replications: int = 1
    seed: int = 0
    hyper: HyperParams = field(default_factory=HyperParams)
    cavi: CaviConfig = field(default_factory=CaviConfig)
    chain: ChainConfig = field(default_factory=ChainConfig)
    workers: int | None = None  # None = available parallelism
    pilot_folds: int = 5
    jitter_scale: float = 0.01

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        methods = tuple(self.methods)
        if not methods:
            raise ValueError("at least one method is required")
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        object.__setattr__(self, "methods", methods)
        resolve_scenario(self.scenario)  # fail fast on unknown presets

    def spec_dict(self) -> dict:
        scen = resolve_scenario(self.scenario)
        sig = scen.signal
        return {
            "scenario": scenario_id(self.scenario),
            "scenario_params": {
                "n": scen.n, "p": scen.p, "s": scen.s,
                "signal": list(sig) if isinstance(sig, tuple) else sig,
                "design": scen.design, "sigma": scen.sigma, "r": scen.r,
            },
            "methods": list(self.methods),
            "replications": self.replications,
            "seed": self.seed,
            "hyper": {"a": self.hyper.a, "gamma": self.hyper.gamma, "alpha": self.hyper.alpha},
            "cavi": {"epsilon": self.cavi.epsilon, "max_iter": self.cavi.max_iter,
                     "threshold": self.cavi.threshold},
            "chain": {"samples": self.chain.samples, "burn_in": self.chain.burn_in,
                      "smax": self.chain.smax},
            "pilot_folds": self.pilot_folds,
            "jitter_scale": self.jitter_scale,
        }


@dataclass
class RunResult:
    scenario: str
    spec: dict
    records: list[dict]
    aggregates: dict[str, dict]

    def to_json_dict(self, include_timings: bool = True) -> dict:
        out = {
            "scenario": self.scenario,
            "spec": self.spec,
            "records": self.records,
            "aggregates": self.aggregates,
        }
        if include_timings:
            return out
        return _strip_timings(out)

    def canonical_json(self) -> str:
        """Timing-free serialization; bit-identical across reruns and worker
        counts for a fixed seed."""
        return json.dumps(self.to_json_dict(include_timings=False), sort_keys=True)


def _strip_timings(obj):
    if isinstance(obj, dict):
        return {k: _strip_timings(v) for k, v in obj.items() if k not in _TIMING_KEYS}
    if isinstance(obj, list):
        return [_strip_timings(v) for v in obj]
    return obj


def _metric_block(sel: Configuration, s_star: Configuration, p: int) -> dict:
    c = confusion(sel, s_star, p)
    return {
        "selected": list(sel.indices),
        "confusion": {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn},
        "tpr": float(tpr(c)),
        "fdr": float(fdr(c)),
        "tnr": float(tnr(c)),
        "mcc": float(mcc(c)),
    }


def _replicate(spec: ExperimentSpec, rep: int) -> dict:
    scenario = resolve_scenario(spec.scenario)
    key = scenario_id(spec.scenario)
    ss = replication_seed(spec.seed, key, rep)
    design_ss, resp_ss, pilot_ss, jitter_ss, chain_ss = ss.spawn(5)
    record: dict = {"rep": rep, "methods": {}}
    try:
        x, beta_star, s_star = generate_design(scenario, np.random.default_rng(design_ss))
        y = sample_response(x, beta_star, np.random.default_rng(resp_ss))
        d = Dataset(x=x, y=y)
    except Exception as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
        return record
    record["s_star"] = list(s_star.indices)

    est = None
    pilot_time = 0.0
    if "ebvi" in spec.methods or "pilot" in spec.methods:
        try:
            t0 = time.perf_counter()
            est = fit_l1_logistic(d, folds=spec.pilot_folds, rng=np.random.default_rng(pilot_ss))
            pilot_time = time.perf_counter() - t0
        except Exception as exc:
            msg = f"{type(exc).__name__}: {exc}"
            for m in spec.methods:
                if m in ("ebvi", "pilot"):
                    record["methods"][m] = {"error": msg}

    for method in spec.methods:
        if method in record["methods"]:
            continue
        try:
            t0 = time.perf_counter()
            if method == "ebvi":
                bt = jitter_zeros(est, spec.jitter_scale, np.random.default_rng(jitter_ss))
                res = run_cavi(d, bt.beta_tilde, spec.cavi, spec.hyper)
                sel = res.selected(spec.cavi.threshold)
                entry = _metric_block(sel, s_star, d.p)
                entry.update({
                    "phi": [float(v) for v in res.phi],
                    "sweeps": res.sweeps,
                    "stopped_reason": res.stopped_reason,
                    "pilot_time_s": pilot_time,
                })
            elif method == "ebmcmc":
                cr = mh_run(d, spec.hyper, spec.chain, rng=np.random.default_rng(chain_ss))
                sel = Configuration.from_mask(cr.inclusion >= 0.5)
                entry = _metric_block(sel, s_star, d.p)
                entry.update({
                    "inclusion": [float(v) for v in cr.inclusion],
                    "accept_rate": float(cr.accept_rate),
                    "visited": int(cr.visited),
                })
            else:  # pilot: nonzero pattern before jitter
                sel = Configuration.from_mask(est.beta_tilde != 0)
                entry = _metric_block(sel, s_star, d.p)
                entry.update({"lambda_used": float(est.lambda_used)})
            wall = time.perf_counter() - t0
            if method == "ebvi":
                wall += pilot_time
            entry["wall_time_s"] = wall
        except Exception as exc:
            entry = {"error": f"{type(exc).__name__}: {exc}"}
        record["methods"][method] = entry
    return record


def _replicate_star(args) -> dict:
    return _replicate(*args)


def aggregate_records(records: list[dict], methods) -> dict:
    """Per-method means and standard deviations, recomputable from records."""
    out = {}
    for method in methods:
        entries = [
            r["methods"][method]
            for r in records
            if "error" not in r and method in r["methods"] and "error" not in r["methods"][method]
        ]
        if not entries:
            continue
        agg = {"rep_count": len(entries)}
        for name in ("tpr", "fdr", "tnr", "mcc"):
            vals = np.array([e[name] for e in entries])
            agg[f"{name}_mean"] = float(np.mean(vals))
            agg[f"{name}_sd"] = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        agg["time_mean_s"] = float(np.mean([e["wall_time_s"] for e in entries]))
        out[method] = agg
    return out


def run_experiment(spec: ExperimentSpec) -> RunResult:
    """Generate data, fit pilot, run the requested methods, and score each
    replication against the true support.  Failures are recorded per
    replication, never fatal."""
    tasks = [(spec, rep) for rep in range(spec.replications)]
    workers = spec.workers
    if workers is None:
        import os

        workers = os.cpu_count() or 1
    if workers <= 1 or spec.replications == 1:
        records = [_replicate(spec, rep) for rep in range(spec.replications)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_replicate_star, tasks))
    records.sort(key=lambda r: r["rep"])
    return RunResult(
        scenario=scenario_id(spec.scenario),
        spec=spec.spec_dict(),
        records=records,
        aggregates=aggregate_records(records, spec.methods),
    )


@dataclass
class CompareResult:
    d: float
    phi: np.ndarray        # R x p variational solutions
    inclusion: np.ndarray  # R x p chain inclusion estimates
    runs: RunResult

    def to_json_dict(self, include_timings: bool = True) -> dict:
        return {
            "D": float(self.d),
            "runs": self.runs.to_json_dict(include_timings=include_timings),
        }


def compare_vi_mcmc(spec: ExperimentSpec) -> CompareResult:
    """Run the variational sweep and the chain on identical data per
    replication and measure their root-mean-square gap."""
    if not {"ebvi", "ebmcmc"} <= set(spec.methods):
        raise ValueError("compare_vi_mcmc needs both 'ebvi' and 'ebmcmc' methods")
    result = run_experiment(spec)
    phi_rows = []
    inc_rows = []
    for rec in result.records:
        if "error" in rec:
            continue
        mv = rec["methods"]
        if "error" in mv.get("ebvi", {}) or "error" in mv.get("ebmcmc", {}):
            continue
        phi_rows.append(mv["ebvi"]["phi"])
        inc_rows.append(mv["ebmcmc"]["inclusion"])
    if not phi_rows:
        raise RuntimeError("no replication produced both a variational and a chain result")
    phi = np.asarray(phi_rows)
    inc = np.asarray(inc_rows)
    return CompareResult(d=d_distance(phi, inc), phi=phi, inclusion=inc, runs=result)


CSV_COLUMNS = [
    "scenario", "method", "rep_count",
    "tpr_mean", "tpr_sd", "fdr_mean", "fdr_sd",
    "tnr_mean", "tnr_sd", "mcc_mean", "mcc_sd",
    "time_mean_s",
]


def emit(result: RunResult, fmt: str, path) -> Path:
    """Write the aggregate CSV table or the full JSON detail.

    Output bytes are a pure function of the result contents.
    """
    path = Path(path)
    if fmt == "json":
        payload = json.dumps(result.to_json_dict(), sort_keys=True, indent=2)
        path.write_text(payload + "\n")
    elif fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for method in result.spec["methods"]:
            agg = result.aggregates.get(method)
            if agg is None:
                continue
            row = [result.scenario, method, str(agg["rep_count"])]
            row += [repr(agg[c]) for c in CSV_COLUMNS[3:]]
            lines.append(",".join(row))
        path.write_text("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")
    return path


def read_emitted_json(path) -> RunResult:
    """Round-trip loader for emit(..., 'json', ...)."""
    data = json.loads(Path(path).read_text())
    return RunResult(
        scenario=data["scenario"],
        spec=data["spec"],
        records=data["records"],
        aggregates=data["aggregates"],
    )
