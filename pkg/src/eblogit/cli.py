"""Command-line front end.

Subcommands: fit (CSV in, variational selection out), mcmc, simulate,
compare, enumerate.  Every flag can also be supplied through a JSON config
file (--config) keyed by the flag's long name with dashes replaced by
underscores; explicit flags override the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import ExperimentSpec, compare_vi_mcmc, emit, run_experiment
from .cavi import CaviConfig, run_cavi, select_and_refit
from .dataset import load_csv, standardize
from .mcmc import ChainConfig, mh_run
from .pilot import fit_l1_logistic, jitter_zeros
from .posterior import HyperParams, enumerate_posterior


def _add_hyper_flags(sp):
    sp.add_argument("--a", type=float, default=None, help="model-size prior exponent (default 0.01)")
    sp.add_argument("--gamma", type=float, default=None, help="prior spread (default 0.1)")
    sp.add_argument("--alpha", type=float, default=None, help="likelihood discount in (0,1) (default 0.99)")


def _add_cavi_flags(sp):
    sp.add_argument("--epsilon", type=float, default=None, help="entropy stopping threshold (default 1e-5)")
    sp.add_argument("--max-iter", type=int, default=None, help="sweep cap (default 100)")
    sp.add_argument("--threshold", type=float, default=None, help="selection cutoff on phi (default 0.5)")


def _add_chain_flags(sp):
    sp.add_argument("--samples", type=int, default=None, help="post-burn-in chain samples (default 10000)")
    sp.add_argument("--burn-in", type=int, default=None, help="burn-in steps (default samples/5)")
    sp.add_argument("--smax", type=int, default=None, help="model-size cap (default min(n/2, 50))")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eblogit",
        description="Empirical-Bayes variable selection for high-dimensional logistic regression.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="variational selection on a CSV dataset")
    fit.add_argument("csv", help="input CSV with a header row")
    fit.add_argument("--response", default=None, help="name of the 0/1 response column")
    fit.add_argument("--beta-tilde", default=None,
                     help="file of p reals used as the plug-in estimator, bypassing the internal pilot")
    fit.add_argument("--standardize", action="store_true", default=None,
                     help="rescale columns to unit sample variance before fitting")
    fit.add_argument("--folds", type=int, default=None, help="pilot cross-validation folds (default 5)")
    fit.add_argument("--jitter-scale", type=float, default=None,
                     help="half-width of the uniform jitter for exact zeros (default 0.01)")
    fit.add_argument("--seed", type=int, default=None, help="seed for pilot folds and jitter (default 0)")
    _add_hyper_flags(fit)
    _add_cavi_flags(fit)
    fit.add_argument("--config", default=None, help="JSON file of flag defaults")
    fit.add_argument("--out", default=None, help="output JSON path (default: stdout)")

    mc = sub.add_parser("mcmc", help="Metropolis-Hastings over configurations on a CSV dataset")
    mc.add_argument("csv")
    mc.add_argument("--response", default=None)
    mc.add_argument("--standardize", action="store_true", default=None)
    mc.add_argument("--seed", type=int, default=None)
    _add_hyper_flags(mc)
    _add_chain_flags(mc)
    mc.add_argument("--config", default=None)
    mc.add_argument("--out", default=None)

    sim = sub.add_parser("simulate", help="replicated synthetic-data benchmark")
    sim.add_argument("--scenario", default=None, help="preset name, e.g. test1 or table2_p200_s4_r0")
    sim.add_argument("--methods", default=None, help="comma list from ebvi,ebmcmc,pilot (default ebvi)")
    sim.add_argument("--reps", type=int, default=None, help="replications (default 1)")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--workers", type=int, default=None, help="parallel workers (default: all cores)")
    sim.add_argument("--folds", type=int, default=None)
    sim.add_argument("--jitter-scale", type=float, default=None)
    _add_hyper_flags(sim)
    _add_cavi_flags(sim)
    _add_chain_flags(sim)
    sim.add_argument("--format", default=None, choices=["csv", "json"], help="output format (default json)")
    sim.add_argument("--config", default=None)
    sim.add_argument("--out", default=None)

    cmp_ = sub.add_parser("compare", help="distance between variational and chain solutions")
    cmp_.add_argument("--scenario", default=None)
    cmp_.add_argument("--reps", type=int, default=None)
    cmp_.add_argument("--seed", type=int, default=None)
    cmp_.add_argument("--workers", type=int, default=None)
    cmp_.add_argument("--folds", type=int, default=None)
    cmp_.add_argument("--jitter-scale", type=float, default=None)
    _add_hyper_flags(cmp_)
    _add_cavi_flags(cmp_)
    _add_chain_flags(cmp_)
    cmp_.add_argument("--config", default=None)
    cmp_.add_argument("--out", default=None)

    enum = sub.add_parser("enumerate", help="exact truncated posterior for small p")
    enum.add_argument("csv")
    enum.add_argument("--response", default=None)
    enum.add_argument("--standardize", action="store_true", default=None)
    enum.add_argument("--smax", type=int, default=None, help="enumeration size cap (default 3)")
    _add_hyper_flags(enum)
    enum.add_argument("--config", default=None)
    enum.add_argument("--out", default=None)

    return parser


_DEFAULTS = {
    "response": "y",
    "standardize": False,
    "beta_tilde": None,
    "folds": 5,
    "jitter_scale": 0.01,
    "seed": 0,
    "a": 0.01,
    "gamma": 0.1,
    "alpha": 0.99,
    "epsilon": 1e-5,
    "max_iter": 100,
    "threshold": 0.5,
    "samples": 10_000,
    "burn_in": None,
    "smax": None,
    "scenario": None,
    "methods": "ebvi",
    "reps": 1,
    "workers": None,
    "format": "json",
    "out": None,
}

# keys where None is a meaningful resolved value, not "unset"
_NULLABLE = {"burn_in", "smax", "workers", "out", "beta_tilde", "scenario"}


def _resolve_options(args: argparse.Namespace) -> dict:
    opts = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        loaded = json.loads(Path(config_path).read_text())
        if not isinstance(loaded, dict):
            raise ValueError(f"{config_path}: config must be a JSON object")
        for key, val in loaded.items():
            if key not in opts:
                raise ValueError(f"{config_path}: unknown config key {key!r}")
            opts[key] = val
    for key in opts:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


def _hyper(opts) -> HyperParams:
    return HyperParams(a=opts["a"], gamma=opts["gamma"], alpha=opts["alpha"])


def _cavi_cfg(opts) -> CaviConfig:
    return CaviConfig(epsilon=opts["epsilon"], max_iter=opts["max_iter"], threshold=opts["threshold"])


def _chain_cfg(opts) -> ChainConfig:
    return ChainConfig(samples=opts["samples"], burn_in=opts["burn_in"],
                       smax=opts["smax"], seed=opts["seed"])


def _load(args, opts):
    d = load_csv(args.csv, opts["response"])
    if opts["standardize"]:
        d = standardize(d)
    return d


def _write_out(payload: dict, out_path) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text)


def _cmd_fit(args) -> int:
    opts = _resolve_options(args)
    d = _load(args, opts)
    if opts["beta_tilde"]:
        bt = np.loadtxt(opts["beta_tilde"], dtype=np.float64).ravel()
        if bt.shape[0] != d.p:
            raise ValueError(f"--beta-tilde file has {bt.shape[0]} values, expected p={d.p}")
        source = "file"
    else:
        rng = np.random.default_rng(opts["seed"])
        est = fit_l1_logistic(d, folds=opts["folds"], rng=rng)
        est = jitter_zeros(est, scale=opts["jitter_scale"], rng=rng)
        bt = est.beta_tilde
        source = "pilot"
    res = run_cavi(d, bt, _cavi_cfg(opts), _hyper(opts))
    sel = select_and_refit(res.phi, d, opts["threshold"])
    payload = res.to_json_dict(opts["threshold"])
    payload["selected_names"] = [d.names[j] for j in sel.support.indices]
    payload["beta_tilde_source"] = source
    payload["refit"] = {
        "status": sel.status,
        "beta": None if sel.beta_refit is None else
        {d.names[j]: float(b) for j, b in zip(sel.support.indices, sel.beta_refit)},
    }
    _write_out(payload, opts["out"])
    return 0


def _cmd_mcmc(args) -> int:
    opts = _resolve_options(args)
    d = _load(args, opts)
    res = mh_run(d, _hyper(opts), _chain_cfg(opts))
    _write_out(res.to_json_dict(), opts["out"])
    return 0


def _cmd_enumerate(args) -> int:
    opts = _resolve_options(args)
    d = _load(args, opts)
    smax = opts["smax"] if opts["smax"] is not None else 3
    table = enumerate_posterior(d, _hyper(opts), smax)
    _write_out(table.to_json_dict(), opts["out"])
    return 0


def _spec_from_opts(opts, methods) -> ExperimentSpec:
    if not opts["scenario"]:
        raise ValueError("--scenario is required")
    return ExperimentSpec(
        scenario=opts["scenario"],
        methods=methods,
        replications=opts["reps"],
        seed=opts["seed"],
        hyper=_hyper(opts),
        cavi=_cavi_cfg(opts),
        chain=_chain_cfg(opts),
        workers=opts["workers"],
        pilot_folds=opts["folds"],
        jitter_scale=opts["jitter_scale"],
    )


def _cmd_simulate(args) -> int:
    opts = _resolve_options(args)
    methods = tuple(m.strip() for m in opts["methods"].split(",") if m.strip())
    spec = _spec_from_opts(opts, methods)
    result = run_experiment(spec)
    for method, agg in result.aggregates.items():
        sys.stderr.write(
            f"{result.scenario} {method}: reps={agg['rep_count']} "
            f"tpr={agg['tpr_mean']:.3f}+/-{agg['tpr_sd']:.3f} "
            f"fdr={agg['fdr_mean']:.3f}+/-{agg['fdr_sd']:.3f} "
            f"tnr={agg['tnr_mean']:.3f} mcc={agg['mcc_mean']:.3f} "
            f"time={agg['time_mean_s']:.2f}s\n"
        )
    if opts["out"] is None:
        _write_out(result.to_json_dict(), None)
    else:
        emit(result, opts["format"], opts["out"])
    return 0


def _cmd_compare(args) -> int:
    opts = _resolve_options(args)
    spec = _spec_from_opts(opts, ("ebvi", "ebmcmc"))
    res = compare_vi_mcmc(spec)
    sys.stderr.write(f"{spec.scenario} D={res.d:.4f} over {res.phi.shape[0]} replications\n")
    _write_out(res.to_json_dict(), opts["out"])
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "mcmc": _cmd_mcmc,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "enumerate": _cmd_enumerate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
