"""Seeded, replayable experiment campaigns over the spacing statistics.

Each experiment kind turns one asymptotic statement into a desk-scale
check: draw alphas from per-sample derived seeds, push them through the
fractional-part pipeline, compare the resulting statistic against the
Poisson reference (or an exact count against its growth model), and
record everything needed to replay the run bit-for-bit in a JSON-lines
ledger.  Per-sample seeds are hash(master seed, sample index), so the
execution order (or a process pool) cannot change any reported number.
"""

from __future__ import annotations

import json
import hashlib
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from functools import lru_cache
from typing import Optional

import numpy as np

from .correlations import TestFunction, correlation_direct, mean_via_b0, stability_delta
from .counting import (
    count_contrast_triple,
    count_homogeneous,
    count_pair_equation,
    fit_growth,
)
from .errors import ConfigError
from .fracparts import frac_parts, required_precision, sample_alpha
from .poisson_model import (
    interval_count_pmf,
    level_spacing_cdf,
    level_spacing_pdf,
    regularized_lower_gamma,
)
from .seeds import derive_seed
from .sequences import generate, spec_from_dict
from .smallparts import exceptional_fraction
from .spacings import (
    interval_counts,
    joint_spacings,
    ks_distance,
    normalized_spacings,
    spacing_histogram,
)

EXPERIMENT_KINDS = (
    "spacing_poisson",
    "joint_spacing",
    "interval_count",
    "r_k_limit",
    "mean_check",
    "variance_decay",
    "stability",
    "counting_growth",
    "contrast",
    "smallparts_census",
)

WORKERS_ENV = "LACUNARY_WORKERS"


# ---------------------------------------------------------------------------
# configuration


_DEFAULTS = {
    "guard": 64,
    "mode": "circular",
    "sequence": {"kind": "geometric", "base": 2},
}

_REQUIRED = {
    "spacing_poisson": ("n", "alpha_samples"),
    "joint_spacing": ("n", "alpha_samples", "window"),
    "interval_count": ("n", "alpha_samples", "lam", "trials"),
    "r_k_limit": ("n", "alpha_samples", "k", "f"),
    "mean_check": ("n", "alpha_samples", "k", "f"),
    "variance_decay": ("n_ladder", "alpha_samples", "k", "f"),
    "stability": ("n", "alpha_samples", "k", "f"),
    "counting_growth": ("systems",),
    "contrast": ("n_ladder",),
    "smallparts_census": ("n", "alpha_samples", "delta"),
}


def normalize_config(config: dict) -> dict:
    """Apply defaults and validate the schema; returns a canonical dict."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a mapping")
    kind = config.get("experiment")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"experiment must be one of {EXPERIMENT_KINDS}, got {kind!r}")
    if "seed" not in config:
        raise ConfigError("config needs a master seed")
    out = dict(config)
    for key, val in _DEFAULTS.items():
        out.setdefault(key, val)
    missing = [k for k in _REQUIRED[kind] if k not in out]
    if missing:
        raise ConfigError(f"{kind} config missing keys: {missing}")
    if "f" in out:
        f = out["f"]
        if not isinstance(f, dict) or "kind" not in f:
            raise ConfigError("f must be a mapping with a 'kind'")
        f.setdefault("rho", 1.0)
    # round-trip through JSON so the digest sees plain types only
    return json.loads(json.dumps(out, sort_keys=True))


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class ExperimentRecord:
    record_id: str
    kind: str
    timestamp: str
    config: dict
    config_digest: str
    master_seed: int
    samples: list
    summary: dict
    passed: Optional[bool]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "ExperimentRecord":
        return cls(**json.loads(line))


# ---------------------------------------------------------------------------
# shared helpers


@lru_cache(maxsize=64)
def _cached_values(spec_json: str, n: int) -> tuple:
    return tuple(generate(spec_from_dict(json.loads(spec_json)), n))


def _values(config: dict, n: int) -> tuple:
    return _cached_values(json.dumps(config["sequence"], sort_keys=True), n)


def _points_for(config: dict, n: int, sample_seed: int):
    spec = spec_from_dict(config["sequence"])
    guard = config["guard"]
    precision = required_precision(spec, n, guard)
    alpha = sample_alpha(sample_seed, precision)
    return frac_parts(alpha, _values(config, n), guard)


def _test_function(config: dict) -> TestFunction:
    f = config["f"]
    return TestFunction(kind=f["kind"], dim=config["k"] - 1, rho=float(f["rho"]))


def _exp_cdf(s: float) -> float:
    return 1.0 - math.exp(-s)


# ---------------------------------------------------------------------------
# per-sample functions (top level so a process pool can pickle the work)


def _sample_spacing_poisson(config: dict, index: int) -> dict:
    seed = derive_seed(config["seed"], index)
    points = _points_for(config, config["n"], seed)
    ks = {}
    hists = {}
    for level in config.get("levels", [1, 2]):
        sample = normalized_spacings(points, level, config["mode"])
        ks[str(level)] = ks_distance(
            sample.deltas, lambda s, a=level: level_spacing_cdf(a, s)
        )
        _, counts, _ = spacing_histogram(sample)
        hists[str(level)] = counts.tolist()
    return {"index": index, "seed": seed, "ks": ks, "hist": hists}


def _sample_joint_spacing(config: dict, index: int) -> dict:
    seed = derive_seed(config["seed"], index)
    points = _points_for(config, config["n"], seed)
    tuples = joint_spacings(points, config["window"], config["mode"])
    marginal_ks = [
        ks_distance(tuples[:, i], _exp_cdf) for i in range(tuples.shape[1])
    ]
    corrs = [
        float(np.corrcoef(tuples[:, i], tuples[:, i + 1])[0, 1])
        for i in range(tuples.shape[1] - 1)
    ]
    return {
        "index": index,
        "seed": seed,
        "max_marginal_ks": max(marginal_ks),
        "max_abs_corr": max(abs(c) for c in corrs),
    }


def _sample_interval_count(config: dict, index: int) -> dict:
    seed = derive_seed(config["seed"], index)
    points = _points_for(config, config["n"], seed)
    trials = config["trials"]
    hist = interval_counts(points, config["lam"], trials, derive_seed(seed, 1))
    k_max = int(config.get("k_max", 4))
    devs = []
    freqs = []
    for k in range(k_max + 1):
        pmf = interval_count_pmf(config["lam"], k)
        # two noise sources: the M sampled arcs and the point set itself
        # (an iid-uniform control fluctuates at the same 1/sqrt(N) scale)
        sigma = math.sqrt(pmf * (1.0 - pmf) * (1.0 / trials + 1.0 / config["n"]))
        freq = hist.frequency(k)
        freqs.append(freq)
        devs.append(abs(freq - pmf) / sigma)
    # chi-square over the occupancy bins plus a pooled tail; conditional on
    # the realized point set, so at trials >> N it resolves the point
    # set's own finite-N deviation from the limit law
    chi2 = 0.0
    tail_obs = trials
    tail_exp = float(trials)
    for k in range(k_max + 1):
        expected = trials * interval_count_pmf(config["lam"], k)
        observed = hist.counts.get(k, 0)
        tail_obs -= observed
        tail_exp -= expected
        chi2 += (observed - expected) ** 2 / expected
    if tail_exp > 1e-9:
        chi2 += (tail_obs - tail_exp) ** 2 / tail_exp
    dof = k_max + 1  # bins + tail, minus one for the fixed total
    pvalue = 1.0 - regularized_lower_gamma(dof / 2.0, chi2 / 2.0)
    return {
        "index": index,
        "seed": seed,
        "max_sigma_dev": max(devs),
        "mean_occupancy": hist.mean(),
        "frequencies": freqs,
        "chi2": chi2,
        "chi2_pvalue": pvalue,
    }


def _sample_r_value(config: dict, index: int) -> dict:
    seed = derive_seed(config["seed"], index)
    points = _points_for(config, config["n"], seed)
    res = correlation_direct(points, config["k"], _test_function(config))
    return {"index": index, "seed": seed, "r": res.value}


def _sample_variance_rung(config: dict, flat_index: int) -> dict:
    ladder = config["n_ladder"]
    per = config["alpha_samples"]
    rung, index = divmod(flat_index, per)
    n = ladder[rung]
    seed = derive_seed(config["seed"], rung, index)
    points = _points_for(config, n, seed)
    res = correlation_direct(points, config["k"], _test_function(config))
    return {"index": index, "n": n, "seed": seed, "r": res.value}


def _sample_stability(config: dict, index: int) -> dict:
    seed = derive_seed(config["seed"], index)
    n = config["n"]
    k_shift = config["K"] if config.get("K") is not None else int(n**0.7)
    spec = spec_from_dict(config["sequence"])
    guard = config["guard"]
    precision = required_precision(spec, n + k_shift, guard)
    alpha = sample_alpha(seed, precision)
    values = _values(config, n + k_shift)
    points_long = frac_parts(alpha, values, guard)
    points_short = frac_parts(alpha, values[:n], guard)
    delta = stability_delta(
        points_short, points_long, config["k"], _test_function(config),
        delta=config.get("delta", 0.3),
    )
    return {"index": index, "seed": seed, "K": k_shift, "delta_r": delta}


_SAMPLERS = {
    "spacing_poisson": _sample_spacing_poisson,
    "joint_spacing": _sample_joint_spacing,
    "interval_count": _sample_interval_count,
    "r_k_limit": _sample_r_value,
    "mean_check": _sample_r_value,
    "variance_decay": _sample_variance_rung,
    "stability": _sample_stability,
}


def _pool_entry(args):
    kind, config_json, index = args
    return _SAMPLERS[kind](json.loads(config_json), index)


def _map_samples(kind: str, config: dict, count: int, workers: int) -> list:
    if workers <= 1:
        return [_SAMPLERS[kind](config, i) for i in range(count)]
    blob = json.dumps(config, sort_keys=True)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        jobs = [(kind, blob, i) for i in range(count)]
        return list(pool.map(_pool_entry, jobs, chunksize=max(1, count // (8 * workers))))


# ---------------------------------------------------------------------------
# experiment drivers


def _median(xs) -> float:
    return float(np.median(np.asarray(list(xs), dtype=float)))


def _drive_spacing_poisson(config, workers):
    samples = _map_samples("spacing_poisson", config, config["alpha_samples"], workers)
    levels = [str(l) for l in config.get("levels", [1, 2])]
    medians = {l: _median(s["ks"][l] for s in samples) for l in levels}
    pooled = {
        l: np.sum([s["hist"][l] for s in samples], axis=0).tolist() for l in levels
    }
    summary = {"ks_median": medians, "pooled_hist": pooled,
               "bin_width": 0.1, "s_max": 10.0}
    thresholds = config.get("thresholds", {})
    passed = None
    if thresholds:
        passed = all(
            medians[l] <= thresholds[l] for l in thresholds if l in medians
        )
    return samples, summary, passed


def _drive_joint_spacing(config, workers):
    samples = _map_samples("joint_spacing", config, config["alpha_samples"], workers)
    summary = {
        "median_max_marginal_ks": _median(s["max_marginal_ks"] for s in samples),
        "median_max_abs_corr": _median(s["max_abs_corr"] for s in samples),
    }
    thresholds = config.get("thresholds", {})
    passed = None
    if thresholds:
        passed = all(summary[k] <= v for k, v in thresholds.items() if k in summary)
    return samples, summary, passed


def _drive_interval_count(config, workers):
    samples = _map_samples("interval_count", config, config["alpha_samples"], workers)
    k_max = int(config.get("k_max", 4))
    lam = config["lam"]
    mean_freq = np.mean([s["frequencies"] for s in samples], axis=0)
    summary = {
        "median_max_sigma_dev": _median(s["max_sigma_dev"] for s in samples),
        "median_mean_occupancy": _median(s["mean_occupancy"] for s in samples),
        "median_chi2_pvalue": _median(s["chi2_pvalue"] for s in samples),
        "mean_frequencies": mean_freq.tolist(),
        "pmf": [interval_count_pmf(lam, k) for k in range(k_max + 1)],
    }
    threshold = config.get("max_sigma_dev")
    passed = None if threshold is None else summary["median_max_sigma_dev"] <= threshold
    return samples, summary, passed


def _drive_r_k_limit(config, workers):
    samples = _map_samples("r_k_limit", config, config["alpha_samples"], workers)
    f = _test_function(config)
    errors = [abs(s["r"] - f.integral) for s in samples]
    summary = {
        "f_integral": f.integral,
        "mean_r": float(np.mean([s["r"] for s in samples])),
        "mean_abs_error": float(np.mean(errors)),
    }
    summary["rel_error"] = summary["mean_abs_error"] / f.integral
    threshold = config.get("max_rel_error")
    passed = None if threshold is None else summary["rel_error"] <= threshold
    return samples, summary, passed


def _drive_mean_check(config, workers):
    samples = _map_samples("mean_check", config, config["alpha_samples"], workers)
    f = _test_function(config)
    n = config["n"]
    k = config["k"]
    rs = np.array([s["r"] for s in samples])
    mc_mean = float(np.mean(rs))
    se = float(np.std(rs, ddof=1) / math.sqrt(len(rs)))
    b0_mean = mean_via_b0(k, f, n, _values(config, n))
    summary = {
        "mc_mean": mc_mean,
        "std_error": se,
        "fourier_mean": b0_mean,
        "deviation_in_se": abs(mc_mean - b0_mean) / se if se else math.inf,
        "f_integral_times_correction": f.integral * (1.0 - 1.0 / n),
    }
    max_se = config.get("max_se", 4.0)
    passed = summary["deviation_in_se"] <= max_se
    return samples, summary, passed


def _drive_variance_decay(config, workers):
    ladder = list(config["n_ladder"])
    per = config["alpha_samples"]
    samples = _map_samples("variance_decay", config, len(ladder) * per, workers)
    variances = {}
    for rung, n in enumerate(ladder):
        rs = np.array([s["r"] for s in samples[rung * per : (rung + 1) * per]])
        variances[str(n)] = float(np.var(rs, ddof=1))
    logn = np.log(np.array(ladder, dtype=float))
    logv = np.log(np.array([variances[str(n)] for n in ladder]))
    design = np.column_stack([np.ones_like(logn), logn])
    coef, *_ = np.linalg.lstsq(design, logv, rcond=None)
    fitted = design @ coef
    summary = {
        "variance": variances,
        "slope": float(coef[1]),
        "intercept": float(coef[0]),
        "fitted_log_variance": {str(n): float(v) for n, v in zip(ladder, fitted)},
    }
    threshold = config.get("max_slope")
    passed = None if threshold is None else summary["slope"] <= threshold
    return samples, summary, passed


def _drive_stability(config, workers):
    samples = _map_samples("stability", config, config["alpha_samples"], workers)
    deltas = [s["delta_r"] for s in samples]
    summary = {
        "max_delta": max(deltas),
        "median_delta": _median(deltas),
        "K": samples[0]["K"],
    }
    threshold = config.get("max_delta")
    passed = None if threshold is None else summary["max_delta"] <= threshold
    return samples, summary, passed


def _drive_counting_growth(config, workers):
    del workers  # exact counting is deterministic and single-process
    samples = []
    fits = {}
    passed = True
    any_threshold = False
    for system in config["systems"]:
        name = system["system"]
        ladder = list(system["n_ladder"])
        counts = []
        for n in ladder:
            values = _values(config, n)
            if name == "homogeneous":
                res = count_homogeneous(
                    system["r"], n, values, system.get("variant", "distinct")
                )
            elif name == "pair_equation":
                res = count_pair_equation(system["k"], n, values)
            else:
                raise ConfigError(f"unknown counting system {name!r}")
            counts.append(res.total)
            samples.append({"system": name, "n": n, "count": res.total,
                            "elapsed": res.elapsed})
        fit = fit_growth(list(zip(ladder, counts)), system.get("log_exponent", 0.0))
        key = f"{name}_r{system.get('r', system.get('k'))}"
        fits[key] = {"exponent": fit.exponent, "residual": fit.residual}
        expected = system.get("expected")
        if expected is not None:
            match = all(
                counts[i] == expected[str(n)] for i, n in enumerate(ladder)
                if str(n) in expected
            )
            fits[key]["fixtures_match"] = match
            passed = passed and match
            any_threshold = True
        max_p = system.get("max_exponent")
        if max_p is not None:
            fits[key]["max_exponent"] = max_p
            passed = passed and fit.exponent <= max_p
            any_threshold = True
    summary = {"fits": fits}
    return samples, summary, (passed if any_threshold else None)


def _drive_contrast(config, workers):
    del workers
    ladder = list(config["n_ladder"])
    specs = {
        "square": {"kind": "polynomial", "degree": 2},
        "lacunary": config["sequence"],
    }
    samples = []
    exponents = {}
    for label, spec_dict in specs.items():
        counts = []
        for n in ladder:
            values = _cached_values(json.dumps(spec_dict, sort_keys=True), n)
            res = count_contrast_triple(n, values)
            counts.append(res.total)
            samples.append({"sequence": label, "n": n, "count": res.total})
        fit = fit_growth(list(zip(ladder, counts)), config.get("log_exponent", 0.0))
        exponents[label] = fit.exponent
    separation = exponents["square"] - exponents["lacunary"]
    summary = {"exponents": exponents, "separation": separation}
    threshold = config.get("min_separation")
    passed = None if threshold is None else separation >= threshold
    return samples, summary, passed


def _drive_smallparts_census(config, workers):
    del workers  # the sampling loop lives in smallparts and is already seeded
    spec = spec_from_dict(config["sequence"])
    result = exceptional_fraction(
        config["delta"], config["n"], config["alpha_samples"],
        config["seed"], spec, config["guard"],
    )
    samples = [
        {"index": i, "g_max": g} for i, g in enumerate(result.g_values)
    ]
    gs = np.array(result.g_values, dtype=float)
    summary = {
        "fraction": result.fraction,
        "ci_halfwidth": result.ci_halfwidth,
        "threshold": result.threshold,
        "g_quantiles": {q: float(np.quantile(gs, float(q))) for q in
                        ("0.5", "0.9", "0.99")},
    }
    threshold = config.get("max_fraction")
    passed = None if threshold is None else result.fraction <= threshold
    return samples, summary, passed


_DRIVERS = {
    "spacing_poisson": _drive_spacing_poisson,
    "joint_spacing": _drive_joint_spacing,
    "interval_count": _drive_interval_count,
    "r_k_limit": _drive_r_k_limit,
    "mean_check": _drive_mean_check,
    "variance_decay": _drive_variance_decay,
    "stability": _drive_stability,
    "counting_growth": _drive_counting_growth,
    "contrast": _drive_contrast,
    "smallparts_census": _drive_smallparts_census,
}


# ---------------------------------------------------------------------------
# public entry points


def run_experiment(
    config: dict, ledger: Optional[str] = None, workers: Optional[int] = None
) -> ExperimentRecord:
    """Execute one experiment and optionally append it to a ledger."""
    config = normalize_config(config)
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    kind = config["experiment"]
    digest = config_digest(config)
    samples, summary, passed = _DRIVERS[kind](config, workers)
    record = ExperimentRecord(
        record_id=f"{kind}-{digest[:12]}",
        kind=kind,
        timestamp=datetime.now(timezone.utc).isoformat(),
        config=config,
        config_digest=digest,
        master_seed=config["seed"],
        samples=samples,
        summary=summary,
        passed=passed,
    )
    if ledger:
        with open(ledger, "a", encoding="utf-8") as fh:
            fh.write(record.to_json() + "\n")
    return record


def load_records(ledger: str) -> list[ExperimentRecord]:
    records = []
    with open(ledger, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(ExperimentRecord.from_json(line))
    return records


def find_record(ledger: str, record_id: str) -> ExperimentRecord:
    matches = [r for r in load_records(ledger) if r.record_id == record_id]
    if not matches:
        raise KeyError(f"no record {record_id!r} in {ledger}")
    return matches[-1]


def _write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _csv(rows) -> str:
    return "\n".join(",".join(_fmt(c) for c in row) for row in rows) + "\n"


def report(ledger: str, record_id: str, out_dir: str = ".") -> str:
    """Human-readable summary plus plot-ready CSV files for one record."""
    record = find_record(ledger, record_id)
    os.makedirs(out_dir, exist_ok=True)
    lines = [
        f"record {record.record_id}  ({record.kind})",
        f"  run at {record.timestamp}, master seed {record.master_seed}",
        f"  config digest {record.config_digest}",
    ]
    wrote = []

    def emit(name: str, rows):
        path = os.path.join(out_dir, f"{record.record_id}-{name}.csv")
        _write_atomic(path, _csv(rows))
        wrote.append(path)

    s = record.summary
    if record.kind == "spacing_poisson":
        width = s["bin_width"]
        for level, hist in s["pooled_hist"].items():
            a = int(level)
            total = sum(hist)
            rows = [("s", "empirical_density", "model_density")]
            for i, c in enumerate(hist[:-1]):  # last bin is overflow
                mid = (i + 0.5) * width
                rows.append((mid, c / (total * width), level_spacing_pdf(a, mid)))
            emit(f"spacing-level{level}", rows)
            lines.append(f"  level {level}: median KS = {_fmt(s['ks_median'][level])}")
    elif record.kind == "variance_decay":
        rows = [("n", "variance", "fitted_variance")]
        for n, v in s["variance"].items():
            rows.append((n, v, math.exp(s["fitted_log_variance"][n])))
        emit("variance", rows)
        lines.append(f"  fitted log-log slope = {_fmt(s['slope'])}")
    elif record.kind in ("counting_growth", "contrast"):
        rows = [("system", "n", "count")]
        for sample in record.samples:
            key = sample.get("system", sample.get("sequence"))
            rows.append((key, sample["n"], sample["count"]))
        emit("counts", rows)
        for key, val in (s.get("fits") or s.get("exponents") or {}).items():
            lines.append(f"  {key}: {val}")
        if "separation" in s:
            lines.append(f"  exponent separation = {_fmt(s['separation'])}")
    elif record.kind == "interval_count":
        rows = [("k", "mean_frequency", "poisson_pmf")]
        for k, (freq, pmf) in enumerate(zip(s["mean_frequencies"], s["pmf"])):
            rows.append((k, freq, pmf))
        emit("occupancy", rows)
        lines.append(f"  median max deviation = {_fmt(s['median_max_sigma_dev'])} sigma")
    else:
        rows = [("index", "value")]
        key = {
            "r_k_limit": "r", "mean_check": "r", "stability": "delta_r",
            "smallparts_census": "g_max", "joint_spacing": "max_marginal_ks",
        }.get(record.kind)
        if key:
            for sample in record.samples:
                rows.append((sample["index"], sample[key]))
            emit("samples", rows)
        for k, v in s.items():
            if isinstance(v, (int, float, str)):
                lines.append(f"  {k} = {_fmt(v)}")
    if record.passed is not None:
        lines.append(f"  thresholds: {'PASS' if record.passed else 'FAIL'}")
    lines.append("  data files: " + (", ".join(wrote) if wrote else "none"))
    return "\n".join(lines)
