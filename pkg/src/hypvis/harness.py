"""Monte Carlo experiments over the Boolean model.

Every experiment splits its replicates into fixed-size batches.  Batch b
draws from ``Seed(mc.seed).child(b)`` and returns sufficient statistics
(counts, sums, sums of squares, per-survivor records); the parent adds them
up in batch order.  Scheduling therefore never changes a result, whatever
``mc.workers`` is.
"""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .analytic import alpha_occupied, alpha_vacant, f_vacant, fit_alpha
from .config import ConfigError, ExperimentConfig
from .fractal import geometric_ladder, parallel_set
from .hypgeo import dist_polar
from .model import (
    Phase,
    line_arcs,
    survival_depth,
    visible_arcs_vacant,
    visible_dirs_occupied,
    visible_grid_batch,
    visible_measure_batch,
)
from .sampler import Seed, Window, sample_batch, sample_strip_batch

EXPERIMENTS = ("frate", "alpha-fit", "visibility", "lines", "pairs")
PAIR_ROTATIONS = 64


@dataclass
class ExperimentResult:
    name: str
    config: ExperimentConfig
    rows: list
    summary: dict = field(default_factory=dict)
    references: dict = field(default_factory=dict)
    batches: int = 0
    wall_clock: float = 0.0

    def write(self, outdir: str | None = None) -> dict:
        """Write ``<name>.csv``, ``<name>_summary.csv`` and the ``<name>.json`` sidecar."""
        outdir = outdir or self.config.output_dir
        os.makedirs(outdir, exist_ok=True)
        stem = os.path.join(outdir, self.name)
        paths = {"rows": stem + ".csv", "summary": stem + "_summary.csv", "sidecar": stem + ".json"}
        _write_csv(paths["rows"], self.rows)
        _write_csv(paths["summary"], [self.summary] if self.summary else [])
        sidecar = {
            "experiment": self.name,
            "config": self.config.to_dict(),
            "window_radius": self.config.window_radius,
            "seeds": {"base": self.config.mc.seed, "batches": self.batches,
                      "derivation": "Seed(base).child(batch_index)"},
            "versions": {"hypvis": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__},
            "references": self.references,
            "summary": self.summary,
            "wall_clock_seconds": self.wall_clock,
        }
        with open(paths["sidecar"], "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2, default=_jsonable)
            fh.write("\n")
        return paths


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _write_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if not rows:
            return
        w = csv.writer(fh, lineterminator="\n")
        keys = list(rows[0])
        w.writerow(keys)
        for r in rows:
            w.writerow([_fmt(r.get(k)) for k in keys])


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialise {type(v).__name__}")


# ---------------------------------------------------------------------------
# batch scheduling

def _batch_sizes(n: int, size: int) -> list[int]:
    full, rest = divmod(n, size)
    return [size] * full + ([rest] if rest else [])


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as ex:
        return list(ex.map(fn, tasks))


def _run_batches(kind: str, cfg: ExperimentConfig, n: int | None = None, stop=None):
    """Run batches of ``kind`` in order.

    Without ``stop`` exactly ``n`` replicates are simulated.  With ``stop``
    (a predicate over the list of finished batch results) batches run in
    waves until the shortest prefix satisfying it is found or
    ``mc.max_replicates`` is exhausted; results past that prefix are dropped
    so the outcome does not depend on the wave size.
    """
    d = cfg.to_dict()
    B = cfg.mc.batch_size
    if stop is None:
        sizes = _batch_sizes(n if n is not None else cfg.mc.replicates, B)
        return _map(_batch_task, [(kind, d, b, s) for b, s in enumerate(sizes)], cfg.mc.workers)
    limit = cfg.mc.max_replicates or 100 * cfg.mc.replicates
    sizes = _batch_sizes(limit, B)
    wave = max(cfg.mc.workers, 1)
    done = []
    for start in range(0, len(sizes), wave):
        tasks = [(kind, d, b, sizes[b]) for b in range(start, min(start + wave, len(sizes)))]
        for res in _map(_batch_task, tasks, cfg.mc.workers):
            done.append(res)
            if stop(done):
                return done
    return done


def _batch_task(args):
    kind, d, b, size = args
    cfg = ExperimentConfig.from_dict(d)
    seed = Seed(cfg.mc.seed).child(b)
    return _KERNELS[kind](cfg, seed, size)


def _disk_batch(cfg: ExperimentConfig, seed: Seed, size: int):
    return sample_batch(cfg.model.lam, Window(cfg.window_radius), cfg.law, seed, size,
                        reach=cfg.reach)


# ---------------------------------------------------------------------------
# batch kernels: each returns plain numpy sufficient statistics

def _frate_kernel(cfg: ExperimentConfig, seed: Seed, size: int):
    depths = np.asarray(cfg.probe.depths, dtype=float)
    phase = Phase.parse(cfg.model.phase)
    first_moment = cfg.probe.first_moment and phase is Phase.VACANT
    if first_moment:
        batch = _disk_batch(cfg, seed, size)
    else:
        # only grains near the probed segment matter; sample exactly those
        batch = sample_strip_batch(cfg.model.lam, cfg.law, float(depths.max()), seed, size)
    surv = survival_depth(batch, phase, cap=float(depths.max()))
    hit = surv[:, None] >= depths[None, :]
    out = {"n": size, "hits": hit.sum(axis=0)}
    if first_moment:
        m = np.stack([visible_measure_batch(batch, r) / (2 * math.pi) for r in depths], axis=1)
        diff = m - hit
        out.update(m1=m.sum(axis=0), m2=(m * m).sum(axis=0), d2=(diff * diff).sum(axis=0))
    return out


def _arcs_at(cfg, c, L):
    if cfg.model.phase == "vacant":
        return visible_arcs_vacant(c, L)
    return visible_dirs_occupied(c, L, m=cfg.probe.grid)


def _dimension_record(a, ladder):
    return {"lengths": [parallel_set(a, x).total_length() for x in ladder],
            "widths": a.widths()}


def _visibility_kernel(cfg: ExperimentConfig, seed: Seed, size: int, lines: bool = False):
    depths = [float(x) for x in cfg.probe.depths]
    ladder = geometric_ladder(cfg.fractal.delta0, cfg.fractal.rungs)
    batch = _disk_batch(cfg, seed, size)
    vacant = cfg.model.phase == "vacant"
    survived = np.zeros(len(depths), dtype=np.int64)
    records = [[] for _ in depths]
    for k, L in enumerate(depths):
        # exact measure screens out configurations with nothing visible
        alive = visible_measure_batch(batch, L) > 0 if vacant else np.ones(size, dtype=bool)
        for i in np.flatnonzero(alive):
            a = _arcs_at(cfg, batch.config(i), L)
            if lines:
                a = line_arcs(a)
            if a.is_empty or a.total_length() <= 0.0:
                continue
            survived[k] += 1
            records[k].append(_dimension_record(a, ladder))
    return {"n": size, "survived": survived, "records": records}


def _lines_kernel(cfg, seed, size):
    return _visibility_kernel(cfg, seed, size, lines=True)


def _pairs_kernel(cfg: ExperimentConfig, seed: Seed, size: int):
    # every configuration contributes PAIR_ROTATIONS rotated copies of each pair;
    # averaging them per configuration keeps configurations the i.i.d. unit
    r = float(max(cfg.probe.depths))
    batch = _disk_batch(cfg, seed, size)
    x0 = visible_grid_batch(batch, r, PAIR_ROTATIONS)
    X = x0.mean(axis=1)
    Y = np.stack([(x0 & visible_grid_batch(batch, r, PAIR_ROTATIONS, psi)).mean(axis=1)
                  for psi in cfg.probe.separations], axis=1)
    return {"n": size, "sx": X.sum(), "sxx": (X * X).sum(), "sy": Y.sum(axis=0),
            "syy": (Y * Y).sum(axis=0), "sxy": (X[:, None] * Y).sum(axis=0)}


_KERNELS = {"frate": _frate_kernel, "visibility": _visibility_kernel,
            "lines": _lines_kernel, "pairs": _pairs_kernel}


def _add(results, key):
    total = results[0][key]
    for r in results[1:]:
        total = total + r[key]
    return total


# ---------------------------------------------------------------------------
# experiments

def analytic_alpha(cfg: ExperimentConfig):
    """Analytic alpha for the configured model, or None where no solver applies."""
    if cfg.model.phase == "vacant":
        return alpha_vacant(cfg.model.lam, cfg.law)
    if cfg.law.kind == "constant" and cfg.model.lam > 0:
        return alpha_occupied(cfg.model.lam, cfg.law.params[0], cfg.model.mode)
    return None


def exp_frate(cfg: ExperimentConfig) -> ExperimentResult:
    cfg.validate()
    t0 = time.perf_counter()
    res = _run_batches("frate", cfg)
    N = _add(res, "n")
    hits = _add(res, "hits")
    vacant = cfg.model.phase == "vacant"
    fm = "m1" in res[0]
    if fm:
        m1, m2, d2 = _add(res, "m1"), _add(res, "m2"), _add(res, "d2")
    rows = []
    for k, r in enumerate(cfg.probe.depths):
        f = hits[k] / N
        row = {"depth": float(r), "n": N, "f_hat": f, "stderr": math.sqrt(f * (1 - f) / N),
               "f_analytic": f_vacant(cfg.model.lam, cfg.law, r) if vacant else None}
        if fm:
            mean = m1[k] / N
            var = max(m2[k] / N - mean * mean, 0.0) * N / (N - 1)
            # the visible fraction and the fixed-direction indicator are paired per
            # configuration; their difference has mean zero under the identity
            dmean = mean - f
            dvar = max(d2[k] / N - dmean * dmean, 0.0) * N / (N - 1)
            dse = math.sqrt(dvar / N)
            z = abs(dmean) / dse if dse > 0 else (0.0 if dmean == 0 else math.inf)
            row.update(visible_mean=mean, visible_stderr=math.sqrt(var / N),
                       diff_stderr=dse, first_moment_z=z, first_moment_ok=z <= 3.0)
        rows.append(row)
    summary = {"n": N, "window_radius": cfg.window_radius, "phase": cfg.model.phase}
    if fm:
        summary["first_moment_ok"] = all(r["first_moment_ok"] for r in rows)
    return ExperimentResult("frate", cfg, rows, summary, {}, len(res), time.perf_counter() - t0)


def exp_alpha_fit(cfg: ExperimentConfig) -> ExperimentResult:
    if len(cfg.probe.depths) < 4:
        raise ConfigError("alpha-fit needs at least 4 depths")
    fr = exp_frate(cfg)
    t0 = time.perf_counter()
    zero = [r["depth"] for r in fr.rows if r["f_hat"] == 0]
    if zero:
        raise ConfigError(f"no configuration contained the segment at depths {zero}; "
                          "reduce the maximum depth or raise mc.replicates")
    fit = fit_alpha([(r["depth"], r["f_hat"], r["stderr"]) for r in fr.rows])
    ref = analytic_alpha(cfg)
    summary = {"n": fr.summary["n"], "window_radius": cfg.window_radius,
               "phase": cfg.model.phase, "alpha_hat": fit.value, "alpha_stderr": fit.stderr,
               "intercept": fit.intercept, "alpha_analytic": None if ref is None else ref.value,
               "analytic_tolerance": None if ref is None else ref.tolerance,
               "rel_error": None if ref is None else abs(fit.value - ref.value) / ref.value}
    refs = {} if ref is None else {"alpha": ref.value, "provenance": ref.provenance}
    return ExperimentResult("alpha-fit", cfg, fr.rows, summary, refs, fr.batches,
                            fr.wall_clock + time.perf_counter() - t0)


def _survivor_stop(cfg):
    target = cfg.mc.survivors
    return lambda done: sum(int(r["survived"][-1]) for r in done) >= target


def _fit_dimensions(records, ladder):
    """Per-survivor dimensions over the ladder rungs above the resolution cutoff."""
    widths = np.concatenate([rec["widths"] for rec in records])
    dmin = float(np.percentile(widths, 1.0))
    ladder = np.asarray(ladder)
    use = ladder >= dmin
    clipped = use.sum() < 4
    if clipped:
        use = np.arange(len(ladder)) < 4
    x = np.log(ladder[use])
    dims, raw = [], []
    for rec in records:
        y = np.log(np.asarray(rec["lengths"])[use])
        slope = np.polyfit(x, y, 1)[0]
        raw.append(1.0 - slope)
        dims.append(min(max(1.0 - slope, 0.0), 1.0))
    return np.array(dims), np.array(raw), dmin, ladder[use], bool(clipped)


def _exp_dimension(kind: str, cfg: ExperimentConfig) -> ExperimentResult:
    cfg.validate()
    t0 = time.perf_counter()
    lines = kind == "lines"
    stop = _survivor_stop(cfg) if cfg.mc.survivors else None
    res = _run_batches(kind, cfg, stop=stop)
    N = _add(res, "n")
    survived = _add(res, "survived")
    ladder = geometric_ladder(cfg.fractal.delta0, cfg.fractal.rungs)
    ref = analytic_alpha(cfg)
    alpha = None if ref is None else ref.value
    target = None if alpha is None else (1.0 - 2 * alpha if lines else 1.0 - alpha)
    rows = []
    for k, L in enumerate(cfg.probe.depths):
        s = survived[k] / N
        row = {"depth": float(L), "n": N, "survivors": int(survived[k]), "survival": s,
               "survival_stderr": math.sqrt(s * (1 - s) / N), "dimension_target": target,
               "dimension_mean": None, "dimension_stderr": None, "raw_dimension_mean": None,
               "union_dimension_mean": None, "delta_min": None, "fit_delta_hi": None,
               "fit_delta_lo": None, "fit_rungs": None, "ladder_clipped": None}
        recs = [rec for r in res for rec in r["records"][k]]
        if recs:
            dims, raw, dmin, used, clipped = _fit_dimensions(recs, ladder)
            se = float(dims.std(ddof=1) / math.sqrt(len(dims))) if len(dims) > 1 else 0.0
            row.update(dimension_mean=float(dims.mean()), dimension_stderr=se,
                       raw_dimension_mean=float(raw.mean()),
                       union_dimension_mean=1.0 + float(dims.mean()), delta_min=dmin,
                       fit_delta_hi=float(used[0]), fit_delta_lo=float(used[-1]),
                       fit_rungs=len(used), ladder_clipped=clipped)
        rows.append(row)
    last = rows[-1]
    summary = {"n": N, "window_radius": cfg.window_radius, "phase": cfg.model.phase,
               "alpha": alpha, "dimension_target": target, "depth": last["depth"],
               "survivors": last["survivors"], "survival": last["survival"],
               "dimension_mean": last["dimension_mean"],
               "dimension_stderr": last["dimension_stderr"],
               "union_dimension_mean": last["union_dimension_mean"],
               "survival_decreasing": all(a["survival"] > b["survival"]
                                          for a, b in zip(rows, rows[1:]))}
    refs = {} if ref is None else {"alpha": alpha, "provenance": ref.provenance,
                                   "target": target}
    return ExperimentResult(kind, cfg, rows, summary, refs, len(res), time.perf_counter() - t0)


def exp_visibility_dim(cfg: ExperimentConfig) -> ExperimentResult:
    return _exp_dimension("visibility", cfg)


def exp_lines_dim(cfg: ExperimentConfig) -> ExperimentResult:
    return _exp_dimension("lines", cfg)


def _wls_slope(x, y, var):
    w = 1.0 / np.asarray(var)
    xb = (w * x).sum() / w.sum()
    yb = (w * y).sum() / w.sum()
    sxx = (w * (x - xb) ** 2).sum()
    slope = (w * (x - xb) * (y - yb)).sum() / sxx
    return float(slope), float(yb - slope * xb), float(math.sqrt(1.0 / sxx))


def exp_pair_correlation(cfg: ExperimentConfig) -> ExperimentResult:
    cfg.validate()
    if cfg.model.phase != "vacant":
        raise ConfigError("the pairs experiment needs the vacant phase")
    if not cfg.probe.separations or any(not 0 < p <= math.pi for p in cfg.probe.separations):
        raise ConfigError("probe.separations must be a nonempty list in (0, pi]")
    t0 = time.perf_counter()
    res = _run_batches("pairs", cfg)
    N = _add(res, "n")
    sx, sxx = _add(res, "sx"), _add(res, "sxx")
    sy, syy, sxy = _add(res, "sy"), _add(res, "syy"), _add(res, "sxy")
    f = sx / N
    vx = (sxx / N - f * f) * N / (N - 1)
    lam, law = cfg.model.lam, cfg.law
    r = float(max(cfg.probe.depths))
    # antipodal rays form one segment of length 2r, so P(both) / f^2 = exp(lam E[ball area])
    antipodal_exact = math.exp(lam * 2 * math.pi * (law.mean_cosh() - 1.0))
    rows = []
    for j, psi in enumerate(cfg.probe.separations):
        P = sy[j] / N
        vy = (syy[j] / N - P * P) * N / (N - 1)
        cxy = (sxy[j] / N - f * P) * N / (N - 1)
        ratio = P / (f * f) if f > 0 else math.nan
        gP, gf = 1.0 / (f * f), -2.0 * P / f ** 3
        var = (gP * gP * vy + gf * gf * vx + 2 * gP * gf * cxy) / N
        rows.append({"separation": float(psi),
                     "rho": float(dist_polar(1.0, 0.0, 1.0, psi)), "depth": r, "n": N,
                     "f_hat": f, "f_stderr": math.sqrt(vx / N), "pair_hat": P,
                     "pair_stderr": math.sqrt(max(vy, 0.0) / N), "ratio": ratio,
                     "ratio_stderr": math.sqrt(max(var, 0.0))})
    ok = [row for row in rows if row["ratio"] > 0 and row["ratio_stderr"] > 0]
    summary = {"n": N, "window_radius": cfg.window_radius, "depth": r,
               "f_analytic": f_vacant(lam, law, r), "f_hat": f,
               "alpha": alpha_vacant(lam, law).value}
    if len(ok) >= 2:
        x = np.log([row["rho"] for row in ok])
        y = np.log([row["ratio"] for row in ok])
        var = [(row["ratio_stderr"] / row["ratio"]) ** 2 for row in ok]
        slope, icpt, se = _wls_slope(x, y, var)
        summary.update(slope=slope, slope_stderr=se, fitted_constant=math.exp(icpt))
    anti = [row for row in rows if math.isclose(row["separation"], math.pi)]
    if anti:
        a = anti[0]
        summary.update(antipodal_ratio=a["ratio"], antipodal_stderr=a["ratio_stderr"],
                       antipodal_exact=antipodal_exact,
                       antipodal_z_vs_one=(a["ratio"] - 1.0) / a["ratio_stderr"],
                       antipodal_z_vs_exact=(a["ratio"] - antipodal_exact) / a["ratio_stderr"])
    refs = {"alpha": summary["alpha"], "f_analytic": summary["f_analytic"],
            "antipodal_exact": antipodal_exact}
    return ExperimentResult("pairs", cfg, rows, summary, refs, len(res), time.perf_counter() - t0)


RUNNERS = {"frate": exp_frate, "alpha-fit": exp_alpha_fit, "visibility": exp_visibility_dim,
           "lines": exp_lines_dim, "pairs": exp_pair_correlation}
