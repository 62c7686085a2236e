"""Config-driven experiment runner with run-directory persistence.

A run solves the row sweep (parallel across n), persists one record per
n, then derives the requested analyses from those records.  Reports are
pure functions of the records, so re-running an identical config gives
byte-identical records and reports; the manifest alone carries wall
time.  Parallelism degree comes from the HPADE_WORKERS environment
variable (default: available cores); worker count never changes any
output byte.
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import mpmath as mp

from . import __version__
from .detectors import (combo_singularity_count, detect_system_poles,
                        suetin_scalar)
from .errors import ConfigError, HpadeError, HypothesisUnmet
from .expressions import parse_series
from .incomplete import (estimate_rm_star, hp_projection, records_from_pairs,
                         regularize)
from .records import (RECORD_VERSION, RunRecord, decode_record, load_manifest,
                      load_records, write_manifest, write_record)
from .roots import roots as find_roots
from .series import MultiIndex, SeriesSystem
from .solver import hp_approximant
from .trajectory import build_trajectories, estimate_rate, lambda_mu, \
    ordered_distance_table

NORMALIZATIONS = ("monic", "unit_coeff_sum")
ANALYSIS_NAMES = ("trajectories", "incomplete", "detect", "suetin", "combos")


@dataclass
class RunConfig:
    series_exprs: list
    m: list
    n_lo: int
    n_hi: int
    precision_bits: int = 512
    normalization: str = "monic"
    solve_method: str = "auto"
    analyses: dict = field(default_factory=dict)
    output_dir: str = "hpade_run"

    @classmethod
    def from_dict(cls, data) -> "RunConfig":
        try:
            system = data["system"]
            exprs = list(system["series"])
            m = [int(x) for x in system["m"]]
            n_lo, n_hi = (int(x) for x in data["n_range"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad config structure: {exc}") from exc
        cfg = cls(
            series_exprs=exprs,
            m=m,
            n_lo=n_lo,
            n_hi=n_hi,
            precision_bits=int(data.get("precision_bits", 512)),
            normalization=data.get("normalization", "monic"),
            solve_method=data.get("solve_method", "auto"),
            analyses=dict(data.get("analyses", {})),
            output_dir=data.get("output_dir", "hpade_run"),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config parse error: {exc.msg}",
                              line=exc.lineno, column=exc.colno) from exc
        return cls.from_dict(data)

    def validate(self):
        if len(self.series_exprs) != len(self.m):
            raise ConfigError("series list and multi-index length differ")
        if not self.m or all(e == 0 for e in self.m):
            raise ConfigError("multi-index must not be identically zero")
        if any(e < 0 for e in self.m):
            raise ConfigError("multi-index entries must be nonnegative")
        if self.n_lo > self.n_hi:
            raise ConfigError("empty n_range")
        if self.n_lo < max(self.m):
            raise ConfigError("n_range starts below max m_k")
        if self.precision_bits < 64:
            raise ConfigError("precision_bits must be at least 64")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        for name in self.analyses:
            if name not in ANALYSIS_NAMES:
                raise ConfigError(f"unknown analysis {name!r}")
        for expr in self.series_exprs:
            parse_series(expr)

    def to_dict(self):
        return {
            "system": {"series": list(self.series_exprs), "m": list(self.m)},
            "n_range": [self.n_lo, self.n_hi],
            "precision_bits": self.precision_bits,
            "normalization": self.normalization,
            "solve_method": self.solve_method,
            "analyses": self.analyses,
            "output_dir": self.output_dir,
        }

    def build_system(self) -> SeriesSystem:
        comps = [parse_series(e) for e in self.series_exprs]
        return SeriesSystem(comps, MultiIndex(self.m))


def _compute_record_text(system, n, prec, normalization, method):
    from .records import encode_record
    approx = hp_approximant(system, n, prec, normalization, method)
    rootset = find_roots(approx.denominator.q, prec)
    solved = "exact" if approx.denominator.exact else "float"
    return encode_record(RunRecord(approx, rootset, solved))


_WORKER = {}


def _worker_init(exprs, m_entries, prec, normalization, method):
    comps = [parse_series(e) for e in exprs]
    _WORKER["system"] = SeriesSystem(comps, MultiIndex(m_entries))
    _WORKER["args"] = (prec, normalization, method)


def _worker_solve(n):
    prec, normalization, method = _WORKER["args"]
    try:
        return n, _compute_record_text(_WORKER["system"], n, prec,
                                       normalization, method), None
    except Exception as exc:  # noqa: BLE001 - reported per n
        return n, None, f"{type(exc).__name__}: {exc}"


def worker_count():
    env = os.environ.get("HPADE_WORKERS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run(config: RunConfig, run_dir=None):
    """Execute a sweep, persist records, run analyses, write reports.

    Returns the manifest dict.  Per-n failures are recorded in the
    manifest and do not abort the sweep.
    """
    t0 = time.monotonic()
    run_dir = run_dir or config.output_dir
    os.makedirs(run_dir, exist_ok=True)
    ns = list(range(config.n_lo, config.n_hi + 1))
    failures = {}
    texts = {}
    workers = worker_count()
    init_args = (config.series_exprs, config.m, config.precision_bits,
                 config.normalization, config.solve_method)
    if workers > 1 and len(ns) > 1:
        with ProcessPoolExecutor(max_workers=workers,
                                 initializer=_worker_init,
                                 initargs=init_args) as pool:
            for n, text, err in pool.map(_worker_solve, ns, chunksize=4):
                if err is None:
                    texts[n] = text
                else:
                    failures[str(n)] = err
    else:
        system = config.build_system()
        for comp in system.components:
            for j in range(config.n_hi + 1):
                comp.coeff(j, config.precision_bits)
        for n in ns:
            try:
                texts[n] = _compute_record_text(
                    system, n, config.precision_bits, config.normalization,
                    config.solve_method)
            except Exception as exc:  # noqa: BLE001 - reported per n
                failures[str(n)] = f"{type(exc).__name__}: {exc}"

    records = []
    index = {}
    for n in ns:
        if n not in texts:
            continue
        rec = decode_record(texts[n])
        rel = write_record(run_dir, rec)
        index[str(n)] = rel
        records.append(rec)

    reports, notes, analysis_errors = _run_analyses(config, records)
    _write_reports_json(run_dir, reports)

    manifest = {
        "record_version": RECORD_VERSION,
        "config": config.to_dict(),
        "records": index,
        "failures": failures,
        "notes": notes,
        "analysis_errors": analysis_errors,
        "versions": {"hpade": __version__, "mpmath": mp.__version__},
        "wall_time_seconds": round(time.monotonic() - t0, 3),
    }
    write_manifest(run_dir, manifest)
    return manifest


def _jsonable(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (mp.mpf,)):
        return float(obj)
    if isinstance(obj, (mp.mpc, complex)):
        return [float(mp.re(obj)), float(mp.im(obj))]
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in sorted(obj.items(),
                                                        key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "to_mpc"):
        return _jsonable(obj.to_mpc())
    return str(obj)


def _trajectory_tables(config, records, targets):
    rootsets = {rec.n: rec.rootset for rec in records
                if rec.approx.denominator.nullspace_dim == 1}
    trajectories = build_trajectories(rootsets)
    prec = config.precision_bits
    out = {"trajectories": [], "targets": [], "cutoffs": {
        "precision_bits": prec}}
    for t in trajectories:
        ns = t.ns()
        entry = {
            "id": t.trajectory_id,
            "n_first": ns[0],
            "n_last": ns[-1],
            "final": _jsonable(t.final_position()),
        }
        try:
            est = estimate_rate(t.steps())
            entry["step_rate"] = _jsonable(est)
        except HpadeError:
            entry["step_rate"] = None
        out["trajectories"].append(entry)
    total = sum(config.m)
    for tgt in targets:
        zeta = mp.mpc(tgt[0], tgt[1])
        table = ordered_distance_table(rootsets, zeta, total)
        lm = lambda_mu(table)
        tentry = {"target": _jsonable(zeta), "lambda_mu": _jsonable(lm)}
        out["targets"].append(tentry)
    return out, trajectories, rootsets


def _incomplete_tables(config, records, spec):
    system = config.build_system()
    prec = config.precision_bits
    run_list = [rec.approx for rec in records
                if rec.approx.denominator.nullspace_dim == 1]
    per_component = spec.get("per_component", True)
    ks = range(system.d) if per_component else [int(spec.get("component", 0))]
    out = {}
    exact_termination = False
    for k in ks:
        pairs = [hp_projection(system, k, a) for a in run_list]
        recs = records_from_pairs(pairs)
        live = {r.n: abs(r.A) for r in recs
                if not r.exact_termination and abs(r.A) > 0}
        term = [r.n for r in recs if r.exact_termination]
        table = []
        rm = None
        reg = None
        if live:
            try:
                rm = estimate_rm_star(recs)
            except HpadeError:
                rm = None
            scale = rm.value if rm is not None and mp.isfinite(rm.value) \
                else mp.mpf(1)
            reg = regularize(live, scale_r=scale)
        for r in recs:
            row = {
                "n": r.n,
                "abs_A": _jsonable(abs(r.A)),
                "abs_A_nth_root": _jsonable(abs(r.A) ** (mp.mpf(1) / r.n))
                if abs(r.A) > 0 else 0.0,
                "lambda_n": r.lambda_n,
                "lambda_n1": r.lambda_n1,
                "structural_residual": _jsonable(r.structural_residual),
                "exact_termination": r.exact_termination,
                "qstar_zeros": [_jsonable(z) for z in r.qstar_zeros],
            }
            if reg is not None and r.n in reg.alpha_star:
                row["alpha_star"] = _jsonable(reg.alpha_star[r.n])
                row["contact"] = r.n in reg.contact_set
            table.append(row)
        if term and (not live or max(term) > max(live)):
            exact_termination = True
        out[f"component_{k}"] = {
            "m": system.m.total,
            "m_star": system.m[k],
            "rows": table,
            "rm_star": _jsonable(rm) if rm is not None else None,
            "regularization": {
                "contact_set": reg.contact_set,
                "c_bound": reg.c_bound,
                "scale_r": reg.scale_r,
                "window": list(reg.window),
            } if reg is not None else None,
            "exact_termination_rows": term,
        }
    return out, exact_termination


def _run_analyses(config, records):
    reports = {}
    notes = []
    errors = {}
    if not records:
        return reports, ["no records"], errors
    run_list = [rec.approx for rec in records]
    analyses = config.analyses
    trajectories = None
    rootsets = None
    if "trajectories" in analyses:
        targets = analyses["trajectories"].get("targets", []) \
            if isinstance(analyses["trajectories"], dict) else []
        try:
            table, trajectories, rootsets = _trajectory_tables(
                config, records, targets)
            reports["trajectories"] = table
        except HpadeError as exc:
            errors["trajectories"] = str(exc)
    if "incomplete" in analyses:
        spec = analyses["incomplete"] if isinstance(analyses["incomplete"],
                                                    dict) else {}
        try:
            table, exact_term = _incomplete_tables(config, records, spec)
            reports["incomplete"] = table
            if exact_term:
                notes.append("exact termination (A_n = 0)")
        except HpadeError as exc:
            errors["incomplete"] = str(exc)
    if "detect" in analyses:
        try:
            rep = detect_system_poles(run_list, config.precision_bits)
            reports["detect"] = _jsonable(rep)
        except HpadeError as exc:
            errors["detect"] = str(exc)
    if "suetin" in analyses:
        try:
            if len(config.m) != 1:
                raise HypothesisUnmet("suetin report needs a scalar system")
            reports["suetin"] = _suetin_table(config, records)
        except HpadeError as exc:
            errors["suetin"] = str(exc)
    if "combos" in analyses:
        system = config.build_system()
        combo_reports = []
        for combo in analyses["combos"]:
            try:
                rep = combo_singularity_count(
                    system, int(combo.get("m_star", 1)), combo["polys"],
                    run_list, config.precision_bits)
                combo_reports.append(_jsonable(rep))
            except HpadeError as exc:
                combo_reports.append({"error": str(exc),
                                      "polys": combo.get("polys")})
        reports["combos"] = combo_reports
    return reports, notes, errors


def _suetin_table(config, records):
    from .detectors import _distinct_zeros
    system = config.build_system()
    prec = config.precision_bits
    run_list = [rec.approx for rec in records
                if rec.approx.denominator.nullspace_dim == 1]
    rootsets = {rec.n: rec.rootset for rec in records
                if rec.approx.denominator.nullspace_dim == 1}
    pairs = [hp_projection(system, 0, a) for a in run_list]
    recs = records_from_pairs(pairs)
    rm = estimate_rm_star(recs)
    zeros = _distinct_zeros(run_list[-1].q_mpc(prec), prec)
    rep = suetin_scalar(zeros, rm, rootsets, prec)
    out = _jsonable(rep)
    out["rm_star"] = _jsonable(rm)
    return out


def _write_reports_json(run_dir, reports):
    rep_dir = os.path.join(run_dir, "reports")
    os.makedirs(rep_dir, exist_ok=True)
    paths = []
    for name, payload in sorted(reports.items()):
        path = os.path.join(rep_dir, f"{name}.json")
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths.append(path)
    return paths


def report(run_dir, fmt="json"):
    """Re-derive analysis outputs from the records on disk."""
    manifest = load_manifest(run_dir)
    config = RunConfig.from_dict(manifest["config"])
    records = load_records(run_dir, manifest)
    if fmt == "json":
        reports, _, _ = _run_analyses(config, records)
        return _write_reports_json(run_dir, reports)
    if fmt in ("csv", "plotdata"):
        return _write_tabular(run_dir, config, records, fmt)
    raise ConfigError(f"unknown report format {fmt!r}")


def _write_tabular(run_dir, config, records, fmt):
    rep_dir = os.path.join(run_dir, "reports")
    os.makedirs(rep_dir, exist_ok=True)
    paths = []
    rootsets = {rec.n: rec.rootset for rec in records
                if rec.approx.denominator.nullspace_dim == 1}
    trajectories = build_trajectories(rootsets)
    targets = []
    tspec = config.analyses.get("trajectories")
    if isinstance(tspec, dict):
        targets = tspec.get("targets", [])
    ext = "csv" if fmt == "csv" else "dat"
    sep = "," if fmt == "csv" else " "
    for t in trajectories:
        tgt = mp.mpc(targets[0][0], targets[0][1]) if targets \
            else t.final_position()
        t.set_target(tgt)
        path = os.path.join(rep_dir, f"trajectory_{t.trajectory_id}.{ext}")
        with open(path, "w") as fh:
            fh.write(sep.join(["n", "re", "im", "distance",
                               "distance_nth_root"]) + "\n")
            for n in t.ns():
                z = t.path[n]
                d = t.distances[n]
                root = float(d ** (mp.mpf(1) / n)) if d > 0 else 0.0
                fh.write(sep.join([str(n), repr(float(mp.re(z))),
                                   repr(float(mp.im(z))),
                                   repr(float(d)), repr(root)]) + "\n")
        paths.append(path)
    if "incomplete" in config.analyses and fmt == "csv":
        spec = config.analyses["incomplete"] \
            if isinstance(config.analyses["incomplete"], dict) else {}
        tables, _ = _incomplete_tables(config, records, spec)
        for comp, data in sorted(tables.items()):
            path = os.path.join(rep_dir, f"incomplete_{comp}.csv")
            with open(path, "w") as fh:
                fh.write("n,abs_A,abs_A_nth_root,alpha_star,contact,"
                         "qstar_zeros\n")
                for row in data["rows"]:
                    zs = ";".join(f"{z[0]}{z[1]:+}j" for z in row["qstar_zeros"])
                    fh.write(",".join([
                        str(row["n"]), repr(row["abs_A"]),
                        repr(row["abs_A_nth_root"]),
                        repr(row.get("alpha_star", "")),
                        str(int(row.get("contact", False))), zs]) + "\n")
            paths.append(path)
    return paths


def verify(run_dir):
    """Re-check residual, root, and normalization invariants of a run.

    Returns a list of failure strings (empty when everything holds).
    """
    from .polynomials import poly_eval_mpc, poly_norm_mpc
    from .solver import build_constraint_matrix, window_residual

    manifest = load_manifest(run_dir)
    config = RunConfig.from_dict(manifest["config"])
    records = load_records(run_dir, manifest)
    system = config.build_system()
    failures = []
    for rec in records:
        a = rec.approx
        prec = a.precision_bits
        with mp.workprec(prec + 32):
            matrix = build_constraint_matrix(system, a.n, prec)
            top = mp.mpf(0)
            for row in matrix.entries:
                for c in row:
                    top = max(top, c.abs_mpf(prec))
            resid = window_residual(system, a.denominator.q, a.n, prec)
            budget = mp.mpf(2) ** (-(prec // 2)) * top
            if resid > budget:
                failures.append(
                    f"n={a.n}: window residual {mp.nstr(resid, 5)} exceeds "
                    f"budget {mp.nstr(budget, 5)}")
            q = a.q_mpc(prec)
            qnorm = poly_norm_mpc(q)
            deg = len(q) - 1
            for r, mult in zip(rec.rootset.roots, rec.rootset.multiplicities):
                bound = mp.mpf(2) ** (-(prec // 2)) * qnorm \
                    * max(mp.mpf(1), abs(r)) ** deg
                if abs(poly_eval_mpc(q, r)) > bound:
                    failures.append(f"n={a.n}: root residual above bound")
                    break
            tol = mp.mpf(2) ** (8 - prec)
            if a.denominator.normalization == "monic":
                piv = q[a.denominator.pivot_index]
                if abs(piv - 1) > tol:
                    failures.append(f"n={a.n}: monic pivot off by "
                                    f"{mp.nstr(abs(piv - 1), 5)}")
            else:
                s = mp.fsum([abs(c) for c in q])
                if abs(s - 1) > tol:
                    failures.append(f"n={a.n}: coefficient sum off unit")
            if len(a.denominator.q) > a.m.total + 1:
                failures.append(f"n={a.n}: deg q exceeds |m|")
            for k, p in enumerate(a.numerators):
                if len(p) - 1 > a.n - a.m[k]:
                    failures.append(f"n={a.n}: deg p_{k} exceeds n - m_k")
    return failures
