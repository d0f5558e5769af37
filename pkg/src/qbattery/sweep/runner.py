"""Evaluate a SweepSpec on every tier and write CSV datasets plus a JSON manifest.

Per-point failures never abort a sweep; they are recorded in the status
column of the tier CSV and in the manifest. Rows always follow the grid
order (first axis outer, second axis inner) regardless of worker count.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import io
import json
import math
import os
from pathlib import Path

import numpy as np

from .. import analytic, fock, moments
from ..errors import BatteryError, NoSteadyState, OutputError
from ..fmt import format_float
from ..params import BatteryParams, DriveKind
from .config import SweepSpec
from .recipes import Tier

SCHEMA_VERSION = "1"
MOMENT_TOL = 1e-10
COMPARE_FLOOR = 1e-12

ANALYTIC_COLUMNS = (
    "e_holder", "e_passive", "ergotropy", "d_value", "stable", "omega_c1", "omega_c2",
    "delta_opt", "max_ergotropy", "eps_plus_re", "eps_plus_im", "eps_minus_re", "eps_minus_im",
    "omega_plus_re", "omega_plus_im", "omega_minus_re", "omega_minus_im", "ham_stable",
)  # fmt: skip
MOMENT_COLUMNS = (
    "n_c", "n_h", "e_holder", "e_passive", "ergotropy", "d_value",
    "var_x", "var_p", "uncertainty_product", "power", "growth_rate",
)  # fmt: skip
FOCK_COLUMNS = (
    "n_c", "n_h", "e_holder", "e_passive", "ergotropy", "purity", "negativity", "gap",
    "top_level_population",
)  # fmt: skip
COLUMNS = {Tier.ANALYTIC: ANALYTIC_COLUMNS, Tier.MOMENTS: MOMENT_COLUMNS, Tier.FOCK: FOCK_COLUMNS}
COMPARED = ("n_h", "e_holder", "e_passive", "ergotropy")
FILE_NAMES = {Tier.ANALYTIC: "analytic.csv", Tier.MOMENTS: "moments.csv", Tier.FOCK: "fock.csv"}


@dataclasses.dataclass
class PointResult:
    values: dict
    status: str = "ok"


@dataclasses.dataclass
class SweepResult:
    spec: SweepSpec
    coords: list  # one tuple per row
    tiers: dict  # Tier -> list[PointResult]
    files: dict  # file name -> path
    manifest: dict


def _empty(tier) -> dict:
    return {c: math.nan for c in COLUMNS[tier]}


def _status_of(exc: Exception) -> str:
    if isinstance(exc, NoSteadyState):
        return "no-steady-state"
    return f"error:{type(exc).__name__}"


# --------------------------------------------------------------------------
# point evaluation per tier
# --------------------------------------------------------------------------


def _analytic_common(p: BatteryParams, v: dict) -> None:
    if p.drive_kind is DriveKind.LINEAR:
        if p.gamma > 0:
            spec = analytic.classify_linear_regime(p)
            v.update(eps_plus_re=spec.eps_plus.real, eps_plus_im=spec.eps_plus.imag,
                     eps_minus_re=spec.eps_minus.real, eps_minus_im=spec.eps_minus.imag)  # fmt: skip
            v["delta_opt"] = analytic.linear_optimal_detuning(p.g, p.gamma)
            v["stable"] = 1.0
            if p.g > 0:
                v["max_ergotropy"] = analytic.linear_max_steady_ergotropy(p)
    else:
        c1, c2 = analytic.critical_amplitudes(p)
        v.update(omega_c1=c1, omega_c2=c2, stable=float(analytic.liouvillian_stable(p)))
        bog = analytic.bogoliubov_spectrum(p)
        v.update(omega_plus_re=bog.omega_plus.real, omega_plus_im=bog.omega_plus.imag,
                 omega_minus_re=bog.omega_minus.real, omega_minus_im=bog.omega_minus.imag,
                 ham_stable=float(bog.stable))  # fmt: skip


def _report_values(rep) -> dict:
    return {"e_holder": rep.e_holder, "e_passive": rep.e_passive, "ergotropy": rep.ergotropy, "d_value": rep.d_value}


def analytic_point(p: BatteryParams, t: float | None = None) -> PointResult:
    v = _empty(Tier.ANALYTIC)
    status = "ok"
    try:
        _analytic_common(p, v)
        if p.drive_kind is DriveKind.LINEAR:
            rep = analytic.linear_steady_ergotropy(p) if t is None else analytic.linear_ergotropy_at(p, t)
            v.update(_report_values(rep))
        elif t is None:
            if analytic.liouvillian_stable(p):
                v.update(_report_values(analytic.quadratic_steady_ergotropy(p)))
            else:
                status = "unstable"
        else:
            status = "unsupported"
    except BatteryError as exc:
        status = _status_of(exc)
    return PointResult(v, status)


def _moment_values(m: moments.MomentState, p: BatteryParams, t: float | None) -> dict:
    v = {"n_c": m.n_c, "n_h": m.n_h}
    rep = moments.energy_report_from_moments(m, p.omega_b)
    v.update(_report_values(rep))
    q = moments.quadrature_variances(m, p.theta)
    v.update(var_x=q.var_x, var_p=q.var_p, uncertainty_product=q.uncertainty_product)
    if t is not None:
        v["power"] = rep.ergotropy / t if t > 0 else 0.0
    return v


def moments_point(p: BatteryParams) -> PointResult:
    v = _empty(Tier.MOMENTS)
    try:
        v["growth_rate"] = moments.max_growth_rate(p)
        if p.drive_kind is DriveKind.QUADRATIC and not analytic.liouvillian_stable(p):
            return PointResult(v, "unstable")
        v.update(_moment_values(moments.steady_state_moments(p), p, None))
        return PointResult(v, "ok")
    except BatteryError as exc:
        return PointResult(v, _status_of(exc))


def moments_series(p: BatteryParams, times, tol: float = MOMENT_TOL) -> list:
    times = np.asarray(times, dtype=float)
    rows = [PointResult(_empty(Tier.MOMENTS)) for _ in times]
    try:
        growth = moments.max_growth_rate(p)
        unstable = p.drive_kind is DriveKind.QUADRATIC and not analytic.liouvillian_stable(p)
        traj = moments.integrate(p, float(times.max()), tol, t_eval=times)
    except BatteryError as exc:
        for r in rows:
            r.status = _status_of(exc)
        return rows
    for i, t in enumerate(times):
        r = rows[i]
        r.values["growth_rate"] = growth
        if i >= len(traj):
            r.status = "diverged"
            continue
        try:
            r.values.update(_moment_values(traj.state(i), p, float(t)))
            r.status = "unstable" if unstable else "ok"
        except BatteryError as exc:
            r.status = _status_of(exc)
    return rows


def _fock_values(state: fock.DensityState, p: BatteryParams, cfg: fock.FockConfig) -> dict:
    m = fock.moments_from_density(state, cfg)
    rep = fock.passive_energy_and_ergotropy(fock.reduced_holder_state(state), p.omega_b)
    return {
        "n_c": m.n_c, "n_h": m.n_h, "e_holder": rep.e_holder, "e_passive": rep.e_passive,
        "ergotropy": rep.ergotropy, "purity": fock.purity(state), "negativity": fock.negativity(state, cfg),
        "top_level_population": state.top_level_population,
    }  # fmt: skip


def _fock_status(state: fock.DensityState) -> str:
    if state.saturated:
        return "unstable"
    return "truncation-warning" if state.truncation_warning else "ok"


def fock_point(p: BatteryParams, cfg: fock.FockConfig) -> PointResult:
    v = _empty(Tier.FOCK)
    try:
        state = fock.steady_state_density(p, cfg)
        v.update(_fock_values(state, p, cfg))
        if cfg.dim <= fock.DENSE_GAP_CAP:
            v["gap"] = fock.liouvillian_gap(p, cfg)
        return PointResult(v, _fock_status(state))
    except BatteryError as exc:
        return PointResult(v, _status_of(exc))


def fock_series(p: BatteryParams, cfg: fock.FockConfig, times) -> list:
    rows = [PointResult(_empty(Tier.FOCK)) for _ in times]
    try:
        states = fock.evolve_density(fock.DensityState.vacuum(cfg), p, cfg, times)
    except BatteryError as exc:
        for r in rows:
            r.status = _status_of(exc)
        return rows
    for r, s in zip(rows, states):
        r.values.update(_fock_values(s, p, cfg))
        r.status = "truncation-warning" if s.truncation_warning else "ok"
    return rows


# --------------------------------------------------------------------------
# grid handling
# --------------------------------------------------------------------------


def _apply(spec: SweepSpec, coords: dict):
    changes = {}
    cfg = spec.fock
    for name, value in coords.items():
        if name == "t":
            continue
        if name == "n":
            n = int(value)
            cfg = fock.FockConfig(n, n, cfg.rwa if cfg else True)
        elif name == "omega":
            changes["omega_drive_amp"] = value
        else:
            changes[name] = value
    p = spec.params.replace(**changes) if changes else spec.params
    return p, (cfg or fock.FockConfig())


def _units(spec: SweepSpec) -> list:
    """Work units: (row indices, coords without t, times or None)."""
    axes = spec.axes
    shape = tuple(a.count for a in axes)
    index = np.arange(int(np.prod(shape))).reshape(shape)
    names = spec.axis_names
    if "t" not in names:
        return [((int(i),), {a.name: a.values[j] for a, j in zip(axes, np.unravel_index(i, shape))}, None)
                for i in index.ravel()]  # fmt: skip
    t_pos = names.index("t")
    times = axes[t_pos].values
    if len(axes) == 1:
        return [(tuple(int(i) for i in index), {}, times)]
    other = 1 - t_pos
    units = []
    for j, value in enumerate(axes[other].values):
        rows = index[:, j] if t_pos == 0 else index[j, :]
        units.append((tuple(int(i) for i in rows), {axes[other].name: value}, times))
    return units


def _evaluate_unit(args):
    spec, coords, times, tol = args
    p, cfg = _apply(spec, coords)
    out = {}
    for tier in spec.tiers:
        if times is None:
            if tier is Tier.ANALYTIC:
                out[tier] = [analytic_point(p)]
            elif tier is Tier.MOMENTS:
                out[tier] = [moments_point(p)]
            else:
                out[tier] = [fock_point(p, cfg)]
        else:
            if tier is Tier.ANALYTIC:
                out[tier] = [analytic_point(p, float(t)) for t in times]
            elif tier is Tier.MOMENTS:
                out[tier] = moments_series(p, times, tol)
            else:
                out[tier] = fock_series(p, cfg, times)
    return out


def _grid_coords(spec: SweepSpec) -> list:
    if len(spec.axes) == 1:
        return [(v,) for v in spec.axes[0].values]
    return [(a, b) for a in spec.axes[0].values for b in spec.axes[1].values]


def evaluate(spec: SweepSpec, workers: int = 1, tol: float = MOMENT_TOL) -> tuple:
    units = _units(spec)
    coords = _grid_coords(spec)
    tiers = {t: [None] * len(coords) for t in spec.tiers}
    jobs = [(spec, c, t, tol) for _, c, t in units]
    if workers > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_unit, jobs))
    else:
        results = [_evaluate_unit(j) for j in jobs]
    for (rows, _, _), res in zip(units, results):
        for tier, points in res.items():
            for r, pt in zip(rows, points):
                tiers[tier][r] = pt
    return coords, tiers


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(x if isinstance(x, str) else format_float(x) for x in row) + "\n")
    return buf.getvalue()


def tier_csv(spec: SweepSpec, coords, points, tier) -> str:
    cols = COLUMNS[tier]
    rows = ([*c, *(pt.values[k] for k in cols), pt.status] for c, pt in zip(coords, points))
    return _csv([*spec.axis_names, *cols, "status"], rows)


def relative_difference(a: float, b: float) -> float:
    if not (math.isfinite(a) and math.isfinite(b)):
        return math.nan
    # values below the floor count as zero, so exact zeros do not produce 100 % noise
    return abs(a - b) / max(abs(a), abs(b), COMPARE_FLOOR)


def comparison(spec: SweepSpec, coords, tiers) -> tuple:
    names = [t for t in (Tier.ANALYTIC, Tier.MOMENTS, Tier.FOCK) if t in tiers]
    pairs = [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]
    cols = []
    for a, b in pairs:
        for k in COMPARED:
            if k in COLUMNS[a] and k in COLUMNS[b]:
                cols.append((a, b, k))
    header = [*spec.axis_names] + [f"{a.value.lower()}_vs_{b.value.lower()}_{k}" for a, b, k in cols]
    table = []
    for i, c in enumerate(coords):
        table.append([relative_difference(tiers[a][i].values[k], tiers[b][i].values[k]) for a, b, k in cols])
    summary = {}
    arr = np.array(table, dtype=float).reshape(len(coords), len(cols))
    for j, name in enumerate(header[len(spec.axis_names):]):
        col = arr[:, j]
        col = col[np.isfinite(col)]
        summary[name] = {
            "max": float(col.max()) if col.size else None,
            "median": float(np.median(col)) if col.size else None,
            "count": int(col.size),
        }
    text = _csv(header, ([*c, *row] for c, row in zip(coords, table)))
    lines = ["column,max,median,count"]
    for name, s in summary.items():
        lines.append(",".join([name, format_float(s["max"] if s["max"] is not None else math.nan),
                               format_float(s["median"] if s["median"] is not None else math.nan), str(s["count"])]))  # fmt: skip
    return text, "\n".join(lines) + "\n", summary


def git_style_hash(data: bytes) -> str:
    """Content hash in the form of a git blob id."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def run_sweep(spec: SweepSpec, out_dir=None, workers: int = 1, tol: float = MOMENT_TOL) -> SweepResult:
    """Evaluate the sweep and write every output file into ``out_dir``."""
    out_dir = Path(out_dir or spec.output_path or os.environ.get("QBATTERY_OUT", "sweep-out"))
    coords, tiers = evaluate(spec, workers, tol)
    texts = {}
    for tier in spec.tiers:
        texts[FILE_NAMES[tier]] = tier_csv(spec, coords, tiers[tier], tier)
    summary = None
    if len(spec.tiers) >= 2:
        cmp_text, summary_text, summary = comparison(spec, coords, tiers)
        texts["comparison.csv"] = cmp_text
        texts["comparison_summary.csv"] = summary_text

    inputs = json.dumps(spec.as_dict(), sort_keys=True, separators=(",", ":")).encode()
    points = []
    counts = {}
    for i, c in enumerate(coords):
        st = {t.value: tiers[t][i].status for t in spec.tiers}
        for t, s in st.items():
            counts.setdefault(t, {}).setdefault(s, 0)
            counts[t][s] += 1
        points.append({"index": i, "coords": list(c), "status": st})
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "recipe": spec.recipe.value,
        "spec": spec.as_dict(),
        "input_hash": git_style_hash(inputs),
        "tolerances": {
            "moment_integration_rtol": tol,
            "moment_singular_condition": moments.SINGULAR_CONDITION,
            "fock_truncation_warning": fock.TRUNCATION_WARNING,
            "fock_null_tol": fock.NULL_TOL,
        },
        "masked_unstable": spec.masked,
        "files": [
            {"name": name, "sha256": hashlib.sha256(text.encode()).hexdigest(), "bytes": len(text.encode())}
            for name, text in sorted(texts.items())
        ],
        "status_counts": counts,
        "comparison_summary": summary,
        "points": points,
    }
    files = {}
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in texts.items():
            path = out_dir / name
            path.write_text(text, encoding="utf-8")
            files[name] = path
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        files["manifest.json"] = path
    except OSError as exc:
        raise OutputError(f"cannot write sweep output to {out_dir}: {exc}") from exc
    return SweepResult(spec, coords, tiers, files, manifest)
