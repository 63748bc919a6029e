"""Parameter sweeps, figure presets, CSV/JSON emission and spectral feature extraction."""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import find_peaks

from . import analytic, dynamics, observables, steady_state
from .errors import ConfigError, EIT5Error
from .model import GAMMA_A_SI, OMEGA_P_ABS_DEFAULT, PREFACTOR_DEFAULT, AtomParams, FieldParams, PhysicalScaling

SWEEP_AXES = ("delta_p", "omega_b_rf", "omega_c_rf", "gamma_Cprime", "delta_mu")
METHODS = {"analytic": "analytic", "linear-solve": "solve", "solve": "solve",
           "time-domain": "ode", "ode": "ode"}
COLUMNS = ("delta_p", "re_chi", "im_chi", "alpha", "n", "slope", "vg_ratio")
ATOM_KEYS = tuple(f.name for f in dataclasses.fields(AtomParams))
FIELD_KEYS = tuple(f.name for f in dataclasses.fields(FieldParams))


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a base parameter point, a sweep axis and a method.

    When ``sweep_axis`` is not ``delta_p`` every value of the axis is combined
    with the probe grid ``dp_range``. ``values`` replaces ``range`` with an
    explicit list. All rates and frequencies are in units of ``gamma_ab``.
    """

    atom: AtomParams = field(default_factory=AtomParams)
    fields: FieldParams = field(default_factory=FieldParams)
    sweep_axis: str = "delta_p"
    range: tuple = (-3.0, 3.0, 6001)
    values: tuple | None = None
    dp_range: tuple = (-3.0, 3.0, 6001)
    method: str = "solve"
    outputs: tuple = COLUMNS
    gamma_a_si: float = GAMMA_A_SI
    prefactor: float = PREFACTOR_DEFAULT
    omega_p_abs: float = OMEGA_P_ABS_DEFAULT

    def __post_init__(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {sorted(METHODS)}, got {self.method!r}")
        object.__setattr__(self, "method", METHODS[self.method])
        for name in ("range", "dp_range"):
            start, stop, count = getattr(self, name)
            if int(count) != count or count < 2:
                raise ConfigError(f"{name}: count must be an integer >= 2")
            if not start < stop:
                raise ConfigError(f"{name}: start must be below stop")
            object.__setattr__(self, name, (float(start), float(stop), int(count)))
        if self.values is not None:
            if len(self.values) < 1:
                raise ConfigError("values must not be empty")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        unknown = set(self.outputs) - set(COLUMNS)
        if unknown:
            raise ConfigError(f"unknown output columns {sorted(unknown)}")
        if "delta_p" not in self.outputs:
            object.__setattr__(self, "outputs", ("delta_p",) + tuple(self.outputs))
        if self.method == "analytic" and not self.fields.on_resonance_rf:
            raise ConfigError("analytic method needs delta_b = delta_c = 0")

    @property
    def scaling(self) -> PhysicalScaling:
        return PhysicalScaling.for_atom(self.atom, self.gamma_a_si, prefactor=self.prefactor,
                                        omega_p_abs=self.omega_p_abs)

    def axis_values(self) -> np.ndarray:
        if self.values is not None:
            return np.array(self.values)
        return np.linspace(*self.range)

    def probe_grid(self) -> np.ndarray:
        if self.sweep_axis == "delta_p":
            return self.axis_values()
        return np.linspace(*self.dp_range)

    def to_dict(self) -> dict:
        return {
            "atom": dataclasses.asdict(self.atom),
            "fields": dataclasses.asdict(self.fields),
            "sweep_axis": self.sweep_axis,
            "range": list(self.range),
            "values": None if self.values is None else list(self.values),
            "dp_range": list(self.dp_range),
            "method": self.method,
            "outputs": list(self.outputs),
            "gamma_a_si": self.gamma_a_si,
            "prefactor": self.prefactor,
            "omega_p_abs": self.omega_p_abs,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        atom = AtomParams(**data.pop("atom", {}))
        fields_ = FieldParams(**data.pop("fields", {}))
        for key in ("range", "dp_range", "values", "outputs"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        return cls(atom=atom, fields=fields_, **data)


# Presets -------------------------------------------------------------------------------------

_FIG2 = dict(omega_mu=2.0, omega_b_rf=0.1, omega_c_rf=0.1)
_GAMMA_A = 6.0  # gamma_a in units of gamma_ab when gamma_ab_tilde = 0


def _preset(atom=None, fields=None, **kw) -> SweepConfig:
    return SweepConfig(atom=AtomParams(**(atom or {})), fields=FieldParams(**(fields or {})), **kw)


def _fig7() -> SweepConfig:
    om = 1e-4 * _GAMMA_A
    return _preset(fields=dict(omega_mu=2.0, omega_b_rf=om, omega_c_rf=om),
                   range=(-0.6 * om, 0.6 * om, 40001))


def _fig8() -> SweepConfig:
    om = 0.01 * _GAMMA_A
    g = 1e-4 * _GAMMA_A
    return _preset(atom=dict(gamma_C=g, gamma_Cprime=g),
                   fields=dict(omega_mu=2.0, omega_b_rf=om, omega_c_rf=om),
                   range=(-0.6 * om, 0.6 * om, 40001))


PRESETS = {
    "fig2": lambda: _preset(fields=_FIG2, range=(-3.0, 3.0, 6001)),
    "fig2-zoom": lambda: _preset(fields=_FIG2, range=(-0.1, 0.1, 40001)),
    "fig3": lambda: _preset(atom=dict(gamma_C=1e-3, gamma_Cprime=1e-3),
                            fields=dict(omega_mu=2.0, omega_c_rf=0.1),
                            sweep_axis="omega_b_rf", range=(0.0, 0.1, 51), dp_range=(-0.2, 0.2, 4001)),
    "fig5": lambda: _preset(fields=dict(omega_mu=2.0, omega_b_rf=2.2, omega_c_rf=1.8),
                            range=(-3.3, 3.3, 6601)),
    "fig6": lambda: _preset(fields=_FIG2, sweep_axis="gamma_Cprime", values=(0.0, 1e-3, 1e-2),
                            range=(0.0, 1e-2, 3), dp_range=(-0.1, 0.1, 20001)),
    "fig7": _fig7,
    "fig8": _fig8,
}


def preset(name: str) -> SweepConfig:
    """Baked-in sweep reproducing one figure's parameters."""
    if name == "fig4":
        raise ConfigError("fig4 is an energy-level diagram; it has no data to sweep")
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# Config files --------------------------------------------------------------------------------

def _parse_number_list(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def parse_config_text(text: str, base: SweepConfig | None = None) -> SweepConfig:
    """Parse flat ``key = value`` lines (``#`` starts a comment) over ``base``.

    Keys: any :class:`AtomParams` or :class:`FieldParams` field, ``sweep_axis``,
    ``start``/``stop``/``count``, ``values``, ``dp_start``/``dp_stop``/``dp_count``,
    ``method``, ``outputs``, ``gamma_a_si``, ``prefactor``, ``omega_p_abs`` and
    ``preset`` (applied first).
    """
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    if "preset" in entries:
        base = preset(entries.pop("preset"))
    cfg = base.to_dict() if base is not None else SweepConfig().to_dict()
    try:
        start, stop, count = cfg["range"]
        dp_start, dp_stop, dp_count = cfg["dp_range"]
        for key, value in entries.items():
            if key in ATOM_KEYS:
                cfg["atom"][key] = float(value)
            elif key in FIELD_KEYS:
                cfg["fields"][key] = float(value)
            elif key == "sweep_axis":
                cfg["sweep_axis"] = value
            elif key == "method":
                cfg["method"] = value
            elif key == "start":
                start = float(value)
            elif key == "stop":
                stop = float(value)
            elif key == "count":
                count = _int(value, key)
            elif key == "dp_start":
                dp_start = float(value)
            elif key == "dp_stop":
                dp_stop = float(value)
            elif key == "dp_count":
                dp_count = _int(value, key)
            elif key == "values":
                cfg["values"] = _parse_number_list(value)
            elif key == "outputs":
                cfg["outputs"] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key in ("gamma_a_si", "prefactor", "omega_p_abs"):
                cfg[key] = float(value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value in config: {exc}") from None
    cfg["range"] = (start, stop, count)
    cfg["dp_range"] = (dp_start, dp_stop, dp_count)
    if "values" not in entries and ("start" in entries or "stop" in entries or "count" in entries):
        cfg["values"] = None
    return SweepConfig.from_dict(cfg)


def _int(value: str, key: str) -> int:
    number = float(value)
    if number != int(number):
        raise ConfigError(f"{key} must be an integer")
    return int(number)


def load_config(path: str, base: SweepConfig | None = None) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base)


# Sweep engine --------------------------------------------------------------------------------

def _chi_and_slope(method: str, atom: AtomParams, fields: FieldParams, dp: np.ndarray):
    if method == "solve":
        return (steady_state.chi_numeric(atom, fields, dp),
                steady_state.chi_derivative(atom, fields, dp).real)
    if method == "analytic":
        fn = (lambda x: analytic.chi_reduced(atom, fields, x))
    else:
        fn = (lambda x: dynamics.chi_time_domain(atom, fields, x))
    return fn(dp), _vector_slope(fn, dp, observables.default_step(atom, fields))


def _vector_slope(fn, dp, step):
    """Richardson-extrapolated central difference of ``Re fn`` on a whole grid."""
    coarse = (np.real(fn(dp + step)) - np.real(fn(dp - step))) / (2 * step)
    fine = (np.real(fn(dp + step / 2)) - np.real(fn(dp - step / 2))) / step
    return (4 * fine - coarse) / 3


def _reference(method: str, atom: AtomParams, fields: FieldParams, dp: np.ndarray):
    ref = observables.reference_fields(fields)
    if method == "analytic":
        def fn(x):
            return analytic.chi_standard_eit(atom, ref.omega_mu, x, atom.gamma_C, ref.delta_mu)
        return fn(dp), _vector_slope(fn, dp, observables.default_step(atom, ref))
    return _chi_and_slope(method, atom, ref, dp)


def _evaluate_block(method: str, atom: AtomParams, fields: FieldParams, dp: np.ndarray,
                    scaling: PhysicalScaling) -> dict:
    chi, slope = _chi_and_slope(method, atom, fields, dp)
    chi_ref, slope_ref = _reference(method, atom, fields, dp)
    vg = observables.group_velocity(chi, slope, scaling)
    vg_ref = observables.group_velocity(chi_ref, slope_ref, scaling)
    return {
        "re_chi": np.real(chi), "im_chi": np.imag(chi),
        "alpha": observables.absorption(chi, scaling),
        "n": observables.refractive_index(chi, scaling),
        "slope": np.asarray(slope, dtype=float),
        "vg_ratio": vg / vg_ref,
    }


def _evaluate(method, atom, fields, dp, scaling) -> tuple[dict, list]:
    """Vectorized evaluation; falls back to point-by-point to isolate failing points."""
    names = ("re_chi", "im_chi", "alpha", "n", "slope", "vg_ratio")
    try:
        with np.errstate(all="ignore"):
            return _evaluate_block(method, atom, fields, dp, scaling), [""] * dp.size
    except EIT5Error:
        pass
    cols = {k: np.full(dp.size, np.nan) for k in names}
    errors = [""] * dp.size
    for i, x in enumerate(dp):
        try:
            with np.errstate(all="ignore"):
                res = _evaluate_block(method, atom, fields, np.array([x]), scaling)
            for k in names:
                cols[k][i] = res[k][0]
        except EIT5Error as exc:
            errors[i] = f"{type(exc).__name__}: {exc}"
    return cols, errors


def thread_count() -> int:
    """Worker threads: ``EIT5_THREADS`` if set, else up to 4."""
    env = os.environ.get("EIT5_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError("EIT5_THREADS must be a positive integer") from None
        if n < 1:
            raise ConfigError("EIT5_THREADS must be a positive integer")
        return n
    return min(4, os.cpu_count() or 1)


@dataclass
class SweepTable:
    """Result of :func:`run_sweep`: column arrays in grid order plus per-row error text."""

    config: SweepConfig
    columns: dict
    errors: list

    @property
    def n_rows(self) -> int:
        return len(self.errors)

    def header(self) -> list:
        head = [] if self.config.sweep_axis == "delta_p" else [self.config.sweep_axis]
        return head + list(self.config.outputs) + ["error"]

    def to_csv(self) -> str:
        lines = [",".join(self.header())]
        keys = self.header()[:-1]
        for i in range(self.n_rows):
            cells = ["%.17g" % self.columns[k][i] for k in keys]
            cells.append(self.errors[i].replace(",", ";").replace("\n", " "))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def rows_for(self, axis_value: float) -> dict:
        """Columns restricted to one value of a non-probe sweep axis."""
        mask = self.columns[self.config.sweep_axis] == axis_value
        return {k: v[mask] for k, v in self.columns.items()}


CHUNK = 2048


def run_sweep(config: SweepConfig, threads: int | None = None) -> SweepTable:
    """Evaluate every grid point; results are in grid order and independent of ``threads``.

    Points that hit a solver error get NaN values and the message in the error
    column; the sweep continues.
    """
    threads = thread_count() if threads is None else threads
    scaling = config.scaling
    dp = config.probe_grid()
    if config.sweep_axis == "delta_p":
        jobs = [(config.fields, config.atom, None)]
    else:
        jobs = []
        for v in config.axis_values():
            if config.sweep_axis == "gamma_Cprime":
                jobs.append((config.fields, replace(config.atom, gamma_Cprime=v), v))
            else:
                jobs.append((replace(config.fields, **{config.sweep_axis: v}), config.atom, v))
    tasks = [(fields, atom, v, dp[i:i + CHUNK]) for fields, atom, v in jobs
             for i in range(0, dp.size, CHUNK)]

    def work(task):
        fields, atom, _, chunk = task
        return _evaluate(config.method, atom, fields, chunk, scaling)

    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    columns = {k: [] for k in COLUMNS}
    if config.sweep_axis != "delta_p":
        columns[config.sweep_axis] = []
    errors = []
    for (fields, atom, v, chunk), (cols, errs) in zip(tasks, results):
        columns["delta_p"].append(chunk)
        for k in COLUMNS[1:]:
            columns[k].append(np.asarray(cols[k], dtype=float))
        if v is not None:
            columns[config.sweep_axis].append(np.full(chunk.size, v))
        errors.extend(errs)
    return SweepTable(config, {k: np.concatenate(v) for k, v in columns.items()}, errors)


def write_outputs(table: SweepTable, csv_path: str, json_path: str | None = None) -> None:
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(table.to_csv())
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump({"config": table.config.to_dict(), "rows": table.n_rows,
                       "failed_rows": sum(bool(e) for e in table.errors)}, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_csv(path: str) -> dict:
    """Read a sweep CSV back into float columns (the ``error`` column stays text)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    out = {}
    for j, name in enumerate(header):
        if name == "error":
            out[name] = [r[j] if j < len(r) else "" for r in rows]
        else:
            out[name] = np.array([float(r[j]) for r in rows])
    return out


# Feature extraction --------------------------------------------------------------------------

MIN_POINTS_PER_FWHM = 8


@dataclass(frozen=True)
class Peak:
    center: float
    height: float
    fwhm: float
    baseline: float
    under_resolved: bool


@dataclass
class FeatureReport:
    """Extracted maxima of ``Im chi`` sorted by center, optionally paired with predictions."""

    peaks: list
    analytic: list = field(default_factory=list)
    relative_errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "peaks": [dataclasses.asdict(p) for p in self.peaks],
            "analytic": [dataclasses.asdict(r) for r in self.analytic],
            "relative_errors": self.relative_errors,
        }


def _downhill(y: np.ndarray, i: int, step: int) -> int:
    while 0 <= i + step < y.size and y[i + step] <= y[i]:
        i += step
    return i


def _crossing(x, y, i, level, step) -> float:
    j = i
    while 0 <= j + step < y.size and y[j + step] > level:
        j += step
    k = j + step
    if not 0 <= k < y.size:
        return math.nan
    # linear interpolation between j (above level) and k (at or below)
    return x[j] + (level - y[j]) * (x[k] - x[j]) / (y[k] - y[j])


def extract_features(delta_p, im_chi, min_prominence: float | None = None,
                     predictions=None) -> FeatureReport:
    """Local maxima of ``im_chi`` with prominence above ``min_prominence``.

    ``min_prominence`` defaults to ``1e-3`` of the global maximum. The width is
    taken at half of (peak - baseline), where the baseline is the lower of the
    two local minima reached by walking downhill from the peak; half-height
    crossings are linearly interpolated. Peaks with fewer than eight grid
    points across their width are flagged ``under_resolved``. ``predictions``
    (e.g. from :func:`eit5.analytic.narrow_resonances`) are paired with the
    nearest extracted peak.
    """
    x = np.asarray(delta_p, dtype=float)
    y = np.asarray(im_chi, dtype=float)
    if x.size < 3:
        return FeatureReport([])
    order = np.argsort(x)
    x, y = x[order], y[order]
    finite = np.isfinite(y)
    x, y = x[finite], y[finite]
    top = np.max(np.abs(y)) if y.size else 0.0
    if top == 0:
        return FeatureReport([])
    if min_prominence is None:
        min_prominence = 1e-3 * top
    idx, _ = find_peaks(y, prominence=min_prominence)
    spacing = float(np.median(np.diff(x)))
    peaks = []
    for i in idx:
        base = min(y[_downhill(y, i, -1)], y[_downhill(y, i, +1)])
        level = base + (y[i] - base) / 2
        fwhm = _crossing(x, y, i, level, +1) - _crossing(x, y, i, level, -1)
        under = not (fwhm >= MIN_POINTS_PER_FWHM * spacing)
        peaks.append(Peak(float(x[i]), float(y[i]), float(fwhm), float(base), under))
    report = FeatureReport(peaks)
    if predictions:
        for pred in predictions:
            report.analytic.append(pred)
            if not peaks:
                report.relative_errors.append(None)
                continue
            near = min(peaks, key=lambda p: abs(p.center - pred.center))
            report.relative_errors.append({
                "center": abs(near.center - pred.center) / max(abs(pred.center), spacing),
                "fwhm": abs(near.fwhm - pred.fwhm) / pred.fwhm if pred.fwhm > 0 else math.nan,
                "height": abs(near.height - pred.height) / pred.height if pred.height else math.nan,
                "height_model": (abs(near.height - pred.height_model) / pred.height_model
                                 if pred.height_model else math.nan),
            })
    return report


def features_from_csv(path: str, config: SweepConfig | None = None,
                      min_prominence: float | None = None) -> FeatureReport | dict:
    """Feature report for a sweep CSV; one report per axis value for two-axis sweeps."""
    data = read_csv(path)
    axis = next((k for k in data if k in SWEEP_AXES and k != "delta_p"), None)

    def predictions(value=None):
        if config is None or not config.fields.on_resonance_rf or config.fields.delta_mu != 0:
            return None
        atom, fields = config.atom, config.fields
        if axis == "gamma_Cprime":
            atom = replace(atom, gamma_Cprime=value)
        elif axis is not None:
            fields = replace(fields, **{axis: value})
        if fields.omega_mu == 0:
            return None
        return list(analytic.narrow_resonances(atom, fields))

    if axis is None:
        return extract_features(data["delta_p"], data["im_chi"], min_prominence, predictions())
    out = {}
    for value in np.unique(data[axis]):
        mask = data[axis] == value
        out[repr(float(value))] = extract_features(data["delta_p"][mask], data["im_chi"][mask],
                                                   min_prominence, predictions(float(value)))
    return out
