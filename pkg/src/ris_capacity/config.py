"""
Experiment description files.

An experiment is a flat YAML mapping with a ``scenario`` section in user
units (degrees, dB, Hz, meters, wavelengths), an optional single-parameter
``sweep`` and run options. Unit conversion to the library's linear and
radian conventions happens here and nowhere else.
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import scenarios

__all__ = [
    "KINDS",
    "GEOMETRIES",
    "ScenarioParams",
    "Sweep",
    "ExperimentSpec",
    "ConfigError",
    "load_spec",
    "parse_spec",
    "validate",
    "db_to_linear",
    "linear_to_db",
]

KINDS = ("spectrum", "mi", "variance", "montecarlo", "optimize", "placement",
         "figure2", "figure3", "figure4", "figure5", "figure6")
GEOMETRIES = ("angles", "tilt", "placement")


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(np.asarray(value, dtype=float))


class ConfigError(ValueError):
    """Malformed experiment file; ``diagnostics`` lists every problem."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class ScenarioParams:
    """Scenario in user units.

    ``geometry`` selects how the RIS wave directions are set:
    ``angles`` uses ``theta1_deg`` and ``theta2_deg`` directly, ``tilt``
    rotates the lattice so that the local incidence is ``theta1_deg`` with
    ``theta1 + theta2 = theta_total_deg``, and ``placement`` derives both
    from the positions ``(x, +-h)`` of the RISs.
    """

    name: str = "scenario"
    n_t: int = 8
    n_r: int = 4
    snr_db: float = 10.0
    frequency_hz: float = 2.5e9
    k: int = 1
    n_d: int = 20
    spacing_wavelengths: float = 0.5
    angle_spread_deg: float = 5.0
    theta1_deg: float = 30.0
    theta2_deg: float = 70.0
    theta_total_deg: float = 100.0
    geometry: str = "angles"
    direct_link: bool = False
    d: float = 1.0
    h: float = 0.7
    x: float = 0.0
    pathloss_exponent: float = 2.0
    gamma: float = None
    q: list = None

    @property
    def wavelength(self):
        return scenarios.wavelength_at(self.frequency_hz)

    @property
    def spacing(self):
        return self.spacing_wavelengths * self.wavelength

    def with_value(self, name, value):
        return dataclasses.replace(self, **{name: value})

    def diagnostics(self):
        out = []
        if self.geometry not in GEOMETRIES:
            out.append(f"scenario.geometry must be one of {', '.join(GEOMETRIES)}")
        for name in ("n_t", "n_r", "k", "n_d"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                out.append(f"scenario.{name} must be an integer >= 1")
        if not self.frequency_hz > 0:
            out.append("scenario.frequency_hz must be positive")
        if not self.spacing_wavelengths > 0:
            out.append("scenario.spacing_wavelengths must be positive")
        if not 0 < self.angle_spread_deg <= 180:
            out.append("scenario.angle_spread_deg must lie in (0, 180]")
        for name in ("theta1_deg", "theta2_deg"):
            if not -90 <= getattr(self, name) <= 90:
                out.append(f"scenario.{name} must lie in [-90, 90] degrees")
        if not self.d > 0:
            out.append("scenario.d must be positive")
        if self.geometry == "placement" and self.h == 0:
            out.append("scenario.h must be non-zero for the placement geometry")
        if self.geometry == "placement" and not abs(self.x) < self.d / 2:
            out.append("scenario.x must lie in (-d/2, d/2)")
        return out

    def build(self):
        """The :class:`SystemConfig` described by these parameters."""
        sigma = np.deg2rad(self.angle_spread_deg)
        common = dict(n_t=int(self.n_t), n_r=int(self.n_r), rho=float(db_to_linear(self.snr_db)),
                      n_d=int(self.n_d), wavelength=self.wavelength, name=self.name,
                      direct_link=bool(self.direct_link), q=self.q)
        if self.geometry == "tilt":
            return scenarios.tilt_config(np.deg2rad(self.theta1_deg),
                                         np.deg2rad(self.theta_total_deg), k=int(self.k),
                                         sigma=sigma, spacing=self.spacing, d=self.d, h=self.h,
                                         pathloss_exponent=self.pathloss_exponent, **common)
        if self.geometry == "placement":
            return scenarios.placement_config(self.x, self.h, d=self.d, k=int(self.k), sigma=sigma,
                                              spacing=self.spacing,
                                              pathloss_exponent=self.pathloss_exponent, **common)
        return scenarios.reference_config(int(self.k), sigma, np.deg2rad(self.theta1_deg),
                                          np.deg2rad(self.theta2_deg), spacing=self.spacing,
                                          x=self.x, gamma=self.gamma, d=self.d, h=self.h,
                                          pathloss_exponent=self.pathloss_exponent, **common)


_SCENARIO_FIELDS = {f.name for f in dataclasses.fields(ScenarioParams)}
_NUMERIC_FIELDS = {f.name: f.type for f in dataclasses.fields(ScenarioParams)
                   if f.type in (int, float)}


def _coerce(name, value, problems, where):
    """Numeric scenario fields given as strings (YAML 1.1 reads ``2.5e9``
    as text) are converted; anything else non-numeric is reported."""
    kind = _NUMERIC_FIELDS.get(name)
    if kind is None or not isinstance(value, str):
        return value
    try:
        number = float(value)
    except ValueError:
        problems.append(f"{where}: expected a number, got {value!r}")
        return value
    return int(number) if kind is int and number.is_integer() else number


@dataclass(frozen=True)
class Sweep:
    """One scenario parameter and the list of values it takes."""

    parameter: str
    values: tuple


# run options with their defaults; kind-specific ones are ignored elsewhere
_OPTION_DEFAULTS = {
    "samples": None,
    "phases": "identity",
    "outage_probability": 0.1,
    "k_values": [1, 2, 4],
    "x_over_d": [round(v, 10) for v in np.arange(-0.45, 0.4501, 0.05)],
    "h_values": [0.3, 0.7],
    "grid_points": 200,
    "dump_samples": False,
    "sigma_values_deg": [5.0, 15.0],
    "spacing_values_wavelengths": [0.5, 0.25],
    "optimizer_tol": 1e-8,
}


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    scenario: ScenarioParams = field(default_factory=ScenarioParams)
    sweep: Sweep = None
    output_path: str = None
    seed: int = 0
    threads: int = 1
    options: dict = field(default_factory=dict)
    source: str = None

    def option(self, name):
        return self.options.get(name, _OPTION_DEFAULTS[name])

    def points(self):
        """Scenario parameters for each sweep value, in sweep order."""
        if self.sweep is None:
            return [(None, self.scenario)]
        return [(v, self.scenario.with_value(self.sweep.parameter, v)) for v in self.sweep.values]


def _mark(exc):
    mark = getattr(exc, "problem_mark", None)
    return f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"


def parse_spec(text, kind=None, output_path=None, seed=None, samples=None, threads=None,
               source=None):
    """Parse YAML ``text`` into an :class:`ExperimentSpec`.

    Command-line values (when not ``None``) override the file.

    Raises
    ------
    ConfigError
        With one diagnostic per malformed field; YAML syntax errors carry
        their line and column.
    """
    try:
        raw = yaml.safe_load(text) if text else {}
    except yaml.YAMLError as exc:
        raise ConfigError([f"{source or 'config'}: YAML error at {_mark(exc)}: "
                           f"{getattr(exc, 'problem', exc)}"]) from None
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError(["top level of the config must be a mapping"])
    problems = []
    raw = dict(raw)
    scen = raw.pop("scenario", {}) or {}
    if not isinstance(scen, dict):
        problems.append("scenario must be a mapping")
        scen = {}
    unknown = sorted(set(scen) - _SCENARIO_FIELDS)
    problems += [f"scenario.{name}: unknown field" for name in unknown]
    scenario = ScenarioParams(**{k: _coerce(k, v, problems, f"scenario.{k}")
                                 for k, v in scen.items() if k in _SCENARIO_FIELDS})

    sweep = None
    sweep_raw = raw.pop("sweep", None)
    if sweep_raw is not None:
        if not isinstance(sweep_raw, dict) or set(sweep_raw) != {"parameter", "values"}:
            problems.append("sweep must be a mapping with exactly 'parameter' and 'values'")
        else:
            param, values = sweep_raw["parameter"], sweep_raw["values"]
            if param not in _SCENARIO_FIELDS:
                problems.append(f"sweep.parameter: '{param}' is not a scenario field")
            if not isinstance(values, list) or not values:
                problems.append("sweep.values must be a non-empty list")
            elif any(isinstance(v, (list, dict)) for v in values):
                problems.append("sweep.values must be scalars (cross-products are not supported)")
            else:
                sweep = Sweep(param, tuple(_coerce(param, v, problems, "sweep.values")
                                           for v in values))

    file_kind = raw.pop("kind", None)
    file_seed = raw.pop("seed", 0)
    file_threads = raw.pop("threads", 1)
    file_out = raw.pop("output", None)
    options = {}
    for name, value in raw.items():
        if name in _OPTION_DEFAULTS:
            options[name] = value
        else:
            problems.append(f"{name}: unknown top-level field")
    if samples is not None:
        options["samples"] = samples
    if problems:
        raise ConfigError(problems)
    return ExperimentSpec(
        kind=kind or file_kind,
        scenario=scenario,
        sweep=sweep,
        output_path=output_path or file_out,
        seed=int(file_seed if seed is None else seed),
        threads=int(file_threads if threads is None else threads),
        options=options,
        source=source,
    )


def load_spec(path, **overrides):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc.strerror}"]) from None
    return parse_spec(text, source=str(path), **overrides)


_SAMPLE_KINDS = ("montecarlo", "figure3", "figure6")
# kinds whose pipelines interpret the sweep as one specific parameter
_SWEEP_PARAMETERS = {"figure3": "angle_spread_deg", "figure4": "theta1_deg", "placement": "h"}
_NO_SWEEP = ("figure2", "figure5", "figure6")


def validate(spec):
    """Every problem with ``spec`` as a list of strings; empty when the
    experiment can run. Nothing is computed beyond building the scenario
    configurations."""
    out = []
    if spec.kind not in KINDS:
        out.append(f"kind must be one of {', '.join(KINDS)} (got {spec.kind!r})")
    if not spec.output_path:
        out.append("an output path is required")
    if not 0 <= spec.seed < 2**64:
        out.append("seed must be a 64-bit unsigned integer")
    if spec.threads < 1:
        out.append("threads must be >= 1")
    if spec.sweep is not None:
        wanted = _SWEEP_PARAMETERS.get(spec.kind)
        if spec.kind in _NO_SWEEP:
            out.append(f"kind {spec.kind} does not take a sweep; use its list options")
        elif wanted is not None and spec.sweep.parameter != wanted:
            out.append(f"kind {spec.kind} sweeps {wanted} only (got {spec.sweep.parameter})")
    samples = spec.option("samples")
    if spec.kind in _SAMPLE_KINDS and samples is not None and int(samples) < 1:
        out.append(f"samples must be >= 1 for kind {spec.kind} (got {samples})")
    if spec.kind == "montecarlo" and samples is None:
        out.append("samples is required for kind montecarlo")
    if spec.option("phases") not in ("identity", "analytic", "numeric"):
        out.append("phases must be identity, analytic or numeric")
    p = spec.option("outage_probability")
    if not 0 < p < 1:
        out.append("outage_probability must lie in (0, 1)")
    for value, params in spec.points():
        label = "" if value is None else f"[{spec.sweep.parameter}={value}] "
        problems = params.diagnostics()
        if not problems:
            try:
                problems = params.build().diagnostics()
            except (ValueError, TypeError) as exc:
                problems = [str(exc)]
        out += [label + msg for msg in problems]
    return out
