"""
Experiment pipelines behind the command-line kinds.

Each pipeline takes an :class:`~ris_capacity.config.ExperimentSpec` and
returns a :class:`Table` (header plus rows in sweep order) and optionally
side tables written next to the main output.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import kstest, norm

from .channel import build_correlation, pathloss_factor
from .config import linear_to_db
from .detequiv import config_sigmas, mi_statistics, outage_mi, solve_fixed_point
from .montecarlo import empirical_cdf, simulate
from .optimizer import PhaseProfile, alternating_optimize, analytic_phases
from .spectra import StepCdf, kolmogorov_distance, spectral_density, theoretical_eigen_cdf
from .scenarios import incoming_weight

__all__ = ["Table", "PIPELINES", "run_pipeline", "phase_profiles", "evaluate"]

DEFAULT_SIGMAS_DEG = (1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 45.0, 60.0)
DEFAULT_THETA1_DEG = tuple(float(v) for v in range(10, 91, 5))
MEAN_SAMPLES = 2000
CDF_SAMPLES = 4000


@dataclass
class Table:
    header: tuple
    rows: list
    extras: dict = field(default_factory=dict)


def phase_profiles(config, mode, optimizer_tol=1e-8):
    """Profiles for every RIS: ``identity``, ``analytic`` or ``numeric``
    (alternating optimization from the analytic start)."""
    if mode == "identity":
        return [PhaseProfile.identity(r.geometry.n_s, k) for k, r in enumerate(config.ris)]
    if mode == "analytic":
        return [analytic_phases(r.s_t(), r.s_r(), r.geometry, k) for k, r in enumerate(config.ris)]
    if mode == "numeric":
        return alternating_optimize(config, tol=optimizer_tol).phases
    raise ValueError(f"unknown phase mode {mode!r}")


def evaluate(config, phases):
    """Fixed point and MI statistics under ``phases``."""
    sigmas = config_sigmas(config, phases)
    sol = solve_fixed_point(config, sigmas)
    return sol, mi_statistics(config, sigmas, sol)


def _map(spec, fn, items):
    items = list(items)
    if spec.threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _sweep_value(value):
    return "" if value is None else value


_SCENARIO_HEADER = ("sweep_value", "scenario", "K", "sigma_deg", "theta1_deg", "theta2_deg",
                    "x_over_d")


def _scenario_cells(value, params):
    return [_sweep_value(value), params.name, params.k, params.angle_spread_deg,
            params.theta1_deg, params.theta2_deg, params.x / params.d]


def _mi(spec, with_variance):
    mode = spec.option("phases")
    p = spec.option("outage_probability")

    def point(item):
        value, params = item
        config = params.build()
        _, stats = evaluate(config, phase_profiles(config, mode, spec.option("optimizer_tol")))
        row = _scenario_cells(value, params) + [stats.mean_nats, stats.variance_nats2]
        if with_variance:
            row += [stats.std_nats, p, outage_mi(stats, p)]
        return row

    header = _SCENARIO_HEADER + ("mean", "variance")
    if with_variance:
        header += ("std", "outage_probability", "outage_mi")
    return Table(header, _map(spec, point, spec.points()))


def mi_pipeline(spec):
    return _mi(spec, with_variance=False)


def variance_pipeline(spec):
    return _mi(spec, with_variance=True)


def montecarlo_pipeline(spec):
    mode = spec.option("phases")
    n = int(spec.option("samples"))
    points = spec.points()
    # with a single point the worker threads go to the sample loop
    inner = spec.threads if len(points) == 1 else 1
    dumps = []

    def point(item):
        value, params = item
        config = params.build()
        phases = phase_profiles(config, mode, spec.option("optimizer_tol"))
        _, stats = evaluate(config, phases)
        mc = simulate(config, phases, n, spec.seed, threads=inner)
        return (_scenario_cells(value, params) + [stats.mean_nats, stats.variance_nats2,
                                                  mc.mean, mc.variance, mc.n, mc.excluded],
                mc.samples)

    results = _map(spec, point, points)
    rows = [r for r, _ in results]
    extras = {}
    if spec.option("dump_samples"):
        for (value, _), (_, samples) in zip(points, results):
            dumps += [[_sweep_value(value), s] for s in samples]
        extras["samples"] = Table(("sweep_value", "mi_sample"), dumps)
    header = _SCENARIO_HEADER + ("mean", "variance", "mc_mean", "mc_variance", "mc_n",
                                 "mc_excluded")
    return Table(header, rows, extras)


def optimize_pipeline(spec):
    tol = spec.option("optimizer_tol")

    def point(item):
        value, params = item
        config = params.build()
        _, s0 = evaluate(config, phase_profiles(config, "identity"))
        _, s1 = evaluate(config, phase_profiles(config, "analytic"))
        result = alternating_optimize(config, tol=tol)
        return value, params, s0, s1, result

    rows, profiles, traces = [], [], []
    for value, params, s0, s1, result in _map(spec, point, spec.points()):
        rows.append(_scenario_cells(value, params)
                    + [s0.mean_nats, s1.mean_nats, result.mi, len(result.trace) - 1,
                       int(result.converged)])
        for prof in result.phases:
            profiles += [[_sweep_value(value), prof.ris_index, n, phi]
                         for n, phi in enumerate(prof.phases)]
        traces += [[_sweep_value(value), i, mi] for i, mi in enumerate(result.trace)]
    header = _SCENARIO_HEADER + ("mi_unopt", "mi_analytic", "mi_numeric", "outer_iterations",
                                 "converged")
    return Table(header, rows, {
        "phases": Table(("sweep_value", "ris", "n", "phi"), profiles),
        "trace": Table(("sweep_value", "iteration", "mi"), traces),
    })


def _placement_rows(spec, h_values):
    base = spec.scenario.with_value("geometry", "placement")
    items = [(h, x) for h in h_values for x in spec.option("x_over_d")]

    def point(item):
        h, x_rel = item
        params = base.with_value("h", h * base.d).with_value("x", x_rel * base.d)
        config = params.build()
        gamma = float(pathloss_factor(config.d, config.h, config.ris[0].x,
                                      config.pathloss_exponent))
        _, s0 = evaluate(config, phase_profiles(config, "identity"))
        _, s1 = evaluate(config, phase_profiles(config, "analytic"))
        return [h, x_rel, float(linear_to_db(gamma)), s0.mean_nats, s1.mean_nats]

    return Table(("h_over_d", "x_over_d", "gamma_db", "mi_unopt", "mi_opt"),
                 _map(spec, point, items))


def placement_pipeline(spec):
    if spec.sweep is not None and spec.sweep.parameter == "h":
        h_values = [v / spec.scenario.d for v in spec.sweep.values]
    else:
        h_values = spec.option("h_values")
    return _placement_rows(spec, h_values)


def _cdf_rows(prefix, eigenvalues, density):
    rows = []
    for source, cdf in (("eigenvalue", StepCdf(eigenvalues)),
                        ("eta", theoretical_eigen_cdf(density))):
        points, probs = cdf.table()
        rows += [prefix + [source, v, c] for v, c in zip(points, probs)]
    return rows


def spectrum_pipeline(spec):
    def point(item):
        value, params = item
        config = params.build()
        ris = config.ris[0]
        rows = []
        for label, weight in (("incoming", ris.incoming), ("outgoing", ris.outgoing)):
            s = build_correlation(ris.geometry, weight)
            dens = spectral_density(ris.geometry, weight)
            rows += _cdf_rows([_sweep_value(value), label], s.eig[0], dens)
        return rows

    rows = [r for block in _map(spec, point, spec.points()) for r in block]
    return Table(("sweep_value", "wave", "source", "value", "cumulative_probability"), rows)


def figure2_pipeline(spec):
    base = spec.scenario
    items = [(s, a) for s in spec.option("sigma_values_deg")
             for a in spec.option("spacing_values_wavelengths")]

    def point(item):
        sigma_deg, a_rel = item
        params = base.with_value("spacing_wavelengths", a_rel)
        geometry = params.build().ris[0].geometry
        weight = incoming_weight(0.0, np.deg2rad(sigma_deg), params.wavelength)
        s = build_correlation(geometry, weight)
        dens = spectral_density(geometry, weight)
        summary = [sigma_deg, a_rel, kolmogorov_distance(s, dens),
                   kolmogorov_distance(s, dens, zero_floor=1e-4),
                   float(np.mean(dens.values == 0)), float(np.max(dens.values)), s.eig[0][0]]
        return _cdf_rows([sigma_deg, a_rel], s.eig[0], dens), summary

    results = _map(spec, point, items)
    rows = [r for block, _ in results for r in block]
    summary = Table(("sigma_deg", "spacing_wavelengths", "ks_raw", "ks_zero_floor_1e-4",
                     "eta_zero_fraction", "eta_max", "eig_max"), [s for _, s in results])
    return Table(("sigma_deg", "spacing_wavelengths", "source", "value",
                  "cumulative_probability"), rows, {"summary": summary})


def figure3_pipeline(spec):
    sigmas = spec.sweep.values if spec.sweep is not None else DEFAULT_SIGMAS_DEG
    n = spec.option("samples") or MEAN_SAMPLES
    tol = spec.option("optimizer_tol")
    items = [(s, k) for k in spec.option("k_values") for s in sigmas]

    def point(item):
        sigma_deg, k = item
        params = spec.scenario.with_value("angle_spread_deg", sigma_deg).with_value("k", k)
        config = params.build()
        _, s0 = evaluate(config, phase_profiles(config, "identity"))
        analytic = phase_profiles(config, "analytic")
        _, s1 = evaluate(config, analytic)
        numeric = alternating_optimize(config, tol=tol)
        mc = simulate(config, analytic, int(n), spec.seed)
        return [sigma_deg, k, s0.mean_nats, s1.mean_nats, numeric.mi, mc.mean]

    return Table(("sigma_deg", "K", "mi_unopt", "mi_analytic", "mi_numeric", "mi_mc"),
                 _map(spec, point, items))


def figure4_pipeline(spec):
    thetas = spec.sweep.values if spec.sweep is not None else DEFAULT_THETA1_DEG
    base = spec.scenario.with_value("geometry", "tilt")
    if base.k == 1:
        base = base.with_value("k", 2)
    tol = spec.option("optimizer_tol")
    items = [(s, t) for s in spec.option("sigma_values_deg") for t in thetas]

    def point(item):
        sigma_deg, theta1 = item
        params = base.with_value("angle_spread_deg", sigma_deg).with_value("theta1_deg", theta1)
        config = params.build()
        _, s0 = evaluate(config, phase_profiles(config, "identity"))
        _, s1 = evaluate(config, phase_profiles(config, "analytic"))
        numeric = alternating_optimize(config, tol=tol)
        return [theta1, base.theta_total_deg - theta1, sigma_deg, s0.mean_nats, s1.mean_nats,
                numeric.mi]

    return Table(("theta1_deg", "theta2_deg", "sigma_deg", "mi_unopt", "mi_analytic",
                  "mi_numeric"), _map(spec, point, items))


def figure5_pipeline(spec):
    base = spec.scenario if spec.scenario.k > 1 else spec.scenario.with_value("k", 2)
    return _placement_rows(replace(spec, scenario=base), spec.option("h_values"))


def figure6_pipeline(spec):
    n = spec.option("samples") or CDF_SAMPLES
    points = int(spec.option("grid_points"))
    items = [(k, mode) for k in spec.option("k_values") for mode in ("identity", "analytic")]

    def point(item):
        k, mode = item
        config = spec.scenario.with_value("k", k).build()
        phases = phase_profiles(config, mode)
        _, stats = evaluate(config, phases)
        mc = simulate(config, phases, int(n), spec.seed)
        gauss = norm(stats.mean_nats, stats.std_nats)
        ks = float(kstest(mc.samples, gauss.cdf).statistic)
        lo, hi = np.min(mc.samples), np.max(mc.samples)
        grid = np.linspace(lo - 0.1 * (hi - lo), hi + 0.1 * (hi - lo), points)
        emp = empirical_cdf(mc, grid)
        rows = [[k, mode, g, gauss.cdf(g), e] for g, e in zip(grid, emp)]
        summary = [k, mode, stats.mean_nats, stats.variance_nats2, mc.mean, mc.variance, mc.n, ks]
        return rows, summary

    results = _map(spec, point, items)
    rows = [r for block, _ in results for r in block]
    summary = Table(("K", "phases", "mean", "variance", "mc_mean", "mc_variance", "mc_n",
                     "ks_distance"), [s for _, s in results])
    return Table(("K", "phases", "mi", "cdf_gaussian", "cdf_empirical"), rows,
                 {"summary": summary})


PIPELINES = {
    "spectrum": spectrum_pipeline,
    "mi": mi_pipeline,
    "variance": variance_pipeline,
    "montecarlo": montecarlo_pipeline,
    "optimize": optimize_pipeline,
    "placement": placement_pipeline,
    "figure2": figure2_pipeline,
    "figure3": figure3_pipeline,
    "figure4": figure4_pipeline,
    "figure5": figure5_pipeline,
    "figure6": figure6_pipeline,
}


def run_pipeline(spec):
    return PIPELINES[spec.kind](spec)
