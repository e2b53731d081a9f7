"""
RIS phase and placement optimization.

Phase profiles maximize the per-RIS term ``log det(I + c Phi^H S_r Phi S_t)``
of the deterministic-equivalent MI, either analytically (aligning the
dominant eigenvectors of ``S_t`` and ``S_r``) or by exact cyclic coordinate
ascent. ``alternating_optimize`` wraps the per-RIS step in an outer loop
that refreshes the fixed-point scalars.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .channel import pathloss_factor
from .detequiv import config_sigmas, ergodic_mi, sigma_k, solve_fixed_point
from .linalg import hermitian_eig, logdet_pd

__all__ = [
    "PhaseProfile",
    "KappaMatrix",
    "MonotonicityError",
    "AscentResult",
    "PhaseAscent",
    "kappa_matrix",
    "analytic_phases",
    "numeric_phases",
    "phase_objective",
    "alternating_optimize",
    "AlternatingResult",
    "optimal_placement",
    "placement_scan",
]

log = logging.getLogger(__name__)


def _wrap(angles):
    """Map angles into ``(-pi, pi]``."""
    a = np.angle(np.exp(1j * np.asarray(angles, dtype=float)))
    return np.where(a <= -np.pi, a + 2 * np.pi, a)


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Phases ``phi_n`` of one RIS, stored in ``(-pi, pi]``.

    ``degenerate`` marks a profile returned by a fallback path (see
    :func:`analytic_phases`).
    """

    phases: np.ndarray
    ris_index: int = 0
    degenerate: bool = False

    def __post_init__(self):
        p = _wrap(np.asarray(self.phases, dtype=float).ravel())
        p.setflags(write=False)
        object.__setattr__(self, "phases", p)

    @classmethod
    def identity(cls, n_s, ris_index=0):
        return cls(np.zeros(n_s), ris_index)

    @classmethod
    def from_coefficients(cls, coefficients, ris_index=0, degenerate=False):
        return cls(np.angle(np.asarray(coefficients)), ris_index, degenerate)

    @property
    def coefficients(self):
        """Unit-modulus reflection coefficients ``exp(i phi_n)``."""
        return np.exp(1j * self.phases)

    @property
    def n_s(self):
        return self.phases.size


@dataclass(frozen=True, eq=False)
class KappaMatrix:
    """Overlaps ``kappa_{ml} = u_{r,l}^H Phi u_{t,m}`` between the
    eigenvectors of ``S_t`` (row index) and ``S_r`` (column index) through
    the phase profile, oriented as they enter ``Sigma_k``."""

    entries: np.ndarray

    @property
    def leading(self):
        return complex(self.entries[0, 0])


def kappa_matrix(s_t, s_r, phi):
    coeff = getattr(phi, "coefficients", phi)
    _, u_t = hermitian_eig(getattr(s_t, "entries", s_t))
    _, u_r = hermitian_eig(getattr(s_r, "entries", s_r))
    return KappaMatrix((u_r.conj().T @ (np.asarray(coeff)[:, None] * u_t)).T)


def _phase_normalized(v):
    """Rotate ``v`` so that its first non-negligible element is real
    positive."""
    idx = int(np.argmax(np.abs(v) > 1e-12 * np.max(np.abs(v))))
    return v * np.exp(-1j * np.angle(v[idx]))


def analytic_phases(s_t, s_r, geometry=None, ris_index=0, gap_tol=1e-8):
    """Align the dominant eigenvectors of ``s_t`` and ``s_r``.

    ``phi_n = arg([u_r]_n [u_t]_n^*)`` with ``u_t``, ``u_r`` the leading
    eigenvectors. For Fourier-mode eigenvectors this is
    ``(q_t - q_r)^T x_n`` up to sign convention and a global constant, and
    it makes ``|kappa_11| = 1``.

    If either leading eigenvalue is degenerate (relative gap below
    ``gap_tol``), zero phases are returned with ``degenerate=True``.
    """
    st = np.asarray(getattr(s_t, "entries", s_t))
    sr = np.asarray(getattr(s_r, "entries", s_r))
    if geometry is not None and geometry.n_s != st.shape[0]:
        raise ValueError("geometry does not match the correlation size")
    w_t, v_t = hermitian_eig(st)
    w_r, v_r = hermitian_eig(sr)
    n = st.shape[0]
    for w in (w_t, w_r):
        if n > 1 and (w[0] - w[1]) <= gap_tol * abs(w[0]):
            log.warning("leading eigenvalue is degenerate; returning zero phases")
            return PhaseProfile(np.zeros(n), ris_index, degenerate=True)
    u_t = _phase_normalized(v_t[:, 0])
    u_r = _phase_normalized(v_r[:, 0])
    return PhaseProfile(np.angle(u_r * u_t.conj()), ris_index)


def phase_objective(s_t, s_r, c, phi):
    """``log det(I + c Phi^H S_r Phi S_t)`` evaluated directly."""
    sig = sigma_k(s_t, s_r, phi)
    return logdet_pd(np.eye(sig.shape[0]) + c * sig)


class MonotonicityError(RuntimeError):
    """A coordinate update decreased the objective."""


def _factor(m, rel=1e-12):
    w, v = hermitian_eig(m)
    keep = w > rel * w[0]
    return v[:, keep] * np.sqrt(w[keep])


class PhaseAscent:
    """Exact cyclic coordinate ascent for
    ``f(theta) = log det(I + c B^H B)``, ``B = L_r^H diag(theta) L_t``,
    where ``S = L L^H`` are low-rank factorizations.

    Changing one coefficient ``theta_n`` is a rank-2 modification of
    ``I + c B^H B``. Because ``|theta_n| = 1`` the determinant ratio is
    affine in ``theta_n``, i.e. ``a + 2 Re(b theta_n)``, whose maximizer on
    the unit circle is ``exp(-i arg b)``. The inverse is carried along by
    the Woodbury identity and rebuilt at every sweep.
    """

    def __init__(self, s_t, s_r, c, init, rank_tol=1e-12):
        if not c > 0:
            raise ValueError("coupling c must be positive")
        self.c = float(c)
        lt = _factor(np.asarray(getattr(s_t, "entries", s_t)), rank_tol)
        lr = _factor(np.asarray(getattr(s_r, "entries", s_r)), rank_tol)
        theta = np.array(getattr(init, "coefficients", init), dtype=complex)
        # log det(I + c B^H B) = log det(I + c B B^H): iterate over the
        # smaller side, which swaps the factors and conjugates the phases
        self.swapped = lr.shape[1] < lt.shape[1]
        if self.swapped:
            lt, lr, theta = lr, lt, theta.conj()
        self.x = lr.conj()
        self.y = lt
        self.theta = theta
        self.refresh()

    def refresh(self):
        self.b = (self.x.T * self.theta) @ self.y
        m = np.eye(self.y.shape[1]) + self.c * self.b.conj().T @ self.b
        self.a_inv = np.linalg.inv(m)
        self.value = logdet_pd(m)

    @property
    def coefficients(self):
        return self.theta.conj() if self.swapped else self.theta.copy()

    def _pieces(self, n):
        x, y, th0 = self.x[n], self.y[n], self.theta[n]
        p = self.b.conj().T @ x - np.conj(th0) * np.vdot(x, x) * y.conj()
        u = np.stack([p, y.conj()], axis=1)
        au = self.a_inv @ u
        g = u.conj().T @ au
        return u, au, g

    def gain(self, n, theta):
        """Exact change of ``f`` when ``theta_n`` is replaced by ``theta``
        (in the iteration's own orientation)."""
        _, _, g = self._pieces(n)
        return self._gain(g, theta - self.theta[n])

    def _gain(self, g, delta):
        c = self.c
        e = c * c * (abs(g[1, 0]) ** 2 - (g[0, 0] * g[1, 1]).real)
        ratio = 1.0 + 2.0 * c * (delta * g[1, 0]).real + e * abs(delta) ** 2
        return float(np.log(ratio)) if ratio > 0 else -np.inf

    def best(self, n):
        """The maximizing coefficient for element ``n``; the current one is
        kept when the objective does not depend on it."""
        _, _, g = self._pieces(n)
        return self._best(g, self.theta[n])

    def _best(self, g, th0):
        c = self.c
        e = c * c * (abs(g[1, 0]) ** 2 - (g[0, 0] * g[1, 1]).real)
        coef = c * g[1, 0] - e * np.conj(th0)
        scale = c * max(abs(g[0, 0]), abs(g[1, 1]), 1e-300)
        if abs(coef) <= 1e-14 * scale:
            return th0
        return np.exp(-1j * np.angle(coef))

    def update(self, n, theta=None, atol=1e-10):
        """Set element ``n`` to ``theta`` (default: the maximizer) and
        return the change of ``f``.

        Raises
        ------
        MonotonicityError
            If the maximizing update lowers ``f`` by more than ``atol``.
        """
        u, au, g = self._pieces(n)
        th0 = self.theta[n]
        chosen = theta is None
        if chosen:
            theta = self._best(g, th0)
        delta = theta - th0
        if delta == 0:
            return 0.0
        step = self._gain(g, delta)
        if chosen and step < -atol:
            raise MonotonicityError(
                f"coordinate update of element {n} decreased the objective by {-step:.3e}"
            )
        if chosen and step <= 0:
            # already optimal up to round-off: keep the current coefficient
            return 0.0
        d = np.array([[0.0, delta], [np.conj(delta), 0.0]]) * self.c
        core = np.linalg.solve(np.eye(2) + d @ g, d)
        self.a_inv -= au @ core @ au.conj().T
        self.b += delta * np.outer(self.x[n], self.y[n])
        self.theta[n] = theta
        self.value += step
        return step

    def sweep(self):
        for n in range(self.theta.size):
            self.update(n)
        before = self.value
        self.refresh()
        return self.value, abs(self.value - before)


@dataclass(frozen=True, eq=False)
class AscentResult:
    profile: PhaseProfile
    objective: float
    sweeps: int
    trace: tuple


def numeric_phases(s_t, s_r, coupling, init=None, tol=1e-8, max_sweeps=500,
                   ris_index=0, full_output=False):
    """Cyclic coordinate ascent on ``log det(I + c Phi^H S_r Phi S_t)``.

    Elements are visited in raster order; each update is the exact 1-D
    maximizer. Stops when a full sweep improves the objective by less than
    ``tol``.

    Parameters
    ----------
    s_t, s_r : CorrelationMatrix or array_like
    coupling : float
        ``c = gamma_k t_1k r_2k`` from the fixed point.
    init : PhaseProfile or array_like, optional
        Starting profile; identity by default.
    full_output : bool
        Return an :class:`AscentResult` instead of the profile.

    Raises
    ------
    MonotonicityError
        If any update lowers the objective.
    """
    n = np.asarray(getattr(s_t, "entries", s_t)).shape[0]
    start = np.ones(n, dtype=complex) if init is None else getattr(init, "coefficients", init)
    if not np.iscomplexobj(start):
        start = np.exp(1j * np.asarray(start))
    solver = PhaseAscent(s_t, s_r, coupling, start)
    trace = [solver.value]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        value, _ = solver.sweep()
        improvement = value - trace[-1]
        trace.append(value)
        if improvement < -1e-8 * max(1.0, abs(value)):
            raise MonotonicityError(f"sweep {sweeps} decreased the objective by {-improvement:.3e}")
        if improvement < tol:
            break
    profile = PhaseProfile.from_coefficients(solver.coefficients, ris_index)
    if init is not None and trace[-1] - trace[0] <= 0:
        profile = PhaseProfile.from_coefficients(start, ris_index)
    if full_output:
        return AscentResult(profile, trace[-1], sweeps, tuple(trace))
    return profile


@dataclass(frozen=True, eq=False)
class AlternatingResult:
    phases: list
    solution: object
    mi: float
    trace: tuple
    converged: bool


def alternating_optimize(config, init="analytic", tol=1e-8, max_outer=100, phase_tol=1e-8,
                         fixed_point_tol=1e-10, **quadrature):
    """Alternate between the fixed point and per-RIS coordinate ascent.

    Parameters
    ----------
    config : SystemConfig
    init : {"analytic", "identity"} or list of PhaseProfile
        Starting profiles. The analytic start avoids poorer local optima
        reached from the identity at small angle spreads.
    tol : float
        Relative MI change that ends the outer loop.

    Returns
    -------
    AlternatingResult
        ``phases``, ``solution``, ``mi`` (nats) and the per-iteration MI
        trace. If the MI drops by more than ``10 tol`` the best iterate is
        returned with a warning and ``converged=False``.
    """
    pairs = [(ris.s_t(**quadrature), ris.s_r(**quadrature)) for ris in config.ris]
    if isinstance(init, str):
        if init == "analytic":
            phases = [analytic_phases(st, sr, ris.geometry, k)
                      for k, ((st, sr), ris) in enumerate(zip(pairs, config.ris))]
        elif init == "identity":
            phases = [PhaseProfile.identity(ris.geometry.n_s, k) for k, ris in enumerate(config.ris)]
        else:
            raise ValueError(f"unknown init {init!r}")
    else:
        phases = list(init)
    gammas = config.gammas()

    def evaluate(profiles, warm=None):
        sigmas = [sigma_k(st, sr, p) for (st, sr), p in zip(pairs, profiles)]
        sol = solve_fixed_point(config, sigmas, tol=fixed_point_tol, init=warm)
        return sol, float(ergodic_mi(config, sigmas, sol))

    sol, mi = evaluate(phases)
    best = (mi, phases, sol)
    trace = [mi]
    converged = False
    for _ in range(max_outer):
        new = [numeric_phases(st, sr, gammas[k] * sol.t1[k] * sol.r2[k], phases[k],
                              tol=phase_tol, ris_index=k)
               for k, (st, sr) in enumerate(pairs)]
        new_sol, new_mi = evaluate(new, warm=sol)
        trace.append(new_mi)
        if new_mi < best[0] - 10 * tol * abs(best[0]):
            log.warning("alternating optimization oscillated; returning the best iterate")
            mi, phases, sol = best
            return AlternatingResult(phases, sol, mi, tuple(trace), False)
        change = abs(new_mi - mi) / max(abs(mi), 1e-300)
        phases, sol, mi = new, new_sol, new_mi
        if mi > best[0]:
            best = (mi, phases, sol)
        if change < tol:
            converged = True
            break
    mi, phases, sol = best
    return AlternatingResult(phases, sol, mi, tuple(trace), converged)


def optimal_placement(d, h):
    """Offsets ``x`` maximizing the RIS pathloss factor on the line at
    height ``h``: ``(0.0,)`` if ``|h| >= d/2``, else ``(-x*, +x*)`` with
    ``x* = sqrt(d^2/4 - h^2)``."""
    if not d > 0:
        raise ValueError("d must be positive")
    if h == 0:
        raise ValueError("h must be non-zero")
    disc = d * d / 4 - h * h
    if disc <= 0:
        return (0.0,)
    x = float(np.sqrt(disc))
    return (-x, x)


def placement_scan(config_at, x_grid, analytic=True, **quadrature):
    """MI over RIS offsets.

    Parameters
    ----------
    config_at : callable
        ``config_at(x)`` returns the SystemConfig with every RIS placed at
        offset ``x`` and weight functions derived from that geometry.
    x_grid : iterable of float

    Returns
    -------
    list of tuple
        ``(x, gamma, mi_unoptimized, mi_optimized)`` per grid point, MI in
        nats, ``gamma`` of the first RIS.
    """
    rows = []
    for x in x_grid:
        cfg = config_at(float(x))
        if not abs(x) < cfg.d / 2:
            raise ValueError(f"x = {x} outside (-d/2, d/2)")
        gamma = float(pathloss_factor(cfg.d, cfg.h, x, cfg.pathloss_exponent))
        sig0 = config_sigmas(cfg, **quadrature)
        mi0 = ergodic_mi(cfg, sig0, solve_fixed_point(cfg, sig0))
        if analytic:
            phases = [analytic_phases(r.s_t(**quadrature), r.s_r(**quadrature), r.geometry, k)
                      for k, r in enumerate(cfg.ris)]
            sig1 = config_sigmas(cfg, phases, **quadrature)
            mi1 = ergodic_mi(cfg, sig1, solve_fixed_point(cfg, sig1))
        else:
            mi1 = alternating_optimize(cfg, **quadrature).mi
        rows.append((float(x), gamma, float(mi0), float(mi1)))
    return rows
