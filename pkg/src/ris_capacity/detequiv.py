"""
Large-system deterministic equivalent of the ergodic mutual information:
fixed-point scalars, mean MI, the variance matrix and Gaussian outage MI.

All quantities are in nats. Phase profiles enter only through the per-RIS
matrices ``Sigma_k``; the solver works with their eigenvalues.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .linalg import is_hermitian, logdet_pd, psd_sqrt

__all__ = [
    "FixedPointError",
    "FixedPointSolution",
    "MiStatistics",
    "psd_sqrt",
    "sigma_k",
    "config_sigmas",
    "solve_fixed_point",
    "fixed_point_rhs",
    "ergodic_mi",
    "lambda_matrix",
    "variance",
    "mi_statistics",
    "analyze",
    "outage_mi",
]


class FixedPointError(RuntimeError):
    """Raised when the fixed-point iteration exhausts ``max_iter``."""

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True, eq=False)
class FixedPointSolution:
    """Solution of the coupled fixed-point equations.

    ``t1``, ``r1``, ``t2``, ``r2`` hold one entry per RIS. ``residual`` is
    the largest ``|rhs(x) - x|`` at the returned point.
    """

    t_d: float
    r_d: float
    t1: np.ndarray
    r1: np.ndarray
    t2: np.ndarray
    r2: np.ndarray
    iterations: int = 0
    residual: float = 0.0
    tol: float = 1e-10

    @property
    def k(self):
        return len(self.t1)

    def as_vector(self):
        """Stacked as ``(t_d, t1, t2, r_d, r1, r2)``."""
        return np.concatenate([[self.t_d], self.t1, self.t2, [self.r_d], self.r1, self.r2])

    @classmethod
    def from_vector(cls, v, k, **meta):
        v = np.asarray(v, dtype=float)
        return cls(t_d=float(v[0]), t1=v[1:k + 1].copy(), t2=v[k + 1:2 * k + 1].copy(),
                   r_d=float(v[2 * k + 1]), r1=v[2 * k + 2:3 * k + 2].copy(),
                   r2=v[3 * k + 2:4 * k + 2].copy(), **meta)


@dataclass(frozen=True)
class MiStatistics:
    mean_nats: float
    variance_nats2: float
    lambda_dim: int

    @property
    def std_nats(self):
        return float(np.sqrt(self.variance_nats2))


def _coefficients(phi):
    c = getattr(phi, "coefficients", phi)
    c = np.asarray(c)
    if not np.iscomplexobj(c):
        c = np.exp(1j * c)
    return c


def sigma_k(s_t, s_r, phi):
    """``S_t^{1/2} Phi^H S_r Phi S_t^{1/2}`` for a diagonal unit-modulus
    ``Phi``.

    Parameters
    ----------
    s_t, s_r : CorrelationMatrix or array_like
    phi : PhaseProfile or array_like
        Reflection coefficients (complex) or phase angles (real).

    Raises
    ------
    ValueError
        If a reflection coefficient does not have unit modulus.
    """
    coeff = _coefficients(phi)
    bad = np.flatnonzero(np.abs(np.abs(coeff) - 1.0) > 1e-9)
    if bad.size:
        raise ValueError(
            f"reflection coefficient {bad[0]} has modulus {abs(coeff[bad[0]]):.12g}, expected 1"
        )
    root = s_t.sqrt if hasattr(s_t, "sqrt") else psd_sqrt(s_t)
    sr = np.asarray(getattr(s_r, "entries", s_r))
    if root.shape != sr.shape or coeff.shape != (sr.shape[0],):
        raise ValueError("dimension mismatch between S_t, S_r and phases")
    inner = coeff.conj()[:, None] * sr * coeff[None, :]
    out = root @ inner @ root
    return 0.5 * (out + out.conj().T)


def config_sigmas(config, phases=None, **quadrature):
    """``Sigma_k`` for every RIS of ``config``; identity phases by default."""
    out = []
    for k, ris in enumerate(config.ris):
        phi = np.ones(ris.geometry.n_s, dtype=complex) if phases is None else phases[k]
        out.append(sigma_k(ris.s_t(**quadrature), ris.s_r(**quadrature), phi))
    return out


class _Model:
    """Precomputed Hermitian pieces of the fixed-point system."""

    def __init__(self, config, sigmas):
        if len(sigmas) != config.k:
            raise ValueError(f"expected {config.k} Sigma matrices, got {len(sigmas)}")
        self.n_t, self.n_r, self.rho = config.n_t, config.n_r, float(config.rho)
        self.k = config.k
        q_half = psd_sqrt(config.q)
        r_d, t_d = config.direct_correlations()
        self.r_d = np.asarray(r_d, dtype=complex)
        # Q^{1/2} T Q^{1/2} keeps every matrix Hermitian; traces and
        # determinants are unchanged by the similarity.
        self.t_d = q_half @ np.asarray(t_d, dtype=complex) @ q_half
        self.r_k, self.t_k = [], []
        for k in range(self.k):
            r, t = config.link_correlations(k)
            self.r_k.append(r.entries)
            self.t_k.append(q_half @ t.entries @ q_half)
        self.gamma = config.gammas()
        self.sigma_eigs = []
        for s in sigmas:
            s = np.asarray(s)
            if not is_hermitian(s):
                raise ValueError("Sigma_k must be Hermitian")
            self.sigma_eigs.append(np.clip(np.linalg.eigvalsh(s), 0.0, None))

    def resolvents(self, x):
        t_d, t1, t2, r_d, r1, r2 = x
        r_tilde = r_d * self.r_d + sum(r1[k] * self.r_k[k] for k in range(self.k))
        t_tilde = t_d * self.t_d + sum(t2[k] * self.t_k[k] for k in range(self.k))
        a = np.linalg.inv(np.eye(self.n_r) + r_tilde)
        b = np.linalg.inv(np.eye(self.n_t) + self.rho * t_tilde)
        return r_tilde, t_tilde, a, b

    def rhs(self, x):
        t_d, t1, t2, r_d, r1, r2 = x
        _, _, a, b = self.resolvents(x)
        n_t, rho = self.n_t, self.rho
        new_t_d = np.trace(a @ self.r_d).real / n_t
        new_r_d = rho * np.trace(self.t_d @ b).real / n_t
        new_t1 = np.array([np.trace(a @ r).real / n_t for r in self.r_k])
        new_r2 = np.array([rho * np.trace(t @ b).real / n_t for t in self.t_k])
        new_r1 = np.empty(self.k)
        new_t2 = np.empty(self.k)
        for k, ev in enumerate(self.sigma_eigs):
            g = self.gamma[k]
            s = np.sum(ev / (1.0 + g * t1[k] * r2[k] * ev))
            new_r1[k] = g * r2[k] * s / n_t
            new_t2[k] = g * t1[k] * s / n_t
        return (new_t_d, new_t1, new_t2, new_r_d, new_r1, new_r2)

    def unpack(self, sol):
        return (sol.t_d, np.asarray(sol.t1), np.asarray(sol.t2), sol.r_d,
                np.asarray(sol.r1), np.asarray(sol.r2))


def _max_diff(x, y):
    return max(float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))
               for a, b in zip(x, y))


def fixed_point_rhs(config, sigmas, solution):
    """Right-hand sides of the fixed-point equations evaluated at
    ``solution``, returned as a :class:`FixedPointSolution`."""
    model = _Model(config, sigmas)
    t_d, t1, t2, r_d, r1, r2 = model.rhs(model.unpack(solution))
    return FixedPointSolution(t_d=float(t_d), r_d=float(r_d), t1=t1, r1=r1, t2=t2, r2=r2)


def solve_fixed_point(config, sigmas, tol=1e-10, max_iter=2000, damping=0.5, init=None):
    """Solve the coupled fixed-point equations by damped Picard iteration.

    Parameters
    ----------
    config : SystemConfig
    sigmas : list of ndarray
        ``Sigma_k`` per RIS (see :func:`sigma_k`).
    tol : float
        Exit when ``max |rhs(x) - x| < tol``.
    max_iter : int
    damping : float
        Update ``x <- (1 - damping) x + damping rhs(x)``.
    init : FixedPointSolution, optional
        Warm start; by default ``t_d = t1 = t2 = 1`` and the ``r`` family is
        taken from the right-hand sides at that point.

    Raises
    ------
    FixedPointError
        If ``max_iter`` is exhausted; carries the residual trajectory.
    """
    model = _Model(config, sigmas)
    k = model.k
    if init is not None:
        x = model.unpack(init)
    else:
        ones = np.ones(k)
        x = (1.0, ones, ones, 0.0, np.zeros(k), np.zeros(k))
        y = model.rhs(x)
        r2 = y[5]
        x = (1.0, ones, ones, y[3], np.zeros(k), r2)
        y = model.rhs(x)
        x = (1.0, ones, ones, y[3], y[4], r2)
    residuals = []
    for it in range(max_iter + 1):
        y = model.rhs(x)
        res = _max_diff(x, y)
        residuals.append(res)
        if res < tol:
            return FixedPointSolution(t_d=float(x[0]), t1=np.array(x[1], float),
                                      t2=np.array(x[2], float), r_d=float(x[3]),
                                      r1=np.array(x[4], float), r2=np.array(x[5], float),
                                      iterations=it, residual=res, tol=tol)
        x = tuple((1 - damping) * np.asarray(a) + damping * np.asarray(b) for a, b in zip(x, y))
    raise FixedPointError(
        f"fixed point not reached after {max_iter} iterations (residual {residuals[-1]:.3e}); "
        "check the scaling of rho, gamma and the correlation traces",
        residuals,
    )


def _per_ris_terms(model, x):
    _, t1, _, _, _, r2 = x
    return [float(np.sum(np.log1p(model.gamma[k] * t1[k] * r2[k] * ev)))
            for k, ev in enumerate(model.sigma_eigs)]


def ergodic_mi(config, sigmas, solution, per_ris=False):
    """Mean MI ``N_t C`` in nats for a converged fixed point.

    With ``per_ris=True`` also return the list of per-RIS log-det terms.
    """
    model = _Model(config, sigmas)
    x = model.unpack(solution)
    t_d, t1, t2, r_d, r1, r2 = x
    r_tilde, t_tilde, _, _ = model.resolvents(x)
    terms = _per_ris_terms(model, x)
    total = (sum(terms)
             + logdet_pd(np.eye(model.n_r) + r_tilde)
             + logdet_pd(np.eye(model.n_t) + model.rho * t_tilde)
             - model.n_t * (r_d * t_d + np.sum(r1 * t1 + r2 * t2)))
    if per_ris:
        return total, terms
    return total


def lambda_matrix(config, sigmas, solution):
    """The ``(4K+2)``-square variance matrix in block order
    ``(t_d, t1, t2, r_d, r1, r2)``.

    Entries are the second derivatives of the per-antenna MI functional at
    the fixed point, so the coupling between each ``t`` and its ``r``
    partner is ``-1``.
    """
    model = _Model(config, sigmas)
    x = model.unpack(solution)
    t_d, t1, t2, r_d, r1, r2 = x
    _, _, a, b = model.resolvents(x)
    n_t, rho, k = model.n_t, model.rho, model.k

    def tr2(a_, x_, b_, y_):
        return np.trace(a_ @ x_ @ b_ @ y_).real / n_t

    ar = [a @ r for r in model.r_k]
    ard = a @ model.r_d
    bt = [b @ t for t in model.t_k]
    btd = b @ model.t_d
    m1r = -np.array([[np.trace(ar[i] @ ar[j]).real / n_t for j in range(k)] for i in range(k)])
    m2t = -rho**2 * np.array([[np.trace(bt[i] @ bt[j]).real / n_t for j in range(k)]
                              for i in range(k)])
    mu_1dr = -np.array([np.trace(ar[i] @ ard).real / n_t for i in range(k)])
    mu_2dt = -rho**2 * np.array([np.trace(bt[i] @ btd).real / n_t for i in range(k)])
    rho_dr = -np.trace(ard @ ard).real / n_t
    rho_dt = -rho**2 * np.trace(btd @ btd).real / n_t

    m2r = np.empty(k)
    m1t = np.empty(k)
    m12 = np.empty(k)
    for i, ev in enumerate(model.sigma_eigs):
        g = model.gamma[i]
        den = (1.0 + g * t1[i] * r2[i] * ev) ** 2
        s2 = np.sum(ev**2 / den) / n_t
        m2r[i] = -(g * t1[i]) ** 2 * s2
        m1t[i] = -(g * r2[i]) ** 2 * s2
        m12[i] = g * np.sum(ev / den) / n_t

    dim = 4 * k + 2
    lam = np.zeros((dim, dim))
    i_dt, i_dr = 0, 2 * k + 1
    i1t = slice(1, k + 1)
    i2t = slice(k + 1, 2 * k + 1)
    i1r = slice(2 * k + 2, 3 * k + 2)
    i2r = slice(3 * k + 2, 4 * k + 2)
    eye = np.eye(k)

    lam[i_dt, i_dt] = rho_dt
    lam[i_dt, i2t] = lam[i2t, i_dt] = mu_2dt
    lam[i_dt, i_dr] = lam[i_dr, i_dt] = -1.0
    lam[i1t, i1t] = np.diag(m1t)
    lam[i1t, i1r] = lam[i1r, i1t] = -eye
    lam[i1t, i2r] = lam[i2r, i1t] = np.diag(m12)
    lam[i2t, i2t] = m2t
    lam[i2t, i2r] = lam[i2r, i2t] = -eye
    lam[i_dr, i_dr] = rho_dr
    lam[i_dr, i1r] = lam[i1r, i_dr] = mu_1dr
    lam[i1r, i1r] = m1r
    lam[i2r, i2r] = np.diag(m2r)
    return lam


def variance(config, sigmas, solution):
    """Asymptotic MI variance in nats^2.

    Computed as ``-log(det(Lambda) / det(Lambda_0))`` where ``Lambda_0`` is
    the pure ``-1`` coupling pattern (the zero-SNR limit), whose determinant
    is ``(-1)^(2K+1)``. Small negative values from round-off are clipped.

    Raises
    ------
    FloatingPointError
        If ``det(Lambda)`` has the wrong sign, which means the fixed point
        is inconsistent.
    """
    lam = lambda_matrix(config, sigmas, solution)
    sign, logabs = np.linalg.slogdet(lam)
    ref_sign = (-1.0) ** (lam.shape[0] // 2)
    if sign != ref_sign:
        raise FloatingPointError(
            f"det(Lambda) has sign {sign:+.0f}, expected {ref_sign:+.0f}: inconsistent fixed point"
        )
    var = -logabs
    if var < -1e-9:
        raise FloatingPointError(f"negative variance {var:.3e}")
    return max(var, 0.0)


def mi_statistics(config, sigmas, solution):
    return MiStatistics(mean_nats=float(ergodic_mi(config, sigmas, solution)),
                        variance_nats2=float(variance(config, sigmas, solution)),
                        lambda_dim=4 * config.k + 2)


def analyze(config, phases=None, tol=1e-10, max_iter=2000, **quadrature):
    """Solve the fixed point for ``config`` under ``phases`` (identity by
    default) and return ``(solution, MiStatistics)``."""
    config.check()
    sigmas = config_sigmas(config, phases, **quadrature)
    sol = solve_fixed_point(config, sigmas, tol=tol, max_iter=max_iter)
    return sol, mi_statistics(config, sigmas, sol)


def outage_mi(stats, outage_prob):
    """MI supported with outage probability ``outage_prob`` under the
    Gaussian approximation: ``mean + std * Phi^{-1}(p)``."""
    if not 0.0 < outage_prob < 1.0:
        raise ValueError("outage probability must lie in (0, 1)")
    if stats.variance_nats2 < 0:
        raise ValueError("variance must be non-negative")
    if stats.variance_nats2 == 0:
        return float(stats.mean_nats)
    return float(stats.mean_nats + np.sqrt(stats.variance_nats2) * norm.ppf(outage_prob))
