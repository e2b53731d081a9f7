"""
Channel model: angular weight functions, RIS lattice geometry, correlation
matrices, pathloss and Kronecker-correlated Gaussian channel draws.

Wavevectors are propagation vectors in rad/m. A RIS lies in the local
``z = 0`` plane of its own frame; ``RisGeometry.orientation`` maps local
coordinates to world coordinates. Weight functions are specified in world
coordinates and rotated into the RIS frame when a correlation matrix is
built.
"""

from dataclasses import dataclass, replace
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import roots_legendre

from .linalg import hermitian_eig, is_hermitian, psd_sqrt

__all__ = [
    "QuadratureError",
    "WeightFunction",
    "RisGeometry",
    "CorrelationMatrix",
    "RisSpec",
    "SystemConfig",
    "build_correlation",
    "correlation_lags",
    "pathloss_factor",
    "pathloss_gamma",
    "sample_channel",
    "sample_with_roots",
    "substream",
    "rotation_y",
]

# exp(-60) ~ 1e-26: beyond this the weight is numerically zero
_SUPPORT_EXPONENT = 60.0


class QuadratureError(RuntimeError):
    """Spherical quadrature failed to converge; ``achieved`` holds the last
    successive-refinement disagreement."""

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


def rotation_y(angle):
    """Rotation matrix about the world y-axis by ``angle`` radians."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _as_rotation(m):
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or not np.allclose(m @ m.T, np.eye(3), atol=1e-9):
        raise ValueError("orientation must be a 3x3 rotation matrix")
    return tuple(map(tuple, m))


@dataclass(frozen=True)
class WeightFunction:
    """Gaussian angular power density on the wave sphere ``|k| = k0``.

    ``w(k) = c * exp(-|k - s0|^2 / (2 sigma^2 k0^2))`` with ``c`` chosen so
    that the integral of ``w`` over the unit sphere of directions is one.

    Parameters
    ----------
    mean_direction : tuple of float
        Mean propagation wavevector ``s0``; its norm must equal ``k0``.
    angle_spread : float
        Angle spread ``sigma`` in radians.
    wavelength : float
        Carrier wavelength in meters, ``k0 = 2 pi / wavelength``.
    """

    mean_direction: tuple
    angle_spread: float
    wavelength: float

    def __post_init__(self):
        s0 = tuple(float(v) for v in np.asarray(self.mean_direction, dtype=float).ravel())
        if len(s0) != 3:
            raise ValueError("mean_direction must be a 3-vector")
        object.__setattr__(self, "mean_direction", s0)
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not self.angle_spread > 0:
            raise ValueError("angle_spread must be positive")
        norm = float(np.linalg.norm(s0))
        if abs(norm - self.k0) > 1e-9 * self.k0:
            raise ValueError(
                f"|mean_direction| = {norm:.12g} differs from k0 = {self.k0:.12g}"
            )

    @classmethod
    def from_direction(cls, direction, angle_spread, wavelength):
        """Build from an arbitrary (non-zero) direction vector."""
        u = np.asarray(direction, dtype=float)
        u = u / np.linalg.norm(u)
        return cls(tuple(2 * np.pi / wavelength * u), angle_spread, wavelength)

    @property
    def k0(self):
        return 2 * np.pi / self.wavelength

    @property
    def unit_mean(self):
        return np.asarray(self.mean_direction) / self.k0

    @property
    def concentration(self):
        return 1.0 / self.angle_spread**2

    @property
    def normalization(self):
        # closed form of the sphere integral of exp(kappa (cos psi - 1))
        kappa = self.concentration
        return kappa / (2 * np.pi * -np.expm1(-2 * kappa))

    def __call__(self, k):
        """Density at wavevectors ``k`` (shape ``(..., 3)``, rad/m)."""
        k = np.asarray(k, dtype=float)
        diff = k - np.asarray(self.mean_direction)
        sq = np.sum(diff**2, axis=-1)
        return self.normalization * np.exp(-sq / (2 * self.angle_spread**2 * self.k0**2))

    def in_frame(self, orientation):
        """The same weight expressed in the local frame of ``orientation``."""
        rot = np.asarray(orientation, dtype=float)
        local = rot.T @ np.asarray(self.mean_direction)
        local *= self.k0 / np.linalg.norm(local)
        return WeightFunction(tuple(local), self.angle_spread, self.wavelength)


@dataclass(frozen=True)
class RisGeometry:
    """Square ``n_d x n_d`` lattice with spacing ``spacing`` meters.

    Element ``(n1, n2)`` sits at ``origin + orientation @ (n1 a, n2 a, 0)``
    with ``n1, n2 = 0 .. n_d - 1``; flat index is ``n1 * n_d + n2``.
    """

    n_d: int
    spacing: float
    orientation: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if int(self.n_d) != self.n_d or self.n_d < 1:
            raise ValueError("n_d must be a positive integer")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "n_d", int(self.n_d))
        object.__setattr__(self, "orientation", _as_rotation(self.orientation))
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))

    @classmethod
    def tilted(cls, n_d, spacing, tilt=0.0, origin=(0.0, 0.0, 0.0)):
        """Lattice rotated by ``tilt`` radians about the world y-axis."""
        return cls(n_d, spacing, rotation_y(tilt), origin)

    @property
    def n_s(self):
        return self.n_d**2

    @property
    def rotation(self):
        return np.asarray(self.orientation)

    def lattice_indices(self):
        n1, n2 = np.divmod(np.arange(self.n_s), self.n_d)
        return np.stack([n1, n2], axis=1)

    def positions(self):
        """World coordinates of the elements, shape ``(n_s, 3)``."""
        local = np.zeros((self.n_s, 3))
        local[:, :2] = self.lattice_indices() * self.spacing
        return np.asarray(self.origin) + local @ self.rotation.T


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Hermitian PSD correlation matrix with a fixed trace.

    The eigendecomposition and square root are computed lazily and cached.
    """

    entries: np.ndarray
    trace_target: float = None
    quadrature_error: float = 0.0

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if not is_hermitian(m):
            raise ValueError("correlation matrix must be square and Hermitian")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.trace_target is None:
            object.__setattr__(self, "trace_target", float(m.shape[0]))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @classmethod
    def normalized(cls, m, trace_target=None, **kwargs):
        """Rescale ``m`` so that its trace equals ``trace_target``
        (matrix dimension by default)."""
        m = np.asarray(m, dtype=complex)
        target = float(m.shape[0]) if trace_target is None else float(trace_target)
        tr = np.trace(m).real
        if tr <= 0:
            raise ValueError("cannot normalize a matrix with non-positive trace")
        return cls(m * (target / tr), target, **kwargs)

    @property
    def n(self):
        return self.entries.shape[0]

    @cached_property
    def eig(self):
        """``(eigenvalues, eigenvectors)``, eigenvalues descending."""
        return hermitian_eig(self.entries)

    @cached_property
    def sqrt(self):
        return psd_sqrt(self.entries)

    def check(self):
        """List of violated invariants (empty when valid)."""
        problems = []
        w = self.eig[0]
        if w.size and w[-1] < -1e-8 * max(w[0], 0.0):
            problems.append(f"not PSD: smallest eigenvalue {w[-1]:.3e}")
        tr = np.trace(self.entries).real
        if abs(tr - self.trace_target) > 1e-6 * max(self.trace_target, 1.0):
            problems.append(f"trace {tr:.9g} != {self.trace_target:.9g}")
        return problems


def _aligned_frame(unit):
    helper = np.array([1.0, 0.0, 0.0]) if abs(unit[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - unit * (unit @ helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(unit, e1), unit


def _sphere_rule(weight, n_polar, n_azimuth):
    """Nodes (unit directions) and weights for integrating ``w`` over the
    sphere; the polar axis follows the mean direction and the polar range is
    truncated where the Gaussian is numerically zero."""
    kappa = weight.concentration
    u_max = min(2.0, _SUPPORT_EXPONENT / kappa)
    x, wx = roots_legendre(n_polar)
    cos_psi = 1.0 - 0.5 * u_max * (x + 1.0)
    sin_psi = np.sqrt(np.clip(1.0 - cos_psi**2, 0.0, None))
    phi = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
    e1, e2, e3 = _aligned_frame(weight.unit_mean)
    radial = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2
    dirs = sin_psi[:, None, None] * radial[None] + cos_psi[:, None, None] * e3
    w_polar = 0.5 * u_max * wx * weight.normalization * np.exp(kappa * (cos_psi - 1.0))
    w = np.repeat(w_polar * (2 * np.pi / n_azimuth), n_azimuth)
    return dirs.reshape(-1, 3), w


def _lag_table(weight, n_d, spacing, n_polar, n_azimuth):
    dirs, w = _sphere_rule(weight, n_polar, n_azimuth)
    lags = np.arange(-(n_d - 1), n_d)
    phase = weight.k0 * spacing
    ex = np.exp(1j * phase * np.outer(lags, dirs[:, 0]))
    ey = np.exp(1j * phase * np.outer(lags, dirs[:, 1]))
    return (ex * w) @ ey.T


@lru_cache(maxsize=64)
def _cached_lags(weight, n_d, spacing, n_polar, n_azimuth, rtol, max_refinements):
    table = _lag_table(weight, n_d, spacing, n_polar, n_azimuth)
    err = np.inf
    for _ in range(max_refinements):
        n_polar, n_azimuth = 2 * n_polar, 2 * n_azimuth
        finer = _lag_table(weight, n_d, spacing, n_polar, n_azimuth)
        err = float(np.max(np.abs(finer - table)))
        table = finer
        if err <= rtol:
            break
    if err > 10 * rtol:
        raise QuadratureError(
            f"quadrature did not converge: successive refinements differ by {err:.2e}",
            err,
        )
    table.setflags(write=False)
    return table, err


def correlation_lags(geometry, weight, *, n_polar=128, n_azimuth=256, rtol=1e-6,
                     max_refinements=3):
    """Lattice correlation function ``S(p, q)`` for lags
    ``p, q = -(n_d-1) .. n_d-1`` (array index ``p + n_d - 1``).

    Returns
    -------
    table : ndarray, shape (2 n_d - 1, 2 n_d - 1)
    error : float
        Disagreement between the last two quadrature refinements.
    """
    local = weight.in_frame(geometry.rotation)
    return _cached_lags(local, geometry.n_d, float(geometry.spacing), int(n_polar),
                        int(n_azimuth), float(rtol), int(max_refinements))


def build_correlation(geometry, weight, **quadrature):
    """Correlation matrix ``[S]_ij = int w(k) exp(i k.(x_i - x_j)) dOmega``
    of a RIS lattice, renormalized to trace ``N_s``.

    Keyword arguments are forwarded to :func:`correlation_lags`. Results
    are cached, so repeated calls share one read-only matrix together with
    its eigendecomposition and square root.
    """
    return _build_cached(geometry, weight, tuple(sorted(quadrature.items())))


@lru_cache(maxsize=32)
def _build_cached(geometry, weight, quadrature):
    table, err = correlation_lags(geometry, weight, **dict(quadrature))
    idx = geometry.lattice_indices()
    off = geometry.n_d - 1
    d1 = idx[:, 0][:, None] - idx[:, 0][None, :] + off
    d2 = idx[:, 1][:, None] - idx[:, 1][None, :] + off
    return CorrelationMatrix.normalized(table[d1, d2], geometry.n_s, quadrature_error=err)


def pathloss_factor(d, h, x, b):
    """Relative RIS link gain ``((d^2/4 + h^2) / (d1 d2))^b`` for a RIS at
    horizontal offset ``x`` (array-friendly)."""
    x = np.asarray(x, dtype=float)
    d1 = np.sqrt(h**2 + (d / 2 - x) ** 2)
    d2 = np.sqrt(h**2 + (d / 2 + x) ** 2)
    if np.any(d1 == 0) or np.any(d2 == 0):
        raise ValueError("RIS coincides with a terminal; far-field pathloss is undefined")
    return ((d**2 / 4 + h**2) / (d1 * d2)) ** b


def pathloss_gamma(config, ris_index):
    """Pathloss factor of RIS ``ris_index`` in ``config``; an explicit
    ``gamma`` on the RIS overrides the geometric value."""
    ris = config.ris[ris_index]
    if ris.gamma is not None:
        return float(ris.gamma)
    return float(pathloss_factor(config.d, config.h, ris.x, config.pathloss_exponent))


def substream(seed, index):
    """Generator for sample ``index`` of master ``seed``.

    Counter-based (Philox): the sample index occupies the top counter word,
    so streams never overlap and do not depend on scheduling.
    """
    bitgen = np.random.Philox(key=int(seed) % 2**64, counter=[0, 0, 0, int(index)])
    return np.random.Generator(bitgen)


def _sqrt_of(m):
    if isinstance(m, CorrelationMatrix):
        return m.sqrt
    return psd_sqrt(m)


def sample_channel(r, t, rng, n_t=None):
    """Draw ``(1/sqrt(n_t)) r^{1/2} X t^{1/2}`` with ``X`` iid CN(0, 1).

    Parameters
    ----------
    r, t : CorrelationMatrix or array_like
        Row-side and column-side correlation matrices.
    rng : numpy.random.Generator
    n_t : int, optional
        Normalizing dimension; defaults to the size of ``t``. RIS hops are
        normalized by the TX array size, so pass it explicitly there.
    """
    return sample_with_roots(_sqrt_of(r), _sqrt_of(t), rng, n_t)


def sample_with_roots(r_half, t_half, rng, n_t=None):
    """As :func:`sample_channel` but with precomputed square roots
    ``r^{1/2}`` and ``t^{1/2}``."""
    n_rows, n_cols = r_half.shape[0], t_half.shape[0]
    scale = 1.0 / np.sqrt(n_cols if n_t is None else n_t)
    x = rng.standard_normal((n_rows, n_cols, 2)).view(complex)[..., 0] * np.sqrt(0.5)
    return scale * (r_half @ x @ t_half)


@dataclass(frozen=True, eq=False)
class RisSpec:
    """One RIS: lattice, the TX->RIS wave (``incoming``) and the RIS->RX wave
    (``outgoing``), its horizontal offset ``x`` and optional RX/TX-side
    correlation matrices of its two hops. ``gamma`` overrides the geometric
    pathloss factor when given."""

    geometry: RisGeometry
    incoming: WeightFunction
    outgoing: WeightFunction
    x: float = 0.0
    r: object = None
    t: object = None
    gamma: float = None

    def s_t(self, **quadrature):
        """RIS-side correlation of the TX->RIS hop."""
        return build_correlation(self.geometry, self.incoming, **quadrature)

    def s_r(self, **quadrature):
        """RIS-side correlation of the RIS->RX hop."""
        return build_correlation(self.geometry, self.outgoing, **quadrature)


def _corr_or_identity(m, n):
    if m is None:
        return CorrelationMatrix.identity(n)
    if isinstance(m, CorrelationMatrix):
        return m
    return CorrelationMatrix(m)


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Full scenario description.

    Parameters
    ----------
    n_t, n_r : int
        TX and RX array sizes.
    rho : float
        Linear SNR.
    ris : tuple of RisSpec
    pathloss_exponent : float
        Exponent ``b`` of the RIS pathloss factor.
    d, h : float
        TX-RX distance and RIS line offset in meters (TX at ``(d/2, 0)``,
        RX at ``(-d/2, 0)``, RIS ``k`` at ``(x_k, +-h)``).
    q : array_like, optional
        Input covariance with trace ``n_t``; identity by default.
    direct_link : bool
        Include the direct TX-RX channel.
    r_d, t_d : array_like, optional
        RX/TX correlation of the direct link; identity by default.
    """

    n_t: int
    n_r: int
    rho: float
    ris: tuple = ()
    pathloss_exponent: float = 2.0
    d: float = 1.0
    h: float = 0.7
    q: object = None
    direct_link: bool = False
    r_d: object = None
    t_d: object = None
    name: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "ris", tuple(self.ris))
        q = np.eye(self.n_t, dtype=complex) if self.q is None else np.array(self.q, dtype=complex)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def k(self):
        return len(self.ris)

    @property
    def n_s(self):
        return self.ris[0].geometry.n_s if self.ris else 0

    @property
    def beta_r(self):
        return self.n_r / self.n_t

    @property
    def beta_s(self):
        return self.n_s / self.n_t

    def gammas(self):
        return np.array([pathloss_gamma(self, k) for k in range(self.k)])

    def direct_correlations(self):
        """``(R_d, T_d)`` as arrays; zero matrices when the direct link is off."""
        if not self.direct_link:
            return np.zeros((self.n_r, self.n_r)), np.zeros((self.n_t, self.n_t))
        return (_corr_or_identity(self.r_d, self.n_r).entries,
                _corr_or_identity(self.t_d, self.n_t).entries)

    def link_correlations(self, k):
        """``(R_k, T_k)`` of RIS ``k`` as CorrelationMatrix objects."""
        ris = self.ris[k]
        return _corr_or_identity(ris.r, self.n_r), _corr_or_identity(ris.t, self.n_t)

    def replace(self, **changes):
        return replace(self, **changes)

    def diagnostics(self):
        """All violated invariants as human-readable strings."""
        out = []
        if self.n_t < 1 or self.n_r < 1:
            out.append("antenna counts must be >= 1")
        if not self.rho >= 0:
            out.append(f"rho must be >= 0 (got {self.rho})")
        if self.q.shape != (self.n_t, self.n_t):
            out.append(f"Q must be {self.n_t}x{self.n_t}")
        else:
            tr = np.trace(self.q).real
            if abs(tr - self.n_t) > 1e-9 * self.n_t:
                out.append(f"Tr{{Q}} = {tr:.12g} must equal N_t = {self.n_t}")
            if not is_hermitian(self.q) or np.linalg.eigvalsh(self.q)[0] < -1e-10:
                out.append("Q must be Hermitian PSD")
        for name, m, n in (("R_d", self.r_d, self.n_r), ("T_d", self.t_d, self.n_t)):
            if m is not None and np.asarray(getattr(m, "entries", m)).shape != (n, n):
                out.append(f"{name} must be {n}x{n}")
        for k, ris in enumerate(self.ris):
            geo = ris.geometry
            for label, w in (("incoming", ris.incoming), ("outgoing", ris.outgoing)):
                if w.k0 > np.pi / geo.spacing * (1 + 1e-12):
                    out.append(
                        f"RIS {k} {label}: k0 = {w.k0:.6g} exceeds pi/a = "
                        f"{np.pi / geo.spacing:.6g} (spacing must be <= lambda/2)"
                    )
            for name, m, n in (("R", ris.r, self.n_r), ("T", ris.t, self.n_t)):
                if m is not None and np.asarray(getattr(m, "entries", m)).shape != (n, n):
                    out.append(f"RIS {k} {name} must be {n}x{n}")
            try:
                g = pathloss_gamma(self, k)
                if not g > 0:
                    out.append(f"RIS {k}: gamma must be positive")
            except ValueError as exc:
                out.append(f"RIS {k}: {exc}")
        return out

    def check(self):
        problems = self.diagnostics()
        if problems:
            raise ValueError("invalid SystemConfig: " + "; ".join(problems))
