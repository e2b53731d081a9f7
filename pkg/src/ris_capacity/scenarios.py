"""
Ready-made system configurations for the reference experiments.

Angles are in radians. Local RIS frame convention: the surface is the
``z = 0`` plane, the TX->RIS wave travels towards ``-z`` and the RIS->RX
wave leaves towards ``+z``. Incidence angles are measured from the surface
normal in the local ``x-z`` plane, so ``theta1 == theta2`` is specular
reflection.
"""

import numpy as np

from .channel import RisGeometry, RisSpec, SystemConfig, WeightFunction

__all__ = [
    "SPEED_OF_LIGHT",
    "wavelength_at",
    "REFERENCE_WAVELENGTH",
    "incoming_weight",
    "outgoing_weight",
    "angled_ris",
    "reference_config",
    "tilt_config",
    "placement_config",
]

SPEED_OF_LIGHT = 299_792_458.0


def wavelength_at(frequency_hz):
    return SPEED_OF_LIGHT / frequency_hz


REFERENCE_WAVELENGTH = wavelength_at(2.5e9)


def incoming_weight(theta, sigma, wavelength):
    """Weight of a wave arriving at incidence angle ``theta``."""
    return WeightFunction.from_direction((np.sin(theta), 0.0, -np.cos(theta)), sigma, wavelength)


def outgoing_weight(theta, sigma, wavelength):
    """Weight of a wave leaving at angle ``theta`` from the normal."""
    return WeightFunction.from_direction((np.sin(theta), 0.0, np.cos(theta)), sigma, wavelength)


def angled_ris(theta1, theta2, sigma, n_d=20, spacing=None, wavelength=REFERENCE_WAVELENGTH,
               x=0.0, gamma=None):
    """RIS in its own frame with incidence ``theta1`` and departure
    ``theta2``; spacing defaults to half a wavelength."""
    spacing = wavelength / 2 if spacing is None else spacing
    return RisSpec(RisGeometry(n_d, spacing), incoming_weight(theta1, sigma, wavelength),
                   outgoing_weight(theta2, sigma, wavelength), x=x, gamma=gamma)


def reference_config(k=1, sigma=np.deg2rad(5.0), theta1=np.deg2rad(30.0),
                     theta2=np.deg2rad(70.0), n_t=8, n_r=4, rho=10.0, n_d=20,
                     wavelength=REFERENCE_WAVELENGTH, spacing=None, direct_link=False, x=0.0,
                     gamma=None, **kwargs):
    """``k`` identical RISs with fixed wave angles, by default at the
    midpoint (``gamma = 1``): the baseline setup of the angle-spread, CDF
    and variance experiments."""
    ris = angled_ris(theta1, theta2, sigma, n_d, spacing, wavelength, x=x, gamma=gamma)
    return SystemConfig(n_t=n_t, n_r=n_r, rho=rho, ris=(ris,) * k, direct_link=direct_link,
                        **kwargs)


def tilt_config(theta1, theta_total=np.deg2rad(100.0), k=2, sigma=np.deg2rad(5.0), n_t=8,
                n_r=4, rho=10.0, n_d=20, wavelength=REFERENCE_WAVELENGTH, spacing=None, **kwargs):
    """RISs tilted about the world y-axis so that the local incidence angle
    is ``theta1`` and the departure angle is ``theta_total - theta1``.

    The world-frame wave directions are fixed at the symmetric split
    ``theta_total / 2``; only the lattice rotates.
    """
    half = theta_total / 2
    tilt = theta1 - half
    spacing = wavelength / 2 if spacing is None else spacing
    geometry = RisGeometry.tilted(n_d, spacing, tilt)
    ris = RisSpec(geometry, incoming_weight(half, sigma, wavelength),
                  outgoing_weight(half, sigma, wavelength))
    return SystemConfig(n_t=n_t, n_r=n_r, rho=rho, ris=(ris,) * k, **kwargs)


# RIS at (x, +h) facing -y and at (x, -h) facing +y; local x is world x
_FACING_DOWN = ((1.0, 0.0, 0.0), (0.0, 0.0, -1.0), (0.0, 1.0, 0.0))
_FACING_UP = ((1.0, 0.0, 0.0), (0.0, 0.0, 1.0), (0.0, -1.0, 0.0))


def placement_config(x, h, d=1.0, k=2, sigma=np.deg2rad(5.0), n_t=8, n_r=4, rho=10.0,
                     n_d=20, wavelength=REFERENCE_WAVELENGTH, spacing=None, pathloss_exponent=2.0,
                     **kwargs):
    """RISs at ``(x, +h)`` and ``(x, -h)`` (alternating for ``k > 2``) with
    TX at ``(d/2, 0)`` and RX at ``(-d/2, 0)``; mean wave directions follow
    from the positions."""
    tx = np.array([d / 2, 0.0, 0.0])
    rx = np.array([-d / 2, 0.0, 0.0])
    spacing = wavelength / 2 if spacing is None else spacing
    specs = []
    for i in range(k):
        sign = 1.0 if i % 2 == 0 else -1.0
        pos = np.array([x, sign * h, 0.0])
        geometry = RisGeometry(n_d, spacing, _FACING_DOWN if sign > 0 else _FACING_UP,
                               tuple(pos))
        specs.append(RisSpec(geometry, WeightFunction.from_direction(pos - tx, sigma, wavelength),
                             WeightFunction.from_direction(rx - pos, sigma, wavelength), x=x))
    return SystemConfig(n_t=n_t, n_r=n_r, rho=rho, ris=tuple(specs), d=d, h=h,
                        pathloss_exponent=pathloss_exponent, **kwargs)
