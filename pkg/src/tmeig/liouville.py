"""Liouville transformation between the wave picture (rho, x) and the
Schrodinger picture (V, y).

The travel-time coordinate is y(x) = int_0^x sqrt(rho); the transformed
Jost solution is rho^{1/4} e^{-ik(b-a)} f(x;k) and the potential is

    V(y) = rho''/(4 rho^2) - 5 rho'^2 / (16 rho^3)

composed with x(y).  A jump of rho' at a breakpoint contributes a delta
component whose weight follows from integrating the rho^{1/4} equation
across the interface: weight = (rho'_+ - rho'_-) / (4 rho^{3/2}).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import NonPositiveJost, QuadratureFailure
from .ode import DEFAULT_CONFIG, solve_jost_schrodinger, solve_jost_wave
from .profiles import Potential, RadialProfile

# 16-point Gauss-Legendre rule on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def _cumulative_integral(fn, mesh):
    """Cumulative integral of a piecewise-smooth fn over a mesh whose nodes
    include every kink; composite 16-point Gauss-Legendre per cell."""
    mesh = np.asarray(mesh, dtype=float)
    lo = mesh[:-1]
    width = np.diff(mesh)
    nodes = lo[:, None] + width[:, None] * _GL_X[None, :]
    vals = fn(nodes.ravel()).reshape(nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise QuadratureFailure("integrand not finite on the quadrature mesh")
    cells = width * (vals @ _GL_W)
    return np.concatenate([[0.0], np.cumsum(cells)])


def _dense_mesh(lo, hi, n, forced):
    mesh = np.linspace(lo, hi, n)
    extra = [t for t in forced if lo < t < hi]
    return np.unique(np.concatenate([mesh, np.asarray(extra, dtype=float)]))


@dataclass(frozen=True, eq=False)
class TravelTimeMap:
    """Monotone coordinate map x <-> y with travel time a = y(b)."""

    a: float
    b: float
    _x_nodes: np.ndarray
    _y_nodes: np.ndarray
    _fwd: Callable
    _inv: Callable

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if np.isnan(self.b):
            out = np.asarray(self._fwd(x), dtype=float)
        else:
            xn = self._x_nodes
            out = np.where(x >= self.b, x + self.a - self.b,
                           self._fwd(np.clip(x, xn[0], xn[-1])))
        return out if out.shape else float(out)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.isnan(self.a):
            out = np.asarray(self._inv(y), dtype=float)
        else:
            yn = self._y_nodes
            out = np.where(y >= self.a, y - self.a + self.b,
                           self._inv(np.clip(y, yn[0], yn[-1])))
        return out if out.shape else float(out)


def _build_map(x_nodes, y_nodes, a, b):
    fwd = PchipInterpolator(x_nodes, y_nodes, extrapolate=True)
    inv = PchipInterpolator(y_nodes, x_nodes, extrapolate=True)
    return TravelTimeMap(a, b, x_nodes, y_nodes, fwd, inv)


def travel_time(p: RadialProfile, n_dense=2049) -> TravelTimeMap:
    """y(x) = int_0^x sqrt(rho), with nodes forced at profile breakpoints."""
    mesh = _dense_mesh(0.0, p.b, n_dense, p.breakpoints)
    ys = _cumulative_integral(lambda x: np.sqrt(p.rho(x)), mesh)
    if np.any(np.diff(ys) <= 0):
        raise QuadratureFailure("travel-time map is not strictly increasing")
    return _build_map(mesh, ys, float(ys[-1]), p.b)


def to_potential(p: RadialProfile, ttmap: Optional[TravelTimeMap] = None,
                 n_dense=2049) -> Potential:
    """Schrodinger potential of a profile, with delta components at rho' jumps."""
    tt = ttmap if ttmap is not None else travel_time(p, n_dense)
    a = tt.a

    def smooth(y):
        y = np.asarray(y, dtype=float)
        x = np.asarray(tt.inverse(y), dtype=float)
        rho = np.asarray(p.rho(x), dtype=float)
        d1 = np.asarray(p.rho_prime(x), dtype=float)
        d2 = np.asarray(p.rho_second(x), dtype=float)
        return d2 / (4.0 * rho**2) - 5.0 * d1**2 / (16.0 * rho**3)

    # rho' jumps can only sit at segment junctions or at the support edge
    point_parts = []
    junctions = [(s_left.x_hi, s_left, s_right)
                 for s_left, s_right in zip(p.segments, p.segments[1:])]
    junctions.append((p.b, p.segments[-1], None))
    for t, s_left, s_right in junctions:
        d_left = float(s_left.drho(np.array([t])))
        d_right = float(s_right.drho(np.array([t]))) if s_right is not None else 0.0
        jump = d_right - d_left
        if abs(jump) > 1e-10 * max(1.0, abs(d_left), abs(d_right)):
            rho_t = float(p.rho(min(t, p.b - 1e-15 * p.b)))
            weight = jump / (4.0 * rho_t**1.5)
            point_parts.append((float(tt.forward(t)), weight))

    y_breaks = tuple(float(tt.forward(t)) for t in p.breakpoints if 0.0 < t < p.b)
    return Potential(a, smooth, tuple(point_parts), None,
                     label=f"liouville({p.label})", smooth_breakpoints=y_breaks)


def transform_jost(p: RadialProfile, k, x, ttmap=None, potential=None,
                   check_tol=1e-8, config=DEFAULT_CONFIG):
    """rho(x)^{1/4} e^{-ik(b-a)} f(x;k), checked against the directly
    integrated Schrodinger Jost solution at y(x)."""
    tt = ttmap if ttmap is not None else travel_time(p)
    V = potential if potential is not None else to_potential(p, tt)
    f = solve_jost_wave(p, k, x, config)
    value = float(p.rho(x)) ** 0.25 * np.exp(-1j * complex(k) * (p.b - tt.a)) * f.value
    direct = solve_jost_schrodinger(V, k, float(tt.forward(x)), config).value
    if abs(value - direct) > check_tol * (1.0 + abs(direct)):
        raise QuadratureFailure(
            f"Liouville-transformed Jost value {value!r} disagrees with the "
            f"direct Schrodinger integration {direct!r} at x = {x!r}, k = {k!r}")
    return complex(value)


def invert_travel_time(f0_zero_energy: Callable, y_max, b=None,
                       n_dense=4097, breakpoints=()) -> TravelTimeMap:
    """Coordinate map from the zero-energy Jost values:
    x(y) = int_0^y ds / f(s;0)^2, inverted by monotone interpolation.

    f0_zero_energy must be positive on [0, y_max]; for profile-derived data
    this holds since f(y;0) = rho(x(y))^{1/4}.  When b is supplied the
    travel time a = y(b) is recorded on the returned map.
    """
    mesh = _dense_mesh(0.0, float(y_max), n_dense, breakpoints)
    fvals = np.asarray(f0_zero_energy(mesh), dtype=float)
    if np.any(fvals <= 0.0):
        bad = mesh[int(np.argmin(fvals))]
        raise NonPositiveJost(f"zero-energy Jost value <= 0 near y = {bad!r}")

    def integrand(y):
        v = np.asarray(f0_zero_energy(np.asarray(y, dtype=float)), dtype=float)
        if np.any(v <= 0.0):
            raise NonPositiveJost("zero-energy Jost value <= 0 inside quadrature")
        return 1.0 / v**2

    xs = _cumulative_integral(integrand, mesh)
    if np.any(np.diff(xs) <= 0):
        raise QuadratureFailure("inverted map is not strictly increasing")
    fwd = PchipInterpolator(xs, mesh, extrapolate=True)   # x -> y
    inv = PchipInterpolator(mesh, xs, extrapolate=True)   # y -> x
    if b is not None:
        if not xs[0] <= b <= xs[-1]:
            raise QuadratureFailure(f"b = {b!r} outside the mapped range")
        a = float(fwd(b))
        b_val = float(b)
    else:
        a = float("nan")
        b_val = float("nan")
    return TravelTimeMap(a, b_val, xs, np.asarray(mesh), fwd, inv)
