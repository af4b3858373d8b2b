"""Adaptive integration of the variable-speed wave equation and the
half-line Schrodinger equation.

Everything is vectorized over a batch of wavenumbers: the state stacks
(u, u') for every k and one DOP853 sweep integrates the whole batch, with
nodes forced at profile breakpoints and point-interaction locations.  Delta
components of a potential are applied as exact jump conditions on u'.
Complex k is supported; callers should keep |Im k| <= ~30/b since solutions
grow like exp(|Im k| x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BadParams, MismatchedPoint, StepFailure
from .profiles import Potential, RadialProfile

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    max_step_per_period: int = 20

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise BadParams("tolerances must be positive")
        if self.max_step_per_period < 10:
            raise BadParams("max_step_per_period must be >= 10")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class SolutionSample:
    value: complex
    derivative: complex
    k: complex
    x_or_y: float


def wronskian(s1: SolutionSample, s2: SolutionSample) -> complex:
    """[g; h] = g h' - g' h at a shared evaluation point."""
    if abs(s1.x_or_y - s2.x_or_y) > 1e-12 * max(1.0, abs(s1.x_or_y)):
        raise MismatchedPoint(
            f"samples taken at different points: {s1.x_or_y!r} vs {s2.x_or_y!r}")
    return s1.value * s2.derivative - s1.derivative * s2.value


# ---------------------------------------------------------------------------
# core sweep
# ---------------------------------------------------------------------------

def _sweep(coef, x_from, x_to, u, up, stops, jumps, t_eval, max_freq, config):
    """Integrate u'' + coef(x) u = 0 for a batch, from x_from to x_to.

    coef(x) -> (n,) complex array (k-dependent coefficient at scalar x).
    stops: positions where integration must restart (breakpoints, deltas).
    jumps: {position: weight}; crossing applies u' += sign * weight * u with
           sign following the integration direction (Schrodinger delta terms).
    t_eval: positions (within [x_from, x_to]) where (u, u') are recorded.
    Returns (u, up, evals) with evals shaped (len(t_eval), 2, n).
    """
    n = u.size
    direction = 1.0 if x_to >= x_from else -1.0

    def rhs(x, s):
        out = np.empty_like(s)
        out[:n] = s[n:]
        out[n:] = -coef(x) * s[:n]
        return out

    inner = [p for p in stops if min(x_from, x_to) < p < max(x_from, x_to)]
    inner.sort(reverse=(direction < 0))
    checkpoints = [x_from] + inner + [x_to]

    t_eval = np.asarray(t_eval, dtype=float)
    evals = np.empty((t_eval.size, 2, n), dtype=complex)
    seen = np.zeros(t_eval.size, dtype=bool)

    state = np.concatenate([u, up])
    if max_freq > 0.0:
        cap = _TWO_PI / (max_freq * config.max_step_per_period)
    else:
        cap = np.inf

    # a delta sitting exactly at the start point acts immediately
    if x_from in jumps:
        state[n:] += direction * jumps[x_from] * state[:n]

    for lo, hi in zip(checkpoints, checkpoints[1:]):
        span = abs(hi - lo)
        if span > 0.0:
            if direction > 0:
                mask = (t_eval >= lo - 1e-15) & (t_eval <= hi + 1e-15) & ~seen
            else:
                mask = (t_eval <= lo + 1e-15) & (t_eval >= hi - 1e-15) & ~seen
            pts = t_eval[mask]
            order = np.argsort(pts)[::1 if direction > 0 else -1]
            sol = solve_ivp(rhs, (lo, hi), state, method="DOP853",
                            rtol=config.rel_tol, atol=config.abs_tol,
                            max_step=min(cap, span),
                            t_eval=pts[order] if pts.size else None,
                            dense_output=False)
            if not sol.success:
                raise StepFailure(f"integrator failed on [{lo!r}, {hi!r}]: {sol.message}")
            if pts.size:
                vals = sol.y.reshape(2, n, -1)
                idx = np.flatnonzero(mask)[order]
                evals[idx] = np.moveaxis(vals, 2, 0)
                seen[idx] = True
                # continue from the endpoint, re-integrating if t_eval
                # did not include it
                if abs(sol.t[-1] - hi) > 1e-14 * max(1.0, abs(hi)):
                    sol = solve_ivp(rhs, (sol.t[-1], hi), sol.y[:, -1],
                                    method="DOP853", rtol=config.rel_tol,
                                    atol=config.abs_tol,
                                    max_step=min(cap, abs(hi - sol.t[-1])))
                    if not sol.success:
                        raise StepFailure(sol.message)
            state = sol.y[:, -1]
        if hi in jumps and hi != x_to:
            state[n:] += direction * jumps[hi] * state[:n]

    exact = np.isclose(t_eval, x_to, rtol=0, atol=1e-15) & ~seen
    if np.any(exact):
        evals[exact, 0] = state[:n]
        evals[exact, 1] = state[n:]
        seen[exact] = True
    if not np.all(seen):
        raise StepFailure("evaluation points outside the integration span")
    return state[:n], state[n:], evals


# ---------------------------------------------------------------------------
# wave picture
# ---------------------------------------------------------------------------

def _as_k_array(k):
    ks = np.atleast_1d(np.asarray(k, dtype=complex))
    if ks.ndim != 1:
        raise BadParams("k batch must be one-dimensional")
    return ks


def solve_regular_batch(p: RadialProfile, k, x_eval, config=DEFAULT_CONFIG):
    """phi(x_eval; k) and phi'(x_eval; k) for a batch of k."""
    ks = _as_k_array(k)
    x_eval = float(x_eval)
    k2 = ks * ks
    n = ks.size

    def coef(x):
        return k2 * p.rho(x)

    max_freq = float(np.max(np.abs(ks))) * p.sqrt_rho_max(0.0, max(x_eval, 1e-12))
    u0 = np.zeros(n, dtype=complex)
    up0 = np.ones(n, dtype=complex)
    if x_eval == 0.0:
        return u0, up0
    u, up, _ = _sweep(coef, 0.0, x_eval, u0, up0,
                      p.interior_breakpoints(0.0, x_eval), {}, [], max_freq, config)
    return u, up


def solve_regular(p: RadialProfile, k, x_eval, config=DEFAULT_CONFIG) -> SolutionSample:
    u, up = solve_regular_batch(p, [k], x_eval, config)
    return SolutionSample(complex(u[0]), complex(up[0]), complex(k), float(x_eval))


def solve_regular_variational_batch(p: RadialProfile, k, x_eval, config=DEFAULT_CONFIG):
    """(phi, phi', d phi/dk, d phi'/dk) at x_eval for a batch of k.

    The k-derivative solves w'' + k^2 rho w = -2 k rho phi with zero initial
    data, integrated alongside phi.
    """
    ks = _as_k_array(k)
    x_eval = float(x_eval)
    n = ks.size
    k2 = ks * ks

    def coef_full(x, s):
        rho = p.rho(x)
        out = np.empty_like(s)
        out[:n] = s[n:2 * n]
        out[n:2 * n] = -k2 * rho * s[:n]
        out[2 * n:3 * n] = s[3 * n:]
        out[3 * n:] = -k2 * rho * s[2 * n:3 * n] - 2.0 * ks * rho * s[:n]
        return out

    state = np.zeros(4 * n, dtype=complex)
    state[n:2 * n] = 1.0
    if x_eval == 0.0:
        return state[:n] + 0, state[n:2 * n] + 0, state[2 * n:3 * n] + 0, state[3 * n:] + 0

    max_freq = float(np.max(np.abs(ks))) * p.sqrt_rho_max(0.0, x_eval)
    cap = _TWO_PI / (max_freq * config.max_step_per_period) if max_freq > 0 else np.inf
    checkpoints = [0.0] + p.interior_breakpoints(0.0, x_eval) + [x_eval]
    for lo, hi in zip(checkpoints, checkpoints[1:]):
        sol = solve_ivp(coef_full, (lo, hi), state, method="DOP853",
                        rtol=config.rel_tol, atol=config.abs_tol,
                        max_step=min(cap, hi - lo))
        if not sol.success:
            raise StepFailure(sol.message)
        state = sol.y[:, -1]
    return state[:n], state[n:2 * n], state[2 * n:3 * n], state[3 * n:]


def solve_jost_wave_batch(p: RadialProfile, k, x_eval, config=DEFAULT_CONFIG):
    """Jost solution f(x_eval; k), f'(x_eval; k); data e^{ikx} at x = b."""
    ks = _as_k_array(k)
    x_eval = float(x_eval)
    b = p.b
    if x_eval >= b:
        f = np.exp(1j * ks * x_eval)
        return f, 1j * ks * f
    k2 = ks * ks

    def coef(x):
        return k2 * p.rho(x)

    max_freq = float(np.max(np.abs(ks))) * p.sqrt_rho_max(x_eval, b)
    f0 = np.exp(1j * ks * b)
    fp0 = 1j * ks * f0
    f, fp, _ = _sweep(coef, b, x_eval, f0, fp0,
                      p.interior_breakpoints(x_eval, b), {}, [], max_freq, config)
    return f, fp


def solve_jost_wave(p: RadialProfile, k, x_eval, config=DEFAULT_CONFIG) -> SolutionSample:
    f, fp = solve_jost_wave_batch(p, [k], x_eval, config)
    return SolutionSample(complex(f[0]), complex(fp[0]), complex(k), float(x_eval))


# ---------------------------------------------------------------------------
# Schrodinger picture
# ---------------------------------------------------------------------------

def _schrodinger_freq(V: Potential, ks):
    probe = np.linspace(0.0, V.a, 257)
    vmax = float(np.max(np.abs(V.V(probe)))) if V.a > 0 else 0.0
    return float(np.max(np.abs(ks))) + np.sqrt(vmax)


def _schrodinger_coef(V: Potential, k2):
    def coef(y):
        return k2 - V.V(y)
    return coef


def solve_jost_schrodinger_batch(V: Potential, k, y_eval, config=DEFAULT_CONFIG):
    """Jost solution of f'' + k^2 f = V f with f = e^{iky} for y >= a.

    Delta components (y0, c) impose f continuous and f' jumping by c*f(y0).
    """
    ks = _as_k_array(k)
    y_eval = float(y_eval)
    a = V.a
    jumps = {y0: c for y0, c in V.point_parts}
    if y_eval >= a:
        f = np.exp(1j * ks * y_eval)
        return f, 1j * ks * f
    f0 = np.exp(1j * ks * a)
    fp0 = 1j * ks * f0
    f, fp, _ = _sweep(_schrodinger_coef(V, ks * ks), a, y_eval, f0, fp0,
                      V.interior_points(y_eval, a), jumps, [],
                      _schrodinger_freq(V, ks), config)
    return f, fp


def solve_jost_schrodinger(V: Potential, k, y_eval, config=DEFAULT_CONFIG) -> SolutionSample:
    f, fp = solve_jost_schrodinger_batch(V, [k], y_eval, config)
    return SolutionSample(complex(f[0]), complex(fp[0]), complex(k), float(y_eval))


def jost_schrodinger_on_grid(V: Potential, k, y_grid, config=DEFAULT_CONFIG):
    """f(y; k) on a whole y grid for one k; returns (values, derivatives)."""
    ks = _as_k_array(k)
    if ks.size != 1:
        raise BadParams("grid evaluation takes a single k")
    y_grid = np.asarray(y_grid, dtype=float)
    a = V.a
    out_v = np.empty(y_grid.size, dtype=complex)
    out_d = np.empty(y_grid.size, dtype=complex)
    outside = y_grid >= a
    out_v[outside] = np.exp(1j * ks[0] * y_grid[outside])
    out_d[outside] = 1j * ks[0] * out_v[outside]
    inside = ~outside
    if np.any(inside):
        jumps = {y0: c for y0, c in V.point_parts}
        f0 = np.exp(1j * ks * a)
        fp0 = 1j * ks * f0
        lo = float(np.min(y_grid[inside]))
        _, _, evals = _sweep(_schrodinger_coef(V, ks * ks), a, lo, f0, fp0,
                             V.interior_points(lo, a), jumps, y_grid[inside],
                             _schrodinger_freq(V, ks), config)
        out_v[inside] = evals[:, 0, 0]
        out_d[inside] = evals[:, 1, 0]
    return out_v, out_d


def solve_regular_schrodinger_batch(V: Potential, k, y_eval, config=DEFAULT_CONFIG):
    """Regular solution of the Schrodinger equation: value 0, slope 1 at 0."""
    ks = _as_k_array(k)
    y_eval = float(y_eval)
    n = ks.size
    u0 = np.zeros(n, dtype=complex)
    up0 = np.ones(n, dtype=complex)
    if y_eval == 0.0:
        return u0, up0
    jumps = {y0: c for y0, c in V.point_parts}
    u, up, _ = _sweep(_schrodinger_coef(V, ks * ks), 0.0, y_eval, u0, up0,
                      V.interior_points(0.0, y_eval), jumps, [],
                      _schrodinger_freq(V, ks), config)
    # a delta at the evaluation endpoint contributes to the derivative there
    if y_eval in jumps:
        up = up + jumps[y_eval] * u
    return u, up


def solve_regular_schrodinger(V: Potential, k, y_eval, config=DEFAULT_CONFIG) -> SolutionSample:
    u, up = solve_regular_schrodinger_batch(V, [k], y_eval, config)
    return SolutionSample(complex(u[0]), complex(up[0]), complex(k), float(y_eval))
