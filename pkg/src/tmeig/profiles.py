"""Radial wave-speed profiles and half-line potentials.

A profile is a piecewise-analytic ``rho(x)`` on ``[0, b]`` with ``rho == 1``
beyond ``b``.  Segments carry closures for ``rho``, ``rho'``, ``rho''`` so
that downstream ODE integration can place nodes exactly at breakpoints and
the Liouville transform can evaluate derivatives without numerical
differentiation.  The built-in example families attach closed-form spectral
metadata (a, gamma, d and a dispersion-function evaluator) used as oracles
by the test suite and the ``validate`` command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import BadParams, DiscontinuousJunction, GapOrOverlap, NonPositive

_JUNCTION_RTOL = 1e-12
_POSITIVITY_PROBES = 1009


def _vectorize_const(value):
    def f(x):
        return np.full_like(np.asarray(x, dtype=float), value)
    return f


@dataclass(frozen=True)
class Segment:
    """One analytic piece of a profile on the closed interval [x_lo, x_hi]."""

    x_lo: float
    x_hi: float
    kind: str
    params: dict
    rho: Callable[[np.ndarray], np.ndarray]
    drho: Callable[[np.ndarray], np.ndarray]
    d2rho: Callable[[np.ndarray], np.ndarray]


def constant_segment(x_lo, x_hi, value=1.0):
    return Segment(float(x_lo), float(x_hi), "constant", {"value": float(value)},
                   _vectorize_const(value), _vectorize_const(0.0), _vectorize_const(0.0))


def rational_ex61_segment(x_lo, x_hi, epsilon, c):
    """rho(x) = eps^4 / (eps*c*x + 1)^4."""
    eps, c = float(epsilon), float(c)

    def rho(x):
        return eps**4 / (eps * c * np.asarray(x, dtype=float) + 1.0) ** 4

    def drho(x):
        return -4.0 * eps**5 * c / (eps * c * np.asarray(x, dtype=float) + 1.0) ** 5

    def d2rho(x):
        return 20.0 * eps**6 * c**2 / (eps * c * np.asarray(x, dtype=float) + 1.0) ** 6

    return Segment(float(x_lo), float(x_hi), "rational_ex61",
                   {"epsilon": eps, "c": c}, rho, drho, d2rho)


def power_segment(x_lo, x_hi, amp, shift, exponent):
    """rho(x) = amp * (x + shift)^exponent."""
    amp, shift, p = float(amp), float(shift), float(exponent)

    def rho(x):
        return amp * (np.asarray(x, dtype=float) + shift) ** p

    def drho(x):
        return amp * p * (np.asarray(x, dtype=float) + shift) ** (p - 1.0)

    def d2rho(x):
        return amp * p * (p - 1.0) * (np.asarray(x, dtype=float) + shift) ** (p - 2.0)

    return Segment(float(x_lo), float(x_hi), "power",
                   {"amp": amp, "shift": shift, "exponent": p}, rho, drho, d2rho)


def table_segment(x_lo, x_hi, x_knots, rho_values):
    """Monotone-cubic interpolant through tabulated (x, rho) knots."""
    xk = np.asarray(x_knots, dtype=float)
    rk = np.asarray(rho_values, dtype=float)
    if xk.ndim != 1 or xk.size < 2 or xk.size != rk.size:
        raise BadParams("table segment needs matching 1-d knot arrays, >= 2 points")
    if np.any(np.diff(xk) <= 0):
        raise BadParams("table knots must be strictly increasing")
    interp = PchipInterpolator(xk, rk, extrapolate=True)
    d1 = interp.derivative(1)
    d2 = interp.derivative(2)
    return Segment(float(x_lo), float(x_hi), "table",
                   {"x": xk.tolist(), "rho": rk.tolist()},
                   lambda x: interp(np.asarray(x, dtype=float)),
                   lambda x: d1(np.asarray(x, dtype=float)),
                   lambda x: d2(np.asarray(x, dtype=float)))


def custom_segment(x_lo, x_hi, rho, drho, d2rho, params=None):
    """Segment from arbitrary closures; not representable in profile files."""
    return Segment(float(x_lo), float(x_hi), "custom", params or {}, rho, drho, d2rho)


@dataclass(frozen=True)
class ClosedForm:
    """Closed-form spectral metadata attached to example profiles."""

    a: float
    gamma: float
    d: int
    D: Callable[[np.ndarray], np.ndarray]
    E: Optional[Callable[[np.ndarray], np.ndarray]] = None
    f0: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = ""


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise wave-speed profile; rho == 1 for x >= b.

    Immutable after construction, safe for concurrent reads.
    """

    b: float
    segments: tuple[Segment, ...]
    breakpoints: tuple[float, ...]
    closed_form: Optional[ClosedForm] = None
    label: str = ""

    def _segment_index(self, x):
        x = np.asarray(x, dtype=float)
        edges = np.array([s.x_lo for s in self.segments] + [self.b])
        idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(self.segments) - 1)
        return x, idx

    def _piecewise(self, x, attr, beyond):
        x, idx = self._segment_index(x)
        out = np.full(x.shape, beyond, dtype=float)
        inside = x < self.b
        for i, seg in enumerate(self.segments):
            m = inside & (idx == i)
            if np.any(m):
                out[m] = getattr(seg, attr)(x[m])
        at_b = x == self.b
        if np.any(at_b):
            # closure value at b belongs to the last segment (continuity gives 1)
            out[at_b] = getattr(self.segments[-1], attr)(x[at_b]) if attr == "rho" else beyond
        return out

    def rho(self, x):
        out = self._piecewise(x, "rho", 1.0)
        return out if out.shape else float(out)

    def rho_prime(self, x):
        out = self._piecewise(x, "drho", 0.0)
        return out if out.shape else float(out)

    def rho_second(self, x):
        out = self._piecewise(x, "d2rho", 0.0)
        return out if out.shape else float(out)

    def sqrt_rho_max(self, x_lo=0.0, x_hi=None):
        """Coarse upper bound of sqrt(rho) used for oscillation step caps."""
        x_hi = self.b if x_hi is None else x_hi
        xs = np.linspace(x_lo, max(x_hi, x_lo + 1e-12), 257)
        return float(np.sqrt(np.max(np.abs(self.rho(xs)))))

    def interior_breakpoints(self, lo, hi):
        return [t for t in self.breakpoints if lo < t < hi]

    def tabulate(self, n=513):
        """Convert to a single table-kind profile (for file round trips)."""
        xs = np.linspace(0.0, self.b, n)
        seg = table_segment(0.0, self.b, xs, self.rho(xs))
        return RadialProfile(self.b, (seg,), tuple(xs.tolist()), None, self.label + "_table")


def make_piecewise_profile(b, segments: Sequence[Segment], closed_form=None, label=""):
    """Assemble and validate a profile from ordered segments tiling [0, b]."""
    b = float(b)
    if b <= 0:
        raise BadParams("support radius b must be positive")
    segs = tuple(segments)
    if not segs:
        raise GapOrOverlap("no segments supplied")
    if abs(segs[0].x_lo) > 1e-15 or abs(segs[-1].x_hi - b) > 1e-12 * max(1.0, b):
        raise GapOrOverlap("segments do not span [0, b]")
    for left, right in zip(segs, segs[1:]):
        if abs(left.x_hi - right.x_lo) > 1e-12 * max(1.0, b):
            raise GapOrOverlap(f"gap or overlap at x = {left.x_hi!r}")
    # value continuity at interior junctions
    for left, right in zip(segs, segs[1:]):
        xj = left.x_hi
        vl = float(left.rho(np.array([xj])))
        vr = float(right.rho(np.array([xj])))
        if abs(vl - vr) > _JUNCTION_RTOL * max(1.0, abs(vl), abs(vr)):
            raise DiscontinuousJunction(f"rho jumps from {vl!r} to {vr!r} at x = {xj!r}")
    breakpoints = sorted({s.x_lo for s in segs} | {s.x_hi for s in segs} | {b})
    breakpoints = tuple(t for t in breakpoints if 0.0 <= t <= b)
    prof = RadialProfile(b, segs, breakpoints, closed_form, label)
    probe = np.linspace(0.0, b, _POSITIVITY_PROBES)
    vals = prof.rho(probe)
    if np.any(vals <= 0.0):
        bad = probe[np.argmin(vals)]
        raise NonPositive(f"rho <= 0 near x = {bad!r}")
    return prof


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

@dataclass
class AdmissibilityReport:
    violations: list = field(default_factory=list)

    @property
    def is_class_A(self):
        return not self.violations


def check_admissible(p: RadialProfile, fd_step_scale=1e-7, jump_rtol=1e-6) -> AdmissibilityReport:
    """Probe positivity, continuity of rho and rho', and rho == 1 beyond b.

    rho' is probed by one-sided finite differences across every breakpoint
    (step ``fd_step_scale * b``); a jump is flagged when the one-sided slopes
    differ by more than ``jump_rtol`` on the local |rho'| scale.
    """
    rep = AdmissibilityReport()
    b = p.b
    h = fd_step_scale * b

    xs = np.linspace(0.0, b, _POSITIVITY_PROBES)
    vals = p.rho(xs)
    if np.any(vals <= 0.0):
        rep.violations.append((float(xs[np.argmin(vals)]), "nonpositive"))

    beyond = np.linspace(b, 2.0 * b, 257)[1:]
    if np.any(np.abs(p.rho(beyond) - 1.0) > 1e-12):
        bad = beyond[np.argmax(np.abs(p.rho(beyond) - 1.0))]
        rep.violations.append((float(bad), "not-one-beyond-b"))

    candidates = sorted(set(p.breakpoints) | {b})
    for t in candidates:
        lo, hi = max(t - h, 0.0), min(t + h, 2.0 * b)
        vl = p.rho(max(t - 1e-14 * b, 0.0)) if t > 0 else p.rho(0.0)
        vr = p.rho(min(t + 1e-14 * b, 2.0 * b))
        if abs(vl - vr) > 1e-9 * max(1.0, abs(vl)):
            rep.violations.append((float(t), "discontinuous"))
            continue
        if t <= 0.0:
            continue
        # one-sided slopes; at t == b the right side is identically 1
        sl = (p.rho(t) - p.rho(lo)) / (t - lo) if t - lo > 0 else 0.0
        sr = (p.rho(hi) - p.rho(t)) / (hi - t) if hi - t > 0 else 0.0
        scale = max(1.0, abs(sl), abs(sr))
        if abs(sl - sr) > jump_rtol * scale:
            rep.violations.append((float(t), "rho-prime-jump"))
    return rep


# ---------------------------------------------------------------------------
# built-in example profiles
# ---------------------------------------------------------------------------

def _sinhc(z):
    """sinh(z)/z, stable near 0, complex-safe."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    out = np.empty_like(z)
    zs = z[small]
    out[small] = 1.0 + zs * zs / 6.0 + zs**4 / 120.0
    zb = z[~small]
    out[~small] = np.sinh(zb) / zb
    return out


def _ex61_closed_form(epsilon, c, b):
    eps = epsilon
    x0 = (eps - 1.0) / (eps * c)
    delta1 = (eps - 1.0) ** 2 / (eps * c)          # b - a = -delta1
    delta2 = (eps * eps - 1.0) / (eps * c)
    a = b + delta1
    gamma = -((eps - 1.0) ** 4) / (3.0 * eps**3 * c**3)

    def D(k):
        k = np.asarray(k, dtype=complex)
        out = np.empty_like(k)
        small = np.abs(k) < 1e-8
        kb = k[~small]
        out[~small] = (c / (2.0 * eps * kb * kb)) * (
            np.cos(kb * delta1) - np.cos(kb * delta2)
            - (2.0 * kb / c) * np.sin(kb * delta1))
        out[small] = gamma * k[small] ** 2
        return out if out.shape else complex(out)

    def E(k):
        k = np.asarray(k, dtype=complex)
        val = D(k) / gamma
        return val

    def f0(k):
        k = np.asarray(k, dtype=complex)
        phase = np.exp(-1j * k * delta1)
        return (phase / (2.0 * eps * k)) * (
            (2.0 * k + 1j * c) - 1j * c * np.exp(2j * k * (eps - 1.0) / c))

    label = f"ex61(eps={eps!r}, c={c!r}, b={b!r})"
    return x0, ClosedForm(a=a, gamma=gamma, d=1, D=D, E=E, f0=f0, label=label)


def example_ex61(epsilon, c, b):
    eps, c, b = float(epsilon), float(c), float(b)
    if eps <= 0.0 or eps == 1.0:
        raise BadParams("ex61 requires epsilon > 0, epsilon != 1")
    if c == 0.0 or (c > 0.0) != (eps > 1.0):
        raise BadParams("ex61 requires c != 0 with sign(c) = sign(epsilon - 1)")
    x0 = (eps - 1.0) / (eps * c)
    if b < x0:
        raise BadParams(f"ex61 requires b >= x0 = {x0!r}")
    _, cf = _ex61_closed_form(eps, c, b)
    segs = [rational_ex61_segment(0.0, x0, eps, c)]
    if b > x0:
        segs.append(constant_segment(x0, b, 1.0))
    return make_piecewise_profile(b, segs, cf, cf.label)


def _ex62_E(b):
    def E(k):
        k = np.asarray(k, dtype=complex)
        out = np.empty_like(k)
        small = np.abs(b * k) < 1e-3
        kb = b * k[~small]
        out[~small] = (12.0 / (b**3 * k[~small])) * np.sin(kb / 2.0) * (1.0 - np.sin(kb) / kb)
        ks = k[small]
        out[small] = ks * ks * (1.0 - 11.0 * (b * ks) ** 2 / 120.0)
        return out if out.shape else complex(out)
    return E


def example_ex62_first(b):
    b = float(b)
    prof = example_ex61(2.0, 1.0 / b, b)
    cf = prof.closed_form
    cf2 = ClosedForm(a=cf.a, gamma=cf.gamma, d=1, D=cf.D, E=_ex62_E(b), f0=cf.f0,
                     label=f"ex62_first(b={b!r})")
    return RadialProfile(prof.b, prof.segments, prof.breakpoints, cf2, cf2.label)


def example_ex62_second(b):
    b = float(b)
    prof = example_ex61(0.5, -1.0 / b, b)
    cf = prof.closed_form
    cf2 = ClosedForm(a=cf.a, gamma=cf.gamma, d=1, D=cf.D, E=_ex62_E(b), f0=cf.f0,
                     label=f"ex62_second(b={b!r})")
    return RadialProfile(prof.b, prof.segments, prof.breakpoints, cf2, cf2.label)


def example_ex63(b, c):
    b, c = float(b), float(c)
    if c == 0.0 or (c < 0.0 and b <= -c):
        raise BadParams("ex63 requires c > 0, or c < 0 with b > -c")
    a = (b + c) * math.log1p(b / c)
    r = b / c
    gamma = c**3 * (-(2.0 / 3.0) * r**3 - 3.0 * r**2 - 2.0 * r
                    + 2.0 * (1.0 + r) ** 2 * math.log1p(r))

    L = math.log1p(b / c)

    def _phi_pair(k):
        # regular solution at x = b and its x-derivative, entire in k^2
        k = np.asarray(k, dtype=complex)
        delta = 0.5 * np.sqrt(1.0 - 4.0 * (b + c) ** 2 * k * k + 0j)
        s = np.sqrt(c * (b + c)) * L * _sinhc(delta * L)
        phi = s
        dphi = np.sqrt(c / (b + c)) * (0.5 * L * _sinhc(delta * L) + np.cosh(delta * L))
        return phi, dphi

    def D(k):
        k = np.asarray(k, dtype=complex)
        phi, dphi = _phi_pair(k)
        out = np.empty_like(k)
        small = np.abs(k) < 1e-9
        kk = k[~small]
        out[~small] = np.sin(b * kk) / kk * dphi[~small] - np.cos(b * kk) * phi[~small]
        out[small] = b * dphi[small] - phi[small]
        return out if out.shape else complex(out)

    def E(k):
        return D(k) / gamma

    cf = ClosedForm(a=a, gamma=gamma, d=1, D=D, E=E, f0=None,
                    label=f"ex63(b={b!r}, c={c!r})")
    seg = power_segment(0.0, b, (b + c) ** 2, c, -2.0)
    return make_piecewise_profile(b, [seg], cf, cf.label)


def identity_profile(b=1.0):
    return make_piecewise_profile(b, [constant_segment(0.0, b, 1.0)], None, "identity")


def smooth_dip_profile(b=1.0, depth=0.3):
    """Class-A profile rho = 1 - depth*sin^2(pi x / b); travel time a < b."""
    b, depth = float(b), float(depth)
    if not 0.0 < depth < 1.0:
        raise BadParams("dip depth must be in (0, 1)")
    w = math.pi / b

    def rho(x):
        return 1.0 - depth * np.sin(w * np.asarray(x, dtype=float)) ** 2

    def drho(x):
        return -depth * w * np.sin(2.0 * w * np.asarray(x, dtype=float))

    def d2rho(x):
        return -2.0 * depth * w * w * np.cos(2.0 * w * np.asarray(x, dtype=float))

    seg = custom_segment(0.0, b, rho, drho, d2rho, {"depth": depth})
    return make_piecewise_profile(b, [seg], None, f"dip(b={b!r}, depth={depth!r})")


def balanced_profile(b=1.0, amp=0.3):
    """Class-A profile with travel time exactly b (a = b regime).

    sqrt(rho) = 1 + amp*g with g = sin(2 pi x/b) sin^2(pi x/b); the integral
    of g over [0, b] vanishes, so the fast and slow regions compensate.
    """
    b, amp = float(b), float(amp)
    if not 0.0 < abs(amp) < 1.0:
        raise BadParams("balanced amplitude must be in (0, 1)")
    w = math.pi / b

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.sin(2.0 * w * x) * np.sin(w * x) ** 2

    def gp(x):
        x = np.asarray(x, dtype=float)
        return 2.0 * w * np.sin(w * x) * np.sin(3.0 * w * x)

    def gpp(x):
        x = np.asarray(x, dtype=float)
        return 2.0 * w * w * (np.cos(w * x) * np.sin(3.0 * w * x)
                              + 3.0 * np.sin(w * x) * np.cos(3.0 * w * x))

    def rho(x):
        return (1.0 + amp * g(x)) ** 2

    def drho(x):
        return 2.0 * (1.0 + amp * g(x)) * amp * gp(x)

    def d2rho(x):
        return 2.0 * (amp * gp(x)) ** 2 + 2.0 * (1.0 + amp * g(x)) * amp * gpp(x)

    seg = custom_segment(0.0, b, rho, drho, d2rho, {"amp": amp})
    return make_piecewise_profile(b, [seg], None, f"balanced(b={b!r}, amp={amp!r})")


_EXAMPLES = {
    "ex61": lambda **kw: example_ex61(kw["epsilon"], kw["c"], kw["b"]),
    "ex62_first": lambda **kw: example_ex62_first(kw["b"]),
    "ex62_second": lambda **kw: example_ex62_second(kw["b"]),
    "ex63": lambda **kw: example_ex63(kw["b"], kw["c"]),
    "identity": lambda **kw: identity_profile(kw.get("b", 1.0)),
    "dip": lambda **kw: smooth_dip_profile(kw.get("b", 1.0), kw.get("depth", 0.3)),
    "balanced": lambda **kw: balanced_profile(kw.get("b", 1.0), kw.get("amp", 0.3)),
}


def example_profile(name, **params) -> RadialProfile:
    try:
        builder = _EXAMPLES[name]
    except KeyError:
        raise BadParams(f"unknown example profile {name!r}; "
                        f"choose from {sorted(_EXAMPLES)}") from None
    try:
        return builder(**params)
    except KeyError as exc:
        raise BadParams(f"example {name!r} missing parameter {exc}") from None


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialClosedForm:
    a: float
    gamma: float
    d: int
    D: Callable[[np.ndarray], np.ndarray]
    f0: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = ""


@dataclass(frozen=True)
class Potential:
    """Compactly supported potential on [0, a]; point parts are delta terms."""

    a: float
    smooth: Callable[[np.ndarray], np.ndarray]
    point_parts: tuple[tuple[float, float], ...] = ()
    closed_form: Optional[PotentialClosedForm] = None
    label: str = ""
    smooth_breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        for y0, _ in self.point_parts:
            if not 0.0 < y0 <= self.a + 1e-12:
                raise BadParams(f"point part location {y0!r} outside (0, a]")

    def V(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape, dtype=float)
        inside = y < self.a
        if np.any(inside):
            out[inside] = self.smooth(y[inside])
        return out if out.shape else float(out)

    def interior_points(self, lo, hi):
        """Breakpoints and delta locations strictly inside (lo, hi)."""
        pts = set(self.smooth_breakpoints) | {y0 for y0, _ in self.point_parts}
        return sorted(t for t in pts if lo < t < hi)


def zero_potential(a=1.0):
    return Potential(float(a), _vectorize_const(0.0), (), None, "zero")


def delta_potential(c, a):
    """V(y) = c * delta(y - a); Jost and dispersion in closed form."""
    c, a = float(c), float(a)
    if a <= 0.0 or c == 0.0:
        raise BadParams("delta potential needs a > 0 and c != 0")

    def f0(k):
        k = np.asarray(k, dtype=complex)
        out = np.empty_like(k)
        small = np.abs(k) < 1e-8
        kk = k[~small]
        out[~small] = (1.0 - c / (2j * kk)) + (c / (2j * kk)) * np.exp(2j * kk * a)
        ks = k[small]
        out[small] = 1.0 + c * a + 1j * ks * c * a * a  # series of (5.19) at y=0
        return out if out.shape else complex(out)

    def D(k):
        k = np.asarray(k, dtype=complex)
        out = np.empty_like(k)
        small = np.abs(k * a) < 1e-4
        kk = k[~small]
        out[~small] = c * np.sin(kk * a) ** 2 / (kk * kk)
        ks = k[small]
        out[small] = c * a * a * (1.0 - (ks * a) ** 2 / 3.0)
        return out if out.shape else complex(out)

    cf = PotentialClosedForm(a=a, gamma=c * a * a, d=1, D=D, f0=f0,
                             label=f"delta(c={c!r}, a={a!r})")
    return Potential(a, _vectorize_const(0.0), ((a, c),), cf, cf.label)


def square_well_potential(depth, a):
    """Constant V = depth on [0, a] (depth < 0 gives an attractive well)."""
    depth, a = float(depth), float(a)

    def f0(k):
        k = np.asarray(k, dtype=complex)
        kappa = np.sqrt(k * k - depth + 0j)
        # cos and sinc-type combinations are even in kappa: branch-safe
        t = kappa * a
        sinq = np.where(np.abs(t) < 1e-8, a * (1.0 - t * t / 6.0), np.sin(t) / np.where(t == 0, 1, kappa))
        return np.exp(1j * k * a) * (np.cos(t) - 1j * k * sinq)

    return Potential(a, _vectorize_const(depth), (), None,
                     f"square_well(depth={depth!r}, a={a!r})")


def table_potential(a, y_knots, v_values, point_parts=()):
    yk = np.asarray(y_knots, dtype=float)
    vk = np.asarray(v_values, dtype=float)
    interp = PchipInterpolator(yk, vk, extrapolate=True)
    return Potential(float(a), lambda y: interp(np.asarray(y, dtype=float)),
                     tuple(point_parts), None, "table",
                     smooth_breakpoints=())
