"""Dispersion functions, their zeros with multiplicities, and the
eigenvalue-product representation.

The dispersion function of a profile is

    D(k) = sin(kb)/k * phi'(b; k) - cos(kb) * phi(b; k),

even in k and entire in k^2; its zeros (with multiplicities) are the
special transmission eigenvalues.  D factors as gamma * E with
E(k) = k^{2d} prod (1 - k^2/k_n^2).  Zeros are located by the argument
principle: recursive subdivision of a rectangle with winding counts per
cell, zero-centroid moments, then multiplicity-aware Newton polishing
certified by a small-circle winding count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import BadParams, ContourThroughZero, NonIntegerWinding
from .ode import DEFAULT_CONFIG, solve_jost_schrodinger_batch, solve_jost_wave_batch, \
    solve_regular_batch, solve_regular_schrodinger_batch
from .profiles import Potential, RadialProfile

_SYMMETRY_TOL = 1e-10


# ---------------------------------------------------------------------------
# sampled spectral functions
# ---------------------------------------------------------------------------

@dataclass
class SpectralSamples:
    """A complex-valued function sampled on a symmetric real k grid."""

    k_grid: np.ndarray
    values: np.ndarray
    symmetry: str = "none"     # even_in_k | conjugate_symmetric | none

    def __post_init__(self):
        self.k_grid = np.asarray(self.k_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.k_grid.ndim != 1 or self.k_grid.shape != self.values.shape:
            raise BadParams("grid and values must be matching 1-d arrays")
        if np.any(np.diff(self.k_grid) <= 0):
            raise BadParams("k grid must be strictly increasing")

    def check(self):
        k = self.k_grid
        if np.max(np.abs(k + k[::-1])) > 1e-12 * max(1.0, k[-1]):
            raise BadParams("k grid is not symmetric about 0")
        scale = max(1.0, float(np.max(np.abs(self.values))))
        if self.symmetry == "even_in_k":
            resid = np.max(np.abs(self.values - self.values[::-1]))
        elif self.symmetry == "conjugate_symmetric":
            resid = np.max(np.abs(self.values - np.conj(self.values[::-1])))
        else:
            resid = 0.0
        if resid > _SYMMETRY_TOL * scale:
            raise BadParams(f"symmetry {self.symmetry!r} violated: residual {resid!r}")
        return self

    @classmethod
    def from_function(cls, fn, k_grid, symmetry="none"):
        k_grid = np.asarray(k_grid, dtype=float)
        return cls(k_grid, np.asarray(fn(k_grid), dtype=complex), symmetry)

    def value_at(self, k):
        return complex(np.interp(float(k), self.k_grid, self.values.real)
                       + 1j * np.interp(float(k), self.k_grid, self.values.imag))


def symmetric_grid(k_max, n_half):
    """2*n_half + 1 uniform points on [-k_max, k_max], including 0."""
    pos = np.linspace(0.0, float(k_max), int(n_half) + 1)
    return np.concatenate([-pos[:0:-1], pos])


# ---------------------------------------------------------------------------
# dispersion functions
# ---------------------------------------------------------------------------

def _assemble_D(edge, k, u, up):
    """sin(k*edge)/k * u' - cos(k*edge) * u with the k = 0 limit."""
    k = np.asarray(k, dtype=complex)
    out = np.empty_like(k)
    small = np.abs(k) * edge < 1e-12
    kk = k[~small]
    out[~small] = np.sin(kk * edge) / kk * up[~small] - np.cos(kk * edge) * u[~small]
    out[small] = edge * up[small] - u[small]
    return out


def dispersion_D_batch(p: RadialProfile, k, config=DEFAULT_CONFIG):
    ks = np.atleast_1d(np.asarray(k, dtype=complex))
    u, up = solve_regular_batch(p, ks, p.b, config)
    return _assemble_D(p.b, ks, u, up)


def dispersion_D(p: RadialProfile, k, config=DEFAULT_CONFIG, cross_check=False,
                 check_tol=1e-9):
    """D(k) via the regular solution at x = b.

    With cross_check=True the independent Jost route
    (f(0;k) - f(0;-k)) / (2ik) is evaluated as well and the two values are
    required to agree to check_tol (skipped at k = 0 where the quotient
    degenerates; D(0) = 0 for every profile).
    """
    val = dispersion_D_batch(p, [k], config)[0]
    if cross_check and abs(k) > 1e-8:
        alt = dispersion_D_jost(p, k, config)
        if abs(val - alt) > check_tol * (1.0 + abs(val)):
            raise ContourThroughZero(
                f"dispersion routes disagree at k = {k!r}: {val!r} vs {alt!r}")
    return complex(val)


def dispersion_D_jost(p: RadialProfile, k, config=DEFAULT_CONFIG):
    """D(k) from the Jost route (f(0;k) - f(0;-k)) / (2ik); k != 0."""
    ks = np.atleast_1d(np.asarray(k, dtype=complex))
    if np.any(np.abs(ks) < 1e-12):
        raise BadParams("Jost route for D needs k != 0")
    full = np.concatenate([ks, -ks])
    f, _ = solve_jost_wave_batch(p, full, 0.0, config)
    n = ks.size
    out = (f[:n] - f[n:]) / (2j * ks)
    return complex(out[0]) if np.isscalar(k) or np.asarray(k).ndim == 0 else out


def dispersion_D_schrodinger_batch(V: Potential, k, config=DEFAULT_CONFIG):
    ks = np.atleast_1d(np.asarray(k, dtype=complex))
    u, up = solve_regular_schrodinger_batch(V, ks, V.a, config)
    return _assemble_D(V.a, ks, u, up)


def dispersion_D_schrodinger(V: Potential, k, config=DEFAULT_CONFIG,
                             cross_check=False, check_tol=1e-9):
    val = dispersion_D_schrodinger_batch(V, [k], config)[0]
    if cross_check and abs(k) > 1e-8:
        ks = np.asarray([k, -k], dtype=complex)
        f, _ = solve_jost_schrodinger_batch(V, ks, 0.0, config)
        alt = (f[0] - f[1]) / (2j * complex(k))
        if abs(val - alt) > check_tol * (1.0 + abs(val)):
            raise ContourThroughZero(
                f"dispersion routes disagree at k = {k!r}: {val!r} vs {alt!r}")
    return complex(val)


def sample_dispersion(p: RadialProfile, k_max, n_half, config=DEFAULT_CONFIG):
    """D on a symmetric grid, computed on the nonnegative half and mirrored."""
    pos = np.linspace(0.0, float(k_max), int(n_half) + 1)
    vals = dispersion_D_batch(p, pos.astype(complex), config)
    grid = np.concatenate([-pos[:0:-1], pos])
    full = np.concatenate([vals[:0:-1], vals])
    return SpectralSamples(grid, full, "even_in_k").check()


def sample_dispersion_schrodinger(V: Potential, k_max, n_half, config=DEFAULT_CONFIG):
    pos = np.linspace(0.0, float(k_max), int(n_half) + 1)
    vals = dispersion_D_schrodinger_batch(V, pos.astype(complex), config)
    grid = np.concatenate([-pos[:0:-1], pos])
    full = np.concatenate([vals[:0:-1], vals])
    return SpectralSamples(grid, full, "even_in_k").check()


# ---------------------------------------------------------------------------
# eigenvalue search (argument principle)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchWindow:
    k_max: float
    im_band: float
    re_lo: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.re_lo < self.k_max and self.im_band > 0.0):
            raise BadParams("window requires 0 < re_lo < k_max and im_band > 0")


@dataclass
class EigenvalueSet:
    """Zero data of a dispersion function.

    zeros holds representatives with Re k > 0 (the full zero set of D in k
    is closed under k -> -k); complex zeros appear together with their
    conjugates.  The product representation runs over these representatives.
    """

    d: int
    zeros: list                      # [(k_n: complex, multiplicity: int)]
    gamma: float
    window: SearchWindow

    def sorted_zeros(self):
        return sorted(self.zeros, key=lambda zm: (abs(zm[0]), zm[0].imag))

    def real_zeros(self):
        return sorted(z.real for z, m in self.zeros if abs(z.imag) < 1e-8)

    def check_symmetry(self, atol=1e-6):
        complex_zeros = [(z, m) for z, m in self.zeros if abs(z.imag) >= 1e-8]
        for z, m in complex_zeros:
            partner = [m2 for z2, m2 in complex_zeros
                       if abs(z2 - np.conj(z)) < atol]
            if not partner or partner[0] != m:
                raise BadParams(f"zero {z!r} lacks a conjugate partner")
        return self


class _Cell(NamedTuple):
    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    @property
    def diameter(self):
        return float(np.hypot(self.re_hi - self.re_lo, self.im_hi - self.im_lo))

    @property
    def center(self):
        return complex(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))


def _rectangle_nodes(cell: _Cell, n_per_edge):
    corners = [complex(cell.re_lo, cell.im_lo), complex(cell.re_hi, cell.im_lo),
               complex(cell.re_hi, cell.im_hi), complex(cell.re_lo, cell.im_hi)]
    pts = []
    for c0, c1 in zip(corners, corners[1:] + corners[:1]):
        s = np.linspace(0.0, 1.0, n_per_edge, endpoint=False)
        pts.append(c0 + (c1 - c0) * s)
    return np.concatenate(pts)


def _winding(D, cell: _Cell, n_start=64, n_max=8192, tol=1e-3):
    """Winding number of D around a rectangle via phase increments,
    with node doubling until two consecutive estimates agree."""
    prev = None
    n = n_start
    while n <= n_max:
        pts = _rectangle_nodes(cell, n)
        vals = np.asarray(D(pts), dtype=complex)
        amax = float(np.max(np.abs(vals)))
        if amax == 0.0 or float(np.min(np.abs(vals))) < 1e-13 * amax:
            raise ContourThroughZero(f"D vanishes on the contour of {cell!r}")
        ratios = np.roll(vals, -1) / vals
        w = float(np.sum(np.angle(ratios))) / (2.0 * np.pi)
        w_int = int(round(w))
        if abs(w - w_int) > tol:
            raise NonIntegerWinding(f"winding estimate {w!r} is not an integer")
        if prev == w_int:
            return w_int
        prev = w_int
        n *= 2
    raise NonIntegerWinding("winding count failed to stabilize under node doubling")


def _fd_derivative(D, z, h=None):
    h = h or 1e-5 * (1.0 + abs(z))
    stencil = np.array([z - 2 * h, z - h, z + h, z + 2 * h])
    v = np.asarray(D(stencil), dtype=complex)
    return (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h)


def _zero_centroid(D, D_prime, cell: _Cell, mult, n_per_edge=512):
    """(1/2 pi i m) contour integral of z D'/D: mean position of the zeros."""
    pts = _rectangle_nodes(cell, n_per_edge)
    closed = np.concatenate([pts, pts[:1]])
    vals = np.asarray(D(closed), dtype=complex)
    if D_prime is not None:
        dvals = np.asarray(D_prime(closed), dtype=complex)
    else:
        hstep = 1e-6 * (1.0 + np.abs(closed))
        vp = np.asarray(D(closed + hstep), dtype=complex)
        vm = np.asarray(D(closed - hstep), dtype=complex)
        dvals = (vp - vm) / (2.0 * hstep)
    integ = closed * dvals / vals
    dz = np.diff(closed)
    midvals = 0.5 * (integ[1:] + integ[:-1])
    total = np.sum(midvals * dz) / (2j * np.pi * mult)
    return complex(total)


def _newton_polish(D, D_prime, z0, mult, tol=1e-11, max_iter=60):
    z = complex(z0)
    for _ in range(max_iter):
        dv = D_prime(np.array([z]))[0] if D_prime is not None else _fd_derivative(D, z)
        fv = np.asarray(D(np.array([z])), dtype=complex)[0]
        if dv == 0:
            break
        step = mult * fv / dv
        z -= step
        if abs(step) < tol * (1.0 + abs(z)):
            break
    return z


def find_eigenvalues(D: Callable, window: SearchWindow, D_prime=None,
                     min_cell=1e-3, split_ratio=0.51329) -> EigenvalueSet:
    """All zeros of D (with multiplicities) in the window.

    D must be vectorized over complex arrays and analytic on the window.
    The search covers [re_lo, k_max] x [-im_band, im_band]; evenness of D
    supplies Re k < 0 and the zero at the origin is handled separately by
    extract_gamma_d.  Split lines are placed off-center so subdivision never
    passes through real-axis zeros.
    """
    root_cell = _Cell(window.re_lo, window.k_max, -window.im_band, window.im_band)
    found = []

    def recurse(cell, budget=64):
        if budget <= 0:
            raise ContourThroughZero("subdivision budget exhausted")
        try:
            w = _winding(D, cell)
        except ContourThroughZero:
            # nudge the cell outward slightly and retry once
            eps = 1e-3 * cell.diameter
            cell2 = _Cell(cell.re_lo - eps, cell.re_hi + eps,
                          cell.im_lo - eps, cell.im_hi + eps)
            w = _winding(D, cell2)
            cell = cell2
        if w == 0:
            return
        if w <= 2 or cell.diameter < min_cell:
            center = _zero_centroid(D, D_prime, cell, w)
            z = _newton_polish(D, D_prime, center, w)
            r = max(1e-5, 1e-3 * abs(z - center)) + 1e-12
            ver = _Cell(z.real - r, z.real + r, z.imag - r, z.imag + r)
            try:
                wv = _winding(D, ver)
            except (ContourThroughZero, NonIntegerWinding):
                wv = -1
            if wv == w:
                found.append((z, w))
                return
            if cell.diameter < 1e-6:
                found.append((z, w))   # irreducible cluster at resolution limit
                return
        rm = cell.re_lo + (cell.re_hi - cell.re_lo) * split_ratio
        im = cell.im_lo + (cell.im_hi - cell.im_lo) * split_ratio
        for child in (_Cell(cell.re_lo, rm, cell.im_lo, im),
                      _Cell(rm, cell.re_hi, cell.im_lo, im),
                      _Cell(cell.re_lo, rm, im, cell.im_hi),
                      _Cell(rm, cell.re_hi, im, cell.im_hi)):
            recurse(child, budget - 1)

    recurse(root_cell)

    # snap real zeros onto the axis and merge duplicates from cell borders
    merged = []
    for z, m in sorted(found, key=lambda zm: (zm[0].real, zm[0].imag)):
        if abs(z.imag) < 1e-9 * (1.0 + abs(z.real)):
            z = complex(z.real, 0.0)
        for i, (z2, m2) in enumerate(merged):
            if abs(z - z2) < 1e-7 * (1.0 + abs(z)):
                break
        else:
            merged.append((z, m))
    es = EigenvalueSet(d=0, zeros=merged, gamma=np.nan, window=window)
    return es.check_symmetry()


# ---------------------------------------------------------------------------
# gamma and d
# ---------------------------------------------------------------------------

def _circle_winding(D, radius, center=0.0, n_start=128, n_max=16384, tol=1e-3):
    prev = None
    n = n_start
    while n <= n_max:
        th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        pts = center + radius * np.exp(1j * th)
        vals = np.asarray(D(pts), dtype=complex)
        amax = float(np.max(np.abs(vals)))
        if amax == 0.0 or float(np.min(np.abs(vals))) < 1e-13 * amax:
            raise ContourThroughZero(f"D vanishes on |k - {center!r}| = {radius!r}")
        w = float(np.sum(np.angle(np.roll(vals, -1) / vals))) / (2.0 * np.pi)
        w_int = int(round(w))
        if abs(w - w_int) > tol:
            raise NonIntegerWinding(f"winding estimate {w!r} is not an integer")
        if prev == w_int:
            return w_int
        prev = w_int
        n *= 2
    raise NonIntegerWinding("circle winding failed to stabilize")


def extract_gamma_d(D: Callable, probe_radius=0.5, imag_tol=1e-8):
    """(d, gamma) of the representation D = gamma k^{2d} prod(1 - k^2/k_n^2).

    d is half the winding number of D around |k| = probe_radius (D vanishes
    to order 2d in the variable k); gamma is the Taylor coefficient
    (1/2 pi i) contour integral of D(k)/k^{2d+1}, computed by the trapezoid
    rule on the circle with node doubling.
    """
    w = _circle_winding(D, probe_radius)
    if w % 2 != 0 or w < 0:
        raise NonIntegerWinding(f"winding {w!r} around 0 must be a nonnegative "
                                "even integer for an even dispersion function")
    d = w // 2
    prev = None
    n = 256
    while n <= 65536:
        th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        pts = probe_radius * np.exp(1j * th)
        vals = np.asarray(D(pts), dtype=complex)
        coeff = np.mean(vals / pts ** (2 * d))
        if prev is not None and abs(coeff - prev) < 1e-13 * (1.0 + abs(coeff)):
            break
        prev = coeff
        n *= 2
    gamma = complex(prev if prev is not None else coeff)
    if abs(gamma.imag) > imag_tol * (1.0 + abs(gamma.real)):
        raise NonIntegerWinding(f"gamma has a nonreal residue: {gamma!r}")
    return d, float(gamma.real)


# ---------------------------------------------------------------------------
# eigenvalue product
# ---------------------------------------------------------------------------

class EValue(NamedTuple):
    value: complex
    truncation_error: float


def evaluate_E(es: EigenvalueSet, k, truncation=None) -> EValue:
    """Truncated product E(k) = k^{2d} prod (1 - k^2/k_n^2)^{mult}.

    The error estimate extrapolates the omitted factors assuming the
    asymptotically uniform zero spacing seen in the retained tail:
    |log correction| ~ |k|^2 * sum_{n > N} 1/|k_n|^2.
    """
    zs = es.sorted_zeros()
    if truncation is not None:
        if truncation > len(zs):
            raise BadParams(f"truncation {truncation!r} exceeds available zeros")
        zs = zs[:truncation]
    k = np.asarray(k, dtype=complex)
    out = k ** (2 * es.d)
    for z, m in zs:
        out = out * (1.0 - k * k / (z * z)) ** m
    if zs:
        last = abs(zs[-1][0])
        spacing = abs(zs[-1][0]) - abs(zs[-2][0]) if len(zs) > 1 else last
        spacing = max(spacing, 1e-3 * last)
        # integral tail: sum 1/|k_n|^2 ~ 1/(spacing * last)
        tail = float(np.max(np.abs(k)) ** 2 / (spacing * last))
    else:
        tail = np.inf
    return EValue(out if out.shape else complex(out), tail)


def profile_dispersion_callable(p: RadialProfile, config=DEFAULT_CONFIG):
    """Vectorized D(k) backed by the ODE engine (for the zero search)."""
    def D(k):
        return dispersion_D_batch(p, np.asarray(k, dtype=complex), config)
    return D


def potential_dispersion_callable(V: Potential, config=DEFAULT_CONFIG):
    def D(k):
        return dispersion_D_schrodinger_batch(V, np.asarray(k, dtype=complex), config)
    return D
