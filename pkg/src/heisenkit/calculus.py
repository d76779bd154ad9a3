"""Discretised function calculus: box grids on R^{2n+1}, quadrature, stencils.

Functions live on a uniform tensor grid over [-R_xi, R_xi]^{2n} x [-R_tau,
R_tau] in row-major axis order (xi'_1 .. xibar_n, tau).  Integration is the
trapezoidal rule throughout; the three supported measures are Haar (Lebesgue),
the semi-Gaussian measure gamma e^{-|xi|^2/2} dxi dtau, and Kaplan-norm power
weights |x|^{-alpha}.

Derivative stencils are central differences of order 2 or 4 (default 4) with
one-sided second-order closures at the box faces; each stencil comes with its
exact discrete transpose so that quadratic-form gradients can be assembled
without finite-difference self-tests drifting.
"""

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .constants import ParameterError
from .group import STD, Convention

__all__ = [
    "GridSpec",
    "GridFunction",
    "Measure",
    "HAAR",
    "sample",
    "integrate",
    "lp_norm",
    "entropy_term",
    "diff_axis",
    "diff_axis_transpose",
    "horizontal_gradient",
    "dirichlet_form",
    "sublaplacian",
    "sublaplacian_quadratic_form",
    "save_binary",
    "load_binary",
    "slice_to_csv",
]

MAX_TOTAL_POINTS = 1 << 27  # documented addressability limit (~134M nodes)

_ENTROPY_FLOOR = 1e-300  # below this |u| the t log t contribution is taken as 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform box grid over R^{2n+1} with per-axis point counts."""

    n: int
    half_width_xi: float
    half_width_tau: float
    points_per_axis_xi: int
    points_per_axis_tau: int

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"group index must be >= 1, got {self.n}")
        if self.points_per_axis_xi < 8 or self.points_per_axis_tau < 8:
            raise ParameterError("point counts must be >= 8 per axis")
        if self.half_width_xi <= 0 or self.half_width_tau <= 0:
            raise ParameterError("box half-widths must be positive")
        if self.total_points > MAX_TOTAL_POINTS:
            raise ParameterError(
                f"grid of {self.total_points} nodes exceeds the {MAX_TOTAL_POINTS} node limit")

    @property
    def shape(self):
        return (self.points_per_axis_xi,) * (2 * self.n) + (self.points_per_axis_tau,)

    @property
    def total_points(self):
        return self.points_per_axis_xi ** (2 * self.n) * self.points_per_axis_tau

    @property
    def spacing_xi(self):
        return 2.0 * self.half_width_xi / (self.points_per_axis_xi - 1)

    @property
    def spacing_tau(self):
        return 2.0 * self.half_width_tau / (self.points_per_axis_tau - 1)

    def axis_spacing(self, axis):
        return self.spacing_tau if axis == 2 * self.n else self.spacing_xi

    def axis_points(self, axis):
        """1-D coordinate array of the given axis (0..2n-1 are xi, 2n is tau)."""
        if axis == 2 * self.n:
            return np.linspace(-self.half_width_tau, self.half_width_tau, self.points_per_axis_tau)
        return np.linspace(-self.half_width_xi, self.half_width_xi, self.points_per_axis_xi)

    def axis_broadcast(self, axis):
        """Axis coordinates reshaped to broadcast against the full grid."""
        pts = self.axis_points(axis)
        shape = [1] * (2 * self.n + 1)
        shape[axis] = pts.size
        return pts.reshape(shape)

    def open_coords(self):
        """Open-meshgrid coordinate arrays (xi'_1, .., xibar_n, tau)."""
        return tuple(self.axis_broadcast(ax) for ax in range(2 * self.n + 1))

    def xi_squared(self):
        """|xi|^2 on the grid (broadcast array without the tau axis extent)."""
        acc = 0.0
        for ax in range(2 * self.n):
            acc = acc + self.axis_broadcast(ax) ** 2
        return acc

    def trapezoid_weights_1d(self, axis):
        h = self.axis_spacing(axis)
        m = self.shape[axis]
        w = np.full(m, h)
        w[0] = w[-1] = 0.5 * h
        return w

    def quadrature_weights(self):
        """Full tensor-product trapezoid weight array (real, grid shaped)."""
        w = np.ones((1,) * (2 * self.n + 1))
        for ax in range(2 * self.n + 1):
            w = w * self.trapezoid_weights_1d(ax).reshape(
                tuple(self.shape[ax] if k == ax else 1 for k in range(2 * self.n + 1)))
        return w

    def kaplan_norm_array(self, convention=STD):
        xi_sq = self.xi_squared()
        tau = self.axis_broadcast(2 * self.n)
        return np.power(xi_sq * xi_sq + convention.tau_weight * tau * tau, 0.25)


@dataclass
class GridFunction:
    """Complex samples of a function on a GridSpec, plus free-form metadata."""

    spec: GridSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.spec.shape:
            raise ParameterError(f"values shape {vals.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("grid function contains non-finite values")
        self.values = vals

    def copy_with(self, values, **meta):
        merged = dict(self.meta)
        merged.update(meta)
        return GridFunction(self.spec, values, merged)


def sample(spec, fn):
    """Build a GridFunction by evaluating fn(*open_coords) vectorised."""
    vals = np.broadcast_to(fn(*spec.open_coords()), spec.shape).astype(np.complex128)
    return GridFunction(spec, vals.copy())


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Measure:
    """Haar, semi-Gaussian, or Kaplan-weight measure on the box."""

    kind: str
    gamma: float = 1.0
    alpha: float = 0.0
    convention: Convention = STD

    @staticmethod
    def haar():
        return Measure("haar")

    @staticmethod
    def semi_gaussian(gamma):
        if not gamma > 0:
            raise ParameterError(f"gamma must be positive, got {gamma}")
        return Measure("semi_gaussian", gamma=float(gamma))

    @staticmethod
    def kaplan_weight(alpha, convention=STD):
        if alpha < 0:
            raise ParameterError(f"weight exponent must be >= 0, got {alpha}")
        return Measure("kaplan_weight", alpha=float(alpha), convention=convention)

    def density(self, spec):
        """Pointwise density of the measure against Lebesgue on the grid."""
        if self.kind == "haar":
            return np.ones((1,) * (2 * spec.n + 1))
        if self.kind == "semi_gaussian":
            return self.gamma * np.exp(-0.5 * spec.xi_squared()) * np.ones((1,) * (2 * spec.n + 1))
        if self.kind == "kaplan_weight":
            if self.alpha >= 2 * spec.n + 2:
                raise ParameterError(
                    f"|x|^(-{self.alpha}) is not integrable at the origin (alpha >= Q)")
            norm = spec.kaplan_norm_array(self.convention)
            with np.errstate(divide="ignore"):
                w = np.power(norm, -self.alpha)
            return _patch_singular_cells(w, spec, self.alpha, self.convention)
        raise ParameterError(f"unknown measure kind {self.kind!r}")


HAAR = Measure.haar()


def _patch_singular_cells(w, spec, alpha, convention):
    """Replace any on-grid |x| = 0 node by a 5-point cell-averaged weight."""
    sing = ~np.isfinite(w)
    if not sing.any():
        return w
    w = np.array(np.broadcast_to(w, spec.shape), dtype=float)
    hx, ht = 0.25 * spec.spacing_xi, 0.25 * spec.spacing_tau
    # quarter-cell probes: 4 diagonal offsets in the (xi'_1, xibar_1) plane, 1 in tau
    offsets = [(hx, hx, 0.0), (hx, -hx, 0.0), (-hx, hx, 0.0), (-hx, -hx, 0.0), (0.0, 0.0, ht)]
    for idx in zip(*np.nonzero(np.broadcast_to(sing, spec.shape))):
        x0 = np.array([spec.axis_points(ax)[idx[ax]] for ax in range(2 * spec.n + 1)])
        acc = 0.0
        for d1, d2, dt in offsets:
            xi = x0[: 2 * spec.n].copy()
            xi[0] += d1
            xi[spec.n] += d2
            xi_sq = float(np.dot(xi, xi))
            tau = x0[2 * spec.n] + dt
            acc += (xi_sq * xi_sq + convention.tau_weight * tau * tau) ** (-0.25 * alpha)
        w[idx] = acc / len(offsets)
    return w


def integrate(f, m=HAAR):
    """Trapezoidal quadrature of Re(f) against the measure m over the box."""
    w = f.spec.quadrature_weights() * m.density(f.spec)
    return float(np.sum(f.values.real * w))


def _weighted_sum(spec, array, m=HAAR):
    w = spec.quadrature_weights() * m.density(spec)
    return float(np.sum(array * w))


def lp_norm(f, p, m=HAAR):
    """(integral of |f|^p dm)^(1/p) for p >= 1."""
    if p < 1:
        raise ParameterError(f"lp_norm requires p >= 1, got {p}")
    return _weighted_sum(f.spec, np.abs(f.values) ** p, m) ** (1.0 / p)


def entropy_term(u, m=HAAR):
    """Integral of (|u|^2/||u||^2) log(|u|^2/||u||^2) dm with t log t clamped at 0."""
    dens = np.abs(u.values) ** 2
    total = _weighted_sum(u.spec, dens, m)
    if total <= 0.0:
        raise ParameterError("entropy_term of the zero function is undefined")
    rho = dens / total
    # t log t -> 0: nodes where |u|^2 underflows (|u| below ~1e-300) contribute 0
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(rho > 0.0, rho * np.log(np.where(rho > 0.0, rho, 1.0)), 0.0)
    return _weighted_sum(u.spec, integrand, m)


# ---------------------------------------------------------------------------
# difference stencils and their exact transposes
# ---------------------------------------------------------------------------

def _diff_front(a, h, order):
    out = np.empty_like(a)
    c = 1.0 / (2.0 * h)
    out[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) * c
    out[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) * c
    if order == 2:
        out[1:-1] = (a[2:] - a[:-2]) * c
    elif order == 4:
        d = 1.0 / (12.0 * h)
        out[1] = (a[2] - a[0]) * c
        out[-2] = (a[-1] - a[-3]) * c
        out[2:-2] = (a[:-4] - 8.0 * a[1:-3] + 8.0 * a[3:-1] - a[4:]) * d
    else:
        raise ParameterError(f"stencil order must be 2 or 4, got {order}")
    return out


def _diff_front_transpose(g, h, order):
    out = np.zeros_like(g)
    c = 1.0 / (2.0 * h)
    # boundary rows (shared by both orders)
    out[0] += -3.0 * c * g[0]
    out[1] += 4.0 * c * g[0]
    out[2] += -c * g[0]
    out[-3] += c * g[-1]
    out[-2] += -4.0 * c * g[-1]
    out[-1] += 3.0 * c * g[-1]
    if order == 2:
        out[:-2] += -c * g[1:-1]
        out[2:] += c * g[1:-1]
    elif order == 4:
        out[0] += -c * g[1]
        out[2] += c * g[1]
        out[-3] += -c * g[-2]
        out[-1] += c * g[-2]
        d = 1.0 / (12.0 * h)
        mid = g[2:-2]
        out[:-4] += d * mid
        out[1:-3] += -8.0 * d * mid
        out[3:-1] += 8.0 * d * mid
        out[4:] += -d * mid
    else:
        raise ParameterError(f"stencil order must be 2 or 4, got {order}")
    return out


def diff_axis(values, spec, axis, order=4):
    """Partial derivative along one grid axis."""
    a = np.moveaxis(values, axis, 0)
    return np.moveaxis(_diff_front(a, spec.axis_spacing(axis), order), 0, axis)


def diff_axis_transpose(values, spec, axis, order=4):
    """Exact transpose of diff_axis with respect to the plain dot product."""
    a = np.moveaxis(values, axis, 0)
    return np.moveaxis(_diff_front_transpose(a, spec.axis_spacing(axis), order), 0, axis)


# ---------------------------------------------------------------------------
# horizontal calculus
# ---------------------------------------------------------------------------

def _field_components(f, c, order):
    """Arrays (X_1 f, .., X_n f, Y_1 f, .., Y_n f) on the grid."""
    spec = f.spec
    n = spec.n
    tau_ax = 2 * n
    d_tau = diff_axis(f.values, spec, tau_ax, order)
    comps = []
    for i in range(n):
        xb = spec.axis_broadcast(n + i)
        comps.append(diff_axis(f.values, spec, i, order) + c.kappa * xb * d_tau)
    for i in range(n):
        xr = spec.axis_broadcast(i)
        comps.append(diff_axis(f.values, spec, n + i, order) - c.kappa * xr * d_tau)
    return comps


def horizontal_gradient(f, c=STD, order=4):
    """The 2n first-stratum derivatives of f as GridFunctions."""
    return [f.copy_with(v) for v in _field_components(f, c, order)]


def dirichlet_form(f, c=STD, order=4, m=HAAR):
    """Horizontal energy: sum_i integral (|X_i f|^2 + |Y_i f|^2) dm."""
    acc = 0.0
    for comp in _field_components(f, c, order):
        acc += _weighted_sum(f.spec, np.abs(comp) ** 2, m)
    return acc


def sublaplacian(f, c=STD, order=4):
    """Positive sub-Laplacian by composed stencils; FL carries the 1/4 factor.

    One-sided closures act in the outermost two grid layers; that depth is
    recorded in the result metadata.
    """
    spec = f.spec
    n = spec.n
    tau_ax = 2 * n
    comps = _field_components(f, c, order)
    acc = np.zeros(spec.shape, dtype=np.complex128)
    for i in range(n):
        xb = spec.axis_broadcast(n + i)
        xr = spec.axis_broadcast(i)
        g = comps[i]
        acc += diff_axis(g, spec, i, order) + c.kappa * xb * diff_axis(g, spec, tau_ax, order)
        h = comps[n + i]
        acc += diff_axis(h, spec, n + i, order) - c.kappa * xr * diff_axis(h, spec, tau_ax, order)
    scale = 0.25 if c.tag == "FL" else 1.0
    return f.copy_with(-scale * acc, boundary_layers=2 if order == 4 else 1)


def sublaplacian_quadratic_form(f, c=STD, order=4):
    """<L f, f> for the convention's sub-Laplacian (1/4-scaled horizontal energy for FL)."""
    scale = 0.25 if c.tag == "FL" else 1.0
    return scale * dirichlet_form(f, c, order)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_TAG_GRID = 0x4847_0001       # grid-function container
_TAG_SPECTRAL = 0x4847_0002   # spectral-coefficient container (written by spectral.py)

_HEADER = struct.Struct("<qqqqdd")


def save_binary(f, path):
    """Write a GridFunction to the flat little-endian binary container."""
    spec = f.spec
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_TAG_GRID, spec.n, spec.points_per_axis_xi,
                              spec.points_per_axis_tau, spec.half_width_xi, spec.half_width_tau))
        fh.write(np.ascontiguousarray(f.values, dtype="<c16").tobytes())


def load_binary(path):
    """Read a GridFunction written by save_binary."""
    with open(path, "rb") as fh:
        tag, n, pxi, ptau, rxi, rtau = _HEADER.unpack(fh.read(_HEADER.size))
        if tag != _TAG_GRID:
            raise ParameterError(f"not a grid-function container (tag {tag:#x})")
        spec = GridSpec(int(n), rxi, rtau, int(pxi), int(ptau))
        raw = np.frombuffer(fh.read(), dtype="<c16")
    return GridFunction(spec, raw.reshape(spec.shape).astype(np.complex128))


def slice_to_csv(f, path, fixed):
    """CSV export of a 1-D or 2-D slice; ``fixed`` maps axis index -> node index."""
    free = [ax for ax in range(2 * f.spec.n + 1) if ax not in fixed]
    if len(free) not in (1, 2):
        raise ParameterError("slice export supports exactly 1 or 2 free axes")
    indexer = tuple(fixed.get(ax, slice(None)) for ax in range(2 * f.spec.n + 1))
    block = f.values[indexer]
    with open(path, "w") as fh:
        if len(free) == 1:
            fh.write("coord,re,im\n")
            for x, v in zip(f.spec.axis_points(free[0]), block):
                fh.write(f"{x:.17g},{v.real:.17g},{v.imag:.17g}\n")
        else:
            fh.write("coord1,coord2,re,im\n")
            p1, p2 = f.spec.axis_points(free[0]), f.spec.axis_points(free[1])
            for i, x1 in enumerate(p1):
                for j, x2 in enumerate(p2):
                    v = block[i, j]
                    fh.write(f"{x1:.17g},{x2:.17g},{v.real:.17g},{v.imag:.17g}\n")
