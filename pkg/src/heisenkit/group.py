"""Exact Heisenberg group algebra on H^n = C^n x R.

Points are (xi, tau) with xi in R^{2n} stored as the n real parts followed by
the n imaginary parts.  Two conventions are supported: "Std" composes with the
half-strength symplectic pairing and carries the Kaplan norm
(|xi|^4 + 16 tau^2)^{1/4}; "FL" composes with the double-strength pairing and
carries (|xi|^4 + tau^2)^{1/4}.  The pairing omega(a, b) = sum(abar_i b'_i -
a'_i bbar_i) is the one that makes the listed vector fields exactly
left-invariant; the left-invariance property test in the suite pins this sign.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Convention",
    "STD",
    "FL",
    "GroupPoint",
    "identity",
    "compose",
    "inverse",
    "dilate",
    "kaplan_norm",
    "apply_field",
    "kaplan_norm_grid",
]


@dataclass(frozen=True)
class Convention:
    """Group-law flavour: pairing strength kappa and Kaplan-norm tau weight."""

    tag: str
    kappa: float       # coefficient of omega(xi, xi~) in the composed tau
    tau_weight: float  # coefficient of tau^2 inside the quartic norm

    def __post_init__(self):
        if self.tag not in ("Std", "FL"):
            raise ValueError(f"unknown convention tag {self.tag!r}")


STD = Convention("Std", kappa=0.5, tau_weight=16.0)
FL = Convention("FL", kappa=2.0, tau_weight=1.0)


@dataclass(frozen=True)
class GroupPoint:
    """A point (xi, tau) of H^n; xi holds (xi'_1..xi'_n, xibar_1..xibar_n)."""

    n: int
    xi: np.ndarray
    tau: float

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.shape != (2 * self.n,):
            raise ValueError(f"xi must have length 2n = {2 * self.n}, got shape {xi.shape}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def xi_re(self):
        return self.xi[: self.n]

    @property
    def xi_im(self):
        return self.xi[self.n:]

    def coords(self):
        """Flat coordinate vector (xi'_1..xibar_n, tau) in R^{2n+1}."""
        return np.concatenate([self.xi, [self.tau]])


def identity(n):
    return GroupPoint(n, np.zeros(2 * n), 0.0)


def _omega(xi1, xi2, n):
    # Im(xi1 . conj(xi2)) summed over components
    return float(np.dot(xi1[n:], xi2[:n]) - np.dot(xi1[:n], xi2[n:]))


def compose(z1, z2, c=STD):
    """Group product z1 o z2 in the given convention."""
    if z1.n != z2.n:
        raise ValueError(f"dimension mismatch: n={z1.n} vs n={z2.n}")
    tau = z1.tau + z2.tau + c.kappa * _omega(z1.xi, z2.xi, z1.n)
    return GroupPoint(z1.n, z1.xi + z2.xi, tau)


def inverse(z, c=STD):
    """Group inverse (-xi, -tau); the pairing is antisymmetric so this is exact."""
    return GroupPoint(z.n, -z.xi, -z.tau)


def dilate(lam, z):
    """Anisotropic dilation (lam xi, lam^2 tau), lam > 0."""
    if not lam > 0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    return GroupPoint(z.n, lam * z.xi, lam * lam * z.tau)


def kaplan_norm(z, c=STD):
    """Homogeneous quasi-norm (|xi|^4 + w tau^2)^{1/4} with w set by the convention."""
    xi2 = float(np.dot(z.xi, z.xi))
    return (xi2 * xi2 + c.tau_weight * z.tau * z.tau) ** 0.25


def kaplan_norm_grid(xi_sq, tau, c=STD):
    """Vectorised Kaplan norm from |xi|^2 and tau arrays (broadcasting)."""
    return np.power(xi_sq * xi_sq + c.tau_weight * tau * tau, 0.25)


def apply_field(f, z, field, c=STD, h=1e-4):
    """Left-invariant field applied to a callable f at z by central differences.

    field is "X1".."Xn", "Y1".."Yn" or "T"; f takes a flat coordinate vector of
    length 2n + 1.  Second-order accurate in the step h.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    coords = z.coords()
    n = z.n

    def d_axis(axis):
        lo = coords.copy()
        hi = coords.copy()
        lo[axis] -= h
        hi[axis] += h
        return (f(hi) - f(lo)) / (2.0 * h)

    if field == "T":
        return -d_axis(2 * n)
    kind, idx = field[0], int(field[1:]) - 1
    if kind not in ("X", "Y") or not 0 <= idx < n:
        raise ValueError(f"unknown field {field!r} for n={n}")
    d_tau = d_axis(2 * n)
    if kind == "X":
        return d_axis(idx) + c.kappa * coords[n + idx] * d_tau
    return d_axis(n + idx) - c.kappa * coords[idx] * d_tau
