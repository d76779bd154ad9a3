"""Test-function batteries and the inequality suite runner.

The standard battery holds 22 decaying profiles on the desk-scale box
(isotropic and anisotropic Gaussians, shifted bumps, rings, sign-changing and
oscillatory profiles, mollified near-extremizers of the critical quotient, and
two xi-off-center members that exercise the horizontal-only paths).  The
radial battery is a separate 5-function set whose central-variable spectrum is
bounded away from zero, sized for the spectral fidelity targets (round trip,
Plancherel, form agreement).

``run_suite`` evaluates one named suite (or all of them) over the battery,
analysing radial members once and fanning the checks out over a thread pool;
the aggregation order is the deterministic task order.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .calculus import GridFunction, GridSpec, lp_norm, sample
from .constants import ParameterError
from .group import GroupPoint
from .spectral import DEFAULT_K_MAX, analyze, make_lambda_grid
from . import inequalities as ineq

__all__ = [
    "BatteryMember",
    "default_grid",
    "radial_grid",
    "build_battery",
    "build_radial_battery",
    "SUITES",
    "run_suite",
    "max_threads",
]


@dataclass
class BatteryMember:
    name: str
    f: GridFunction
    radial: bool
    positive: bool


def default_grid():
    """Desk-scale box: n = 1, half-widths 8, 96 points per axis."""
    return GridSpec(1, 8.0, 8.0, 96, 96)


def radial_grid():
    """Longer tau box for the spectrally band-limited radial battery."""
    return GridSpec(1, 8.0, 18.0, 96, 192)


def _r2(x, y):
    return x ** 2 + y ** 2


_STANDARD = [
    # name, fn, radial, positive
    ("gauss_narrow", lambda x, y, t: np.exp(-2.0 * (_r2(x, y) + t ** 2)), True, True),
    ("gauss_mid", lambda x, y, t: np.exp(-1.5 * (_r2(x, y) + t ** 2)), True, True),
    ("gauss_wide", lambda x, y, t: np.exp(-1.2 * (_r2(x, y) + t ** 2)), True, True),
    ("aniso_flat", lambda x, y, t: np.exp(-2.5 * _r2(x, y) - 1.2 * t ** 2), True, True),
    ("aniso_tall", lambda x, y, t: np.exp(-1.2 * _r2(x, y) - 2.2 * t ** 2), True, True),
    ("aniso_mid", lambda x, y, t: np.exp(-1.8 * _r2(x, y) - 1.0 * t ** 2), True, True),
    ("tau_shift", lambda x, y, t: np.exp(-1.5 * _r2(x, y) - 1.5 * (t - 2.0) ** 2), True, True),
    ("tau_shift_far", lambda x, y, t: np.exp(-2.0 * _r2(x, y) - 2.0 * (t - 3.0) ** 2), True, True),
    ("ring", lambda x, y, t: _r2(x, y) * np.exp(-1.8 * (_r2(x, y) + t ** 2)), True, True),
    ("poly_ring", lambda x, y, t: (1.0 + 0.5 * _r2(x, y)) * np.exp(-2.0 * (_r2(x, y) + t ** 2)), True, True),
    ("plateau", lambda x, y, t: 1.0 / np.cosh(1.5 * (_r2(x, y) + t ** 2)), True, True),
    ("laguerre_sign", lambda x, y, t: (1.0 - 2.0 * _r2(x, y)) * np.exp(-1.5 * (_r2(x, y) + t ** 2)), True, False),
    ("tau_odd", lambda x, y, t: t * np.exp(-1.5 * (_r2(x, y) + t ** 2)), True, False),
    ("osc_tau", lambda x, y, t: np.exp(-1.5 * (_r2(x, y) + t ** 2)) * np.cos(2.0 * t), True, False),
    ("osc_tau_fast", lambda x, y, t: np.exp(-1.8 * (_r2(x, y) + t ** 2)) * np.cos(3.0 * t), True, False),
    ("osc_radial", lambda x, y, t: np.exp(-1.5 * (_r2(x, y) + t ** 2)) * np.cos(1.5 * _r2(x, y)), True, False),
    ("osc_mixed", lambda x, y, t: (1.0 + 0.3 * _r2(x, y)) * np.exp(-1.6 * (_r2(x, y) + t ** 2)) * np.cos(t), True, False),
    ("extremizer_1", lambda x, y, t: ((1.0 + _r2(x, y)) ** 2 + 16.0 * t ** 2) ** -0.5
                                     * np.exp(-(_r2(x, y) + t ** 2) / 18.0), True, True),
    ("extremizer_s", lambda x, y, t: ((2.25 + _r2(x, y)) ** 2 + 16.0 * t ** 2) ** -0.5
                                     * np.exp(-(_r2(x, y) + t ** 2) / 18.0), True, True),
    ("extremizer_h", lambda x, y, t: ((1.44 + _r2(x, y)) ** 2 + 16.0 * t ** 2) ** -0.5
                                     * np.exp(-(_r2(x, y) + t ** 2) / 9.0), True, True),
    ("xi_offcenter", lambda x, y, t: np.exp(-1.5 * ((x - 1.2) ** 2 + y ** 2) - 1.2 * t ** 2), False, True),
    ("xi_offcenter_2", lambda x, y, t: np.exp(-1.8 * ((x - 0.8) ** 2 + (y + 0.9) ** 2) - 1.5 * t ** 2), False, True),
]

_RADIAL = [
    ("band_a", lambda x, y, t: np.exp(-0.5 * _r2(x, y)) * np.exp(-t ** 2 / 18.0) * np.cos(2.0 * t)),
    ("band_b", lambda x, y, t: np.exp(-0.8 * _r2(x, y)) * np.exp(-t ** 2 / 18.0) * np.cos(1.8 * t)),
    ("band_ring", lambda x, y, t: (1.0 + 0.5 * _r2(x, y)) * np.exp(-0.6 * _r2(x, y))
                                  * np.exp(-t ** 2 / 18.0) * np.cos(2.2 * t)),
    ("band_odd", lambda x, y, t: np.exp(-1.0 * _r2(x, y)) * np.exp(-t ** 2 / 20.48) * np.sin(2.4 * t)),
    ("band_poly", lambda x, y, t: (1.0 - 0.3 * _r2(x, y) + 0.05 * _r2(x, y) ** 2)
                                  * np.exp(-0.7 * _r2(x, y)) * np.exp(-t ** 2 / 18.0) * np.cos(2.1 * t)),
]


def build_battery(spec=None):
    """The 22-member standard battery on the given (or default) grid."""
    spec = spec or default_grid()
    return [BatteryMember(name, sample(spec, fn), radial, positive)
            for name, fn, radial, positive in _STANDARD]


def build_radial_battery(spec=None):
    """The 5-member band-limited radial battery for spectral fidelity checks."""
    spec = spec or radial_grid()
    return [BatteryMember(name, sample(spec, fn), True, False) for name, fn in _RADIAL]


def max_threads():
    """Thread cap: HEIS_THREADS if set, else the CPU count."""
    env = os.environ.get("HEIS_THREADS", "").strip()
    cpus = os.cpu_count() or 1
    if env:
        return max(1, min(int(env), 64))
    return cpus


def _analyze_radial(members, k_max, lambda_grid):
    radial = [m for m in members if m.radial]
    with ThreadPoolExecutor(max_workers=max_threads()) as pool:
        coeffs = list(pool.map(lambda m: analyze(m.f, k_max, lambda_grid), radial))
    return {m.name: c for m, c in zip(radial, coeffs)}


def _suite_sobolev(members, coeffs, tol, s_values):
    for m in members:
        if not m.radial:
            continue
        c = coeffs[m.name]
        for s in s_values:
            for variant in ("Modified", "FracPower"):
                yield m, lambda m=m, s=s, v=variant, c=c: ineq.check_sobolev(m.f, s, v, coeffs=c, tol=tol)


def _suite_logsobolev(members, coeffs, tol, s_values):
    for m in members:
        if m.radial:
            c = coeffs[m.name]
            for s in s_values:
                for variant in ("Modified", "FracPower"):
                    yield m, lambda m=m, s=s, v=variant, c=c: ineq.check_log_sobolev(m.f, s, v, coeffs=c, tol=tol)
        yield m, lambda m=m: ineq.check_log_sobolev(m.f, 1.0, "Horizontal", tol=tol)
        for p, q in ((2.0, 4.0), (1.5, 3.0)):
            yield m, lambda m=m, p=p, q=q: ineq.check_log_holder(m.f, p, q, tol=tol)


def _suite_gn(members, coeffs, tol, s_values):
    for m in members:
        if not m.radial:
            continue
        c = coeffs[m.name]
        for variant in ("Modified", "FracPower"):
            yield m, lambda m=m, v=variant, c=c: ineq.check_gagliardo_nirenberg(
                m.f, 1.0, 4.5, 6.0, v, coeffs=c, tol=tol)
            yield m, lambda m=m, v=variant, c=c: ineq.check_gn_two(m.f, 1.0, 0.0, 3.0, v, coeffs=c, tol=tol)
            yield m, lambda m=m, v=variant, c=c: ineq.check_gn_two(m.f, 0.75, 0.25, 2.8, v, coeffs=c, tol=tol)
            yield m, lambda m=m, v=variant, c=c: ineq.check_log_gn(m.f, 1.0, 4.5, 6.0, v, coeffs=c, tol=tol)
            yield m, lambda m=m, v=variant, c=c: ineq.check_log_gn(m.f, 0.5, 3.0, 4.0, v, coeffs=c, tol=tol)


def _suite_hardy(members, coeffs, tol, s_values):
    for m in members:
        if not m.radial:
            continue
        c = coeffs[m.name]
        yield m, lambda m=m, c=c: ineq.check_hardy(m.f, 0.5, coeffs=c, tol=tol)
        for beta in (0.0, 0.3, 0.6, 1.0):
            yield m, lambda m=m, c=c, b=beta: ineq.check_hardy_sobolev(m.f, 0.5, b, coeffs=c, tol=tol)
        for s, beta in ((0.5, 0.3), (0.75, 0.6)):
            yield m, lambda m=m, c=c, s=s, b=beta: ineq.check_weighted_log_sobolev(m.f, s, b, coeffs=c, tol=tol)
        for s, beta in ((0.5, 0.3), (0.5, 0.5), (0.75, 0.4)):
            yield m, lambda m=m, c=c, s=s, b=beta: ineq.check_log_hardy(m.f, s, b, coeffs=c, tol=tol)


def _suite_nash(members, coeffs, tol, s_values):
    for m in members:
        if m.radial:
            c = coeffs[m.name]
            for s in s_values:
                for variant in ("Modified", "FracPower"):
                    yield m, lambda m=m, s=s, v=variant, c=c: ineq.check_nash(m.f, s, v, coeffs=c, tol=tol)
        yield m, lambda m=m: ineq.check_nash(m.f, 1.0, "Horizontal", tol=tol)


def _suite_gross(members, coeffs, tol, s_values):
    for m in members:
        yield m, lambda m=m: ineq.check_gross(ineq.gross_transform(_unit(m.f)), tol=tol)
        yield m, lambda m=m: ineq.check_equivalence(m.f, tol=tol)


def _unit(f):
    return f.copy_with(f.values / lp_norm(f, 2.0))


def _suite_poincare(members, coeffs, tol, s_values):
    for m in members:
        for p in (1.0, 1.5):
            yield m, lambda m=m, p=p: ineq.check_poincare_mu(m.f, p, tol=tol)
        for q in (1.5, 3.0):
            yield m, lambda m=m, q=q: ineq.check_poincare_haar(m.f, q, "Log-a", tol=tol)
            yield m, lambda m=m, q=q: ineq.check_poincare_haar(m.f, q, "Linear-a3", tol=tol)
            if m.radial:
                c = coeffs[m.name]
                for form in ("Log-b", "Log-c", "Linear-b3", "Linear-c3"):
                    yield m, lambda m=m, q=q, fm=form, c=c: ineq.check_poincare_haar(
                        m.f, q, fm, s=0.5, coeffs=c, tol=tol)
    # ball forms on two representative members and two centers
    origin = GroupPoint(1, np.zeros(2), 0.0)
    shifted = GroupPoint(1, np.array([0.4, 0.3]), 0.2)
    by_name = {m.name: m for m in members}
    for name in ("gauss_narrow", "aniso_mid"):
        m = by_name.get(name)
        if m is None or not m.radial:
            continue
        for center, radius in ((origin, 0.9), (shifted, 0.8)):
            yield m, lambda m=m, ct=center, r=radius, c=coeffs[m.name]: ineq.check_ball_poincare(
                m.f, ct, r, coeffs=c, tol=tol)


SUITES = {
    "sobolev": _suite_sobolev,
    "logsobolev": _suite_logsobolev,
    "gn": _suite_gn,
    "hardy": _suite_hardy,
    "nash": _suite_nash,
    "gross": _suite_gross,
    "poincare": _suite_poincare,
}


def run_suite(suite="all", grid=None, members=None, tol=ineq.DEFAULT_TOL,
              s_values=(0.5, 1.0), k_max=DEFAULT_K_MAX, lambda_grid=None):
    """Evaluate one suite (or all) over the battery; returns the report list.

    Reports come back in deterministic task order regardless of the thread
    pool's scheduling.
    """
    if suite != "all" and suite not in SUITES:
        raise ParameterError(f"unknown suite {suite!r}; choose from {('all',) + tuple(SUITES)}")
    members = members if members is not None else build_battery(grid)
    lambda_grid = lambda_grid or make_lambda_grid()
    names = list(SUITES) if suite == "all" else [suite]
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        coeffs = _analyze_radial(members, k_max, lambda_grid)
        tasks = []
        for name in names:
            tasks.extend(SUITES[name](members, coeffs, tol, s_values))
        with ThreadPoolExecutor(max_workers=max_threads()) as pool:
            raw = list(pool.map(lambda mt: (mt[0], mt[1]()), tasks))
    reports = []
    for member, item in raw:
        for rep in item if isinstance(item, tuple) else (item,):
            rep.params["function"] = member.name
            reports.append(rep)
    return reports
