"""Left side, right side, and verdict for each functional inequality.

Every ``check_*`` function evaluates both sides of one inequality on a grid
function, using the closed-form constants from :mod:`heisenkit.constants`,
stencil energies from :mod:`heisenkit.calculus` and spectral quadratic forms
from :mod:`heisenkit.spectral`.  Verdicts compare lhs <= rhs with a relative
tolerance (default 1e-3) through a difference rule that stays meaningful when
either side is negative; the ratio lhs/rhs is reported whenever rhs > 0.
Logarithmic right sides whose argument is nonpositive yield an inconclusive
report instead of a failure.

Normalisation hypotheses (unit L^2 norm, unit weighted norm, unit L^2(mu)
norm) are imposed by pre-scaling the input and recorded in the report notes.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import constants as cn
from .constants import ParameterError
from .calculus import (
    GridFunction,
    GridSpec,
    HAAR,
    Measure,
    dirichlet_form,
    entropy_term,
    integrate,
    lp_norm,
    sublaplacian_quadratic_form,
)
from .group import STD, FL, GroupPoint, compose, inverse, kaplan_norm_grid
from .spectral import (
    DEFAULT_K_MAX,
    SpectralCoefficients,
    analyze,
    apply_multiplier,
    frac_power,
    modified,
    synthesize,
)

__all__ = [
    "DEFAULT_TOL",
    "InequalityReport",
    "check_log_holder",
    "check_sobolev",
    "check_log_sobolev",
    "check_gagliardo_nirenberg",
    "check_gn_two",
    "check_log_gn",
    "check_hardy",
    "check_hardy_sobolev",
    "check_weighted_log_sobolev",
    "check_log_hardy",
    "check_nash",
    "gross_transform",
    "gross_transform_inv",
    "check_gross",
    "check_equivalence",
    "check_poincare_mu",
    "check_poincare_haar",
    "check_ball_poincare",
    "check_convention_bridge",
    "ball_weights",
    "log_sobolev_rhs",
]

DEFAULT_TOL = 1e-3


@dataclass
class InequalityReport:
    """Outcome of one inequality check.

    ``holds`` is None when the check is inconclusive (log argument <= 0 or a
    degenerate side); ``ratio`` is lhs/rhs when rhs > 0 and NaN otherwise.
    """

    name: str
    lhs: float
    rhs: float
    ratio: float
    holds: bool | None
    tol: float
    params: dict = field(default_factory=dict)
    notes: str = ""

    @property
    def status(self):
        if self.holds is None:
            return "inconclusive"
        return "pass" if self.holds else "fail"

    def __str__(self):
        return (f"{self.name}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} "
                f"ratio={self.ratio:.6g} [{self.status}]")


def _report(name, lhs, rhs, tol, params, notes="", inconclusive=False):
    if inconclusive or not (math.isfinite(lhs) and math.isfinite(rhs)):
        return InequalityReport(name, lhs, rhs, math.nan, None, tol, params,
                                notes or "inconclusive")
    scale = max(abs(lhs), abs(rhs), 1e-300)
    holds = lhs <= rhs + tol * scale
    ratio = lhs / rhs if rhs > 0 else math.nan
    if rhs <= 0 and not notes:
        notes = "rhs <= 0: verdict by difference rule, ratio undefined"
    return InequalityReport(name, lhs, rhs, ratio, holds, tol, params, notes)


def _coeffs(f, coeffs, k_max, lambda_grid):
    if coeffs is not None:
        return coeffs
    return analyze(f, k_max, lambda_grid)


def _form(f, mult, coeffs, k_max, lambda_grid):
    c = _coeffs(f, coeffs, k_max, lambda_grid)
    sym = mult(np.arange(c.k_max + 1), c.lambda_grid.nodes)
    w = c.lambda_grid.weights * c.plancherel_weight
    return float(np.sum(sym * np.abs(c.coeffs) ** 2 * w[None, :])), c


def _density_entropy(spec, dens, m=HAAR):
    """integral of rho log rho dm for an already-normalised density array."""
    w = spec.quadrature_weights() * m.density(spec)
    with np.errstate(divide="ignore", invalid="ignore"):
        body = np.where(dens > 0.0, dens * np.log(np.where(dens > 0.0, dens, 1.0)), 0.0)
    return float(np.sum(body * w))


# ---------------------------------------------------------------------------
# logarithmic Hoelder and Sobolev-type checks
# ---------------------------------------------------------------------------

def check_log_holder(u, p, q, m=HAAR, tol=DEFAULT_TOL):
    """Entropy of |u|^p/||u||_p^p against (q/(q-p)) log(||u||_q^p / ||u||_p^p)."""
    if not 1.0 < p < q:
        raise ParameterError(f"need 1 < p < q, got p={p}, q={q}")
    np_norm = lp_norm(u, p, m)
    nq_norm = lp_norm(u, q, m)
    if np_norm == 0.0 or nq_norm == 0.0:
        raise ParameterError("log-Hoelder check requires a nonzero function")
    dens = (np.abs(u.values) / np_norm) ** p
    lhs = _density_entropy(u.spec, dens, m)
    rhs = (q / (q - p)) * p * math.log(nq_norm / np_norm)
    return _report("log_holder", lhs, rhs, tol, {"p": p, "q": q})


def check_sobolev(f, s, variant="Modified", coeffs=None, tol=DEFAULT_TOL,
                  k_max=DEFAULT_K_MAX, lambda_grid=None):
    """||f||_{2Q/(Q-2s)}^2 against the (modified) fractional Sobolev bound."""
    n = f.spec.n
    q_hom = cn.homogeneous_dimension(n)
    c_b = cn.sobolev_constant(n, s)
    lhs = lp_norm(f, 2.0 * q_hom / (q_hom - 2.0 * s)) ** 2
    if variant == "Modified":
        form, _ = _form(f, modified(n, s), coeffs, k_max, lambda_grid)
        rhs = c_b * form
    elif variant == "FracPower":
        form, _ = _form(f, frac_power(n, s), coeffs, k_max, lambda_grid)
        rhs = c_b * cn.us_bound(n, s) * form
    else:
        raise ParameterError(f"unknown Sobolev variant {variant!r}")
    return _report(f"sobolev[{variant}]", lhs, rhs, tol, {"n": n, "s": s, "variant": variant})


def log_sobolev_rhs(n, s, constant, form, norm_sq):
    """Shared right side (Q/2s) log(constant * form / ||u||^2); NaN if arg <= 0.

    Both the horizontal and the spectral log-Sobolev variants are built on
    this, which is what ties their s = 1 reduction chain together exactly.
    """
    q_hom = cn.homogeneous_dimension(n)
    arg = constant * form / norm_sq
    if arg <= 0.0:
        return math.nan
    return q_hom / (2.0 * s) * math.log(arg)


def check_log_sobolev(f, s, variant="Modified", coeffs=None, tol=DEFAULT_TOL,
                      k_max=DEFAULT_K_MAX, lambda_grid=None, form_value=None):
    """Entropy of |f|^2/||f||^2 against the logarithmic Sobolev right side.

    variant "Horizontal" requires s = 1 and uses the stencil energy; the
    spectral variants use the multiplier forms.  ``form_value`` substitutes a
    precomputed quadratic form (used by the reduction-chain tests to compare
    the report formulas on identical inputs).
    """
    n = f.spec.n
    norm_sq = lp_norm(f, 2.0) ** 2
    if variant == "Horizontal":
        if s != 1.0:
            raise ParameterError("the horizontal variant is the s = 1 inequality")
        const = cn.sobolev_constant_integer(n)
        form = dirichlet_form(f) if form_value is None else form_value
    elif variant == "Modified":
        const = cn.sobolev_constant(n, s)
        form = _form(f, modified(n, s), coeffs, k_max, lambda_grid)[0] if form_value is None else form_value
    elif variant == "FracPower":
        const = cn.sobolev_constant(n, s) * cn.us_bound(n, s)
        form = _form(f, frac_power(n, s), coeffs, k_max, lambda_grid)[0] if form_value is None else form_value
    else:
        raise ParameterError(f"unknown log-Sobolev variant {variant!r}")
    lhs = entropy_term(f)
    rhs = log_sobolev_rhs(n, s, const, form, norm_sq)
    params = {"n": n, "s": s, "variant": variant}
    if math.isnan(rhs):
        return _report(f"log_sobolev[{variant}]", lhs, rhs, tol, params,
                       notes="log argument <= 0", inconclusive=True)
    return _report(f"log_sobolev[{variant}]", lhs, rhs, tol, params)


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg family
# ---------------------------------------------------------------------------

def _gn_weight(n, s, q, sigma):
    q_hom = cn.homogeneous_dimension(n)
    crit = 2.0 * q_hom / (q_hom - 2.0 * s)
    if not (sigma >= q >= crit - 1e-12):
        raise ParameterError(f"need sigma >= q >= {crit}, got q={q}, sigma={sigma}")
    denom = (0.5 - s / q_hom) - 1.0 / sigma
    if denom == 0.0:
        raise ParameterError("degenerate interpolation window (sigma equals the critical exponent)")
    a = (1.0 / q - 1.0 / sigma) / denom
    if not 0.0 < a <= 1.0 + 1e-12:
        raise ParameterError(f"interpolation weight a={a} outside (0, 1]")
    return min(a, 1.0)


def check_gagliardo_nirenberg(f, s, q, sigma, variant="Modified", coeffs=None,
                              tol=DEFAULT_TOL, k_max=DEFAULT_K_MAX, lambda_grid=None):
    """int |u|^q against the one-order Gagliardo-Nirenberg product bound."""
    n = f.spec.n
    a = _gn_weight(n, s, q, sigma)
    c_b = cn.sobolev_constant(n, s)
    lhs = lp_norm(f, q) ** q
    sig_norm = lp_norm(f, sigma)
    if variant == "Modified":
        form, _ = _form(f, modified(n, s), coeffs, k_max, lambda_grid)
        rhs = (c_b * form) ** (a * q / 2.0) * sig_norm ** ((1.0 - a) * q)
    elif variant == "FracPower":
        form, _ = _form(f, frac_power(n, s), coeffs, k_max, lambda_grid)
        rhs = (c_b * cn.us_bound(n, s) * form) ** (a * q / 2.0) * sig_norm ** ((1.0 - a) * q)
    else:
        raise ParameterError(f"unknown GN variant {variant!r}")
    return _report(f"gagliardo_nirenberg[{variant}]", lhs, rhs, tol,
                   {"n": n, "s": s, "q": q, "sigma": sigma, "a": a, "variant": variant})


def _us_bound_or_identity(n, s):
    return 1.0 if s == 0.0 else cn.us_bound(n, s)


def check_gn_two(f, s1, s2, q, variant="Modified", coeffs=None, tol=DEFAULT_TOL,
                 k_max=DEFAULT_K_MAX, lambda_grid=None):
    """int |u|^q against the two-order product bound with weights qa/2, q(1-a)/2."""
    n = f.spec.n
    a, c_gn = cn.gn_constants(n, s1, s2, q)
    e1, e2 = q * a / 2.0, q * (1.0 - a) / 2.0
    lhs = lp_norm(f, q) ** q
    if variant == "Modified":
        f1, c = _form(f, modified(n, s1), coeffs, k_max, lambda_grid)
        f2, _ = _form(f, modified(n, s2), c, k_max, lambda_grid)
        rhs = c_gn * f1 ** e1 * f2 ** e2
    elif variant == "FracPower":
        f1, c = _form(f, frac_power(n, s1), coeffs, k_max, lambda_grid)
        f2, _ = _form(f, frac_power(n, s2), c, k_max, lambda_grid)
        rhs = (c_gn * _us_bound_or_identity(n, s1) ** e1 * _us_bound_or_identity(n, s2) ** e2
               * f1 ** e1 * f2 ** e2)
    else:
        raise ParameterError(f"unknown GN variant {variant!r}")
    return _report(f"gn_two[{variant}]", lhs, rhs, tol,
                   {"n": n, "s1": s1, "s2": s2, "q": q, "a": a, "variant": variant})


def check_log_gn(f, s, q, sigma, variant="Modified", coeffs=None, tol=DEFAULT_TOL,
                 k_max=DEFAULT_K_MAX, lambda_grid=None):
    """Entropy against the logarithmic Gagliardo-Nirenberg right side."""
    n = f.spec.n
    a = _gn_weight(n, s, q, sigma)
    c_b = cn.sobolev_constant(n, s)
    norm_sq = lp_norm(f, 2.0) ** 2
    sig_norm = lp_norm(f, sigma)
    if variant == "Modified":
        form, _ = _form(f, modified(n, s), coeffs, k_max, lambda_grid)
        arg = c_b ** a * form ** a * sig_norm ** (2.0 * (1.0 - a)) / norm_sq
    elif variant == "FracPower":
        form, _ = _form(f, frac_power(n, s), coeffs, k_max, lambda_grid)
        arg = (c_b * cn.us_bound(n, s)) ** a * form ** a * sig_norm ** (2.0 * (1.0 - a)) / norm_sq
    else:
        raise ParameterError(f"unknown GN variant {variant!r}")
    lhs = entropy_term(f)
    params = {"n": n, "s": s, "q": q, "sigma": sigma, "a": a, "variant": variant}
    if arg <= 0.0:
        return _report(f"log_gn[{variant}]", lhs, math.nan, tol, params,
                       notes="log argument <= 0", inconclusive=True)
    rhs = q / (q - 2.0) * math.log(arg)
    return _report(f"log_gn[{variant}]", lhs, rhs, tol, params)


# ---------------------------------------------------------------------------
# Hardy family
# ---------------------------------------------------------------------------

def check_hardy(f, s, coeffs=None, tol=DEFAULT_TOL, k_max=DEFAULT_K_MAX, lambda_grid=None):
    """int |u|^2 |x|^{-2s} against the printed Hardy bound on <L^s u, u>.

    The closed-form constant is implemented exactly as printed; numerically it
    is exceeded by Rayleigh quotients of functions concentrated near the
    origin (see the acceptance notes), so failing reports here are expected
    for such inputs.
    """
    n = f.spec.n
    lhs = lp_norm(f, 2.0, Measure.kaplan_weight(2.0 * s)) ** 2
    form, _ = _form(f, frac_power(n, s), coeffs, k_max, lambda_grid)
    rhs = cn.hardy_constant(n, s) * form
    return _report("hardy", lhs, rhs, tol, {"n": n, "s": s})


def _hardy_sobolev_constant(n, s, beta):
    q_hom = cn.homogeneous_dimension(n)
    two_star_beta = 2.0 * (q_hom - beta) / (q_hom - 2.0 * s)
    log_c = ((n + 1.0) / (n + 1.0 - s)) * ((2.0 * s - beta) / (2.0 * s)) * math.log(
        cn.sobolev_constant(n, s) * cn.us_bound(n, s))
    if beta > 0.0:
        log_c += (beta / (2.0 * s)) * math.log(cn.hardy_constant(n, s))
    return math.exp((2.0 / two_star_beta) * log_c), two_star_beta


def check_hardy_sobolev(f, s, beta, coeffs=None, tol=DEFAULT_TOL,
                        k_max=DEFAULT_K_MAX, lambda_grid=None):
    """Weighted critical norm against the interpolated Hardy-Sobolev bound.

    beta = 0 reproduces the fractional Sobolev check and beta = 2s the Hardy
    check, both exactly (same constants, same integrals).
    """
    n = f.spec.n
    if not 0.0 <= beta <= 2.0 * s:
        raise ParameterError(f"need 0 <= beta <= 2s, got beta={beta}, s={s}")
    c_eff, two_star_beta = _hardy_sobolev_constant(n, s, beta)
    weight = Measure.kaplan_weight(beta) if beta > 0 else HAAR
    lhs = lp_norm(f, two_star_beta, weight) ** 2
    form, _ = _form(f, frac_power(n, s), coeffs, k_max, lambda_grid)
    rhs = c_eff * form
    return _report("hardy_sobolev", lhs, rhs, tol, {"n": n, "s": s, "beta": beta})


def check_weighted_log_sobolev(f, s, beta, coeffs=None, tol=DEFAULT_TOL,
                               k_max=DEFAULT_K_MAX, lambda_grid=None):
    """Weighted entropy against the weighted logarithmic Sobolev right side."""
    n = f.spec.n
    q_hom = cn.homogeneous_dimension(n)
    if not 0.0 <= beta < 2.0 * s:
        raise ParameterError(f"need 0 <= beta < 2s, got beta={beta}, s={s}")
    two_star_beta = 2.0 * (q_hom - beta) / (q_hom - 2.0 * s)
    w_meas = Measure.kaplan_weight(2.0 * beta / two_star_beta) if beta > 0 else HAAR
    w_dens = w_meas.density(f.spec)
    norm_w = lp_norm(f, 2.0, w_meas) ** 2
    dens = np.abs(f.values) ** 2 * np.broadcast_to(w_dens, f.spec.shape) / norm_w
    lhs = _density_entropy(f.spec, dens)
    form, _ = _form(f, frac_power(n, s), coeffs, k_max, lambda_grid)
    arg = cn.lw_constant(n, s, beta) * form / norm_w
    params = {"n": n, "s": s, "beta": beta}
    if arg <= 0.0:
        return _report("weighted_log_sobolev", lhs, math.nan, tol, params,
                       notes="log argument <= 0", inconclusive=True)
    rhs = (q_hom - beta) / (2.0 * s - beta) * math.log(arg)
    return _report("weighted_log_sobolev", lhs, rhs, tol, params)


def _log_kaplan_norm(spec):
    """log |x| on the grid; any on-grid origin node gets the probe average."""
    nrm = spec.kaplan_norm_array()
    nrm = np.broadcast_to(nrm, spec.shape)
    sing = nrm == 0.0
    with np.errstate(divide="ignore"):
        out = np.log(np.where(sing, 1.0, nrm))
    if sing.any():
        # quarter-cell probe distance, matching the weight-patching rule
        probe = 0.25 * math.hypot(spec.spacing_xi, spec.spacing_xi)
        out = np.where(sing, math.log(probe), out)
    return out


def check_log_hardy(f, s, beta, coeffs=None, tol=DEFAULT_TOL,
                    k_max=DEFAULT_K_MAX, lambda_grid=None):
    """Logarithmic Hardy inequality with mixed radial/logarithmic weights.

    The input is pre-normalised to unit weighted norm int |u|^2 |x|^{beta-2s};
    beta = s specialises to the radial-log form int (|u|^2/|x|^s) log|u|.
    """
    n = f.spec.n
    q_hom = cn.homogeneous_dimension(n)
    if not (0.0 <= beta < 2.0 * s < q_hom):
        raise ParameterError(f"need 0 <= beta < 2s < Q, got beta={beta}, s={s}")
    alpha = 2.0 * s - beta
    w_meas = Measure.kaplan_weight(alpha)
    norm_w = lp_norm(f, 2.0, w_meas) ** 2
    u_sq = np.abs(f.values) ** 2 / norm_w
    w_dens = np.broadcast_to(w_meas.density(f.spec), f.spec.shape)
    c_w = (q_hom - 2.0 * s) * (1.0 - beta / (2.0 * s - beta))
    log_nrm = _log_kaplan_norm(f.spec)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_usq = np.where(u_sq > 0.0, np.log(np.where(u_sq > 0.0, u_sq, 1.0)), 0.0)
    body = w_dens * u_sq * (c_w * log_nrm * (u_sq > 0.0) + log_usq)
    lhs = float(np.sum(body * f.spec.quadrature_weights()))
    form, _ = _form(f, frac_power(n, s), coeffs, k_max, lambda_grid)
    arg = cn.lw_constant(n, s, beta) * form / norm_w
    params = {"n": n, "s": s, "beta": beta, "normalised": True}
    if arg <= 0.0:
        return _report("log_hardy", lhs, math.nan, tol, params,
                       notes="log argument <= 0", inconclusive=True)
    rhs = (q_hom - beta) / (2.0 * s - beta) * math.log(arg)
    return _report("log_hardy", lhs, rhs, tol, params,
                   notes="input pre-normalised to unit weighted norm")


# ---------------------------------------------------------------------------
# Nash
# ---------------------------------------------------------------------------

def check_nash(f, s, variant="Horizontal", coeffs=None, tol=DEFAULT_TOL,
               k_max=DEFAULT_K_MAX, lambda_grid=None):
    """||u||_2^{2+4s/Q} against the L^1-interpolated Nash right side."""
    n = f.spec.n
    q_hom = cn.homogeneous_dimension(n)
    l1 = lp_norm(f, 1.0)
    l2_sq = lp_norm(f, 2.0) ** 2
    lhs = l2_sq ** (1.0 + 2.0 * s / q_hom)
    c_b = cn.sobolev_constant(n, s)
    if variant == "Horizontal":
        if s != 1.0:
            raise ParameterError("the horizontal Nash variant is the s = 1 inequality")
        rhs = c_b * l1 ** (4.0 / q_hom) * dirichlet_form(f)
    elif variant == "Modified":
        form, _ = _form(f, modified(n, s), coeffs, k_max, lambda_grid)
        rhs = c_b * l1 ** (4.0 * s / q_hom) * form
    elif variant == "FracPower":
        form, _ = _form(f, frac_power(n, s), coeffs, k_max, lambda_grid)
        rhs = c_b * cn.us_bound(n, s) * l1 ** (4.0 * s / q_hom) * form
    else:
        raise ParameterError(f"unknown Nash variant {variant!r}")
    return _report(f"nash[{variant}]", lhs, rhs, tol, {"n": n, "s": s, "variant": variant})


# ---------------------------------------------------------------------------
# Gross inequality and the equivalence pair
# ---------------------------------------------------------------------------

def gross_transform(f, gamma=None):
    """g = gamma^{-1/2} e^{|xi|^2/4} f, mapping unit Haar norm to unit mu norm."""
    gamma = cn.gross_gamma(f.spec.n) if gamma is None else gamma
    factor = gamma ** -0.5 * np.exp(0.25 * f.spec.xi_squared())
    return f.copy_with(np.broadcast_to(factor, f.spec.shape) * f.values)


def gross_transform_inv(g, gamma=None):
    """Exact inverse of gross_transform."""
    gamma = cn.gross_gamma(g.spec.n) if gamma is None else gamma
    factor = gamma ** 0.5 * np.exp(-0.25 * g.spec.xi_squared())
    return g.copy_with(np.broadcast_to(factor, g.spec.shape) * g.values)


def check_gross(g, tol=DEFAULT_TOL):
    """int |g|^2 log|g| dmu against the horizontal energy int |grad g|^2 dmu.

    g is pre-normalised to unit L^2(mu) norm; mu integrals run over the
    truncated tau box, which is recorded in the notes.
    """
    n = g.spec.n
    mu = Measure.semi_gaussian(cn.gross_gamma(n))
    norm_mu = lp_norm(g, 2.0, mu)
    if norm_mu == 0.0:
        raise ParameterError("gross check requires a nonzero function")
    g = g.copy_with(g.values / norm_mu)
    dens = np.abs(g.values) ** 2
    lhs = 0.5 * _density_entropy(g.spec, dens, mu)
    rhs = dirichlet_form(g, m=mu)
    return _report("gross", lhs, rhs, tol, {"n": n},
                   notes=f"mu truncated to |tau| <= {g.spec.half_width_tau}; "
                         f"input scaled by {1.0 / norm_mu:.6g}")


def check_equivalence(f, tol=DEFAULT_TOL):
    """Both directions of the Gross / horizontal log-Sobolev equivalence.

    Returns (gross_report, horizontal_report); the L^2-norm bridge identity
    residual |  ||g||_mu^2 - ||f||^2  | is recorded on both reports.
    """
    n = f.spec.n
    q_hom = cn.homogeneous_dimension(n)
    norm = lp_norm(f, 2.0)
    f = f.copy_with(f.values / norm)
    g = gross_transform(f)
    mu = Measure.semi_gaussian(cn.gross_gamma(n))
    residual = abs(lp_norm(g, 2.0, mu) ** 2 - lp_norm(f, 2.0) ** 2)

    dens = np.abs(f.values) ** 2
    lhs_h = 0.5 * _density_entropy(f.spec, dens)
    d_form = dirichlet_form(f)
    arg = cn.sobolev_constant_integer(n) * d_form
    if arg <= 0.0:
        horizontal = _report("equivalence[horizontal]", lhs_h, math.nan, tol,
                             {"n": n}, notes="log argument <= 0", inconclusive=True)
    else:
        horizontal = _report("equivalence[horizontal]", lhs_h, q_hom / 4.0 * math.log(arg),
                             tol, {"n": n})
    gross = check_gross(g, tol)
    gross.name = "equivalence[gross]"
    note = f"norm bridge residual {residual:.3e}"
    gross.notes = f"{gross.notes}; {note}"
    horizontal.notes = f"{horizontal.notes}; {note}" if horizontal.notes else note
    gross.params["norm_residual"] = residual
    horizontal.params["norm_residual"] = residual
    return gross, horizontal


# ---------------------------------------------------------------------------
# Poincare family
# ---------------------------------------------------------------------------

def check_poincare_mu(g, p, tol=DEFAULT_TOL):
    """Generalised Poincare inequality for the semi-Gaussian measure, p <= 2."""
    if p > 2.0:
        raise ParameterError(f"the mu-Poincare inequality requires p <= 2, got {p}")
    notes = "" if p >= 1.0 else "p < 1 is outside the tested range"
    n = g.spec.n
    mu = Measure.semi_gaussian(cn.gross_gamma(n))
    lhs = lp_norm(g, 2.0, mu) ** 2 - lp_norm(g, p, mu) ** 2
    rhs = 2.0 * (2.0 - p) / p * dirichlet_form(g, m=mu)
    return _report("poincare_mu", lhs, rhs, tol, {"n": n, "p": p}, notes=notes)


POINCARE_HAAR_FORMS = ("Log-a", "Log-b", "Log-c", "Linear-a3", "Linear-b3", "Linear-c3")


def check_poincare_haar(g, q, form="Log-a", s=1.0, coeffs=None, tol=DEFAULT_TOL,
                        k_max=DEFAULT_K_MAX, lambda_grid=None):
    """Haar-measure Poincare forms: logarithmic (a/b/c) and linearised (a3/b3/c3)."""
    n = g.spec.n
    q_hom = cn.homogeneous_dimension(n)
    if form not in POINCARE_HAAR_FORMS:
        raise ParameterError(f"unknown Poincare form {form!r}")
    log_form = form.startswith("Log")
    if q <= 1.0 and log_form:
        raise ParameterError(f"logarithmic Poincare forms require q > 1, got {q}")
    if q < 1.0:
        raise ParameterError(f"need q >= 1, got {q}")
    norm_sq = lp_norm(g, 2.0) ** 2
    frac_mass = integrate(g.copy_with((np.abs(g.values) ** (2.0 / q)).astype(complex)))
    params = {"n": n, "q": q, "s": s, "form": form}

    if form.endswith("a") or form.endswith("a3"):
        if s != 1.0:
            raise ParameterError("the horizontal Poincare forms are the s = 1 inequalities")
        const, qf = cn.sobolev_constant_integer(n), dirichlet_form(g)
    elif form.endswith("b") or form.endswith("b3"):
        const = cn.sobolev_constant(n, s)
        qf, _ = _form(g, modified(n, s), coeffs, k_max, lambda_grid)
    else:
        const = cn.sobolev_constant(n, s) * cn.us_bound(n, s)
        qf, _ = _form(g, frac_power(n, s), coeffs, k_max, lambda_grid)

    if log_form:
        lhs = 1.0 - (frac_mass / norm_sq ** (1.0 / q)) ** q
        arg = const * qf / norm_sq
        if arg <= 0.0:
            return _report(f"poincare_haar[{form}]", lhs, math.nan, tol, params,
                           notes="log argument <= 0", inconclusive=True)
        rhs = q_hom * (q - 1.0) / (2.0 * s) * math.log(arg)
    else:
        lhs = norm_sq - frac_mass ** q
        rhs = const * q_hom * (q - 1.0) / (2.0 * s) * qf
    return _report(f"poincare_haar[{form}]", lhs, rhs, tol, params)


def ball_weights(spec, center, radius, convention=STD, subsample=3):
    """Quadrature weights restricted to the group ball B_r(center).

    The indicator is evaluated at the nodes; cells whose Kaplan distance to
    the boundary is under two spacings are refined by subsample^3 probing in
    the (xi'_1, xibar_1, tau) directions.
    """
    if radius <= 0:
        raise ParameterError("ball radius must be positive")
    coords = spec.open_coords()
    n = spec.n
    inv = inverse(center, convention)

    def dist(offsets):
        # left-translate by center^{-1}, then take the Kaplan norm
        xi = [coords[a] + offsets.get(a, 0.0) + inv.xi[a] for a in range(2 * n)]
        omega = 0.0
        for i in range(n):
            omega = omega + inv.xi[n + i] * (coords[i] + offsets.get(i, 0.0)) \
                          - inv.xi[i] * (coords[n + i] + offsets.get(n + i, 0.0))
        tau = coords[2 * n] + offsets.get(2 * n, 0.0) + inv.tau + convention.kappa * omega
        xi_sq = 0.0
        for a in range(2 * n):
            xi_sq = xi_sq + xi[a] ** 2
        return kaplan_norm_grid(xi_sq, tau, convention)

    d0 = np.broadcast_to(dist({}), spec.shape)
    margin = 2.0 * max(spec.spacing_xi, spec.spacing_tau)
    inside = (d0 <= radius).astype(float)
    straddle = np.abs(d0 - radius) < margin
    if straddle.any():
        steps = (np.arange(subsample) - (subsample - 1) / 2.0) / subsample
        frac = np.zeros(spec.shape)
        for u in steps:
            for v in steps:
                for w in steps:
                    off = {0: u * spec.spacing_xi, n: v * spec.spacing_xi,
                           2 * n: w * spec.spacing_tau}
                    frac += (np.broadcast_to(dist(off), spec.shape) <= radius)
        inside = np.where(straddle, frac / subsample ** 3, inside)
    return spec.quadrature_weights() * inside


def check_ball_poincare(g, center, radius, s_samples=(0.25, 0.5, 0.75, 1.0),
                        coeffs=None, tol=DEFAULT_TOL, k_max=DEFAULT_K_MAX,
                        lambda_grid=None):
    """Mean-deviation energy on a group ball against the best sampled-order bound.

    lhs is int_B |g - g_B|^2; rhs is the infimum over the sampled orders s of
    C_{B,s} (Q/2s) <L_s g, g>_{L^2(B)}.  A ball volume above 1 violates the
    hypothesis of the bound and is flagged in the notes.
    """
    spec = g.spec
    n = spec.n
    q_hom = cn.homogeneous_dimension(n)
    w_ball = ball_weights(spec, center, radius)
    vol = float(np.sum(w_ball))
    if vol <= 0.0:
        raise ParameterError("the requested ball contains no quadrature mass")
    notes = ""
    if vol > 1.0:
        notes = f"ball volume {vol:.4g} > 1 violates the hypothesis"
    gv = g.values.real
    mean = float(np.sum(w_ball * gv)) / vol
    lhs = float(np.sum(w_ball * (gv - mean) ** 2))

    c = _coeffs(g, coeffs, k_max, lambda_grid)
    rhs_by_s = {}
    for s in s_samples:
        lg = synthesize(apply_multiplier(c, modified(n, s)), spec)
        form_ball = float(np.sum(w_ball * (lg.values * np.conj(g.values)).real))
        rhs_by_s[s] = cn.sobolev_constant(n, s) * q_hom / (2.0 * s) * form_ball
    rhs = min(rhs_by_s.values())
    params = {"n": n, "radius": radius, "volume": vol,
              "center": (list(center.xi), center.tau), "rhs_by_s": rhs_by_s}
    return _report("ball_poincare", lhs, rhs, tol, params, notes=notes)


# ---------------------------------------------------------------------------
# convention bridge
# ---------------------------------------------------------------------------

def check_convention_bridge(v, tol=1e-2):
    """Quadratic-form identity <L~ u, u> = 2^{-2n} <L v, v> under u(xi,tau) = v(2xi,tau).

    The half-width grid reinterpretation makes the substitution exact on the
    nodes: u lives on the box with half the xi extent and the same samples.
    """
    spec = v.spec
    half = GridSpec(spec.n, spec.half_width_xi / 2.0, spec.half_width_tau,
                    spec.points_per_axis_xi, spec.points_per_axis_tau)
    u = GridFunction(half, v.values.copy())
    lhs = sublaplacian_quadratic_form(u, FL)
    rhs = 2.0 ** (-2.0 * spec.n) * sublaplacian_quadratic_form(v, STD)
    resid = abs(lhs - rhs) / abs(rhs)
    report = InequalityReport("convention_bridge", lhs, rhs, lhs / rhs,
                              resid <= tol, tol, {"n": spec.n, "s": 1.0},
                              notes=f"two-sided identity, residual {resid:.3e}")
    return report
