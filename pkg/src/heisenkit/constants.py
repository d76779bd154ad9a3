"""Closed-form constants for the functional inequalities on the Heisenberg group H^n.

Every constant is a pure function of the group index n (homogeneous dimension
Q = 2n + 2), a fractional order s in (0, 1], and the auxiliary exponents
(beta, q, ...) of the inequality it belongs to.  All evaluations are done in
double precision, switching to log-domain arithmetic where the linear-domain
value would overflow or underflow (e.g. the semi-Gaussian normalisation for
large n).
"""

import math

__all__ = [
    "ParameterError",
    "ConstantsTable",
    "gamma_fn",
    "log_gamma",
    "homogeneous_dimension",
    "sobolev_constant",
    "sobolev_constant_integer",
    "hls_constant",
    "fundamental_constants",
    "us_bound",
    "vs_bound",
    "us_multiplier_ratio",
    "us_spectral_sup",
    "hardy_constant",
    "gn_constants",
    "gn_sharp_constant",
    "gross_gamma",
    "gross_gamma_limit",
    "lw_constant",
    "constants_table",
]


class ParameterError(ValueError):
    """Raised when a parameter lies outside the admissible window of a formula."""


def _check(cond, msg):
    if not cond:
        raise ParameterError(msg)


def gamma_fn(x):
    """Gamma function for x > 0, accurate to better than 1e-13 relative on [0.1, 50]."""
    if not x > 0:
        raise ParameterError(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


def log_gamma(x):
    """log(Gamma(x)) for x > 0; safe for arguments where Gamma itself overflows."""
    if not x > 0:
        raise ParameterError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def homogeneous_dimension(n):
    """Q = 2n + 2 for the group index n >= 1."""
    _check(isinstance(n, int) and n >= 1, f"group index must be an integer >= 1, got {n}")
    return 2 * n + 2


def _check_order(n, s, allow_one=True):
    homogeneous_dimension(n)
    hi = 1.0 if allow_one else 1.0 - 1e-15
    _check(0.0 < s <= hi, f"fractional order s must lie in (0, {'1]' if allow_one else '1)'}, got {s}")


def sobolev_constant(n, s):
    """Best constant of the L^2 -> L^{2Q/(Q-2s)} Sobolev inequality.

    Evaluates 2^{-2s} pi^{-s} (n!)^{s/(n+1)} Gamma^2((Q-2s)/4) / Gamma^2((Q+2s)/4).
    """
    _check_order(n, s)
    q_hom = homogeneous_dimension(n)
    _check(q_hom > 2 * s, f"need Q > 2s, got Q={q_hom}, s={s}")
    log_c = (
        -2.0 * s * math.log(2.0)
        - s * math.log(math.pi)
        + (s / (n + 1.0)) * log_gamma(n + 1.0)
        + 2.0 * log_gamma((q_hom - 2.0 * s) / 4.0)
        - 2.0 * log_gamma((q_hom + 2.0 * s) / 4.0)
    )
    return math.exp(log_c)


def sobolev_constant_integer(n):
    """The s = 1 Sobolev constant in its reduced form (n!)^{1/(n+1)} / (pi n^2)."""
    homogeneous_dimension(n)
    return math.exp(log_gamma(n + 1.0) / (n + 1.0)) / (math.pi * n * n)


def hls_constant(n, lam):
    """Diagonal Hardy-Littlewood-Sobolev constant for the kernel |y^{-1} x|_1^{-lam}."""
    q_hom = homogeneous_dimension(n)
    _check(0.0 < lam < q_hom, f"need 0 < lambda < Q={q_hom}, got {lam}")
    log_front = (lam / q_hom) * ((n + 1.0) * math.log(math.pi) - (n - 1.0) * math.log(2.0) - log_gamma(n + 1.0))
    log_c = log_front + log_gamma(n + 1.0) + log_gamma((q_hom - lam) / 2.0) - 2.0 * log_gamma((2.0 * q_hom - lam) / 4.0)
    return math.exp(log_c)


def fundamental_constants(n, s):
    """Amplitudes (a_s, b_s) of the kernels a_s |x|^{2s-Q} and b_s |x|_1^{2s-Q}.

    a_s belongs to the Std convention, b_s to the FL convention; their ratio is
    2^{2-2s} identically.
    """
    _check_order(n, s)
    q_hom = homogeneous_dimension(n)
    _check(q_hom > 2 * s, f"need Q > 2s, got Q={q_hom}, s={s}")
    common = 2.0 * log_gamma((q_hom - 2.0 * s) / 4.0) - (n + 1.0) * math.log(math.pi) - log_gamma(s)
    a = math.exp((n + 1.0 - 3.0 * s) * math.log(2.0) + common)
    b = math.exp((n - 1.0 - s) * math.log(2.0) + common)
    return a, b


def us_bound(n, s):
    """Wendel-type bound ((n+1-s)/n)^s on the modified-vs-fractional operator norm.

    At s = 1 the two operators coincide, so the bound is taken to be 1.
    """
    _check_order(n, s)
    if s == 1.0:
        return 1.0
    return ((n + 1.0 - s) / n) ** s


def vs_bound(n, s):
    """Bound (n+2-s)/(n+s) on the norm of the auxiliary comparison operator."""
    _check_order(n, s)
    return (n + 2.0 - s) / (n + s)


def us_multiplier_ratio(n, s, k):
    """Ratio of the modified to the plain fractional spectral multiplier at level k.

    Equals ((2k+n)/2)^{-s} Gamma((2k+n)/2 + (1+s)/2) / Gamma((2k+n)/2 + (1-s)/2);
    the supremum over k is the exact operator norm that us_bound dominates.
    """
    _check_order(n, s)
    m = (2.0 * k + n) / 2.0
    return math.exp(-s * math.log(m) + log_gamma(m + (1.0 + s) / 2.0) - log_gamma(m + (1.0 - s) / 2.0))


def us_spectral_sup(n, s, k_max=10_000):
    """Enumerated supremum of us_multiplier_ratio over 0 <= k <= k_max."""
    return max(us_multiplier_ratio(n, s, k) for k in range(k_max + 1))


def hardy_constant(n, s):
    """Constant of the fractional Hardy inequality, with the printed norm bound.

    The closed form carries Gamma(1-s), which has a pole at s = 1; the first
    order Hardy route is served elsewhere, so s = 1 is rejected here.
    """
    _check_order(n, s, allow_one=False)
    log_c = (
        math.log(vs_bound(n, s))
        + log_gamma(1.0 - s)
        + 2.0 * log_gamma(n / 2.0)
        - (2.0 * n + 3.0 * s) * math.log(2.0)
        - 2.0 * log_gamma((n + s) / 2.0)
    )
    return math.exp(log_c)


def gn_constants(n, s1, s2, q):
    """Interpolation weight a and constant of the two-order Gagliardo-Nirenberg bound.

    Requires 1 >= s1 > s2 >= 0 and 2Q/(Q-2s2) <= q <= 2Q/(Q-2s1); a runs from 0
    to 1 across that window.  The constant is C_{s1}^{qa/2} C_{s2}^{q(1-a)/2}
    built from sobolev_constant (order zero gives the constant 1).
    """
    q_hom = homogeneous_dimension(n)
    _check(1.0 >= s1 > s2 >= 0.0, f"need 1 >= s1 > s2 >= 0, got s1={s1}, s2={s2}")
    q_lo = 2.0 * q_hom / (q_hom - 2.0 * s2)
    q_hi = 2.0 * q_hom / (q_hom - 2.0 * s1)
    _check(q_lo - 1e-12 <= q <= q_hi + 1e-12, f"need q in [{q_lo}, {q_hi}], got {q}")
    a = (q_hom * (q - 2.0) - 2.0 * s2 * q) / (2.0 * (s1 - s2) * q)
    a = min(max(a, 0.0), 1.0)
    c1 = sobolev_constant(n, s1) if s1 > 0 else 1.0
    c2 = sobolev_constant(n, s2) if s2 > 0 else 1.0
    c_gn = c1 ** (q * a / 2.0) * c2 ** (q * (1.0 - a) / 2.0)
    return a, c_gn


def gn_sharp_constant(n, q):
    """Sharp constant of the first-order/L^2 Gagliardo-Nirenberg bound.

    Valid for 2 <= q <= 2Q/(Q-2); the closed form degenerates at both ends of
    the window (0 at q = 2, a simple pole at the critical exponent), so an
    interior q is expected.
    """
    q_hom = homogeneous_dimension(n)
    _check(2.0 <= q <= 2.0 * q_hom / (q_hom - 2.0), f"need 2 <= q <= {2.0 * q_hom / (q_hom - 2.0)}, got {q}")
    gap = 2.0 * q - q_hom * (q - 2.0)
    if gap <= 0.0:
        return math.inf
    c1 = sobolev_constant_integer(n)
    return (c1 * (2.0 * q / gap) * (q_hom * (q - 2.0) / gap)) ** (q / 2.0)


def gross_gamma(n):
    """Normalisation of the Gaussian factor in the semi-Gaussian measure on H^n.

    gamma = n! ((n+1)/(2 pi n^2))^{n+1} e^{n-1}, evaluated in log-domain (the
    linear value underflows near n ~ 150).
    """
    return math.exp(_log_gross_gamma(n))


def _log_gross_gamma(n):
    homogeneous_dimension(n)
    return (
        log_gamma(n + 1.0)
        + (n + 1.0) * (math.log(n + 1.0) - math.log(2.0 * math.pi) - 2.0 * math.log(n))
        + (n - 1.0)
    )


def gross_gamma_limit(n):
    """Per-coordinate normalisation gamma^{1/(2n)}; tends to (2 pi)^{-1/2}."""
    return math.exp(_log_gross_gamma(n) / (2.0 * n))


def lw_constant(n, s, beta):
    """Constant of the logarithmic Hardy inequality with weight exponent beta.

    Combines the Hardy and Sobolev constants as
    (C_H^{beta/2s} (C_S * us_bound)^{(n+1)/(n+1-s) * (2s-beta)/2s})^{2/2*_beta}
    with 2*_beta = 2(Q-beta)/(Q-2s).  beta = 0 drops the Hardy factor entirely,
    which keeps s = 1 admissible there.
    """
    _check_order(n, s)
    q_hom = homogeneous_dimension(n)
    _check(0.0 <= beta < 2.0 * s < q_hom, f"need 0 <= beta < 2s < Q, got beta={beta}, s={s}")
    two_star_beta = 2.0 * (q_hom - beta) / (q_hom - 2.0 * s)
    log_sob = math.log(sobolev_constant(n, s) * us_bound(n, s))
    log_inner = ((n + 1.0) / (n + 1.0 - s)) * ((2.0 * s - beta) / (2.0 * s)) * log_sob
    if beta > 0.0:
        log_inner += (beta / (2.0 * s)) * math.log(hardy_constant(n, s))
    return math.exp((2.0 / two_star_beta) * log_inner)


class ConstantsTable:
    """Flat record of every closed-form constant at one parameter point.

    Fields follow the published formulas; entries whose formula is not
    admissible at the requested point (the Hardy constant at s = 1, the
    weighted log constant with beta > 0 at s = 1) are set to NaN.
    """

    FIELDS = (
        "n", "Q", "s", "c_sobolev", "c_sobolev_int", "c_hls", "a_s", "b_s",
        "u_bound", "v_bound", "c_hardy", "c_gn", "c_gn_sharp", "c_lw", "gross_gamma",
    )

    def __init__(self, n, s, beta=0.0, q=None):
        _check_order(n, s)
        self.n = n
        self.Q = homogeneous_dimension(n)
        self.s = float(s)
        self.beta = float(beta)
        # default q sits strictly inside both admissible windows
        self.q = float(q) if q is not None else 0.5 * (2.0 + 2.0 * self.Q / (self.Q - 2.0 * s))
        self.c_sobolev = sobolev_constant(n, s)
        self.c_sobolev_int = sobolev_constant_integer(n)
        # lambda defaults to the kernel order Q - 2s used by the Sobolev chain
        self.c_hls = hls_constant(n, self.Q - 2.0 * s)
        self.a_s, self.b_s = fundamental_constants(n, s)
        self.u_bound = us_bound(n, s)
        self.v_bound = vs_bound(n, s)
        self.c_hardy = hardy_constant(n, s) if s < 1.0 else math.nan
        _, self.c_gn = gn_constants(n, s, 0.0, min(self.q, 2.0 * self.Q / (self.Q - 2.0 * s)))
        self.c_gn_sharp = gn_sharp_constant(n, min(self.q, 2.0 * self.Q / (self.Q - 2.0)))
        try:
            self.c_lw = lw_constant(n, s, beta)
        except ParameterError:
            self.c_lw = math.nan
        self.gross_gamma = gross_gamma(n)

    def as_dict(self):
        return {name: getattr(self, name) for name in self.FIELDS}


def constants_table(n, s, beta=0.0, q=None):
    """Convenience constructor mirroring the CLI ``constants`` subcommand."""
    return ConstantsTable(n, s, beta=beta, q=q)
