"""Analytic results for the qubit and Werner case studies.

These are the independent oracles for the matrix pipeline. Entropic
quantities are in bits. Small-argument evaluations go through
``xlog1p_excess`` so that information-like differences keep full relative
precision as the state approaches the maximally mixed one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

LN2 = math.log(2.0)


@dataclass(frozen=True)
class QubitConfig:
    r: float
    lam: float

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0 and 0.0 <= self.lam <= 1.0):
            raise ValueError(f"r and lambda must lie in [0, 1], got ({self.r}, {self.lam})")


@dataclass(frozen=True)
class WernerConfig:
    alpha: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.theta <= math.pi + 1e-12:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")


def G(u: float) -> float:
    """-u log2 u with G(0) = 0."""
    if u < 0:
        raise ValueError(f"G needs u >= 0, got {u}")
    return 0.0 if u == 0 else -u * math.log2(u)


def xlog1p_excess(x: float) -> float:
    """(1 + x) ln(1 + x) - x, accurate for small |x|.

    Series: sum_{n>=2} (-1)^n x^n / (n (n - 1)).
    """
    if x <= -1.0:
        if x == -1.0:
            return 1.0
        raise ValueError(f"need x >= -1, got {x}")
    if abs(x) < 0.05:
        total, power, n = 0.0, -x, 1
        while True:
            n += 1
            power *= -x
            add = power / (n * (n - 1))
            total += add
            if abs(add) <= 1e-18 * abs(total) or total == 0.0:
                return total
    return (1 + x) * math.log1p(x) - x


def _sum_excess(coeffs, alpha: float) -> float:
    # sum_k psi(alpha c_k) over zero-sum coefficients equals the entropy
    # deficit of {(1 + alpha c_k)/d} times ln 2 * d
    return sum(xlog1p_excess(alpha * c) for c in coeffs)


def binary_entropy(u: float) -> float:
    """h(u) = -u log2 u - (1 - u) log2 (1 - u)."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"binary entropy needs u in [0, 1], got {u}")
    return G(u) + G(1.0 - u)


def qubit_information(r: float) -> float:
    """1 - h((1 + r)/2), evaluated without cancellation for small r."""
    return (xlog1p_excess(r) + xlog1p_excess(-r)) / (2 * LN2)


def qubit_irreality(c: QubitConfig) -> float:
    """h((1 + lam r)/2) - h((1 + r)/2)."""
    return max(qubit_information(c.r) - qubit_information(c.lam * c.r), 0.0)


def qubit_irreality_bounds(c: QubitConfig) -> tuple[float, float]:
    """Empirical sandwich I(rho)(1 - lam^2) and I(rho)(1 - lam^2)^(3/4)."""
    info = qubit_information(c.r)
    s = (1.0 - c.lam) * (1.0 + c.lam)
    return info * s, info * s**0.75


MU_MIN_IRREALITY = 1e-12


def mu_exponent(c: QubitConfig) -> float:
    """Exponent mu solving irreality = I(rho) (1 - lam^2)^mu.

    Returns ``nan`` for degenerate configurations where the inversion is
    undefined: r = 0, lam = 0 (any mu fits), lam = 1, or a vanishing irreality.
    """
    if c.r <= 0.0 or c.lam <= 0.0 or c.lam >= 1.0:
        return math.nan
    irr = qubit_irreality(c)
    if irr <= MU_MIN_IRREALITY:
        return math.nan
    ratio = irr / qubit_information(c.r)
    return math.log(ratio) / math.log1p(-c.lam * c.lam)


def incompatibility_form(c: QubitConfig, mu: float) -> float:
    """I(rho) (||[X, rho]||_2 / (r sqrt 2))^(2 mu), using ||x_hat cross r_hat||^2 = 1 - lam^2."""
    if c.r <= 0.0:
        raise ValueError("incompatibility form is undefined at r = 0")
    comm_norm = math.sqrt(2.0) * c.r * math.sqrt(max(0.0, (1 - c.lam) * (1 + c.lam)))
    return qubit_information(c.r) * (comm_norm / (c.r * math.sqrt(2.0))) ** (2 * mu)


# ---------------------------------------------------------------------------
# Werner state with X = sigma_z x 1, Y = (sigma_x cos t + sigma_z sin t) x sigma_y
#
# Every spectrum involved has the form {(1 + alpha c_k)/4} with sum_k c_k = 0:
#   rho_W:        c = 3, -1, -1, -1
#   Phi_YX(rho):  c = +k, +k, -k, -k          k = cos^2 t
#   Phi_XY(rho):  c = +k, -k, +m, -m          m = cos 2t cos^2 t
# and S = 2 - sum_k psi(alpha c_k) / (4 ln 2).


def _werner_coeffs(theta: float):
    k = math.cos(theta) ** 2
    m = math.cos(2 * theta) * k
    return (3.0, -1.0, -1.0, -1.0), (k, k, -k, -k), (k, -k, m, -m)


def werner_information(alpha: float) -> float:
    """I(rho_W) = 2 - S(rho_W) in bits."""
    rho_c, _, _ = _werner_coeffs(0.0)
    return _sum_excess(rho_c, alpha) / (4 * LN2)


def werner_ji(c: WernerConfig) -> float:
    """Joint irreality of the Werner triple, in bits."""
    rho_c, yx_c, xy_c = _werner_coeffs(c.theta)
    a = c.alpha
    num = _sum_excess(rho_c, a) - 0.5 * (_sum_excess(yx_c, a) + _sum_excess(xy_c, a))
    return max(num / (4 * LN2), 0.0)


def werner_ji_g_form(c: WernerConfig) -> float:
    """The same quantity written with G(u) = -u log2 u, as a cross-check.

    1/2 sum_eps [3 G(nu_eps) + G(lam_eps)] - G(1 + 3a)/4 - 3 G(1 - a)/4 - 2 with
    nu_eps = (2 + eps a (1 + cos 2t))/8 and lam_eps = (4 + eps a (1 + 2 cos 2t + cos 4t))/16.
    """
    a, t = c.alpha, c.theta
    total = 0.0
    for eps in (1.0, -1.0):
        nu = (2 + eps * a * (1 + math.cos(2 * t))) / 8
        la = (4 + eps * a * (1 + 2 * math.cos(2 * t) + math.cos(4 * t))) / 16
        total += 3 * G(nu) + G(la)
    return total / 2 - G(1 + 3 * a) / 4 - 3 * G(1 - a) / 4 - 2.0


def werner_ji_per_info_limit(theta: float) -> float:
    """alpha -> 0 limit of JI / I: 1 - cos^4 t (3 + cos^2 2t) / 12."""
    c4 = math.cos(theta) ** 4
    return 1.0 - c4 * (3.0 + math.cos(2 * theta) ** 2) / 12.0


def werner_ji_per_info(c: WernerConfig) -> float:
    """JI per unit information; the alpha = 0 point is the limiting value."""
    if c.alpha == 0.0:
        return werner_ji_per_info_limit(c.theta)
    rho_c, yx_c, xy_c = _werner_coeffs(c.theta)
    a = c.alpha
    deficit = _sum_excess(rho_c, a)
    return 1.0 - 0.5 * (_sum_excess(yx_c, a) + _sum_excess(xy_c, a)) / deficit


class CommutatorNorms(NamedTuple):
    x_rho: float
    y_rho: float
    y_phi_x_rho: float
    x_phi_y_rho: float


def werner_commutator_norms(c: WernerConfig) -> CommutatorNorms:
    """Stated Schatten norms ||[X, rho_W]||, ||[Y, rho_W]||, ||[Y, Phi_X(rho_W)]||, ||[X, Phi_Y(rho_W)]||.

    The last entry (stated as 0) only agrees with the matrix value at
    theta = pi/2; the first three hold everywhere.
    """
    s = math.sqrt(2.0) * c.alpha
    return CommutatorNorms(s, s, c.alpha * abs(math.sin(c.theta)), 0.0)


def werner_onesided_discord(alpha: float) -> float:
    """Average one-sided discord [2 G(1 + a) - G(1 - a) - G(1 + 3a)] / 4 (theta independent)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    # same value through the excess function, stable near alpha = 0
    return max((xlog1p_excess(3 * alpha) + xlog1p_excess(-alpha) - 2 * xlog1p_excess(alpha)) / (4 * LN2), 0.0)


def werner_onesided_discord_g_form(alpha: float) -> float:
    return (2 * G(1 + alpha) - G(1 - alpha) - G(1 + 3 * alpha)) / 4
