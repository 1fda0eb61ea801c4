"""Problem parameters, regime classification, and closed-form constants.

The equation under study is

    -div(|Du|^{p-2} Du) = |x|^alpha u^q        (radial, positive solutions)

on a domain in R^N. Everything derivable in closed form from the quadruple
(N, p, q, alpha) lives here: the two critical exponents in q, the
logarithmic-variable coefficients, the singular-profile amplitude, the
critical-rate constant, and the fundamental solution of -div(|Du|^{p-2}Du)
= delta_0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ProblemParams",
    "Regime",
    "ExponentSet",
    "surface_area",
    "compute_exponents",
    "classify_regime",
    "fundamental_solution",
    "dirac_coefficient",
    "dirac_mass_from_mu_ratio",
]


class Regime(Enum):
    """Position of q relative to the two critical exponents (p < N), or p = N."""

    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"
    SUPERCRITICAL_BEYOND_SOBOLEV = "SupercriticalBeyondSobolev"
    P_EQUALS_N = "PEqualsN"


@dataclass(frozen=True)
class ProblemParams:
    """The quadruple (N, p, q, alpha), validated on construction.

    Admissibility: N >= 2 integer, 1 < p <= N, q > p - 1, alpha > -min(p, N)
    and N + alpha > 0. A negative alpha is accepted with a warning: the
    weight is then singular at the origin and the shooting startup relies
    on integrability of r^{N-1+alpha}.
    """

    N: int
    p: float
    q: float
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool):
            raise ValueError(f"N must be an integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.N < 2:
            raise ValueError(f"dimension invariant N >= 2 violated: N={self.N}")
        if not (1.0 < self.p <= self.N):
            raise ValueError(
                f"operator exponent invariant 1 < p <= N violated: p={self.p}, N={self.N}"
            )
        if not self.q > self.p - 1.0:
            raise ValueError(
                f"source exponent invariant q > p-1 violated: q={self.q}, p-1={self.p - 1.0}"
            )
        if not self.alpha > -min(self.p, float(self.N)):
            raise ValueError(
                f"weight invariant alpha > -min(p, N) violated: alpha={self.alpha}"
            )
        if not self.N + self.alpha > 0.0:
            raise ValueError(
                f"weight invariant N + alpha > 0 violated: N={self.N}, alpha={self.alpha}"
            )
        if self.alpha < 0.0:
            warnings.warn(
                f"alpha={self.alpha} < 0: the weight |x|^alpha is singular at the "
                "origin; startup expansions assume N + alpha > 0 only",
                UserWarning,
                stacklevel=2,
            )


def surface_area(N: int) -> float:
    """Area of the unit sphere S^{N-1}: 2 pi^{N/2} / Gamma(N/2).

    Evaluated through half-integer Gamma closed forms so integer dimensions
    give bit-stable products of pi and rationals.
    """
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise ValueError(f"surface_area needs an integer N >= 2, got {N!r}")
    N = int(N)
    if N % 2 == 0:
        # Gamma(N/2) = (N/2 - 1)!
        return 2.0 * math.pi ** (N // 2) / math.factorial(N // 2 - 1)
    # N odd: Gamma(k + 1/2) = sqrt(pi) (2k)! / (4^k k!) with k = (N-1)/2
    k = (N - 1) // 2
    return 2.0 * math.pi**k * 4**k * math.factorial(k) / math.factorial(2 * k)


@dataclass(frozen=True)
class ExponentSet:
    """Derived exponents and constants for one parameter quadruple.

    beta            (p-N)/(p-1), rate of the fundamental solution (None if p=N)
    delta           (p+alpha)/(q+1-p), rate of the fast singular profile
    gamma           ((1-beta)/beta) p + alpha/beta + q, weight exponent of the
                    transformed first-order inequality (None if p=N)
    q_serrin        (N+alpha)(p-1)/(N-p), fundamental/fast-rate threshold
    q_sobolev       (N+alpha)p/(N-p) - 1, upper edge of the nonexistence range
    c1              (p-1)(delta+1) - (N-1)
    a1, a2, a3      delta*c1, (p-1)*delta + c1, p-1: coefficients of the
                    autonomous equation |w'+delta w|^{p-2}(a1 w + a2 w' + a3 w'')
                    + w^q = 0 in s = -ln r, w = r^delta u
    lam             amplitude of the exact singular profile lam * r^{-delta};
                    defined iff q > q_serrin (JSON key "lambda")
    crit_log_const  limit constant of the critical log-corrected rate
    omega           area of the unit sphere S^{N-1}
    """

    beta: float | None
    delta: float
    gamma: float | None
    q_serrin: float | None
    q_sobolev: float | None
    c1: float
    a1: float
    a2: float
    a3: float
    lam: float | None
    crit_log_const: float | None
    omega: float


def compute_exponents(params: ProblemParams) -> ExponentSet:
    """Evaluate every closed-form constant of the problem.

    For p = N the power-law quantities (beta, gamma, q_serrin, q_sobolev,
    crit_log_const, lam) are undefined and returned as None.
    """
    N, p, q, alpha = params.N, params.p, params.q, params.alpha
    omega = surface_area(N)
    delta = (p + alpha) / (q + 1.0 - p)
    c1 = (p - 1.0) * (delta + 1.0) - (N - 1.0)
    a1 = delta * c1
    a2 = (p - 1.0) * delta + c1
    a3 = p - 1.0

    if p == N:
        return ExponentSet(
            beta=None,
            delta=delta,
            gamma=None,
            q_serrin=None,
            q_sobolev=None,
            c1=c1,
            a1=a1,
            a2=a2,
            a3=a3,
            lam=None,
            crit_log_const=None,
            omega=omega,
        )

    beta = (p - N) / (p - 1.0)
    gamma = ((1.0 - beta) / beta) * p + alpha / beta + q
    q_serrin = (N + alpha) * (p - 1.0) / (N - p)
    q_sobolev = (N + alpha) * p / (N - p) - 1.0

    # lam^{q+1-p} = delta^{p-1} (N - (pq + alpha(p-1))/(q+1-p)); the bracket
    # is positive exactly when q > q_serrin.
    bracket = N - (p * q + alpha * (p - 1.0)) / (q + 1.0 - p)
    lam = (delta ** (p - 1.0) * bracket) ** (1.0 / (q + 1.0 - p)) if bracket > 0.0 else None

    kappa = (N - p) / ((p + alpha) * (p - 1.0))
    crit_log_const = (((N - p) / (p + alpha)) * ((N - p) / (p - 1.0)) ** (p - 1.0)) ** kappa

    return ExponentSet(
        beta=beta,
        delta=delta,
        gamma=gamma,
        q_serrin=q_serrin,
        q_sobolev=q_sobolev,
        c1=c1,
        a1=a1,
        a2=a2,
        a3=a3,
        lam=lam,
        crit_log_const=crit_log_const,
        omega=omega,
    )


def classify_regime(params: ProblemParams, tol: float = 1e-12) -> Regime:
    """Place q relative to the critical exponents.

    q within tol*max(1, |q_serrin|) of q_serrin counts as Critical, since q
    is user-supplied floating point.
    """
    if params.p == params.N:
        return Regime.P_EQUALS_N
    es = compute_exponents(params)
    assert es.q_serrin is not None and es.q_sobolev is not None
    if abs(params.q - es.q_serrin) <= tol * max(1.0, abs(es.q_serrin)):
        return Regime.CRITICAL
    if params.q < es.q_serrin:
        return Regime.SUBCRITICAL
    if params.q >= es.q_sobolev:
        return Regime.SUPERCRITICAL_BEYOND_SOBOLEV
    return Regime.SUPERCRITICAL


def fundamental_solution(params: ProblemParams, r):
    """Radial fundamental solution mu of -div(|Du|^{p-2}Du) = delta_0, and mu'.

    Two branches:
        p < N:  mu = (p-1)/(N-p) * omega^{-1/(p-1)} * r^{(p-N)/(p-1)}
        p = N:  mu = omega^{-1/(N-1)} * ln(1/r)

    Accepts a scalar or array r > 0; returns (value, derivative).
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0):
        raise ValueError("fundamental_solution needs r > 0")
    N, p = params.N, params.p
    omega = surface_area(N)
    if p < N:
        beta = (p - N) / (p - 1.0)
        coef = (p - 1.0) / (N - p) * omega ** (-1.0 / (p - 1.0))
        mu = coef * r_arr**beta
        dmu = -(omega ** (-1.0 / (p - 1.0))) * r_arr ** ((1.0 - N) / (p - 1.0))
    else:
        coef = omega ** (-1.0 / (N - 1.0))
        mu = coef * np.log(1.0 / r_arr)
        dmu = -coef / r_arr
    if mu.ndim == 0:
        return float(mu), float(dmu)
    return mu, dmu


def dirac_coefficient(params: ProblemParams, C: float) -> float:
    """Dirac-delta coefficient (C (N-p)/(p-1))^{p-1} omega_{N-1}.

    Here C is the limiting slope of the solution in the s = r^{(p-N)/(p-1)}
    coordinate (equivalently lim -r^{N-1}|u'|^{p-2}u' = this value / omega).
    A solution behaving like K * mu has slope C = K * (p-1)/(N-p) *
    omega^{-1/(p-1)}, so its mass is K^{p-1}; see dirac_mass_from_mu_ratio.
    """
    if not C > 0.0:
        raise ValueError(f"dirac_coefficient needs C > 0, got {C}")
    if params.p >= params.N:
        raise ValueError("dirac_coefficient is defined for p < N only")
    N, p = params.N, params.p
    return (C * (N - p) / (p - 1.0)) ** (p - 1.0) * surface_area(N)


def dirac_mass_from_mu_ratio(params: ProblemParams, C: float) -> float:
    """Distributional mass of a solution with u/mu -> C at the origin.

    This is dirac_coefficient evaluated at the slope corresponding to C*mu,
    which collapses algebraically to C^{p-1}.
    """
    if not C > 0.0:
        raise ValueError(f"dirac_mass_from_mu_ratio needs C > 0, got {C}")
    if params.p >= params.N:
        raise ValueError("dirac_mass_from_mu_ratio is defined for p < N only")
    N, p = params.N, params.p
    omega = surface_area(N)
    slope = C * (p - 1.0) / (N - p) * omega ** (-1.0 / (p - 1.0))
    return dirac_coefficient(params, slope)
