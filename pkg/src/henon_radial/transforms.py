"""Coordinate changes of the radial equation and their residual oracles.

Three maps, each with its inverse and a centered-difference residual:

  EmdenFowler  s = r^beta, v(s) = u(r), beta = (p-N)/(p-1) < 0, for p < N;
               maps r in (0,1] to s in [1,oo) and turns the equation into
               (p-1)|v'|^{p-2} v'' + s^sigma v^q / |beta|^p = 0 with
               sigma = ((1-beta)/beta) p + alpha/beta.
  LogDelta     s = -ln r, w(s) = r^delta u(r); autonomous form
               |w' + delta w|^{p-2} (a1 w + a2 w' + a3 w'') + w^q = 0.
  LogPN        p = N only: s = -ln r, v(s) = u(r);
               (N-1)|v'|^{N-2} v'' + e^{-s(N+alpha)} v^q = 0.

Derivatives in transformed coordinates come from the exact chain rule
applied to the flux samples, never from re-differencing u, and the s grids
are images of the r grid, so round trips are exact up to floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .numerics import diff1, fit_loglog_slope, phi, phi_inv
from .params import ProblemParams, Regime, classify_regime, compute_exponents, fundamental_solution
from .radial import RadialSolution
from . import serialize

__all__ = [
    "Kind",
    "TransformedProfile",
    "to_emden_fowler",
    "from_emden_fowler",
    "to_log_delta",
    "from_log_delta",
    "to_log_pn",
    "from_log_pn",
    "ef_residual",
    "log_residual",
    "pn_residual",
    "apriori_rate_check",
    "AprioriReport",
    "critical_integral_check",
    "CriticalIntegralReport",
]


class Kind(Enum):
    EMDEN_FOWLER = "EmdenFowler"
    LOG_DELTA = "LogDelta"
    LOG_PN = "LogPN"


@dataclass
class TransformedProfile:
    """A profile in transformed coordinates: (s, value, value') with a kind tag."""

    kind: Kind
    s: np.ndarray
    value: np.ndarray
    dvalue: np.ndarray

    def __post_init__(self) -> None:
        self.s = np.asarray(self.s, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        self.dvalue = np.asarray(self.dvalue, dtype=float)
        if not (self.s.size == self.value.size == self.dvalue.size):
            raise ValueError("s, value, dvalue must have equal length")
        if self.s.size >= 2 and np.any(np.diff(self.s) <= 0.0):
            raise ValueError("s must be strictly increasing")

    def to_json(self) -> str:
        return serialize.dumps(
            {
                "schema": serialize.SCHEMA_VERSION,
                "type": "transformed_profile",
                "kind": self.kind.value,
                "s": self.s,
                "value": self.value,
                "dvalue": self.dvalue,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "TransformedProfile":
        obj = serialize.loads(text)
        if obj.get("type") != "transformed_profile":
            raise ValueError(f"not a transformed_profile document: {obj.get('type')!r}")
        return cls(Kind(obj["kind"]), np.asarray(obj["s"]), np.asarray(obj["value"]),
                   np.asarray(obj["dvalue"]))

    def to_csv(self) -> str:
        return serialize.csv_lines(("s", "value", "dvalue"),
                                   (self.s, self.value, self.dvalue),
                                   comments=(f"kind={self.kind.value}",))

    @classmethod
    def from_csv(cls, text: str, kind: Kind | None = None) -> "TransformedProfile":
        header, cols, meta = serialize.parse_csv(text)
        if header[:3] != ["s", "value", "dvalue"]:
            raise ValueError(f"expected columns s,value,dvalue, got {header}")
        k = kind or Kind(meta.get("kind", ""))
        return cls(k, cols["s"], cols["value"], cols["dvalue"])


def _require_kind(profile: TransformedProfile, kind: Kind) -> None:
    if profile.kind is not kind:
        raise ValueError(f"expected {kind.value} profile, got {profile.kind.value}")


def _inner_portion(sol: RadialSolution, r_max: float):
    mask = sol.r <= r_max
    if mask.sum() < 3:
        raise ValueError(f"need >= 3 samples with r <= {r_max}")
    return sol.r[mask], sol.u[mask], sol.u_prime()[mask]


def to_emden_fowler(sol: RadialSolution) -> TransformedProfile:
    """Map the r <= 1 portion of a radial solution to s = r^beta coordinates."""
    if sol.params.p >= sol.params.N:
        raise ValueError("Emden-Fowler transform requires p < N")
    es = compute_exponents(sol.params)
    beta = es.beta
    r, u, du = _inner_portion(sol, 1.0)
    s = r**beta
    dv = du * r ** (1.0 - beta) / beta
    order = np.argsort(s)
    return TransformedProfile(Kind.EMDEN_FOWLER, s[order], u[order], dv[order])


def from_emden_fowler(profile: TransformedProfile, params: ProblemParams
                      ) -> RadialSolution:
    """Inverse of to_emden_fowler: r = s^{1/beta}, u' = v' beta r^{beta-1}."""
    _require_kind(profile, Kind.EMDEN_FOWLER)
    if params.p >= params.N:
        raise ValueError("Emden-Fowler transform requires p < N")
    beta = compute_exponents(params).beta
    r = profile.s ** (1.0 / beta)
    du = profile.dvalue * beta * r ** (beta - 1.0)
    F = r ** (params.N - 1.0) * phi(du, params.p)
    order = np.argsort(r)
    return RadialSolution(params, r[order], profile.value[order], F[order],
                          {"kind": "from_emden_fowler"})


def to_log_delta(sol: RadialSolution, params: ProblemParams | None = None
                 ) -> TransformedProfile:
    """Map the r < 1 portion to s = -ln r, w = r^delta u."""
    params = params or sol.params
    delta = compute_exponents(params).delta
    r, u, du = _inner_portion(sol, 1.0 - 1e-12)
    s = -np.log(r)
    w = r**delta * u
    dw = -delta * w - r ** (delta + 1.0) * du
    order = np.argsort(s)
    return TransformedProfile(Kind.LOG_DELTA, s[order], w[order], dw[order])


def from_log_delta(profile: TransformedProfile, params: ProblemParams
                   ) -> RadialSolution:
    """Inverse of to_log_delta: u = e^{delta s} w, u' = -(w'+delta w) e^{(delta+1)s}."""
    _require_kind(profile, Kind.LOG_DELTA)
    delta = compute_exponents(params).delta
    r = np.exp(-profile.s)
    u = profile.value * r ** (-delta)
    du = -(profile.dvalue + delta * profile.value) * r ** (-delta - 1.0)
    F = r ** (params.N - 1.0) * phi(du, params.p)
    order = np.argsort(r)
    return RadialSolution(params, r[order], u[order], F[order],
                          {"kind": "from_log_delta"})


def to_log_pn(sol: RadialSolution) -> TransformedProfile:
    """Map a p = N solution to s = -ln r, v = u."""
    if sol.params.p != sol.params.N:
        raise ValueError("LogPN transform requires p = N")
    r, u, du = sol.r, sol.u, sol.u_prime()
    s = -np.log(r)
    dv = -r * du
    order = np.argsort(s)
    return TransformedProfile(Kind.LOG_PN, s[order], u[order], dv[order])


def from_log_pn(profile: TransformedProfile, params: ProblemParams) -> RadialSolution:
    """Inverse of to_log_pn; the flux is -Phi(v') directly."""
    _require_kind(profile, Kind.LOG_PN)
    if params.p != params.N:
        raise ValueError("LogPN transform requires p = N")
    r = np.exp(-profile.s)
    F = -phi(profile.dvalue, params.p)
    order = np.argsort(r)
    return RadialSolution(params, r[order], profile.value[order], F[order],
                          {"kind": "from_log_pn"})


def ef_residual(profile: TransformedProfile, params: ProblemParams) -> np.ndarray:
    """Residual of (p-1)|v'|^{p-2} v'' + s^sigma v^q / |beta|^p at interior nodes,
    normalized by max(1, |source|)."""
    _require_kind(profile, Kind.EMDEN_FOWLER)
    if params.p >= params.N:
        raise ValueError("Emden-Fowler residual requires p < N")
    es = compute_exponents(params)
    beta, p, q, alpha = es.beta, params.p, params.q, params.alpha
    sigma = ((1.0 - beta) / beta) * p + alpha / beta
    s, v, dv = profile.s, profile.value, profile.dvalue
    d2 = diff1(s, dv)
    src = s**sigma * np.clip(v, 0.0, None) ** q / abs(beta) ** p
    res = ((p - 1.0) * np.abs(dv) ** (p - 2.0) * d2 + src) / np.maximum(1.0, np.abs(src))
    return res[1:-1]


def log_residual(profile: TransformedProfile, params: ProblemParams) -> np.ndarray:
    """Residual of |w'+delta w|^{p-2}(a1 w + a2 w' + a3 w'') + w^q at interior
    nodes, normalized by max(1, w^q)."""
    _require_kind(profile, Kind.LOG_DELTA)
    es = compute_exponents(params)
    p = params.p
    s, w, dw = profile.s, profile.value, profile.dvalue
    d2 = diff1(s, dw)
    weight = np.abs(dw + es.delta * w) ** (p - 2.0)
    src = np.clip(w, 0.0, None) ** params.q
    res = (weight * (es.a1 * w + es.a2 * dw + es.a3 * d2) + src) / np.maximum(1.0, src)
    return res[1:-1]


def pn_residual(profile: TransformedProfile, params: ProblemParams) -> np.ndarray:
    """Residual of (N-1)|v'|^{N-2} v'' + e^{-s(N+alpha)} v^q (p = N branch)."""
    _require_kind(profile, Kind.LOG_PN)
    if params.p != params.N:
        raise ValueError("pn_residual requires p = N")
    N, q, alpha = params.N, params.q, params.alpha
    s, v, dv = profile.s, profile.value, profile.dvalue
    d2 = diff1(s, dv)
    src = np.exp(-s * (N + alpha)) * np.clip(v, 0.0, None) ** q
    res = ((N - 1.0) * np.abs(dv) ** (N - 2.0) * d2 + src) / np.maximum(1.0, np.abs(src))
    return res[1:-1]


@dataclass
class AprioriReport:
    """Sup of the regime-appropriate normalized quantities over the innermost
    decade, with boundedness flags from the two-decade log-log trend."""

    regime: Regime
    window: tuple[float, float]
    mu_ratio_sup: float
    mu_ratio_bounded: bool
    crit_ratio_sup: float | None
    crit_ratio_bounded: bool | None
    delta_ratio_sup: float | None
    delta_ratio_bounded: bool | None


def _trend_bounded(r: np.ndarray, qty: np.ndarray, slack: float = 0.02) -> bool:
    # bounded toward r -> 0 means qty ~ r^sigma with sigma >= 0 (up to slack)
    good = qty > 0.0
    if good.sum() < 4:
        return False
    slope, _ = fit_loglog_slope(r[good], qty[good])
    return slope >= -slack


def apriori_rate_check(sol: RadialSolution, params: ProblemParams | None = None
                       ) -> AprioriReport:
    """Check the inner-decay bounds appropriate to the regime.

    Requires at least two sampled decades approaching the origin with
    r < 1. Bounds checked: u/mu <= C always; the log-corrected ratio in the
    critical regime; r^delta u <= C when q is supercritical. Sups are taken
    over the innermost decade, boundedness from the innermost two decades.
    """
    params = params or sol.params
    es = compute_exponents(params)
    mask = sol.r < 1.0
    r, u = sol.r[mask], sol.u[mask]
    if r.size < 8 or r[-1] / r[0] < 99.0:
        raise ValueError("apriori_rate_check needs >= 2 sampled decades below r = 1")
    two = r <= r[0] * 100.0
    one = r <= r[0] * 10.0
    mu, _ = fundamental_solution(params, r)
    ratio_mu = u / mu
    regime = classify_regime(params)

    crit_sup = crit_bounded = None
    delta_sup = delta_bounded = None
    if regime is Regime.CRITICAL:
        expo = (params.N - params.p) / ((params.p - 1.0) * (params.p + params.alpha))
        ratio_c = ratio_mu * np.log(1.0 / r) ** expo
        crit_sup = float(ratio_c[one].max())
        crit_bounded = _trend_bounded(r[two], ratio_c[two])
    if es.q_serrin is not None and params.q > es.q_serrin:
        ratio_d = r**es.delta * u
        delta_sup = float(ratio_d[one].max())
        delta_bounded = _trend_bounded(r[two], ratio_d[two])

    return AprioriReport(
        regime=regime,
        window=(float(r[0]), float(r[one][-1])),
        mu_ratio_sup=float(ratio_mu[one].max()),
        mu_ratio_bounded=_trend_bounded(r[two], ratio_mu[two]),
        crit_ratio_sup=crit_sup,
        crit_ratio_bounded=crit_bounded,
        delta_ratio_sup=delta_sup,
        delta_ratio_bounded=delta_bounded,
    )


@dataclass
class CriticalIntegralReport:
    """Comparison of (w'+delta w)^{p-1} against the tail integral of w^q.

    The tail beyond the data boundary is extrapolated with a fitted power
    model w ~ A s^{-k} over the last sampled decade; max_rel_dev is the
    worst pointwise relative deviation over the evaluation window and
    truncation_fraction the largest share the extrapolated tail contributes.
    """

    window: tuple[float, float]
    max_rel_dev: float
    truncation_fraction: float
    tail_model: str
    tail_amplitude: float
    tail_exponent: float


def critical_integral_check(profile: TransformedProfile, params: ProblemParams,
                            t_window: tuple[float, float] | None = None
                            ) -> CriticalIntegralReport:
    """Check (w'(t) + delta w(t))^{p-1} = integral_t^oo w^q ds on a LogDelta profile."""
    _require_kind(profile, Kind.LOG_DELTA)
    es = compute_exponents(params)
    s, w, dw = profile.s, profile.value, profile.dvalue
    if s.size < 16:
        raise ValueError("critical_integral_check needs >= 16 samples")

    # tail model from the last sampled decade of s
    tail_mask = s >= s[-1] / 10.0
    k, lnA = fit_loglog_slope(s[tail_mask], np.clip(w[tail_mask], 1e-300, None))
    k = -k
    A = float(np.exp(lnA))
    kq = k * params.q
    tail_beyond = A ** params.q * s[-1] ** (1.0 - kq) / (kq - 1.0) if kq > 1.0 else np.inf

    wq = np.clip(w, 0.0, None) ** params.q
    # cumulative integral from each node to the data boundary (trapezoid)
    seg = 0.5 * (wq[1:] + wq[:-1]) * np.diff(s)
    tail_to_end = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    rhs = tail_to_end + tail_beyond
    lhs = np.clip(dw + es.delta * w, 0.0, None) ** (params.p - 1.0)

    if t_window is None:
        t_window = (s[0], s[-1] / 2.0)
    sel = (s >= t_window[0]) & (s <= t_window[1])
    if sel.sum() < 4:
        raise ValueError("evaluation window contains too few samples")
    dev = np.abs(lhs[sel] - rhs[sel]) / np.maximum(rhs[sel], 1e-300)
    frac = tail_beyond / np.maximum(rhs[sel].min(), 1e-300)
    return CriticalIntegralReport(
        window=(float(t_window[0]), float(t_window[1])),
        max_rel_dev=float(dev.max()),
        truncation_fraction=float(frac),
        tail_model="power: w ~ A s^-k fitted on the last decade",
        tail_amplitude=A,
        tail_exponent=k,
    )
