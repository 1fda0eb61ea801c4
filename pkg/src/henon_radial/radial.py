"""Flux-form radial integration of (r^{N-1} Phi(u'))' + r^{N-1+alpha} u^q = 0.

State variables are (u, F) with F = r^{N-1} Phi(u') and Phi(t) = |t|^{p-2} t.
The flux form confines the non-Lipschitz map Phi^{-1} (degenerate at u' = 0
for p > 2, singular for p < 2) to the single place it is needed, keeping the
integrator's vector field continuous.

Provides the regular shoot with a series startup, the exterior problem, the
exact fast-rate singular profile lam * r^{-delta}, the scaling map, and the
centered-difference residual oracle that every other module leans on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .numerics import NumericalError, diff1, phi, phi_inv
from .params import ProblemParams, compute_exponents
from . import serialize

__all__ = [
    "Terminal",
    "ToleranceConfig",
    "RadialSolution",
    "ShootResult",
    "EnvelopeReport",
    "shoot_regular",
    "integrate_exterior",
    "exterior_envelope",
    "exact_singular_solution",
    "rescale_solution",
    "ode_residual",
    "solution_from_values",
]


class Terminal(Enum):
    REACHED_RMAX = "ReachedRMax"
    HIT_ZERO = "HitZero"
    BLOW_UP = "BlowUp"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass
class ToleranceConfig:
    """Integrator and event tolerances (shared by radial and phase orbits)."""

    rtol: float = 1e-10
    atol: float = 1e-12
    blow_up: float = 1e12
    first_zero_abs: float = 1e-12
    startup_rel: float = 1e-8
    samples_per_decade: int = 1600
    min_samples: int = 800


@dataclass
class RadialSolution:
    """A sampled radial profile (r, u, flux) with integration metadata.

    flux[i] = r^{N-1} |u'|^{p-2} u' at r[i]; u' is recovered through
    u'(r) = Phi^{-1}(flux * r^{1-N}). The optional interpolant evaluates
    (u, u') at arbitrary radii inside the sampled span (dense integrator
    output or exact closed form); it is not serialized.
    """

    params: ProblemParams
    r: np.ndarray
    u: np.ndarray
    flux: np.ndarray
    meta: dict = field(default_factory=dict)
    interpolant: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        self.r = np.asarray(self.r, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.flux = np.asarray(self.flux, dtype=float)
        if self.r.ndim != 1 or self.r.size != self.u.size or self.r.size != self.flux.size:
            raise ValueError("r, u, flux must be 1-d arrays of equal length")
        if self.r.size and (np.any(self.r <= 0.0) or np.any(np.diff(self.r) <= 0.0)):
            raise ValueError("r must be strictly increasing and positive")
        if self.r.size and not (
            np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.flux))
        ):
            raise ValueError("u and flux must be finite at every sample")

    def u_prime(self) -> np.ndarray:
        """Derivative samples recovered from the flux."""
        return phi_inv(self.flux * self.r ** (1.0 - self.params.N), self.params.p)

    def eval(self, r) -> tuple[np.ndarray, np.ndarray]:
        """(u, u') at radii r, via the dense interpolant or a log-space spline."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if self.interpolant is not None:
            u, du = self.interpolant(r_arr)
        else:
            if not hasattr(self, "_spline"):
                x = np.log(self.r)
                object.__setattr__(self, "_spline", (CubicSpline(x, self.u),
                                                     CubicSpline(x, self.flux)))
            su, sf = self._spline
            x = np.log(r_arr)
            u = su(x)
            du = phi_inv(sf(x) * r_arr ** (1.0 - self.params.N), self.params.p)
        if np.ndim(r) == 0:
            return float(u[0]), float(du[0])
        return u, du

    # --- serialization -------------------------------------------------

    def to_json(self) -> str:
        return serialize.dumps(
            {
                "schema": serialize.SCHEMA_VERSION,
                "type": "radial_solution",
                "params": {
                    "N": self.params.N,
                    "p": self.params.p,
                    "q": self.params.q,
                    "alpha": self.params.alpha,
                },
                "r": self.r,
                "u": self.u,
                "flux": self.flux,
                "meta": self.meta,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "RadialSolution":
        obj = serialize.loads(text)
        if obj.get("type") != "radial_solution":
            raise ValueError(f"not a radial_solution document: {obj.get('type')!r}")
        pd = obj["params"]
        params = ProblemParams(int(pd["N"]), pd["p"], pd["q"], pd["alpha"])
        return cls(
            params=params,
            r=np.asarray(obj["r"], dtype=float),
            u=np.asarray(obj["u"], dtype=float),
            flux=np.asarray(obj["flux"], dtype=float),
            meta=obj.get("meta", {}),
        )

    def to_csv(self) -> str:
        return serialize.csv_lines(("r", "u", "flux"), (self.r, self.u, self.flux))

    @classmethod
    def from_csv(cls, text: str, params: ProblemParams, meta: dict | None = None
                 ) -> "RadialSolution":
        header, cols, _ = serialize.parse_csv(text)
        if header[:3] != ["r", "u", "flux"]:
            raise ValueError(f"expected columns r,u,flux, got {header}")
        return cls(params=params, r=cols["r"], u=cols["u"], flux=cols["flux"],
                   meta=meta or {})


@dataclass
class ShootResult:
    """Outcome of a regular shoot: the solution, its first zero if any, and
    how the integration ended."""

    solution: RadialSolution
    first_zero: float | None
    terminal: Terminal


@dataclass
class EnvelopeReport:
    """Fitted two-sided envelope c1 * mu(r) <= u(r) <= c2 * r^{-delta} over a
    tail window of an exterior solution."""

    c1: float
    c2: float
    window: tuple[float, float]
    lower_holds: bool
    upper_holds: bool


def _vector_field(params: ProblemParams):
    N, p, q, alpha = params.N, params.p, params.q, params.alpha

    def f(r, y):
        u, F = y
        du = phi_inv(F * r ** (1.0 - N), p)
        dF = -(r ** (N - 1.0 + alpha)) * max(u, 0.0) ** q
        return (du, dF)

    return f


def _startup_state(params: ProblemParams, u0: float, r: float) -> tuple[float, float]:
    """Leading-order series at small r from the flux balance:
    F = -u0^q r^{N+alpha}/(N+alpha), u = u0 - kappa (p-1)/(p+alpha) r^{(p+alpha)/(p-1)}
    with kappa = (u0^q/(N+alpha))^{1/(p-1)}."""
    N, p, q, alpha = params.N, params.p, params.q, params.alpha
    kappa = (u0**q / (N + alpha)) ** (1.0 / (p - 1.0))
    u = u0 - kappa * (p - 1.0) / (p + alpha) * r ** ((p + alpha) / (p - 1.0))
    F = -(u0**q) * r ** (N + alpha) / (N + alpha)
    return u, F


def _sample_grid(r_lo: float, r_hi: float, tol: ToleranceConfig) -> np.ndarray:
    decades = max(np.log10(r_hi / r_lo), 0.1)
    n = max(tol.min_samples, int(tol.samples_per_decade * decades) + 1)
    return np.geomspace(r_lo, r_hi, n)


def _integrate(params: ProblemParams, r0: float, y0, r_max: float,
               tol: ToleranceConfig):
    """Run the flux-form integration with zero-crossing and blow-up events."""
    f = _vector_field(params)

    def ev_zero(r, y):
        return y[0]

    ev_zero.terminal = True
    ev_zero.direction = -1.0

    def ev_blow(r, y):
        return tol.blow_up - abs(y[0])

    ev_blow.terminal = True
    ev_blow.direction = -1.0

    sol = solve_ivp(
        f,
        (r0, r_max),
        y0,
        method="RK45",
        rtol=tol.rtol,
        atol=tol.atol,
        dense_output=True,
        events=(ev_zero, ev_blow),
    )
    return sol


def _refine_first_zero(dense, r_lo: float, r_hi: float, tol: ToleranceConfig) -> float:
    """Bisection on the dense output: u > 0 at r_lo, u <= 0 at r_hi."""
    lo, hi = r_lo, r_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        um = dense(mid)[0]
        if um > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol.first_zero_abs and abs(um) <= tol.first_zero_abs:
            break
        if hi - lo <= np.spacing(hi) * 4:
            break
    return 0.5 * (lo + hi)


def _dense_interpolant(params: ProblemParams, dense, lo: float, hi: float):
    N, p = params.N, params.p

    def ev(r_arr):
        rr = np.clip(np.asarray(r_arr, dtype=float), lo, hi)
        y = dense(rr)
        u = y[0]
        du = phi_inv(y[1] * rr ** (1.0 - N), p)
        return u, du

    return ev


def shoot_regular(
    params: ProblemParams,
    u0: float,
    r_max: float,
    tol: ToleranceConfig | None = None,
) -> ShootResult:
    """Integrate the regular problem u(0) = u0, u'(0) = 0 outward to r_max.

    Starts at eps = 1e-6 * r_max with the leading-order series; the start is
    validated against a halved-eps restart (relative difference below
    tol.startup_rel) and eps is reduced until the check passes. Terminal
    events: first zero of u (bisection-refined), blow-up, step underflow.
    """
    tol = tol or ToleranceConfig()
    if u0 < 0.0:
        raise ValueError(f"shoot_regular needs u0 >= 0, got {u0}")
    if not r_max > 0.0:
        raise ValueError(f"shoot_regular needs r_max > 0, got {r_max}")

    if u0 == 0.0:
        r = _sample_grid(1e-6 * r_max, r_max, tol)
        z = np.zeros_like(r)
        meta = {"kind": "regular_shoot", "u0": 0.0, "terminal": Terminal.REACHED_RMAX.value,
                "first_zero": None, "epsilon": float(r[0]), "rtol": tol.rtol, "atol": tol.atol}
        sol = RadialSolution(params, r, z, z.copy(), meta,
                             interpolant=lambda rr: (np.zeros_like(rr), np.zeros_like(rr)))
        return ShootResult(sol, None, Terminal.REACHED_RMAX)

    # choose a validated startup radius
    eps = 1e-6 * r_max
    f = _vector_field(params)
    for _ in range(80):
        y_half = _startup_state(params, u0, eps / 2.0)
        probe = solve_ivp(f, (eps / 2.0, eps), y_half, method="RK45",
                          rtol=tol.rtol, atol=tol.atol)
        u_series = _startup_state(params, u0, eps)[0]
        if not probe.success:
            eps *= 0.5
            continue
        rel = abs(probe.y[0, -1] - u_series) / max(abs(u_series), 1e-300)
        if rel < tol.startup_rel and u_series > 0.0:
            break
        eps *= 0.5
        if eps < 1e-290 * r_max:
            raise NumericalError("startup validation failed: eps underflow")

    y0 = _startup_state(params, u0, eps)
    sol = _integrate(params, eps, y0, r_max, tol)

    if sol.status == -1:
        terminal = Terminal.STEP_UNDERFLOW
        r_end = sol.t[-1]
        first_zero = None
    elif sol.status == 1 and sol.t_events[0].size:
        terminal = Terminal.HIT_ZERO
        r_event = float(sol.t_events[0][0])
        # bracket from the last positive dense sample
        r_lo = sol.t[sol.t < r_event][-1] if np.any(sol.t < r_event) else eps
        while sol.sol(r_lo)[0] <= 0.0 and r_lo > eps:
            r_lo = max(eps, 0.5 * (r_lo + eps))
        if sol.sol(r_event)[0] > 0.0:
            first_zero = r_event
        else:
            first_zero = _refine_first_zero(sol.sol, r_lo, r_event, tol)
        r_end = first_zero
    elif sol.status == 1:
        terminal = Terminal.BLOW_UP
        r_end = float(sol.t_events[1][0])
        first_zero = None
    else:
        terminal = Terminal.REACHED_RMAX
        r_end = r_max
        first_zero = None

    grid = _sample_grid(eps, r_end, tol)
    grid[-1] = r_end
    y = sol.sol(grid)
    u, F = y[0].copy(), y[1].copy()
    # keep samples strictly positive before the first zero
    if terminal == Terminal.HIT_ZERO:
        pos = u > 0.0
        pos[-1] = True
        grid, u, F = grid[pos], u[pos], F[pos]
        u[-1] = max(u[-1], 0.0)

    meta = {
        "kind": "regular_shoot",
        "u0": float(u0),
        "terminal": terminal.value,
        "first_zero": first_zero,
        "epsilon": float(eps),
        "rtol": tol.rtol,
        "atol": tol.atol,
        "nfev": int(sol.nfev),
        "n_steps": int(sol.t.size),
    }
    out = RadialSolution(params, grid, u, F, meta,
                         interpolant=_dense_interpolant(params, sol.sol, eps, sol.t[-1]))
    return ShootResult(out, first_zero, terminal)


def integrate_exterior(
    params: ProblemParams,
    u1: float,
    du1: float,
    r_max: float,
    tol: ToleranceConfig | None = None,
    r_inner: float = 1.0,
) -> RadialSolution:
    """Integrate outward on [r_inner, r_max] from data (u, u') = (u1, du1).

    The inner radius defaults to 1. Blow-up or a zero crossing terminates
    the integration with the terminal state recorded in meta; the fitted
    tail envelope c1 mu <= u <= c2 r^{-delta} is available through
    exterior_envelope.
    """
    tol = tol or ToleranceConfig()
    if not u1 > 0.0:
        raise ValueError(f"integrate_exterior needs u1 > 0, got {u1}")
    if not (r_max > r_inner > 0.0):
        raise ValueError("integrate_exterior needs 0 < r_inner < r_max")

    F1 = r_inner ** (params.N - 1.0) * phi(du1, params.p)
    sol = _integrate(params, r_inner, (u1, F1), r_max, tol)

    if sol.status == -1:
        terminal = Terminal.STEP_UNDERFLOW
        r_end = sol.t[-1]
        first_zero = None
    elif sol.status == 1 and sol.t_events[0].size:
        terminal = Terminal.HIT_ZERO
        first_zero = float(sol.t_events[0][0])
        r_end = first_zero
    elif sol.status == 1:
        terminal = Terminal.BLOW_UP
        first_zero = None
        r_end = float(sol.t_events[1][0])
    else:
        terminal = Terminal.REACHED_RMAX
        first_zero = None
        r_end = r_max

    grid = _sample_grid(r_inner, r_end, tol)
    grid[-1] = r_end
    y = sol.sol(grid)
    meta = {
        "kind": "exterior",
        "u1": float(u1),
        "du1": float(du1),
        "r_inner": float(r_inner),
        "terminal": terminal.value,
        "first_zero": first_zero,
        "rtol": tol.rtol,
        "atol": tol.atol,
        "nfev": int(sol.nfev),
    }
    return RadialSolution(params, grid, y[0].copy(), y[1].copy(), meta,
                          interpolant=_dense_interpolant(params, sol.sol, r_inner, sol.t[-1]))


def exterior_envelope(sol: RadialSolution, r_lo: float = 10.0) -> EnvelopeReport:
    """Fit the tail envelope constants on [r_lo, r_max] of an exterior solution.

    c1 = min u/mu and c2 = max u r^delta over the window; the bounds "hold"
    when both fitted constants are positive/finite and the window ratios stay
    within a factor 10 between the window's two halves (no drift to 0 or
    infinity at this scale).
    """
    from .params import fundamental_solution

    es = compute_exponents(sol.params)
    mask = sol.r >= r_lo
    if mask.sum() < 8:
        raise ValueError(f"exterior_envelope needs >= 8 samples beyond r = {r_lo}")
    r, u = sol.r[mask], sol.u[mask]
    mu, _ = fundamental_solution(sol.params, r)
    ratio_low = u / mu
    ratio_high = u * r**es.delta
    c1 = float(ratio_low.min())
    c2 = float(ratio_high.max())
    half = r.size // 2
    def stable(x):
        a = float(np.median(x[:half]))
        b = float(np.median(x[half:]))
        return max(a, b) <= 10.0 * min(a, b) if min(a, b) > 0 else False
    return EnvelopeReport(
        c1=c1,
        c2=c2,
        window=(float(r[0]), float(r[-1])),
        lower_holds=c1 > 0.0 and stable(ratio_low),
        upper_holds=np.isfinite(c2) and stable(ratio_high),
    )


def exact_singular_solution(params: ProblemParams, r=None,
                            r_min: float = 1e-3, r_max: float = 10.0,
                            n: int = 4000) -> RadialSolution:
    """The exact profile u = lam * r^{-delta} sampled with exact flux values.

    Defined only when q is above the fundamental/fast-rate threshold (lam
    exists); flux = -(lam delta)^{p-1} r^{N-p-delta(p-1)}.
    """
    es = compute_exponents(params)
    if es.lam is None:
        raise ValueError(
            "exact singular profile undefined: q must exceed the Serrin "
            f"exponent {es.q_serrin} (got q={params.q})"
        )
    lam, delta = es.lam, es.delta
    N, p = params.N, params.p
    r_arr = np.geomspace(r_min, r_max, n) if r is None else np.asarray(r, dtype=float)
    if r_arr.ndim != 1 or np.any(r_arr <= 0.0):
        raise ValueError("grid must be 1-d with r > 0")
    m = N - p - delta * (p - 1.0)
    u = lam * r_arr ** (-delta)
    F = -((lam * delta) ** (p - 1.0)) * r_arr**m

    def interp(rr):
        rr = np.asarray(rr, dtype=float)
        return lam * rr ** (-delta), -lam * delta * rr ** (-delta - 1.0)

    meta = {"kind": "exact_singular", "lambda": lam, "delta": delta}
    return RadialSolution(params, r_arr, u, F, meta, interpolant=interp)


def rescale_solution(params: ProblemParams, sol: RadialSolution, theta: float
                     ) -> RadialSolution:
    """Scaling map (r, u) -> (r/theta, theta^delta u); solutions map to solutions.

    The flux picks up theta^{(delta+1)(p-1)+1-N}; the exact singular profile
    is a fixed point.
    """
    if not theta > 0.0:
        raise ValueError(f"rescale_solution needs theta > 0, got {theta}")
    es = compute_exponents(params)
    delta = es.delta
    N, p = params.N, params.p
    flux_pow = (delta + 1.0) * (p - 1.0) + 1.0 - N
    r_new = sol.r / theta
    u_new = theta**delta * sol.u
    f_new = theta**flux_pow * sol.flux
    meta = dict(sol.meta)
    meta["rescaled_by"] = float(theta)

    inner = sol.interpolant
    interp = None
    if inner is not None:
        def interp(rr):
            rr = np.asarray(rr, dtype=float)
            u, du = inner(theta * rr)
            return theta**delta * u, theta ** (delta + 1.0) * du

    return RadialSolution(params, r_new, u_new, f_new, meta, interpolant=interp)


def ode_residual(sol: RadialSolution) -> np.ndarray:
    """Pointwise normalized residual of the flux equation at interior samples.

    residual_i = (F'(r_i) + r_i^{N-1+alpha} u_i^q) / max(1, |r_i^{N-1+alpha} u_i^q|)
    with F' from three-point differencing of the flux samples. The zero
    profile returns an identically zero residual.
    """
    if sol.r.size < 5:
        raise ValueError(f"ode_residual needs >= 5 samples, got {sol.r.size}")
    N, q, alpha = sol.params.N, sol.params.q, sol.params.alpha
    dF = diff1(sol.r, sol.flux)
    src = sol.r ** (N - 1.0 + alpha) * np.clip(sol.u, 0.0, None) ** q
    res = (dF + src) / np.maximum(1.0, np.abs(src))
    return res[1:-1]


def solution_from_values(params: ProblemParams, r, u, du, meta: dict | None = None,
                         interpolant=None) -> RadialSolution:
    """Build a RadialSolution from (r, u, u') samples, computing the flux."""
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    F = r ** (params.N - 1.0) * phi(du, params.p)
    return RadialSolution(params, r, u, F, meta or {"kind": "from_values"},
                          interpolant=interpolant)
