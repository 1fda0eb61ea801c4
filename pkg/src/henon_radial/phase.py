"""Phase-plane analysis of the autonomous form of the radial equation.

In s = -ln r, w = r^delta u the equation reads

    |w' + delta w|^{p-2} (a1 w + a2 w' + a3 w'') + w^q = 0.

Treated as a first-order system in (w, w'). Internally orbits are integrated
in (w, G) with G = Phi(w' + delta w), which obeys the smooth law
G' = -c1 G - w^q; the non-Lipschitz map Phi^{-1} then appears only in
w' = Phi^{-1}(G) - delta w. The locus w' + delta w = 0 (G = 0) is singular
for p > 2: orbits attempting to cross terminate there. For p < 2 the field
is continuous across it and orbits may pass; p = 2 is everywhere smooth.

Fixed points: the origin (degenerate) and, when the fast-rate amplitude lam
exists, (lam, 0), whose linearization decides the local stability window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .numerics import NumericalError, SingularLocusError, phi, phi_inv
from .params import ProblemParams, compute_exponents
from .radial import ToleranceConfig
from . import serialize

__all__ = [
    "PhaseState",
    "Stability",
    "Fate",
    "FixedPointReport",
    "PhaseTrajectory",
    "vector_field",
    "fixed_points",
    "linearize",
    "integrate_orbit",
    "classify_orbit",
]

_LOCUS_FLOOR = 1e-300


class PhaseState(NamedTuple):
    w: float
    dw: float


class Stability(Enum):
    STABLE_NODE = "StableNode"
    STABLE_SPIRAL = "StableSpiral"
    UNSTABLE_NODE = "UnstableNode"
    UNSTABLE_SPIRAL = "UnstableSpiral"
    SADDLE = "Saddle"
    DEGENERATE = "Degenerate"


class Fate(Enum):
    CONVERGES_TO_LAMBDA = "ConvergesToLambda"
    REGULAR_DECAY = "RegularDecay"
    HIT_SINGULAR_LOCUS = "HitSingularLocus"
    UNBOUNDED = "Unbounded"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class FixedPointReport:
    """Linearization at a fixed point: Jacobian, eigenvalues, classification."""

    location: PhaseState
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    classification: Stability


@dataclass
class PhaseTrajectory:
    """An integrated orbit with its terminal classification."""

    params: ProblemParams
    s: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    fate: Fate
    meta: dict = field(default_factory=dict)

    def states(self) -> list[PhaseState]:
        return [PhaseState(float(a), float(b)) for a, b in zip(self.w, self.dw)]

    def to_csv(self) -> str:
        return serialize.csv_lines(("s", "w", "dw"), (self.s, self.w, self.dw),
                                   comments=(f"fate={self.fate.value}",))

    def to_json(self) -> str:
        return serialize.dumps({
            "schema": serialize.SCHEMA_VERSION,
            "type": "phase_trajectory",
            "params": {"N": self.params.N, "p": self.params.p,
                       "q": self.params.q, "alpha": self.params.alpha},
            "s": self.s, "w": self.w, "dw": self.dw,
            "fate": self.fate.value,
            "meta": self.meta,
        })


def vector_field(params: ProblemParams, state: PhaseState) -> tuple[float, float]:
    """(dw, ddw) of the autonomous system at a state.

    ddw = -(a1 w + a2 w')/a3 - w^q |w' + delta w|^{2-p}/a3. The origin is a
    degenerate equilibrium and returns (0, 0). On the singular locus
    w' + delta w = 0 with w > 0 and p != 2 the field is undefined and a
    SingularLocusError is raised.
    """
    es = compute_exponents(params)
    w, dw = float(state[0]), float(state[1])
    if w < 0.0:
        raise ValueError(f"vector field defined for w >= 0, got w={w}")
    if w == 0.0 and dw == 0.0:
        return (0.0, 0.0)
    x = dw + es.delta * w
    p = params.p
    if p != 2.0 and abs(phi(x, p)) <= _LOCUS_FLOOR and w > 0.0:
        raise SingularLocusError(
            f"singular locus w' + delta w = 0 hit at w={w}, dw={dw} (p={p})"
        )
    source = w ** params.q * abs(x) ** (2.0 - p) if w > 0.0 else 0.0
    ddw = -(es.a1 * w + es.a2 * dw) / es.a3 - source / es.a3
    return (dw, ddw)


def fixed_points(params: ProblemParams) -> list[PhaseState]:
    """Equilibria of the system: the (degenerate) origin, and (lam, 0) when
    the fast-rate amplitude exists (q above the Serrin exponent)."""
    es = compute_exponents(params)
    pts = [PhaseState(0.0, 0.0)]
    if es.lam is not None:
        pts.append(PhaseState(es.lam, 0.0))
    return pts


def _classify_eigs(eigs: np.ndarray) -> Stability:
    re = eigs.real
    im = eigs.imag
    if np.any(np.abs(re) < 1e-9):
        return Stability.DEGENERATE
    if np.any(np.abs(im) > 0.0):
        return Stability.STABLE_SPIRAL if np.all(re < 0.0) else Stability.UNSTABLE_SPIRAL
    if re[0] * re[1] < 0.0:
        return Stability.SADDLE
    return Stability.STABLE_NODE if np.all(re < 0.0) else Stability.UNSTABLE_NODE


def linearize(params: ProblemParams, point: PhaseState, h: float | None = None
              ) -> FixedPointReport:
    """Finite-difference Jacobian and eigenvalues at a nondegenerate fixed point.

    Central differences with step h (default 1e-6 * max(1, w), capped to
    stay clear of the singular locus). For p = 2 the result is cross-checked
    against the analytic characteristic polynomial
    mu^2 + a2 mu + (a1 + q lam^{q-1}) = 0 and a mismatch beyond 1e-6 raises.
    """
    es = compute_exponents(params)
    w0, dw0 = float(point[0]), float(point[1])
    if w0 <= 0.0:
        raise ValueError("linearize needs the nondegenerate fixed point (w > 0)")
    f0 = vector_field(params, PhaseState(w0, dw0))
    if max(abs(f0[0]), abs(f0[1])) > 1e-8 * max(1.0, w0):
        raise ValueError(f"point {point} is not a fixed point (field = {f0})")
    if h is None:
        h = 1e-6 * max(1.0, w0)
    h = min(h, 0.25 * es.delta * w0)

    def f(w, dw):
        return np.asarray(vector_field(params, PhaseState(w, dw)))

    J = np.empty((2, 2))
    J[:, 0] = (f(w0 + h, dw0) - f(w0 - h, dw0)) / (2.0 * h)
    J[:, 1] = (f(w0, dw0 + h) - f(w0, dw0 - h)) / (2.0 * h)
    eigs = np.linalg.eigvals(J)
    eigs = eigs[np.lexsort((eigs.imag, eigs.real))]

    if params.p == 2.0 and es.lam is not None:
        b = es.a2
        c = es.a1 + params.q * es.lam ** (params.q - 1.0)
        ref = np.roots([1.0, b, c])
        ref = ref[np.lexsort((ref.imag, ref.real))]
        if np.max(np.abs(eigs - ref)) > 1e-6 * max(1.0, np.max(np.abs(ref))):
            raise NumericalError(
                f"p = 2 analytic eigenvalue cross-check failed: {eigs} vs {ref}"
            )

    return FixedPointReport(
        location=PhaseState(w0, dw0),
        jacobian=J,
        eigenvalues=(complex(eigs[0]), complex(eigs[1])),
        classification=_classify_eigs(eigs),
    )


def integrate_orbit(params: ProblemParams, initial: PhaseState,
                    s_max: float = 200.0, tol: ToleranceConfig | None = None,
                    n_samples: int = 2001) -> PhaseTrajectory:
    """Integrate an orbit from an admissible initial state and classify it.

    Runs in the desingularized (w, G) variables. Terminal events: w reaching
    zero, |w| blow-up, and (for p > 2 only) contact with the singular locus
    G = 0, which is recorded as HitSingularLocus rather than raised.
    """
    tol = tol or ToleranceConfig()
    es = compute_exponents(params)
    w0, dw0 = float(initial[0]), float(initial[1])
    if w0 < 0.0:
        raise ValueError(f"initial state needs w >= 0, got w={w0}")
    p, q = params.p, params.q
    delta, c1 = es.delta, es.c1
    G0 = phi(dw0 + delta * w0, p)

    def f(s, y):
        w, G = y
        return (phi_inv(G, p) - delta * w, -c1 * G - max(w, 0.0) ** q)

    events = []

    def ev_w_zero(s, y):
        return y[0]

    ev_w_zero.terminal = True
    ev_w_zero.direction = -1.0
    events.append(ev_w_zero)

    def ev_blow(s, y):
        return tol.blow_up - abs(y[0])

    ev_blow.terminal = True
    ev_blow.direction = -1.0
    events.append(ev_blow)

    ev_locus = None
    if p > 2.0:
        def ev_locus(s, y):
            return y[1]

        ev_locus.terminal = True
        events.append(ev_locus)

    sol = solve_ivp(f, (0.0, s_max), (w0, G0), method="RK45",
                    rtol=tol.rtol, atol=tol.atol, dense_output=True,
                    events=tuple(events))

    terminal = "reached_smax"
    if sol.status == -1:
        terminal = "step_underflow"
    elif sol.status == 1:
        if sol.t_events[0].size:
            terminal = "w_zero"
        elif sol.t_events[1].size:
            terminal = "blow_up"
        elif ev_locus is not None and sol.t_events[2].size:
            terminal = "locus"

    s_end = float(sol.t[-1])
    s_grid = np.linspace(0.0, s_end, n_samples)
    y = sol.sol(s_grid)
    w = y[0]
    dw = phi_inv(y[1], p) - delta * w

    traj = PhaseTrajectory(params, s_grid, w, dw, Fate.INCONCLUSIVE,
                           meta={"terminal": terminal, "s_end": s_end,
                                 "rtol": tol.rtol, "atol": tol.atol})
    traj.fate = classify_orbit(traj)
    return traj


def classify_orbit(traj: PhaseTrajectory) -> Fate:
    """Assign a fate to a completed trajectory.

    ConvergesToLambda needs the terminal state within 1e-6 of (lam, 0).
    RegularDecay needs the fitted decay rate of w within 5% of -delta; the
    fit window is the last 10% of the span, except for orbits terminated by
    w reaching zero, where the window is the 10%-80% stretch preceding the
    terminal plunge (w crashes superexponentially just before the zero).
    """
    es = compute_exponents(traj.params)
    terminal = traj.meta.get("terminal", "reached_smax")
    if terminal == "blow_up":
        return Fate.UNBOUNDED
    if terminal == "locus":
        return Fate.HIT_SINGULAR_LOCUS
    if traj.s.size < 8:
        return Fate.INCONCLUSIVE

    if es.lam is not None:
        dist = np.hypot(traj.w[-1] - es.lam, traj.dw[-1])
        if dist < 1e-6:
            return Fate.CONVERGES_TO_LAMBDA

    span = traj.s[-1] - traj.s[0]
    if terminal == "w_zero":
        sel = (traj.s >= traj.s[0] + 0.1 * span) & (traj.s <= traj.s[0] + 0.8 * span)
    else:
        sel = traj.s >= traj.s[-1] - 0.1 * span
    sel &= traj.w > 0.0
    if sel.sum() >= 4:
        A = np.column_stack([traj.s[sel], np.ones(int(sel.sum()))])
        slope = float(np.linalg.lstsq(A, np.log(traj.w[sel]), rcond=None)[0][0])
        traj.meta["decay_rate"] = slope
        if abs(slope + es.delta) <= 0.05 * es.delta:
            return Fate.REGULAR_DECAY
    return Fate.INCONCLUSIVE
