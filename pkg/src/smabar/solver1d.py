"""Method-of-lines solver for the coupled 1D bar dynamics.

Unknowns are displacement u, velocity v and temperature theta at the nx+1
nodes of a uniform grid on [0, L]; strain eps = du/dx and stress s live at
the nx cell midpoints (staggered layout), which makes every spatial stencil
centred and second-order:

    nodes:      u, v, theta (, theta_dot when tau0 > 0)
    midpoints:  eps = diff(u)/dx, eps_dot = diff(v)/dx, s(eps, theta, rates)

Semi-discrete system (density-absorbed coefficients):

    du/dt = v
    rho dv/dt = ds/dx + F (+ gamma u_xxxx)
    C_v dtheta/dt = d/dx(k dtheta/dx) + k1 <theta eps eps_dot> + mu <eps_dot^2>
                    + nu theta_dot <eps_dot> + G

where <.> denotes the midpoint-to-node average (one-sided at the ends).
That particular average makes the spatial scheme conserve the discrete
total energy

    E = sum_nodes w_i (rho v^2/2 + rho e_thermal) dx + sum_mid rho psi3(eps) dx

exactly (trapezoid weights w, F = G = 0, pinned + insulated, mu = nu =
tau0 = 0); time integration is then the only source of drift.

When tau0 > 0 the energy equation is second order in time and is reduced
to first order with the auxiliary field theta_dot; the strain acceleration
required by the relaxation coupling terms is evaluated from the momentum
right-hand side, so no stage lagging is needed.  The nu theta_dot terms are
linear in the unknown rate and are eliminated pointwise.

Integrators: classical explicit RK4 (default; subject to the CFL-style
bound of `stable_dt`), and two fixed-step implicit one-step methods with a
damped banded Newton solver, `implicit_euler` and `implicit_midpoint`.
Inside the spinodal strain band the frozen-coefficient problem is locally
ill-posed for mu = gamma = 0 (the tangent modulus is negative), so
grid-scale perturbations grow at a physical rate; the backward Euler
scheme damps those modes at any step size and is the integrator that
reproduces the phase-transformation experiments at their large quoted time
steps.  The Newton solver falls back to local step halving when a step
lands on a snap-through it cannot resolve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .constitutive import MaterialParams1D, conductivity, internal_energy, strain_energy

__all__ = [
    "Grid1D",
    "BoundarySpec",
    "Forcing",
    "FieldState",
    "RunSetup",
    "Trajectory",
    "IntegrationError",
    "compute_stress",
    "rhs",
    "step",
    "simulate",
    "energy_budget",
    "conduction_entropy_production",
    "stable_dt",
]

MECH_KINDS = ("stress_free", "pinned", "mixed")
THERMAL_KINDS = ("insulated", "controlled_flux", "fixed_theta")
INTEGRATORS = ("rk4", "implicit_euler", "implicit_midpoint")

# physical-plausibility guards used to reject spurious implicit solutions
_THETA_FLOOR = 1.0     # K
_EPS_CEIL = 0.5        # |strain| beyond any admissible well


class IntegrationError(RuntimeError):
    """Time integration failed; carries the failure time."""

    def __init__(self, time: float, reason: str):
        super().__init__(f"integration aborted at t={time:.6g} ms: {reason}")
        self.time = time
        self.reason = reason


@dataclass(frozen=True)
class Grid1D:
    """Uniform staggered grid: nx cells on [0, length]."""

    length: float
    nx: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.nx < 4:
            raise ValueError("nx must be at least 4")

    @property
    def dx(self) -> float:
        return self.length / self.nx

    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.nx + 1)

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx


@dataclass
class BoundarySpec:
    """Mechanical and thermal end conditions.

    mech: 'stress_free' (s = 0 at both ends), 'pinned' (u = 0 at both
    ends) or 'mixed' (stress-free left, pinned right).

    thermal: 'insulated' (zero flux both ends), 'controlled_flux' (left
    end insulated, right end -k dtheta/dx = beta (theta - theta_ambient(t)))
    or 'fixed_theta' (both ends held at fixed_value; interpreted as the
    supplied ambient value since 0 K is outside the model's domain).
    """

    mech: str = "pinned"
    thermal: str = "insulated"
    beta: float = 0.0
    theta_ambient: float | Callable[[float], float] = 0.0
    fixed_value: float = 300.0

    def __post_init__(self):
        if self.mech not in MECH_KINDS:
            raise ValueError(f"mech must be one of {MECH_KINDS}")
        if self.thermal not in THERMAL_KINDS:
            raise ValueError(f"thermal must be one of {THERMAL_KINDS}")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")

    def ambient(self, t: float) -> float:
        if callable(self.theta_ambient):
            return float(self.theta_ambient(t))
        return float(self.theta_ambient)


@dataclass
class Forcing:
    """Body force F(x, t) in g/(ms^2 cm^2) and heat supply G(x, t) in
    g/(ms^3 cm), both given as vectorised callables."""

    body: Callable[[np.ndarray, float], np.ndarray]
    heat: Callable[[np.ndarray, float], np.ndarray]

    @classmethod
    def none(cls) -> "Forcing":
        zero = lambda x, t: np.zeros_like(x)
        return cls(zero, zero)

    @classmethod
    def uniform(cls, f_value: float, g_value: float = 0.0) -> "Forcing":
        return cls(lambda x, t: np.full_like(x, f_value),
                   lambda x, t: np.full_like(x, g_value))


@dataclass
class FieldState:
    """Grid fields at one instant; theta_dot is present only for tau0 > 0."""

    t: float
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    theta_dot: Optional[np.ndarray] = None

    def validate(self, grid: Grid1D, params: MaterialParams1D):
        n = grid.nx + 1
        for name, arr in (("u", self.u), ("v", self.v), ("theta", self.theta)):
            if np.asarray(arr).shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
        if np.any(self.theta <= 0):
            raise ValueError("theta must be positive everywhere")
        if params.tau0 > 0:
            if self.theta_dot is None:
                raise ValueError("theta_dot field required when tau0 > 0")
            if np.asarray(self.theta_dot).shape != (n,):
                raise ValueError(f"theta_dot must have shape ({n},)")
        elif self.theta_dot is not None:
            raise ValueError("theta_dot must be absent when tau0 = 0")

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.u.copy(), self.v.copy(),
                          self.theta.copy(),
                          None if self.theta_dot is None else self.theta_dot.copy())

    def strain(self, grid: Grid1D) -> np.ndarray:
        return np.diff(self.u) / grid.dx


# ---------------------------------------------------------------------------
# spatial operators


def _theta_ghosts(theta: np.ndarray, grid: Grid1D, params: MaterialParams1D,
                  bcs: BoundarySpec, t: float) -> tuple[float, float]:
    """Ghost temperatures one node beyond each end."""
    dx = grid.dx
    if bcs.thermal == "fixed_theta":
        # Dirichlet rows are frozen; symmetric ghosts keep conduction finite.
        return theta[1], theta[-2]
    left = theta[1]                      # insulated left in both remaining cases
    if bcs.thermal == "insulated":
        right = theta[-2]
    else:                                # controlled_flux at x = L
        k_end = float(np.asarray(conductivity(params, theta[-1])))
        right = theta[-2] - 2.0 * dx * bcs.beta * (theta[-1] - bcs.ambient(t)) / k_end
    return left, right


def _node_average(mid: np.ndarray) -> np.ndarray:
    """Midpoint field -> node field: interior average, one-sided at ends.

    This is the adjoint of the staggered difference under trapezoid
    weights, which is what makes the coupling exchange conservative.
    """
    out = np.empty(mid.size + 1)
    out[1:-1] = 0.5 * (mid[1:] + mid[:-1])
    out[0] = mid[0]
    out[-1] = mid[-1]
    return out


def _fourth_difference(u: np.ndarray, dx: float) -> np.ndarray:
    """5-point u_xxxx at every node, shifted one-sided near the ends."""
    n = u.size
    out = np.empty(n)
    c = (u[:-4] - 4.0 * u[1:-3] + 6.0 * u[2:-2] - 4.0 * u[3:-1] + u[4:])
    out[2:-2] = c
    out[0] = out[1] = c[0] if c.size else 0.0
    out[-1] = out[-2] = c[-1] if c.size else 0.0
    return out / dx ** 4


class _Rhs:
    """Flattened-state right-hand side with interleaved [u, v, theta(, w)]."""

    def __init__(self, grid: Grid1D, params: MaterialParams1D,
                 bcs: BoundarySpec, forcing: Forcing, gamma_sign: float = 1.0):
        self.grid = grid
        self.p = params
        self.bcs = bcs
        self.forcing = forcing
        self.gamma_sign = gamma_sign
        self.nf = 4 if params.tau0 > 0 else 3
        self.nn = grid.nx + 1
        self.x = grid.nodes()
        self.dxi = 1.0 / grid.dx

    # -- state packing ------------------------------------------------------

    def pack(self, state: FieldState) -> np.ndarray:
        cols = [state.u, state.v, state.theta]
        if self.nf == 4:
            cols.append(state.theta_dot)
        return np.stack(cols, axis=1).ravel()

    def unpack(self, z: np.ndarray, t: float) -> FieldState:
        Z = z.reshape(self.nn, self.nf)
        w = Z[:, 3].copy() if self.nf == 4 else None
        return FieldState(t, Z[:, 0].copy(), Z[:, 1].copy(), Z[:, 2].copy(), w)

    # -- physics ------------------------------------------------------------

    def _stress_and_rates(self, u, v, th, w, t):
        p, dxi = self.p, self.dxi
        eps = (u[1:] - u[:-1]) * dxi
        deps = (v[1:] - v[:-1]) * dxi
        th_m = 0.5 * (th[1:] + th[:-1])

        gl, gr = _theta_ghosts(th, self.grid, p, self.bcs, t)
        th_pad = np.concatenate(([gl], th, [gr]))
        k_m = conductivity(p, 0.5 * (th_pad[1:] + th_pad[:-1]))
        flux = k_m * (th_pad[1:] - th_pad[:-1]) * dxi
        cond = (flux[1:] - flux[:-1]) * dxi

        coupling = _node_average(th_m * eps * deps)
        g_heat = self.forcing.heat(self.x, t)

        heat_src = cond + p.k1 * coupling + g_heat
        if p.mu != 0.0:
            heat_src = heat_src + p.mu * _node_average(deps * deps)
        deps_n = _node_average(deps) if p.nu != 0.0 else None

        if w is None:
            denom = p.cv - p.nu * deps_n if p.nu != 0.0 else p.cv
            if p.nu != 0.0 and np.any(denom <= 0):
                raise IntegrationError(t, "degenerate nu coupling (C_v - nu eps_dot <= 0)")
            th_t = heat_src / denom
            if self.bcs.thermal == "fixed_theta":
                th_t[0] = th_t[-1] = 0.0
        else:
            th_t = w

        s = eps * (p.k1 * (th_m - p.theta1) + eps * eps * (-p.k2 + eps * eps * p.k3))
        if p.mu != 0.0:
            s = s + p.mu * deps
        if p.nu != 0.0:
            s = s + p.nu * 0.5 * (th_t[1:] + th_t[:-1])
        return eps, deps, deps_n, th_m, cond, coupling, g_heat, heat_src, th_t, s

    def __call__(self, z: np.ndarray, t: float) -> np.ndarray:
        p, dxi, nn = self.p, self.dxi, self.nn
        Z = z.reshape(nn, self.nf)
        u, v, th = Z[:, 0], Z[:, 1], Z[:, 2]
        w = Z[:, 3] if self.nf == 4 else None

        (eps, deps, deps_n, th_m, cond, coupling,
         g_heat, heat_src, th_t, s) = self._stress_and_rates(u, v, th, w, t)

        dZ = np.empty_like(Z)
        dZ[:, 0] = v
        accel = np.zeros(nn)
        accel[1:-1] = (s[1:] - s[:-1]) * dxi + self.forcing.body(self.x[1:-1], t)
        if p.gamma != 0.0:
            accel[1:-1] += self.gamma_sign * p.gamma * _fourth_difference(u, self.grid.dx)[1:-1]
        if self.bcs.mech in ("stress_free", "mixed"):
            accel[0] = 2.0 * s[0] * dxi + float(self.forcing.body(self.x[:1], t)[0])
        if self.bcs.mech == "stress_free":
            accel[-1] = -2.0 * s[-1] * dxi + float(self.forcing.body(self.x[-1:], t)[0])
        accel /= p.rho
        if self.bcs.mech in ("pinned", "mixed"):
            accel[-1] = 0.0
            dZ[-1, 0] = 0.0
        if self.bcs.mech == "pinned":
            accel[0] = 0.0
            dZ[0, 0] = 0.0
        dZ[:, 1] = accel

        if self.nf == 3:
            dZ[:, 2] = th_t
            return dZ.ravel()

        # tau0 > 0: (theta, theta_dot) pair with pointwise elimination of
        # the rates; strain acceleration comes from the momentum RHS.
        dZ[:, 2] = w
        edd = (accel[1:] - accel[:-1]) * dxi
        w_m = 0.5 * (w[1:] + w[:-1])
        relax = _node_average(w_m * eps * deps + th_m * deps * deps
                              + th_m * eps * edd)
        numer = -p.cv * w + p.k1 * (coupling + p.tau0 * relax) + cond + g_heat
        if p.mu != 0.0:
            numer = numer + p.mu * (_node_average(deps * deps)
                                    + p.tau0 * _node_average(2.0 * deps * edd))
        if p.nu != 0.0:
            edd_n = _node_average(edd)
            numer = numer + p.nu * w * (deps_n + p.tau0 * edd_n)
            denom = p.tau0 * (p.cv - p.nu * deps_n)
            if np.any(denom <= 0):
                raise IntegrationError(t, "degenerate nu coupling (C_v - nu eps_dot <= 0)")
        else:
            denom = p.tau0 * p.cv
        w_t = numer / denom
        if self.bcs.thermal == "fixed_theta":
            w_t[0] = w_t[-1] = 0.0
        dZ[:, 3] = w_t
        return dZ.ravel()


def _make_rhs(grid, params, bcs, forcing, gamma_sign=1.0) -> _Rhs:
    return _Rhs(grid, params, bcs, forcing, gamma_sign)


# ---------------------------------------------------------------------------
# public physics operators


def compute_stress(state: FieldState, grid: Grid1D, params: MaterialParams1D,
                   bcs: BoundarySpec | None = None,
                   forcing: Forcing | None = None) -> np.ndarray:
    """Midpoint stress array for a given state.

    Strain and strain rate come from centred differences of u and v across
    each midpoint, theta from the two-point node average.  When nu != 0 and
    tau0 = 0 the temperature rate is recovered from the energy equation,
    which requires the boundary conditions and heat forcing; they default
    to insulated ends and no forcing.
    """
    state.validate(grid, params)
    f = _make_rhs(grid, params, bcs or BoundarySpec(), forcing or Forcing.none())
    w = state.theta_dot if params.tau0 > 0 else None
    out = f._stress_and_rates(state.u, state.v, state.theta, w, state.t)
    return out[-1]


def rhs(state: FieldState, grid: Grid1D, params: MaterialParams1D,
        bcs: BoundarySpec, forcing: Forcing, t: float | None = None,
        gamma_sign: float = 1.0) -> FieldState:
    """Time derivatives of (u, v, theta[, theta_dot]) as a FieldState.

    Aborts with IntegrationError if theta is non-positive anywhere.
    """
    if np.any(state.theta <= 0):
        raise IntegrationError(state.t, "non-positive temperature in state")
    state.validate(grid, params)
    f = _make_rhs(grid, params, bcs, forcing, gamma_sign)
    t = state.t if t is None else t
    return f.unpack(f(f.pack(state), t), t)


def energy_budget(state: FieldState, grid: Grid1D,
                  params: MaterialParams1D) -> float:
    """Discrete total energy, integral of rho (v^2/2 + e) over the bar.

    Kinetic and thermal internal energy are integrated by the trapezoid
    rule over nodes; the strain energy rho psi3(eps) by the midpoint rule
    over cells, matching the staggered layout (this split form is the
    quantity the spatial scheme conserves exactly).
    """
    dx = grid.dx
    w = np.ones(grid.nx + 1)
    w[0] = w[-1] = 0.5
    e_node = internal_energy(params, state.theta, 0.0)
    nodal = params.rho * (0.5 * state.v ** 2 + e_node)
    mech = params.rho * strain_energy(params, state.strain(grid))
    return float(np.sum(w * nodal) * dx + np.sum(mech) * dx)


def conduction_entropy_production(state: FieldState, grid: Grid1D,
                                  params: MaterialParams1D) -> np.ndarray:
    """Pointwise conduction dissipation k (grad theta)^2 / theta >= 0.

    Fourier-regime diagnostic; requires tau0 = 0.
    """
    if params.tau0 != 0:
        raise ValueError("conduction entropy production is a Fourier-regime "
                         "diagnostic (tau0 = 0)")
    th = state.theta
    dx = grid.dx
    grad = np.empty_like(th)
    grad[1:-1] = (th[2:] - th[:-2]) / (2.0 * dx)
    grad[0] = (-3.0 * th[0] + 4.0 * th[1] - th[2]) / (2.0 * dx)
    grad[-1] = (3.0 * th[-1] - 4.0 * th[-2] + th[-3]) / (2.0 * dx)
    k = conductivity(params, th)
    return k * grad * grad / th


def stable_dt(state: FieldState, grid: Grid1D,
              params: MaterialParams1D) -> float:
    """Explicit RK4 step bound for the current state.

    Wave part: dt <= sqrt(2) dx / c with c^2 = max(s'(eps, theta), 0)/rho
    and the tangent modulus s' = k1 (theta - theta1) - 3 k2 eps^2 +
    5 k3 eps^4 evaluated at every midpoint (RK4 covers |z| <= 2 sqrt(2) on
    the imaginary axis and the staggered first-difference pair reaches
    2 c/dx).  Diffusion part: dt <= 2.785 C_v dx^2 / (4 k).  Relaxation
    part: dt <= 2.785 tau0 when the auxiliary theta_dot field is present.
    Note the full tangent modulus matters: near the martensite wells the
    quintic term dominates and the naive bound sqrt(k1 |theta - theta1|/rho)
    badly underestimates the wave speed.
    """
    eps = state.strain(grid)
    th_m = 0.5 * (state.theta[1:] + state.theta[:-1])
    sprime = params.k1 * (th_m - params.theta1) - 3.0 * params.k2 * eps ** 2 \
        + 5.0 * params.k3 * eps ** 4
    c2 = max(float(np.max(sprime)), 0.0) / params.rho
    dx = grid.dx
    bounds = []
    if c2 > 0:
        bounds.append(np.sqrt(2.0) * dx / np.sqrt(c2))
    k_max = float(np.max(np.asarray(conductivity(params, state.theta))))
    bounds.append(2.785 * params.cv * dx * dx / (4.0 * k_max))
    if params.tau0 > 0:
        bounds.append(2.785 * params.tau0)
    return min(bounds)


# ---------------------------------------------------------------------------
# time integration


def _rk4_step(z: np.ndarray, t: float, dt: float, f: _Rhs) -> np.ndarray:
    k1 = f(z, t)
    k2 = f(z + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(z + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(z + dt * k3, t + dt)
    return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _ImplicitStepper:
    """Fixed-step implicit Euler / midpoint with damped banded Newton.

    The Jacobian is assembled by coloured finite differences in banded
    storage and reused across steps while full Newton steps keep
    converging.  A solution is accepted only if it is physically plausible
    (finite, theta above 1 K, |eps| below 0.5); otherwise the step is
    halved locally, which resolves snap-through transients.
    """

    MAX_DEPTH = 12

    def __init__(self, f: _Rhs, kind: str):
        self.f = f
        self.kind = kind
        # node reach of the stencil: 1 in the base case; the tau0
        # acceleration coupling and the nu rate elimination extend it to 2,
        # the one-sided Ginsburg boundary closure to 3.
        reach = 1
        if f.nf == 4 or f.p.nu != 0.0:
            reach = 2
        if f.p.gamma != 0.0:
            reach = 3
        self.half_bw = (reach + 1) * f.nf - 1
        self.J = None
        scale = {3: (1e-2, 1e-1, 200.0), 4: (1e-2, 1e-1, 200.0, 10.0)}
        self.scales = np.array(scale[f.nf])
        self.nfe = 0
        self.subdivided = 0

    # -- helpers -----------------------------------------------------------

    def _norm(self, r: np.ndarray) -> float:
        val = np.max(np.abs(r.reshape(-1, self.f.nf)) / self.scales)
        return float(val) if np.isfinite(val) else np.inf

    def _plausible(self, z: np.ndarray) -> bool:
        if not np.all(np.isfinite(z)):
            return False
        Z = z.reshape(-1, self.f.nf)
        if Z[:, 2].min() <= _THETA_FLOOR:
            return False
        eps = np.abs(np.diff(Z[:, 0])).max() / self.f.grid.dx
        return eps < _EPS_CEIL

    def _banded_jacobian(self, z: np.ndarray, t: float) -> np.ndarray:
        f, hb = self.f, self.half_bw
        n = z.size
        f0 = f(z, t)
        self.nfe += 1
        ab = np.zeros((2 * hb + 1, n))
        ncol = 2 * hb + 1
        h = 1e-7 * np.maximum(np.abs(z), 1.0)
        for c in range(ncol):
            idx = np.arange(c, n, ncol)
            zp = z.copy()
            zp[idx] += h[idx]
            df = f(zp, t) - f0
            self.nfe += 1
            for j in idx:
                i0, i1 = max(0, j - hb), min(n, j + hb + 1)
                ab[hb + np.arange(i0, i1) - j, j] = df[i0:i1] / h[j]
        return ab

    def _system_matrix(self, z: np.ndarray, t: float, dt: float) -> np.ndarray:
        w = dt if self.kind == "implicit_euler" else 0.5 * dt
        ab = -w * self._banded_jacobian(z, t)
        ab[self.half_bw, :] += 1.0
        return ab

    # -- one nonlinear solve -------------------------------------------------

    TOL = 1e-11

    def _residual_fn(self, z: np.ndarray, t: float, dt: float):
        f = self.f
        if self.kind == "implicit_euler":
            te = t + dt

            def resid(zg):
                self.nfe += 1
                return zg - z - dt * f(zg, te)

            def jac_point(zg):
                return zg, te
        else:
            tm = t + 0.5 * dt

            def resid(zg):
                self.nfe += 1
                return zg - z - dt * f(0.5 * (z + zg), tm)

            def jac_point(zg):
                return 0.5 * (z + zg), tm
        return resid, jac_point

    def _converged(self, dz: np.ndarray) -> bool:
        """Increment-based convergence test.

        The residual itself is a poor test in the stiff tau0 regime: the
        theta_dot rows amplify state noise by 1/tau0, so their residual
        floor can sit above any fixed tolerance while the Newton increment
        (divided by the matching 1 + dt/tau0 diagonal) is negligible.
        """
        return self._norm(dz) < self.TOL

    def _solve(self, z: np.ndarray, t: float, dt: float) -> Optional[np.ndarray]:
        """One implicit solve; iterates always start from the step state z
        so a misbehaving Jacobian can never strand the iteration in a
        remote Newton basin (spurious roots of the implicit equations do
        exist near snap-through events)."""
        resid, jac_point = self._residual_fn(z, t, dt)
        with np.errstate(over="ignore", invalid="ignore"):
            # fast path: undamped chord iteration with the cached Jacobian
            if self.J is not None:
                zg = z.copy()
                r = resid(zg)
                rn = self._norm(r)
                for _ in range(25):
                    dz = solve_banded((self.half_bw, self.half_bw), self.J, -r)
                    if not np.all(np.isfinite(dz)):
                        break
                    zg = zg + dz
                    if self._converged(dz):
                        if self._plausible(zg):
                            return zg
                        break
                    r = resid(zg)
                    rtn = self._norm(r)
                    if not rtn < rn:
                        break
                    rn = rtn
                self.J = None

            # robust path: damped Newton with a fresh Jacobian per
            # iteration.  Strong curvature (quadratic rate terms) can make
            # full steps overshoot badly near impulsive transients; rather
            # than creep with damped steps, bail out quickly and let the
            # caller halve the step, which shrinks the nonlinear update
            # superlinearly.
            zg = z.copy()
            r = resid(zg)
            rn = self._norm(r)
            damped = 0
            for _ in range(15):
                zj, tj = jac_point(zg)
                J = self._system_matrix(zj, tj, dt)
                if not np.all(np.isfinite(J)):
                    return None
                dz = solve_banded((self.half_bw, self.half_bw), J, -r)
                if not np.all(np.isfinite(dz)):
                    return None
                self.J = J               # cache for the next step's fast path
                if self._converged(dz):
                    zg = zg + dz
                    return zg if self._plausible(zg) else None
                lam, accepted = 1.0, False
                for _ in range(6):
                    zt = zg + lam * dz
                    rt = resid(zt)
                    rtn = self._norm(rt)
                    if rtn < rn:
                        zg, r, rn = zt, rt, rtn
                        accepted = True
                        break
                    lam *= 0.5
                if not accepted:
                    self.J = None
                    return None
                damped += 1 if lam < 1.0 else 0
                if damped >= 4:
                    self.J = None
                    return None
        return None

    def advance(self, z: np.ndarray, t: float, dt: float, depth: int = 0) -> np.ndarray:
        out = self._solve(z, t, dt)
        if out is not None:
            return out
        if depth >= self.MAX_DEPTH:
            raise IntegrationError(t, "implicit step failed to converge")
        if depth == 0:
            self.subdivided += 1
        z1 = self.advance(z, t, 0.5 * dt, depth + 1)
        z2 = self.advance(z1, t + 0.5 * dt, 0.5 * dt, depth + 1)
        self.J = None
        return z2


def _clamp_pinned(state: FieldState, bcs: BoundarySpec) -> FieldState:
    """Zero the constrained end values exactly (ICs built from analytic
    profiles may carry round-off there, e.g. sin(pi) != 0 in floats)."""
    if bcs.mech in ("pinned", "mixed"):
        state.u[-1] = 0.0
        state.v[-1] = 0.0
    if bcs.mech == "pinned":
        state.u[0] = 0.0
        state.v[0] = 0.0
    return state


def step(state: FieldState, dt: float, grid: Grid1D, params: MaterialParams1D,
         bcs: BoundarySpec, forcing: Forcing, integrator: str = "rk4",
         gamma_sign: float = 1.0) -> FieldState:
    """Advance one time step with the selected integrator.

    Deterministic; raises IntegrationError (carrying the failure time) on
    non-finite values or non-positive temperature in the result.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if integrator not in INTEGRATORS:
        raise ValueError(f"integrator must be one of {INTEGRATORS}")
    state = _clamp_pinned(state.copy(), bcs)
    state.validate(grid, params)
    f = _make_rhs(grid, params, bcs, forcing, gamma_sign)
    z = f.pack(state)
    if integrator == "rk4":
        z1 = _rk4_step(z, state.t, dt, f)
    else:
        z1 = _ImplicitStepper(f, integrator).advance(z, state.t, dt)
    new = f.unpack(z1, state.t + dt)
    if not np.all(np.isfinite(z1)):
        raise IntegrationError(state.t + dt, "non-finite values (stability violation)")
    if np.any(new.theta <= 0):
        raise IntegrationError(state.t + dt, "non-positive temperature")
    return new


@dataclass
class RunSetup:
    """Everything simulate() needs for one run."""

    grid: Grid1D
    params: MaterialParams1D
    bcs: BoundarySpec
    forcing: Forcing
    state0: FieldState
    dt: float
    t_end: float
    output_interval: float
    integrator: str = "rk4"
    gamma_sign: float = 1.0

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0 or self.output_interval <= 0:
            raise ValueError("dt, t_end and output_interval must be positive")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}")


@dataclass
class Trajectory:
    """Simulation output: snapshots at the configured cadence plus a
    per-snapshot diagnostics series (t, total_energy, max|eps|, theta
    extrema)."""

    grid: Grid1D
    params: MaterialParams1D
    snapshots: list
    diagnostics: list
    failed: bool = False
    failure: str = ""

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


def _diag_row(state: FieldState, grid: Grid1D, params: MaterialParams1D):
    eps = state.strain(grid)
    return (state.t, energy_budget(state, grid, params),
            float(np.abs(eps).max()), float(state.theta.min()),
            float(state.theta.max()))


def simulate(setup: RunSetup) -> Trajectory:
    """Run to t_end, emitting floor(t_end/output_interval)+1 snapshots.

    Snapshots are the states at the first step time reaching each multiple
    of output_interval (the state at t=0 included).  On integration failure
    the partial trajectory is attached to the raised IntegrationError as
    its `partial` attribute.
    """
    grid, params = setup.grid, setup.params
    state = _clamp_pinned(setup.state0.copy(), setup.bcs)
    state.validate(grid, params)
    f = _make_rhs(grid, params, setup.bcs, setup.forcing, setup.gamma_sign)
    z = f.pack(state)
    stepper = (None if setup.integrator == "rk4"
               else _ImplicitStepper(f, setup.integrator))

    n_snap = int(np.floor(setup.t_end / setup.output_interval + 1e-9)) + 1
    snap_times = np.arange(n_snap) * setup.output_interval
    tol = 1e-9 * max(setup.dt, setup.output_interval)

    traj = Trajectory(grid, params, [], [])
    traj.snapshots.append(state.copy())
    traj.diagnostics.append(_diag_row(state, grid, params))
    next_snap = 1

    n_steps = int(np.ceil(setup.t_end / setup.dt - 1e-9))
    t = 0.0
    try:
        for n in range(n_steps):
            dt = min(setup.dt, setup.t_end - t)
            if stepper is None:
                z = _rk4_step(z, t, dt, f)
            else:
                z = stepper.advance(z, t, dt)
            t = (n + 1) * setup.dt if dt == setup.dt else setup.t_end
            if not np.all(np.isfinite(z)):
                raise IntegrationError(t, "non-finite values (stability violation)")
            state = f.unpack(z, t)
            if np.any(state.theta <= 0):
                raise IntegrationError(t, "non-positive temperature")
            while next_snap < n_snap and t >= snap_times[next_snap] - tol:
                traj.snapshots.append(state.copy())
                traj.diagnostics.append(_diag_row(state, grid, params))
                next_snap += 1
    except IntegrationError as err:
        traj.failed = True
        traj.failure = str(err)
        err.partial = traj
        raise
    return traj
