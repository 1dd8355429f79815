"""Reduced dynamics of a thin shape-memory-alloy slab.

The cross-slab structure of a slab of half-thickness b collapses onto five
slowly evolving amplitude fields on the long coordinate x: the thickness
averages U1 (longitudinal displacement), U2 (transverse displacement),
their velocities V1, V2, and the temperature deviation ThetaPrime =
theta_mean - 300 K.  The model integrates their evolution equations and
can reconstruct the in-slab displacement and temperature profiles at any
scaled transverse coordinate Y = y/b in [-1, 1].

Longitudinal amplitude equation (density rho on the left):

    rho dV1/dt = c_wave U1xx + c_disp b^2 U1xxxx
                 + d/dx[ (922 Th - 0.0145 Th^2) U1x
                         + (-4.28e9 + 1.31e7 Th) U1x^3
                         + 7.12e11 U1x^5
                         + (2820 - 8.80 Th) b^2 V1x^2 U1x
                         + 1.24 b^4 V1x^4 U1x
                         - 5.42e4 b^2 V1x^2 U1x^3 ]

Bending is a plain beam equation, decoupled at this truncation order:

    rho dV2/dt = -c_bend b^2 U2xxxx

Temperature equation (heat capacity C_v on the left):

    C_v dTh/dt = kappa Thxx
                 + (2.77e5 + 914 Th - 9.25 Th^2) U1x V1x
                 + (3.94e9 + 1.26e7 Th) V1x U1x^3
                 + (-57.3 - 0.0117 Th) b^2 V1x^3 U1x
                 + 1.68e12 V1x U1x^5
                 - 1.58e6 b^2 V1x^3 U1x^3
                 - 0.0203 b^4 V1x^5 U1x
                 + 1.63e4 b^2 U1xx V1xx + 9.22e4 b^2 U2xx V2xx
                 + d^2/dx^2 [ -8151 b^2 U1x V1x ]

All printed terms of the truncation are evaluated, none pruned.  The
coefficients below are the Cu-based set, transcribed once into named
constants (units g/(ms^2 cm) scale, consistent with the 1D bar model); no
attempt is made to re-derive them symbolically.

The linearisation supports dispersive elastic waves,
omega^2 = (c_wave k^2 - c_disp b^2 k^4)/rho, so wavenumbers with
k b > sqrt(c_wave/c_disp) ~ 1.92 sit outside the long-wave validity of the
expansion and are exponentially unstable; keep the grid coarse enough
(dx > pi b / 1.92) that no resolved mode crosses that threshold.

End conditions: periodic (default, used by the dispersion tests) or
pinned-insulated (U_i = V_i = 0 and dTh/dx = 0 at the ends, applied through
odd/even ghost extensions), a leading approximation for physical runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SlabParams",
    "SlabState",
    "SlabRunSetup",
    "cu_based_slab",
    "slab_rhs",
    "reconstruct_fields",
    "slab_simulate",
    "SlabIntegrationError",
]

ENDS = ("periodic", "pinned_insulated")


class SlabIntegrationError(RuntimeError):
    def __init__(self, time: float, reason: str):
        super().__init__(f"slab integration aborted at t={time:.6g} ms: {reason}")
        self.time = time


@dataclass(frozen=True)
class SlabParams:
    """Geometry, transport and the full reduced-model coefficient table."""

    b: float = 0.05            # half-thickness, cm
    rho: float = 11.1          # g/cm^3
    cv: float = 29.0           # C_v, g/(ms^2 cm K)
    kappa: float = 1.9e-2      # thermal conductivity, cm g/(ms^3 K)

    # longitudinal wave operator
    c_wave: float = 2.97e6     # U1xx
    c_disp: float = 8.03e5     # b^2 U1xxxx (destabilising above kb ~ 1.92)
    c_bend: float = 9.91e5     # bending b^2 U2xxxx (enters with minus sign)

    # flux bracket of the longitudinal equation, d/dx[ ... ]
    s_theta: tuple = (922.0, -0.0145)     # (Th, Th^2) U1x
    s_cubic: tuple = (-4.28e9, 1.31e7)    # (1, Th) U1x^3
    s_quintic: float = 7.12e11            # U1x^5
    s_rate2: tuple = (2820.0, -8.80)      # (1, Th) b^2 V1x^2 U1x
    s_rate4: float = 1.24                 # b^4 V1x^4 U1x
    s_rate2_cubic: float = -5.42e4        # b^2 V1x^2 U1x^3

    # temperature equation sources
    h_lin: tuple = (2.77e5, 914.0, -9.25)  # (1, Th, Th^2) U1x V1x
    h_cubic: tuple = (3.94e9, 1.26e7)      # (1, Th) V1x U1x^3
    h_rate3: tuple = (-57.3, -0.0117)      # (1, Th) b^2 V1x^3 U1x
    h_quintic: float = 1.68e12             # V1x U1x^5
    h_mixed33: float = -1.58e6             # b^2 V1x^3 U1x^3
    h_rate5: float = -0.0203               # b^4 V1x^5 U1x
    h_curv_long: float = 1.63e4            # b^2 U1xx V1xx
    h_curv_bend: float = 9.22e4            # b^2 U2xx V2xx
    h_flux2: float = -8151.0               # d^2/dx^2 [ b^2 U1x V1x ]

    # cross-slab reconstruction constants
    r_shear: tuple = (0.9, -3.05e-5)       # (1, Th) Y b U1x in u2
    r_quad: float = 0.15                   # (3Y^2 - 1) b^2 Uixx
    r_cubic: float = 141.0                 # Y b U1x^3 in u2 (minus sign)
    r_rate: float = 1.00e-4                # (3Y - Y^3) b^3 V1x^2 U1x in u2
    t_mix: float = 2.43e6                  # (3Y - Y^3) b^3 (V1x U2xx + U1x V2xx)
    t_rate: float = 25.1                   # (7 - 30Y^2 + 15Y^4) V1x^3 U1x
    theta_ref: float = 300.0               # K, pivot of ThetaPrime

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("half-thickness b must be positive")
        if self.rho <= 0 or self.cv <= 0:
            raise ValueError("rho and cv must be positive")

    @property
    def wave_speed(self) -> float:
        """Long-wave longitudinal phase speed sqrt(c_wave/rho), cm/ms."""
        return float(np.sqrt(self.c_wave / self.rho))


#: Cu-based coefficient set.
CU_BASED_SLAB = SlabParams()


def cu_based_slab() -> SlabParams:
    return CU_BASED_SLAB


@dataclass
class SlabState:
    """Amplitude fields on the uniform x grid."""

    t: float
    U1: np.ndarray
    U2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    Th: np.ndarray      # ThetaPrime = theta_mean - 300 K

    def validate(self):
        n = self.U1.size
        for name in ("U2", "V1", "V2", "Th"):
            if getattr(self, name).size != n:
                raise ValueError("slab state arrays must have equal length")
        if np.any(self.Th <= -300.0):
            raise ValueError("ThetaPrime must stay above -300 K")

    def copy(self) -> "SlabState":
        return SlabState(self.t, self.U1.copy(), self.U2.copy(),
                         self.V1.copy(), self.V2.copy(), self.Th.copy())

    def fields(self) -> np.ndarray:
        return np.stack([self.U1, self.U2, self.V1, self.V2, self.Th])


# ---------------------------------------------------------------------------
# finite differences with the two supported end treatments


def _pad(a: np.ndarray, ends: str, odd: bool, width: int = 2) -> np.ndarray:
    if ends == "periodic":
        return np.concatenate([a[-width:], a, a[:width]])
    # pinned_insulated: odd extension about the end values for U and V
    # (which are zero there), even extension for ThetaPrime.
    sign = -1.0 if odd else 1.0
    left = sign * a[width:0:-1]
    right = sign * a[-2:-2 - width:-1]
    return np.concatenate([left, a, right])


def _dx1(ap: np.ndarray, dx: float) -> np.ndarray:
    return (ap[3:-1] - ap[1:-3]) / (2.0 * dx)


def _dx2(ap: np.ndarray, dx: float) -> np.ndarray:
    return (ap[3:-1] - 2.0 * ap[2:-2] + ap[1:-3]) / dx ** 2


def _dx4(ap: np.ndarray, dx: float) -> np.ndarray:
    return (ap[4:] - 4.0 * ap[3:-1] + 6.0 * ap[2:-2] - 4.0 * ap[1:-3]
            + ap[:-4]) / dx ** 4


class _Derivs:
    """All spatial derivatives the model needs, from one padding pass."""

    def __init__(self, state: SlabState, dx: float, ends: str):
        u1 = _pad(state.U1, ends, odd=True)
        u2 = _pad(state.U2, ends, odd=True)
        v1 = _pad(state.V1, ends, odd=True)
        v2 = _pad(state.V2, ends, odd=True)
        th = _pad(state.Th, ends, odd=False)
        self.U1x = _dx1(u1, dx)
        self.U2x = _dx1(u2, dx)
        self.V1x = _dx1(v1, dx)
        self.U1xx = _dx2(u1, dx)
        self.U2xx = _dx2(u2, dx)
        self.V1xx = _dx2(v1, dx)
        self.V2xx = _dx2(v2, dx)
        self.U1xxxx = _dx4(u1, dx)
        self.U2xxxx = _dx4(u2, dx)
        self.Thxx = _dx2(th, dx)


def slab_rhs(state: SlabState, params: SlabParams, dx: float,
             ends: str = "periodic") -> tuple:
    """Time derivatives (dU1, dU2, dV1, dV2, dTh) of the amplitude fields.

    Every printed term of the truncation is evaluated with second-order
    centred differences; the strain-law bracket is differenced in flux
    form.  Raises on non-finite intermediates.
    """
    if ends not in ENDS:
        raise ValueError(f"ends must be one of {ENDS}")
    state.validate()
    p = params
    b, b2, b4 = p.b, p.b * p.b, p.b ** 4
    d = _Derivs(state, dx, ends)
    Th = state.Th
    U1x, V1x = d.U1x, d.V1x

    # longitudinal stress-law bracket, then its conservative divergence
    bracket = ((p.s_theta[0] * Th + p.s_theta[1] * Th * Th) * U1x
               + (p.s_cubic[0] + p.s_cubic[1] * Th) * U1x ** 3
               + p.s_quintic * U1x ** 5
               + (p.s_rate2[0] + p.s_rate2[1] * Th) * b2 * V1x ** 2 * U1x
               + p.s_rate4 * b4 * V1x ** 4 * U1x
               + p.s_rate2_cubic * b2 * V1x ** 2 * U1x ** 3)
    bracket_x = _dx1(_pad(bracket, ends, odd=False), dx)

    dV1 = (p.c_wave * d.U1xx + p.c_disp * b2 * d.U1xxxx + bracket_x) / p.rho
    dV2 = -(p.c_bend * b2 * d.U2xxxx) / p.rho

    heating = ((p.h_lin[0] + p.h_lin[1] * Th + p.h_lin[2] * Th * Th) * U1x * V1x
               + (p.h_cubic[0] + p.h_cubic[1] * Th) * V1x * U1x ** 3
               + (p.h_rate3[0] + p.h_rate3[1] * Th) * b2 * V1x ** 3 * U1x
               + p.h_quintic * V1x * U1x ** 5
               + p.h_mixed33 * b2 * V1x ** 3 * U1x ** 3
               + p.h_rate5 * b4 * V1x ** 5 * U1x
               + p.h_curv_long * b2 * d.U1xx * d.V1xx
               + p.h_curv_bend * b2 * d.U2xx * d.V2xx)
    hyper = _dx2(_pad(p.h_flux2 * b2 * U1x * V1x, ends, odd=False), dx)
    dTh = (p.kappa * d.Thxx + heating + hyper) / p.cv

    for arr in (dV1, dV2, dTh):
        if not np.all(np.isfinite(arr)):
            raise SlabIntegrationError(state.t, "non-finite right-hand side")
    return state.V1.copy(), state.V2.copy(), dV1, dV2, dTh


def reconstruct_fields(state: SlabState, params: SlabParams, Y,
                       dx: float, ends: str = "periodic") -> tuple:
    """Cross-slab fields (u1, u2, theta) at scaled transverse Y in [-1, 1].

    Evaluates the slow-manifold expansions

        u1 = U1 - Y b U2x + 0.15 (3Y^2 - 1) b^2 U1xx
        u2 = U2 - (0.9 - 3.05e-5 Th) Y b U1x + 0.15 (3Y^2 - 1) b^2 U2xx
             - 141 Y b U1x^3 + 1.00e-4 (3Y - Y^3) b^3 V1x^2 U1x
        theta = 300 + Th - 2.43e6 (3Y - Y^3) b^3 (V1x U2xx + U1x V2xx)
                - 25.1 (7 - 30 Y^2 + 15 Y^4) V1x^3 U1x

    Y may be a scalar or an array; field arrays broadcast against it with
    Y in the leading axis.
    """
    Y = np.asarray(Y, dtype=float)
    if np.any(np.abs(Y) > 1.0):
        raise ValueError("|Y| must not exceed 1")
    p = params
    b, b2, b3 = p.b, p.b ** 2, p.b ** 3
    d = _Derivs(state, dx, ends)
    Th = state.Th
    Yc = Y[..., None] if Y.ndim else Y

    quad = p.r_quad * (3.0 * Yc ** 2 - 1.0)
    odd3 = 3.0 * Yc - Yc ** 3
    u1 = state.U1 - Yc * b * d.U2x + quad * b2 * d.U1xx
    u2 = (state.U2
          - (p.r_shear[0] + p.r_shear[1] * Th) * Yc * b * d.U1x
          + quad * b2 * d.U2xx
          - p.r_cubic * Yc * b * d.U1x ** 3
          + p.r_rate * odd3 * b3 * d.V1x ** 2 * d.U1x)
    theta = (p.theta_ref + Th
             - p.t_mix * odd3 * b3 * (d.V1x * d.U2xx + d.U1x * d.V2xx)
             - p.t_rate * (7.0 - 30.0 * Yc ** 2 + 15.0 * Yc ** 4)
             * d.V1x ** 3 * d.U1x)
    return u1, u2, theta


# ---------------------------------------------------------------------------
# time integration (explicit RK4; the reduced model is non-stiff on the
# coarse grids its long-wave validity demands)


@dataclass
class SlabRunSetup:
    """Run description; dx = length/nx.  Periodic runs carry nx points on
    [0, length), pinned-insulated runs nx+1 points including both ends."""

    params: SlabParams
    length: float
    nx: int
    state0: SlabState
    dt: float
    t_end: float
    output_interval: float
    ends: str = "periodic"

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0 or self.output_interval <= 0:
            raise ValueError("dt, t_end and output_interval must be positive")
        if self.ends not in ENDS:
            raise ValueError(f"ends must be one of {ENDS}")
        if self.nx < 4:
            raise ValueError("nx must be at least 4")
        want = self.nx if self.ends == "periodic" else self.nx + 1
        if self.state0.U1.size != want:
            raise ValueError(f"state arrays must have {want} points for "
                             f"{self.ends} ends")

    @property
    def dx(self) -> float:
        return self.length / self.nx


@dataclass
class SlabTrajectory:
    params: SlabParams
    dx: float
    snapshots: list
    diagnostics: list

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


def _slab_diag(state: SlabState, dx: float, ends: str):
    d = _Derivs(state, dx, ends)
    return (state.t, float(np.abs(d.U1x).max()), float(np.abs(d.U2x).max()),
            float(state.Th.min()), float(state.Th.max()))


def slab_simulate(setup: SlabRunSetup) -> SlabTrajectory:
    """RK4 time integration of the reduced model.

    Same snapshot cadence contract as the 1D solver:
    floor(t_end/output_interval)+1 snapshots including t = 0.
    """
    dx = setup.dx
    ends = setup.ends
    p = setup.params
    state = setup.state0.copy()
    state.validate()

    def f(fields, t):
        st = SlabState(t, *fields)
        dU1, dU2, dV1, dV2, dTh = slab_rhs(st, p, dx, ends)
        return np.stack([dU1, dU2, dV1, dV2, dTh])

    z = state.fields()
    n_snap = int(np.floor(setup.t_end / setup.output_interval + 1e-9)) + 1
    snap_times = np.arange(n_snap) * setup.output_interval
    tol = 1e-9 * max(setup.dt, setup.output_interval)
    traj = SlabTrajectory(p, dx, [state.copy()], [_slab_diag(state, dx, ends)])
    next_snap = 1

    n_steps = int(np.ceil(setup.t_end / setup.dt - 1e-9))
    t = 0.0
    for n in range(n_steps):
        dt = min(setup.dt, setup.t_end - t)
        k1 = f(z, t)
        k2 = f(z + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = f(z + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = f(z + dt * k3, t + dt)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (n + 1) * setup.dt if dt == setup.dt else setup.t_end
        if not np.all(np.isfinite(z)):
            raise SlabIntegrationError(t, "non-finite values (stability violation)")
        state = SlabState(t, *(row.copy() for row in z))
        while next_snap < n_snap and t >= snap_times[next_snap] - tol:
            traj.snapshots.append(state.copy())
            traj.diagnostics.append(_slab_diag(state, dx, ends))
            next_snap += 1
    return traj
