"""Command-line driver and plain-text run configuration.

Configs are INI files with one section per concern; every physical value
is in the cgs-ms-K unit system used throughout the package.  Unknown keys
are rejected.  Example (thermal cycling of a pinned bar):

    [model]
    kind = full_1d

    [grid]
    length = 1.0          ; cm
    nx = 24

    [time]
    dt = 0.0007           ; ms
    t_end = 12.0          ; ms
    output_interval = 0.06

    [integrator]
    kind = implicit_euler ; rk4 | implicit_euler | implicit_midpoint

    [bcs]
    mech = pinned         ; stress_free | pinned | mixed
    thermal = controlled_flux
    beta = 0.0            ; surface exchange, 0 degenerates to insulation
    theta_ambient = 200.0 ; K

    [forcing]
    body = const          ; F in g/(ms^2 cm^2)
    body_value = 500.0
    heat = sin_cubed      ; G = amplitude * sin(rate * t)^3, g/(ms^3 cm)
    heat_amplitude = 1178.0972
    heat_rate = 0.5235988

    [initial]
    u = piecewise_linear
    u_breakpoints = 0:0, 0.1666:-0.0196, 0.5:0.0196, 0.8333:-0.0196, 1:0
    theta = const
    theta_value = 200.0

Run with `sma run --preset experiment1 --out outdir` or
`sma run --config file.ini --out outdir [--override time.dt=0.0005 ...]`.
Exit codes: 0 success, 1 configuration error, 2 integration abort (partial
artifacts are written and flagged).
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import solver1d
from .constitutive import MaterialParams1D, cu_based
from .manufactured import build_mms_case
from .slab import (SlabParams, SlabRunSetup, SlabState, cu_based_slab,
                   reconstruct_fields, slab_simulate)
from .solver1d import (BoundarySpec, FieldState, Forcing, Grid1D,
                       IntegrationError, RunSetup, compute_stress, simulate)

__all__ = ["SimConfig", "ConfigError", "load_config", "write_config",
           "preset", "run", "main", "classify_strain"]

PRESETS = ("experiment1", "experiment2", "conservation", "mms")


class ConfigError(ValueError):
    """Invalid or unparsable run configuration."""


# ---------------------------------------------------------------------------
# config dataclasses


@dataclass
class ForcingSpec:
    body_kind: str = "none"        # none | const | sin_cubed | mms
    body_value: float = 0.0
    body_amplitude: float = 0.0
    body_rate: float = 0.0
    heat_kind: str = "none"
    heat_value: float = 0.0
    heat_amplitude: float = 0.0
    heat_rate: float = 0.0


@dataclass
class InitialSpec:
    u_kind: str = "zero"           # zero | piecewise_linear | sine | mms
    u_breakpoints: tuple = ()      # ((x, u), ...)
    u_amplitude: float = 0.0
    u_mode: int = 1
    v_kind: str = "zero"           # zero | sine | mms
    v_amplitude: float = 0.0
    v_mode: int = 1
    theta_kind: str = "const"      # const | cosine | mms
    theta_value: float = 300.0
    theta_amplitude: float = 0.0
    theta_mode: int = 1
    theta_dot_kind: str = "consistent"   # consistent | zero (tau0 > 0 only)


@dataclass
class MmsSpec:
    u_amplitude: float = 0.005
    omega_u: float = 3.0
    theta_bar: float = 300.0
    theta_amplitude: float = 5.0
    omega_t: float = 2.0


@dataclass
class SlabFieldInit:
    kind: str = "uniform"          # uniform | sine
    value: float = 0.0
    amplitude: float = 0.0
    mode: int = 1


@dataclass
class SlabInitialSpec:
    u1: SlabFieldInit = field(default_factory=SlabFieldInit)
    u2: SlabFieldInit = field(default_factory=SlabFieldInit)
    v1: SlabFieldInit = field(default_factory=SlabFieldInit)
    v2: SlabFieldInit = field(default_factory=SlabFieldInit)
    theta_prime: SlabFieldInit = field(default_factory=SlabFieldInit)


@dataclass
class SimConfig:
    """Fully deterministic run description (no random state anywhere)."""

    model: str = "full_1d"                 # full_1d | slab
    material: MaterialParams1D = field(default_factory=cu_based)
    gamma_negate: bool = False             # flips the sign of the u_xxxx term
    slab_material: SlabParams = field(default_factory=cu_based_slab)
    length: float = 1.0
    nx: int = 24
    dt: float = 7e-4
    t_end: float = 12.0
    output_interval: float = 0.06
    integrator: str = "rk4"
    bcs: BoundarySpec = field(default_factory=BoundarySpec)
    ends: str = "periodic"                 # slab end treatment
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    slab_initial: SlabInitialSpec = field(default_factory=SlabInitialSpec)
    mms: MmsSpec = field(default_factory=MmsSpec)
    austenite_band: float = 0.02           # |eps| below: austenite label
    martensite_band: float = 0.08          # |eps| above: well-developed variant
    reconstruct_y: tuple = ()              # slab cross-section sample points

    def validate(self):
        if self.model not in ("full_1d", "slab"):
            raise ConfigError("[model] kind must be full_1d or slab")
        if self.dt <= 0:
            raise ConfigError("[time] dt must be positive")
        if self.t_end <= 0:
            raise ConfigError("[time] t_end must be positive")
        if self.output_interval <= 0:
            raise ConfigError("[time] output_interval must be positive")
        if self.nx < 4:
            raise ConfigError("[grid] nx must be at least 4")
        if self.length <= 0:
            raise ConfigError("[grid] length must be positive")
        if self.integrator not in solver1d.INTEGRATORS:
            raise ConfigError(
                f"[integrator] kind must be one of {solver1d.INTEGRATORS}")
        if self.austenite_band <= 0 or self.martensite_band < self.austenite_band:
            raise ConfigError("[phases] bands must satisfy 0 < austenite_band "
                              "<= martensite_band")
        needs_mms = (self.forcing.body_kind == "mms"
                     or self.forcing.heat_kind == "mms"
                     or "mms" in (self.initial.u_kind, self.initial.v_kind,
                                  self.initial.theta_kind))
        if needs_mms and self.model != "full_1d":
            raise ConfigError("mms forcing applies to the full_1d model only")
        return self

    # -- resolution to runnable setups --------------------------------------

    def _mms_case(self):
        return build_mms_case(self.material, self.length,
                              self.mms.u_amplitude, self.mms.omega_u,
                              self.mms.theta_bar, self.mms.theta_amplitude,
                              self.mms.omega_t)

    def _forcing(self, case) -> Forcing:
        def shaped(kind, value, amplitude, rate, mms_fn):
            if kind == "none":
                return lambda x, t: np.zeros_like(x)
            if kind == "const":
                return lambda x, t: np.full_like(x, value)
            if kind == "sin_cubed":
                return lambda x, t: np.full_like(x, amplitude
                                                 * math.sin(rate * t) ** 3)
            if kind == "mms":
                return mms_fn
            raise ConfigError(f"unknown forcing kind {kind!r}")

        fs = self.forcing
        return Forcing(
            shaped(fs.body_kind, fs.body_value, fs.body_amplitude,
                   fs.body_rate, case.body if case else None),
            shaped(fs.heat_kind, fs.heat_value, fs.heat_amplitude,
                   fs.heat_rate, case.heat if case else None))

    def _initial_state(self, grid: Grid1D, case) -> FieldState:
        x = grid.nodes()
        ini = self.initial
        if ini.u_kind == "zero":
            u = np.zeros_like(x)
        elif ini.u_kind == "piecewise_linear":
            if len(ini.u_breakpoints) < 2:
                raise ConfigError("[initial] u_breakpoints needs at least "
                                  "two x:value pairs")
            xp = [p[0] for p in ini.u_breakpoints]
            up = [p[1] for p in ini.u_breakpoints]
            u = np.interp(x, xp, up)
        elif ini.u_kind == "sine":
            u = ini.u_amplitude * np.sin(ini.u_mode * np.pi * x / grid.length)
        elif ini.u_kind == "mms":
            u = case.u(x, 0.0)
        else:
            raise ConfigError(f"unknown initial u kind {ini.u_kind!r}")

        if ini.v_kind == "zero":
            v = np.zeros_like(x)
        elif ini.v_kind == "sine":
            v = ini.v_amplitude * np.sin(ini.v_mode * np.pi * x / grid.length)
        elif ini.v_kind == "mms":
            v = case.v(x, 0.0)
        else:
            raise ConfigError(f"unknown initial v kind {ini.v_kind!r}")

        if ini.theta_kind == "const":
            theta = np.full_like(x, ini.theta_value)
        elif ini.theta_kind == "cosine":
            theta = ini.theta_value + ini.theta_amplitude * np.cos(
                ini.theta_mode * np.pi * x / grid.length)
        elif ini.theta_kind == "mms":
            theta = case.theta(x, 0.0)
        else:
            raise ConfigError(f"unknown initial theta kind {ini.theta_kind!r}")

        theta_dot = None
        if self.material.tau0 > 0:
            if ini.theta_dot_kind == "zero":
                theta_dot = np.zeros_like(x)
            elif ini.theta_dot_kind == "consistent":
                # slave value from the tau0 = 0 energy equation at t = 0
                p0 = self.material.with_(tau0=0.0)
                st0 = FieldState(0.0, u, v, theta)
                forcing = self._forcing(case)
                deriv = solver1d.rhs(st0, grid, p0, self.bcs, forcing, 0.0)
                theta_dot = deriv.theta
            else:
                raise ConfigError("theta_dot kind must be consistent or zero")
        return FieldState(0.0, u, v, theta, theta_dot)

    def _slab_field(self, spec: SlabFieldInit, x, length) -> np.ndarray:
        if spec.kind == "uniform":
            return np.full_like(x, spec.value)
        if spec.kind == "sine":
            return spec.value + spec.amplitude * np.sin(
                2.0 * np.pi * spec.mode * x / length)
        raise ConfigError(f"unknown slab field kind {spec.kind!r}")

    def resolve(self):
        """Build the runnable setup (RunSetup or SlabRunSetup)."""
        self.validate()
        if self.model == "slab":
            n = self.nx if self.ends == "periodic" else self.nx + 1
            x = np.arange(n) * (self.length / self.nx)
            si = self.slab_initial
            state0 = SlabState(
                0.0,
                self._slab_field(si.u1, x, self.length),
                self._slab_field(si.u2, x, self.length),
                self._slab_field(si.v1, x, self.length),
                self._slab_field(si.v2, x, self.length),
                self._slab_field(si.theta_prime, x, self.length))
            return SlabRunSetup(self.slab_material, self.length, self.nx,
                                state0, self.dt, self.t_end,
                                self.output_interval, self.ends)
        grid = Grid1D(self.length, self.nx)
        needs_mms = (self.forcing.body_kind == "mms"
                     or self.forcing.heat_kind == "mms"
                     or "mms" in (self.initial.u_kind, self.initial.v_kind,
                                  self.initial.theta_kind))
        case = self._mms_case() if needs_mms else None
        return RunSetup(grid, self.material, self.bcs, self._forcing(case),
                        self._initial_state(grid, case), self.dt, self.t_end,
                        self.output_interval, self.integrator,
                        -1.0 if self.gamma_negate else 1.0)


# ---------------------------------------------------------------------------
# INI serialisation


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fmt_breakpoints(bps) -> str:
    return ", ".join(f"{repr(float(x))}:{repr(float(u))}" for x, u in bps)


def _parse_breakpoints(text: str) -> tuple:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            xs, us = item.split(":")
            pairs.append((float(xs), float(us)))
        except ValueError as exc:
            raise ConfigError(f"[initial] bad breakpoint entry {item!r}") from exc
    return tuple(pairs)


_MATERIAL_KEYS = ("rho", "cv", "k0", "beta_tilde", "theta1", "k1", "k2",
                  "k3", "mu", "nu", "tau0", "gamma", "alpha0")
_SLAB_SIMPLE_KEYS = ("b", "rho", "cv", "kappa", "c_wave", "c_disp", "c_bend",
                     "s_quintic", "s_rate4", "s_rate2_cubic", "h_quintic",
                     "h_mixed33", "h_rate5", "h_curv_long", "h_curv_bend",
                     "h_flux2", "r_quad", "r_cubic", "r_rate", "t_mix",
                     "t_rate", "theta_ref")


def write_config(config: SimConfig) -> str:
    """Serialise to the INI schema (inverse of load_config)."""
    cp = configparser.ConfigParser()
    cp["model"] = {"kind": config.model}
    cp["grid"] = {"length": _fmt(config.length), "nx": str(config.nx)}
    cp["time"] = {"dt": _fmt(config.dt), "t_end": _fmt(config.t_end),
                  "output_interval": _fmt(config.output_interval)}
    cp["integrator"] = {"kind": config.integrator}
    if config.model == "full_1d":
        m = config.material
        cp["material"] = {k: _fmt(getattr(m, k)) for k in _MATERIAL_KEYS}
        cp["material"]["gamma_negate"] = _fmt(config.gamma_negate)
        if callable(config.bcs.theta_ambient):
            raise ConfigError("callable theta_ambient cannot be serialised")
        cp["bcs"] = {"mech": config.bcs.mech, "thermal": config.bcs.thermal,
                     "beta": _fmt(config.bcs.beta),
                     "theta_ambient": _fmt(float(config.bcs.theta_ambient)),
                     "fixed_value": _fmt(config.bcs.fixed_value)}
        fs = config.forcing
        cp["forcing"] = {
            "body": fs.body_kind, "body_value": _fmt(fs.body_value),
            "body_amplitude": _fmt(fs.body_amplitude),
            "body_rate": _fmt(fs.body_rate),
            "heat": fs.heat_kind, "heat_value": _fmt(fs.heat_value),
            "heat_amplitude": _fmt(fs.heat_amplitude),
            "heat_rate": _fmt(fs.heat_rate)}
        ini = config.initial
        cp["initial"] = {
            "u": ini.u_kind,
            "u_breakpoints": _fmt_breakpoints(ini.u_breakpoints),
            "u_amplitude": _fmt(ini.u_amplitude), "u_mode": str(ini.u_mode),
            "v": ini.v_kind, "v_amplitude": _fmt(ini.v_amplitude),
            "v_mode": str(ini.v_mode),
            "theta": ini.theta_kind, "theta_value": _fmt(ini.theta_value),
            "theta_amplitude": _fmt(ini.theta_amplitude),
            "theta_mode": str(ini.theta_mode),
            "theta_dot": ini.theta_dot_kind}
        cp["mms"] = {"u_amplitude": _fmt(config.mms.u_amplitude),
                     "omega_u": _fmt(config.mms.omega_u),
                     "theta_bar": _fmt(config.mms.theta_bar),
                     "theta_amplitude": _fmt(config.mms.theta_amplitude),
                     "omega_t": _fmt(config.mms.omega_t)}
        cp["phases"] = {"austenite_band": _fmt(config.austenite_band),
                        "martensite_band": _fmt(config.martensite_band)}
    else:
        sm = config.slab_material
        sec = {k: _fmt(getattr(sm, k)) for k in _SLAB_SIMPLE_KEYS}
        for name in ("s_theta", "s_cubic", "s_rate2", "h_cubic", "h_rate3",
                     "r_shear"):
            sec[name] = ", ".join(repr(float(v)) for v in getattr(sm, name))
        sec["h_lin"] = ", ".join(repr(float(v)) for v in sm.h_lin)
        cp["slab"] = sec
        cp["bcs"] = {"ends": config.ends}
        si = config.slab_initial
        sec = {}
        for name in ("u1", "u2", "v1", "v2", "theta_prime"):
            fi = getattr(si, name)
            sec[name] = fi.kind
            sec[f"{name}_value"] = _fmt(fi.value)
            sec[f"{name}_amplitude"] = _fmt(fi.amplitude)
            sec[f"{name}_mode"] = str(fi.mode)
        cp["slab_initial"] = sec
        if config.reconstruct_y:
            cp["output"] = {"reconstruct_y":
                            ", ".join(repr(float(y)) for y in config.reconstruct_y)}
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()


class _SectionReader:
    """Tracks consumed keys so unknown ones can be reported by name."""

    def __init__(self, cp: configparser.ConfigParser, name: str):
        self.name = name
        self.items = dict(cp[name]) if cp.has_section(name) else {}
        self.seen = set()

    def get(self, key, default=None, cast=str):
        if key in self.items:
            self.seen.add(key)
            raw = self.items[key]
            try:
                if cast is bool:
                    if raw.lower() not in ("true", "false"):
                        raise ValueError(raw)
                    return raw.lower() == "true"
                return cast(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(
                    f"[{self.name}] {key}: cannot parse {raw!r}") from exc
        return default

    def finish(self):
        unknown = set(self.items) - self.seen
        if unknown:
            raise ConfigError(
                f"[{self.name}] unknown keys: {', '.join(sorted(unknown))}")


def _read_config_text(text: str) -> SimConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    required = ("model", "grid", "time")
    missing = [s for s in required if not cp.has_section(s)]
    if missing:
        raise ConfigError(
            "missing required sections: " + ", ".join(missing)
            + " (required keys: [model] kind; [grid] length, nx; "
              "[time] dt, t_end, output_interval)")

    sec = _SectionReader(cp, "model")
    model = sec.get("kind", "full_1d")
    sec.finish()

    sec = _SectionReader(cp, "grid")
    length = sec.get("length", None, float)
    nx = sec.get("nx", None, int)
    sec.finish()
    if length is None or nx is None:
        raise ConfigError("[grid] must provide length and nx")

    sec = _SectionReader(cp, "time")
    dt = sec.get("dt", None, float)
    t_end = sec.get("t_end", None, float)
    out_int = sec.get("output_interval", None, float)
    sec.finish()
    if dt is None or t_end is None or out_int is None:
        raise ConfigError("[time] must provide dt, t_end and output_interval")

    sec = _SectionReader(cp, "integrator")
    integrator = sec.get("kind", "rk4")
    sec.finish()

    config = SimConfig(model=model, length=length, nx=nx, dt=dt, t_end=t_end,
                       output_interval=out_int, integrator=integrator)

    known = {"model", "grid", "time", "integrator"}
    if model == "full_1d":
        known |= {"material", "bcs", "forcing", "initial", "mms", "phases"}
        sec = _SectionReader(cp, "material")
        kw = {}
        for key in _MATERIAL_KEYS:
            val = sec.get(key, None, float)
            if val is not None:
                kw[key] = val
        gamma_negate = sec.get("gamma_negate", False, bool)
        sec.finish()
        try:
            material = cu_based().with_(**kw)
        except ValueError as exc:
            raise ConfigError(f"[material] {exc}") from exc
        sec = _SectionReader(cp, "bcs")
        try:
            bcs = BoundarySpec(sec.get("mech", "pinned"),
                               sec.get("thermal", "insulated"),
                               sec.get("beta", 0.0, float),
                               sec.get("theta_ambient", 0.0, float),
                               sec.get("fixed_value", 300.0, float))
        except ValueError as exc:
            raise ConfigError(f"[bcs] {exc}") from exc
        sec.finish()
        sec = _SectionReader(cp, "forcing")
        forcing = ForcingSpec(
            sec.get("body", "none"), sec.get("body_value", 0.0, float),
            sec.get("body_amplitude", 0.0, float),
            sec.get("body_rate", 0.0, float),
            sec.get("heat", "none"), sec.get("heat_value", 0.0, float),
            sec.get("heat_amplitude", 0.0, float),
            sec.get("heat_rate", 0.0, float))
        sec.finish()
        sec = _SectionReader(cp, "initial")
        initial = InitialSpec(
            sec.get("u", "zero"),
            _parse_breakpoints(sec.get("u_breakpoints", "", str)),
            sec.get("u_amplitude", 0.0, float), sec.get("u_mode", 1, int),
            sec.get("v", "zero"), sec.get("v_amplitude", 0.0, float),
            sec.get("v_mode", 1, int),
            sec.get("theta", "const"), sec.get("theta_value", 300.0, float),
            sec.get("theta_amplitude", 0.0, float),
            sec.get("theta_mode", 1, int),
            sec.get("theta_dot", "consistent"))
        sec.finish()
        sec = _SectionReader(cp, "mms")
        mms = MmsSpec(sec.get("u_amplitude", 0.005, float),
                      sec.get("omega_u", 3.0, float),
                      sec.get("theta_bar", 300.0, float),
                      sec.get("theta_amplitude", 5.0, float),
                      sec.get("omega_t", 2.0, float))
        sec.finish()
        sec = _SectionReader(cp, "phases")
        aust = sec.get("austenite_band", 0.02, float)
        mart = sec.get("martensite_band", 0.08, float)
        sec.finish()
        config = replace(config, material=material, gamma_negate=gamma_negate,
                         bcs=bcs, forcing=forcing, initial=initial, mms=mms,
                         austenite_band=aust, martensite_band=mart)
    else:
        known |= {"slab", "bcs", "slab_initial", "output"}
        sec = _SectionReader(cp, "slab")
        kw = {}
        for key in _SLAB_SIMPLE_KEYS:
            val = sec.get(key, None, float)
            if val is not None:
                kw[key] = val
        for name, size in (("s_theta", 2), ("s_cubic", 2), ("s_rate2", 2),
                           ("h_cubic", 2), ("h_rate3", 2), ("r_shear", 2),
                           ("h_lin", 3)):
            raw = sec.get(name, None, str)
            if raw is not None:
                vals = tuple(float(v) for v in raw.split(","))
                if len(vals) != size:
                    raise ConfigError(f"[slab] {name} needs {size} values")
                kw[name] = vals
        sec.finish()
        try:
            slab_material = replace(cu_based_slab(), **kw)
        except ValueError as exc:
            raise ConfigError(f"[slab] {exc}") from exc
        sec = _SectionReader(cp, "bcs")
        ends = sec.get("ends", "periodic")
        sec.finish()
        sec = _SectionReader(cp, "slab_initial")
        fields = {}
        for name in ("u1", "u2", "v1", "v2", "theta_prime"):
            fields[name] = SlabFieldInit(
                sec.get(name, "uniform"),
                sec.get(f"{name}_value", 0.0, float),
                sec.get(f"{name}_amplitude", 0.0, float),
                sec.get(f"{name}_mode", 1, int))
        sec.finish()
        sec = _SectionReader(cp, "output")
        raw = sec.get("reconstruct_y", "", str)
        recon = tuple(float(v) for v in raw.split(",") if v.strip()) if raw else ()
        sec.finish()
        config = replace(config, slab_material=slab_material, ends=ends,
                         slab_initial=SlabInitialSpec(**fields),
                         reconstruct_y=recon)

    unknown_sections = set(cp.sections()) - known
    if unknown_sections:
        raise ConfigError("unknown sections: "
                          + ", ".join(sorted(unknown_sections)))
    return config.validate()


def load_config(path: str) -> SimConfig:
    """Read and validate an INI config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if not text.strip():
        raise ConfigError(
            "empty config; required sections/keys: [model] kind; "
            "[grid] length, nx; [time] dt, t_end, output_interval")
    return _read_config_text(text)


# ---------------------------------------------------------------------------
# presets


def preset(name: str) -> SimConfig:
    """Built-in run configurations.

    experiment1: thermal control of the phase transformations.  Four-variant
    martensite start (piecewise-linear u0 with slope magnitude 0.11809),
    theta0 = 200 K, pinned + controlled-flux ends (beta = 0, degenerating to
    insulation since the exchange coefficient is not quoted anywhere),
    F = 500, G = 375 pi sin^3(pi t/6); nx = 24, dt = 7e-4 ms.  The sin^3
    heating alternates sign, so one 12 ms period gives one full
    heating/cooling cycle; t_end = 12 ms is this package's choice.

    experiment2: mechanical control.  Austenite start (u0 = 0) at 255 K,
    G = 0, F = 7000 sin^3(pi t/2); nx = 16, dt = 8e-4 ms, t_end = 8 ms
    (two loading periods).

    Both experiments use the implicit-Euler integrator: at the quoted
    steps the explicit CFL bound is violated by the stiff martensite
    branches, and its strong damping is what stabilises the locally
    ill-posed spinodal passes (see solver1d).

    conservation / mms: verification harnesses (explicit RK4).
    """
    if name == "experiment1":
        slope = 0.11809
        bps = ((0.0, 0.0), (1.0 / 6.0, -slope / 6.0), (0.5, slope / 6.0),
               (5.0 / 6.0, -slope / 6.0), (1.0, 0.0))
        return SimConfig(
            model="full_1d", material=cu_based(), length=1.0, nx=24,
            dt=7e-4, t_end=12.0, output_interval=0.06,
            integrator="implicit_euler",
            bcs=BoundarySpec("pinned", "controlled_flux", 0.0, 200.0),
            forcing=ForcingSpec(body_kind="const", body_value=500.0,
                                heat_kind="sin_cubed",
                                heat_amplitude=375.0 * math.pi,
                                heat_rate=math.pi / 6.0),
            initial=InitialSpec(u_kind="piecewise_linear", u_breakpoints=bps,
                                theta_kind="const", theta_value=200.0))
    if name == "experiment2":
        return SimConfig(
            model="full_1d", material=cu_based(), length=1.0, nx=16,
            dt=8e-4, t_end=8.0, output_interval=0.04,
            integrator="implicit_euler",
            bcs=BoundarySpec("pinned", "controlled_flux", 0.0, 255.0),
            forcing=ForcingSpec(body_kind="sin_cubed", body_amplitude=7000.0,
                                body_rate=math.pi / 2.0),
            initial=InitialSpec(u_kind="zero", theta_kind="const",
                                theta_value=255.0))
    if name == "conservation":
        return SimConfig(
            model="full_1d", material=cu_based(), length=1.0, nx=48,
            dt=2e-4, t_end=2.0, output_interval=0.05, integrator="rk4",
            bcs=BoundarySpec("pinned", "insulated"),
            forcing=ForcingSpec(),
            initial=InitialSpec(u_kind="piecewise_linear",
                                u_breakpoints=((0.0, 0.0), (0.5, 0.005),
                                               (1.0, 0.0)),
                                theta_kind="const", theta_value=250.0))
    if name == "mms":
        return SimConfig(
            model="full_1d", material=cu_based(), length=1.0, nx=32,
            dt=2.5e-4, t_end=0.25, output_interval=0.05, integrator="rk4",
            bcs=BoundarySpec("pinned", "insulated"),
            forcing=ForcingSpec(body_kind="mms", heat_kind="mms"),
            initial=InitialSpec(u_kind="mms", v_kind="mms", theta_kind="mms"),
            mms=MmsSpec())
    raise ConfigError(f"unknown preset {name!r}; available: {PRESETS}")


# ---------------------------------------------------------------------------
# artifacts


def classify_strain(eps, austenite_band: float) -> np.ndarray:
    """Label strains: 'A' inside the austenite band, else 'M+'/'M-'."""
    eps = np.asarray(eps)
    labels = np.where(np.abs(eps) < austenite_band, "A",
                      np.where(eps > 0, "M+", "M-"))
    return labels


def _node_strain_stress(state, grid, params, bcs, forcing):
    eps_m = state.strain(grid)
    s_m = compute_stress(state, grid, params, bcs, forcing)
    return solver1d._node_average(eps_m), solver1d._node_average(s_m)


def _write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _write_1d_artifacts(out_dir, config, setup, traj):
    grid = setup.grid
    x = grid.nodes()
    rows = []
    node_strains = []
    for st in traj.snapshots:
        eps_n, s_n = _node_strain_stress(st, grid, setup.params, setup.bcs,
                                         setup.forcing)
        node_strains.append(eps_n)
        for i in range(x.size):
            rows.append((st.t, x[i], st.u[i], st.v[i], st.theta[i],
                         eps_n[i], s_n[i]))
    _write_rows(os.path.join(out_dir, "snapshots.csv"),
                "t,x,u,v,theta,strain,stress", rows)
    _write_rows(os.path.join(out_dir, "diagnostics.csv"),
                "t,total_energy,max_abs_strain,theta_min,theta_max",
                traj.diagnostics)

    lines = []
    e0 = traj.diagnostics[0][1]
    drift = max(abs(d[1] - e0) for d in traj.diagnostics) / max(abs(e0), 1e-300)
    for st, eps_n in zip(traj.snapshots, node_strains):
        labels = classify_strain(eps_n, config.austenite_band)
        n_a = int(np.sum(labels == "A"))
        n_p = int(np.sum(labels == "M+"))
        n_m = int(np.sum(labels == "M-"))
        lines.append(f"t={st.t:.6g} A={n_a} M+={n_p} M-={n_m} "
                     f"eps_min={eps_n.min():.6g} eps_max={eps_n.max():.6g}")
    lines.append(f"max_energy_drift_relative={drift:.6g}")
    lines.append("final_labels=" + "".join(
        {"A": "a", "M+": "+", "M-": "-"}[l] for l in
        classify_strain(node_strains[-1], config.austenite_band)))
    if traj.failed:
        lines.append(f"FAILED {traj.failure}")
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_slab_artifacts(out_dir, config, setup, traj):
    n = setup.state0.U1.size
    x = np.arange(n) * setup.dx
    rows = []
    for st in traj.snapshots:
        for i in range(n):
            rows.append((st.t, x[i], st.U1[i], st.U2[i], st.V1[i], st.V2[i],
                         st.Th[i]))
    _write_rows(os.path.join(out_dir, "snapshots.csv"),
                "t,x,U1,U2,V1,V2,ThetaPrime", rows)
    _write_rows(os.path.join(out_dir, "diagnostics.csv"),
                "t,max_abs_U1x,max_abs_U2x,theta_prime_min,theta_prime_max",
                traj.diagnostics)
    if config.reconstruct_y:
        rows = []
        for st in traj.snapshots:
            for yv in config.reconstruct_y:
                u1, u2, th = reconstruct_fields(st, setup.params, yv,
                                                setup.dx, setup.ends)
                for i in range(n):
                    rows.append((st.t, x[i], yv, u1[i], u2[i], th[i]))
        _write_rows(os.path.join(out_dir, "reconstruction.csv"),
                    "t,x,Y,u1,u2,theta", rows)
    lines = [f"t={d[0]:.6g} max_abs_U1x={d[1]:.6g} max_abs_U2x={d[2]:.6g} "
             f"theta_prime=[{d[3]:.6g},{d[4]:.6g}]" for d in traj.diagnostics]
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run(config: SimConfig, out_dir: str) -> int:
    """Execute a run and write snapshots.csv, diagnostics.csv,
    config_resolved.txt and summary.txt into out_dir.

    Returns the process exit code: 0 on success, 2 on integration abort
    (partial artifacts are written, summary carries a FAILED marker).
    """
    setup = config.resolve()
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config_resolved.txt"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(write_config(config))
    code = 0
    if config.model == "slab":
        traj = slab_simulate(setup)
        _write_slab_artifacts(out_dir, config, setup, traj)
    else:
        try:
            traj = simulate(setup)
        except IntegrationError as err:
            traj = err.partial
            code = 2
        _write_1d_artifacts(out_dir, config, setup, traj)
    return code


# ---------------------------------------------------------------------------
# command line


def _apply_overrides(text: str, overrides: list[str]) -> str:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    for item in overrides:
        try:
            key, value = item.split("=", 1)
            section, option = key.strip().split(".", 1)
        except ValueError:
            raise ConfigError(f"override must look like section.key=value, "
                              f"got {item!r}")
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, option.strip(), value.strip())
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sma",
        description="Shape-memory-alloy bar and slab dynamics simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one simulation")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", metavar="PATH")
    p_run.add_argument("--out", default="out", metavar="DIR")
    p_run.add_argument("--override", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="applied after load, before validation")
    sub.add_parser("presets", help="list built-in presets")

    args = parser.parse_args(argv)
    if args.command == "presets":
        for name in PRESETS:
            print(name)
        return 0

    try:
        if args.preset:
            config = preset(args.preset)
            if args.override:
                text = _apply_overrides(write_config(config), args.override)
                config = _read_config_text(text)
        else:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
            if not text.strip():
                raise ConfigError(
                    "empty config; required sections/keys: [model] kind; "
                    "[grid] length, nx; [time] dt, t_end, output_interval")
            if args.override:
                text = _apply_overrides(text, args.override)
            config = _read_config_text(text)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        code = run(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if code == 0:
        print(f"run complete; artifacts in {args.out}")
    else:
        print(f"integration aborted; partial artifacts in {args.out}",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
