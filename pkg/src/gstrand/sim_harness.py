"""Scenario configuration, RK4 time stepping, diagnostics, and file output.

A scenario is a JSON object naming one of the registered models, a periodic
(s, t) grid, model parameters with initial data, a list of diagnostics, and
an output block.  ``run_scenario`` integrates with classical RK4, stores
snapshots at a fixed step cadence, evaluates the requested diagnostics over
the stored trajectory, and writes one CSV per field and per diagnostic plus
a ``report.json``.  Identical configurations produce byte-identical files.

Initial data for the field models is declarative: each vector component is
a list of ``[amplitude, wavenumber, phase]`` harmonics summed as
``amp * sin(k * s + phase)``, with every wavenumber required to fit an
integer number of periods on the strand.  Constants are the ``k = 0``
harmonic with phase pi/2.  The two ``*_exact`` peakon models instead take a
wave-profile descriptor (see ``analytic_solutions``) and draw their initial
data and reference values from the closed-form solutions.
"""

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebra import DiagonalParams
from .analytic_solutions import (
    CollisionSolution,
    WaveProfile,
    collision_exact,
    profile_from_descriptor,
    single_peakon_exact,
)
from .errors import BlowUpError, ConfigError, SimulationError
from .integrability import aniso_lax, chiral_lax, invariant_drift, zero_curvature_residual
from .peakon_dynamics import (
    MAX_PEAKONS,
    PeakonState,
    peakon_rhs,
    s_constraint_residual,
)
from .so3_dynamics import (
    MIN_NODES,
    So3StrandState,
    SpinChainParams,
    XYState,
    aniso_rhs_XY,
    aniso_rhs_uv,
    chiral_rhs,
    compatibility_residual,
    spin_chain_rhs,
)
from .stencil import DerivativeStencil

CFL_LIMIT = 0.5
PERIODICITY_TOL = 1e-9
DIVISIBILITY_TOL = 1e-9
ORDER_FLOOR = 1e-13

DEFAULT_CHIRAL_LAMBDAS = (0.5, 1.0, 2.0, -1.0)
DEFAULT_ANISO_LAMBDAS = (0.0, 0.5, 1.0)

MODELS = (
    ("spin_chain", "SO(3) spin chain with inertia operators A and B"),
    ("chiral", "SO(3) chiral model u_t = v_s, v_t = u_s - u x v"),
    ("aniso_uv", "anisotropic chiral model in (u, v) variables"),
    ("aniso_xy", "anisotropic chiral model in counter-propagating (X, Y) variables"),
    ("peakon", "Diff(R)-strand peakon system with free initial data"),
    ("peakon_single_exact", "single peakon riding a closed-form wave profile"),
    ("peakon_collision_exact", "antisymmetric peakon-antipeakon pair from a wave profile"),
)
MODEL_NAMES = tuple(name for name, _ in MODELS)

_DIAGNOSTICS_BY_MODEL = {
    "spin_chain": ("zero_curvature",),
    "chiral": ("zero_curvature",),
    "aniso_uv": ("lax",),
    "aniso_xy": ("invariant_drift",),
    "peakon": ("s_constraint", "conservation_sums"),
    "peakon_single_exact": ("s_constraint", "conservation_sums"),
    "peakon_collision_exact": ("s_constraint", "conservation_sums"),
}


def rk4_step(state, rhs, dt):
    """One classical four-stage Runge-Kutta step.

    ``state`` is a (possibly scalar) ndarray, ``rhs`` a pure function of it.
    Raises BlowUpError when the stepped state contains non-finite values.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * dt * k1)
    k3 = rhs(state + 0.5 * dt * k2)
    k4 = rhs(state + dt * k3)
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise BlowUpError("non-finite field values after step")
    return out


# --------------------------------------------------------------------------
# configuration


def _require_keys(d, required, optional, path):
    if not isinstance(d, dict):
        raise ConfigError(f"{path} must be a JSON object, got {type(d).__name__}")
    missing = [k for k in required if k not in d]
    if missing:
        raise ConfigError(f"{path} is missing required keys {missing}")
    unknown = sorted(set(d) - set(required) - set(optional))
    if unknown:
        raise ConfigError(f"{path} has unknown keys {unknown}")


def _number(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{path} must be a number, got {x!r}")
    v = float(x)
    if not math.isfinite(v):
        raise ConfigError(f"{path} must be finite, got {v}")
    return v


def _integer(x, path):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{path} must be an integer, got {x!r}")
    return x


def _check_terms(terms, s_length, path):
    """Validate a harmonic series: list of [amplitude, wavenumber, phase]."""
    if not isinstance(terms, list):
        raise ConfigError(f"{path} must be a list of [amp, k, phase] triples")
    out = []
    for i, term in enumerate(terms):
        if not isinstance(term, list) or len(term) != 3:
            raise ConfigError(f"{path}[{i}] must be an [amp, k, phase] triple")
        amp = _number(term[0], f"{path}[{i}][0]")
        k = _number(term[1], f"{path}[{i}][1]")
        ph = _number(term[2], f"{path}[{i}][2]")
        cycles = k * s_length / (2.0 * math.pi)
        if abs(cycles - round(cycles)) > PERIODICITY_TOL:
            raise ConfigError(
                f"{path}[{i}]: wavenumber {k} does not fit an integer number "
                f"of periods on a strand of length {s_length}"
            )
        out.append([amp, k, ph])
    return out


def _check_components(components, s_length, path):
    """Validate a 3-component harmonic field description."""
    if not isinstance(components, list) or len(components) != 3:
        raise ConfigError(f"{path} must be a list of 3 component term lists")
    return [_check_terms(components[i], s_length, f"{path}[{i}]") for i in range(3)]


def _eval_terms(terms, s):
    out = np.zeros_like(s)
    for amp, k, ph in terms:
        out = out + amp * np.sin(k * s + ph)
    return out


def _field_from_components(components, s):
    return np.stack([_eval_terms(terms, s) for terms in components], axis=1)


def _profile_wavenumbers(descriptor):
    kind = descriptor["type"]
    if kind == "traveling":
        return [term[1] for term in descriptor["terms"]]
    if kind == "standing":
        return [descriptor["wavenumber"]]
    ks = []
    for part in descriptor["parts"]:
        ks.extend(_profile_wavenumbers(part))
    return ks


def _check_profile(descriptor, s_length, path):
    try:
        profile = profile_from_descriptor(descriptor)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for k in _profile_wavenumbers(profile.descriptor):
        cycles = k * s_length / (2.0 * math.pi)
        if abs(cycles - round(cycles)) > PERIODICITY_TOL:
            raise ConfigError(
                f"{path}: profile wavenumber {k} does not fit an integer "
                f"number of periods on a strand of length {s_length}"
            )
    return profile


def _diagonal(x, role, path):
    if not isinstance(x, list) or len(x) != 3:
        raise ConfigError(f"{path} must be a list of 3 numbers")
    vals = [_number(v, f"{path}[{i}]") for i, v in enumerate(x)]
    try:
        return DiagonalParams(np.array(vals), role)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _validate_params(model, params, s_length):
    path = "params"
    if model == "spin_chain":
        _require_keys(params, ("A", "B", "initial"), (), path)
        _require_keys(params["initial"], ("u", "v"), (), f"{path}.initial")
        a = _diagonal(params["A"], "inertia-A", f"{path}.A")
        b = _diagonal(params["B"], "inertia-B", f"{path}.B")
        return {
            "spin_params": SpinChainParams(a, b),
            "initial_u": _check_components(params["initial"]["u"], s_length, f"{path}.initial.u"),
            "initial_v": _check_components(params["initial"]["v"], s_length, f"{path}.initial.v"),
        }
    if model == "chiral":
        _require_keys(params, ("initial",), (), path)
        _require_keys(params["initial"], ("u", "v"), (), f"{path}.initial")
        return {
            "initial_u": _check_components(params["initial"]["u"], s_length, f"{path}.initial.u"),
            "initial_v": _check_components(params["initial"]["v"], s_length, f"{path}.initial.v"),
        }
    if model == "aniso_uv":
        _require_keys(params, ("P", "initial"), (), path)
        _require_keys(params["initial"], ("u", "v"), (), f"{path}.initial")
        return {
            "p": _diagonal(params["P"], "anisotropy-P", f"{path}.P"),
            "initial_u": _check_components(params["initial"]["u"], s_length, f"{path}.initial.u"),
            "initial_v": _check_components(params["initial"]["v"], s_length, f"{path}.initial.v"),
        }
    if model == "aniso_xy":
        _require_keys(params, ("P", "initial"), (), path)
        _require_keys(params["initial"], ("X", "Y"), (), f"{path}.initial")
        return {
            "p": _diagonal(params["P"], "anisotropy-P", f"{path}.P"),
            "initial_x": _check_components(params["initial"]["X"], s_length, f"{path}.initial.X"),
            "initial_y": _check_components(params["initial"]["Y"], s_length, f"{path}.initial.Y"),
        }
    if model == "peakon":
        _require_keys(params, ("count", "initial"), (), path)
        count = _integer(params["count"], f"{path}.count")
        if not 1 <= count <= MAX_PEAKONS:
            raise ConfigError(f"{path}.count must be in [1, {MAX_PEAKONS}], got {count}")
        _require_keys(params["initial"], ("q", "m", "n"), (), f"{path}.initial")
        parsed = {"count": count}
        for key in ("q", "m", "n"):
            rows = params["initial"][key]
            if not isinstance(rows, list) or len(rows) != count:
                raise ConfigError(
                    f"{path}.initial.{key} must be a list of {count} per-peakon term lists"
                )
            parsed[f"initial_{key}"] = [
                _check_terms(rows[a], s_length, f"{path}.initial.{key}[{a}]")
                for a in range(count)
            ]
        return parsed
    if model == "peakon_single_exact":
        _require_keys(params, ("profile",), (), path)
        return {"profile": _check_profile(params["profile"], s_length, f"{path}.profile")}
    if model == "peakon_collision_exact":
        _require_keys(params, ("profile", "branch"), (), path)
        branch = _integer(params["branch"], f"{path}.branch")
        if branch not in (1, -1):
            raise ConfigError(f"{path}.branch must be +1 or -1, got {branch}")
        profile = _check_profile(params["profile"], s_length, f"{path}.profile")
        return {"solution": CollisionSolution(profile, branch)}
    raise ConfigError(f"unknown model {model!r}, expected one of {list(MODEL_NAMES)}")


def _validate_diagnostics(model, diags, n_snapshots):
    if not isinstance(diags, list):
        raise ConfigError("diagnostics must be a list")
    allowed = _DIAGNOSTICS_BY_MODEL[model]
    seen = set()
    out = []
    for i, entry in enumerate(diags):
        path = f"diagnostics[{i}]"
        _require_keys(entry, ("kind",), ("lambdas",), path)
        kind = entry["kind"]
        if not isinstance(kind, str) or kind not in allowed:
            raise ConfigError(
                f"{path}.kind {kind!r} is not valid for model {model!r}; "
                f"allowed: {list(allowed)}"
            )
        if kind in seen:
            raise ConfigError(f"{path}: diagnostic {kind!r} requested more than once")
        seen.add(kind)
        parsed = {"kind": kind}
        if "lambdas" in entry:
            if kind == "zero_curvature" and model == "spin_chain":
                raise ConfigError(
                    f"{path}: the spin-chain compatibility residual takes no "
                    "spectral parameters"
                )
            if kind not in ("zero_curvature", "lax"):
                raise ConfigError(f"{path}: {kind!r} takes no 'lambdas' key")
            lams = entry["lambdas"]
            if not isinstance(lams, list) or not lams:
                raise ConfigError(f"{path}.lambdas must be a non-empty list of numbers")
            vals = [_number(v, f"{path}.lambdas[{j}]") for j, v in enumerate(lams)]
            if kind == "zero_curvature" and any(v == 0.0 for v in vals):
                raise ConfigError(f"{path}.lambdas: the chiral pair has a pole at lambda 0")
            parsed["lambdas"] = tuple(vals)
        elif kind == "zero_curvature" and model == "chiral":
            parsed["lambdas"] = DEFAULT_CHIRAL_LAMBDAS
        elif kind == "lax":
            parsed["lambdas"] = DEFAULT_ANISO_LAMBDAS
        if kind in ("zero_curvature", "lax") and n_snapshots < 3:
            raise ConfigError(
                f"{path}: {kind!r} needs at least 3 stored snapshots for the "
                f"centered time difference; cadence stores only {n_snapshots}"
            )
        out.append(parsed)
    return tuple(out)


@dataclass
class ScenarioConfig:
    """Validated run description; build with ``from_dict`` or ``from_file``."""

    model: str
    s_length: float
    n_nodes: int
    dt: float
    t_end: float
    n_steps: int
    cadence: int
    directory: str | None
    diagnostics: tuple
    params: dict
    raw: dict

    @classmethod
    def from_dict(cls, d):
        _require_keys(d, ("model", "grid", "params", "diagnostics", "output"), (), "config")
        model = d["model"]
        if model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {model!r}, expected one of {list(MODEL_NAMES)}")

        grid = d["grid"]
        _require_keys(grid, ("S", "N_s", "dt", "t_end"), (), "grid")
        s_length = _number(grid["S"], "grid.S")
        if s_length <= 0.0:
            raise ConfigError(f"grid.S must be positive, got {s_length}")
        n_nodes = _integer(grid["N_s"], "grid.N_s")
        if n_nodes < MIN_NODES:
            raise ConfigError(f"grid.N_s must be at least {MIN_NODES}, got {n_nodes}")
        dt = _number(grid["dt"], "grid.dt")
        if dt <= 0.0:
            raise ConfigError(f"grid.dt must be positive, got {dt}")
        t_end = _number(grid["t_end"], "grid.t_end")
        if t_end < dt:
            raise ConfigError(f"grid.t_end must be at least one step, got {t_end} < {dt}")
        steps = t_end / dt
        n_steps = round(steps)
        if abs(steps - n_steps) > DIVISIBILITY_TOL * max(1.0, n_steps):
            raise ConfigError(
                f"grid.t_end = {t_end} is not an integer multiple of dt = {dt}"
            )
        ds = s_length / n_nodes
        cfl = dt / ds
        if cfl > CFL_LIMIT + 1e-12:
            raise ConfigError(
                f"CFL number dt/ds = {cfl:.6g} exceeds the limit {CFL_LIMIT}"
            )

        output = d["output"]
        _require_keys(output, ("directory", "cadence"), (), "output")
        directory = output["directory"]
        if directory is not None and not isinstance(directory, str):
            raise ConfigError("output.directory must be a string or null")
        cadence = _integer(output["cadence"], "output.cadence")
        if cadence < 1:
            raise ConfigError(f"output.cadence must be at least 1, got {cadence}")
        if n_steps % cadence != 0:
            raise ConfigError(
                f"output.cadence = {cadence} does not divide the {n_steps} steps"
            )

        n_snapshots = n_steps // cadence + 1
        params = _validate_params(model, d["params"], s_length)
        diagnostics = _validate_diagnostics(model, d["diagnostics"], n_snapshots)
        return cls(
            model=model,
            s_length=s_length,
            n_nodes=n_nodes,
            dt=dt,
            t_end=t_end,
            n_steps=n_steps,
            cadence=cadence,
            directory=directory,
            diagnostics=diagnostics,
            params=params,
            raw=copy.deepcopy(d),
        )

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def refined(self, factor: int):
        """Copy of the config with (ds, dt) divided by ``factor`` jointly."""
        if not (isinstance(factor, int) and factor >= 1):
            raise ConfigError(f"refinement factor must be a positive integer, got {factor}")
        raw = copy.deepcopy(self.raw)
        raw["grid"]["N_s"] = self.n_nodes * factor
        raw["grid"]["dt"] = self.dt / factor
        raw["output"]["directory"] = None
        return ScenarioConfig.from_dict(raw)


# --------------------------------------------------------------------------
# model runtimes


def _guard_finite(y):
    if not np.all(np.isfinite(y)):
        raise BlowUpError("non-finite field values during stage evaluation")


def _build_runtime(cfg: ScenarioConfig):
    """Initial packed state, RHS closure, and output layout for a scenario."""
    ds = cfg.s_length / cfg.n_nodes
    s = np.arange(cfg.n_nodes) * ds
    sten = DerivativeStencil(order=2, ds=ds)
    length = cfg.s_length
    p = cfg.params

    if cfg.model in ("spin_chain", "chiral", "aniso_uv"):
        u0 = _field_from_components(p["initial_u"], s)
        v0 = _field_from_components(p["initial_v"], s)
        y0 = np.stack([u0, v0])
        if cfg.model == "spin_chain":
            spin_params = p["spin_params"]

            def rhs(y):
                _guard_finite(y)
                du, dv = spin_chain_rhs(So3StrandState(length, y[0], y[1]), spin_params, sten)
                return np.stack([du, dv])

        elif cfg.model == "chiral":

            def rhs(y):
                _guard_finite(y)
                du, dv = chiral_rhs(So3StrandState(length, y[0], y[1]), sten)
                return np.stack([du, dv])

        else:
            aniso_p = p["p"]

            def rhs(y):
                _guard_finite(y)
                du, dv = aniso_rhs_uv(So3StrandState(length, y[0], y[1]), aniso_p, sten)
                return np.stack([du, dv])

        fields = [("u", lambda y: y[0]), ("v", lambda y: y[1])]
        return {"y0": y0, "rhs": rhs, "fields": fields, "stencil": sten,
                "s": s, "reference": None}

    if cfg.model == "aniso_xy":
        x0 = _field_from_components(p["initial_x"], s)
        yy0 = _field_from_components(p["initial_y"], s)
        y0 = np.stack([x0, yy0])
        aniso_p = p["p"]

        def rhs(y):
            _guard_finite(y)
            dx, dy = aniso_rhs_XY(XYState(length, y[0], y[1]), aniso_p, sten)
            return np.stack([dx, dy])

        fields = [("X", lambda y: y[0]), ("Y", lambda y: y[1])]
        return {"y0": y0, "rhs": rhs, "fields": fields, "stencil": sten,
                "s": s, "reference": None}

    # peakon family: packed state (3, N_s, A) holding q, m, n
    if cfg.model == "peakon":
        count = p["count"]
        q0 = np.stack([_eval_terms(t, s) for t in p["initial_q"]], axis=1)
        m0 = np.stack([_eval_terms(t, s) for t in p["initial_m"]], axis=1)
        n0 = np.stack([_eval_terms(t, s) for t in p["initial_n"]], axis=1)
        reference = None
    elif cfg.model == "peakon_single_exact":
        profile = p["profile"]
        q, m, n = single_peakon_exact(profile, s, 0.0)
        q0, m0, n0 = q[:, None], m[:, None], n[:, None]

        def reference(t):
            q, m, n = single_peakon_exact(profile, s, t)
            return {"Q": q[:, None], "M": m[:, None], "N": n[:, None]}

    else:
        sol = p["solution"]
        sample = collision_exact(sol, s, 0.0)
        q0 = np.stack([sample.q1, sample.q2], axis=1)
        m0 = np.stack([sample.m1, sample.m2], axis=1)
        n0 = np.stack([sample.n1, sample.n2], axis=1)

        def reference(t):
            return {"X": sol.separation(s, t)}

    y0 = np.stack([q0, m0, n0])

    def rhs(y):
        _guard_finite(y)
        dq, dm, dn = peakon_rhs(PeakonState(length, y[0], y[1], y[2]), sten)
        return np.stack([dq, dm, dn])

    fields = [("Q", lambda y: y[0]), ("M", lambda y: y[1]), ("N", lambda y: y[2])]
    return {"y0": y0, "rhs": rhs, "fields": fields, "stencil": sten,
            "s": s, "reference": reference}


# --------------------------------------------------------------------------
# diagnostics over stored snapshots


def _series_max(fields):
    """Per-time max magnitude of a (T, ...) residual stack."""
    return np.max(np.abs(fields.reshape(fields.shape[0], -1)), axis=1)


def _evaluate_diagnostics(cfg, runtime, snaps, times):
    out = {}
    sten = runtime["stencil"]
    dt_snap = cfg.dt * cfg.cadence
    length = cfg.s_length
    ds = length / cfg.n_nodes

    so3_states = None
    peakon_states = None

    for entry in cfg.diagnostics:
        kind = entry["kind"]
        if kind == "zero_curvature":
            if cfg.model == "chiral":
                if so3_states is None:
                    so3_states = [So3StrandState(length, y[0], y[1]) for y in snaps]
                columns = {}
                for lam in entry["lambdas"]:
                    conns = [chiral_lax(st, lam) for st in so3_states]
                    res = zero_curvature_residual(conns, sten, dt_snap)
                    columns[f"lam_{lam:g}"] = _series_max(res.fields)
            else:
                u = np.stack([y[0] for y in snaps])
                v = np.stack([y[1] for y in snaps])
                res = compatibility_residual(u, v, sten, dt_snap)
                columns = {"residual": _series_max(res)}
            out[kind] = {"times": np.asarray(times[1:-1]), "columns": columns}
        elif kind == "lax":
            # curvature of the so(4) connection vanishes along trajectories of
            # the doubled fields; see aniso_lax
            columns = {}
            aniso_p = cfg.params["p"]
            doubled = [So3StrandState(length, 2.0 * y[0], 2.0 * y[1]) for y in snaps]
            for lam in entry["lambdas"]:
                conns = [aniso_lax(st, lam, aniso_p) for st in doubled]
                res = zero_curvature_residual(conns, sten, dt_snap)
                columns[f"lam_{lam:g}"] = _series_max(res.fields)
            out[kind] = {"times": np.asarray(times[1:-1]), "columns": columns}
        elif kind == "invariant_drift":
            traj = [XYState(length, y[0], y[1]) for y in snaps]
            drift = invariant_drift(traj)
            out[kind] = {
                "times": np.asarray(times),
                "columns": {"drift_X": drift.x_series, "drift_Y": drift.y_series},
            }
        elif kind == "s_constraint":
            if peakon_states is None:
                peakon_states = [PeakonState(length, y[0], y[1], y[2]) for y in snaps]
            series = np.array(
                [np.max(np.abs(s_constraint_residual(st, sten))) for st in peakon_states]
            )
            out[kind] = {"times": np.asarray(times), "columns": {"residual": series}}
        elif kind == "conservation_sums":
            m_sum = np.array([np.sum(y[1]) * ds for y in snaps])
            columns = {"sum_M": m_sum}
            if snaps[0].shape[2] == 2:
                columns["sum_N_skew"] = np.array(
                    [np.sum(y[2][:, 0] - y[2][:, 1]) * ds for y in snaps]
                )
            out[kind] = {"times": np.asarray(times), "columns": columns}
    return out


def _reference_errors(runtime, snaps, times):
    ref = runtime["reference"]
    if ref is None:
        return None
    names = [("Q", 0), ("M", 1), ("N", 2)]
    columns = {}
    for k, (t, y) in enumerate(zip(times, snaps)):
        exact = ref(t)
        if "X" in exact:
            err = {"err_X": np.max(np.abs((y[0][:, 0] - y[0][:, 1]) - exact["X"]))}
        else:
            err = {
                f"err_{name}": np.max(np.abs(y[idx] - exact[name])) for name, idx in names
            }
        for key, val in err.items():
            columns.setdefault(key, np.empty(len(times)))[k] = val
    return {"times": np.asarray(times), "columns": columns}


def _diagnostic_scalar(name, data):
    """Collapse a diagnostic series to the scalar used for convergence orders."""
    if name == "conservation_sums":
        return max(
            float(np.max(np.abs(series - series[0]))) for series in data["columns"].values()
        )
    return max(float(np.max(np.abs(series))) for series in data["columns"].values())


# --------------------------------------------------------------------------
# reports and file output


@dataclass
class RunReport:
    """Stored trajectory plus diagnostic series for one scenario run."""

    model: str
    n_steps: int
    times: np.ndarray
    snapshots: list
    diagnostics: dict
    reference_error: dict | None
    status: str

    def summary(self):
        """JSON-ready dict of scalar maxima, deterministic key order."""
        diag = {}
        for name, data in self.diagnostics.items():
            diag[name] = {
                "max": _diagnostic_scalar(name, data),
                "columns": {
                    key: float(np.max(np.abs(series)))
                    for key, series in data["columns"].items()
                },
            }
        out = {
            "model": self.model,
            "n_steps": self.n_steps,
            "status": self.status,
            "diagnostics": diag,
        }
        if self.reference_error is not None:
            out["reference_error"] = {
                key: float(np.max(series))
                for key, series in self.reference_error["columns"].items()
            }
        return out


def _write_csv(path, header, times, rows_per_time):
    """rows_per_time: callable k -> iterable of row tuples (already floats)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for k in range(len(times)):
            for row in rows_per_time(k):
                fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return "%d" % v
    return "%.17g" % v


def _write_outputs(cfg, runtime, report, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, extract in runtime["fields"]:
        ncols = extract(report.snapshots[0]).shape[1]
        header = "t,s_index," + ",".join(f"{name}_{j + 1}" for j in range(ncols))

        def rows(k, extract=extract):
            t = report.times[k]
            arr = extract(report.snapshots[k])
            for idx in range(arr.shape[0]):
                yield (t, idx, *arr[idx])

        _write_csv(directory / f"{name}.csv", header, report.times, rows)

    for diag_name, data in report.diagnostics.items():
        keys = list(data["columns"])
        header = "t," + ",".join(keys)

        def rows(k, data=data, keys=keys):
            yield (data["times"][k], *(data["columns"][key][k] for key in keys))

        _write_csv(directory / f"{diag_name}.csv", header, data["times"], rows)

    if report.reference_error is not None:
        data = report.reference_error
        keys = list(data["columns"])
        header = "t," + ",".join(keys)

        def rows(k, data=data, keys=keys):
            yield (data["times"][k], *(data["columns"][key][k] for key in keys))

        _write_csv(directory / "reference_error.csv", header, data["times"], rows)

    with open(directory / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------------------
# drivers


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> RunReport:
    """Integrate a scenario and evaluate its diagnostics.

    Writes CSV and report files when the config (or ``out_dir``) names an
    output directory.  On blow-up or singular configurations the snapshots
    collected so far are still written before the error is re-raised, so
    partial trajectories stay inspectable.
    """
    runtime = _build_runtime(cfg)
    y = runtime["y0"].copy()
    snaps = [y.copy()]
    times = [0.0]
    failure = None
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            for i in range(cfg.n_steps):
                try:
                    y = rk4_step(y, runtime["rhs"], cfg.dt)
                except SimulationError as exc:
                    raise type(exc)(
                        f"{exc} (step {i + 1}, t = {(i + 1) * cfg.dt:.9g})"
                    ) from exc
                if (i + 1) % cfg.cadence == 0:
                    snaps.append(y.copy())
                    times.append((i + 1) * cfg.dt)
        except SimulationError as exc:
            failure = exc

    if failure is None:
        diagnostics = _evaluate_diagnostics(cfg, runtime, snaps, times)
        reference = _reference_errors(runtime, snaps, times)
        status = "ok"
    else:
        diagnostics = {}
        reference = None
        status = f"failed: {failure}"

    report = RunReport(
        model=cfg.model,
        n_steps=cfg.n_steps,
        times=np.asarray(times),
        snapshots=snaps,
        diagnostics=diagnostics,
        reference_error=reference,
        status=status,
    )
    directory = out_dir if out_dir is not None else cfg.directory
    if directory is not None:
        _write_outputs(cfg, runtime, report, directory)
    if failure is not None:
        raise failure
    return report


def convergence_study(cfg: ScenarioConfig, refinement_levels: int):
    """Joint (ds, dt) halving study; orders from consecutive error ratios.

    Each requested diagnostic (and the reference error of the exact models)
    is collapsed to a scalar per level.  Orders are reported as undefined
    when the sequence is non-monotone or sits at the round-off floor.
    """
    if not (isinstance(refinement_levels, int) and refinement_levels >= 3):
        raise ConfigError(
            f"refinement_levels must be an integer >= 3, got {refinement_levels}"
        )
    levels = []
    errors = {}
    for k in range(refinement_levels):
        level_cfg = cfg.refined(2**k)
        report = run_scenario(level_cfg, out_dir=None)
        levels.append({"N_s": level_cfg.n_nodes, "dt": level_cfg.dt})
        for name, data in report.diagnostics.items():
            errors.setdefault(name, []).append(_diagnostic_scalar(name, data))
        if report.reference_error is not None:
            scalar = max(
                float(np.max(series))
                for series in report.reference_error["columns"].values()
            )
            errors.setdefault("reference_error", []).append(scalar)

    study = {"levels": levels, "diagnostics": {}}
    for name, errs in errors.items():
        defined = all(e > ORDER_FLOOR for e in errs) and all(
            errs[i + 1] < errs[i] for i in range(len(errs) - 1)
        )
        entry = {"errors": errs, "orders": None, "order": None}
        if defined:
            entry["orders"] = [
                math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)
            ]
            slope = np.polyfit(np.arange(len(errs)), np.log2(errs), 1)[0]
            entry["order"] = float(-slope)
        study["diagnostics"][name] = entry
    return study


def list_scenarios():
    """Registered model names with one-line descriptions."""
    return list(MODELS)
