"""Closed-form reference solutions for the peakon strand system.

A single peakon rides any solution h(s, t) of the 1+1 wave equation; a
peakon-antipeakon pair with zero total momentum has a separation X(s, t)
obtained by mapping 2*sqrt(2)*h through the inverse of the linearizing
integral F.  Both families feed manufactured-solution tests and the exact
reference scenarios of the harness.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError, SingularConfigurationError
from .peakon_dynamics import K0

_WAVE_CHECK_TOL = 1e-6
_WAVE_CHECK_DELTA = 1e-4

SQRT8 = 2.0 * math.sqrt(2.0)


def _log_cosh(z):
    """log(cosh(z)) without overflow for large |z|."""
    az = np.abs(np.asarray(z, dtype=float))
    return az + np.log1p(np.exp(-2.0 * az)) - math.log(2.0)


class WaveProfile:
    """A solution h(s, t) of h_tt = h_ss with closed-form derivatives.

    Build through the factory classmethods; the constructor accepts the three
    evaluators directly and verifies the wave equation by finite differences
    on a sample grid, rejecting inconsistent profiles.
    """

    def __init__(
        self,
        h: Callable,
        dh_dt: Callable,
        dh_ds: Callable,
        descriptor: dict,
    ):
        self._h = h
        self._dh_dt = dh_dt
        self._dh_ds = dh_ds
        self.descriptor = dict(descriptor)
        self._self_check()

    def h(self, s, t):
        return np.asarray(self._h(np.asarray(s, dtype=float), np.asarray(t, dtype=float)))

    def dh_dt(self, s, t):
        return np.asarray(self._dh_dt(np.asarray(s, dtype=float), np.asarray(t, dtype=float)))

    def dh_ds(self, s, t):
        return np.asarray(self._dh_ds(np.asarray(s, dtype=float), np.asarray(t, dtype=float)))

    def _self_check(self):
        s = np.linspace(0.0, 2.0 * np.pi, 7)[:, None]
        t = np.linspace(0.0, 1.0, 5)[None, :]
        d = _WAVE_CHECK_DELTA
        h_tt = (self.h(s, t + d) - 2.0 * self.h(s, t) + self.h(s, t - d)) / (d * d)
        h_ss = (self.h(s + d, t) - 2.0 * self.h(s, t) + self.h(s - d, t)) / (d * d)
        scale = max(1.0, float(np.max(np.abs(self.h(s, t)))))
        defect = float(np.max(np.abs(h_tt - h_ss)))
        if defect > _WAVE_CHECK_TOL * scale:
            raise ValueError(
                f"profile violates the wave equation: residual {defect:.3e} "
                f"exceeds {_WAVE_CHECK_TOL:.1e} x scale {scale:.3e}"
            )

    @classmethod
    def traveling(cls, terms, direction):
        """Profile f(s - direction*t) with f a sum of amp*sin(k*xi + phase) terms."""
        if direction not in (1, -1):
            raise ValueError(f"direction must be +1 or -1, got {direction}")
        terms = [(float(a), float(k), float(ph)) for a, k, ph in terms]

        def f(xi):
            return sum(a * np.sin(k * xi + ph) for a, k, ph in terms)

        def fp(xi):
            return sum(a * k * np.cos(k * xi + ph) for a, k, ph in terms)

        return cls(
            h=lambda s, t: f(s - direction * t),
            dh_dt=lambda s, t: -direction * fp(s - direction * t),
            dh_ds=lambda s, t: fp(s - direction * t),
            descriptor={"type": "traveling", "terms": [list(t_) for t_ in terms],
                        "direction": direction},
        )

    @classmethod
    def standing(cls, amplitude, wavenumber):
        """Standing wave amplitude * cos(k s) * cos(k t)."""
        a = float(amplitude)
        k = float(wavenumber)
        return cls(
            h=lambda s, t: a * np.cos(k * s) * np.cos(k * t),
            dh_dt=lambda s, t: -a * k * np.cos(k * s) * np.sin(k * t),
            dh_ds=lambda s, t: -a * k * np.sin(k * s) * np.cos(k * t),
            descriptor={"type": "standing", "amplitude": a, "wavenumber": k},
        )

    @classmethod
    def constant(cls, value):
        """Constant profile, encoded as the k = 0 harmonic so descriptors stay uniform."""
        return cls.traveling([(float(value), 0.0, 0.5 * math.pi)], 1)

    @classmethod
    def superpose(cls, parts):
        parts = list(parts)
        if not parts:
            raise ValueError("superposition needs at least one part")
        return cls(
            h=lambda s, t: sum(p.h(s, t) for p in parts),
            dh_dt=lambda s, t: sum(p.dh_dt(s, t) for p in parts),
            dh_ds=lambda s, t: sum(p.dh_ds(s, t) for p in parts),
            descriptor={"type": "superposition", "parts": [p.descriptor for p in parts]},
        )


def profile_from_descriptor(d) -> WaveProfile:
    """Rebuild a WaveProfile from its JSON descriptor."""
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError(f"profile descriptor must be a dict with a 'type' key, got {d!r}")
    kind = d["type"]
    try:
        if kind == "traveling":
            extra = set(d) - {"type", "terms", "direction"}
            if extra:
                raise ConfigError(f"unknown profile keys {sorted(extra)}")
            return WaveProfile.traveling(d["terms"], d["direction"])
        if kind == "standing":
            extra = set(d) - {"type", "amplitude", "wavenumber"}
            if extra:
                raise ConfigError(f"unknown profile keys {sorted(extra)}")
            return WaveProfile.standing(d["amplitude"], d["wavenumber"])
        if kind == "superposition":
            extra = set(d) - {"type", "parts"}
            if extra:
                raise ConfigError(f"unknown profile keys {sorted(extra)}")
            return WaveProfile.superpose(profile_from_descriptor(p) for p in d["parts"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad profile descriptor: {exc}") from exc
    raise ConfigError(f"unknown profile type {kind!r}")


def single_peakon_exact(profile: WaveProfile, s, t):
    """Exact single-peakon data (Q, M, N) = (h, h_t/K0, -h_s/K0).

    The sign of N follows from the space-slope relation d_s Q = -N K(Q, Q),
    which together with the momentum equations makes Q solve the wave
    equation.
    """
    return (
        profile.h(s, t),
        profile.dh_dt(s, t) / K0,
        -profile.dh_ds(s, t) / K0,
    )


def collision_F(x):
    """Linearizing map F(X) = sqrt(2) * integral_0^X (1 - e^{-|Y|})^{-1/2} dY.

    Evaluated in closed form, F(X) = 2 sqrt(2) sign(X) arccosh(e^{|X|/2}).
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    return SQRT8 * np.sign(x) * np.log1p(np.expm1(0.5 * ax) + np.sqrt(np.expm1(ax)))


def collision_F_inverse(f):
    """Inverse of ``collision_F``: X = sign(F) * 2 log cosh(F / (2 sqrt 2))."""
    f = np.asarray(f, dtype=float)
    return np.sign(f) * 2.0 * _log_cosh(f / SQRT8)


class CollisionSample(NamedTuple):
    q1: np.ndarray
    q2: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    x: np.ndarray


@dataclass(frozen=True)
class CollisionSolution:
    """Two-peakon solution with M_1 = -M_2, N_1 = -N_2 and center fixed at 0.

    The separation X = Q^1 - Q^2 is branch * log(cosh^2 h) for a wave-equation
    profile h; momenta follow from X through the pair-reduction relations.
    The momentum evaluators are singular wherever h = 0 (the collision
    instant), which ``evaluate`` reports as an error.
    """

    profile: WaveProfile
    branch: int

    def __post_init__(self):
        if self.branch not in (1, -1):
            raise ValueError(f"branch must be +1 or -1, got {self.branch}")

    def separation(self, s, t):
        return self.branch * 2.0 * _log_cosh(self.profile.h(s, t))

    def separation_dt(self, s, t):
        h = self.profile.h(s, t)
        return self.branch * 2.0 * np.tanh(h) * self.profile.dh_dt(s, t)

    def separation_ds(self, s, t):
        h = self.profile.h(s, t)
        return self.branch * 2.0 * np.tanh(h) * self.profile.dh_ds(s, t)

    def evaluate(self, s, t) -> CollisionSample:
        """Positions and momenta; M_1 = X_t / (2(K0 - K(X))), N_1 = -X_s / (2(K0 - K(X)))."""
        h = self.profile.h(s, t)
        th = np.tanh(h)
        if np.any(th == 0.0):
            raise SingularConfigurationError(
                "collision instant: h = 0 makes the momentum evaluators singular"
            )
        x = self.branch * 2.0 * _log_cosh(h)
        # K0 - K(X) = K0 tanh^2 h, so the momentum quotients reduce to h_t,s / (K0 tanh h)
        m1 = self.branch * self.profile.dh_dt(s, t) / (K0 * th)
        n1 = -self.branch * self.profile.dh_ds(s, t) / (K0 * th)
        return CollisionSample(
            q1=0.5 * x, q2=-0.5 * x, m1=m1, m2=-m1, n1=n1, n2=-n1, x=x
        )


def collision_exact(sol: CollisionSolution, s, t) -> CollisionSample:
    """Evaluate a collision solution: positions, momenta, and separation."""
    return sol.evaluate(s, t)


@dataclass(frozen=True)
class PotentialReport:
    """Inferred separation/potential gradients plus their consistency residuals.

    ``x_t``, ``x_s`` are the gradients of X implied by the momentum
    differences; ``phi_s``, ``phi_t`` the potential gradients implied by the
    momentum sums.  The residual fields compare the implied X-gradients
    against finite differences of the sampled X, and ``curl``/``loop`` check
    that (phi_s, phi_t) is an actual gradient.
    """

    x_t: np.ndarray
    x_s: np.ndarray
    phi_s: np.ndarray
    phi_t: np.ndarray
    sep_t: float
    sep_s: float
    curl: float
    loop: float | None
    sym_m: float
    sym_n: float


def potentials_resolve(
    m1, m2, n1, n2, x, dt_step, ds_step, periodic_s=False
) -> PotentialReport:
    """Check two-peakon fields sampled on a uniform (t, s) grid.

    Verifies M1 - M2 = X_t / (K0 - K(X)) and N1 - N2 = -X_s / (K0 - K(X))
    by centered differences, plus the existence conditions for a potential
    with M1 + M2 = phi_s and N1 + N2 = -phi_t: the cross-derivative (curl)
    residual and, when the s-axis closes into a loop, the vanishing of the
    s-integral of M1 + M2.  Arrays are shaped (n_t, n_s).
    """
    m1, m2, n1, n2, x = (np.asarray(f, dtype=float) for f in (m1, m2, n1, n2, x))
    if x.ndim != 2 or any(f.shape != x.shape for f in (m1, m2, n1, n2)):
        raise ValueError("fields must share a common (n_t, n_s) shape")
    if x.shape[0] < 3 or x.shape[1] < 3:
        raise ValueError("need at least 3 samples per axis")

    def d_dt(f):
        return (f[2:, :] - f[:-2, :]) / (2.0 * dt_step)

    if periodic_s:
        def d_ds(f):
            return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2.0 * ds_step)
    else:
        def d_ds(f):
            return (f[:, 2:] - f[:, :-2]) / (2.0 * ds_step)

    gap = -K0 * np.expm1(-np.abs(x))  # K0 - K(X)
    if np.any(gap == 0.0):
        raise SingularConfigurationError("zero separation in sampled fields")

    sep_t_field = (m1 - m2)[1:-1, :] - d_dt(x) / gap[1:-1, :]
    if periodic_s:
        sep_s_field = (n1 - n2) + d_ds(x) / gap
        curl_field = d_dt(m1 + m2) + d_ds(n1 + n2)[1:-1, :]
    else:
        sep_s_field = (n1 - n2)[:, 1:-1] + d_ds(x) / gap[:, 1:-1]
        curl_field = d_dt(m1 + m2)[:, 1:-1] + d_ds(n1 + n2)[1:-1, :]

    loop = None
    if periodic_s:
        loop = float(np.max(np.abs(np.sum(m1 + m2, axis=1) * ds_step)))

    return PotentialReport(
        x_t=(m1 - m2) * gap,
        x_s=-(n1 - n2) * gap,
        phi_s=m1 + m2,
        phi_t=-(n1 + n2),
        sep_t=float(np.max(np.abs(sep_t_field))),
        sep_s=float(np.max(np.abs(sep_s_field))),
        curl=float(np.max(np.abs(curl_field))),
        loop=loop,
        sym_m=float(np.max(np.abs(m1 + m2))),
        sym_n=float(np.max(np.abs(n1 + n2))),
    )
