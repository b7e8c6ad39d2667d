"""
Peaked solutions and their finite-dimensional reduction.

A multi-peakon pair

    u(t, x) = sum_i f_i(t) K(x - g_i(t)),    v(t, x) = sum_j h_j(t) K(x - k_j(t)),

with ``K(x) = exp(-|x|)`` on the line or ``K(x) = cosh([x]_pi - pi)`` on the
circle of length ``2 pi``, solves the system weakly when

    g_i' = v^p(g_i),   f_i' = (p - a) v^{p-1}(g_i) <v_x(g_i)> f_i,
    k_j' = u^q(k_j),   h_j' = (q - b) u^{q-1}(k_j) <u_x(k_j)> h_j,

where ``<.>`` averages the one-sided limits at a peak. Using ``sgn(0) = 0``
in the kernel derivative realizes that average exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate as sint

from .spectral import Field, FieldState, GridSpec, PDEParams

__all__ = [
    "Domain",
    "PeakonConfiguration",
    "PeakonTrajectory",
    "WeakResidualReport",
    "COLLISION_DISTANCE",
    "COINCIDENCE_DISTANCE",
    "wrap",
    "kernel",
    "kernel_deriv",
    "exact_traveling_peakon",
    "eval_peakon_fields",
    "peakon_rhs",
    "integrate_peakons",
    "weak_residual",
]

Domain = Literal["line", "circle"]
TWO_PI = 2.0 * math.pi
COLLISION_DISTANCE = 1e-8
# cross-family peaks closer than this count as coincident in the ODE, so
# round-off cannot flip the averaged slope to a one-sided value
COINCIDENCE_DISTANCE = 1e-10


def wrap(y):
    """Reduce ``y`` to ``[0, 2 pi)``."""
    y = np.asarray(y, dtype=float)
    r = y - TWO_PI * np.floor(y / TWO_PI)
    # floor can round a tiny negative y up to exactly 2 pi
    return np.where(r >= TWO_PI, 0.0, r)


def _check_domain(domain: str):
    if domain not in ("line", "circle"):
        raise ValueError(f"domain must be 'line' or 'circle', got {domain!r}")


def kernel(domain: Domain, x):
    _check_domain(domain)
    x = np.asarray(x, dtype=float)
    if domain == "line":
        return np.exp(-np.abs(x))
    return np.cosh(wrap(x) - math.pi)


def kernel_deriv(domain: Domain, x):
    """Kernel slope, averaged over both sides at the peak (value 0 there)."""
    _check_domain(domain)
    x = np.asarray(x, dtype=float)
    if domain == "line":
        return -np.sign(x) * np.exp(-np.abs(x))
    w = wrap(x)
    return np.where(w == 0.0, 0.0, np.sinh(w - math.pi))


@dataclass(frozen=True, eq=False)
class PeakonConfiguration:
    """Amplitudes ``f, h`` and positions ``g, k`` of the two peakon families."""

    domain: Domain
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    k: np.ndarray
    params: PDEParams = field(default_factory=PDEParams)
    time: float = 0.0

    def __post_init__(self):
        _check_domain(self.domain)
        arrs = {}
        for name in ("f", "g", "h", "k"):
            a = np.array(getattr(self, name), dtype=float, ndmin=1)
            if a.ndim != 1:
                raise ValueError(f"{name} must be one-dimensional")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} must be finite")
            arrs[name] = a
        if len(arrs["f"]) != len(arrs["g"]) or len(arrs["f"]) < 1:
            raise ValueError("f and g must have the same length M >= 1")
        if len(arrs["h"]) != len(arrs["k"]) or len(arrs["h"]) < 1:
            raise ValueError("h and k must have the same length N >= 1")
        if self.domain == "circle":
            arrs["g"] = wrap(arrs["g"])
            arrs["k"] = wrap(arrs["k"])
        for name, a in arrs.items():
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def M(self) -> int:
        return len(self.f)

    @property
    def N(self) -> int:
        return len(self.h)

    def u(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sum(self.f[:, None] * kernel(self.domain, x[None, :] - self.g[:, None]), axis=0)

    def v(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sum(self.h[:, None] * kernel(self.domain, x[None, :] - self.k[:, None]), axis=0)

    def u_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sum(self.f[:, None] * kernel_deriv(self.domain, x[None, :] - self.g[:, None]), axis=0)

    def v_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sum(self.h[:, None] * kernel_deriv(self.domain, x[None, :] - self.k[:, None]), axis=0)

    def as_row(self) -> list[float]:
        return [self.time, *self.g, *self.f, *self.k, *self.h]

    def header(self) -> list[str]:
        return (
            ["t"]
            + [f"g_{i + 1}" for i in range(self.M)]
            + [f"f_{i + 1}" for i in range(self.M)]
            + [f"k_{j + 1}" for j in range(self.N)]
            + [f"h_{j + 1}" for j in range(self.N)]
        )


def exact_traveling_peakon(
    c: float, p: int, q: int, domain: Domain = "line", a: float = 2.0, b: float = 2.0, x0: float = 0.0
) -> PeakonConfiguration:
    """Single peakon pair travelling at speed ``c``: amplitudes ``c^{1/q}``, ``c^{1/p}``.

    On the circle the amplitudes are divided by ``cosh(pi)`` so the crest
    values match the line case.
    """
    if not c > 0:
        raise ValueError(f"speed c must be positive, got {c}")
    params = PDEParams(p, q, a, b)
    alpha, beta = c ** (1.0 / params.q), c ** (1.0 / params.p)
    if domain == "circle":
        alpha, beta = alpha / math.cosh(math.pi), beta / math.cosh(math.pi)
    return PeakonConfiguration(domain, [alpha], [x0], [beta], [x0], params)


def eval_peakon_fields(cfg: PeakonConfiguration, grid: GridSpec) -> FieldState:
    """Sample ``u, v`` on ``grid``.

    Circle configurations need ``grid.length == 2 pi``; line configurations
    need every peak inside the box ``[0, L)``, which stands in for the line.
    """
    if cfg.domain == "circle":
        if not math.isclose(grid.length, TWO_PI, rel_tol=1e-12):
            raise ValueError("circle configurations need a grid of length 2 pi")
    else:
        pos = np.concatenate([cfg.g, cfg.k])
        if np.any(pos < 0) or np.any(pos >= grid.length):
            raise ValueError("line peaks must lie inside the grid box")
    return FieldState(Field(grid, cfg.u(grid.x)), Field(grid, cfg.v(grid.x)), cfg.params, cfg.time)


def _snap(domain, d: np.ndarray) -> np.ndarray:
    if domain == "circle":
        w = wrap(d)
        near = np.minimum(w, TWO_PI - w) < COINCIDENCE_DISTANCE
    else:
        near = np.abs(d) < COINCIDENCE_DISTANCE
    return np.where(near, 0.0, d)


def _rhs_arrays(domain, params: PDEParams, f, g, h, k):
    d = _snap(domain, g[:, None] - k[None, :])
    Kgk = kernel(domain, d)
    dKgk = kernel_deriv(domain, d)
    Kkg = kernel(domain, -d.T)
    dKkg = kernel_deriv(domain, -d.T)
    v_at_g = Kgk @ h
    vx_at_g = dKgk @ h
    u_at_k = Kkg @ f
    ux_at_k = dKkg @ f
    p, q = params.p, params.q
    dg = v_at_g**p
    df = (p - params.a) * v_at_g ** (p - 1) * vx_at_g * f
    dk = u_at_k**q
    dh = (q - params.b) * u_at_k ** (q - 1) * ux_at_k * h
    return df, dg, dh, dk


def peakon_rhs(cfg: PeakonConfiguration) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Time derivatives ``(f', g', h', k')`` of the peakon system."""
    return _rhs_arrays(cfg.domain, cfg.params, cfg.f, cfg.g, cfg.h, cfg.k)


@dataclass
class PeakonTrajectory:
    configurations: list[PeakonConfiguration]
    status: Literal["ok", "collision", "non-finite"] = "ok"
    message: str = ""

    @property
    def times(self) -> np.ndarray:
        return np.array([c.time for c in self.configurations])

    @property
    def final(self) -> PeakonConfiguration:
        return self.configurations[-1]

    def header(self) -> list[str]:
        return self.configurations[0].header()

    def rows(self) -> list[list[float]]:
        return [c.as_row() for c in self.configurations]

    def series(self, name: str) -> np.ndarray:
        """Stacked history of ``f``, ``g``, ``h`` or ``k`` (time x peak)."""
        return np.array([getattr(c, name) for c in self.configurations])


def _min_gap(domain, pos: np.ndarray) -> float:
    if len(pos) < 2:
        return math.inf
    d = np.abs(pos[:, None] - pos[None, :])
    if domain == "circle":
        d = np.minimum(d, TWO_PI - d)
    d[np.diag_indices(len(pos))] = math.inf
    return float(d.min())


def integrate_peakons(cfg: PeakonConfiguration, t_final: float, dt: float) -> PeakonTrajectory:
    """RK4 march of the peakon system up to ``cfg.time + t_final``.

    Stops early with ``status="collision"`` when two peaks of one family come
    within :data:`COLLISION_DISTANCE`, or ``"non-finite"`` on overflow.
    Positions of circle configurations are wrapped after every step.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if not t_final >= 0:
        raise ValueError("t_final must be >= 0")
    dom, P = cfg.domain, cfg.params
    f, g, h, k = (np.array(a) for a in (cfg.f, cfg.g, cfg.h, cfg.k))
    t0 = cfg.time
    nsteps = int(math.ceil(t_final / dt - 1e-9))
    out = PeakonTrajectory([cfg])

    def rhs(y):
        return _rhs_arrays(dom, P, *y)

    for i in range(nsteps):
        h_step = min(dt, t0 + t_final - (t0 + i * dt))
        y = (f, g, h, k)
        k1 = rhs(y)
        k2 = rhs(tuple(a + 0.5 * h_step * b for a, b in zip(y, k1)))
        k3 = rhs(tuple(a + 0.5 * h_step * b for a, b in zip(y, k2)))
        k4 = rhs(tuple(a + h_step * b for a, b in zip(y, k3)))
        f, g, h, k = (
            a + (h_step / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
        )
        t = t0 + i * dt + h_step
        if not all(np.all(np.isfinite(a)) for a in (f, g, h, k)):
            out.status, out.message = "non-finite", f"non-finite peakon state at t={t:.6g}"
            break
        nxt = PeakonConfiguration(dom, f, g, h, k, P, t)
        g, k = np.array(nxt.g), np.array(nxt.k)
        out.configurations.append(nxt)
        gap = min(_min_gap(dom, g), _min_gap(dom, k))
        if gap < COLLISION_DISTANCE:
            out.status, out.message = "collision", f"peaks within {gap:.3g} at t={t:.6g}"
            break
    return out


# -- weak-solution residual ------------------------------------------------------


@dataclass
class WeakResidualReport:
    """Quadrature check of the nonlocal terms for a line peakon pair.

    ``I1_quad``/``I1_closed`` hold the convolution term of the u-equation
    by quadrature and in closed form; ``residual_u`` is
    ``u_t + v^p u_x + I_1`` for the travelling ansatz with speed ``c``.
    """

    x: np.ndarray
    I1_quad: np.ndarray
    I1_closed: np.ndarray
    I2_quad: np.ndarray
    I2_closed: np.ndarray
    residual_u: np.ndarray
    residual_v: np.ndarray
    tol: float

    @property
    def identity_error(self) -> float:
        return float(max(np.max(np.abs(self.I1_quad - self.I1_closed)), np.max(np.abs(self.I2_quad - self.I2_closed))))

    @property
    def residual_sup(self) -> float:
        return float(max(np.max(np.abs(self.residual_u)), np.max(np.abs(self.residual_v))))

    @property
    def identity_holds(self) -> bool:
        return self.identity_error <= self.tol

    @property
    def is_weak_solution(self) -> bool:
        return self.identity_holds and self.residual_sup <= self.tol


def _nonlocal_term(x: float, x0: float, amp_self: float, amp_drive: float, power: int) -> float:
    """``G * [(w^P)_y z] + d_x G * [(w^P)_y z_y]`` for ``z = A e^{-|y-x0|}``, ``w = B e^{-|y-x0|}``.

    The coupling constant drops out: away from the crest ``z_yy = z``, so
    the two ``G`` integrands sum to ``(w^P)_y z``. ``G = e^{-|x|}/2``.
    """
    P, A, B = power, amp_self, amp_drive

    def slope(y):  # (w^P)_y
        return -P * B**P * np.sign(y - x0) * np.exp(-P * abs(y - x0))

    def conv(y):
        z = A * math.exp(-abs(y - x0))
        zy = -A * np.sign(y - x0) * math.exp(-abs(y - x0))
        G = 0.5 * math.exp(-abs(x - y))
        dG = -0.5 * np.sign(x - y) * math.exp(-abs(x - y))
        return G * slope(y) * z + dG * slope(y) * zy

    lo, hi = min(x, x0), max(x, x0)
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    total = sint.quad(conv, -np.inf, lo, **opts)[0] + sint.quad(conv, hi, np.inf, **opts)[0]
    if hi > lo:
        total += sint.quad(conv, lo, hi, **opts)[0]
    return total


def weak_residual(
    cfg: PeakonConfiguration,
    c: float,
    x: np.ndarray | None = None,
    exclusion: float = 0.05,
    tol: float = 1e-3,
) -> WeakResidualReport:
    """Evaluate the nonlocal terms of a single line peakon pair by quadrature.

    Points within ``exclusion`` of the common crest are dropped. The
    residual of the u-equation is ``(c - beta^p) u sgn(x - x0)`` in closed
    form, so it vanishes exactly for the travelling amplitudes.
    """
    if cfg.domain != "line":
        raise ValueError("weak_residual is implemented for the line only")
    if cfg.M != 1 or cfg.N != 1 or cfg.g[0] != cfg.k[0]:
        raise ValueError("weak_residual needs a single peakon pair with a common crest")
    if not c > 0:
        raise ValueError("speed c must be positive")
    x0 = float(cfg.g[0])
    alpha, beta = float(cfg.f[0]), float(cfg.h[0])
    P = cfg.params
    if x is None:
        x = x0 + np.linspace(-8.0, 8.0, 321)
    x = np.asarray(x, dtype=float)
    x = x[np.abs(x - x0) > exclusion]
    sgn = np.sign(x - x0)
    u, v = cfg.u(x), cfg.v(x)
    ux, vx = cfg.u_x(x), cfg.v_x(x)

    I1 = np.array([_nonlocal_term(xi, x0, alpha, beta, P.p) for xi in x])
    I2 = np.array([_nonlocal_term(xi, x0, beta, alpha, P.q) for xi in x])
    I1c = (-(beta**P.p) * u + v**P.p * u) * sgn
    I2c = (-(alpha**P.q) * v + u**P.q * v) * sgn
    # travelling ansatz u(t, x) = u(0, x - c t)
    ut, vt = -c * ux, -c * vx
    ru = ut + v**P.p * ux + I1
    rv = vt + u**P.q * vx + I2
    return WeakResidualReport(x, I1, I1c, I2, I2c, ru, rv, tol)
