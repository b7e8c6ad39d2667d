"""
Periodic Fourier collocation on a uniform grid.

Grid functions are stored as real samples ``f(x_j)`` at ``x_j = j L / n``.
Spectral coefficients are normalized so that

    f(x) = sum_k c_k exp(i k x),      c_k = rfft(f)[k] / n,

which makes ``L * sum_k |c_k|^2`` equal to the trapezoidal ``int |f|^2``.
Only the non-negative half spectrum is stored (real data). The Nyquist
coefficient is interpreted symmetrically, i.e. as ``c cos(n x / 2)``, which is
the convention used by :func:`dealiased_product` when padding and truncating.

All operators here are Fourier multipliers or pointwise products; none of
them mutates its input.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

__all__ = [
    "GridSpec",
    "Field",
    "PDEParams",
    "FieldState",
    "make_grid",
    "transform",
    "inverse_transform",
    "deriv",
    "helmholtz",
    "helmholtz_inv",
    "dealiased_product",
    "mollify",
    "mollifier_symbol",
    "padded_size",
    "random_bandlimited",
]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[0, length)`` with ``n`` points."""

    n: int
    length: float = 2.0 * np.pi

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise TypeError(f"n must be an integer, got {type(self.n).__name__}")
        if self.n < 8 or not _is_power_of_two(int(self.n)):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * (self.length / self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """Non-negative wavenumbers of the half spectrum, ``0 .. n/2``."""
        return (2.0 * np.pi / self.length) * np.arange(self.n // 2 + 1)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Full wavenumber set in FFT order, Nyquist reported as positive."""
        idx = np.fft.fftfreq(self.n, 1.0 / self.n)
        idx[self.n // 2] = self.n // 2
        return (2.0 * np.pi / self.length) * idx

    @property
    def k_max(self) -> float:
        return np.pi * self.n / self.length

    @cached_property
    def mode_weights(self) -> np.ndarray:
        """Multiplicity of each half-spectrum mode in the full spectrum."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    def field(self, values) -> "Field":
        return Field(self, values)

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return Field(self, func(self.x))

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.n))


def make_grid(n: int, length: float = 2.0 * np.pi) -> GridSpec:
    """Build a periodic collocation grid; raises ``ValueError`` on bad input."""
    return GridSpec(n, length)


@dataclass(frozen=True, eq=False)
class Field:
    """Real grid function attached to one :class:`GridSpec`."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def _check(self, other: "Field"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            raise TypeError("use dealiased_product for field products")
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Field(self.grid, self.values / scalar)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.grid.n

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class PDEParams:
    """Exponents ``p, q`` and coupling constants ``a, b`` of the system."""

    p: int = 1
    q: int = 1
    a: float = 2.0
    b: float = 2.0

    def __post_init__(self):
        for name in ("p", "q"):
            val = getattr(self, name)
            if isinstance(val, bool) or int(val) != val:
                raise TypeError(f"{name} must be an integer, got {val!r}")
            if val < 1:
                raise ValueError(f"{name} must be >= 1, got {val}")
            object.__setattr__(self, name, int(val))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def kappa(self) -> int:
        return max(self.p, self.q)


@dataclass(frozen=True)
class FieldState:
    """Velocity pair ``(u, v)`` at a given time; momenta are derived."""

    u: Field
    v: Field
    params: PDEParams = field(default_factory=PDEParams)
    time: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValueError("u and v must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    @property
    def m(self) -> Field:
        return helmholtz(self.u)

    @property
    def n(self) -> Field:
        return helmholtz(self.v)

    def with_fields(self, u: Field, v: Field, time: float | None = None) -> "FieldState":
        return replace(self, u=u, v=v, time=self.time if time is None else time)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u.values)) and np.all(np.isfinite(self.v.values)))


# -- transforms ---------------------------------------------------------------


def _coeffs(values: np.ndarray) -> np.ndarray:
    return sfft.rfft(values) / values.shape[-1]


def _values(coeffs: np.ndarray, n: int) -> np.ndarray:
    return sfft.irfft(coeffs * n, n)


def transform(f: Field) -> np.ndarray:
    """Normalized half-spectrum coefficients ``c_k`` of ``f``."""
    return _coeffs(f.values)


def inverse_transform(grid: GridSpec, coeffs: np.ndarray) -> Field:
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (grid.n // 2 + 1,):
        raise ValueError(f"expected {grid.n // 2 + 1} coefficients, got {coeffs.shape}")
    return Field(grid, _values(coeffs, grid.n))


def _deriv_symbol(grid: GridSpec, order: int) -> np.ndarray:
    sym = (1j * grid.k) ** order
    if order % 2 == 1:
        sym[-1] = 0.0
    return sym


def deriv(f: Field, order: int = 1) -> Field:
    """Spectral derivative ``(ik)^order``; odd orders drop the Nyquist mode."""
    if order < 0 or int(order) != order:
        raise ValueError(f"order must be a non-negative integer, got {order}")
    if order == 0:
        return f
    c = transform(f) * _deriv_symbol(f.grid, int(order))
    return inverse_transform(f.grid, c)


def helmholtz(f: Field) -> Field:
    """Apply ``1 - d^2/dx^2`` (multiplier ``1 + k^2``)."""
    return inverse_transform(f.grid, transform(f) * (1.0 + f.grid.k**2))


def helmholtz_inv(f: Field) -> Field:
    """Apply ``(1 - d^2/dx^2)^{-1}`` (multiplier ``1 / (1 + k^2)``)."""
    return inverse_transform(f.grid, transform(f) / (1.0 + f.grid.k**2))


# -- dealiasing ---------------------------------------------------------------


def padded_size(n: int, degree: int) -> int:
    """Size of the zero-padded grid that makes a degree-``degree`` product exact.

    A product of ``degree`` fields band-limited to ``|k| <= n/2`` has content
    up to ``degree * n / 2``; aliasing back into ``|k| <= n/2`` is avoided when
    the padded size exceeds ``(degree + 1) n / 2``. The returned size is
    ``(degree + 2) n / 2``, which is never below ``ceil((degree + 1) / 2) n``.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    return (degree + 2) * n // 2


def _pad_coeffs(c: np.ndarray, big: int) -> np.ndarray:
    n_half = c.shape[-1] - 1
    out = np.zeros(big // 2 + 1, dtype=complex)
    out[:n_half] = c[:n_half]
    out[n_half] = 0.5 * c[n_half].real
    return out


def _padded_values(c: np.ndarray, big: int) -> np.ndarray:
    """Physical values on the ``big``-point grid of a half-spectrum ``c``."""
    return sfft.irfft(_pad_coeffs(c, big) * big, big)


def _truncate(values_big: np.ndarray, n: int) -> np.ndarray:
    """Project padded-grid samples onto the ``n``-point half spectrum."""
    y = sfft.rfft(values_big) / values_big.shape[-1]
    out = y[: n // 2 + 1].copy()
    out[n // 2] = 2.0 * y[n // 2].real
    return out


def dealiased_product(fs: Sequence[Field]) -> Field:
    """Pointwise product of ``fs`` without aliasing.

    The factors are evaluated on a zero-padded grid (see :func:`padded_size`),
    multiplied, and projected back onto the original modes.
    """
    fs = list(fs)
    if not fs:
        raise ValueError("need at least one field")
    grid = fs[0].grid
    for f in fs[1:]:
        if f.grid != grid:
            raise ValueError("fields live on different grids")
    if len(fs) == 1:
        return fs[0]
    big = padded_size(grid.n, len(fs))
    prod = np.ones(big)
    for f in fs:
        prod = prod * _padded_values(transform(f), big)
    return inverse_transform(grid, _truncate(prod, grid.n))


# -- mollifier ----------------------------------------------------------------


def mollifier_symbol(xi: np.ndarray) -> np.ndarray:
    """Fourier transform of the mollifier bump, ``exp(-xi^2)``."""
    return np.exp(-np.square(xi))


def mollify(f: Field, eps: float) -> Field:
    """Friedrichs mollifier ``J_eps f`` as the multiplier ``exp(-(eps k)^2)``."""
    if not (0.0 < eps <= 1.0):
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    return inverse_transform(f.grid, transform(f) * mollifier_symbol(eps * f.grid.k))


def random_bandlimited(
    grid: GridSpec,
    rng: np.random.Generator,
    kmax: int | None = None,
    decay: float = 2.0,
    amplitude: float = 1.0,
) -> Field:
    """Random smooth field with modes ``1 <= |j| <= kmax`` (integer index).

    Mode ``j`` gets a Gaussian coefficient scaled by ``(1 + j)^(-decay)``; the
    mean and the Nyquist mode are left empty so every odd derivative is exact.
    """
    if kmax is None:
        kmax = grid.n // 4
    kmax = min(int(kmax), grid.n // 2 - 1)
    c = np.zeros(grid.n // 2 + 1, dtype=complex)
    j = np.arange(1, kmax + 1)
    c[1 : kmax + 1] = (rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax)) * (1.0 + j) ** (-decay)
    f = inverse_transform(grid, c)
    scale = f.max_abs()
    return f * (amplitude / scale) if scale > 0 else f
