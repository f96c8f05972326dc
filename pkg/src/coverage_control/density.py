"""Density fields and sensing-performance functions.

Every density here is the exponential of a simple expression, so each field
exposes ``log_eval``; integrators use it to rescale sharply peaked densities
before exponentiating.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


def smooth_ramp(ell: float, x):
    """``x * (arctan(ell * x) / pi + 1/2)``; tends to ``max(x, 0)`` as ell grows."""
    if ell <= 0:
        raise ValueError("smooth ramp needs ell > 0")
    x = np.asarray(x, dtype=float)
    out = x * (np.arctan(ell * x) / np.pi + 0.5)
    return float(out) if out.ndim == 0 else out


class DensityField:
    """Base class: subclasses implement ``log_eval(x, y)`` on arrays."""

    kind = "abstract"

    def log_eval(self, x, y):
        raise NotImplementedError

    def kernel_params(self):
        """``(code, params)`` for the compiled integrator, or ``None`` for custom fields."""
        return None

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        val = np.exp(self.log_eval(q[..., 0], q[..., 1]))
        return float(val) if val.ndim == 0 else val

    def eval_xy(self, x, y):
        return np.exp(self.log_eval(np.asarray(x, float), np.asarray(y, float)))

    @property
    def is_uniform(self) -> bool:
        return False


@dataclass(frozen=True)
class Uniform(DensityField):
    kind = "uniform"

    def log_eval(self, x, y):
        return np.zeros(np.broadcast(x, y).shape)

    def kernel_params(self):
        return 0, np.zeros(1)

    @property
    def is_uniform(self) -> bool:
        return True


@dataclass(frozen=True)
class Gaussian(DensityField):
    """``exp(gain * (-(x - xc)^2 - (y - yc)^2))``."""

    center: tuple[float, float] = (0.0, 0.0)
    gain: float = 1.0
    kind = "gaussian"

    def log_eval(self, x, y):
        dx, dy = x - self.center[0], y - self.center[1]
        return -self.gain * (dx * dx + dy * dy)

    def kernel_params(self):
        return 1, np.array([self.center[0], self.center[1], self.gain], dtype=float)


@dataclass(frozen=True)
class Line(DensityField):
    """``exp(-k (a x + b y + c)^2)``, concentrated on the line ``ax+by+c=0``."""

    a: float
    b: float
    c: float
    k: float
    kind = "line"

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("line density needs (a, b) != (0, 0)")

    def log_eval(self, x, y):
        s = self.a * x + self.b * y + self.c
        return -self.k * s * s

    def kernel_params(self):
        return 2, np.array([self.a, self.b, self.c, self.k], dtype=float)


@dataclass(frozen=True)
class Ellipse(DensityField):
    """``exp(-k (a (x-xc)^2 + b (y-yc)^2 - r^2)^2)``, concentrated on the ellipse."""

    a: float
    b: float
    xc: float
    yc: float
    r: float
    k: float
    kind = "ellipse"

    def level(self, x, y):
        return self.a * (x - self.xc) ** 2 + self.b * (y - self.yc) ** 2

    def log_eval(self, x, y):
        s = self.level(x, y) - self.r * self.r
        return -self.k * s * s

    def kernel_params(self):
        return 3, np.array([self.a, self.b, self.xc, self.yc, self.r, self.k], dtype=float)


@dataclass(frozen=True)
class Disk(DensityField):
    """``exp(-k SR_ell(a (x-xc)^2 + b (y-yc)^2 - r^2))``, filling the ellipsoidal disk."""

    a: float
    b: float
    xc: float
    yc: float
    r: float
    k: float
    ell: float
    kind = "disk"

    def level(self, x, y):
        return self.a * (x - self.xc) ** 2 + self.b * (y - self.yc) ** 2

    def log_eval(self, x, y):
        s = self.level(x, y) - self.r * self.r
        return -self.k * (s * (np.arctan(self.ell * s) / np.pi + 0.5))

    def kernel_params(self):
        return 4, np.array([self.a, self.b, self.xc, self.yc, self.r, self.k, self.ell], dtype=float)


# sensing performance -----------------------------------------------------


@dataclass(frozen=True)
class SensingPerformance:
    """Non-decreasing ``f`` with caller-supplied derivative ``fprime``."""

    f: Callable
    fprime: Callable
    name: str = "custom"

    @property
    def is_quadratic(self) -> bool:
        return self.name == "quadratic"

    def check(self, d_max: float = 1.0, samples: int = 101) -> None:
        d = np.linspace(0.0, d_max, samples)
        vals = np.asarray(self.f(d), dtype=float)
        if vals[0] < 0:
            raise ValueError("f(0) must be nonnegative")
        if np.any(np.diff(vals) < -1e-12 * (1 + np.abs(vals[1:]))):
            raise ValueError("f must be non-decreasing")


def quadratic() -> SensingPerformance:
    return SensingPerformance(lambda d: d * d, lambda d: 2.0 * d, "quadratic")


def power(exponent: float) -> SensingPerformance:
    """``f(d) = d**exponent`` for ``exponent >= 1``."""
    if exponent < 1:
        raise ValueError("power performance needs exponent >= 1")
    if exponent == 2:
        return quadratic()
    e = float(exponent)
    return SensingPerformance(
        lambda d: np.power(d, e), lambda d: e * np.power(d, e - 1.0), f"power:{e:g}"
    )


def custom(f: Callable, fprime: Callable, name: str = "custom") -> SensingPerformance:
    perf = SensingPerformance(f, fprime, name)
    perf.check()
    return perf


__all__ = [
    "DensityField", "Uniform", "Gaussian", "Line", "Ellipse", "Disk",
    "smooth_ramp", "SensingPerformance", "quadratic", "power", "custom",
]
