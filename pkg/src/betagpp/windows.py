"""Observation windows: axis-aligned rectangles and disks."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["RectWindow", "DiskWindow", "window_from_dict"]


@dataclass(frozen=True)
class RectWindow:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("rectangle bounds must be finite")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise DomainError("rectangle must have positive area")

    @property
    def width(self):
        return self.xmax - self.xmin

    @property
    def height(self):
        return self.ymax - self.ymin

    @property
    def area(self):
        return self.width * self.height

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return (
            (pts[:, 0] >= self.xmin)
            & (pts[:, 0] <= self.xmax)
            & (pts[:, 1] >= self.ymin)
            & (pts[:, 1] <= self.ymax)
        )

    def central(self):
        """Concentric rectangle with half the width and half the height."""
        dx = self.width / 4.0
        dy = self.height / 4.0
        return RectWindow(self.xmin + dx, self.ymin + dy, self.xmax - dx, self.ymax - dy)

    def sample_uniform(self, rng, n):
        u = rng.random((int(n), 2))
        return np.column_stack(
            (self.xmin + self.width * u[:, 0], self.ymin + self.height * u[:, 1])
        )

    def to_dict(self):
        return {"shape": "rect", "xmin": self.xmin, "ymin": self.ymin,
                "xmax": self.xmax, "ymax": self.ymax}


@dataclass(frozen=True)
class DiskWindow:
    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.cx, self.cy, self.radius)):
            raise DomainError("disk parameters must be finite")
        if self.radius <= 0:
            raise DomainError("disk radius must be positive")

    @property
    def area(self):
        return math.pi * self.radius**2

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return (pts[:, 0] - self.cx) ** 2 + (pts[:, 1] - self.cy) ** 2 <= self.radius**2

    def central(self):
        """Concentric disk of half the radius."""
        return DiskWindow(self.cx, self.cy, self.radius / 2.0)

    def sample_uniform(self, rng, n):
        n = int(n)
        rho = self.radius * np.sqrt(rng.random(n))
        phi = 2.0 * math.pi * rng.random(n)
        return np.column_stack((self.cx + rho * np.cos(phi), self.cy + rho * np.sin(phi)))

    def to_dict(self):
        return {"shape": "disk", "cx": self.cx, "cy": self.cy, "radius": self.radius}


def window_from_dict(d):
    """Inverse of ``to_dict`` for either window type."""
    shape = d.get("shape", "rect")
    if shape == "rect":
        return RectWindow(float(d["xmin"]), float(d["ymin"]), float(d["xmax"]), float(d["ymax"]))
    if shape == "disk":
        return DiskWindow(float(d["cx"]), float(d["cy"]), float(d["radius"]))
    raise DomainError(f"unknown window shape {shape!r}")
