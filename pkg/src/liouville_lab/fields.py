"""Grids and grid-sampled scalar fields.

File format (emitted and ingested)::

    geometry=rect            geometry=radial
    x_min=...                n=...
    x_max=...                r_min=...
    y_min=...                r_max=...
    y_max=...                spacing=uniform|explicit
    nx=...                   metadata=...
    ny=...                   <n radii, only for spacing=explicit>
    metadata=...             <n values>
    <nx*ny values, row-major, one per line>

Values are written with 17 significant digits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import DomainError, InputError

MIN_RADIAL_NODES = 64


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < MIN_RADIAL_NODES:
            raise InputError(f"radial grid needs at least {MIN_RADIAL_NODES} nodes")
        if np.any(np.diff(nodes) <= 0) or nodes[0] < 0:
            raise InputError("radial nodes must be nonnegative and strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, r_max, n, r_min=0.0):
        return cls(np.linspace(r_min, r_max, n))

    @property
    def n(self):
        return self.nodes.size

    @property
    def r_min(self):
        return float(self.nodes[0])

    @property
    def r_max(self):
        return float(self.nodes[-1])

    @property
    def is_uniform(self):
        d = np.diff(self.nodes)
        return bool(np.allclose(d, d[0], rtol=1e-12, atol=0))

    def same_as(self, other):
        return isinstance(other, RadialGrid) and np.array_equal(self.nodes, other.nodes)


@dataclass(frozen=True)
class RectGrid:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise InputError("rect grid needs at least 3 nodes per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise InputError("empty rectangle")

    @classmethod
    def square(cls, half_width, n, center=(0.0, 0.0)):
        cx, cy = center
        return cls(cx - half_width, cx + half_width, cy - half_width, cy + half_width, n, n)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self):
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def hx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self):
        return (self.y_max - self.y_min) / (self.ny - 1)

    def mesh(self):
        """Complex node coordinates, shape (ny, nx)."""
        X, Y = np.meshgrid(self.x, self.y)
        return X + 1j * Y

    def contains(self, z, tol=1e-12):
        z = np.asarray(z)
        return (
            (z.real >= self.x_min - tol)
            & (z.real <= self.x_max + tol)
            & (z.imag >= self.y_min - tol)
            & (z.imag <= self.y_max + tol)
        )

    def same_as(self, other):
        return self == other


@dataclass(frozen=True, eq=False)
class SampledField:
    """Scalar values on a RadialGrid (shape (n,)) or RectGrid (shape (ny, nx))."""

    geometry: RadialGrid | RectGrid
    values: np.ndarray
    metadata: str = ""
    _interp: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if isinstance(self.geometry, RadialGrid):
            shape = (self.geometry.n,)
        else:
            shape = (self.geometry.ny, self.geometry.nx)
        if vals.size != int(np.prod(shape)):
            raise InputError(f"{vals.size} values do not match geometry {shape}")
        vals = vals.reshape(shape)
        if not np.all(np.isfinite(vals)):
            raise InputError("sampled field contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if isinstance(self.geometry, RectGrid):
            g = self.geometry
            interp = RegularGridInterpolator((g.y, g.x), vals, method="linear")
            object.__setattr__(self, "_interp", interp)

    @property
    def is_radial(self):
        return isinstance(self.geometry, RadialGrid)

    @property
    def domain_radius(self):
        """Radius of the largest origin-centred disk covered by the grid."""
        g = self.geometry
        if self.is_radial:
            return g.r_max
        return min(-g.x_min, g.x_max, -g.y_min, g.y_max)

    def value_at(self, z):
        """Linear (radial) or bilinear (rect) interpolation at complex points."""
        z = np.asarray(z, dtype=complex)
        g = self.geometry
        if self.is_radial:
            r = np.abs(z)
            if np.any(r > g.r_max * (1 + 1e-12)) or np.any(r < g.r_min * (1 - 1e-12)):
                raise DomainError("point outside radial grid")
            return np.interp(r, g.nodes, self.values)
        if not np.all(g.contains(z)):
            raise DomainError("point outside rectangular grid")
        pts = np.stack([np.clip(z.imag, g.y_min, g.y_max), np.clip(z.real, g.x_min, g.x_max)], axis=-1)
        return self._interp(pts)

    def nodes(self):
        """Complex coordinates of the nodes (radial nodes lie on the real axis)."""
        if self.is_radial:
            return self.geometry.nodes.astype(complex)
        return self.geometry.mesh()

    # -- serialisation ------------------------------------------------------
    def dumps(self):
        g = self.geometry
        lines = []
        if self.is_radial:
            spacing = "uniform" if g.is_uniform else "explicit"
            lines += [
                "geometry=radial",
                f"n={g.n}",
                f"r_min={g.r_min:.17g}",
                f"r_max={g.r_max:.17g}",
                f"spacing={spacing}",
            ]
            lines.append(f"metadata={self.metadata}")
            if spacing == "explicit":
                lines += [f"{r:.17g}" for r in g.nodes]
        else:
            lines += [
                "geometry=rect",
                f"x_min={g.x_min:.17g}",
                f"x_max={g.x_max:.17g}",
                f"y_min={g.y_min:.17g}",
                f"y_max={g.y_max:.17g}",
                f"nx={g.nx}",
                f"ny={g.ny}",
                f"metadata={self.metadata}",
            ]
        lines += [f"{v:.17g}" for v in self.values.ravel()]
        return "\n".join(lines) + "\n"

    def write(self, path):
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text):
        header = {}
        body = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if "=" in line and not body:
                key, _, val = line.partition("=")
                header[key.strip()] = val.strip()
            else:
                body.append(line)
        try:
            nums = np.array([float(b) for b in body])
            kind = header["geometry"]
            if kind == "radial":
                n = int(header["n"])
                if header.get("spacing", "uniform") == "explicit":
                    geom, nums = RadialGrid(nums[:n]), nums[n:]
                else:
                    geom = RadialGrid.uniform(float(header["r_max"]), n, float(header.get("r_min", 0.0)))
            elif kind == "rect":
                geom = RectGrid(
                    float(header["x_min"]),
                    float(header["x_max"]),
                    float(header["y_min"]),
                    float(header["y_max"]),
                    int(header["nx"]),
                    int(header["ny"]),
                )
            else:
                raise InputError(f"unknown geometry {kind!r}")
        except (KeyError, ValueError) as exc:
            raise InputError(f"malformed sampled-field file: {exc}") from exc
        return cls(geom, nums, header.get("metadata", ""))

    @classmethod
    def read(cls, path):
        return cls.loads(Path(path).read_text())
