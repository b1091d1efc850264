"""Graded Gauss-Legendre rules for integrands with an r log r endpoint."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts and tolerance for the polar product rules.

    ``radial_nodes`` is the Gauss-Legendre order on each geometric panel;
    ``levels`` panels with ratio ``grading`` are stacked towards the
    singular endpoint.
    """

    boundary_nodes: int = 256
    radial_nodes: int = 16
    angular_nodes: int = 128
    abs_tol: float = 1e-8
    levels: int = 24
    grading: float = 0.5

    def __post_init__(self):
        for name in ("boundary_nodes", "radial_nodes", "angular_nodes"):
            if getattr(self, name) < 8:
                raise ValueError(f"{name} must be >= 8")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not 0 < self.grading < 1 or self.levels < 1:
            raise ValueError("grading must lie in (0, 1) and levels >= 1")

    def refined(self):
        """Spec with doubled node counts, used for error estimation."""
        return QuadratureSpec(
            2 * self.boundary_nodes,
            2 * self.radial_nodes,
            2 * self.angular_nodes,
            self.abs_tol,
            self.levels + 4,
            self.grading,
        )


@lru_cache(maxsize=64)
def graded_rule(n, levels, grading):
    """Nodes/weights on [0, 1] with geometric panels clustered at 0."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    edges = [grading**k for k in range(levels, -1, -1)]
    edges = [0.0] + edges
    nodes, weights = [], []
    for a, b in zip(edges, edges[1:]):
        nodes.append(a + (b - a) * x)
        weights.append((b - a) * w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def trapezoid_angles(n):
    theta = 2.0 * np.pi * np.arange(n) / n
    return theta, np.full(n, 2.0 * np.pi / n)
