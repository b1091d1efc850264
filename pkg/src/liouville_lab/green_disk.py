"""Dirichlet Green function of a disk and log-singular potentials.

Points are complex numbers.  A disk of radius R centred at c is mapped to the
unit disk by x -> (x - c)/R, under which the Green function is invariant.

On the unit disk::

    G(x, y) = (1/2π) log(|1 - conj(x) y| / |x - y|)
            = (1/4π) log1p((1 - |x|^2)(1 - |y|^2) / |x - y|^2)

The second form is used: it is exactly symmetric in floating point and
manifestly positive.  The boundary term uses the Poisson kernel
P = -∂_ν G (outward normal), which is nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Number

import numpy as np

from .errors import DomainError, InputError, QuadratureError, SingularityError
from .fields import SampledField
from .families import RadialProfile
from .quadrature import QuadratureSpec, graded_rule, trapezoid_angles

INV_2PI = 1.0 / (2.0 * math.pi)


def as_point(p):
    """Accept complex, real, or (x1, x2) pairs."""
    if isinstance(p, (tuple, list)) and len(p) == 2:
        return complex(p[0], p[1])
    return complex(p)


@dataclass(frozen=True)
class GreenKernel:
    radius: float = 1.0
    center: complex = 0j

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("disk radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "center", as_point(self.center))

    def to_unit(self, z, strict=True):
        z = (np.asarray(z, dtype=complex) - self.center) / self.radius
        if strict and np.any(np.abs(z) >= 1.0):
            raise DomainError("point on or outside the disk")
        return z


def _sq(z):
    return z.real * z.real + z.imag * z.imag


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def green(k, x, y):
    """Dirichlet Green function G(x, y) of the disk ``k``; vectorised."""
    xu = k.to_unit(_as_array(x))
    yu = k.to_unit(_as_array(y))
    d2 = _sq(xu - yu)
    if np.any(d2 == 0.0):
        raise SingularityError("Green function evaluated at x == y")
    return _scalar(_green_unit(xu, yu, d2))


def _green_unit(xu, yu, d2):
    return (0.25 / math.pi) * np.log1p((1.0 - _sq(xu)) * (1.0 - _sq(yu)) / d2)


def regular_part(k, x, y):
    """H(x, y) = G(x, y) + (1/2π) log|x - y|, continuous on the diagonal."""
    xu = k.to_unit(_as_array(x))
    yu = k.to_unit(_as_array(y))
    num2 = _sq(xu - yu) + (1.0 - _sq(xu)) * (1.0 - _sq(yu))
    return _scalar((0.25 / math.pi) * np.log(num2) + INV_2PI * math.log(k.radius))


def poisson_kernel(k, x, s):
    """P(x, s) = (R^2 - |x - c|^2) / (2π R |x - s|^2), density w.r.t. arclength."""
    x = _as_array(x)
    s = _as_array(s)
    k.to_unit(x)
    su = k.to_unit(s, strict=False)
    if np.any(np.abs(np.abs(su) - 1.0) > 1e-10):
        raise DomainError("s must lie on the boundary circle")
    dx = x - k.center
    R = k.radius
    return _scalar((R * R - _sq(dx)) / (2.0 * math.pi * R * _sq(x - s)))


def _as_array(p):
    if isinstance(p, (tuple, list)) and len(p) == 2 and all(isinstance(c, Number) for c in p):
        return np.asarray(as_point(p))
    return np.asarray(p, dtype=complex)


def density_function(density, center=0j):
    """Turn a density spec into a callable on complex points.

    Accepts a number (constant), a RadialProfile (its right-hand side
    V e^u, centred at ``center``), a SampledField, a descriptor string, or a
    callable.
    """
    if isinstance(density, str):
        from .families import parse_descriptor

        density = parse_descriptor(density)
    if isinstance(density, Number):
        c = float(density)
        return lambda z: np.full(np.shape(z), c)
    if isinstance(density, RadialProfile):
        prof = density

        def f(z):
            r = np.abs(np.asarray(z) - center)
            if np.any(r > prof.r_max * (1 + 1e-12)) or np.any(r < prof.r_min):
                raise DomainError(f"density point outside domain of {prof.descriptor}")
            r = np.clip(r, prof.r_min, prof.r_max)
            u = prof._derivs(r, 0)[0]
            return prof.weight_spec()(r) * np.exp(u)

        return f
    if isinstance(density, SampledField):
        return density.value_at
    if callable(density):
        return density
    raise InputError(f"unsupported density {density!r}")


def _disk_rule_at(k, x, q):
    """Polar product rule on the disk centred at interior point x.

    Returns (points, weights, rho) where rho = |y - x|.
    """
    theta, wt = trapezoid_angles(q.angular_nodes)
    t, wr = graded_rule(q.radial_nodes, q.levels, q.grading)
    e = np.exp(1j * theta)
    d = x - k.center
    R = k.radius
    proj = (np.conj(d) * e).real
    rho_max = -proj + np.sqrt(proj * proj + R * R - abs(d) ** 2)
    rho = rho_max[:, None] * t[None, :]
    pts = x + rho * e[:, None]
    w = (rho_max**2)[:, None] * (t * wr)[None, :] * wt[:, None]
    return pts, w, rho


def _checked(compute, q, what):
    coarse = compute(q)
    fine = compute(q.refined())
    err = abs(fine - coarse)
    if not err <= q.abs_tol:
        raise QuadratureError(f"{what}: estimated error {err:.3g} exceeds {q.abs_tol:.3g}", fine, err)
    return fine


def _boundary_nodes(spec, rx):
    # trapezoid error on the Poisson kernel decays like |x|^N
    if rx <= 0.0:
        return spec.boundary_nodes
    need = math.ceil(-25.0 / math.log(rx))
    return max(spec.boundary_nodes, 8 * math.ceil(need / 8))


def represent(k, f, g, x, q=None):
    """Green representation ∫_B G(x,y) f(y) dy + ∫_∂B P(x,s) g(s) ds.

    ``f`` and ``g`` may be numbers, callables on complex points, or (for f)
    any density accepted by :func:`density_function`; ``None`` means zero.
    """
    q = q or QuadratureSpec()
    x = as_point(x)
    k.to_unit(np.asarray(x))
    fdens = None if f is None else density_function(f)
    if isinstance(g, Number):
        gval = float(g)
        gfun = lambda s: np.full(np.shape(s), gval)  # noqa: E731
    else:
        gfun = g

    def compute(spec):
        total = 0.0
        if fdens is not None:
            pts, w, _ = _disk_rule_at(k, x, spec)
            xu = k.to_unit(np.asarray(x))
            yu = (pts - k.center) / k.radius
            kern = _green_unit(xu, yu, _sq(xu - yu))
            total += float(np.sum(w * kern * fdens(pts)))
        if gfun is not None:
            theta, wt = trapezoid_angles(_boundary_nodes(spec, abs(k.to_unit(np.asarray(x)))))
            s = k.center + k.radius * np.exp(1j * theta)
            total += float(np.sum(poisson_kernel(k, x, s) * gfun(s) * wt * k.radius))
        return total

    return _checked(compute, q, "represent")


def log_potential(y0, R, density, q=None, radial=None):
    """∫_{B(y0,R)} -(1/2π) log|y0 - y| density(y) dy by a polar rule at y0.

    When the density is radial about y0 (``radial=True``, or a RadialProfile
    with y0 at its centre), the angular integral is done exactly and
    ``density`` is called on distances.
    """
    q = q or QuadratureSpec()
    y0 = as_point(y0)
    if not R > 0:
        raise DomainError("radius must be positive")
    if isinstance(density, Number) and density == 0:
        return 0.0
    if radial is None:
        radial = isinstance(density, Number) or (isinstance(density, RadialProfile) and y0 == 0)
    fdens = density_function(density, center=0j)
    if radial and callable(density) and not isinstance(density, (RadialProfile, SampledField)):
        radial_fn = density
    else:
        radial_fn = lambda rho: fdens(y0 + rho.astype(complex))  # noqa: E731

    def compute(spec):
        t, wr = graded_rule(spec.radial_nodes, spec.levels, spec.grading)
        rho = R * t
        logk = -INV_2PI * np.log(rho)
        if radial:
            vals = radial_fn(rho)
            return float(2.0 * math.pi * R * np.sum(wr * logk * vals * rho))
        theta, wt = trapezoid_angles(spec.angular_nodes)
        pts = y0 + rho[None, :] * np.exp(1j * theta)[:, None]
        vals = fdens(pts)
        return float(R * np.sum(wt[:, None] * (wr * logk * rho)[None, :] * vals))

    return _checked(compute, q, "log_potential")
