"""Closed-form radial solution families of -Δu = V e^u.

Every family is radial, so a profile is evaluated on a radius ``r`` and the
radial Laplacian is ``u'' + u'/r``.  Five families are provided:

``bubble``          u = log(8 i^2 / (1 + i^2 r^2)^2),  V = 1
``remark``          u = log(8 mu^2 / (mu^2 + r^2)^2),  V = 1
``remark-literal``  u = log(1 / (mu^2 + r^2)^2),       V = 8 mu^2
``shafrir``         piecewise Shafrir profile with exponent beta, joint r = 1,
                    V = 2/beta^2 inside, 2 outside
``shafrir-scaled``  u(i r) + 2 log i, joint r = 1/i
``annulus``         u = 2 log(2 i r^(i-1) / (1 + r^(2i))) on 1 <= r <= 2, V = 2

All families are strictly decreasing in r on their default domains, which
the extremum routines in :mod:`liouville_lab.analysis` rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate
from scipy.special import expit

from .errors import DomainError, InputError, JointError

JOINT_MARGIN = 1e-9
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-9


class Family(str, Enum):
    STANDARD_BUBBLE = "bubble"
    REMARK_BUBBLE = "remark"
    SHAFRIR_PIECEWISE = "shafrir"
    SHAFRIR_SCALED = "shafrir-scaled"
    ANNULUS = "annulus"


_DEFAULT_DOMAIN = {
    Family.STANDARD_BUBBLE: (0.0, 1.0),
    Family.REMARK_BUBBLE: (0.0, 1.0),
    Family.SHAFRIR_PIECEWISE: (0.0, 2.0),
    Family.SHAFRIR_SCALED: (0.0, 1.0),
    Family.ANNULUS: (1.0, 2.0),
}


@dataclass(frozen=True)
class WeightSpec:
    """Piecewise-constant radial weight.

    ``edges`` partitions the radial domain; ``values[k]`` applies on
    ``edges[k] < r <= edges[k+1]`` (the first interval is closed on the left).
    """

    edges: tuple
    values: tuple
    bound: float = math.inf

    def __post_init__(self):
        if len(self.edges) != len(self.values) + 1:
            raise InputError("WeightSpec needs len(edges) == len(values) + 1")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise InputError("WeightSpec edges must be strictly increasing")
        for v in self.values:
            if not (0.0 <= v <= self.bound):
                raise InputError(f"weight value {v} outside [0, {self.bound}]")

    @classmethod
    def constant(cls, value, r_min=0.0, r_max=math.inf, bound=math.inf):
        return cls((float(r_min), float(r_max)), (float(value),), bound)

    @classmethod
    def piecewise(cls, edges, values, bound=math.inf):
        return cls(tuple(float(e) for e in edges), tuple(float(v) for v in values), bound)

    @property
    def kind(self):
        return "Constant" if len(self.values) == 1 else "PiecewiseRadial"

    @property
    def is_zero(self):
        return all(v == 0.0 for v in self.values)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(np.asarray(self.edges), r, side="left") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        out = np.asarray(self.values)[idx]
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RadialProfile:
    """One member of a closed-form family.

    ``index`` is the family parameter (i, or mu for the remark family);
    ``beta`` is only used by the Shafrir families.  ``literal`` switches the
    remark family to the un-normalized form with V = 8 mu^2.
    """

    family: Family
    index: float
    beta: float = 1.0
    domain: tuple = field(default=None)
    literal: bool = False

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "index", float(self.index))
        object.__setattr__(self, "beta", float(self.beta))
        if not self.index > 0:
            raise InputError(f"index must be positive, got {self.index}")
        if fam in (Family.SHAFRIR_PIECEWISE, Family.SHAFRIR_SCALED) and self.beta < 1:
            raise InputError(f"Shafrir exponent beta must be >= 1, got {self.beta}")
        if self.literal and fam is not Family.REMARK_BUBBLE:
            raise InputError("literal form exists only for the remark family")
        dom = _DEFAULT_DOMAIN[fam] if self.domain is None else tuple(map(float, self.domain))
        if len(dom) != 2 or dom[0] < 0 or dom[1] <= dom[0]:
            raise InputError(f"bad radial domain {dom}")
        if fam is Family.ANNULUS and dom != (1.0, 2.0):
            raise InputError("annulus family lives on [1, 2]")
        object.__setattr__(self, "domain", dom)

    # -- constructors -------------------------------------------------------
    @classmethod
    def bubble(cls, i, **kw):
        return cls(Family.STANDARD_BUBBLE, i, **kw)

    @classmethod
    def remark(cls, mu, literal=False, **kw):
        return cls(Family.REMARK_BUBBLE, mu, literal=literal, **kw)

    @classmethod
    def shafrir(cls, beta, **kw):
        return cls(Family.SHAFRIR_PIECEWISE, 1.0, beta=beta, **kw)

    @classmethod
    def shafrir_scaled(cls, i, beta, **kw):
        return cls(Family.SHAFRIR_SCALED, i, beta=beta, **kw)

    @classmethod
    def annulus(cls, i):
        return cls(Family.ANNULUS, i)

    # -- geometry -----------------------------------------------------------
    @property
    def r_min(self):
        return self.domain[0]

    @property
    def r_max(self):
        return self.domain[1]

    @property
    def joint(self):
        """Radius where the weight jumps, or None."""
        if self.family is Family.SHAFRIR_PIECEWISE:
            return 1.0
        if self.family is Family.SHAFRIR_SCALED:
            return 1.0 / self.index
        return None

    @property
    def descriptor(self):
        name = "remark-literal" if self.literal else self.family.value
        if self.family in (Family.SHAFRIR_PIECEWISE, Family.SHAFRIR_SCALED):
            return f"{name}:{self.index:g}:{self.beta:g}"
        return f"{name}:{self.index:g}"

    def weight_spec(self):
        fam = self.family
        if fam is Family.STANDARD_BUBBLE:
            return WeightSpec.constant(1.0, *self.domain)
        if fam is Family.REMARK_BUBBLE:
            v = 8.0 * self.index**2 if self.literal else 1.0
            return WeightSpec.constant(v, *self.domain)
        if fam is Family.ANNULUS:
            return WeightSpec.constant(2.0, *self.domain)
        j = self.joint
        if j >= self.r_max:
            return WeightSpec.constant(2.0 / self.beta**2, *self.domain)
        return WeightSpec.piecewise((self.r_min, j, self.r_max), (2.0 / self.beta**2, 2.0))

    # -- raw vectorised closed forms (no domain checks) ---------------------
    def _shafrir_scale(self):
        return self.index if self.family is Family.SHAFRIR_SCALED else 1.0

    def _derivs(self, r, order):
        """Return (u, u', u'') up to ``order`` as arrays; no validation."""
        r = np.asarray(r, dtype=float)
        fam, i = self.family, self.index
        if fam is Family.STANDARD_BUBBLE:
            t = i * r
            u = math.log(8.0 * i * i) - 2.0 * np.log1p(t * t)
            du = -4.0 * i * t / (1.0 + t * t)
            d2 = -4.0 * i * i * (1.0 - t * t) / (1.0 + t * t) ** 2
        elif fam is Family.REMARK_BUBBLE:
            s = i * i + r * r
            lead = 0.0 if self.literal else math.log(8.0 * i * i)
            u = lead - 2.0 * np.log(s)
            du = -4.0 * r / s
            d2 = -4.0 * (i * i - r * r) / s**2
        elif fam is Family.ANNULUS:
            u, du, d2 = _outer_branch(r, i)
        else:
            scale = self._shafrir_scale()
            beta = self.beta
            rho = scale * r
            inner = rho <= 1.0
            shift = 2.0 * math.log(scale)
            ui = 2.0 * math.log(2.0 * beta) - 2.0 * np.log1p(rho * rho)
            dui = -4.0 * rho / (1.0 + rho * rho)
            d2i = -4.0 * (1.0 - rho * rho) / (1.0 + rho * rho) ** 2
            with np.errstate(divide="ignore", invalid="ignore"):
                uo, duo, d2o = _outer_branch(np.where(inner, 1.0, rho), beta)
            u = np.where(inner, ui, uo) + shift
            du = scale * np.where(inner, dui, duo)
            d2 = scale * scale * np.where(inner, d2i, d2o)
        return (u, du, d2)[: order + 1]

    def value_at(self, z):
        """u at complex points z (vectorised, no domain check)."""
        return self._derivs(np.abs(z), 0)[0]

    def weight_at(self, z):
        return self.weight_spec()(np.abs(z))


def _outer_branch(rho, beta):
    """2 log(2 beta rho^(beta-1) / (1 + rho^(2 beta))) and its rho-derivatives."""
    L = np.log(rho)
    sig = expit(2.0 * beta * L)
    u = 2.0 * math.log(2.0 * beta) + 2.0 * (beta - 1.0) * L - 2.0 * np.logaddexp(0.0, 2.0 * beta * L)
    du = (2.0 * (beta - 1.0) - 4.0 * beta * sig) / rho
    d2 = (-2.0 * (beta - 1.0) - 4.0 * beta * (2.0 * beta * sig * (1.0 - sig) - sig)) / rho**2
    return u, du, d2


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _check_domain(profile, r):
    r_arr = np.asarray(r, dtype=float)
    lo, hi = profile.domain
    if not np.all(np.isfinite(r_arr)) or np.any(r_arr < lo) or np.any(r_arr > hi):
        raise DomainError(f"radius {r} outside domain [{lo}, {hi}] of {profile.descriptor}")
    return r_arr


def _check_joint(profile, r, margin=JOINT_MARGIN):
    j = profile.joint
    if j is not None and np.any(np.abs(np.asarray(r) - j) <= margin):
        raise JointError(
            f"r within {margin:g} of the joint r={j:g} of {profile.descriptor}; "
            "evaluate one-sidedly at r = joint -/+ h"
        )


def eval_u(profile, r):
    r = _check_domain(profile, r)
    return _scalar(profile._derivs(r, 0)[0])


def eval_du(profile, r):
    """Analytic radial derivative u'(r)."""
    r = _check_domain(profile, r)
    _check_joint(profile, r)
    return _scalar(profile._derivs(r, 1)[1])


def eval_d2u(profile, r):
    r = _check_domain(profile, r)
    _check_joint(profile, r)
    return _scalar(profile._derivs(r, 2)[2])


def eval_V(profile, r):
    """Weight V(r) making the profile an exact solution."""
    r = _check_domain(profile, r)
    return profile.weight_spec()(r)


def laplacian(profile, r):
    """Radial Laplacian u'' + u'/r, with the limit 2 u''(0) at the origin."""
    r = _check_domain(profile, r)
    _check_joint(profile, r)
    _, du, d2 = profile._derivs(r, 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        lap = np.where(r == 0.0, 2.0 * d2, d2 + du / np.where(r == 0.0, 1.0, r))
    return _scalar(lap)


def residual(profile, r):
    """-(u'' + u'/r) - V e^u from analytic derivatives."""
    lap = laplacian(profile, r)
    u = profile._derivs(np.asarray(r, dtype=float), 0)[0]
    return _scalar(-np.asarray(lap) - profile.weight_spec()(r) * np.exp(u))


def mass(profile, R):
    """Closed-form ∫ e^u dx over {r_min <= |x| <= R}."""
    R = float(_check_domain(profile, R))
    fam, i = profile.family, profile.index
    if fam is Family.STANDARD_BUBBLE:
        t = (i * R) ** 2
        return 8.0 * math.pi * t / (1.0 + t)
    if fam is Family.REMARK_BUBBLE:
        if profile.literal:
            return math.pi * R * R / (i * i * (i * i + R * R))
        return 8.0 * math.pi * R * R / (i * i + R * R)
    if fam is Family.ANNULUS:
        return 4.0 * math.pi * i * (float(expit(2.0 * i * math.log(R))) - 0.5)
    scale = profile._shafrir_scale()
    return _shafrir_unscaled_mass(scale * R, profile.beta)


def _shafrir_unscaled_mass(rho, beta):
    if rho <= 1.0:
        return 4.0 * math.pi * beta * beta * rho * rho / (1.0 + rho * rho)
    sig = float(expit(2.0 * beta * math.log(rho)))
    return 2.0 * math.pi * beta * beta + 4.0 * math.pi * beta * (sig - 0.5)


def _breakpoints(profile, a, b):
    pts = []
    j = profile.joint
    if j is not None:
        pts.append(j)
    # concentration scale of each family
    if profile.family in (Family.STANDARD_BUBBLE, Family.SHAFRIR_SCALED):
        pts += [k / profile.index for k in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)]
    elif profile.family is Family.ANNULUS:
        pts += [1.0 + k / profile.index for k in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)]
    return sorted({p for p in pts if a < p < b})


def radial_quad(func, a, b, points=(), epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL):
    """Adaptive Gauss-Kronrod integral of ``func`` over [a, b]."""
    if b <= a:
        return 0.0
    edges = [a, *points, b]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        val, _ = integrate.quad(func, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=200)
        total += val
    return total


def mass_quadrature(profile, R, weighted=False):
    """2π ∫ e^u r dr by adaptive quadrature (V e^u when ``weighted``)."""
    R = float(_check_domain(profile, R))
    spec = profile.weight_spec()

    def f(r):
        u = profile._derivs(r, 0)[0]
        w = spec(r) if weighted else 1.0
        return 2.0 * math.pi * w * math.exp(float(u)) * r

    return radial_quad(f, profile.r_min, R, _breakpoints(profile, profile.r_min, R))


def weighted_mass(profile, R):
    """∫ V e^u dx over {r_min <= |x| <= R} via the flux identity.

    Integrating -Δu = V e^u over the disk (or annulus) gives
    -2π (R u'(R) - r_min u'(r_min)).
    """
    R = float(_check_domain(profile, R))
    lo = profile.r_min

    def flux(r):
        if r == 0.0:
            return 0.0
        if profile.joint is not None and abs(r - profile.joint) <= JOINT_MARGIN:
            r = r - 2 * JOINT_MARGIN  # u is C^1, one-sided value is exact
        return r * float(profile._derivs(r, 1)[1])

    return -2.0 * math.pi * (flux(R) - flux(lo))


_DESCRIPTOR_NAMES = {
    "bubble": Family.STANDARD_BUBBLE,
    "remark": Family.REMARK_BUBBLE,
    "remark-literal": Family.REMARK_BUBBLE,
    "shafrir": Family.SHAFRIR_PIECEWISE,
    "shafrir-scaled": Family.SHAFRIR_SCALED,
    "annulus": Family.ANNULUS,
}


def parse_descriptor(text):
    """Build a profile from ``family:index[:beta]``, e.g. ``shafrir-scaled:16:2.0``."""
    parts = text.strip().split(":")
    if len(parts) not in (2, 3) or parts[0] not in _DESCRIPTOR_NAMES:
        raise InputError(f"bad profile descriptor {text!r}")
    fam = _DESCRIPTOR_NAMES[parts[0]]
    try:
        index = float(parts[1])
        beta = float(parts[2]) if len(parts) == 3 else None
    except ValueError as exc:
        raise InputError(f"bad number in descriptor {text!r}") from exc
    if fam in (Family.SHAFRIR_PIECEWISE, Family.SHAFRIR_SCALED):
        if beta is None:
            raise InputError(f"descriptor {text!r} needs a beta")
        return RadialProfile(fam, index, beta=beta)
    if beta is not None:
        raise InputError(f"family {parts[0]} takes no beta")
    return RadialProfile(fam, index, literal=parts[0] == "remark-literal")
