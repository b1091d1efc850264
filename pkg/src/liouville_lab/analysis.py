"""Functionals, blow-up rescaling and the trichotomy classifier.

A "field" here is any of

* a :class:`~liouville_lab.families.RadialProfile` (exact values, own weight),
* a :class:`~liouville_lab.fields.SampledField` (grid values, weight supplied),
* any object with ``value_at(z)`` and ``domain_radius`` (e.g. the rescaled
  fields returned by :func:`rescale` or the synthetic two-bubble field).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from numbers import Number

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError, InputError
from .families import RadialProfile, _breakpoints, radial_quad
from .fields import SampledField
from .green_disk import as_point, log_potential
from .quadrature import QuadratureSpec, graded_rule, trapezoid_angles


# -- regions ----------------------------------------------------------------


@dataclass(frozen=True)
class ClosedBall:
    radius: float
    center: complex = 0j

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("ball radius must be positive")
        object.__setattr__(self, "center", as_point(self.center))

    def radial_interval(self):
        c = abs(self.center)
        return max(0.0, c - self.radius), c + self.radius

    def label(self):
        return f"B({self.center.real:g}{self.center.imag:+g}j,{self.radius:g})"


@dataclass(frozen=True)
class ClosedAnnulus:
    r_in: float
    r_out: float

    def __post_init__(self):
        if not 0 <= self.r_in < self.r_out:
            raise InputError("annulus needs 0 <= r_in < r_out")

    def radial_interval(self):
        return self.r_in, self.r_out

    def label(self):
        return f"A({self.r_in:g},{self.r_out:g})"


@dataclass(frozen=True)
class BoundaryCircle:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("circle radius must be positive")

    def radial_interval(self):
        return self.radius, self.radius

    def label(self):
        return f"C({self.radius:g})"


def _origin_centred(K):
    return not isinstance(K, ClosedBall) or K.center == 0


# -- field access -------------------------------------------------------------


def _value(u, z):
    z = np.asarray(z, dtype=complex)
    if isinstance(u, RadialProfile):
        r = np.abs(z)
        if np.any(r > u.r_max * (1 + 1e-12)) or np.any(r < u.r_min * (1 - 1e-12)):
            raise DomainError(f"point outside domain of {u.descriptor}")
        return u._derivs(np.clip(r, u.r_min, u.r_max), 0)[0]
    return u.value_at(z)


def _weight(u, V, z):
    z = np.asarray(z, dtype=complex)
    if V is None:
        if isinstance(u, RadialProfile):
            return u.weight_spec()(np.abs(z))
        if hasattr(u, "weight_at"):
            return u.weight_at(z)
        return np.ones(z.shape)
    if isinstance(V, Number):
        return np.full(z.shape, float(V))
    if isinstance(V, SampledField):
        return V.value_at(z)
    return np.asarray(V(z), dtype=float) * np.ones(z.shape)


def _domain_interval(u):
    if isinstance(u, RadialProfile):
        return u.domain
    if isinstance(u, SampledField) and u.is_radial:
        return u.geometry.r_min, u.geometry.r_max
    return 0.0, u.domain_radius


def _check_region(u, K):
    lo, hi = K.radial_interval()
    dlo, dhi = _domain_interval(u)
    tol = 1e-12 * max(1.0, dhi)
    if isinstance(u, SampledField) and not u.is_radial:
        g = u.geometry
        if isinstance(K, ClosedBall):
            c, r = K.center, K.radius
            inside = (c.real - r >= g.x_min - tol and c.real + r <= g.x_max + tol
                      and c.imag - r >= g.y_min - tol and c.imag + r <= g.y_max + tol)
        else:
            inside = hi <= u.domain_radius + tol
        if not inside:
            raise DomainError(f"region {K.label()} not inside the grid")
        return
    if lo < dlo - tol or hi > dhi + tol:
        raise DomainError(f"region {K.label()} not inside domain [{dlo:g}, {dhi:g}]")
    if not _origin_centred(K) and not isinstance(u, RadialProfile) and lo < dlo - tol:
        raise DomainError(f"region {K.label()} not inside domain")


def _region_samples(K, n_r=48, n_theta=256):
    """Sample points covering K, including its boundary circles."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    e = np.exp(1j * theta)
    if isinstance(K, BoundaryCircle):
        return K.radius * e
    if isinstance(K, ClosedAnnulus):
        r = np.linspace(K.r_in, K.r_out, n_r)
        return (r[:, None] * e[None, :]).ravel()
    r = np.linspace(0.0, K.radius, n_r)
    return (K.center + r[:, None] * e[None, :]).ravel()


def _in_region(K, z, tol=1e-12):
    if isinstance(K, ClosedBall):
        return np.abs(z - K.center) <= K.radius + tol
    r = np.abs(z)
    lo, hi = K.radial_interval()
    if isinstance(K, BoundaryCircle):
        return np.zeros(z.shape, bool)
    return (r >= lo - tol) & (r <= hi + tol)


def _extrema(u, K):
    _check_region(u, K)
    if isinstance(u, RadialProfile):
        # every family is strictly decreasing in r
        lo, hi = K.radial_interval()
        lo = max(lo, u.r_min)
        hi = min(hi, u.r_max)
        vals = u._derivs(np.array([lo, hi]), 0)[0]
        return float(vals[0]), float(vals[1])
    samples = [_value(u, _region_samples(K))]
    if isinstance(u, SampledField):
        nodes = u.nodes()
        mask = _in_region(K, nodes)
        if np.any(mask):
            samples.append(u.values[mask])
    if hasattr(u, "peaks"):
        pk = np.asarray(u.peaks(), dtype=complex)
        pk = pk[_in_region(K, pk)] if pk.size else pk
        if pk.size:
            samples.append(_value(u, pk))
    allv = np.concatenate([np.ravel(s) for s in samples])
    if allv.size == 0:
        raise DomainError(f"empty intersection with {K.label()}")
    return float(np.max(allv)), float(np.min(allv))


def sup_on(u, K):
    return _extrema(u, K)[0]


def inf_on(u, K):
    return _extrema(u, K)[1]


def sup_all(u):
    """Supremum over the whole domain of the field."""
    if isinstance(u, RadialProfile):
        return float(u._derivs(np.array(u.r_min), 0)[0])
    if isinstance(u, SampledField):
        return float(np.max(u.values))
    dlo, dhi = _domain_interval(u)
    K = ClosedAnnulus(dlo, dhi) if dlo > 0 else ClosedBall(dhi)
    return sup_on(u, K)


def boundary_oscillation(u, circle):
    """sup - inf of u over a circle centred at the origin."""
    if isinstance(u, RadialProfile):
        _check_region(u, circle)
        return 0.0
    hi, lo = _extrema(u, circle)
    return hi - lo


# -- masses -------------------------------------------------------------------


def _polar_mass(fun, center, radius, q):
    t, wr = graded_rule(q.radial_nodes, q.levels, q.grading)
    theta, wt = trapezoid_angles(q.angular_nodes)
    rho = radius * t
    pts = center + rho[None, :] * np.exp(1j * theta)[:, None]
    return float(radius * np.sum(wt[:, None] * (wr * rho)[None, :] * fun(pts)))


def mass_on(u, V, K, q=None):
    """∫_K V e^u dx.  ``V=None`` uses the field's own weight (1 for grids)."""
    q = q or QuadratureSpec()
    if isinstance(V, Number) and V == 0:
        return 0.0
    if isinstance(K, BoundaryCircle):
        return 0.0
    _check_region(u, K)
    if V is None and isinstance(K, ClosedBall) and hasattr(u, "ball_mass"):
        return float(u.ball_mass(K.center, K.radius))

    def dens(z):
        return _weight(u, V, z) * np.exp(_value(u, z))

    if isinstance(u, SampledField):
        return _grid_mass(u, V, K)
    lo, hi = K.radial_interval()
    radial = isinstance(u, RadialProfile) or getattr(u, "radial_about_origin", False)
    if radial and _origin_centred(K):
        pts = u.breakpoints(lo, hi) if hasattr(u, "breakpoints") else _breakpoints(u, lo, hi)
        return radial_quad(lambda r: 2 * math.pi * r * float(dens(np.array(r + 0j))), lo, hi, pts)
    if isinstance(K, ClosedAnnulus):
        return _polar_mass(dens, 0j, hi, q) - _polar_mass(dens, 0j, lo, q)
    return _polar_mass(dens, K.center, K.radius, q)


def _grid_mass(u, V, K):
    nodes = u.nodes()
    mask = _in_region(K, nodes)
    vals = _weight(u, V, nodes) * np.exp(u.values)
    if u.is_radial:
        r = u.geometry.nodes
        if not _origin_centred(K):
            raise InputError("radial fields only support origin-centred regions")
        f = np.where(mask, vals * r * 2 * math.pi, 0.0)
        return float(trapezoid(f, r))
    g = u.geometry
    wx = np.full(g.nx, g.hx)
    wx[[0, -1]] *= 0.5
    wy = np.full(g.ny, g.hy)
    wy[[0, -1]] *= 0.5
    return float(np.sum(np.where(mask, vals, 0.0) * wy[:, None] * wx[None, :]))


# -- rescaling ----------------------------------------------------------------


@dataclass(frozen=True)
class RescalingFrame:
    """Blow-up frame: y = center + x * scale with scale = e^{-level/2}.

    ``cutoff`` is a free radius (in rescaled coordinates) for callers that
    need to truncate the rescaled domain.
    """

    center: complex
    level: float
    cutoff: float | None = None
    scale: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "level", float(self.level))
        object.__setattr__(self, "scale", math.exp(-self.level / 2.0))

    @classmethod
    def at(cls, u, center=0j, cutoff=None):
        return cls(center, float(_value(u, np.asarray(as_point(center)))), cutoff)


class RescaledField:
    """ũ(x) = u(c + x s) - M with weight Ṽ(x) = V(c + x s)."""

    def __init__(self, u, frame, V=None):
        self.base = u
        self.frame = frame
        self.V = V
        c, s = frame.center, frame.scale
        lo, hi = _domain_interval(u)
        # largest rescaled radius keeping the ball inside the base domain
        reach = hi - abs(c)
        if lo > 0:
            reach = min(reach, abs(c) - lo)
        if reach <= 0:
            raise DomainError("frame centre not interior to the domain")
        self.domain_radius = reach / s
        self.radial_about_origin = isinstance(u, RadialProfile) and c == 0

    def _map(self, x):
        return self.frame.center + np.asarray(x, dtype=complex) * self.frame.scale

    def value_at(self, x):
        return _value(self.base, self._map(x)) - self.frame.level

    def weight_at(self, x):
        return _weight(self.base, self.V, self._map(x))

    def breakpoints(self, a, b):
        if not isinstance(self.base, RadialProfile):
            return []
        s = self.frame.scale
        return [p / s for p in _breakpoints(self.base, a * s, b * s)]

    def peaks(self):
        return [0j]


def rescale(u, frame, rho=None, V=None):
    """Blow-up rescaling; ``rho`` (rescaled radius) is checked against the domain."""
    out = RescaledField(u, frame, V)
    if rho is not None and rho > out.domain_radius * (1 + 1e-12):
        raise DomainError(f"rescaled ball of radius {rho:g} escapes the domain")
    return out


def log_kernel_split(u, V, frame, R, q=None):
    """Return (lhs, term1, term2) of the blow-up split of the log potential.

    lhs   = ∫_{B(c,R)} -(1/2π) log|c - y| V e^u dy
    term1 = (M/4π) ∫_{B(0,R/s)} Ṽ e^ũ dx
    term2 = ∫_{B(0,R/s)} -(1/2π) log|x| Ṽ e^ũ dx
    Each is computed by its own quadrature.
    """
    q = q or QuadratureSpec()
    if isinstance(V, Number) and V == 0:
        return 0.0, 0.0, 0.0
    c = frame.center
    radial = isinstance(u, RadialProfile) and c == 0
    if radial:
        dens_y = lambda r: _weight(u, V, r + 0j) * np.exp(_value(u, r + 0j))  # noqa: E731
    else:
        dens_y = lambda z: _weight(u, V, z) * np.exp(_value(u, z))  # noqa: E731
    lhs = log_potential(c, R, dens_y, q, radial=radial)
    Rt = R / frame.scale
    ut = rescale(u, frame, rho=Rt, V=V)
    if radial:
        dens_x = lambda r: ut.weight_at(r + 0j) * np.exp(ut.value_at(r + 0j))  # noqa: E731
    else:
        dens_x = lambda z: ut.weight_at(z) * np.exp(ut.value_at(z))  # noqa: E731
    mass_t = mass_on(ut, None, ClosedBall(Rt), q)
    term1 = frame.level / (4.0 * math.pi) * mass_t
    term2 = log_potential(0j, Rt, dens_x, q, radial=radial)
    return lhs, term1, term2


# -- sequences ----------------------------------------------------------------


class Case(str, Enum):
    BOUNDED = "Bounded"
    UNIFORM_COLLAPSE = "UniformCollapse"
    CONCENTRATION = "Concentration"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class Thresholds:
    big: float = 50.0
    peak: float = 10.0
    merge_radius: float = 0.05
    mass_tol: float = 0.5
    stabilization: float = 0.01
    shrink_radii: tuple = (0.2, 0.1, 0.05)
    # a monotone trend counts as divergence when |slope of sup_K against
    # log i| >= slope_tol and sup_K moved by at least ``drift`` overall
    slope_tol: float = 0.5
    drift: float = 5.0


@dataclass
class BlowupClassification:
    case: Case
    points: list
    masses: list
    diagnostics: dict

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case", "x_k", "alpha_k"])
        if not self.points:
            w.writerow([self.case.value, "", ""])
        for x, a in zip(self.points, self.masses):
            w.writerow([self.case.value, _fmt_complex(x), f"{a:.17g}"])
        return buf.getvalue()

    def to_text(self):
        lines = ["[classification]", f"case={self.case.value}"]
        for k, (x, a) in enumerate(zip(self.points, self.masses)):
            lines += [f"x_{k}={_fmt_complex(x)}", f"alpha_{k}={a:.17g}"]
        for note in self.diagnostics.get("notes", []):
            lines.append(f"note={note}")
        for row in self.diagnostics.get("table", []):
            lines.append(f"[i={row['i']:g} region={row['region']}]")
            lines.append(f"sup={row['sup']:.17g}")
            lines.append(f"inf={row['inf']:.17g}")
        return "\n".join(lines) + "\n"


def _fmt_complex(z):
    return f"{z.real:.17g}{z.imag:+.17g}j"


def _csv_rows(text):
    body = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return list(csv.DictReader(body))


def parse_classification_csv(text):
    rows = _csv_rows(text)
    if not rows:
        raise InputError("empty classification table")
    case = Case(rows[0]["case"])
    pts = [complex(r["x_k"]) for r in rows if r["x_k"]]
    ms = [float(r["alpha_k"]) for r in rows if r["alpha_k"]]
    return case, pts, ms


def _indices(seq, indices):
    if indices is not None:
        idx = [float(i) for i in indices]
    elif all(isinstance(s, RadialProfile) for s in seq):
        idx = [s.index for s in seq]
    else:
        idx = [float(k + 1) for k in range(len(seq))]
    if len(idx) != len(seq):
        raise InputError("indices and sequence lengths differ")
    if any(b <= a for a, b in zip(idx, idx[1:])) or idx[0] <= 0:
        raise InputError("indices must be positive and strictly increasing")
    return idx


def _check_geometry(seq):
    first = seq[0]
    for s in seq[1:]:
        if isinstance(first, SampledField) != isinstance(s, SampledField):
            raise InputError("sequence mixes sampled fields and other members")
        if isinstance(first, SampledField) and not first.geometry.same_as(s.geometry):
            raise InputError("sequence members live on different grids")
        if isinstance(first, RadialProfile) and (not isinstance(s, RadialProfile) or s.domain != first.domain):
            raise InputError("sequence profiles have different domains")


def _fit_slope(idx, vals):
    x = np.log(np.asarray(idx))
    return float(np.polyfit(x, np.asarray(vals), 1)[0])


def _candidate_peaks(u, thr):
    if isinstance(u, RadialProfile):
        if u.r_min == 0 and sup_all(u) > thr.peak:
            return [0j]
        return []
    if hasattr(u, "peaks"):
        pk = [complex(p) for p in u.peaks()]
        return [p for p in pk if float(_value(u, np.asarray(p))) > thr.peak]
    if isinstance(u, SampledField):
        if u.is_radial:
            return [0j] if u.geometry.r_min == 0 and u.values[0] > thr.peak else []
        v = u.values
        core = v[1:-1, 1:-1]
        is_max = np.ones(core.shape, bool)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy or dx:
                    is_max &= core >= v[1 + dy: v.shape[0] - 1 + dy, 1 + dx: v.shape[1] - 1 + dx]
        is_max &= core > thr.peak
        Z = u.nodes()[1:-1, 1:-1]
        order = np.argsort(-core[is_max], kind="stable")
        return list(Z[is_max][order])
    return []


def _merge(points, radius):
    kept = []
    for p in points:  # sorted by height, highest first
        if all(abs(p - k) >= radius for k in kept):
            kept.append(p)
    return kept


def _stabilized_mass(u, V, x, thr, q):
    ms = []
    for rho in thr.shrink_radii:
        try:
            ms.append(mass_on(u, V, ClosedBall(rho, x), q))
        except DomainError:
            ms.append(None)
    valid = [(rho, m) for rho, m in zip(thr.shrink_radii, ms) if m is not None]
    for (r0, m0), (_, m1) in zip(valid, valid[1:]):
        if m0 > 0 and abs(m1 - m0) / m0 < thr.stabilization:
            return m0, True, ms
    return (valid[-1][1] if valid else float("nan")), False, ms


def detect_concentration(u, thr=None, V=None, q=None):
    """Peaks of ``u`` above ``thr.peak`` carrying at least 4π - mass_tol.

    Returns (points, masses, notes); masses are the stabilized local masses
    over the shrinking radii.
    """
    thr = thr or Thresholds()
    q = q or QuadratureSpec()
    cands = _merge(_candidate_peaks(u, thr), thr.merge_radius)
    pts, ms, notes = [], [], []
    for x in cands:
        m, stable, trail = _stabilized_mass(u, V, x, thr, q)
        if not stable:
            notes.append(f"mass at {_fmt_complex(x)} did not stabilize: {trail}")
        if m >= 4 * math.pi - thr.mass_tol:
            pts.append(x)
            ms.append(m)
        else:
            notes.append(f"peak at {_fmt_complex(x)} rejected, local mass {m:.6g} < 4π - tol")
    return pts, ms, notes


def classify_sequence(seq, regions, thr=None, indices=None, V=None, q=None):
    """Decide which branch of the blow-up trichotomy a finite sequence shows.

    For every region K the series sup_K u_i is examined over the last half
    of the sequence.  A series diverges upward (downward) when it is
    monotone there and either leaves [-big, big] or trends with
    |slope| >= slope_tol against log i while moving by at least ``drift``
    over the whole sequence.  Bounded: no region diverges and all sups stay
    in [-big, big].  UniformCollapse: every region diverges downward.
    Concentration: some region diverges upward and the last member has
    peaks above ``thr.peak`` whose stabilized local mass is at least
    4π - mass_tol.  Anything else is reported as Indeterminate.
    """
    thr = thr or Thresholds()
    q = q or QuadratureSpec()
    seq = list(seq)
    if len(seq) < 4:
        raise InputError("classification needs at least 4 sequence members")
    if not regions:
        raise InputError("at least one region is required")
    _check_geometry(seq)
    idx = _indices(seq, indices)
    table = []
    sups = np.empty((len(seq), len(regions)))
    for a, (i, u) in enumerate(zip(idx, seq)):
        for b, K in enumerate(regions):
            hi, lo = _extrema(u, K)
            sups[a, b] = hi
            table.append({"i": i, "region": K.label(), "sup": hi, "inf": lo})
    half = len(seq) // 2
    tail = sups[half:]
    tail_idx = idx[half:]
    notes = []
    up, down, inside = [], [], []
    for b, K in enumerate(regions):
        s = tail[:, b]
        d = np.diff(s)
        slope = _fit_slope(tail_idx, s)
        move = sups[-1, b] - sups[0, b]
        incr, decr = bool(np.all(d > 0)), bool(np.all(d < 0))
        up.append(incr and (s[-1] > thr.big or (slope >= thr.slope_tol and move >= thr.drift)))
        down.append(decr and (s[-1] < -thr.big or (slope <= -thr.slope_tol and move <= -thr.drift)))
        inside.append(bool(np.all(np.abs(s) <= thr.big)))
        notes.append(f"{K.label()}: slope={slope:.6g} drift={move:.6g} last_sup={s[-1]:.6g}")
    diag = {"table": table, "notes": notes}
    if all(inside) and not any(up) and not any(down):
        return BlowupClassification(Case.BOUNDED, [], [], diag)
    if all(down):
        return BlowupClassification(Case.UNIFORM_COLLAPSE, [], [], diag)
    if any(up):
        pts, ms, pnotes = detect_concentration(seq[-1], thr, V, q)
        notes += pnotes
        if pts:
            return BlowupClassification(Case.CONCENTRATION, pts, ms, diag)
        notes.append("upward divergence without an admissible concentration point")
    else:
        notes.append("mixed monotonicity across regions")
    return BlowupClassification(Case.INDETERMINATE, [], [], diag)


# -- sup + C inf ----------------------------------------------------------------


@dataclass
class SupInfReport:
    indices: list
    sup_omega: list
    inf_K: list
    s: list
    C1: float
    slope: float | None
    c2_empirical: float

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "sup_omega", "inf_K", "s_i"])
        for row in zip(self.indices, self.sup_omega, self.inf_K, self.s):
            w.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()

    def to_text(self):
        lines = ["[supinf]", f"C1={self.C1:.17g}",
                 f"slope={'' if self.slope is None else f'{self.slope:.17g}'}",
                 f"C2_empirical={self.c2_empirical:.17g}"]
        for i, a, b, s in zip(self.indices, self.sup_omega, self.inf_K, self.s):
            lines += [f"[i={i:g}]", f"sup_omega={a:.17g}", f"inf_K={b:.17g}", f"s_i={s:.17g}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text, C1=1.0):
        rows = _csv_rows(text)
        cols = {k: [float(r[k]) for r in rows] for k in ("i", "sup_omega", "inf_K", "s_i")}
        return _supinf_report(cols["i"], cols["sup_omega"], cols["inf_K"], C1)


def _supinf_report(idx, sups, infs, C1):
    s = [a + C1 * b for a, b in zip(sups, infs)]
    slope = None
    if len(idx) >= 4:
        half = len(idx) // 2
        slope = _fit_slope(idx[half:], s[half:])
    return SupInfReport(list(idx), list(sups), list(infs), s, float(C1), slope, max(-x for x in s))


def supinf_statistic(seq, K, C1, indices=None):
    """s_i = sup_Ω u_i + C1 inf_K u_i with a least-squares slope against log i."""
    seq = list(seq)
    if len(seq) < 4:
        raise InputError("sup + C inf statistic needs at least 4 members")
    idx = _indices(seq, indices)
    sups = [sup_all(u) for u in seq]
    infs = [inf_on(u, K) for u in seq]
    return _supinf_report(idx, sups, infs, C1)
