"""Numerical solvers for -Δu = V e^u and the coercive radial Green problem.

Radial problems are integrated as u'' + u'/r + V e^u = 0 with classic RK4,
started off the origin by the even Taylor series.  The 2D solver is damped
Newton on the five-point stencil.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from numbers import Number

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson
from scipy.linalg import solve_banded
from scipy.optimize import brentq
from scipy.sparse.linalg import spsolve

from .errors import BlowupError, InputError, NoSolutionError, SolverError
from .families import WeightSpec
from .fields import RadialGrid, RectGrid, SampledField

log = logging.getLogger(__name__)

U_OVERFLOW = 700.0
# a bubble of height u0 has width ~ e^{-u0/2}; wider steps are not trusted
MAX_STEP_TIMES_SCALE = 0.1
SCAN_STEP = 0.25
FOLD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SolveReport:
    converged: bool
    iterations: int
    residual_norm: float
    solution: SampledField
    details: dict = field(default_factory=dict)


def _weight_function(V):
    if V is None:
        return lambda r: np.zeros_like(np.asarray(r, dtype=float))
    if isinstance(V, Number):
        c = float(V)
        return lambda r: np.full(np.shape(r), c)
    if isinstance(V, WeightSpec) or callable(V):
        return lambda r: np.asarray(V(r), dtype=float) * np.ones(np.shape(r))
    raise InputError(f"unsupported weight {V!r}")


def _is_zero_weight(V):
    return V is None or (isinstance(V, Number) and V == 0) or (isinstance(V, WeightSpec) and V.is_zero)


def _integrate(u0, vfun, nodes, du0=0.0, variational=False, guard="raise"):
    """RK4 for u'' + u'/r = -V e^u over ``nodes``, vectorised over u0.

    Returns arrays (U, W[, Phi, Psi]) of shape (n, m).  With ``guard="mask"``
    trajectories that exceed the overflow cutoff become NaN instead of
    raising.
    """
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    m, n = u0.size, nodes.size
    U = np.empty((n, m))
    W = np.empty((n, m))
    P = np.empty((n, m)) if variational else None
    S = np.empty((n, m)) if variational else None
    U[0], W[0] = u0, du0
    if variational:
        P[0], S[0] = 1.0, 0.0
    start = 0
    if nodes[0] == 0.0:
        # even Taylor start: u = u0 + a r^2 + b r^4
        h = nodes[1]
        V0 = float(vfun(np.array(0.0)))
        V2 = (float(vfun(np.array(h))) - V0) / (h * h)
        e0 = np.exp(np.minimum(u0, U_OVERFLOW))
        a = -V0 * e0 / 4.0
        b1 = V0 * V0 * e0 * e0 / 64.0
        b2 = -V2 * e0 / 16.0
        U[1] = u0 + a * h * h + (b1 + b2) * h**4
        W[1] = 2 * a * h + 4 * (b1 + b2) * h**3
        if variational:
            P[1] = 1.0 + a * h * h + (2 * b1 + b2) * h**4
            S[1] = 2 * a * h + 4 * (2 * b1 + b2) * h**3
        start = 1

    def rhs(r, u, w, phi=None, psi=None):
        ve = vfun(np.array(r)) * np.exp(u)
        dw = -ve - w / r
        if phi is None:
            return w, dw
        return w, dw, psi, -ve * phi - psi / r

    alive = np.isfinite(U[start])
    for k in range(start, n - 1):
        r, h = nodes[k], nodes[k + 1] - nodes[k]
        u, w = U[k], W[k]
        if variational:
            phi, psi = P[k], S[k]
            k1 = rhs(r, u, w, phi, psi)
            k2 = rhs(r + h / 2, *(y + h / 2 * d for y, d in zip((u, w, phi, psi), k1)))
            k3 = rhs(r + h / 2, *(y + h / 2 * d for y, d in zip((u, w, phi, psi), k2)))
            k4 = rhs(r + h, *(y + h * d for y, d in zip((u, w, phi, psi), k3)))
            inc = [h / 6 * (a1 + 2 * a2 + 2 * a3 + a4) for a1, a2, a3, a4 in zip(k1, k2, k3, k4)]
            U[k + 1], W[k + 1] = u + inc[0], w + inc[1]
            P[k + 1], S[k + 1] = phi + inc[2], psi + inc[3]
        else:
            with np.errstate(over="ignore", invalid="ignore"):
                k1 = rhs(r, u, w)
                k2 = rhs(r + h / 2, u + h / 2 * k1[0], w + h / 2 * k1[1])
                k3 = rhs(r + h / 2, u + h / 2 * k2[0], w + h / 2 * k2[1])
                k4 = rhs(r + h, u + h * k3[0], w + h * k3[1])
            U[k + 1] = u + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            W[k + 1] = w + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        bad = ~np.isfinite(U[k + 1]) | (U[k + 1] > U_OVERFLOW)
        if np.any(bad & alive):
            if guard == "raise":
                raise BlowupError(f"e^u overflow after r = {r:.6g}", last_radius=float(r))
            alive &= ~bad
            U[k + 1][bad] = 0.0
            W[k + 1][bad] = 0.0
            if variational:
                P[k + 1][bad] = 0.0
                S[k + 1][bad] = 0.0
    if guard == "mask":
        U[:, ~alive] = np.nan
    out = (U, W, P, S) if variational else (U, W)
    return out, alive


def _ode_residual(nodes, U, W, vfun):
    """max |u'' + u'/r + V e^u| with u'' from 4th-order differences of u'."""
    n = nodes.size
    d = np.diff(nodes)
    if np.allclose(d, d[0], rtol=1e-12, atol=0):
        h = d[0]
        dW = np.full(n, np.nan)
        dW[2:-2] = (-W[4:] + 8 * W[3:-1] - 8 * W[1:-3] + W[:-4]) / (12 * h)
    else:
        dW = np.gradient(W, nodes, edge_order=2)
        dW[:2] = dW[-2:] = np.nan
    mask = np.isfinite(dW) & (nodes > 0)
    r = nodes[mask]
    res = dW[mask] + W[mask] / r + vfun(r) * np.exp(U[mask])
    return float(np.max(np.abs(res))) if res.size else 0.0


def solve_radial_ivp(u0, V, grid, tol=1e-6, du0=0.0):
    """Integrate the radial equation from u(r_min) = u0, u'(r_min) = du0."""
    if u0 > U_OVERFLOW:
        raise BlowupError("initial value beyond overflow cutoff", last_radius=grid.r_min)
    vfun = _weight_function(V)
    (U, W), _ = _integrate(u0, vfun, grid.nodes, du0)
    U, W = U[:, 0], W[:, 0]
    res = _ode_residual(grid.nodes, U, W, vfun)
    sol = SampledField(grid, U, metadata=f"radial-ivp u0={u0:.17g}")
    return SolveReport(res <= tol, grid.n - 1, res, sol, {"u0": float(u0), "du": W})


def _shooting_scan(g, vfun, grid):
    nodes = grid.nodes
    u0s = np.arange(g - 60.0, g + 120.0 + SCAN_STEP / 2, SCAN_STEP)
    vmax = float(np.max(vfun(nodes)))
    if vmax > 0:
        hmax = float(np.max(np.diff(nodes)))
        width = np.sqrt(8.0 / vmax) * np.exp(-u0s / 2.0)
        u0s = u0s[hmax <= MAX_STEP_TIMES_SCALE * width]
    if u0s.size == 0:
        return u0s, u0s, u0s
    (U, W, P, S), alive = _integrate(u0s, vfun, nodes, variational=True, guard="mask")
    F = np.where(alive, U[-1] - g, np.nan)
    D = np.where(alive, P[-1], np.nan)
    return u0s, F, D


def _shoot(u0, vfun, nodes, g):
    (U, W, P, S), _ = _integrate(u0, vfun, nodes, variational=True)
    return float(U[-1, 0] - g), float(P[-1, 0])


def _newton_in_bracket(a, b, fa, vfun, nodes, g, xtol=1e-13):
    """Safeguarded Newton on the shooting map inside [a, b]."""
    x = 0.5 * (a + b)
    for _ in range(80):
        f, df = _shoot(x, vfun, nodes, g)
        if f == 0.0:
            return x
        if (f < 0) == (fa < 0):
            a, fa = x, f
        else:
            b = x
        step = f / df if df != 0 else np.inf
        x_new = x - step
        if not (min(a, b) < x_new < max(a, b)):
            x_new = 0.5 * (a + b)
        if abs(x_new - x) < xtol:
            return x_new
        x = x_new
    return x


def solve_radial_bvp(g, V, branch, grid, tol=1e-6):
    """Shooting for u(r_max) = g with u'(0) = 0.

    The shooting map u0 -> u(r_max; u0) is scanned over [g - 60, g + 120];
    transversal roots are refined by Newton with the variational derivative,
    tangential roots (folds) by locating the zero of the derivative.
    ``branch`` picks the smallest ("low") or largest ("high") root.
    """
    if branch not in ("low", "high"):
        raise InputError("branch must be 'low' or 'high'")
    if grid.r_min != 0.0:
        raise InputError("shooting needs a disk grid starting at r = 0")
    vfun = _weight_function(V)
    nodes = grid.nodes
    if _is_zero_weight(V):
        rep = solve_radial_ivp(g, V, grid, tol)
        rep.details["roots"] = [float(g)]
        return rep

    u0s, F, D = _shooting_scan(g, vfun, grid)
    roots = []
    for j in range(u0s.size - 1):
        fa, fb = F[j], F[j + 1]
        if not (np.isfinite(fa) and np.isfinite(fb)):
            continue
        if fa == 0.0:
            roots.append(float(u0s[j]))
        elif fa * fb < 0:
            roots.append(float(_newton_in_bracket(u0s[j], u0s[j + 1], fa, vfun, nodes, g)))
        elif np.isfinite(D[j]) and np.isfinite(D[j + 1]) and D[j] * D[j + 1] < 0 and min(abs(fa), abs(fb)) < 1.0:
            fold = brentq(lambda x: _shoot(x, vfun, nodes, g)[1], u0s[j], u0s[j + 1], xtol=1e-14, rtol=1e-15)
            if abs(_shoot(fold, vfun, nodes, g)[0]) <= FOLD_TOL:
                roots.append(fold)
    if not roots:
        raise NoSolutionError(f"no shooting bracket for g = {g:.6g} in [g-60, g+120]")
    roots = sorted(roots)
    u0 = roots[0] if branch == "low" else roots[-1]
    rep = solve_radial_ivp(u0, V, grid, tol)
    rep.details["roots"] = roots
    rep.details["branch"] = branch
    return rep


def radial_mass(field, V=None):
    """2π ∫ V e^u r dr over a radial SampledField (Simpson on the nodes)."""
    if not field.is_radial:
        raise InputError("radial_mass needs a radial field")
    r = field.geometry.nodes
    w = _weight_function(1.0 if V is None else V)(r)
    return float(2.0 * math.pi * simpson(w * np.exp(field.values) * r, x=r))


# -- 2D finite differences --------------------------------------------------


def _grid_values(spec, grid, default=0.0):
    Z = grid.mesh()
    if spec is None:
        return np.full(Z.shape, default)
    if isinstance(spec, Number):
        return np.full(Z.shape, float(spec))
    if isinstance(spec, SampledField):
        return spec.value_at(Z)
    if callable(spec):
        return np.asarray(spec(Z), dtype=float) * np.ones(Z.shape)
    arr = np.asarray(spec, dtype=float)
    if arr.shape != Z.shape:
        raise InputError(f"array of shape {arr.shape} does not match grid {Z.shape}")
    return arr


def _laplacian_matrix(nx, ny, hx, hy):
    def lap1(n, h):
        return sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n)) / (h * h)

    return (sp.kron(sp.identity(ny), lap1(nx, hx)) + sp.kron(lap1(ny, hy), sp.identity(nx))).tocsc()


def solve_fd2d(grid, V, g, tol=1e-8, max_steps=50, initial=None):
    """Damped Newton for -Δ_h u - V e^u = 0 on a rectangle with u = g on ∂.

    Returns a report with the full-grid solution.  Non-convergence after
    ``max_steps`` damped steps is reported with the last iterate.
    """
    if not isinstance(grid, RectGrid):
        raise InputError("solve_fd2d needs a RectGrid")
    Vv = _grid_values(V, grid)
    if np.any(Vv < 0):
        raise InputError("weight must be nonnegative")
    G = _grid_values(g, grid)
    nx, ny, hx, hy = grid.nx - 2, grid.ny - 2, grid.hx, grid.hy
    A = _laplacian_matrix(nx, ny, hx, hy)
    b = np.zeros((ny, nx))
    b[:, 0] += G[1:-1, 0] / hx**2
    b[:, -1] += G[1:-1, -1] / hx**2
    b[0, :] += G[0, 1:-1] / hy**2
    b[-1, :] += G[-1, 1:-1] / hy**2
    b = b.ravel()
    Vi = Vv[1:-1, 1:-1].ravel()
    u = np.zeros(nx * ny) if initial is None else _grid_values(initial, grid)[1:-1, 1:-1].ravel().copy()

    def resid(v):
        with np.errstate(over="ignore"):
            return A @ v - b - Vi * np.exp(v)

    F = resid(u)
    norm = float(np.max(np.abs(F)))
    steps = 0
    while norm > tol and steps < max_steps:
        J = A - sp.diags(Vi * np.exp(u))
        try:
            delta = spsolve(J.tocsc(), -F)
        except RuntimeError as exc:  # singular factorisation
            raise SolverError(f"Newton linear solve failed: {exc}") from exc
        if not np.all(np.isfinite(delta)):
            break
        alpha = 1.0
        while True:
            trial = u + alpha * delta
            Ft = resid(trial)
            nt = float(np.max(np.abs(Ft)))
            if np.isfinite(nt) and nt <= (1.0 - 1e-4 * alpha) * norm or alpha < 1e-6:
                break
            alpha *= 0.5
        steps += 1
        if not np.isfinite(nt):
            break
        u, F, norm = trial, Ft, nt
        log.debug("newton step %d alpha=%g residual=%g", steps, alpha, norm)
    full = G.copy()
    full[1:-1, 1:-1] = u.reshape(ny, nx)
    sol = SampledField(grid, full, metadata="fd2d")
    return SolveReport(norm <= tol, steps, norm, sol)


# -- coercive Green function ------------------------------------------------


def green_coercive_radial(eps, r_eval, grid):
    """G(0, r) for (-Δ + ε) G = δ_0 on B_1, G = 0 on ∂B_1.

    Split G = -(1/2π) log r + h; the remainder solves
    -(h'' + h'/r) + ε h = (ε/2π) log r, h(1) = 0, h'(0) = 0,
    discretised by second-order finite volumes with the r log r source
    integrated exactly on each cell.  ``r_eval`` may be an array.
    """
    nodes = grid.nodes
    if grid.r_min != 0.0:
        raise InputError("coercive Green solve needs a disk grid starting at r = 0")
    r_eval = np.asarray(r_eval, dtype=float)
    if np.any(r_eval <= 0) or np.any(r_eval >= grid.r_max):
        raise InputError("r_eval must lie in (0, r_max)")
    R = grid.r_max
    e = _weight_function(eps)(nodes)
    if np.any(e < 0):
        raise InputError("ε must be nonnegative")
    n = nodes.size
    d = np.diff(nodes)
    faces = np.concatenate([[0.0], 0.5 * (nodes[:-1] + nodes[1:]), [R]])

    def prim(r):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r > 0, 0.5 * r * r * np.log(r / R) - 0.25 * r * r, 0.0)

    area = 0.5 * (faces[1:] ** 2 - faces[:-1] ** 2)
    source = e / (2.0 * math.pi) * (prim(faces[1:]) - prim(faces[:-1]))
    # unknowns h_0 .. h_{n-2}; h_{n-1} = 0
    m = n - 1
    cr = faces[1:m + 1] / d[:m]  # coupling to the right neighbour
    cl = np.concatenate([[0.0], faces[1:m] / d[: m - 1]])
    diag = cr + cl + e[:m] * area[:m]
    ab = np.zeros((3, m))
    ab[0, 1:] = -cr[: m - 1]
    ab[1] = diag
    ab[2, :-1] = -cl[1:]
    try:
        h = solve_banded((1, 1), ab, source[:m])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"coercive Green system is singular: {exc}") from exc
    if not np.all(np.isfinite(h)):
        raise SolverError("coercive Green system is singular")
    h = np.concatenate([h, [0.0]])
    G = -np.log(r_eval / R) / (2.0 * math.pi) + np.interp(r_eval, nodes, h)
    return float(G) if G.ndim == 0 else G
