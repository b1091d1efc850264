import math

import numpy as np
import pytest

from liouville_lab.errors import BlowupError, InputError, NoSolutionError
from liouville_lab.families import RadialProfile, mass
from liouville_lab.fields import RadialGrid, RectGrid
from liouville_lab.pde_solver import (
    green_coercive_radial, radial_mass, solve_fd2d, solve_radial_bvp, solve_radial_ivp,
)

GRID = RadialGrid.uniform(1.0, 1025)


def test_ivp_reproduces_unit_bubble():
    rep = solve_radial_ivp(math.log(8), 1.0, GRID)
    assert rep.converged
    assert rep.solution.values[-1] == pytest.approx(math.log(2), abs=1e-6)


def test_ivp_zero_weight_is_constant():
    rep = solve_radial_ivp(-1.3, 0.0, GRID)
    assert np.all(rep.solution.values == -1.3)


def test_ivp_matches_bubble_and_is_fourth_order():
    p = RadialProfile.bubble(4)
    errs = []
    for n in (257, 513, 1025):
        g = RadialGrid.uniform(1.0, n)
        u = solve_radial_ivp(math.log(8 * 16), 1.0, g).solution.values
        errs.append(np.max(np.abs(u - p._derivs(g.nodes, 0)[0])))
    assert errs[-1] <= 1e-6
    assert errs[0] / errs[1] >= 8 * 0.9
    assert errs[1] / errs[2] >= 8 * 0.9


def test_ivp_blowup_guard():
    with pytest.raises(BlowupError):
        solve_radial_ivp(800.0, 1.0, GRID)


def test_radial_mass_of_ivp_solution():
    rep = solve_radial_ivp(math.log(8 * 9), 1.0, GRID)
    assert radial_mass(rep.solution) == pytest.approx(mass(RadialProfile.bubble(3), 1.0), rel=1e-6)


def test_bvp_low_branch_and_harmonic_case():
    rep = solve_radial_bvp(math.log(2), 1.0, "low", GRID)
    assert rep.details["u0"] == pytest.approx(math.log(8), abs=1e-6)
    rep0 = solve_radial_bvp(0.7, 0.0, "high", GRID)
    assert np.allclose(rep0.solution.values, 0.7)


def test_bvp_branch_consistency():
    g = math.log(32 / 25)
    lo = solve_radial_bvp(g, 1.0, "low", GRID).details["u0"]
    hi = solve_radial_bvp(g, 1.0, "high", GRID).details["u0"]
    assert lo <= hi
    assert lo == pytest.approx(math.log(2), abs=1e-6)
    assert hi == pytest.approx(math.log(32), abs=1e-6)


def test_bvp_errors():
    with pytest.raises(NoSolutionError):
        solve_radial_bvp(5.0, 1.0, "high", GRID)
    with pytest.raises(InputError):
        solve_radial_bvp(0.0, 1.0, "middle", GRID)


def test_fd2d_linear_reproduction_and_maximum_principle():
    g = RectGrid(0, 1, 0, 1, 21, 21)
    rep = solve_fd2d(g, 0.0, lambda z: z.real)
    assert np.max(np.abs(rep.solution.values - g.mesh().real)) <= 1e-12
    rep = solve_fd2d(g, 0.0, lambda z: np.sin(5 * z.real) * np.cos(3 * z.imag))
    v = rep.solution.values
    edge = np.concatenate([v[0], v[-1], v[:, 0], v[:, -1]])
    assert v.max() <= edge.max() + 1e-12 and v.min() >= edge.min() - 1e-12


def test_fd2d_bubble_restricted_to_square():
    p = RadialProfile.bubble(2)
    g = RectGrid.square(0.25, 65)  # h = 1/128
    rep = solve_fd2d(g, 1.0, lambda z: p.value_at(z))
    assert rep.converged
    assert np.max(np.abs(rep.solution.values - p.value_at(g.mesh()))) <= 5e-3


def test_coercive_green_laplace_case():
    g = RadialGrid.uniform(1.0, 4097)
    assert green_coercive_radial(0.0, 0.5, g) == pytest.approx(-math.log(0.5) / (2 * math.pi), abs=1e-12)
    r = g.nodes[1:-1]
    assert np.max(np.abs(green_coercive_radial(0.0, r, g) + np.log(r) / (2 * math.pi))) <= 1e-6


def test_coercive_green_monotone_in_eps():
    g = RadialGrid.uniform(1.0, 4097)
    vals = [green_coercive_radial(c, 0.5, g) for c in (0.0, 1.0, 10.0, 100.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    r = np.linspace(0.05, 0.95, 19)
    small = green_coercive_radial(lambda s: 1 + s, r, g)
    large = green_coercive_radial(lambda s: 2 + s * s + s, r, g)
    assert np.all(large < small)


def test_coercive_green_rejects_bad_eval_point():
    with pytest.raises(InputError):
        green_coercive_radial(1.0, 1.0, GRID)
