import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouville_lab import analysis as an
from liouville_lab.cli import main
from liouville_lab.errors import DomainError, InputError
from liouville_lab.experiments import (
    ScenarioConfig, TwoBubbleField, TwoBubbleSpec, build_two_bubble, parse_index_list, run,
)
from liouville_lab.fields import RectGrid, SampledField


def test_index_list_syntax():
    assert parse_index_list("1..5") == [1, 2, 3, 4, 5]
    assert parse_index_list("16..128:x2") == [16, 32, 64, 128]
    assert parse_index_list("0.5..1:+0.25") == [0.5, 0.75, 1.0]
    assert parse_index_list("1,2, 4,8..10") == [1, 2, 4, 8, 9, 10]
    with pytest.raises(InputError):
        parse_index_list("1..x")


@given(st.lists(st.integers(1, 10_000), min_size=1, max_size=20, unique=True))
def test_index_list_comma_roundtrip(vals):
    vals = sorted(vals)
    assert parse_index_list(",".join(map(str, vals))) == vals


def test_config_validation_and_aliases():
    cfg = ScenarioConfig.from_pairs("remark-collapse", ["mu=4..16:x2", "C1=2"])
    assert cfg.indices == [4, 8, 16] and cfg.C1 == 2.0
    cfg = ScenarioConfig.from_text("annulus-volume", "# comment\ni=1..4\nformat=text\n")
    assert cfg.format == "text"
    for bad in (["i=3,2"], ["n=10"], ["nope=1"], ["format=xml"], ["i"]):
        with pytest.raises(InputError):
            ScenarioConfig.from_pairs("bubble-quantization", bad)
    with pytest.raises(InputError):
        ScenarioConfig.from_pairs("no-such-scenario", [])


def test_two_bubble_spec_defaults():
    s = TwoBubbleSpec(3.0)
    assert s.M0 == 9.0 and s.M1 == 9.0
    with pytest.raises(InputError):
        TwoBubbleSpec(1.0)
    with pytest.raises(InputError):
        TwoBubbleSpec(3.0, math.inf)


def test_build_two_bubble_default_mass():
    f = build_two_bubble(TwoBubbleSpec(3.0), RectGrid.square(1.0, 513))
    assert an.mass_on(f, 1.0, an.ClosedBall(1.0)) == pytest.approx(16 * math.pi, rel=0.1)
    back = SampledField.loads(f.dumps())
    assert np.array_equal(back.values, f.values)


def test_build_two_bubble_single_peak():
    spec = TwoBubbleSpec(3.0, 9.0, -math.inf)
    f = build_two_bubble(spec, RectGrid.square(1.0, 513))
    assert an.mass_on(f, 1.0, an.ClosedBall(1.0)) == pytest.approx(8 * math.pi, rel=0.02)
    assert TwoBubbleField(spec).ball_mass(0j, 1.0) == pytest.approx(8 * math.pi, rel=1e-3)


def test_build_two_bubble_errors():
    with pytest.raises(DomainError):
        build_two_bubble(TwoBubbleSpec(3.0), RectGrid.square(0.5, 65))


def test_two_bubble_symmetry():
    r = 4.0
    f = TwoBubbleField(TwoBubbleSpec(r))
    y = np.array([0.1 + 0.2j, -0.3 + 0.05j, 0.6 - 0.4j])
    mirror = (1 / r - y.real) + 1j * y.imag  # reflection through the midpoint 1/(2r)
    assert np.allclose(f.value_at(y), f.value_at(mirror), atol=1e-12)


def test_ball_mass_against_polar_rule():
    f = TwoBubbleField(TwoBubbleSpec(2.0, 6.0, 5.0))
    for c, rho in [(0j, 0.2), (0.5 + 0j, 0.1), (0.3 + 0.3j, 0.25), (-0.5 + 0j, 0.3)]:
        exact = f.ball_mass(c, rho)
        polar = an._polar_mass(lambda z: np.exp(f.value_at(z)), c, rho, an.QuadratureSpec(angular_nodes=1024))
        assert exact == pytest.approx(polar, rel=1e-6, abs=1e-9)


def test_two_bubble_peaks_merge():
    counts = [len(an.detect_concentration(TwoBubbleField(TwoBubbleSpec(r, 9.0, 9.0)))[0]) for r in (8, 64)]
    assert counts == [2, 1]
    f = TwoBubbleField(TwoBubbleSpec(8.0, 9.0, 9.0))
    assert an.boundary_oscillation(f, an.BoundaryCircle(1.0)) > 0


def test_run_small_scenarios(tmp_path):
    cfg = ScenarioConfig.from_pairs("annulus-volume", ["i=1..32", f"out={tmp_path}"])
    res = run(cfg)
    assert res.ok
    text = (tmp_path / "annulus-volume.csv").read_text()
    assert text.startswith("# schema=annulus-volume.v1\ni,mass,mass_over_i,closed_form\n")
    cfg = ScenarioConfig.from_pairs("remark-collapse", ["mu=4..256", f"out={tmp_path}"])
    res = run(cfg)
    assert res.ok
    rep = an.SupInfReport.from_csv((tmp_path / "remark-collapse.csv").read_text())
    assert rep.indices[:3] == [4.0, 5.0, 6.0]
    case, _, _ = an.parse_classification_csv((tmp_path / "remark-collapse-class.csv").read_text())
    assert case is an.Case.UNIFORM_COLLAPSE


def test_green_nullity_example(tmp_path):
    res = run(ScenarioConfig.from_pairs("example1-green-nullity", ["i=1..100", "n=4097"]), write=False)
    rows = res.tables[0].rows
    assert rows[-1][2] <= 0.1 * rows[0][2]
    assert res.ok


def test_text_format(tmp_path):
    cfg = ScenarioConfig.from_pairs("split-identity", ["i=1..4", "format=text", f"out={tmp_path}"])
    run(cfg)
    text = (tmp_path / "split-identity.txt").read_text()
    assert "[i=1]" in text and "residual=" in text


def test_claim_failure_sets_exit_code(tmp_path):
    # three indices are too few to classify, so the gating claim fails
    assert main(["remark-collapse", "mu=4,8,16", "--out", str(tmp_path)]) == 1


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["annulus-volume", "i=1..16", "--out", str(tmp_path)]) == 0
    assert "[ok]" in capsys.readouterr().out
    assert main(["bogus"]) == 2
    assert main(["annulus-volume", "i=3,1"]) == 2
    assert main([]) == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text("i=1..8\nformat=text\n")
    assert main(["annulus-volume", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "annulus-volume.txt").exists()
    assert main(["annulus-volume", "--config", str(tmp_path / "missing.cfg")]) == 2
