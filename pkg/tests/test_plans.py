import numpy as np
import pytest

from bosonboson.plans import ExperimentPlan, PlanError, _parse_axis, parse_plan


SPECTRUM_PLAN = """
# weak-drive spectrum sweep
kind = spectrum
s = 1
alpha = 0.1,0.25
kappa = 0.01
delta_c = -0.5:0.5:11
out = spec
"""

DYNAMICS_PLAN = """
kind = dynamics
s = 1
alpha = 0.15
kappa = 0.01
eta = 0.25
delta_c = resonance
dim = 5
dt = 0.1
t_final = 4.0
memory_steps = 10
svd_cutoff = 1e-7
out = dyn
"""


class TestAxisParsing:
    def test_single_number(self):
        assert _parse_axis("0.3").tolist() == [0.3]

    def test_comma_list(self):
        assert _parse_axis("0.1, 0.2,0.5").tolist() == [0.1, 0.2, 0.5]

    def test_range(self):
        got = _parse_axis("-1:1:5")
        assert np.allclose(got, np.linspace(-1, 1, 5))

    def test_single_point_range(self):
        assert _parse_axis("0.2:0.2:1").tolist() == [0.2]

    @pytest.mark.parametrize("bad", [
        "0.5,0.2",       # not increasing
        "0.3,0.3",       # not strict
        "1:0:5",         # decreasing range
        "0:1:0",         # empty range
        "0:1",           # malformed range
        "",              # empty
        "a,b",
    ])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            _parse_axis(bad)


class TestParsing:
    def test_spectrum_plan(self):
        plan = parse_plan(SPECTRUM_PLAN)
        assert plan.kind == "spectrum"
        assert plan.alphas == (0.1, 0.25)
        assert plan.kappa == 0.01
        assert not plan.has_tempo
        grid = plan.delta_grid(0.1)
        assert grid.size == 11 and grid[0] == -0.5 and grid[-1] == 0.5

    def test_reads_from_path(self, tmp_path):
        path = tmp_path / "sweep.plan"
        path.write_text(SPECTRUM_PLAN)
        assert parse_plan(path) == parse_plan(SPECTRUM_PLAN)

    def test_dynamics_plan(self):
        plan = parse_plan(DYNAMICS_PLAN)
        assert plan.has_tempo
        assert plan.dim == 5
        assert plan.memory_steps == 10
        assert plan.max_bond == 256          # default
        assert plan.readout_stride == 1      # default

    def test_comments_and_blanks_ignored(self):
        plan = parse_plan(SPECTRUM_PLAN + "\n# trailing comment\n\n")
        assert plan.kind == "spectrum"

    def test_inline_comment(self):
        plan = parse_plan(SPECTRUM_PLAN.replace(
            "kappa = 0.01", "kappa = 0.01  # cavity linewidth"))
        assert plan.kappa == 0.01

    def test_resolved_is_manifest_ready(self):
        doc = parse_plan(SPECTRUM_PLAN).resolved()
        assert doc["alphas"] == [0.1, 0.25]
        assert "source" not in doc
        import json
        json.dumps(doc)  # must be serializable as-is


def problems_for(text):
    with pytest.raises(PlanError) as err:
        parse_plan(text)
    return {p["key"]: p["message"] for p in err.value.problems}


class TestRejection:
    def test_unknown_key(self):
        probs = problems_for(SPECTRUM_PLAN + "colour = blue\n")
        assert "colour" in probs and "unknown" in probs["colour"]

    def test_duplicate_key(self):
        probs = problems_for(SPECTRUM_PLAN + "kappa = 0.02\n")
        assert "duplicate" in probs["kappa"]

    def test_missing_required_key(self):
        probs = problems_for(SPECTRUM_PLAN.replace("kappa = 0.01", ""))
        assert "required" in probs["kappa"]

    def test_not_an_assignment(self):
        probs = problems_for(SPECTRUM_PLAN + "just some words\n")
        assert any(k.startswith("line") for k in probs)

    def test_key_outside_kind(self):
        probs = problems_for(SPECTRUM_PLAN + "wigner_extent = 5\n")
        assert "not valid for kind=spectrum" in probs["wigner_extent"]

    def test_bad_kind(self):
        probs = problems_for("kind = frequency\nout = x\n")
        assert "kind" in probs

    def test_tempo_block_all_or_none(self):
        text = SPECTRUM_PLAN.replace("kind = spectrum", "kind = g2")
        text = text.replace("kappa = 0.01", "kappa = 0.01\neta = 0.005")
        probs = problems_for(text + "dim = 4\ndt = 0.1\n")
        assert any("tempo block needs all of" in m for m in probs.values())

    def test_bad_s(self):
        probs = problems_for(SPECTRUM_PLAN.replace("s = 1", "s = 1.5"))
        assert "s" in probs

    def test_negative_kappa(self):
        probs = problems_for(
            SPECTRUM_PLAN.replace("kappa = 0.01", "kappa = -1"))
        assert "kappa" in probs

    def test_negative_alpha(self):
        probs = problems_for(
            SPECTRUM_PLAN.replace("alpha = 0.1,0.25", "alpha = -0.1"))
        assert "alpha" in probs

    def test_unparseable_number(self):
        probs = problems_for(
            SPECTRUM_PLAN.replace("kappa = 0.01", "kappa = fast"))
        assert "kappa" in probs

    def test_dynamics_needs_single_alpha(self):
        probs = problems_for(
            DYNAMICS_PLAN.replace("alpha = 0.15", "alpha = 0.1,0.2"))
        assert "single alpha" in probs["alpha"]

    def test_dynamics_needs_single_detuning(self):
        probs = problems_for(
            DYNAMICS_PLAN.replace("delta_c = resonance",
                                  "delta_c = 0:1:5"))
        assert "single detuning" in probs["delta_c"]

    def test_error_message_names_every_problem(self):
        with pytest.raises(PlanError) as err:
            parse_plan(SPECTRUM_PLAN + "colour = blue\nshape = round\n")
        assert "colour" in str(err.value) and "shape" in str(err.value)


class TestUnitNormalization:
    def test_rates_divide_times_multiply(self):
        scaled = DYNAMICS_PLAN.replace("kind = dynamics",
                                       "kind = dynamics\nomega_c = 2.0")
        plan, ref = parse_plan(scaled), parse_plan(DYNAMICS_PLAN)
        assert plan.omega_c == 2.0
        assert plan.kappa == ref.kappa / 2.0
        assert plan.eta == ref.eta / 2.0
        assert plan.dt == ref.dt * 2.0
        assert plan.t_final == ref.t_final * 2.0

    def test_detuning_grid_rescaled(self):
        plan = parse_plan(SPECTRUM_PLAN + "omega_c = 4.0\n")
        grid = plan.delta_grid(0.1)
        assert np.allclose(grid, np.linspace(-0.5, 0.5, 11) / 4.0)

    def test_resonance_resolved_per_alpha(self):
        plan = parse_plan(DYNAMICS_PLAN)
        from bosonboson.bath import BathSpec, polaron_shift
        from bosonboson.spectra import WeakDriveProblem, resonance
        prob = WeakDriveProblem(
            bath=BathSpec(alpha=0.15, s=1.0, omega_c=1.0), kappa=0.01)
        grid = plan.delta_grid(0.15)
        assert grid.size == 1
        assert grid[0] == pytest.approx(resonance(prob), rel=1e-12)
        # the peak sits near minus the polaron shift
        assert abs(grid[0] + polaron_shift(prob.bath)) < 0.05

    def test_plan_is_frozen(self):
        plan = parse_plan(SPECTRUM_PLAN)
        with pytest.raises(Exception):
            plan.kappa = 1.0
