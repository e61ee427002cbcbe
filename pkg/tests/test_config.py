"""Tests for run-configuration parsing, validation, and re-rendering.

The round-trip property — resolved_config_text(parse(...)) reparses to an
equal RunConfig — is what makes stored run directories reproducible, so
it gets exercised across the full option surface.
"""

import numpy as np
import pytest

from pauliflow.config import (
    ConfigError,
    ConfigTypeError,
    InvariantViolation,
    MissingKeyError,
    RunConfig,
    apply_overrides,
    load_config,
    parse_config,
    resolved_config_text,
)
from pauliflow.evolution import StepScheme
from pauliflow.fields import GaugeKind

MINIMAL = """\
[grid]
n = 8
box_length = 6.283185307179586

[evolution]
gauge = darwin
epsilon = 0.0
dt = 0.01
t_final = 0.05

[initial_data]
kind = gaussian_packet
width = 1.0
"""


def with_evolution(extra: str) -> str:
    """MINIMAL with extra lines inserted into the [evolution] section."""
    return MINIMAL.replace("t_final = 0.05\n", "t_final = 0.05\n" + extra)


class TestParsing:
    def test_minimal_config(self):
        cfg = parse_config(MINIMAL)
        assert cfg.grid_n == 8
        assert cfg.gauge is GaugeKind.DARWIN
        assert cfg.epsilon == 0.0
        assert cfg.dt == 0.01
        assert cfg.t_final == 0.05
        assert cfg.initial.kind == "gaussian_packet"
        assert cfg.initial.width == 1.0

    def test_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.scheme is StepScheme.RK4
        assert cfg.dealias is True
        assert cfg.picard_tol == 1e-10
        assert cfg.picard_max_iterations == 25
        assert cfg.blowup_factor == 1e3
        assert cfg.solver.tolerance == 1e-10
        assert cfg.solver.max_iterations == 200
        assert cfg.solver.damping == 1.0
        assert cfg.stride == 10
        assert cfg.snapshots is False
        assert cfg.sobolev_s == 2.0
        assert cfg.seed == 0
        assert cfg.gates.charge_rel == 1e-8
        assert cfg.gates.energy_rel == 1e-6
        assert cfg.gates.sweep_slope_min == 0.9
        assert cfg.gates.order_window == 0.5

    def test_vectors_and_booleans(self):
        # MINIMAL ends inside [initial_data], so these keys extend it
        text = MINIMAL + (
            "momentum = 1, 0, -2\n"
            "spin = 1+0j 0.5j\n"
            "center = 1.0 2.0 3.0\n"
            "\n[output]\nsnapshots = yes\nstride = 3\n"
        )
        cfg = parse_config(text)
        assert cfg.initial.momentum == (1, 0, -2)
        assert cfg.initial.spin == (1.0 + 0.0j, 0.5j)
        assert cfg.initial.center == (1.0, 2.0, 3.0)
        assert cfg.snapshots is True
        assert cfg.stride == 3

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(MINIMAL)
        assert load_config(path) == parse_config(MINIMAL)


class TestUnknownAndMissing:
    def test_unknown_key_named_in_error(self):
        text = MINIMAL.replace("epsilon = 0.0", "espilon = 0.0")
        with pytest.raises(ConfigError, match="espilon"):
            parse_config(text)

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="turbulence"):
            parse_config(MINIMAL + "\n[turbulence]\nmodel = none\n")

    def test_missing_required_key(self):
        text = MINIMAL.replace("dt = 0.01\n", "")
        with pytest.raises(MissingKeyError, match="evolution.dt"):
            parse_config(text)

    def test_missing_width_for_gaussian(self):
        text = MINIMAL.replace("width = 1.0\n", "")
        with pytest.raises(MissingKeyError, match="width"):
            parse_config(text)

    def test_missing_path_for_file_kind(self):
        text = MINIMAL.replace("kind = gaussian_packet\nwidth = 1.0\n", "kind = file\n")
        with pytest.raises(MissingKeyError, match="path"):
            parse_config(text)


class TestTypeErrors:
    def test_non_integer_n(self):
        with pytest.raises(ConfigTypeError, match="grid.n"):
            parse_config(MINIMAL.replace("n = 8", "n = eight"))

    def test_non_numeric_dt(self):
        with pytest.raises(ConfigTypeError, match="evolution.dt"):
            parse_config(MINIMAL.replace("dt = 0.01", "dt = fast"))

    def test_bad_boolean(self):
        with pytest.raises(ConfigTypeError, match="dealias"):
            parse_config(with_evolution("dealias = maybe\n"))

    def test_wrong_vector_arity(self):
        with pytest.raises(ConfigTypeError, match="momentum"):
            parse_config(MINIMAL + "momentum = 1 2\n")

    def test_malformed_ini(self):
        with pytest.raises(ConfigError, match="malformed"):
            parse_config("grid]\nn = 8\n")


class TestInvariants:
    def test_odd_grid(self):
        with pytest.raises(InvariantViolation, match="grid"):
            parse_config(MINIMAL.replace("n = 8", "n = 7"))

    def test_unknown_gauge(self):
        with pytest.raises(InvariantViolation, match="gauge"):
            parse_config(MINIMAL.replace("gauge = darwin", "gauge = temporal"))

    def test_unknown_scheme(self):
        with pytest.raises(InvariantViolation, match="scheme"):
            parse_config(with_evolution("scheme = euler\n"))

    def test_negative_epsilon(self):
        with pytest.raises(InvariantViolation, match="epsilon"):
            parse_config(MINIMAL.replace("epsilon = 0.0", "epsilon = -0.1"))

    def test_nonpositive_dt(self):
        with pytest.raises(InvariantViolation, match="dt"):
            parse_config(MINIMAL.replace("dt = 0.01", "dt = 0"))

    def test_blowup_factor_must_exceed_one(self):
        with pytest.raises(InvariantViolation, match="blowup"):
            parse_config(with_evolution("blowup_factor = 1.0\n"))

    def test_bad_stride(self):
        with pytest.raises(InvariantViolation, match="stride"):
            parse_config(MINIMAL + "\n[output]\nstride = 0\n")

    def test_nonpositive_gate(self):
        with pytest.raises(InvariantViolation, match="charge_rel"):
            parse_config(MINIMAL + "\n[gates]\ncharge_rel = 0\n")

    def test_unknown_initial_kind(self):
        text = MINIMAL.replace("kind = gaussian_packet", "kind = vortex")
        with pytest.raises(InvariantViolation, match="kind"):
            parse_config(text)

    def test_solver_invariants(self):
        with pytest.raises(InvariantViolation, match="solver"):
            parse_config(MINIMAL + "\n[solver]\ntolerance = -1e-10\n")


class TestOverrides:
    def test_set_overrides_values(self):
        cfg = parse_config(
            MINIMAL, overrides=["evolution.epsilon=0.2", "grid.n=16", "output.stride=5"]
        )
        assert cfg.epsilon == 0.2
        assert cfg.grid_n == 16
        assert cfg.stride == 5

    def test_override_unknown_key(self):
        with pytest.raises(ConfigError, match="espilon"):
            parse_config(MINIMAL, overrides=["evolution.espilon=0.2"])

    def test_override_without_equals(self):
        with pytest.raises(ConfigError, match="section.key=value"):
            parse_config(MINIMAL, overrides=["evolution.epsilon"])

    def test_override_bad_path(self):
        with pytest.raises(ConfigError, match="section.key"):
            parse_config(MINIMAL, overrides=["epsilon=0.2"])

    def test_override_value_still_type_checked(self):
        with pytest.raises(ConfigTypeError, match="epsilon"):
            parse_config(MINIMAL, overrides=["evolution.epsilon=soft"])

    def test_apply_overrides_mutates_tree(self):
        tree = {"grid": {"n": "8"}}
        apply_overrides(tree, ["grid.n=32", "run.seed=7"])
        assert tree["grid"]["n"] == "32"
        assert tree["run"]["seed"] == "7"


class TestResolvedRoundTrip:
    def reparse(self, cfg: RunConfig) -> RunConfig:
        return parse_config(resolved_config_text(cfg))

    def test_minimal_round_trip(self):
        cfg = parse_config(MINIMAL)
        assert self.reparse(cfg) == cfg

    def test_round_trip_with_everything_set(self):
        text = with_evolution(
            "scheme = semigroup_picard\ndealias = false\npicard_tol = 1e-9\n"
        ) + (
            "momentum = 2 -1 0\n"
            "spin = 0.6+0.8j 1-0.5j\n"
            "center = 0.25 1.5 3.0\n"
            "normalization = 2.5\n"
            "\n[solver]\ntolerance = 1e-11\nmax_iterations = 50\ndamping = 0.8\n"
            "\n[output]\nstride = 2\nsnapshots = true\n"
            "\n[diagnostics]\nsobolev_s = 1.5\n"
            "\n[gates]\nsweep_slope_min = 0.8\nh1_guard = 20\n"
            "\n[run]\nseed = 42\n"
        )
        cfg = parse_config(text.replace("gauge = darwin", "gauge = poisswell"))
        assert cfg.gauge is GaugeKind.POISSWELL
        assert self.reparse(cfg) == cfg

    def test_round_trip_preserves_awkward_floats(self):
        # repr round-trips doubles exactly, including non-decimal values
        dt = float(np.nextafter(1e-3, 0.0))
        cfg = parse_config(MINIMAL, overrides=[f"evolution.dt={dt!r}"])
        assert self.reparse(cfg).dt == dt

    def test_round_trip_file_kind(self, tmp_path):
        text = MINIMAL.replace(
            "kind = gaussian_packet\nwidth = 1.0\n",
            f"kind = file\npath = {tmp_path / 'u.pwf'}\n",
        )
        cfg = parse_config(text)
        assert self.reparse(cfg) == cfg
