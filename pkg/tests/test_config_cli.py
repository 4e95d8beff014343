import json
import math

import numpy as np
import pytest

from fracimp.cli import BUILTIN_CONFIGS, example51_config, run, sqrt_halforder_config
from fracimp.config import parse_config, serialize_config
from fracimp.errors import ConfigError

MINIMAL = """
schema_version = 1

[problem]
alpha = 2/3
beta = 2/3
tau_points = [1, 3]
sigma_points = [2]
x0 = 0
f = @example51.f
h = @example51.h
impulse_1 = @example51.h1
"""


class TestConfigParsing:
    def test_minimal_roundtrip_values(self):
        config = parse_config(MINIMAL)
        assert config.alpha == pytest.approx(2.0 / 3.0, rel=1e-15)
        assert config.tau_points == (1.0, 3.0)
        assert config.sigma_points == (2.0,)
        problem = config.build_problem()
        assert problem.partition.m == 1

    def test_expression_valued_functions(self):
        text = MINIMAL.replace("h = @example51.h\n", "h = tau/exp(tau^2)*sin(x)\n")
        config = parse_config(text)
        problem = config.build_problem()
        assert problem.h(1.0, math.pi / 2) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_numeric_values_are_expressions(self):
        text = MINIMAL + "\n[hypothesis]\nM_f = 1/2\nN_f = 1\nK_h = 3\nL_h = [4/gamma(4/3)]\n"
        config = parse_config(text)
        assert config.hyp_L_h[0] == pytest.approx(4.0 / math.gamma(4.0 / 3.0), rel=1e-15)

    @pytest.mark.parametrize(
        "mutation,match",
        [
            ("[bogus]\nkey = 1", "unknown section"),
            ("[solver]\nbogus_key = 1", "unknown key"),
            ("[solver]\ntheta = 1\ntheta = 2", "duplicate key"),
        ],
    )
    def test_unknown_keys_rejected(self, mutation, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(MINIMAL + "\n" + mutation)

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="missing required"):
            parse_config("schema_version = 1\n[problem]\nalpha = 0.5\n")

    def test_impulse_count_must_match(self):
        text = MINIMAL.replace("impulse_1 = @example51.h1", "")
        with pytest.raises(ConfigError, match="impulse_1"):
            parse_config(text)

    def test_invalid_partition_caught_at_parse(self):
        text = MINIMAL.replace("tau_points = [1, 3]", "tau_points = [2.5, 3]")
        with pytest.raises(Exception):
            parse_config(text)

    def test_theta_auto(self):
        config = parse_config(MINIMAL + "\n[solver]\ntheta = auto\n")
        assert config.theta is None


class TestRoundTrip:
    @pytest.mark.parametrize("name", sorted(BUILTIN_CONFIGS))
    def test_builtin_configs_roundtrip(self, name):
        config = BUILTIN_CONFIGS[name]()
        text = serialize_config(config)
        reparsed = parse_config(text)
        assert reparsed == config  # field-by-field dataclass equality
        assert serialize_config(reparsed) == text  # serialization is canonical

    def test_roundtrip_preserves_expression_sources(self):
        text = MINIMAL.replace("h = @example51.h\n", "h = tau/exp(tau^2)*sin(x)\n")
        config = parse_config(text)
        assert parse_config(serialize_config(config)).h_src == "tau/exp(tau^2)*sin(x)"


class TestCli:
    def test_solve_writes_artifacts_and_matches_analytic(self, tmp_path):
        cfg_path = tmp_path / "problem.cfg"
        cfg_path.write_text(serialize_config(sqrt_halforder_config()))
        out = tmp_path / "out"
        code = run(["solve", "--config", str(cfg_path), "--out", str(out), "--grid-density", "256"])
        assert code == 0
        trace = json.loads((out / "trace.json").read_text())
        assert trace["converged"] is True
        rows = (out / "solution.csv").read_text().strip().splitlines()
        assert rows[0] == "tau,value,segment_index,branch_tag"
        data = np.array([[float(v) for v in r.split(",")[:2]] for r in rows[1:]])
        exact = np.sqrt(data[:, 0]) / math.gamma(1.5)
        assert np.max(np.abs(data[:, 1] - exact)) <= 1e-4

    def test_analyze_worked_example(self, tmp_path):
        cfg_path = tmp_path / "problem.cfg"
        cfg_path.write_text(serialize_config(example51_config()))
        out = tmp_path / "out"
        code = run(["analyze", "--config", str(cfg_path), "--out", str(out)])
        assert code == 0
        payload = json.loads((out / "analysis.json").read_text())
        assert payload["contractive"] is True
        assert set(payload["variants"]) == {"standard", "coupled", "coupled-low", "weighted"}

    def test_analyze_deterministic_output(self, tmp_path):
        cfg_path = tmp_path / "problem.cfg"
        cfg_path.write_text(serialize_config(example51_config()))
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert run(["analyze", "--config", str(cfg_path), "--out", str(out)]) == 0
            outs.append((out / "analysis.json").read_bytes())
        assert outs[0] == outs[1]

    def test_bad_config_exits_2(self, tmp_path, capsys):
        cfg_path = tmp_path / "bad.cfg"
        cfg_path.write_text("[problem]\nalpha = banana(\n")
        assert run(["solve", "--config", str(cfg_path), "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_config_exits_2(self, tmp_path):
        assert run(["solve", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == 2

    def test_non_contractive_weight_exits_3(self, tmp_path):
        config = example51_config().with_overrides(theta=1.0)  # far below threshold
        cfg_path = tmp_path / "problem.cfg"
        cfg_path.write_text(serialize_config(config))
        out = tmp_path / "out"
        assert run(["analyze", "--config", str(cfg_path), "--out", str(out)]) == 3
        payload = json.loads((out / "analysis.json").read_text())
        assert payload["contractive"] is False

    def test_json_only_skips_csv(self, tmp_path):
        cfg_path = tmp_path / "problem.cfg"
        cfg_path.write_text(serialize_config(sqrt_halforder_config()))
        out = tmp_path / "out"
        code = run(
            ["solve", "--config", str(cfg_path), "--out", str(out), "--json-only", "--grid-density", "64"]
        )
        assert code == 0
        assert not (out / "solution.csv").exists()
        assert (out / "trace.json").exists()
