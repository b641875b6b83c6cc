from __future__ import annotations

import copy
import json
from importlib import resources

import pytest

from netloop.cli import main
from netloop.config import load_config, parse_config
from netloop.errors import ConfigurationError

STABLE = {
    "A": [[0.7]], "B": [[1.0]],
    "Q1": [[1.0]], "Q2": [[1.0]], "R": [[1.0]],
    "sigma_w": [[1.0]], "alpha": 1, "beta": 1,
}
UNSTABLE = dict(STABLE, A=[[1.1]])

TINY = {
    "horizon": 3,
    "replications": 20,
    "seed": 7,
    "regimes": ["AwareImpassive", "AwareReactive", "AgnosticImpassive",
                "AgnosticReactive", "DelayInsensitive"],
    "network": {"D": 1, "prices": [5.0, 2.0], "capacities": [1, 2]},
    "subsystems": [UNSTABLE, STABLE],
    "solver": {"timeLimitSeconds": 30, "exactThreshold": 600},
    "outputs": {"dir": "artifacts", "emitSvg": False,
                "traceReplications": 2},
}


def doc(**overrides):
    d = copy.deepcopy(TINY)
    d.update(overrides)
    return d


def write_config(tmp_path, d, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return str(path)


class TestParseConfig:
    def test_round_trip_with_defaults(self):
        cfg = parse_config(doc(solver={}, outputs={}))
        assert cfg.horizon == 3 and cfg.n_loops == 2
        assert cfg.weights == (0.5, 0.5)
        assert cfg.solver.time_limit is None
        assert cfg.solver.exact_threshold == 600
        assert cfg.max_reported_gap is None
        assert str(cfg.outputs.directory) == "out"
        assert cfg.outputs.trace_replications == 10
        assert not cfg.outputs.emit_svg

    def test_repeat_expands_and_numbers_loops(self):
        d = doc(subsystems=[dict(UNSTABLE, repeat=3), dict(STABLE, repeat=2)])
        cfg = parse_config(d)
        assert cfg.n_loops == 5
        assert [m.index for m in cfg.models] == [0, 1, 2, 3, 4]
        assert cfg.models[0].signature() == cfg.models[2].signature()
        assert cfg.models[0].signature() != cfg.models[3].signature()

    def test_initial_spread_defaults_to_disturbance(self):
        cfg = parse_config(doc())
        assert (cfg.models[0].sigma_x0 == cfg.models[0].sigma_w).all()
        assert (cfg.models[0].mean_x0 == 0).all()

    @pytest.mark.parametrize("mutate, fragment", [
        (lambda d: d.pop("horizon"), "horizon"),
        (lambda d: d.update(horizon=0), "horizon"),
        (lambda d: d.update(replications=0), "replications"),
        (lambda d: d.update(regimes=[]), "regimes"),
        (lambda d: d.update(regimes=["AwareImpassive", "Oracle"]), "unknown"),
        (lambda d: d.update(regimes=["AwareImpassive", "AwareImpassive"]),
         "duplicates"),
        (lambda d: d.update(weights=[1.0]), "weights"),
        (lambda d: d.update(weights=[0.9, 0.2]), "sum to 1"),
        (lambda d: d.update(weights=[1.2, -0.2]), "positive"),
        (lambda d: d["solver"].update(reactiveClosure="pessimistic"),
         "optimistic"),
        (lambda d: d["solver"].update(maxReportedGap=-0.1), "maxReportedGap"),
        (lambda d: d["outputs"].update(traceReplications=-1),
         "traceReplications"),
        (lambda d: d["network"].update(prices=[2.0, 5.0]), "config.network"),
        (lambda d: d.update(subsystems=[]), "subsystems"),
        (lambda d: d["subsystems"][0].update(A=[[1.0, 0.0]]),
         r"config\.subsystems\[0\]"),
    ])
    def test_rejections_name_the_offending_path(self, mutate, fragment):
        d = doc()
        mutate(d)
        with pytest.raises(ConfigurationError, match=fragment):
            parse_config(d)

    def test_load_config_reports_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError, match="invalid JSON"):
            load_config(path)

    def test_load_config_reports_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read"):
            load_config(tmp_path / "nope.json")


class TestBundledConfigs:
    @pytest.mark.parametrize("name, loops, horizon", [
        ("desk_scale.json", 6, 10),
        ("paper_scale.json", 20, 20),
    ])
    def test_ship_in_valid_shape(self, name, loops, horizon):
        ref = resources.files("netloop.configs") / name
        cfg = parse_config(json.loads(ref.read_text()))
        assert cfg.n_loops == loops and cfg.horizon == horizon
        assert len(cfg.regimes) == 5
        # bundled configs must not point outside the caller's working dir
        assert not cfg.outputs.directory.is_absolute()


class TestCliRun:
    def test_tiny_experiment_round_trip(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        d = doc()
        d["outputs"]["emitSvg"] = True
        code = main(["run", write_config(tmp_path, d)])
        out = capsys.readouterr().out
        assert code == 0
        for regime in TINY["regimes"]:
            assert regime in out
        art = tmp_path / "artifacts"
        for stem in ("trace", "metrics", "utilization", "deviation"):
            assert (art / f"{stem}.csv").is_file()
        assert list(art.glob("*.svg")), "emitSvg should render charts"

    def test_missing_config_exits_3(self, tmp_path, capsys):
        code = main(["run", str(tmp_path / "absent.json")])
        assert code == 3
        assert "configuration error" in capsys.readouterr().err

    def test_infeasible_windows_exit_2(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        rigid = dict(UNSTABLE, alpha=0, beta=0)
        d = doc(subsystems=[rigid, rigid, rigid])
        d["network"] = {"D": 1, "prices": [5.0, 2.0], "capacities": [1, 1]}
        code = main(["run", write_config(tmp_path, d)])
        assert code == 2
        err = capsys.readouterr().err
        assert "allocation infeasible" in err and "step 0" in err

    def test_uncertified_gap_above_ceiling_exits_4(self, tmp_path,
                                                   monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        # two loops contending for a single slot per link: the fallback's
        # capacity-free bound is strictly below any feasible objective, so
        # its reported gap is positive and trips a zero ceiling
        d = doc(regimes=["AwareImpassive"],
                subsystems=[UNSTABLE, dict(UNSTABLE, A=[[1.15]])])
        d["network"] = {"D": 1, "prices": [5.0, 2.0], "capacities": [1, 1]}
        d["solver"] = {"exactThreshold": 0, "maxReportedGap": 0.0}
        code = main(["run", write_config(tmp_path, d)])
        assert code == 4
        assert "warning:" in capsys.readouterr().err

    def test_no_ceiling_means_report_only(self, tmp_path, monkeypatch,
                                          capsys):
        monkeypatch.chdir(tmp_path)
        d = doc(regimes=["AwareImpassive"])
        d["solver"] = {"exactThreshold": 0}
        code = main(["run", write_config(tmp_path, d)])
        assert code == 0
        assert "heuristic" in capsys.readouterr().out


class TestCliOther:
    def test_feasibility_prints_per_link_bounds(self, tmp_path, capsys):
        code = main(["feasibility", write_config(tmp_path, doc())])
        out = capsys.readouterr().out
        assert code == 0
        assert "sufficient" in out
        assert len([ln for ln in out.splitlines() if ln.strip()]) >= 3

    def test_verify_reports_programs_checked(self, capsys):
        code = main(["verify"])
        out = capsys.readouterr().out
        assert code == 0
        assert "all agree" in out

    def test_plot_rerenders_csv_artifacts(self, tmp_path, monkeypatch,
                                          capsys):
        monkeypatch.chdir(tmp_path)
        assert main(["run", write_config(tmp_path, doc())]) == 0
        capsys.readouterr()
        art = tmp_path / "artifacts"
        csvs = [str(art / f"{s}.csv")
                for s in ("metrics", "utilization", "deviation")]
        code = main(["plot", *csvs, "--out", str(tmp_path / "charts")])
        out = capsys.readouterr().out
        assert code == 0
        rendered = list((tmp_path / "charts").glob("*.svg"))
        assert len(rendered) == 3
        for path in rendered:
            assert str(path) in out

    def test_plot_rejects_unknown_csv(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        assert main(["run", write_config(tmp_path, doc())]) == 0
        capsys.readouterr()
        code = main(["plot", str(tmp_path / "artifacts" / "trace.csv")])
        assert code == 3
        assert "unrecognized" in capsys.readouterr().err
