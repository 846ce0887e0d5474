import json
import math

import numpy as np
import pytest
from oracles import shannon

from scrambling_eur.cli import main
from scrambling_eur.experiments import (
    ConfigError,
    ExperimentConfig,
    check_random_instances,
    config_from_dict,
    emit,
    fig4_config,
    load_config,
    reference_config,
    run_kfold_demo,
    run_qubit_weakvalue_demo,
    run_sweep,
    summarize,
)
from scrambling_eur.experiments.output import CSV_COLUMNS, metadata_path, read_csv
from scrambling_eur.experiments.sweep import SweepContext, estimate_t_star

SMALL_TOML = """
bound_methods = ["taylor", "exact_trace", "exact_c"]
alphas = [1.0, 2.0, "inf"]

[model]
n_sites = 3
range = 2

[detector]
delta = 1.0
precision = 0.5
x0 = 1.0
coupling = 0.05
n_cells = 11

[sweep]
t_min = 0.0
t_max = 2.0
n_steps = 3
"""


def small_config(**over):
    cfg = config_from_dict(
        {
            "model": {"n_sites": 3, "range": 2},
            "detector": {"delta": 1.0, "precision": 0.5, "x0": 1.0, "coupling": 0.05, "n_cells": 11},
            "sweep": {"t_min": 0.0, "t_max": 2.0, "n_steps": 3},
            "bound_methods": ["taylor", "exact_trace", "exact_c"],
        }
    )
    return cfg.replace(**over) if over else cfg


class TestConfig:
    def test_load(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text(SMALL_TOML)
        cfg = load_config(path)
        assert cfg.model.n_sites == 3
        assert cfg.alphas == (1.0, 2.0, math.inf)
        assert cfg.sweep.times() == [0.0, 1.0, 2.0]

    @pytest.mark.parametrize(
        "data",
        [
            {"model": {"n_site": 3}},
            {"modle": {}},
            {"protocol": {"state": "thermal"}},
            {"sweep": {"t_min": 2, "t_max": 1}},
            {"bound_methods": ["bogus"]},
            {"alphas": [0.4]},
            {"output": {"format": "xml"}},
            {"model": 3},
        ],
    )
    def test_rejects(self, data):
        with pytest.raises(ConfigError):
            config_from_dict(data)

    def test_bad_toml(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[model\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_reference_defaults(self):
        cfg = reference_config()
        assert (cfg.model.n_sites, cfg.model.range, cfg.model.power) == (8, 5, 6.0)
        assert (cfg.detector.delta, cfg.detector.precision, cfg.detector.x0, cfg.detector.coupling) == (0.1, 0.1, 10.0, 0.02)
        assert (cfg.protocol.v1, cfg.protocol.v2, cfg.protocol.beta) == (1, -1, 1.0)
        assert fig4_config().detector.coupling == 0.16
        assert fig4_config().protocol.fine_grained

    def test_replace_and_dict(self):
        cfg = reference_config(sweep={"n_steps": 5})
        assert cfg.sweep.n_steps == 5
        d = cfg.to_dict()
        assert d["alphas"] == [1.0, "inf"]
        json.dumps(d)
        assert isinstance(ExperimentConfig().replace(bound_methods=("taylor",)).bound_methods, tuple)


@pytest.fixture(scope="module")
def records():
    return run_sweep(small_config())


class TestSweep:
    def test_records(self, records):
        assert [r.t for r in records] == [0.0, 1.0, 2.0]
        assert all(r.satisfied() for r in records)
        assert records[0].otoc_re == pytest.approx(1)
        for r in records:
            assert r.bound_exact_c >= r.bound_exact_trace - 1e-9
            assert r.coupling_terms == pytest.approx(r.bound_taylor - r.term_c0, abs=1e-12)
            assert set(r.lhs_alpha) == {1.0, math.inf}

    def test_emit_csv(self, records, tmp_path):
        path = emit(records, "csv", tmp_path / "out.csv", metadata={"x": 1})
        lines = path.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0] == ",".join(CSV_COLUMNS)
        rows = read_csv(path)
        assert [r["t"] for r in rows] == [0.0, 1.0, 2.0]
        assert rows[1]["lhs_vn"] == records[1].lhs_vn
        meta = json.loads(metadata_path(path).read_text())
        assert meta["n_records"] == 3 and "created" in meta and meta["x"] == 1

    def test_emit_json(self, records, tmp_path):
        path = emit(records, "json", tmp_path / "out.json")
        data = json.loads(path.read_text())
        assert len(data) == 3 and data[2]["t"] == 2.0

    def test_reproducible(self, records, tmp_path):
        a = emit(records, "csv", tmp_path / "a.csv", reproducible=True)
        b = emit(records, "csv", tmp_path / "b.csv", reproducible=True)
        assert a.read_bytes() == b.read_bytes()
        assert metadata_path(a).read_bytes() == metadata_path(b).read_bytes()
        assert "created" not in json.loads(metadata_path(a).read_text())

    def test_emit_validation(self, records, tmp_path):
        with pytest.raises(ValueError):
            emit([], "csv", tmp_path / "x.csv")
        with pytest.raises(ValueError):
            emit(records, "xml", tmp_path / "x.xml")

    def test_context_metadata(self, chain):
        ctx = SweepContext(reference_config())
        meta = ctx.metadata()
        assert meta["nontrivial"] is True
        assert meta["grid"]["n_cells"] == 1011

    def test_trivial_detector_warns(self):
        assert SweepContext(small_config()).nontrivial
        with pytest.warns(UserWarning):
            ctx = SweepContext(small_config(detector={"delta": 2.0, "precision": 1.0}))
        assert not ctx.nontrivial and ctx.metadata()["warnings"]

    def test_basis_and_mixed_states(self):
        for state in ("maximally_mixed", "basis", "w_eigenstate"):
            cfg = small_config(protocol={"state": state}, sweep={"n_steps": 1})
            assert run_sweep(cfg)[0].satisfied()

    def test_weak_limit_sweep_point(self):
        cfg = small_config(detector={"coupling": 0.0}, sweep={"t_min": 1.5, "t_max": 1.5, "n_steps": 1})
        ctx = SweepContext(cfg)
        rec = run_sweep(cfg, ctx)[0]
        wt = ctx.wt_projectors(1.5)
        occ = [np.trace(wt.projector(k) @ ctx.rho.matrix).real for k in range(2)]
        assert rec.lhs_vn == pytest.approx(2 * (shannon(occ) + shannon(ctx.grid.probs)), abs=1e-10)
        assert rec.bound_exact_trace == pytest.approx(-math.log2(ctx.grid.probs.max() ** 2 * 4), abs=1e-10)


class TestTStar:
    def test_interpolates(self):
        assert estimate_t_star([0, 1, 2], [1.0, 0.6, 0.2]) == pytest.approx(1.25)

    def test_never_and_immediate(self):
        assert math.isnan(estimate_t_star([0, 1], [1.0, 0.9]))
        assert estimate_t_star([0, 1], [0.1, 0.9]) == 0


class TestDemos:
    def test_qubit_demo(self):
        rec = run_qubit_weakvalue_demo(0.02)
        assert rec.lhs_minmax == pytest.approx(2, abs=1e-3)
        assert rec.f_weak == pytest.approx(2 - 0.04 / math.log(2), abs=1e-3)
        assert rec.satisfied
        for (z, x), v in rec.weak_values.items():
            assert v == pytest.approx(x * z * 1j)

    def test_qubit_demo_strong_limit(self):
        rec = run_qubit_weakvalue_demo(0.0)
        assert rec.lhs_minmax == pytest.approx(2, abs=1e-12)
        assert rec.f_weak == pytest.approx(2, abs=1e-12)

    def test_kfold_demo(self):
        out = run_kfold_demo(k=3)
        assert out["identity_error"] < 1e-10
        assert out["normalization"] == pytest.approx(1, abs=1e-10)
        assert out["bound"].metadata["k_fold"] == 3

    def test_random_checks(self):
        s = summarize(check_random_instances(10, seed=3))
        assert s["instances"] == 10 and s["theorem_failures"] == 0 and s["chain_failures"] == 0


class TestCLI:
    def test_qubit_demo(self, capsys):
        assert main(["qubit-demo"]) == 0
        assert "f_weak" in capsys.readouterr().out

    def test_kfold_demo(self, capsys):
        assert main(["kfold-demo", "--k", "2"]) == 0
        assert "coarse-grained" in capsys.readouterr().out

    def test_check_theorem(self, capsys):
        assert main(["check-theorem", "--random", "5", "--seed", "2"]) == 0
        assert "0 theorem failures" in capsys.readouterr().out

    def test_sweep(self, tmp_path, capsys):
        cfg = tmp_path / "c.toml"
        cfg.write_text(SMALL_TOML)
        out = tmp_path / "s.csv"
        code = main(["sweep", str(cfg), "-o", str(out), "--n-steps", "2", "--reproducible"])
        assert code == 0
        assert len(out.read_text().splitlines()) == 3
        meta = json.loads(metadata_path(out).read_text())
        assert meta["config"]["sweep"]["n_steps"] == 2

    def test_sweep_json(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text(SMALL_TOML)
        out = tmp_path / "s.json"
        assert main(["sweep", str(cfg), "-o", str(out), "--n-steps", "1"]) == 0
        assert len(json.loads(out.read_text())) == 1

    def test_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "c.toml"
        cfg.write_text("[model]\nn_site = 3\n")
        assert main(["sweep", str(cfg)]) == 2
        assert "config error" in capsys.readouterr().err
