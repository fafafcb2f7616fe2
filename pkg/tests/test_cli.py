import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ctident import CtModel, c2d_zoh, load_dataset, model_to_dict
from ctident.cli import main

G2 = CtModel([3.0], [1.0, 2.8, 4.0], r=2)


@pytest.fixture()
def sim_config(tmp_path):
    cfg = {
        "system": model_to_dict(G2),
        "input": {"type": "white", "variance": 1.0},
        "noise": {"snr_db": 20.0},
        "h": 0.1,
        "N": 400,
        "seed": 31,
    }
    path = tmp_path / "sim.json"
    path.write_text(json.dumps(cfg))
    return path


class TestSimulate:
    def test_writes_dataset(self, sim_config, tmp_path):
        out = tmp_path / "data"
        rc = main(["simulate", "--config", str(sim_config), "--out", str(out)])
        assert rc == 0
        data, meta = load_dataset(out / "dataset.csv")
        assert data.N == 400
        assert data.h == 0.1
        assert meta["seed"] == 31
        assert meta["sigma"] > 0
        assert_allclose(meta["system"]["den"], [1.0, 2.8, 4.0])

    def test_seed_override_changes_data(self, sim_config, tmp_path):
        main(["simulate", "--config", str(sim_config), "--out", str(tmp_path / "a")])
        main(["simulate", "--config", str(sim_config), "--out", str(tmp_path / "b"),
              "--seed", "32"])
        main(["simulate", "--config", str(sim_config), "--out", str(tmp_path / "c"),
              "--seed", "31"])
        a = (tmp_path / "a" / "dataset.csv").read_text()
        b = (tmp_path / "b" / "dataset.csv").read_text()
        c = (tmp_path / "c" / "dataset.csv").read_text()
        assert a != b
        assert a == c

    def test_discrete_system_rejected(self, tmp_path):
        cfg = {
            "system": {"num": [0.5], "den": [1.0, -0.5], "h": 0.1},
            "input": {"type": "white"},
            "noise": {"sigma": 0.1},
            "h": 0.1,
            "N": 100,
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(cfg))
        rc = main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")])
        assert rc == 1

    def test_missing_config(self, tmp_path):
        rc = main(["simulate", "--config", str(tmp_path / "none.json"),
                   "--out", str(tmp_path / "o")])
        assert rc == 1


class TestFitProjectChain:
    def test_end_to_end(self, sim_config, tmp_path):
        data_dir = tmp_path / "data"
        assert main(["simulate", "--config", str(sim_config),
                     "--out", str(data_dir)]) == 0

        fit_path = tmp_path / "fit.json"
        rc = main(["fit", "--data", str(data_dir / "dataset.csv"),
                   "--order", "2", "--out", str(fit_path)])
        assert rc == 0
        rep = json.loads(fit_path.read_text())
        assert rep["converged"] is True
        assert rep["h"] == 0.1
        dt_truth = c2d_zoh(G2, 0.1)
        assert_allclose(rep["theta_d"], dt_truth.theta, atol=0.02)

        proj_path = tmp_path / "proj.json"
        rc = main(["project", "--report", str(fit_path), "--r", "2",
                   "--out", str(proj_path)])
        assert rc == 0
        out = json.loads(proj_path.read_text())
        assert out["r"] == 2
        theta = np.asarray(out["theta_tilde_c"])
        assert theta[0] == 0.0
        assert_allclose(theta, G2.theta, rtol=0.1, atol=0.05)
        assert "theta_hat_c" in out["diagnostics"]
        cov = np.asarray(out["cov_tilde"])
        assert cov.shape == (4, 4)
        assert np.all(cov[0, :] == 0.0)

    def test_fit_missing_data(self, tmp_path):
        rc = main(["fit", "--data", str(tmp_path / "no.csv"), "--order", "2"])
        assert rc == 1


class TestMonteCarloCommand:
    def test_study_outputs(self, tmp_path):
        cfg = {
            "system": model_to_dict(G2),
            "input": {"type": "white", "variance": 1.0},
            "noise": {"snr_db": 10.0},
            "h": 0.1,
            "N": 300,
            "M": 3,
            "r": 2,
            "seed": 11,
        }
        path = tmp_path / "mc.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / "study"
        rc = main(["montecarlo", "--config", str(path), "--out", str(out)])
        assert rc == 0
        report = json.loads((out / "report.json").read_text())
        assert report["seed"] == 11
        assert len(report["records"]) == 6
        assert (out / "runs.csv").exists() and (out / "aggregate.csv").exists()

        # overriding the seed changes the stored config
        rc = main(["montecarlo", "--config", str(path), "--out", str(out),
                   "--seed", "12"])
        assert rc == 0
        assert json.loads((out / "report.json").read_text())["seed"] == 12

    def test_exit_code_two_when_nothing_survives(self, tmp_path, rao_garnier):
        cfg = {
            "system": model_to_dict(rao_garnier),
            "input": {"type": "white", "variance": 1.0},
            "noise": {"snr_db": -20.0},
            "h": 0.1,
            "N": 80,
            "M": 4,
            "r": 3,
            "seed": 20260816,
        }
        path = tmp_path / "doomed.json"
        path.write_text(json.dumps(cfg))
        rc = main(["montecarlo", "--config", str(path), "--out", str(tmp_path / "o")])
        assert rc == 2


class TestBode:
    def test_table_values(self, tmp_path):
        model_path = tmp_path / "model.json"
        model_path.write_text(json.dumps(model_to_dict(G2)))
        out = tmp_path / "bode.csv"
        rc = main(["bode", "--model", str(model_path), "--wmin", "2.0",
                   "--wmax", "2.0", "--points", "1", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "omega,mag_db,phase_deg"
        w, mag_db, phase = (float(x) for x in lines[1].split(","))
        assert w == 2.0
        # G(2j) = 3 / (5.6 j): magnitude 3/5.6, phase -90 degrees
        assert_allclose(mag_db, 20 * np.log10(3.0 / 5.6), rtol=1e-10)
        assert_allclose(phase, -90.0, rtol=1e-10)

    def test_grid_size(self, tmp_path):
        model_path = tmp_path / "model.json"
        model_path.write_text(json.dumps(model_to_dict(G2)))
        out = tmp_path / "bode.csv"
        rc = main(["bode", "--model", str(model_path), "--points", "17",
                   "--out", str(out)])
        assert rc == 0
        assert len(out.read_text().splitlines()) == 18
