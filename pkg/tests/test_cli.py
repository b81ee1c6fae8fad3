"""End-to-end command-line tests.

The instance-level batteries run where the construction operates: the
per-coordinate blur 2(t+eps)sigma is 2.5e-4, small enough that labels
track the planted region and the projected law keeps its structure.
"""

import json
import math
import shutil

import numpy as np
import pytest
from click.testing import CliRunner

from lwemassart.cli import RunConfig, main, theorem_d_bindings
from lwemassart.instances import (
    read_labeled_file,
    read_sidecar,
    secret_digest,
    write_labeled_file,
)
from lwemassart.lwe import LweBatch

T = 0.2
EPS = 0.025
TINY_SIGMA = 2.5e-4 / (2.0 * (T + EPS))

BASE_ARGS = ["--n", "4", "--sigma", repr(TINY_SIGMA), "--t", str(T),
             "--eps", str(EPS), "--eta", "0.05"]


def invoke(args):
    return CliRunner().invoke(main, args, catch_exceptions=False)


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    """Shared instances: one alternative and one null, battery-sized."""
    root = tmp_path_factory.mktemp("cli")
    res = invoke(["gen-instance", *BASE_ARGS, "--m-prime", "40000",
                  "--seed", "11", "--out", str(root / "alt.inst")])
    assert res.exit_code == 0, res.output
    res = invoke(["gen-instance", *BASE_ARGS, "--tag", "null",
                  "--m-prime", "40000", "--seed", "12",
                  "--out", str(root / "null.inst")])
    assert res.exit_code == 0, res.output
    return root


class TestGenLwe:
    def test_writes_batch_and_sidecar(self, tmp_path):
        out = tmp_path / "b.lwe"
        res = invoke(["gen-lwe", "--kind", "continuous", "--tag", "null",
                      "--n", "4", "--m", "1000", "--sigma", "0.01",
                      "--seed", "9", "--out", str(out)])
        assert res.exit_code == 0, res.output
        batch = LweBatch.load(out)
        assert batch.m == 1000 and batch.n == 4 and batch.tag == "null"
        meta = read_sidecar(out)
        assert meta["seed"] == 9 and meta["secret"] is None

    def test_same_seed_byte_identical(self, tmp_path):
        args = ["gen-lwe", "--kind", "classic", "--tag", "alternative",
                "--n", "4", "--m", "500", "--q", "257", "--sigma", "2.0",
                "--seed", "5"]
        invoke(args + ["--out", str(tmp_path / "a")])
        invoke(args + ["--out", str(tmp_path / "b")])
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()

    def test_secret_digest_recorded(self, tmp_path):
        out = tmp_path / "c.lwe"
        invoke(["gen-lwe", "--kind", "classic", "--tag", "alternative",
                "--n", "6", "--m", "100", "--q", "97", "--sigma", "1.5",
                "--seed", "3", "--out", str(out)])
        batch = LweBatch.load(out)
        meta = read_sidecar(out)
        assert meta["secret_digest"] == secret_digest(batch.secret)
        assert np.array_equal(meta["secret"], batch.secret)

    def test_zero_m_is_usage_error(self, tmp_path):
        res = invoke(["gen-lwe", "--n", "4", "--m", "0", "--sigma", "0.01",
                      "--out", str(tmp_path / "z")])
        assert res.exit_code == 2


class TestReduceLwe:
    def test_chain_lands_on_unit_torus(self, tmp_path):
        src = tmp_path / "cls.lwe"
        invoke(["gen-lwe", "--kind", "classic", "--tag", "alternative",
                "--n", "4", "--m", "2000", "--q", "257", "--sigma", "2.0",
                "--seed", "5", "--out", str(src)])
        dst = tmp_path / "torus.lwe"
        res = invoke(["reduce-lwe", str(src), "--seed", "5", "--out", str(dst)])
        assert res.exit_code == 0, res.output
        reduced = LweBatch.load(dst)
        assert reduced.domain == "unit_torus"
        assert reduced.x.max() < 1.0 and reduced.x.min() >= 0.0
        source = LweBatch.load(src)
        assert np.array_equal(reduced.secret, source.secret)
        assert len(read_sidecar(dst)["history"]) == 3

    def test_torus_input_is_usage_error(self, tmp_path):
        src = tmp_path / "t.lwe"
        invoke(["gen-lwe", "--kind", "continuous", "--tag", "null", "--n", "4",
                "--m", "100", "--sigma", "0.01", "--out", str(src)])
        res = invoke(["reduce-lwe", str(src), "--out", str(tmp_path / "o")])
        assert res.exit_code == 2
        assert "unit torus" in res.output


class TestGenInstance:
    def test_records_and_consumption(self, tmp_path):
        out = tmp_path / "i.inst"
        res = invoke(["gen-instance", *BASE_ARGS, "--m-prime", "400",
                      "--seed", "2", "--out", str(out)])
        assert res.exit_code == 0, res.output
        x, labels, header = read_labeled_file(out)
        assert x.shape == (400, 4) and header["m_prime"] == 400
        assert set(np.unique(labels)) <= {-1, 1}
        meta = read_sidecar(out)
        assert meta["consumed"] >= 400
        assert meta["secret_digest"] == secret_digest(np.asarray(meta["secret"], float))

    def test_exhausted_stream_exits_3(self, tmp_path):
        res = CliRunner().invoke(
            main, ["gen-instance", *BASE_ARGS, "--m-prime", "2000",
                   "--m", "4000", "--seed", "11", "--out", str(tmp_path / "x")])
        assert res.exit_code == 3
        assert "stream exhausted" in res.output
        assert "4000" in res.output  # the consumed count is reported

    def test_lifted_record_width(self, tmp_path):
        out = tmp_path / "l.inst"
        res = invoke(["gen-instance", "--n", "3", "--sigma", repr(TINY_SIGMA),
                      "--m-prime", "50", "--d", "2", "--lifted", "--seed", "4",
                      "--out", str(out)])
        assert res.exit_code == 0, res.output
        x, _, header = read_labeled_file(out)
        assert header["lifted"] and header["d"] == 2
        assert x.shape[1] == math.comb(3 + 2, 2)
        assert np.allclose(x[:, 0], 1.0)

    def test_batch_file_input(self, tmp_path):
        src = tmp_path / "s.lwe"
        invoke(["gen-lwe", "--kind", "continuous", "--tag", "alternative",
                "--n", "4", "--m", "30000", "--sigma", repr(TINY_SIGMA),
                "--seed", "8", "--out", str(src)])
        out = tmp_path / "i.inst"
        res = invoke(["gen-instance", "--batch", str(src), *BASE_ARGS,
                      "--m-prime", "1000", "--seed", "8", "--out", str(out)])
        assert res.exit_code == 0, res.output
        assert read_sidecar(out)["secret"] == read_sidecar(src)["secret"]


class TestVerify:
    def test_alternative_all_pass(self, work, tmp_path):
        report = tmp_path / "r.json"
        hist = tmp_path / "h.csv"
        res = invoke(["verify", str(work / "alt.inst"), "--bins", "32",
                      "--seed", "77", "--report", str(report),
                      "--hist", str(hist)])
        assert res.exit_code == 0, res.output
        entries = json.loads(report.read_text())
        names = {e["test"] for e in entries}
        assert names == {"hidden-direction-l1", "orthogonal-gaussianity",
                         "massart-violating-mass", "ptf-disagreement"}
        assert all(e["pass"] for e in entries)
        assert all(e["seed"] == 77 for e in entries)
        rows = hist.read_text().splitlines()
        assert rows[0] == "lo,hi,empirical,model"
        assert len(rows) >= 30

    def test_null_all_pass(self, work):
        res = invoke(["verify", str(work / "null.inst"), "--bins", "32"])
        assert res.exit_code == 0, res.output
        assert "FAIL" not in res.output
        for name in ("isotropic-gaussianity", "hidden-direction-l1",
                     "label-balance", "planted-null-error"):
            assert f"PASS {name}" in res.output

    def test_flipped_labels_fail(self, work, tmp_path):
        x, labels, header = read_labeled_file(work / "alt.inst")
        meta = read_sidecar(work / "alt.inst")
        bad = tmp_path / "flipped.inst"
        write_labeled_file(bad, x, -labels, d=header["d"],
                           lifted=header["lifted"], sidecar=meta)
        res = CliRunner().invoke(main, ["verify", str(bad), "--bins", "32"])
        assert res.exit_code == 4
        assert "FAIL ptf-disagreement" in res.output
        assert "FAIL massart-violating-mass" in res.output

    def test_wrong_secret_fails(self, work, tmp_path):
        bad = tmp_path / "wrong.inst"
        shutil.copyfile(work / "alt.inst", bad)
        meta = dict(read_sidecar(work / "alt.inst"))
        meta["secret"] = [-meta["secret"][0]] + meta["secret"][1:]
        from lwemassart.instances import write_sidecar

        write_sidecar(bad, meta)
        res = CliRunner().invoke(main, ["verify", str(bad), "--bins", "32"])
        assert res.exit_code == 4
        assert "FAIL hidden-direction-l1" in res.output

    def test_missing_sidecar_is_usage_error(self, work, tmp_path):
        orphan = tmp_path / "orphan.inst"
        shutil.copyfile(work / "alt.inst", orphan)
        res = CliRunner().invoke(main, ["verify", str(orphan)])
        assert res.exit_code == 2
        assert "sidecar" in res.output

    def test_garbage_file_is_usage_error(self, tmp_path):
        junk = tmp_path / "junk.inst"
        junk.write_bytes(b"not a labeled file at all")
        res = CliRunner().invoke(main, ["verify", str(junk)])
        assert res.exit_code == 2


class TestDistinguish:
    def test_planted_learner_separates(self, tmp_path):
        report = tmp_path / "d.json"
        res = invoke(["distinguish", *BASE_ARGS, "--m-prime", "300",
                      "--trials", "6", "--learner", "planted", "--seed", "3",
                      "--report", str(report)])
        assert res.exit_code == 0, res.output
        payload = json.loads(report.read_text())
        assert payload["advantage"] == 1.0
        assert payload["warning"].startswith("underpowered")
        assert payload["advantage_2se"] == pytest.approx(
            2.0 * math.sqrt(0.5 / 6.0))

    def test_constant_learner_gated(self):
        res = CliRunner().invoke(
            main, ["distinguish", *BASE_ARGS, "--m-prime", "200",
                   "--trials", "4", "--learner", "constant", "--seed", "3",
                   "--min-advantage", "0.5"])
        assert res.exit_code == 4
        assert json.loads(res.output.splitlines()[-1])["advantage"] == 0.0


class TestConfig:
    def test_roundtrip_is_lossless(self, tmp_path):
        cfg = RunConfig(n=6, sigma=1e-3, t=0.1, eps=0.0125, m_prime=123,
                        seed=42, learner="sgd")
        path = tmp_path / "cfg.json"
        cfg.save(path)
        assert RunConfig.load(path) == cfg

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 4, "nope": 1}')
        with pytest.raises(ValueError, match="nope"):
            RunConfig.load(path)
        res = CliRunner().invoke(
            main, ["gen-instance", "--config", str(path),
                   "--out", str(tmp_path / "x")])
        assert res.exit_code == 2

    def test_flags_override_config(self, tmp_path):
        cfg = RunConfig(n=4, sigma=TINY_SIGMA, m_prime=300, seed=6)
        path = tmp_path / "cfg.json"
        cfg.save(path)
        out = tmp_path / "i.inst"
        res = invoke(["gen-instance", "--config", str(path),
                      "--m-prime", "150", "--out", str(out)])
        assert res.exit_code == 0, res.output
        x, _, header = read_labeled_file(out)
        assert header["m_prime"] == 150 and len(x) == 150
        assert read_sidecar(out)["seed"] == 6


class TestPreset:
    def test_list_names(self):
        res = invoke(["preset", "list"])
        assert "desk-scale" in res.output and "theorem-d" in res.output

    def test_theorem_d_bindings(self, tmp_path):
        out = tmp_path / "thm.json"
        res = invoke(["preset", "apply", "theorem-d", "--n", "16",
                      "--out", str(out)])
        assert res.exit_code == 0, res.output
        cfg = RunConfig.load(out)
        t = 16.0 ** -0.6
        ratio = 2 * round(t / 16.0**-1.5 / 2.0)
        assert cfg.t == pytest.approx(t)
        assert cfg.t / cfg.eps == pytest.approx(ratio)
        assert cfg.eta == pytest.approx(1.0 / 3.0)
        assert cfg.sigma == pytest.approx(16.0**-5.0)
        assert cfg.d == 4 * ratio
        assert cfg.m == 2 * ratio * cfg.m_prime
        assert "(i) t/eps large even integer: ok" in res.output
        # clause (iii) genuinely fails this far below the asymptotic regime
        assert "(iii)" in res.output and "VIOLATED" in res.output

    def test_bindings_scale_with_n(self):
        a, b = theorem_d_bindings(16), theorem_d_bindings(64)
        assert b.t < a.t and b.eps < a.eps and b.sigma < a.sigma
        assert b.d > a.d

    def test_desk_scale_config(self, tmp_path):
        out = tmp_path / "desk.json"
        res = invoke(["preset", "apply", "desk-scale", "--out", str(out)])
        assert res.exit_code == 0, res.output
        cfg = RunConfig.load(out)
        assert cfg.t == 0.2 and cfg.t / cfg.eps == 8.0
