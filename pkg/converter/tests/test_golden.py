import numpy as np
import pytest
import torch

from dccrn_convert import cli, convert, dcw, golden, reference

from test_convert import small_config


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory):
    p = tmp_path_factory.mktemp("ck") / "ref.pt"
    reference.make_synthetic_checkpoint(p, small_config(), seed=1)
    return p


class TestProbe:
    def test_deterministic(self):
        a = golden.make_probe(16000)
        b = golden.make_probe(16000)
        assert np.array_equal(a, b)
        assert len(a) == 16000

    def test_seed_changes_probe(self):
        a = golden.make_probe(16000)
        b = golden.make_probe(16000, seed=1)
        assert not np.array_equal(a, b)


class TestExportGolden:
    def test_two_exports_bit_identical(self, checkpoint, tmp_path):
        p1, p2 = tmp_path / "a.dcg", tmp_path / "b.dcg"
        golden.export_golden(checkpoint, p1)
        golden.export_golden(checkpoint, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_manifest_contents(self, checkpoint, tmp_path):
        p = tmp_path / "g.dcg"
        golden.export_golden(checkpoint, p)
        manifest, tensors = golden.read_golden(p)
        assert manifest["tolerance"] == 1e-4
        assert manifest["config_sha256"] == dcw.config_hash(small_config())
        expected = {"probe", "input", "dense", "output"}
        expected |= {f"encoder.{i}" for i in range(6)}
        expected |= {f"decoder.{i}" for i in range(6)}
        assert set(tensors) == expected
        for name, arr in tensors.items():
            assert np.all(np.isfinite(arr)), name

    def test_corrupt_golden_detected(self, checkpoint, tmp_path):
        p = tmp_path / "g.dcg"
        golden.export_golden(checkpoint, p)
        data = bytearray(p.read_bytes())
        data[-3] ^= 0xFF
        p.write_bytes(bytes(data))
        with pytest.raises(golden.GoldenError, match="checksum"):
            golden.read_golden(p)

    def test_parity_with_engine(self, checkpoint, tmp_path):
        pytest.importorskip("dccrn_stream")
        from dccrn_stream import framing as F
        from dccrn_stream import model as M
        from dccrn_stream import weights as W

        dcw_path = tmp_path / "m.dcw"
        convert.convert_checkpoint(checkpoint, dcw_path, audit=lambda s: None)
        g_path = tmp_path / "g.dcg"
        golden.export_golden(checkpoint, g_path)
        manifest, tensors = golden.read_golden(g_path)
        cfg, store = W.load_weights(dcw_path)
        assert manifest["config_sha256"] == dcw.config_hash(cfg.to_dict())
        model = M.build_model(cfg, store)
        spec = F.stft(tensors["probe"].astype(np.float64), cfg.frame)
        trace = {}
        model.forward_sequence(spec, trace=trace)
        for name, ref in tensors.items():
            if name == "probe":
                continue
            if name == "output":
                got = np.stack([trace[name].real, trace[name].imag])
            else:
                got = np.stack([trace[name].real, trace[name].imag])
            err = np.max(np.abs(got - ref)) / max(np.max(np.abs(ref)), 1e-12)
            assert err <= manifest["tolerance"], (name, err)


class TestCli:
    def test_full_pipeline(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        import json
        cfg_path.write_text(json.dumps(small_config()))
        ck = tmp_path / "ref.pt"
        assert cli.main(["make-checkpoint", "--out", str(ck),
                         "--config", str(cfg_path), "--seed", "3"]) == 0
        out = tmp_path / "m.dcw"
        assert cli.main(["convert", "--checkpoint", str(ck),
                         "--out", str(out)]) == 0
        audit = capsys.readouterr().out
        assert "->" in audit and "lstm.0.real.weight_ih" in audit
        g = tmp_path / "g.dcg"
        assert cli.main(["export-golden", "--checkpoint", str(ck),
                         "--out", str(g)]) == 0
        assert g.stat().st_size > 0

    def test_missing_checkpoint(self, tmp_path):
        assert cli.main(["convert", "--checkpoint", str(tmp_path / "x.pt"),
                         "--out", str(tmp_path / "y.dcw")]) == 3

    def test_bad_checkpoint_payload(self, tmp_path):
        ck = tmp_path / "bad.pt"
        torch.save({"weights": []}, ck)
        assert cli.main(["convert", "--checkpoint", str(ck),
                         "--out", str(tmp_path / "y.dcw")]) == 4
