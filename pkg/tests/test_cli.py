"""Command-line front end: trace dumps, campaigns, bundled sweep."""

import numpy as np
import pytest

from ldacs_sync import read_iq
from ldacs_sync.cli import main


def _read_csv(path):
    lines = path.read_text().strip().split("\n")
    return lines[0], lines[1:]


class TestTrace:
    def test_header_and_peak_at_zero(self, tmp_path):
        rc = main(["trace", "--out", str(tmp_path), "--snr", "10"])
        assert rc == 0
        header, rows = _read_csv(tmp_path / "trace.csv")
        assert header == "tau,xcr,xsig,xene"
        taus = [int(r.split(",")[0]) for r in rows]
        xcr = [float(r.split(",")[1]) for r in rows]
        assert taus[0] == -128 and taus[-1] == 128
        assert taus[int(np.argmax(xcr))] == 0
        assert max(xcr) == 1.0  # normalized to own peak

    def test_noiseless_both_correlators_peak_at_zero(self, tmp_path):
        rc = main(["trace", "--out", str(tmp_path), "--noiseless"])
        assert rc == 0
        header, rows = _read_csv(tmp_path / "trace.csv")
        taus = [int(r.split(",")[0]) for r in rows]
        xcr = [float(r.split(",")[1]) for r in rows]
        xsig = [float(r.split(",")[2]) for r in rows]
        assert taus[int(np.argmax(xcr))] == 0
        assert taus[int(np.argmax(xsig))] == 0

    def test_optional_dumps(self, tmp_path):
        rc = main(
            [
                "trace",
                "--out",
                str(tmp_path),
                "--noiseless",
                "--metrics",
                "--write-iq",
            ]
        )
        assert rc == 0
        header, rows = _read_csv(tmp_path / "metrics.csv")
        assert header == "n,ac1,ac2,ene,xcr,xsig,xene"
        iq = read_iq(tmp_path / "rx_iq.fc32")
        assert len(rows) == iq.size

    def test_channel_flag(self, tmp_path):
        rc = main(
            ["trace", "--out", str(tmp_path), "--channel", "ENR", "--epsilon", "0.5"]
        )
        assert rc == 0
        assert (tmp_path / "trace.csv").exists()

    def test_preamble_seed_flag(self, tmp_path):
        rc = main(
            ["trace", "--out", str(tmp_path), "--noiseless", "--preamble-seed", "3"]
        )
        assert rc == 0


class TestCampaign:
    def test_from_flags(self, tmp_path):
        rc = main(
            [
                "campaign",
                "--out",
                str(tmp_path),
                "--channel",
                "AWGN",
                "--snr",
                "inf",
                "--trials",
                "3",
            ]
        )
        assert rc == 0
        header, rows = _read_csv(tmp_path / "awgn.csv")
        assert header == "scenario,snr_db,fail_rate,cfo_mse,n_trials,n_detected"
        assert len(rows) == 1
        assert rows[0].split(",")[2] == "0"  # noiseless never fails
        assert (tmp_path / "awgn.json").exists()

    def test_from_scenario_file(self, tmp_path):
        cfg = tmp_path / "s.cfg"
        cfg.write_text(
            "name = quick\nchannel = AWGN\nepsilon = 1.5\n"
            "snr_grid_db = noiseless\nn_trials = 2\n"
        )
        rc = main(
            ["campaign", "--scenario", str(cfg), "--out", str(tmp_path), "--per-trial"]
        )
        assert rc == 0
        header, rows = _read_csv(tmp_path / "quick.csv")
        assert len(rows) == 1
        theader, trows = _read_csv(tmp_path / "quick_trials.csv")
        assert theader.startswith("seed,snr_db,")
        assert len(trows) == 2

    def test_bad_scenario_key_is_an_error(self, tmp_path, capsys):
        cfg = tmp_path / "s.cfg"
        cfg.write_text("name = x\nchannel = AWGN\nepsilonn = 1\n")
        rc = main(["campaign", "--scenario", str(cfg), "--out", str(tmp_path)])
        assert rc != 0
        assert "epsilonn" in capsys.readouterr().err

    def test_bad_channel_is_an_error(self, tmp_path, capsys):
        cfg = tmp_path / "s.cfg"
        cfg.write_text("name = x\nchannel = MARS\n")
        rc = main(["campaign", "--scenario", str(cfg), "--out", str(tmp_path)])
        assert rc != 0
        assert "channel" in capsys.readouterr().err

    def test_needs_scenario_or_channel(self, tmp_path, capsys):
        rc = main(["campaign", "--out", str(tmp_path)])
        assert rc != 0


class TestSweep:
    def test_smoke_writes_all_bundles(self, tmp_path):
        rc = main(["sweep", "--out", str(tmp_path), "--trials", "2"])
        assert rc == 0
        names = sorted(p.name for p in tmp_path.glob("*.csv"))
        assert names == [
            "awgn_eps0.csv",
            "awgn_eps1p5.csv",
            "enr.csv",
            "enr_dme.csv",
            "tma.csv",
        ]
        for p in tmp_path.glob("awgn_*.csv"):
            header, rows = _read_csv(p)
            assert len(rows) == 6  # one per SNR grid point
        for name in ("enr.csv", "enr_dme.csv", "tma.csv"):
            header, rows = _read_csv(tmp_path / name)
            assert len(rows) == 7

    def test_reruns_byte_identical(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["sweep", "--out", str(a), "--trials", "2", "--seed", "5"]) == 0
        assert main(["sweep", "--out", str(b), "--trials", "2", "--seed", "5"]) == 0
        for pa in sorted(a.glob("*.csv")):
            pb = b / pa.name
            assert pa.read_bytes() == pb.read_bytes()
