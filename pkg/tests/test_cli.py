import csv
import json
from importlib import resources

import numpy as np
import pytest

from expfit import bench
from expfit.cli import _n_list, load_input, main
from expfit.partition import load_partition
from expfit.signals import generate_mrs


def run_json(capsys, *argv):
    assert main(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def read_csv(path):
    with open(path) as fh:
        header = fh.readline()
        rows = list(csv.DictReader(fh))
    return header, rows


@pytest.mark.parametrize("method", ["projected", "full", "hsvd", "hsvd-fast"])
def test_fit_recovers_noiseless_mrs(capsys, method):
    out = run_json(capsys, "fit", "--method", method, "--input", "mrs:n=1024,noise=0",
                   "--p", "11", "--seed", "3")
    assert out["seed"] == 3 and out["method"] == method and out["n"] == 1024
    assert out["max_frequency_error"] <= 1e-6
    assert out["residual_norm"] <= 1e-6 * np.linalg.norm(generate_mrs(1024, noise_scale=0).y)
    assert not out["near_duplicate"] and not out["negligible_amplitude"]
    assert out["elapsed"]["total"] > 0


def test_fit_overestimated_order_is_flagged(capsys):
    for method in ("projected", "full", "hsvd", "hsvd-fast"):
        code = main(["fit", "--method", method, "--input", "mrs:n=1024,noise=0", "--p", "12"])
        captured = capsys.readouterr()
        if code == 0:
            out = json.loads(captured.out)
            assert out["near_duplicate"] or out["negligible_amplitude"]
            assert "warning" in captured.err
        else:
            assert "fit failed" in captured.err


def test_fit_file_inputs_and_csv(tmp_path, capsys):
    y = generate_mrs(512, noise_scale=0).y
    np.save(tmp_path / "y.npy", y)
    np.savetxt(tmp_path / "y.txt", np.column_stack([y.real, y.imag]))
    a = run_json(capsys, "fit", "--method", "full", "--input", str(tmp_path / "y.npy"),
                 "--p", "11")
    b = run_json(capsys, "fit", "--method", "full", "--input", str(tmp_path / "y.txt"),
                 "--p", "11")
    np.testing.assert_allclose(a["omega_imag"], b["omega_imag"], atol=1e-10)
    out = tmp_path / "fit.csv"
    assert main(["fit", "--method", "full", "--input", str(tmp_path / "y.npy"), "--p", "11",
                 "--seed", "5", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header.startswith("#") and "seed=5" in header
    assert len(rows) == 11 and set(rows[0]) == {"k", "omega_real", "omega_imag", "a_real",
                                                "a_imag"}


def test_fit_bad_input(tmp_path, capsys):
    assert main(["fit", "--method", "full", "--input", str(tmp_path / "missing.npy"),
                 "--p", "1"]) != 0
    assert main(["fit", "--method", "full", "--input", "mrs:n=abc", "--p", "1"]) != 0
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--method", "nonsense", "--input", "toy:n=100", "--p", "1"])
    assert exc.value.code != 0


def test_load_input_generators():
    y, truth = load_input("toy:n=200,noise_var=0", 0)
    np.testing.assert_allclose(y, np.exp(-0.01 * np.arange(200)))
    assert truth[0] == pytest.approx(-0.01)
    y1, _ = load_input("mrs:n=256", 4)
    y2, _ = load_input("mrs:n=256,seed=4", 0)
    np.testing.assert_array_equal(y1, y2)


def test_help(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for cmd in ("fit", "bench-timing", "bench-precision", "build-partition", "kernel-audit"):
        assert cmd in text
    with pytest.raises(SystemExit):
        main(["fit", "--help"])
    assert "--method" in capsys.readouterr().out


def test_n_list():
    assert _n_list("2^8..2^10") == [256, 512, 1024]
    assert _n_list("2^4,100") == [16, 100]


def test_kernel_audit_passes(capsys):
    assert main(["kernel-audit"]) == 0
    out = capsys.readouterr().out
    assert "gram_vv " in out and "gram_vvp" in out and "delta=" in out and "seed=" in out


def test_kernel_audit_corrupted_fixture(tmp_path, capsys):
    text = resources.files("expfit").joinpath("data/kernel_fixtures.txt").read_text()
    lines = text.splitlines()
    k = next(i for i, line in enumerate(lines) if line.strip() and not line.startswith("#"))
    fields = lines[k].split()
    fields[5] = repr(float(fields[5]) * (1 + 1e-9) + 1e-9)
    lines[k] = " ".join(fields)
    bad = tmp_path / "bad.txt"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["kernel-audit", "--fixtures", str(bad)]) == 1
    assert "FAIL" in capsys.readouterr().out
    (tmp_path / "junk.txt").write_text("not numbers\n")
    assert main(["kernel-audit", "--fixtures", str(tmp_path / "junk.txt")]) == 2
    assert main(["kernel-audit", "--fixtures", str(tmp_path / "none.txt")]) == 2


def test_bench_timing_small(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["bench-timing", "--methods", "projected", "hsvd", "vmu-product",
                 "--n-list", "256,512", "--trials", "2", "--seed", "9", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert "seed=9" in header
    assert list(rows[0]) == ["method", "n", "trial", "phase", "seconds"]
    totals = {(r["method"], r["n"], r["trial"]) for r in rows if r["phase"] == "total"}
    assert len(totals) == 3 * 2 * 2
    assert all(float(r["seconds"]) >= 0 for r in rows)


def test_bench_precision_small(tmp_path, capsys):
    out, summ = tmp_path / "p.csv", tmp_path / "s.csv"
    argv = ["bench-precision", "--methods", "full", "hsvd-fast", "--n-list", "256",
            "--trials", "4", "--seed", "2", "--out", str(out), "--summary", str(summ)]
    assert main(argv) == 0
    header, rows = read_csv(out)
    assert "seed=2" in header and len(rows) == 8
    assert {r["status"] for r in rows} == {"ok"}
    assert [r["seed"] for r in rows if r["method"] == "full"] == ["2", "3", "4", "5"]
    first = [r["standardized_error_sq"] for r in rows]
    assert main(argv) == 0
    # deterministic given the seed
    assert [r["standardized_error_sq"] for r in read_csv(out)[1]] == first
    _, summary = read_csv(summ)
    assert {s["method"] for s in summary} == {"full", "hsvd-fast"}


@pytest.mark.slow
def test_build_partition_small(tmp_path, capsys):
    out = tmp_path / "part.txt"
    assert main(["build-partition", "--target-eff", "0.95", "--eta-grid", "0.9999",
                 "--n", "32", "--out", str(out)]) == 0
    part = load_partition(out)
    assert part.n == 32 and part.target_eff == 0.95 and part.alphas[-1] == 0
    assert "alpha_1" in capsys.readouterr().out


def test_worker_count(monkeypatch):
    monkeypatch.delenv("EXPFIT_THREADS", raising=False)
    full = bench.worker_count()
    assert full >= 1
    monkeypatch.setenv("EXPFIT_THREADS", "1")
    assert bench.worker_count() == 1
    monkeypatch.setenv("EXPFIT_THREADS", "1000")
    assert bench.worker_count() == full
    for bad in ("0", "x"):
        monkeypatch.setenv("EXPFIT_THREADS", bad)
        with pytest.raises(ValueError):
            bench.worker_count()


def test_parallel_map_order():
    assert bench.parallel_map(abs, [-3, 2, -1], workers=2) == [3, 2, 1]
    assert bench.parallel_map(abs, [-3, 2, -1], workers=1) == [3, 2, 1]
