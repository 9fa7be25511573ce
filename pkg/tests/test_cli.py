import csv
import json
import os

import numpy as np
import pytest

from ghtsparse import load_dictionary, read_pgm, write_pgm
from ghtsparse.cli import main
from ghtsparse.synth import make_test_image


@pytest.fixture()
def small_image(tmp_path):
    path = tmp_path / "input.pgm"
    write_pgm(make_test_image(64, 64, seed=0), path)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestRepresent:
    def test_full_budget_square_dct_exact(self, small_image, tmp_path):
        out = tmp_path / "out"
        code = main([
            "represent", small_image, "--solver", "ght-qpm",
            "--atoms-per-dim", "8", "--budget-per-patch", "64",
            "--out-dir", str(out),
        ])
        assert code == 0
        rows = read_csv(out / "report.csv")
        assert len(rows) == 1
        assert float(rows[0]["rmse"]) <= 1e-6
        for name in ("reconstruction.pgm", "heatmap.pgm", "report.csv", "manifest.json"):
            assert (out / name).is_file()

    def test_reruns_are_byte_identical(self, small_image, tmp_path):
        args = ["represent", small_image, "--solver", "ght-admm",
                "--budget-per-patch", "6", "--max-iterations", "40"]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out-dir", str(out_a)]) == 0
        assert main(args + ["--out-dir", str(out_b)]) == 0
        for name in ("report.csv", "reconstruction.pgm", "heatmap.pgm"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_reconstruction_matches_input_grid(self, small_image, tmp_path):
        out = tmp_path / "out"
        assert main(["represent", small_image, "--budget-per-patch", "8",
                     "--max-iterations", "30", "--out-dir", str(out)]) == 0
        recon = read_pgm(out / "reconstruction.pgm")
        assert recon.shape == (64, 64)

    def test_non_divisible_requires_crop(self, tmp_path):
        path = tmp_path / "odd.pgm"
        write_pgm(make_test_image(64, 64, seed=1)[:60, :62], path)
        out = tmp_path / "out"
        assert main(["represent", str(path), "--out-dir", str(out)]) == 1
        assert main(["represent", str(path), "--crop", "--budget-per-patch", "4",
                     "--max-iterations", "10", "--out-dir", str(out)]) == 0
        recon = read_pgm(out / "reconstruction.pgm")
        assert recon.shape == (56, 56)

    def test_patchwise_solver(self, small_image, tmp_path):
        out = tmp_path / "out"
        assert main(["represent", small_image, "--solver", "omp",
                     "--budget-per-patch", "4", "--out-dir", str(out)]) == 0
        rows = read_csv(out / "report.csv")
        assert rows[0]["solver"] == "omp"

    def test_manifest_contents(self, small_image, tmp_path):
        out = tmp_path / "out"
        assert main(["represent", small_image, "--budget-per-patch", "5",
                     "--max-iterations", "15", "--out-dir", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "represent"
        assert manifest["parameters"]["budget_per_patch"] == 5.0
        assert small_image in manifest["inputs"]
        assert len(manifest["inputs"][small_image]) == 64  # sha256 hex
        assert "machine" in manifest and "cpu_count" in manifest["machine"]

    def test_png_input(self, tmp_path):
        from PIL import Image

        image = make_test_image(64, 64, seed=2)[:32, :32].astype(np.uint8)
        png_path = tmp_path / "input.png"
        Image.fromarray(image, mode="L").save(png_path)
        out = tmp_path / "out"
        assert main(["represent", str(png_path), "--budget-per-patch", "4",
                     "--max-iterations", "10", "--out-dir", str(out)]) == 0

    def test_missing_file_fails_cleanly(self, tmp_path, capsys):
        assert main(["represent", str(tmp_path / "nope.pgm"),
                     "--out-dir", str(tmp_path / "o")]) == 1
        assert "error:" in capsys.readouterr().err


class TestDenoise:
    def test_sigma_zero_noisy_equals_clean(self, small_image, tmp_path):
        out = tmp_path / "out"
        assert main(["denoise", small_image, "--sigma", "0",
                     "--solver", "ght-qpm", "--budget-per-patch", "8",
                     "--max-iterations", "30", "--out-dir", str(out)]) == 0
        noisy = read_pgm(out / "noisy_sigma0.pgm")
        assert np.array_equal(noisy, read_pgm(small_image))
        rows = read_csv(out / "psnr_report.csv")
        assert rows[0]["psnr_noisy"] == "inf"

    def test_sigma_and_solver_sweep_rows(self, small_image, tmp_path):
        out = tmp_path / "out"
        assert main(["denoise", small_image, "--sigma", "5", "10",
                     "--solver", "omp", "ght-qpm", "--budget-per-patch", "6",
                     "--max-iterations", "25", "--out-dir", str(out)]) == 0
        rows = read_csv(out / "psnr_report.csv")
        assert len(rows) == 4  # two sigmas x two solvers
        assert (out / "noisy_sigma5.pgm").is_file()
        assert (out / "denoised_ght-qpm_sigma10.pgm").is_file()

    def test_noise_is_seeded(self, small_image, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        args = ["denoise", small_image, "--sigma", "10", "--solver", "omp",
                "--budget-per-patch", "4", "--seed", "3"]
        assert main(args + ["--out-dir", str(out_a)]) == 0
        assert main(args + ["--out-dir", str(out_b)]) == 0
        assert (out_a / "noisy_sigma10.pgm").read_bytes() \
            == (out_b / "noisy_sigma10.pgm").read_bytes()
        assert (out_a / "psnr_report.csv").read_bytes() \
            == (out_b / "psnr_report.csv").read_bytes()


class TestBenches:
    def test_synth_bench_rows(self, tmp_path):
        out = tmp_path / "out"
        assert main(["synth-bench", "--s-min", "5", "--s-max", "6",
                     "--trials", "1", "--solvers", "omp", "ght-qpm",
                     "--out-dir", str(out)]) == 0
        lines = (out / "recovery.csv").read_text().splitlines()
        assert lines[0] == "solver,s_or_p,mismatch,rmse,seconds"
        assert len(lines) == 5  # header + 2 s-values x 2 solvers
        assert (out / "recovery.json").is_file()

    def test_scale_bench_rows_and_manifest(self, tmp_path):
        out = tmp_path / "out"
        assert main(["scale-bench", "--p-list", "128", "256",
                     "--solvers", "ght-qpm", "--repeats", "1",
                     "--iterations", "2", "--out-dir", str(out)]) == 0
        lines = (out / "scaling.csv").read_text().splitlines()
        assert len(lines) == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["parameters"]["p_list"] == [128, 256]
        assert "platform" in manifest["machine"]


class TestUtilities:
    def test_dict_dct(self, tmp_path):
        path = tmp_path / "d.csv"
        assert main(["dict", "--kind", "dct", "--patch-side", "8",
                     "--atoms-per-dim", "10", "-o", str(path)]) == 0
        d = load_dictionary(path)
        assert (d.n_rows, d.n_atoms) == (64, 100)

    def test_dict_gaussian(self, tmp_path):
        path = tmp_path / "g.csv"
        assert main(["dict", "--kind", "gaussian", "--rows", "20", "--atoms", "30",
                     "--std", "0.1", "--seed", "5", "-o", str(path)]) == 0
        d = load_dictionary(path)
        assert (d.n_rows, d.n_atoms) == (20, 30)

    def test_heatmap_from_saved_codes(self, small_image, tmp_path):
        out = tmp_path / "out"
        assert main(["represent", small_image, "--budget-per-patch", "6",
                     "--max-iterations", "20", "--save-codes",
                     "--out-dir", str(out)]) == 0
        heat_path = tmp_path / "heat.pgm"
        assert main(["heatmap", str(out / "codes.npz"), "-o", str(heat_path)]) == 0
        regenerated = read_pgm(heat_path)
        original = read_pgm(out / "heatmap.pgm")
        assert np.array_equal(regenerated, original)


class TestConfigPrecedence:
    def test_flag_beats_config(self, small_image, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"budget_per_patch": 64, "max_iterations": 10}))
        out = tmp_path / "out"
        assert main(["represent", small_image, "--config", str(config),
                     "--budget-per-patch", "4", "--out-dir", str(out)]) == 0
        rows = read_csv(out / "report.csv")
        assert float(rows[0]["budget_per_patch"]) == 4.0

    def test_config_beats_default(self, small_image, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"budget_per_patch": 3, "max_iterations": 10}))
        out = tmp_path / "out"
        assert main(["represent", small_image, "--config", str(config),
                     "--out-dir", str(out)]) == 0
        rows = read_csv(out / "report.csv")
        assert float(rows[0]["budget_per_patch"]) == 3.0

    def test_env_out_dir(self, small_image, tmp_path, monkeypatch):
        target = tmp_path / "env-out"
        monkeypatch.setenv("GHTSPARSE_OUT_DIR", str(target))
        monkeypatch.chdir(tmp_path)
        assert main(["represent", small_image, "--budget-per-patch", "4",
                     "--max-iterations", "10"]) == 0
        assert (target / "report.csv").is_file()

    def test_env_threads(self, small_image, tmp_path, monkeypatch):
        monkeypatch.setenv("GHTSPARSE_THREADS", "2")
        out = tmp_path / "out"
        assert main(["represent", small_image, "--solver", "omp",
                     "--budget-per-patch", "4", "--out-dir", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["parameters"]["threads"] == 2
