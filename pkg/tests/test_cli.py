import json

import numpy as np
import pytest

from conftest import synthetic_dataset
from fdareg import cli, fdata


@pytest.fixture(scope="module")
def pairs_file(tmp_path_factory):
    rng = np.random.default_rng(31)
    ds = synthetic_dataset(rng, n=36, m=26, noise=0.005)
    path = tmp_path_factory.mktemp("data") / "synthetic.pairs"
    fdata.save_generic_pairs(ds, path)
    return path


SMALL_SPEC = {
    "name": "cli-rbfn",
    "model": "rbfn",
    "representation": {"kind": "bspline", "order": 4, "dimension": 9},
    "rbfn": {
        "width_multipliers": [0.5, 1.0, 2.0],
        "ridges": [1e-4, 1e-1],
        "max_centers": 12,
    },
    "seed": 4,
}


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["--version"])
    assert e.value.code == 0


def test_make_holes_roundtrip(pairs_file, tmp_path):
    out = tmp_path / "holed.pairs"
    rc = cli.main([
        "make-holes", "--data", str(pairs_file), "--format", "generic-pairs",
        "--drop-fraction", "0.2", "--seed", "7", "--out", str(out),
    ])
    assert rc == 0
    holed = fdata.load_dataset(out, "generic-pairs")
    original = fdata.load_dataset(pairs_file, "generic-pairs")
    assert holed.domain == original.domain
    assert all(len(f) == 26 - 5 for f in holed.functions)


def test_represent_outputs(pairs_file, tmp_path):
    out = tmp_path / "rep"
    rc = cli.main([
        "represent", "--data", str(pairs_file), "--format", "generic-pairs",
        "--basis", "bspline", "--order", "4", "--dimension", "10",
        "--out", str(out), "--emit-curves", "--curve-functions", "2",
    ])
    assert rc == 0
    alpha_rows = (out / "alpha.csv").read_text().splitlines()
    assert len(alpha_rows) == 37  # header + 36 functions
    assert (out / "beta.csv").exists()
    assert (out / "curve_fit_0.csv").exists()
    assert (out / "curve_pca_variance.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["dimension"] == 10

    # the reconstruction file round-trips through the loader
    recon = fdata.load_dataset(out / "reconstruction.pairs", "generic-pairs")
    original = fdata.load_dataset(pairs_file, "generic-pairs")
    assert len(recon) == len(original)
    np.testing.assert_allclose(recon.targets, original.targets)
    for fr, fo in zip(recon.functions, original.functions):
        np.testing.assert_array_equal(fr.x, fo.x)
        # spline fit should track the (low-noise) samples closely
        assert np.max(np.abs(fr.y - fo.y)) < 0.2


def test_represent_loo_selection(pairs_file, tmp_path):
    out = tmp_path / "rep-loo"
    rc = cli.main([
        "represent", "--data", str(pairs_file), "--format", "generic-pairs",
        "--dimension", "loo", "--out", str(out),
    ])
    assert rc == 0
    report = (out / "loo_report.csv").read_text().splitlines()
    assert report[0] == "dimension,total_loo"
    assert len(report) > 1


def test_experiment_command(pairs_file, tmp_path):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(SMALL_SPEC))
    out = tmp_path / "exp"
    rc = cli.main([
        "experiment", "--spec", str(spec_file),
        "--data", str(pairs_file), "--format", "generic-pairs",
        "--test-size", "9", "--split", "fixed", "--out", str(out),
    ])
    assert rc == 0
    report = (out / "report.txt").read_text()
    assert "cli-rbfn" in report
    results = (out / "results.csv").read_text().splitlines()
    assert results[0] == "experiment,selected-params,test-rmse,wall-time"
    assert len(results) == 2
    assert (out / "row_cli-rbfn.json").exists()


def test_experiment_rerun_byte_identical_report(pairs_file, tmp_path):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(SMALL_SPEC))
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"exp-{tag}"
        rc = cli.main([
            "experiment", "--spec", str(spec_file),
            "--data", str(pairs_file), "--format", "generic-pairs",
            "--test-size", "9", "--out", str(out),
        ])
        assert rc == 0
        outs.append(out)
    assert (outs[0] / "report.txt").read_bytes() == (outs[1] / "report.txt").read_bytes()
    assert (
        (outs[0] / "row_cli-rbfn.json").read_bytes()
        == (outs[1] / "row_cli-rbfn.json").read_bytes()
    )


def test_config_error_exit_status(pairs_file, tmp_path, capsys):
    bad = dict(SMALL_SPEC, name="bad", model="mlp")  # MLP without PCA
    spec_file = tmp_path / "bad.json"
    spec_file.write_text(json.dumps(bad))
    rc = cli.main([
        "experiment", "--spec", str(spec_file),
        "--data", str(pairs_file), "--format", "generic-pairs",
        "--test-size", "9", "--out", str(tmp_path / "bad-out"),
    ])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_missing_data_file(tmp_path, capsys):
    rc = cli.main([
        "make-holes", "--data", str(tmp_path / "nope.txt"),
        "--out", str(tmp_path / "x"),
    ])
    assert rc == 1
