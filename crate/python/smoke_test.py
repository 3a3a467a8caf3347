"""Smoke test for the wgspec Python bindings.

Build and install first:

    pip install maturin
    cd crates/python && maturin develop --release

then run `python python/smoke_test.py` or `pytest python/`.
"""

import json
import math
import pathlib
import tempfile

import wgspec

CONFIGS = pathlib.Path(__file__).resolve().parent.parent / "configs"

SMALL = {
    "curve": {"name": "line", "x_min": -4, "x_max": 4},
    "fiber": {"kind": "circle", "scale": "1 + 0.3*sech(x)"},
    "potential": "uniform(0.2,0,0.3)",
    "sigma": 1,
    "variants": ["hollow_strong"],
    "epsilons": [0.2, 0.1],
    "C": 0.3,
    "grid": {"n_x": 80, "n_y": 32, "n_eigs": 4},
}


def test_bessel_and_disk():
    j01 = wgspec.bessel_zeros(0, 1)[0]
    assert abs(j01 - 2.404825557695773) < 1e-10
    vs = wgspec.VerticalSpectrum.disk()
    assert abs(vs.lambda0 - j01**2) < 1e-10
    assert abs(vs.mean_ysq - 0.218) < 0.003
    circle = wgspec.VerticalSpectrum.circle()
    assert circle.hollow
    assert circle.lambda02(1.0) == 0.25


def test_grid_fiber():
    vs = wgspec.VerticalSpectrum.grid("square", 0.05, n_modes=3, side=1.0, center=(0.2, 0.0))
    assert vs.lambda0 > 0.0
    assert abs(vs.mean_y[0] - 0.2) < 1e-6
    assert abs(vs.mean_l) < 1e-8


def test_frame():
    f = wgspec.Frame("helix(1,0.5)", 0.0, 4.0, 1024)
    k = [math.hypot(a, b) for a, b in zip(f.kappa1, f.kappa2)]
    assert all(abs(v - 1.0 / 1.25) < 1e-6 for v in k)
    assert f.holonomy_angle is None
    assert f.orthonormality_defect() < 1e-8


def test_experiment_round_trip():
    exp = wgspec.Experiment(json.dumps(SMALL))
    assert exp.validate() == []
    raw, rescaled = exp.effective_spectrum("hollow_strong", 0.1)
    assert len(rescaled) == 4 and rescaled == sorted(rescaled)
    full_raw, full_rescaled = exp.full_spectrum(0.1)
    assert abs(full_rescaled[0] - rescaled[0]) < 0.05
    op = exp.effective_operator("hollow_strong", 0.1)
    assert len(op["x"]) == 80
    with tempfile.TemporaryDirectory() as d:
        rec = exp.run(threads=2, out_dir=d)
        assert rec["config_hash"] == exp.hash
        assert (pathlib.Path(d) / "summary.json").exists()
        mtx, table = exp.dump_operator("full", 0.1, d)
        assert pathlib.Path(mtx).exists() and pathlib.Path(table).exists()


def test_config_files():
    exp = wgspec.Experiment.load(str(CONFIGS / "flat_hollow.json"))
    assert exp.oracle_lambda02()["pass"]
    seam = wgspec.Experiment.load(str(CONFIGS / "square_seam.json"))
    assert [d["code"] for d in seam.validate()] == ["SeamIncompatible"]


def test_errors():
    try:
        wgspec.Experiment("{not json")
    except ValueError:
        pass
    else:
        raise AssertionError("bad config accepted")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"{name}: ok")
