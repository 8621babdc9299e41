import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sympobs import linear as L
from sympobs.cli import main

TORUS_LIKE = """\
[ring]
name = torus-like
n = 2
h1_zero = false
[generators]
a = 2
[classes]
chern = 1 + 3a + 3a^2
"""

SYNTHETIC = """\
[ring]
name = synthetic
n = 3
[generators]
a = 2
b = 2
[relations]
b^2 = 0
[classes]
chern = (1 + a^2) * (1 + b)
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_manifold_cp2(capsys):
    code, out, _ = run(capsys, "check-manifold", "--catalog", "cp2")
    assert code == 0
    assert "NoProved(gcd_criterion)" in out and "criterion satisfied" in out


def test_check_manifold_blowup_prints_certificate(capsys):
    code, out, _ = run(capsys, "check-manifold", "--catalog", "blowup-cp3")
    assert code == 0
    assert "beta[b] = -2" in out and "alpha[b^2] = 0" in out
    assert "contradiction in equation a^3: 24 != 6" in out


def test_check_manifold_not_applicable(capsys, tmp_path):
    f = tmp_path / "torus-like.ring"
    f.write_text(TORUS_LIKE)
    code, out, _ = run(capsys, "check-manifold", "--spec", str(f))
    assert code == 1 and "criterion not applicable" in out


def test_check_manifold_inconclusive(capsys):
    code, out, _ = run(capsys, "check-manifold", "--catalog", "blowup-cp3", "--no-elimination", "--bound", "3")
    assert code == 2 and "NoWithinBound(3)" in out and "criterion inconclusive" in out


def test_catalog_name_resolves_before_path(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "cp2").write_text(TORUS_LIKE)
    code, out, _ = run(capsys, "check-manifold", "cp2")
    assert code == 0 and "manifold: cp2" in out


def test_factor_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "factor", "--catalog", "cp2xcp2")
    assert code == 1 and out.count("non-rational solution") == 2
    f = tmp_path / "synthetic.ring"
    f.write_text(SYNTHETIC)
    code, out, _ = run(capsys, "factor", "--spec", str(f))
    assert code == 0 and "alpha = 1 + a^2" in out and "beta  = 1 + b" in out
    code, out, _ = run(capsys, "factor", "--catalog", "blowup-cp3", "--no-elimination", "--bound", "2")
    assert code == 2


def test_usage_errors_exit_3(capsys, tmp_path):
    assert run(capsys, "factor", "--catalog", "cp2", "--bound", "0")[0] == 3
    assert run(capsys, "check-manifold", "--catalog", "nowhere")[0] == 3
    assert run(capsys, "check-manifold")[0] == 3
    assert run(capsys, "check-manifold", str(tmp_path / "missing.ring"))[0] == 3
    bad = tmp_path / "bad.ring"
    bad.write_text("[ring]\nn = 2\n[generators]\na = 2\n[classes]\nchern = 1 + $a\n")
    code, _, err = run(capsys, "check-manifold", "--spec", str(bad))
    assert code == 3 and "bad.ring:6:" in err
    assert run(capsys, "frobnicate")[0] == 3
    assert run(capsys, "--help")[0] == 0


def test_bound_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("SYMPOBS_BOUND", "4")
    code, out, _ = run(capsys, "check-manifold", "--catalog", "blowup-cp3", "--no-elimination")
    assert code == 2 and "NoWithinBound(4)" in out
    code, out, _ = run(capsys, "check-manifold", "--catalog", "blowup-cp3", "--no-elimination", "--bound", "2")
    assert "NoWithinBound(2)" in out
    monkeypatch.setenv("SYMPOBS_BOUND", "zero")
    assert run(capsys, "check-manifold", "--catalog", "cp2")[0] == 3


@pytest.mark.parametrize("name", ["cp3", "blowup-cp3", "cp2xcp2", "s2"])
def test_structured_output_is_deterministic(capsys, name):
    _, a, _ = run(capsys, "check-manifold", "--catalog", name, "--format", "structured")
    _, b, _ = run(capsys, "check-manifold", "--catalog", name, "--format", "structured")
    assert a == b
    doc = json.loads(a)
    assert doc["manifold"] == name and "seconds" not in a and "time" not in doc


def test_text_output_has_timing(capsys):
    _, out, _ = run(capsys, "check-manifold", "--catalog", "cp2")
    assert out.splitlines()[-1].startswith("time: ")


def _write(tmp_path, name, M):
    p = tmp_path / name
    p.write_text(L.format_matrix(M))
    return str(p)


def test_perturb_matrix(capsys, tmp_path):
    R = L.rotation(2 * math.pi / 5)
    code, out, _ = run(capsys, "perturb-matrix", "--input", _write(tmp_path, "r.mat", R))
    assert code == 0 and "angles: 1/5" in out and "order: 5" in out
    M = L.random_elliptic(2, np.random.default_rng(0))
    code, out, _ = run(capsys, "perturb-matrix", "--input", _write(tmp_path, "m.mat", M), "--eps", "1e-3", "--format", "structured")
    doc = json.loads(out)
    qs = [int(a.split("/")[1]) for a in doc["angles"]]
    assert code == 0 and doc["order"] == math.lcm(*qs)
    assert doc["symplectic_defect"] <= 1e-10


def test_perturb_matrix_rejects_non_elliptic(capsys, tmp_path):
    code, out, _ = run(capsys, "perturb-matrix", "--input", _write(tmp_path, "h.mat", np.diag([2.0, 0.5])))
    assert code == 3 and "not elliptic" in out and "expanding" in out and "contracting" in out
    code, _, err = run(capsys, "perturb-matrix", "--input", _write(tmp_path, "n.mat", np.diag([2.0, 1.0])))
    assert code == 3 and "not symplectic" in err


def test_blend_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "blend-verify", "--map", "cubic-shear", "--delta", "0.2", "--delta", "0.1", "--format", "structured")
    doc = json.loads(out)
    assert code == 0 and doc["ok"]
    assert len(doc["reports"]) == 2 and 0.25 <= doc["ratios"][0]["c1_ratio"] <= 1.0
    mf = tmp_path / "shear.map"
    mf.write_text("Q = p + 1/2 q^2\nP = -q\n")
    code, out, _ = run(capsys, "blend-verify", "--map-file", str(mf), "--delta", "0.2")
    assert code == 0 and "delta 0.2" in out
    assert run(capsys, "blend-verify", "--map", "identity", "--delta", "0.1")[0] == 3
    assert run(capsys, "blend-verify", "--map", "nope")[0] == 3


def test_calabi_commands(capsys):
    code, out, _ = run(capsys, "calabi", "--hamiltonian", "bump:radius=0.5:amplitude=2", "--volume", "4", "--format", "structured")
    doc = json.loads(out)
    exact = 2 * math.pi * 0.25 / 5
    assert code == 0 and abs(doc["calabi"]["value"] - exact) <= doc["calabi"]["error"]
    assert doc["sigma"] == pytest.approx(-exact / 4)
    code, out, _ = run(capsys, "calabi", "--hamiltonian", "bump:radius=0.2", "--op", "orbit-copy", "--k", "3", "--format", "structured")
    assert code == 0 and json.loads(out)["holds"]
    code, out, _ = run(
        capsys, "calabi", "--hamiltonian", "bump:radius=0.3:center=0.2,0", "--op", "compose",
        "--second", "smooth:radius=0.3:center=-0.1,0.1", "--points", "64", "--steps", "200",
    )
    assert code == 0 and "Cal(F#G)" in out


def test_calabi_input_errors(capsys):
    assert run(capsys, "calabi", "--hamiltonian", "blob")[0] == 3
    assert run(capsys, "calabi", "--hamiltonian", "bump:radius")[0] == 3
    assert run(capsys, "calabi", "--hamiltonian", "bump:colour=red")[0] == 3
    assert run(capsys, "calabi", "--hamiltonian", "bump:center=0.8,0:radius=0.3")[0] == 3
    assert run(capsys, "calabi", "--hamiltonian", "bump", "--op", "compose")[0] == 3
    assert run(capsys, "calabi", "--hamiltonian", "bump:profile=wobbly")[0] == 3


def test_calabi_grid_file(capsys, tmp_path):
    xs = np.linspace(-1, 1, 17)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    s = np.clip(1 - (X**2 + Y**2) / 0.25, 0, None) ** 4
    g = tmp_path / "bump.grid"
    g.write_text("1 17 17\n-1 1 -1 1\n" + "\n".join(" ".join(f"{v:.17g}" for v in row) for row in s) + "\n")
    code, out, _ = run(capsys, "calabi", "--hamiltonian", f"grid:file={g}")
    assert code == 0 and "Cal(F)" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "sympobs", "check-manifold", "--catalog", "cp3"], capture_output=True, text=True)
    assert r.returncode == 0 and "criterion satisfied" in r.stdout
