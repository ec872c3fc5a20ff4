import json

import numpy as np
import pytest

from genmatch import cli
from genmatch.mesh import save_ply
from genmatch.shapes import bumpy_sphere, stretched_icosphere


@pytest.fixture(scope="module")
def bumpy_ply(tmp_path_factory):
    mesh = bumpy_sphere(2)
    path = tmp_path_factory.mktemp("meshes") / "bumpy.ply"
    save_ply(path, mesh.vertices, mesh.faces)
    return str(path)


@pytest.fixture(scope="module")
def ellipsoid_ply(tmp_path_factory):
    mesh = stretched_icosphere(2, stretch=2.5, axis=(0, 0, 1))
    path = tmp_path_factory.mktemp("meshes") / "ellipsoid.ply"
    save_ply(path, mesh.vertices, mesh.faces)
    return str(path)


@pytest.fixture(scope="module")
def match_run(bumpy_ply, tmp_path_factory):
    out = tmp_path_factory.mktemp("match")
    code = cli.main(["match", bumpy_ply, bumpy_ply, "-o", str(out),
                     "--population", "120", "--max-generations", "150",
                     "--seed", "1"])
    assert code == 0
    return out


def test_landmarks_outputs(bumpy_ply, tmp_path):
    code = cli.main(["landmarks", bumpy_ply, "-o", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "landmarks.json").read_text())
    assert 3 <= len(data["landmarks"]) <= 35
    assert (tmp_path / "landmarks.ply").exists()


def test_landmarks_ellipsoid_has_pole_maxima(ellipsoid_ply, tmp_path):
    from genmatch.mesh import load_mesh, normalize_area
    code = cli.main(["landmarks", ellipsoid_ply, "-o", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "landmarks.json").read_text())
    mesh = normalize_area(load_mesh(ellipsoid_ply))
    poles = set(np.argsort(np.abs(mesh.vertices[:, 2]))[-2:].tolist())
    max_vertices = {entry["vertex"] for entry in data["landmarks"]
                    if entry["category"] == "Max"}
    assert poles <= max_vertices


def test_missing_file_exit_code(tmp_path, capsys):
    code = cli.main(["landmarks", str(tmp_path / "nope.obj"),
                     "-o", str(tmp_path)])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_match_outputs_exist(match_run):
    for name in ("match.json", "C12.txt", "C21.txt", "P12.txt", "P21.txt",
                 "run_log.jsonl", "config.txt", "convergence.png",
                 "transfer_target.ply", "transfer_source.ply"):
        assert (match_run / name).exists(), name


def test_match_mostly_identity(match_run):
    data = json.loads((match_run / "match.json").read_text())
    pairs = data["pairs"]
    identity = sum(1 for p in pairs
                   if p["source_vertex"] == p["target_vertex"])
    assert identity / len(pairs) >= 0.9


def test_match_deterministic(bumpy_ply, tmp_path):
    flags = ["--population", "40", "--max-generations", "8", "--seed", "7"]
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert cli.main(["match", bumpy_ply, bumpy_ply, "-o", str(out_a)] + flags) == 0
    assert cli.main(["match", bumpy_ply, bumpy_ply, "-o", str(out_b)] + flags) == 0
    assert (out_a / "match.json").read_bytes() == (out_b / "match.json").read_bytes()
    assert (out_a / "run_log.jsonl").read_bytes() == (out_b / "run_log.jsonl").read_bytes()


def test_eval_perfect_map(match_run, bumpy_ply, tmp_path):
    n = bumpy_sphere(2).n_vertices
    vmap_path = tmp_path / "identity.txt"
    vmap_path.write_text("\n".join(str(v) for v in range(n)) + "\n")
    gt_path = tmp_path / "gt.txt"
    gt_path.write_text("\n".join(f"{v} {v}" for v in range(0, n, 4)) + "\n")
    out_csv = tmp_path / "curve.csv"
    code = cli.main(["eval", "--vertexmap", str(vmap_path),
                     "--mesh-b", bumpy_ply, "--ground-truth", str(gt_path),
                     "-o", str(out_csv)])
    assert code == 0
    lines = out_csv.read_text().strip().splitlines()
    first = lines[1].split(",")
    assert float(first[1]) == 1.0
    assert out_csv.with_suffix(".png").exists()


def test_diversity_outputs(match_run, bumpy_ply, tmp_path):
    prefix = tmp_path / "div"
    code = cli.main(["diversity", "--run-log", str(match_run / "run_log.jsonl"),
                     "--mesh-b", bumpy_ply, "-o", str(prefix),
                     "--generations", "first,last"])
    assert code == 0
    import glob
    csvs = glob.glob(str(prefix) + "_gen*.csv")
    pngs = glob.glob(str(prefix) + "_gen*.png")
    assert len(csvs) == 2 and len(pngs) == 2


def test_config_file_and_flag_precedence(bumpy_ply, tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("population = 40\nseed = 3\n")
    out = tmp_path / "out"
    code = cli.main(["match", bumpy_ply, bumpy_ply, "-o", str(out),
                     "--config", str(cfg_path), "--max-generations", "4"])
    assert code == 0
    text = (out / "config.txt").read_text()
    assert "population=40" in text
    assert "seed=3" in text
    log_lines = [json.loads(l) for l in
                 (out / "run_log.jsonl").read_text().splitlines() if l.strip()]
    assert log_lines[-1]["generation"] <= 4


def test_match_failure_cleans_outputs(ellipsoid_ply, tmp_path, capsys):
    # matching two shapes with no common landmark structure cannot seed a
    # population; the command must fail without leaving partial artifacts
    from genmatch.mesh import save_ply as _save
    from genmatch.shapes import icosphere
    sphere_path = tmp_path / "sphere.ply"
    m = icosphere(2)
    _save(sphere_path, m.vertices, m.faces)
    out = tmp_path / "out"
    code = cli.main(["match", str(sphere_path), str(ellipsoid_ply),
                     "-o", str(out), "--population", "20",
                     "--max-generations", "3"])
    assert code == 1
    assert "error" in capsys.readouterr().err
    if out.exists():
        assert not any(out.iterdir())
