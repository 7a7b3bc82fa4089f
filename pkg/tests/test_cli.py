import json

import pytest

from sistercities.cli import run
from sistercities.data import snapshot_path

TRIANGLE = "city_a,country_a,city_b,country_b\nA,X,B,X\nB,X,C,Y\nC,Y,A,X\n"


@pytest.fixture
def triangle_csv(tmp_path):
    p = tmp_path / "tri.csv"
    p.write_text(TRIANGLE)
    return p


@pytest.fixture(scope="module")
def medium(tmp_path_factory):
    """First 700 snapshot rows with the snapshot's geocache and GDP table."""
    d = tmp_path_factory.mktemp("medium")
    rows = snapshot_path().read_text(encoding="utf-8").splitlines()[:701]
    (d / "edges.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    (d / "geocache.txt").write_bytes(snapshot_path("geocache.txt").read_bytes())
    (d / "gdp.csv").write_bytes(snapshot_path("gdp.csv").read_bytes())
    return d


def outputs(out_dir):
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir()) if p.name != "manifest.json"}


def test_stats_triangle(triangle_csv, tmp_path, capsys):
    out = tmp_path / "out"
    assert run(["stats", "--input", str(triangle_csv), "--out", str(out), "--format", "json"]) == 0
    city = json.loads((out / "summary.json").read_text())["city"]
    assert (city["n_nodes"], city["n_edges"]) == (3, 3)
    assert city["avg_clustering"] == 1.0
    assert city["giant_component_fraction"] == 1.0
    assert city["avg_path_length"] == 1.0
    assert '"n_nodes": 3' in capsys.readouterr().out


def test_manifest_records_run(triangle_csv, tmp_path):
    out = tmp_path / "out"
    run(["stats", "--input", str(triangle_csv), "--out", str(out), "--seed", "4"])
    run(["rank", "--input", str(triangle_csv), "--out", str(out), "--top-k", "2"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["runs"]) == {"stats", "rank"}
    stats = manifest["runs"]["stats"]
    assert stats["seed"] == 4
    assert set(stats["outputs"]) == {"summary.json", "summary.txt"}
    assert len(stats["inputs"][0]["sha256"]) == 64
    assert "numpy" in stats["versions"]


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        run(["frobnicate", "--input", "x"])
    assert info.value.code == 2


def test_missing_input_exits_1(tmp_path, capsys):
    assert run(["stats", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 1
    assert "input not found" in capsys.readouterr().err


def test_bad_attribute_flag(triangle_csv, tmp_path, capsys):
    assert run(["assort", "--input", str(triangle_csv), "--out", str(tmp_path), "--attribute", "gdp"]) == 1


def test_ingest_wikitext_dir(fixtures_dir, tmp_path):
    pages = tmp_path / "pages"
    pages.mkdir()
    (pages / "Spain.wiki").write_bytes((fixtures_dir / "Spain.wiki").read_bytes())
    out = tmp_path / "out"
    assert run(["ingest", "--input", str(pages), "--out", str(out)]) == 0
    report = json.loads((out / "ingest_report.json").read_text())
    assert report["n_pairings"] == 12
    assert len(report["pages"]["Spain.wiki"]["warnings"]) == 6
    assert (out / "edges.csv").read_text().startswith("city_a,country_a,city_b,country_b\n")


def test_degree_dist_and_export(medium, tmp_path):
    out = tmp_path / "out"
    edges = str(medium / "edges.csv")
    assert run(["degree-dist", "--input", edges, "--out", str(out), "--network", "country"]) == 0
    assert (out / "ccdf_country.csv").read_text().startswith("degree,ccdf\n")
    for fmt in ("graphml", "dot", "csv"):
        assert run(["export", "--input", edges, "--out", str(out), "--network", "country", "--format", fmt]) == 0
    assert run(["export", "--input", edges, "--out", str(out), "--format", "geojson",
                "--geocache", str(medium / "geocache.txt")]) == 0
    doc = json.loads((out / "arcs.geojson").read_text())
    assert doc["type"] == "FeatureCollection"
    run(["stats", "--input", edges, "--out", str(out)])
    n_edges = json.loads((out / "summary.json").read_text())["city"]["n_edges"]
    assert len(doc["features"]) + doc["skipped"] == n_edges
    assert doc["features"]


def randomized_commands(medium):
    edges = str(medium / "edges.csv")
    return [
        ["assort", "--input", edges, "--property", "degree", "--replicas", "100", "--seed", "7",
         "--attribute", f"gdp={medium / 'gdp.csv'}"],
        ["communities", "--input", edges, "--seed", "7"],
        ["distances", "--input", edges, "--geocache", str(medium / "geocache.txt"),
         "--sample", "20000", "--seed", "7"],
    ]


@pytest.mark.parametrize("index", [0, 1, 2], ids=["assort", "communities", "distances"])
def test_randomized_pipelines_byte_identical(medium, tmp_path, index):
    cmd = randomized_commands(medium)[index]
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run(cmd + ["--out", str(a)]) == 0
    assert run(cmd + ["--out", str(b)]) == 0
    assert run(cmd + ["--out", str(c), "--workers", "2"]) == 0
    assert outputs(a) == outputs(b) == outputs(c)
    assert outputs(a)
    ma = json.loads((a / "manifest.json").read_text())["runs"][cmd[0]]
    mb = json.loads((b / "manifest.json").read_text())["runs"][cmd[0]]
    assert ma["outputs"] == mb["outputs"]


def test_different_seed_changes_assort(medium, tmp_path):
    cmd = randomized_commands(medium)[0]
    cmd = [x if x != "100" else "10" for x in cmd]
    run(cmd + ["--out", str(tmp_path / "a")])
    run([x if x != "7" else "8" for x in cmd] + ["--out", str(tmp_path / "b")])
    assert outputs(tmp_path / "a") != outputs(tmp_path / "b")
