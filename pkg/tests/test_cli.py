"""
CLI behavior:

- outputs begin with '#' metadata lines and are byte-stable per (config, seed)
- model/chain pairings validate, with the documented constant-model coercions
- exit codes: 0 success, 1 invariant failure, 2 usage error, 3 cap exceeded
- n-range scans emit one row per size with monotone mixing times
"""
import json

import pytest

from permchains.cli import main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sample_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sample", "--chain", "nn", "--model", "constant:0.7", "--n", "5",
            "--steps", "500", "--stride", "100", "--seed", "1"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.startswith("# permchains-version:")
    assert "# config:" in text
    body = [l for l in text.splitlines() if not l.startswith("#")]
    assert body[0] == "step,observable,value"
    assert len(body) == 1 + 6  # header plus strides 0..500


def test_sample_seed_changes_body(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["sample", "--chain", "nn", "--model", "constant:0.7", "--n", "5",
            "--steps", "500", "--stride", "100"]
    main(base + ["--seed", "1", "--out", str(a)])
    main(base + ["--seed", "2", "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_inv_constant_coercion_notice(capsys):
    code, out, err = run_cli(
        ["sample", "--chain", "inv", "--model", "constant:0.7", "--n", "4",
         "--steps", "10", "--stride", "5"],
        capsys,
    )
    assert code == 0
    assert "coerced" in err


def test_tree_requires_league_or_constant(capsys):
    code, _, err = run_cli(
        ["sample", "--chain", "tree", "--model", "cyw:0.6,0.7", "--steps", "5"],
        capsys,
    )
    assert code == 2
    assert "league" in err


def test_walk_requires_slowmix_or_constant(capsys):
    code, _, err = run_cli(
        ["sample", "--chain", "walk-transposition", "--model", "constant:0.7",
         "--n", "4", "--steps", "5"],
        capsys,
    )
    assert code == 2


def test_malformed_model_is_usage_error(capsys):
    code, _, err = run_cli(
        ["sample", "--chain", "nn", "--model", "constant:1.7", "--n", "4"], capsys
    )
    assert code == 2


def test_exact_rows_increase(tmp_path, capsys):
    code, out, _ = run_cli(
        ["exact", "--chain", "nn", "--model", "constant:0.5",
         "--n-range", "3:5", "--eps", "0.25"],
        capsys,
    )
    assert code == 0
    rows = [l.split(",") for l in out.splitlines() if l and not l.startswith("#")][1:]
    assert [int(r[0]) for r in rows] == [3, 4, 5]
    taus = [int(r[4]) for r in rows]
    assert taus == sorted(taus) and taus[0] < taus[-1]


def test_exact_cap_exit_code(tmp_path, capsys, demo_tree):
    tree_file = tmp_path / "t.json"
    tree_file.write_text(demo_tree.to_json())
    code, _, err = run_cli(
        ["exact", "--chain", "tree", "--model", f"league:{tree_file}", "--n", "9"],
        capsys,
    )
    assert code == 3
    assert "cap" in err


def test_paths_size_mismatch(tmp_path, capsys, demo_tree):
    tree_file = tmp_path / "t.json"
    tree_file.write_text(demo_tree.to_json())
    code, _, err = run_cli(
        ["paths", "--kind", "tree", "--model", f"league:{tree_file}", "--n", "6"],
        capsys,
    )
    assert code == 2
    assert "9" in err


def test_paths_inv_pass(capsys):
    code, out, _ = run_cli(
        ["paths", "--kind", "inv", "--model", "cyw:0.6,0.7,0.8,0.9", "--n", "5"],
        capsys,
    )
    assert code == 0
    import csv

    rows = list(csv.reader(l for l in out.splitlines() if l and not l.startswith("#")))
    record = dict(zip(rows[0], rows[1]))
    assert record["floor-check"] == "pass"
    assert int(record["max-paths-per-edge"]) <= 25
    assert float(record["comparison-bound"]) >= float(record["exact-tau"])


def test_json_format(capsys):
    code, out, _ = run_cli(
        ["exact", "--chain", "oned", "--model", "oned:0.75,6", "--format", "json"],
        capsys,
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"][0] == "n"
    assert len(doc["rows"]) == 1


def test_scan_emits_slopes(capsys):
    code, out, _ = run_cli(
        ["scan", "--chain", "nn", "--model", "constant:0.5", "--n-range", "3:4"],
        capsys,
    )
    assert code == 0
    rows = [l.split(",") for l in out.splitlines() if l and not l.startswith("#")]
    assert rows[0][-2:] == ["fit_slope", "fit_slope_per_element"]
    assert float(rows[1][-1]) > 0


def test_verify_fast(capsys):
    assert main(["verify", "--fast"]) == 0
    out = capsys.readouterr().out
    assert "inversion-bijection-roundtrip" in out
    assert "FAIL" not in out


def test_verify_seed_flag(capsys):
    assert main(["verify", "--fast", "--seed", "7"]) == 0


def test_slowmix_row(capsys):
    code, out, _ = run_cli(["slowmix", "--n", "4", "--no-comparison"], capsys)
    assert code == 0
    rows = [l.split(",") for l in out.splitlines() if l and not l.startswith("#")]
    record = dict(zip(rows[0], rows[1]))
    assert 1 / 65 < float(record["delta"]) < 0.5
    assert abs(float(record["piS1"]) - float(record["piS3"])) <= 1e-8 * float(record["piS1"])


def test_slowmix_small_n_rejected(capsys):
    code, _, _ = run_cli(["slowmix", "--n", "3", "--no-comparison"], capsys)
    assert code == 2
