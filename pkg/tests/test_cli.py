import csv
import io
import json
import os
import subprocess
import sys

import jsonschema
import pytest

from fplab import cli


def run_cli(tmp_path, *args):
    out = tmp_path / "out.txt"
    log = tmp_path / "runs.log"
    code = cli.main([*args, "-o", str(out), "--runs-log", str(log)])
    return code, out.read_text() if out.exists() else "", log


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_primes_example(tmp_path):
    code, text, _ = run_cli(tmp_path, "primes", "--alpha", "0.5", "--N-grid", "100")
    assert code == 0
    (row,) = rows(text)
    assert float(row["measured"]) == pytest.approx(96.944, abs=1e-3)
    assert int(row["prime_count"]) == sum(1 for n in range(1, 101) if int(n**0.5) in (2, 3, 5, 7))
    assert list(row)[:5] == cli.CORRELATION_COLUMNS


def test_conditions_example(tmp_path, capsys):
    code = cli.main(["conditions", "--alpha", "0.25,0.05", "--rule", "corollary", "--runs-log", ""])
    doc = json.loads(capsys.readouterr().out)
    assert code == 0
    assert doc == {"rule": "corollary", "alpha": 0.25, "beta": 0.05, "admissible": True}
    jsonschema.validate(doc, cli.CONDITIONS_SCHEMA)


def test_conditions_tuple_rule(tmp_path, capsys):
    cli.main(["conditions", "--alpha", "0.1,0.2", "--rule", "squarefree", "--runs-log", ""])
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, cli.CONDITIONS_SCHEMA)
    assert doc["admissible"] is True


def test_equidist_example(tmp_path):
    code, text, _ = run_cli(tmp_path, "equidist", "--alpha", "0.5", "--moduli", "2", "--residues", "0", "--N-grid", "100")
    assert code == 0
    (row,) = rows(text)
    assert int(row["count"]) == 45
    assert int(row["etk_m"]) == 3  # floor(100^0.3)
    assert float(row["etk_bound"]) > 0


@pytest.mark.parametrize("command, extra", [
    ("sieve", []),
    ("expsum", ["--alpha", "0.5", "--h", "1"]),
    ("squarefree", ["--alpha", "0.5"]),
    ("divisor", ["--alpha", "0.3,0.6"]),
    ("sigma", ["--alpha", "0.5"]),
    ("equidist", ["--alpha", "0.3,0.7", "--moduli", "2,3", "--residues", "1,2"]),
])
def test_json_schema(tmp_path, command, extra):
    code, text, _ = run_cli(tmp_path, command, *extra, "--N-grid", "10,100,1000", "--format", "json")
    assert code == 0
    doc = json.loads(text)
    jsonschema.validate(doc, cli.ROWS_SCHEMA)
    assert doc["command"] == command and len(doc["rows"]) == 3
    assert all(len(r) == len(doc["columns"]) for r in doc["rows"])


def test_csv_header_and_digits(tmp_path):
    _, text, _ = run_cli(tmp_path, "sieve", "--N-grid", "10")
    header, line = text.strip().splitlines()
    assert header.startswith("x,psi")
    assert line.split(",")[1] == "%.15g" % 7.832014180505469 or float(line.split(",")[1]) == pytest.approx(7.83201418)


def test_manifest(tmp_path):
    code, text, log = run_cli(tmp_path, "expsum", "--alpha", "0.5", "--h", "1", "--N-grid", "1e3,1e4,1e5,1e6")
    assert code == 0
    run_cli(tmp_path, "squarefree", "--alpha", "0.5", "--N-grid", "100")
    lines = log.read_text().splitlines()
    assert len(lines) == 2
    first = json.loads(lines[0])
    import hashlib
    assert first["output_sha256"] == hashlib.sha256(text.encode()).hexdigest()
    assert first["config"]["n_grid"] == [1000, 10000, 100000, 1000000]
    assert set(first["wall_time"]) == {"1000", "10000", "100000", "1000000"}
    assert first["fit"]["slope"] <= 0.725
    assert first["version"] and "fallback_triggers" in first


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["primes", "--alpha", "abc", "--N-grid", "10"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["primes", "--alpha", "0.5", "--N-grid", "100,10"])
    assert exc.value.code == 2


def test_module_errors_exit_1(tmp_path, capsys):
    code, _, _ = run_cli(tmp_path, "equidist", "--alpha", "0.5", "--moduli", "2", "--residues", "5", "--N-grid", "10")
    assert code == 1
    assert "fplab: error:" in capsys.readouterr().err
    code, _, _ = run_cli(tmp_path, "conditions", "--alpha", "0.1,0.3", "--rule", "corollary")
    assert code == 1


def test_table_cache(tmp_path):
    cache = tmp_path / "tables.bin"
    code, first, _ = run_cli(tmp_path, "divisor", "--alpha", "0.5", "--N-grid", "100,10000", "--table-cache", str(cache))
    assert code == 0 and cache.exists()
    code, again, _ = run_cli(tmp_path, "divisor", "--alpha", "0.5", "--N-grid", "100", "--table-cache", str(cache))
    assert rows(again)[0] == rows(first)[0]


def test_exact_flag_identical(tmp_path):
    _, fast, _ = run_cli(tmp_path, "primes", "--alpha", "0.3,0.5", "--N-grid", "1000,20000")
    _, exact, _ = run_cli(tmp_path, "primes", "--alpha", "0.3,0.5", "--N-grid", "1000,20000", "--exact")
    assert fast == exact


def test_lemma2_and_validate(tmp_path):
    code, text, _ = run_cli(tmp_path, "lemma2", "--count", "5", "--seed", "2")
    assert code == 0 and len(rows(text)) == 5
    assert all(r["holds"] == "true" for r in rows(text))


def test_module_entry_point(tmp_path):
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "fplab", "conditions", "--alpha", "0.4", "--runs-log", ""],
                          capture_output=True, text=True, env=env, cwd=tmp_path)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["admissible"] is True


def test_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["equidist", "--alpha", "0.25,0.5", "--moduli", "3,4", "--residues", "1,3", "--N-grid", "1000,150000",
            "--runs-log", ""]
    cli.main(args + ["-o", str(a)])
    cli.main(args + ["-o", str(b)])
    assert a.read_bytes() == b.read_bytes()
