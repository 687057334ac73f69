import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from freefield import cli, suites
from freefield.report import FAIL, SKIPPED, CheckReport, parse_ndjson
from freefield.suites import Options, run_suite, sample_levels


def main(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list(capsys):
    code, out, _ = main(["list"], capsys)
    assert code == 0
    assert out.split() == list(suites.SUITES)


def test_text_report_and_exit_code(capsys):
    code, out, _ = main(["sl2.critical"], capsys)
    assert code == 0
    assert out.splitlines()[-1].startswith("# total: 33 rows, 0 failed")


def test_ndjson_report_file_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
    assert main(["sl2.wakimoto", "osp.pomoc1", "--report", str(a), "--format", "ndjson"], capsys)[0] == 0
    assert main(["osp.pomoc1", "sl2.wakimoto", "--report", str(b)], capsys)[0] == 0
    ra, rb = parse_ndjson(a.read_text()), parse_ndjson(b.read_text())
    # rows follow the order suites were named, each suite internally stable
    key = lambda r: (r["suite"], r["check"], json.dumps(r["params"], sort_keys=True))
    assert sorted(ra, key=key) == sorted(rb, key=key)
    again = tmp_path / "c.ndjson"
    main(["sl2.wakimoto", "osp.pomoc1", "--report", str(again)], capsys)
    assert again.read_text() == a.read_text()
    row = ra[0]
    assert set(row) == {"schema", "suite", "check", "identity", "field", "truncation", "params", "status",
                        "witness"}


def test_timings_only_on_request(tmp_path, capsys):
    path = tmp_path / "t.ndjson"
    main(["osp.pomoc1", "--report", str(path), "--timings"], capsys)
    assert all("seconds" in r for r in parse_ndjson(path.read_text()))


def test_failures_give_exit_one_and_witness(monkeypatch, capsys):
    def broken(opts):
        rep = CheckReport("sl2.critical", "Q")
        rep.scalars("one equals two", "1 = 2", F(1), F(2))
        return rep

    monkeypatch.setitem(suites.SUITES, "sl2.critical", broken)
    code, out, _ = main(["sl2.critical", "--format", "ndjson"], capsys)
    assert code == 1
    row = parse_ndjson(out)[0]
    assert row["status"] == FAIL and row["witness"] == "1 != 2"


def test_skipped_rows_never_fail(monkeypatch, capsys):
    monkeypatch.setattr(suites, "sample_levels", lambda opts: [F(-2), F(1, 3)])
    code, out, _ = main(["sl2.wakimoto", "--field", "samples", "--format", "ndjson"], capsys)
    rows = parse_ndjson(out)
    assert code == 0
    assert [r["status"] for r in rows].count(SKIPPED) == 1
    skipped = next(r for r in rows if r["status"] == SKIPPED)
    assert skipped["params"]["k"] == "-2"
    assert all(r["params"]["k"] == "1/3" for r in rows if r["status"] != SKIPPED)


def test_sampling_is_seeded_and_avoids_excluded():
    a = sample_levels(Options(k_samples=9, seed=4))
    assert a == sample_levels(Options(k_samples=9, seed=4))
    assert a != sample_levels(Options(k_samples=9, seed=5))
    assert len(set(a)) == 9
    assert not set(a) & {F(0), F(-2), F(-3, 2)}
    b = sample_levels(Options(k_samples=4, excluded_k=tuple(a[:2]), seed=4))
    assert not set(b) & set(a[:2])


def test_samples_mode_runs_numeric_levels():
    rep = run_suite("osp.pomoc1", Options(field="samples", k_samples=3, seed=2))
    assert len(rep.rows) == 9
    assert all("k" in r.params and r.params["k_samples"] == 3 for r in rep.rows)
    assert rep.rows[0].field == "Q"


def test_config_file(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "verify.cfg"
    cfg.write_text("# sample configuration\nsuites = osp.pomoc1\nreport_format = ndjson\nseed = 3\n\n")
    monkeypatch.setenv(cli.CONFIG_ENV, str(cfg))
    code, out, _ = main([], capsys)
    assert code == 0 and len(parse_ndjson(out)) == 3
    # command-line flags win over the file
    code, out, _ = main(["--format", "text"], capsys)
    assert out.splitlines()[-1].startswith("# total: 3 rows")


def test_empty_config_gives_defaults(tmp_path):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("")
    assert cli.load_config(str(cfg)) == Options()


@pytest.mark.parametrize("text, message", [
    ("colour = blue\n", "unknown key"),
    ("truncation = three\n", "expected an integer"),
    ("truncation = -1\n", "non-negative"),
    ("report_format = xml\n", "expected text or ndjson"),
    ("excluded_k = 1/0\n", "expected rationals"),
    ("suites = nope\n", "unknown suite"),
    ("seed = 1\nseed = 2\n", "duplicate key"),
    ("just words\n", "expected 'key = value'"),
])
def test_config_errors(text, message):
    with pytest.raises(cli.ConfigError, match=message):
        cli.parse_config(text)


def test_config_values():
    opts = cli.parse_config("truncation = 2\nk_samples = 3\nexcluded_k = -2, 1/2\nsuites = all\n")
    assert opts.truncation == 2 and opts.k_samples == 3
    assert opts.excluded_k == (F(-2), F(1, 2))
    assert opts.suites == ("all",)


def test_bad_arguments(tmp_path, capsys):
    assert main(["no.such.suite"], capsys)[0] == 2
    assert main([], capsys)[0] == 2
    assert main(["sl2.critical", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2
    assert main(["sl2.critical", "--truncation", "-3"], capsys)[0] == 2


def test_truncation_flag_reaches_suites(capsys):
    code, out, _ = main(["mod.logarithmic", "--truncation", "2", "--format", "ndjson"], capsys)
    assert code == 0
    assert {r["truncation"] for r in parse_ndjson(out)} == {2}


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "freefield.cli", "osp.pomoc1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "# total: 3 rows, 0 failed, 0 skipped" in proc.stdout
