import pytest

from privfilter.case import AUDIT_FILE, load_case
from privfilter.cli import EXIT_EXPORT, EXIT_OK, EXIT_USAGE, main
from privfilter.corpus import LAWYER, generate
from privfilter.pdf import image_only_pdf


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    assert main(["gen-corpus", "--out", str(base / "gen"), "--seed", "0"]) == EXIT_OK
    assert main(["ingest", "--root", str(base / "gen" / "evidence"), "--case", str(base / "case")]) == EXIT_OK
    return base


def _copy_case(built, tmp_path):
    import shutil
    shutil.copytree(built / "case", tmp_path / "case")
    return tmp_path / "case"


def test_missing_case(tmp_path, capsys):
    assert main(["report", "--case", str(tmp_path / "nothing")]) == EXIT_USAGE
    assert main(["filter", "--case", str(tmp_path / "nothing"), "--seed-address", LAWYER]) == EXIT_USAGE


def test_usage_errors(built, capsys):
    case = str(built / "case")
    assert main(["filter", "--case", case, "--seed-address", LAWYER, "--seed-item", "x"]) == EXIT_USAGE
    assert main(["filter", "--case", case, "--seed-address", LAWYER, "--threshold", "1.1"]) == EXIT_USAGE
    assert "Searching" not in capsys.readouterr().out
    assert main(["filter", "--case", case, "--apply", "--dry-run", "--seed-address", LAWYER]) == EXIT_USAGE
    assert main(["baseline", "--case", case, "--mode", "keywords", "--seed-address", LAWYER]) == EXIT_USAGE
    assert main(["search", "--case", case, "--md5", "nothex"]) == EXIT_USAGE
    assert main(["ingest", "--root", "x", "--case", case, "--bogus"]) == EXIT_USAGE


def test_baselines(built, capsys):
    case = str(built / "case")
    main(["baseline", "--case", case, "--mode", "metadata", "--seed-address", LAWYER])
    main(["baseline", "--case", case, "--mode", "email-only", "--seed-address", LAWYER])
    main(["baseline", "--case", case, "--mode", "metadata", "--seed-address", "nobody@nowhere.ext"])
    out = capsys.readouterr().out.splitlines()
    assert out == ["baseline=metadata total=22 unique=10", "baseline=email-only total=13 unique=6",
                   "baseline=metadata total=0 unique=0"]


def test_unwritable_export_dir(built, tmp_path, capsys):
    blocker = tmp_path / "f"
    blocker.write_text("")
    rc = main(["filter", "--case", str(built / "case"), "--seed-address", LAWYER,
               "--export-dir", str(blocker / "x")])
    assert rc == EXIT_EXPORT
    assert "Searching" not in capsys.readouterr().out


def test_dry_run_changes_nothing(built, tmp_path, capsys):
    case = _copy_case(built, tmp_path)
    audit = (case / AUDIT_FILE).read_bytes()
    rc = main(["filter", "--case", str(case), "--seed-address", LAWYER, "--export-dir", str(tmp_path / "out")])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "Privileged items: 32 (13 unique)" in out and "Dry run" in out
    assert (case / AUDIT_FILE).read_bytes() == audit
    assert load_case(case).excluded == set()


def test_zero_findings_is_success(built, tmp_path, capsys):
    rc = main(["filter", "--case", str(built / "case"), "--seed-address", "nobody@nowhere.ext",
               "--export-dir", str(tmp_path / "out")])
    assert rc == EXIT_OK
    assert "No privileged items found" in capsys.readouterr().out


def test_apply_and_report(built, tmp_path, capsys):
    case = _copy_case(built, tmp_path)
    main(["report", "--case", str(case)])
    fresh = capsys.readouterr().out
    assert "Custodians: 0" in fresh and "Excluded items: 0" in fresh
    rc = main(["filter", "--case", str(case), "--seed-address", LAWYER, "--apply",
               "--custodian", "Privileged lawyer", "--export-dir", str(tmp_path / "out")])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "Exporting file 0 of 13: 0_" in out
    assert "Export complete: 13 unique privileged items written (32 privileged items in total)" in out
    main(["report", "--case", str(case)])
    report = capsys.readouterr().out
    assert "  Privileged lawyer: 32 items, 13 unique" in report
    assert "Excluded items: 32" in report
    # re-running with the same seed now finds only excluded seeds
    main(["filter", "--case", str(case), "--seed-address", LAWYER, "--export-dir", str(tmp_path / "o2")])
    assert "already excluded" in capsys.readouterr().out


def test_search_escape_hatch(built, tmp_path, capsys):
    case = _copy_case(built, tmp_path)
    main(["filter", "--case", str(case), "--seed-address", LAWYER, "--apply", "--export-dir", str(tmp_path / "o")])
    capsys.readouterr()
    assert main(["search", "--case", str(case), "--address", LAWYER]) == EXIT_OK
    assert capsys.readouterr().out == "results=0\n"
    main(["search", "--case", str(case), "--address", LAWYER, "--include-excluded"])
    assert capsys.readouterr().out.startswith("results=22\n")
    assert load_case(case).audit_log[-1].action == "search_include_excluded"


def test_seed_items(built, tmp_path, capsys):
    loaded = load_case(built / "case")
    guid = next(i.guid for i in loaded.corpus.items.values() if i.source_path == "Suspect/Desktop/file1.docx")
    rc = main(["filter", "--case", str(built / "case"), "--seed-item", guid, "--export-dir", str(tmp_path / "o")])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "Found 1 selected items" in out
    assert main(["filter", "--case", str(built / "case"), "--seed-item", "nope",
                 "--export-dir", str(tmp_path / "o")]) == EXIT_USAGE


def test_unsearchable_pdf_is_reported(tmp_path, capsys):
    generate(tmp_path / "gen", rng_seed=0)
    (tmp_path / "gen" / "evidence" / "Suspect" / "Desktop" / "scan.pdf").write_bytes(
        image_only_pdf(b"\xff\xd8\xff\xd9"))
    main(["ingest", "--root", str(tmp_path / "gen" / "evidence"), "--case", str(tmp_path / "case")])
    main(["report", "--case", str(tmp_path / "case")])
    main(["filter", "--case", str(tmp_path / "case"), "--seed-address", LAWYER,
          "--export-dir", str(tmp_path / "o")])
    out = capsys.readouterr().out
    assert "Unsearchable PDF items: 1" in out
    assert out.count("OCR") >= 2


def test_ingest_refuses_existing_case(built, capsys):
    rc = main(["ingest", "--root", str(built / "gen" / "evidence"), "--case", str(built / "case")])
    assert rc == 1


def test_prompt_for_address_on_tty(built, tmp_path, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin.isatty", lambda: True)
    monkeypatch.setattr("builtins.input", lambda prompt: LAWYER)
    rc = main(["filter", "--case", str(built / "case"), "--export-dir", str(tmp_path / "o")])
    assert rc == EXIT_OK
    assert "Privileged items: 32 (13 unique)" in capsys.readouterr().out


def test_no_seed_without_tty(built, tmp_path, monkeypatch):
    monkeypatch.setattr("sys.stdin.isatty", lambda: False)
    assert main(["filter", "--case", str(built / "case"), "--export-dir", str(tmp_path / "o")]) == EXIT_USAGE
