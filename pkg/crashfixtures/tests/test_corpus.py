"""Corpus-level checks: manifests, constraints, reference fixes, live behavior."""

import hashlib
import json
import shutil

import pytest

import crashfixtures.corpus as corpus
from crashfixtures import (
    CASES_ROOT,
    CorpusError,
    build_fixture,
    check_manifest,
    fixture_dir,
    fixture_names,
    load_constraint,
    load_manifest,
    reference_patches,
    stage_fixture,
)
from crashrepair.cfc import TemplateClass
from crashrepair.debugger import DebugSession, StopInfo
from crashrepair.project import build_project

HAVE_TOOLS = shutil.which("gdb") is not None and shutil.which("gcc") is not None
needs_debugger = pytest.mark.skipif(not HAVE_TOOLS, reason="needs gcc and gdb")

ALL_NAMES = fixture_names()


def corpus_digest() -> str:
    acc = hashlib.sha256()
    for path in sorted(CASES_ROOT.rglob("*")):
        if path.is_file():
            acc.update(str(path.relative_to(CASES_ROOT)).encode())
            acc.update(path.read_bytes())
    return acc.hexdigest()


def test_corpus_has_eight_cases():
    assert len(ALL_NAMES) == 8


@pytest.mark.parametrize("name", ALL_NAMES)
def test_case_files_exist(name):
    case = fixture_dir(name)
    manifest = load_manifest(name)
    for source in manifest.sources:
        assert (case / source).is_file()
    assert (case / manifest.poc).is_file()
    assert (case / manifest.cfc_file).is_file()
    assert (case / manifest.fix_file).is_file()
    assert (case / "build.sh").is_file()


@pytest.mark.parametrize("name", ALL_NAMES)
def test_build_script_matches_manifest(name):
    manifest = load_manifest(name)
    script = (fixture_dir(name) / "build.sh").read_text()
    assert manifest.build_cmd in script
    assert "-g" in manifest.build_cmd.split()


def test_every_crash_template_is_covered():
    seen = {load_manifest(name).template_class for name in ALL_NAMES}
    assert seen == {kind.value for kind in TemplateClass}


def test_exactly_one_case_builds_optimized():
    optimized = [
        name for name in ALL_NAMES if "-O2" in load_manifest(name).build_cmd.split()
    ]
    assert optimized == ["optimized_out"]
    assert load_manifest("optimized_out").probe is not None
    for name in ALL_NAMES:
        if name not in optimized:
            assert "-O0" in load_manifest(name).build_cmd.split()


@pytest.mark.parametrize("name", ALL_NAMES)
def test_constraint_parses_with_matching_anchor(name):
    manifest = load_manifest(name)
    doc = load_constraint(name)
    assert doc.anchor is not None
    assert doc.anchor.file == manifest.expected.file
    assert doc.nl_text


@pytest.mark.parametrize("name", ALL_NAMES)
def test_reference_fix_targets_listed_sources(name):
    manifest = load_manifest(name)
    for patch in reference_patches(name):
        assert patch.file in manifest.sources


def test_unknown_case_is_rejected():
    with pytest.raises(CorpusError, match="no such case"):
        fixture_dir("no_such_case")


def fake_case(tmp_path, monkeypatch, manifest: dict):
    case = tmp_path / "cases" / "fake_case"
    case.mkdir(parents=True)
    (case / "manifest.json").write_text(json.dumps(manifest))
    monkeypatch.setattr(corpus, "CASES_ROOT", tmp_path / "cases")
    return case


BARE_MANIFEST = {
    "name": "fake_case",
    "sources": ["src/x.c"],
    "build_cmd": "gcc -g -o app src/x.c",
    "run_cmd": "./app {poc}",
    "poc": "poc/in.txt",
    "template_class": "assert",
    "expected": {"crash_class": "assert-fail", "file": "src/x.c", "line": 1},
}


def test_manifest_rejects_unknown_keys(tmp_path, monkeypatch):
    bad = dict(BARE_MANIFEST, surprise=True)
    fake_case(tmp_path, monkeypatch, bad)
    with pytest.raises(CorpusError, match="unknown key"):
        load_manifest("fake_case")


def test_manifest_rejects_wrong_name(tmp_path, monkeypatch):
    bad = dict(BARE_MANIFEST, name="something_else")
    fake_case(tmp_path, monkeypatch, bad)
    with pytest.raises(CorpusError, match="does not match"):
        load_manifest("fake_case")


def test_manifest_rejects_missing_key(tmp_path, monkeypatch):
    bad = dict(BARE_MANIFEST)
    del bad["run_cmd"]
    fake_case(tmp_path, monkeypatch, bad)
    with pytest.raises(CorpusError, match="missing key run_cmd"):
        load_manifest("fake_case")


def test_bad_constraint_file_is_reported(tmp_path, monkeypatch):
    case = fake_case(tmp_path, monkeypatch, dict(BARE_MANIFEST))
    (case / "cfc.cfc").write_text("(Bogus x y)")
    with pytest.raises(CorpusError, match="bad constraint file"):
        load_constraint("fake_case")


def test_bad_reference_fix_is_reported(tmp_path, monkeypatch):
    case = fake_case(tmp_path, monkeypatch, dict(BARE_MANIFEST))
    (case / "fix.patch.json").write_text('{"file": "src/x.c"}')
    with pytest.raises(CorpusError, match="bad reference fix"):
        reference_patches("fake_case")


def test_staging_excludes_corpus_metadata(tmp_path):
    stage_fixture("null_deref", tmp_path / "proj")
    staged = {p.name for p in (tmp_path / "proj").iterdir()}
    assert staged == {"src", "poc", "build.sh"}


@needs_debugger
def test_staging_and_building_leave_corpus_unchanged(tmp_path):
    before = corpus_digest()
    build_fixture("div_zero_3frames", dest=str(tmp_path / "build"))
    assert corpus_digest() == before


@needs_debugger
def test_build_fixture_returns_runnable_binary(tmp_path):
    binary = build_fixture("null_deref", dest=str(tmp_path / "build"))
    assert binary.is_file()
    assert binary.stat().st_mode & 0o111


@needs_debugger
@pytest.mark.parametrize("name", ALL_NAMES)
def test_case_behaves_as_documented(name, tmp_path):
    check = check_manifest(name, dest=str(tmp_path / "stage"))
    assert check.problems == []
    assert check.ok


@needs_debugger
def test_loop_case_crashes_on_ninth_iteration(tmp_path):
    project = stage_fixture("loop_oob", tmp_path / "proj")
    assert build_project(project).ok
    session = DebugSession(project)
    try:
        stop = session.run_to_line("src/unpack.c", 15, hit_count=9)
        assert isinstance(stop, StopInfo)
        assert stop.locals["s"].text == "8"
        assert stop.locals["spp"].text == "9"
    finally:
        session.kill()
