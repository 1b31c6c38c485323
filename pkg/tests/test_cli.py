"""Command line tests: job file validation, exit codes, artifact layout,
and the scripted end-to-end repair path."""

import json
import shutil
import subprocess

import pytest

from crashrepair.cli import allocate_run_dir, main
from crashrepair.config import ConfigError, load_config
from crashrepair.patching import PatchFormatError, patches_from_json

HAVE_TOOLS = shutil.which("gdb") is not None and shutil.which("gcc") is not None
needs_debugger = pytest.mark.skipif(not HAVE_TOOLS, reason="needs gcc and gdb")

DIV_C = """\
#include <stdio.h>

int divide(int a, int b) {
    return a / b;
}

int middle(int a, int b) {
    return divide(a, b);
}

int main(void) {
    printf("%d\\n", middle(10, 0));
    return 0;
}
"""
DIV_LINE = DIV_C.splitlines().index("    return a / b;") + 1
GOOD_FIX = "    return b == 0 ? 0 : a / b;"

CLEAN_C = """\
#include <stdio.h>

int main(void) {
    printf("fine\\n");
    return 0;
}
"""

UNDERFLOW_GUARD_CFC = """\
@ src/read_file.c:31
(And (Or (Not (Eq false (Eq 18446744073709551615 initial_read)))
         (Ule 0 (Sub initial_read start)))
     (Or (Not (And (Eq 18446744073709551615 initial_read)
                   (Ult start 18446744073709551615)))
         (Ule 0 (Sub initial_read start))))
"""


def write_job(tmp_path, source=DIV_C, name="div.c", **overrides):
    root = tmp_path / "proj"
    root.mkdir(exist_ok=True)
    (root / name).write_text(source)
    job = {
        "project": {
            "root": "proj",
            "build_cmd": f"gcc -g -O0 -o app {name}",
            "run_cmd": "./app",
        },
        "output_dir": "runs",
    }
    job.update(overrides)
    path = tmp_path / "job.json"
    path.write_text(json.dumps(job, indent=2))
    return path


def write_script(tmp_path, turns, name="script.json"):
    path = tmp_path / name
    path.write_text(json.dumps(turns, indent=2))
    return path


def repair_script():
    return [
        {
            "tool_calls": [
                {
                    "name": "report_summary",
                    "arguments": {
                        "root_cause": "main passes a zero denominator into divide",
                        "fix_locations": [
                            {
                                "file": "div.c",
                                "line": DIV_LINE,
                                "rationale": "guard the division",
                            }
                        ],
                    },
                }
            ],
            "expect": ["Crash class: div-by-zero"],
        },
        {
            "content": f"```edit\nfile: div.c\nreplace: {DIV_LINE}\n{GOOD_FIX}\n```",
            "expect": ["Root cause:"],
        },
    ]


def run_dirs(tmp_path):
    runs = tmp_path / "runs"
    return sorted(p for p in runs.iterdir() if p.is_dir()) if runs.is_dir() else []


# -- job file parsing ---------------------------------------------------------


def test_config_defaults(tmp_path):
    path = write_job(tmp_path)
    config = load_config(str(path))
    assert config.project.build_timeout_s == 120.0
    assert config.project.run_timeout_s == 30.0
    assert config.llm.backend == "scripted"
    assert config.llm.temperature == 0.2
    assert config.caps.max_debug_rounds == 16
    assert config.caps.max_patch_attempts == 3
    assert config.caps.max_debug_phases == 2
    assert config.debugger.executable == "gdb"
    assert config.debugger.extra_flags == ()
    assert config.cfc_file is None


def test_config_resolves_paths_against_job_file(tmp_path):
    path = write_job(tmp_path)
    config = load_config(str(path))
    assert config.project.root == str(tmp_path / "proj")
    assert config.output_dir == str(tmp_path / "runs")


def test_config_rejects_unknown_keys(tmp_path):
    path = write_job(tmp_path, retries=5)
    with pytest.raises(ConfigError, match="unknown key.*retries"):
        load_config(str(path))


def test_config_rejects_unknown_nested_keys(tmp_path):
    path = write_job(tmp_path, llm={"backend": "scripted", "seed": 7})
    with pytest.raises(ConfigError, match="unknown key.*llm"):
        load_config(str(path))


def test_config_rejects_negative_timeout(tmp_path):
    path = write_job(tmp_path)
    job = json.loads(path.read_text())
    job["project"]["run_timeout_s"] = -1
    path.write_text(json.dumps(job))
    with pytest.raises(ConfigError, match="timeouts must be positive"):
        load_config(str(path))


def test_config_rejects_bad_types_and_values(tmp_path):
    for patch in [
        {"llm": {"temperature": "hot"}},
        {"llm": {"temperature": 3.5}},
        {"llm": {"backend": "psychic"}},
        {"llm": {"backend": "openai"}},  # no base_url
        {"caps": {"max_debug_rounds": 0}},
        {"caps": {"max_patch_attempts": True}},
        {"debugger": {"extra_flags": "-q"}},
        {"project": {"root": "proj", "build_cmd": "", "run_cmd": "./app"}},
    ]:
        path = write_job(tmp_path, **patch)
        with pytest.raises(ConfigError):
            load_config(str(path))


def test_config_missing_required_key(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"project": {"root": "x", "build_cmd": "make"}}))
    with pytest.raises(ConfigError, match="missing required key: project.run_cmd"):
        load_config(str(path))


def test_config_bad_json_and_missing_file(tmp_path):
    path = tmp_path / "job.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(str(path))
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "absent.json"))


def test_config_accepts_null_cfc_file(tmp_path):
    path = write_job(tmp_path, cfc_file=None)
    assert load_config(str(path)).cfc_file is None


def test_config_caps_and_debugger_sections(tmp_path):
    path = write_job(
        tmp_path,
        caps={"max_debug_rounds": 4, "max_patch_attempts": 1, "max_debug_phases": 1},
        debugger={"executable": "gdb-multiarch", "extra_flags": ["-q"]},
    )
    config = load_config(str(path))
    assert config.caps.max_debug_rounds == 4
    assert config.debugger.executable == "gdb-multiarch"
    assert config.debugger.extra_flags == ("-q",)


# -- stored patch decoding ------------------------------------------------------


def test_patches_from_json_single_and_list():
    single = patches_from_json(
        {"file": "a.c", "start_line": 3, "replacement": "x = 1;"}
    )
    assert (single[0].start_line, single[0].end_line) == (3, 3)
    pair = patches_from_json(
        [
            {"file": "a.c", "start_line": 3, "end_line": 5, "replacement": ""},
            {"file": "a.c", "start_line": 9, "replacement": "y;", "insertion": True},
        ]
    )
    assert pair[1].insertion


def test_patches_from_json_rejects_bad_shapes():
    with pytest.raises(PatchFormatError, match="no edits"):
        patches_from_json([])
    with pytest.raises(PatchFormatError, match="missing start_line"):
        patches_from_json({"file": "a.c"})
    with pytest.raises(PatchFormatError, match="unknown key"):
        patches_from_json({"file": "a.c", "start_line": 1, "lines": "1-2"})
    with pytest.raises(PatchFormatError, match="wrongly typed"):
        patches_from_json({"file": "a.c", "start_line": "3"})
    with pytest.raises(PatchFormatError, match="edit 1"):
        patches_from_json({"file": "a.c", "start_line": 0})


# -- exit codes without a toolchain ---------------------------------------------


def test_translate_prints_simplified_constraint(tmp_path, capsys):
    path = tmp_path / "guard.cfc"
    path.write_text(UNDERFLOW_GUARD_CFC)
    assert main(["cfc", "translate", str(path)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == [
        "(Ult start initial_read)",
        "Variable start should be less than variable initial_read",
    ]


def test_translate_missing_and_invalid_files(tmp_path, capsys):
    assert main(["cfc", "translate", str(tmp_path / "ghost.cfc")]) == 2
    bad = tmp_path / "bad.cfc"
    bad.write_text("(Frob x y)")
    assert main(["cfc", "translate", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_repair_config_error_exit_code(tmp_path, capsys):
    path = write_job(tmp_path)
    job = json.loads(path.read_text())
    job["project"]["build_timeout_s"] = -5
    path.write_text(json.dumps(job))
    assert main(["repair", str(path)]) == 2
    assert "timeouts must be positive" in capsys.readouterr().err


def test_repair_requires_script_for_scripted_backend(tmp_path, capsys):
    path = write_job(tmp_path)
    assert main(["repair", str(path)]) == 2
    assert "--scripted" in capsys.readouterr().err


def test_repair_missing_debugger_exit_code(tmp_path, capsys):
    path = write_job(tmp_path, debugger={"executable": "no-such-debugger-xyz"})
    script = write_script(tmp_path, [])
    assert main(["repair", str(path), "--scripted", str(script)]) == 3
    assert "debugger not found" in capsys.readouterr().err


def test_repair_missing_project_root_exit_code(tmp_path, capsys):
    path = write_job(tmp_path)
    shutil.rmtree(tmp_path / "proj")
    script = write_script(tmp_path, [])
    assert main(["repair", str(path), "--scripted", str(script)]) == 3
    assert "project root not found" in capsys.readouterr().err


def test_repair_unreadable_script_is_config_error(tmp_path, capsys):
    path = write_job(tmp_path)
    assert main(["repair", str(path), "--scripted", str(tmp_path / "ghost.json")]) == 2
    assert "cannot load script file" in capsys.readouterr().err


def test_validate_bad_patch_file_exit_code(tmp_path, capsys):
    path = write_job(tmp_path)
    patch = tmp_path / "fix.json"
    patch.write_text(json.dumps({"file": "div.c"}))
    assert main(["validate", str(path), str(patch)]) == 2
    assert "missing start_line" in capsys.readouterr().err


def test_run_dirs_never_collide(tmp_path, monkeypatch):
    monkeypatch.setattr("crashrepair.cli.time.strftime", lambda fmt: "20260101-000000")
    first = allocate_run_dir(str(tmp_path / "runs"), "repair")
    second = allocate_run_dir(str(tmp_path / "runs"), "repair")
    assert first != second
    assert first.is_dir() and second.is_dir()


# -- live paths -----------------------------------------------------------------


@needs_debugger
def test_repair_scripted_end_to_end(tmp_path, capsys):
    job = write_job(tmp_path)
    script = write_script(tmp_path, repair_script())
    assert main(["repair", str(job), "--scripted", str(script)]) == 0
    out = capsys.readouterr().out
    assert "crash: div-by-zero" in out
    assert "fixed: patch accepted on attempt 1 of phase 1" in out

    (run_dir,) = run_dirs(tmp_path)
    for name in (
        "crash.json",
        "cfc.json",
        "transcript.jsonl",
        "summary.json",
        "attempts.json",
        "patch.diff",
    ):
        assert (run_dir / name).is_file(), name
    crash = json.loads((run_dir / "crash.json").read_text())
    assert crash["crash_class"] == "div-by-zero"
    cfc = json.loads((run_dir / "cfc.json").read_text())
    assert cfc["available"] is True
    summary = json.loads((run_dir / "summary.json").read_text())
    assert summary["fix_locations"] == [
        {"file": "div.c", "line": DIV_LINE, "rationale": "guard the division"}
    ]
    attempts = json.loads((run_dir / "attempts.json").read_text())
    assert attempts["status"] == "fixed"
    diff = (run_dir / "patch.diff").read_text()
    assert "-    return a / b;" in diff and f"+{GOOD_FIX}" in diff
    for line in (run_dir / "transcript.jsonl").read_text().splitlines():
        json.loads(line)


@needs_debugger
def test_repair_reruns_use_fresh_directories(tmp_path):
    job = write_job(tmp_path)
    script = write_script(tmp_path, repair_script())
    assert main(["repair", str(job), "--scripted", str(script)]) == 0
    assert main(["repair", str(job), "--scripted", str(script)]) == 0
    dirs = run_dirs(tmp_path)
    assert len(dirs) == 2
    assert len({d.name for d in dirs}) == 2


@needs_debugger
def test_repair_dry_run_stops_before_the_loop(tmp_path, capsys):
    job = write_job(tmp_path)
    script = write_script(tmp_path, [])
    assert main(["repair", str(job), "--dry-run", "--scripted", str(script)]) == 0
    out = capsys.readouterr().out
    assert "dry run" in out
    (run_dir,) = run_dirs(tmp_path)
    assert (run_dir / "crash.json").is_file()
    assert (run_dir / "cfc.json").is_file()
    assert not (run_dir / "transcript.jsonl").exists()


@needs_debugger
def test_repair_exhausted_exit_code(tmp_path, capsys):
    job = write_job(
        tmp_path,
        caps={"max_debug_rounds": 16, "max_patch_attempts": 1, "max_debug_phases": 1},
    )
    turns = repair_script()
    turns[1]["content"] = f"```edit\nfile: div.c\nreplace: {DIV_LINE}\n    return a / b;\n```"
    script = write_script(tmp_path, turns)
    assert main(["repair", str(job), "--scripted", str(script)]) == 1
    assert "exhausted: 1 patch attempts failed" in capsys.readouterr().out


@needs_debugger
def test_repair_no_cfc_keeps_transcript_clean(tmp_path):
    job = write_job(tmp_path)
    turns = repair_script()
    turns[0]["expect"] = ["Crash class: div-by-zero"]
    script = write_script(tmp_path, turns)
    assert main(["repair", str(job), "--no-cfc", "--scripted", str(script)]) == 0
    (run_dir,) = run_dirs(tmp_path)
    transcript = (run_dir / "transcript.jsonl").read_text()
    assert "should not be equal to zero" not in transcript
    assert "crash-free constraint" not in transcript
    cfc = json.loads((run_dir / "cfc.json").read_text())
    assert cfc == {"available": False, "reason": "disabled by --no-cfc"}


@needs_debugger
def test_triage_crashing_and_clean_pocs(tmp_path, capsys):
    job = write_job(tmp_path)
    assert main(["triage", str(job)]) == 0
    assert "crash: div-by-zero at div.c:4" in capsys.readouterr().out

    clean_dir = tmp_path / "clean"
    clean_dir.mkdir()
    clean_job = write_job(clean_dir, source=CLEAN_C)
    assert main(["triage", str(clean_job)]) == 1
    assert "no crash" in capsys.readouterr().out
    (run_dir,) = run_dirs(clean_dir)
    crash = json.loads((run_dir / "crash.json").read_text())
    assert crash["kind"] == "no-crash"


@needs_debugger
def test_validate_good_and_bad_patches(tmp_path, capsys):
    job = write_job(tmp_path)
    good = tmp_path / "good.json"
    good.write_text(
        json.dumps(
            {
                "file": "div.c",
                "start_line": DIV_LINE,
                "end_line": DIV_LINE,
                "replacement": GOOD_FIX,
            }
        )
    )
    assert main(["validate", str(job), str(good)]) == 0
    assert "the patch fixed the crash" in capsys.readouterr().out

    noop = tmp_path / "noop.json"
    noop.write_text(
        json.dumps(
            {
                "file": "div.c",
                "start_line": DIV_LINE,
                "end_line": DIV_LINE,
                "replacement": "    return a / b;",
            }
        )
    )
    assert main(["validate", str(job), str(noop)]) == 1
    assert "still crashes" in capsys.readouterr().out


@needs_debugger
def test_repair_with_external_constraint_file(tmp_path, capsys):
    cfc_path = tmp_path / "guard.cfc"
    cfc_path.write_text("(Ne b 0)")
    job = write_job(tmp_path, cfc_file="guard.cfc")
    turns = repair_script()
    turns[0]["expect"] = ["b should not be equal to 0"]
    script = write_script(tmp_path, turns)
    assert main(["repair", str(job), "--scripted", str(script)]) == 0
    assert "constraint:" in capsys.readouterr().out
