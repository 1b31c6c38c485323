import pytest

from crashrepair.cindex import (
    DeclarationOnlyError,
    MissingFileError,
    PathEscapeError,
    SourceIndex,
    UnknownSymbolError,
    mask_source,
)

SAMPLE_C = """\
#include <stdio.h>

#define MAX_SAMPLES 8

typedef unsigned short uint16;
/* one sample per channel */
typedef uint16 tsample_t;

int global_count = 0;
static char buffer[MAX_SAMPLES];

int helper(int x);

/* Convert one raster row.
   Returns nonzero on success. */
int convert_row(tsample_t spp) {
    int s;
    for (s = 0; s < spp; s++) {
        buffer[s] = (char) s; /* writes past the end when spp > 8 */
    }
    return s;
}

int main(int argc, char **argv) {
    (void) argv;
    return convert_row((tsample_t) (argc + 8));
}
"""

OTHER_C = """\
#define MAX_SAMPLES 16

int helper(int x) {
    return x + MAX_SAMPLES;
}
"""


@pytest.fixture
def project(tmp_path):
    (tmp_path / "src").mkdir()
    (tmp_path / "src" / "sample.c").write_text(SAMPLE_C)
    (tmp_path / "src" / "other.c").write_text(OTHER_C)
    return tmp_path


def test_file_content_numbering(project):
    index = SourceIndex(project)
    out = index.get_file_content("src/sample.c", 16, 18)
    lines = out.split("\n")
    assert lines[0] == "16: int convert_row(tsample_t spp) {"
    assert lines[1] == "17:     int s;"
    # stripping the prefixes reproduces the raw slice byte for byte
    raw = SAMPLE_C.split("\n")[15:18]
    stripped = [line.split(": ", 1)[1] for line in lines]
    assert stripped == raw


def test_file_content_clamps_with_notice(tmp_path):
    (tmp_path / "tiny.c").write_text("int a;\nint b;\nint c;\n")
    index = SourceIndex(tmp_path)
    out = index.get_file_content("tiny.c", 4, 5)
    assert out.startswith("[requested lines 4-5 clamped to 3-3; file has 3 lines]")
    assert out.endswith("3: int c;")


def test_file_content_rejects_escape_and_missing(project):
    index = SourceIndex(project)
    with pytest.raises(PathEscapeError):
        index.get_file_content("../../etc/hosts", 1, 2)
    with pytest.raises(MissingFileError):
        index.get_file_content("src/nope.c", 1, 2)
    with pytest.raises(ValueError):
        index.get_file_content("src/sample.c", 3, 2)


def test_definition_macro(project):
    index = SourceIndex(project)
    defs = index.definition("MAX_SAMPLES")
    assert len(defs) == 2
    assert all(d["kind"] == "macro" for d in defs)
    assert any("#define MAX_SAMPLES 8" in d["text"] for d in defs)


def test_definition_ranked_crash_file_first(project):
    index = SourceIndex(project, crash_file="src/other.c")
    defs = index.definition("MAX_SAMPLES")
    assert defs[0]["location"].file == "src/other.c"
    index2 = SourceIndex(project, crash_file="src/sample.c")
    assert index2.definition("MAX_SAMPLES")[0]["location"].file == "src/sample.c"


def test_definition_unknown_symbol(project):
    index = SourceIndex(project)
    with pytest.raises(UnknownSymbolError):
        index.definition("no_such_name")


def test_summary_typedef_chain(project):
    index = SourceIndex(project)
    info = index.summary("tsample_t")
    assert info["alias_chains"]["tsample_t"] == ["tsample_t", "uint16", "unsigned short"]
    assert info["comment"] == "/* one sample per channel */"


def test_summary_function_comment_verbatim(project):
    index = SourceIndex(project)
    info = index.summary("convert_row")
    assert info["comment"] == "/* Convert one raster row.\n   Returns nonzero on success. */"
    assert "convert_row" in info["signature"]
    # the parameter's typedef is resolved too
    assert info["alias_chains"]["tsample_t"][-1] == "unsigned short"


def test_summary_symbol_without_comment(project):
    index = SourceIndex(project)
    assert SourceIndex(project).summary("global_count")["comment"] == ""
    assert index.summary("uint16")["alias_chains"]["uint16"] == ["uint16", "unsigned short"]


def test_function_body_extent(project):
    index = SourceIndex(project)
    body = index.function_body("convert_row")
    assert body["file"] == "src/sample.c"
    assert body["start_line"] == 16
    assert body["end_line"] == 22
    text_lines = body["text"].split("\n")
    assert text_lines[0].startswith("16: int convert_row")
    assert text_lines[-1] == "22: }"


def test_function_body_main_includes_closing_brace(project):
    body = SourceIndex(project).function_body("main")
    assert body["text"].rstrip().endswith("}")


def test_function_body_declaration_only(tmp_path):
    (tmp_path / "proto.c").write_text("int helper(int x);\n")
    index = SourceIndex(tmp_path)
    with pytest.raises(DeclarationOnlyError):
        index.function_body("helper")
    with pytest.raises(UnknownSymbolError):
        index.function_body("absent")


def test_extent_braces_balanced(project):
    index = SourceIndex(project)
    for entries in index.symbols.values():
        for entry in entries:
            if entry.kind != "function" or entry.declaration_only:
                continue
            record_text = (project / entry.location.file).read_text()
            lines = record_text.split("\n")[entry.extent[0] - 1 : entry.extent[1]]
            masked = mask_source("\n".join(lines))
            assert masked.count("{") == masked.count("}")


def test_index_determinism(project):
    a = SourceIndex(project)
    b = SourceIndex(project)
    assert a.symbols == b.symbols


def test_refresh_picks_up_changes(project):
    index = SourceIndex(project)
    assert "new_global" not in index.symbols
    path = project / "src" / "sample.c"
    path.write_text(path.read_text() + "\nint new_global;\n")
    index.refresh()
    assert "new_global" in index.symbols


def test_global_with_initializer_indexed(project):
    index = SourceIndex(project)
    entry = index.symbols["global_count"][0]
    assert entry.kind == "global"
    assert "global_count = 0" in entry.signature
    assert index.symbols["buffer"][0].kind == "global"


def test_mask_source_hides_strings_and_comments():
    text = 'char *s = "a { b";  /* } unbalanced */  // {{{\nint x;'
    masked = mask_source(text)
    assert "{" not in masked
    assert "}" not in masked
    assert "int x;" in masked
