"""Toplevel sessions and the batch command line."""

from pathlib import Path

import pytest
from click.testing import CliRunner

from tml.cli import main
from tml.session import Session, join_continuations, run_script

GOLDEN = Path(__file__).parent / "golden"


def transcript(script: str, **kwargs) -> list[str]:
    out, _ = run_script(Session(**kwargs), join_continuations(script.splitlines()), keep_going=True)
    return out.lines


def result_of(script_name: str) -> str:
    lines = (GOLDEN / f"{script_name}.out").read_text().splitlines()
    return lines[-1]


RUNNING = """
val y = 2@L
fun f x = if x = y then y else x+1
trace (map f [1@L1,2@L2,3@L3])
"""


@pytest.mark.parametrize(
    "query, expected",
    [
        ("where it", "val it = [2@{},2@{L},4@{}]"),
        ("dependency it", "val it = [2@{L1,L},2@{L2,L},4@{L3,L}]"),
        ("expression it", "val it = [2@{L1+1},2@{L},4@{L3+1}]"),
    ],
)
def test_running_example(query, expected):
    assert transcript(RUNNING + query)[-1] == expected


def test_trace_type_lists_labels():
    assert transcript(RUNNING)[-1] == "val it = <trace> : ({L:int,L1:int,L2:int,L3:int}, int list) trace"


def test_unlabeled_trace_type():
    assert transcript("trace (1 + 2)")[-1] == "val it = <trace> : ({}, int) trace"


def test_factorial_expression():
    lines = transcript("fun h x = if x = 0 then 1 else x * h (x - 1)\ntrace (h (4@L))\nexpression it")
    assert lines[-1] == "val it = 24@{L*(L-1)*(L-2)*(L-3)*1}"


@pytest.mark.parametrize(
    "name, expected",
    [
        ("map", "val it = [2@{},2@{L},4@{}]"),
        ("pairs", "val it = [(5@L5,6),(3@L4,4),(1@L1,2)]"),
        ("h", "val it = 24@{L*(L-1)*(L-2)*(L-3)*1}"),
        ("g", "val it = [6@{L1,L2,L3},6@{L1,L2,L3}]"),
    ],
)
def test_golden_results(name, expected):
    assert result_of(name) == expected


@pytest.mark.parametrize("script", sorted(GOLDEN.glob("*.tml")), ids=lambda p: p.stem)
def test_golden_transcripts(script):
    result = CliRunner().invoke(main, ["--script", str(script), "--keep-going"])
    assert result.exit_code == 0
    assert result.output == script.with_suffix(".out").read_text()


def test_g_on_a_singleton():
    g = (GOLDEN / "g.tml").read_text().split("trace")[0]
    lines = transcript(g + "trace (g ([(1@L1,2@L2,3@L3)]))\ndependency it")
    assert lines[-1] == "val it = [6@{L1,L2,L3}]"


def test_swap_slice_in_a_session():
    lines = transcript("val y = 2\nval z = 1\nval t = trace (let x = (y, z) in (snd x, fst x))\nslice t (1,_)")
    assert lines[-2:] == ["S = let x = (_, z) in (snd(x), _)", "rho = [z=1]"]


def test_obfuscate_in_a_session():
    lines = transcript("val y = 2\nval z = 1\nval t = trace (let x = (y, z) in (snd x, fst x))\nobfuscate t [y=_]")
    assert lines[-2:] == ["p = (1,_)", "S = let x = (_, z) in (snd(x), fst(x))"]


def test_replay_with_overrides():
    lines = transcript("val x = 1\nval t = trace (x + 1)\nreplay t [x=5]")
    assert lines[-1] == "val it = 6 : int"


def test_unknown_override_is_an_error():
    assert transcript("val x = 1\nval t = trace (x + 1)\nreplay t [q=5]")[-1].startswith("error: q is not an input")


def test_errors_do_not_end_the_session():
    lines = transcript("fst 42\n1 + 1")
    assert lines[1].startswith("error: ")
    assert lines[-1] == "val it = 2 : int"


def test_type_command():
    assert transcript(":type fn x => x + 1")[-1].endswith(": int -> int")


def test_fuel_command():
    lines = transcript(":fuel 50\nfun loop x = 1 + loop (x + 1)\nloop 0")
    assert lines[-1].startswith("error: ") and "fuel" in lines[-1]


def test_save_and_load(tmp_path):
    path = tmp_path / "run.tmltrace"
    lines = transcript(RUNNING + f":save {path} it\n:load {path} u\nwhere u\ndependency u\nexpression u")
    assert [line for line in lines if line.startswith("val it")][-3:] == [
        "val it = [2@{},2@{L},4@{}]",
        "val it = [2@{L1,L},2@{L2,L},4@{L3,L}]",
        "val it = [2@{L1+1},2@{L},4@{L3+1}]",
    ]
    assert path.read_bytes().startswith(b"tmltrace/1\n")


def test_load_missing_file(tmp_path):
    assert transcript(f":load {tmp_path / 'nope'}")[-1].startswith("error: cannot read")


def test_labels_can_be_reused_across_commands():
    lines = transcript("trace (1@L + 1)\nexpression it\ntrace (5@L * 2)\nexpression it")
    assert lines[3] == "val it = 2@{L+1}"
    assert lines[-1] == "val it = 10@{L*2}"


def test_canonical_format():
    lines = transcript("trace (1 + 2)\n:show it", output_format="canonical")
    assert lines[-1] == '(TPrim "+" (tuple (TConst 1) (TConst 2)))'


def test_empty_script(tmp_path):
    script = tmp_path / "empty.tml"
    script.write_text("")
    result = CliRunner().invoke(main, ["--script", str(script)])
    assert result.exit_code == 0 and result.output == ""


def test_first_error_stops_a_batch(tmp_path):
    script = tmp_path / "bad.tml"
    script.write_text("fst 42\n1 + 1\n")
    result = CliRunner().invoke(main, ["--script", str(script)])
    assert result.exit_code == 1
    assert "val it = 2" not in result.output


def test_keep_going_reports_type_errors(tmp_path):
    script = tmp_path / "bad.tml"
    script.write_text("fst 42\n1 + 1\n")
    result = CliRunner().invoke(main, ["--script", str(script), "--keep-going"])
    assert result.exit_code == 0
    assert "error: " in result.output and result.output.endswith("val it = 2 : int\n")


def test_fuel_from_the_environment(tmp_path):
    script = tmp_path / "loop.tml"
    script.write_text("fun loop x = 1 + loop (x + 1)\nloop 0\n")
    result = CliRunner().invoke(main, ["--script", str(script)], env={"TML_FUEL": "100"})
    assert result.exit_code == 1 and "fuel" in result.output


def test_transcripts_are_deterministic():
    script = GOLDEN / "map_all.tml"
    a = CliRunner().invoke(main, ["--script", str(script), "--keep-going"]).output
    b = CliRunner().invoke(main, ["--script", str(script), "--keep-going"]).output
    assert a == b
