from __future__ import annotations

import sys
from dataclasses import dataclass

import pytest

from tml.evaluate import evaluate
from tml.parser import parse_env, parse_expr
from tml.prelude import RUNNING_F_SRC, prelude_env
from tml.syntax import Env, Trace, Value


@dataclass(frozen=True)
class Traced:
    env: Env
    value: Value
    trace: Trace


def run(src: str, env: str | Env = "[]") -> Traced:
    gamma = parse_env(env) if isinstance(env, str) else env
    v, t = evaluate(gamma, parse_expr(src))
    return Traced(gamma, v, t)


def running_env(y: int = 2, xs: str = "[1,2,3]") -> Env:
    """map, the closure f (with y free) and a list xs."""
    f, _ = evaluate(Env({"y": parse_env(f"[y={y}]")["y"]}), parse_expr(RUNNING_F_SRC))
    return Env({**prelude_env(), "f": f, "xs": parse_env(f"[xs={xs}]")["xs"]})


@pytest.fixture
def map_run() -> Traced:
    return run("map f xs", running_env())


@pytest.fixture
def swap_run() -> Traced:
    return run("let x = (y, z) in (snd x, fst x)", "[y=2, z=1]")


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
