import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from ptqes.catalog import example1, example2
from ptqes.core import Grid
from ptqes.expr import Bindings, evaluate
from ptqes.expr.nodes import (
    Add,
    Const,
    Div,
    Func,
    IntPow,
    Mul,
    Neg,
    Param,
    Pow,
    Sub,
    X,
)

RANDOM_BINDINGS = Bindings({"p": 0.7, "q": -1.3})


def _const():
    return st.builds(
        lambda re, im: Const(complex(re, im)),
        st.sampled_from([0.5, 1.0, 2.0, -1.5, 0.25]),
        st.sampled_from([0.0, 0.0, 1.0, -0.5]),
    )


LEAVES = st.one_of(st.just(X), st.just(X), st.sampled_from([Param("p"), Param("q")]), _const())


def _extend(children):
    binary = st.sampled_from([Add, Sub, Mul, Div])
    return st.one_of(
        st.builds(lambda op, a, b: op(a, b), binary, children, children),
        st.builds(Neg, children),
        st.builds(IntPow, children, st.integers(-3, 3)),
        st.builds(lambda a, e: Pow(a, Const(complex(e))), children, st.sampled_from([0.5, 1.5, -0.5])),
        st.builds(Func, st.sampled_from(["exp", "log", "sin", "cos"]), children),
    )


def expressions(max_leaves: int = 12):
    return st.recursive(LEAVES, _extend, max_leaves=max_leaves)


def safe_eval(e, x, bindings=RANDOM_BINDINGS):
    """Evaluate, returning None on domain errors or non-finite values."""
    try:
        with np.errstate(all="ignore"):
            v = evaluate(e, x, bindings)
    except (ArithmeticError, OverflowError):
        return None
    v = np.asarray(v)
    if not np.all(np.isfinite(v)):
        return None
    return v


def central_diff4(e, x, h, bindings=RANDOM_BINDINGS):
    vals = [evaluate(e, x + k * h, bindings) for k in (-2, -1, 1, 2)]
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


@pytest.fixture(scope="session")
def grid():
    return Grid(10.0, 2001)


@pytest.fixture(scope="session")
def ex1():
    return example1(2.0, 1.0, 1, 1 - 0.5j)


@pytest.fixture(scope="session")
def ex1_model(ex1, grid):
    return ex1.build(grid)


@pytest.fixture(scope="session")
def ex2_model(grid):
    return example2(1.0, 1.0, 0.0).build(grid)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
