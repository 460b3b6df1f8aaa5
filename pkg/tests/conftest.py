import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from symplan import generators, pddl  # noqa: E402

HAVE_Z3 = shutil.which("z3") is not None
needs_solver = pytest.mark.skipif(not HAVE_Z3, reason="z3 binary not on PATH")


def two_robots(x_i=1, q=1):
    return pddl.load(*generators.two_robots(x_i, q))


# the pattern of the worked example and the order of its shortest plan
EXAMPLE_PATTERN = ("lre", "rle", "lft_r", "rgt_l", "conn", "exch", "disc", "rgt_r", "lft_l")
PLAN_ORDER = ("rgt_l", "lft_r", "conn", "exch", "disc", "lft_l", "rgt_r", "lre", "rle")


@pytest.fixture
def tr11():
    return two_robots(1, 1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(mod.RESULTS):
            terminalreporter.write_line(mod.RESULTS[k])
