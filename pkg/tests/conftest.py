import numpy as np
import pytest

from cpforge.solver import ConstraintSystem, load_tables, polish

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def polished(table, index):
    row = load_tables()[table][index]
    if table == "III":
        system = ConstraintSystem(1.0, "seven-full-equal", alpha1=row["alphas"][0])
    else:
        ratio = row["ratio"]
        mode = {"I": "five-leakage", "II": "five-qubit"}[table]
        if table == "I" and ratio == 1.0:
            mode = "five-full-equal"
        system = ConstraintSystem(ratio, mode, relaxed=True)
    x, cost, _ = polish(system, np.array(row["alphas"][1:] + row["betas"][1:]))
    return system.sequence(x)


@pytest.fixture(scope="session")
def five_equal():
    return polished("I", 2)


@pytest.fixture(scope="session")
def seven_row1():
    return polished("III", 0)
