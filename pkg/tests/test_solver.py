import numpy as np
import pytest

from cpforge.expansion import (
    five_pulse_elements,
    seven_pulse_elements,
    taylor_oracle,
    three_pulse_elements,
)
from cpforge.landscape import fidelity_at
from cpforge.pulses import SequenceSpec, principal_angle
from cpforge.solver import (
    ConstraintSystem,
    InfeasibleDesign,
    check_row,
    levenberg_marquardt,
    load_tables,
    multistart,
    solve_five,
    solve_seven,
    solve_three,
    verify_tables,
)


def differences(sol):
    return principal_angle(sol.alphas[0] - sol.alphas[1]), principal_angle(sol.betas[0] - sol.betas[1])


def test_three_pulse_equal_strengths():
    a12, b12 = differences(solve_three(1.0, "qubit"))
    assert a12 == pytest.approx(np.pi / 3) and b12 == 0
    a12, b12 = differences(solve_three(1.0, "leakage"))
    assert a12 == pytest.approx(2 * np.pi / 3) and b12 == pytest.approx(-2 * np.pi / 3)


def test_three_pulse_z_gate_strengths():
    for mode in ("qubit", "leakage"):
        a12, b12 = differences(solve_three(1 / np.sqrt(3), mode))
        assert abs(principal_angle(a12 - b12)) == pytest.approx(np.pi)


@pytest.mark.parametrize("ratio", np.linspace(0.6, 1.7, 12))
def test_three_pulse_residuals(ratio):
    if abs(ratio**2 - (2 - np.sqrt(3))) > 1e-3 and abs(ratio**2 - (2 + np.sqrt(3))) > 1e-3:
        sol = solve_three(ratio, "qubit")
        assert abs(three_pulse_elements(sol.sequence())["g1"]) < 1e-10
    sol = solve_three(ratio, "leakage")
    g = three_pulse_elements(sol.sequence())
    assert max(abs(g["g3"]), abs(g["g4"])) < 1e-10
    assert np.all((sol.alphas >= 0) & (sol.alphas < 2 * np.pi))


def test_three_pulse_infeasible():
    with pytest.raises(InfeasibleDesign) as info:
        solve_three(0.3, "leakage")
    assert abs(info.value.value) > 1 and not info.value.singular
    with pytest.raises(InfeasibleDesign):
        solve_three(0.3, "qubit")
    for y in (2 - np.sqrt(3), 2 + np.sqrt(3)):
        with pytest.raises(InfeasibleDesign) as info:
            solve_three(np.sqrt(y), "qubit")
        assert info.value.singular
    with pytest.raises(ValueError):
        solve_three(-1.0, "qubit")


def test_leakage_feasibility_edges():
    # arccos arguments hit -1 exactly at ratio^2 = 1/3 and 3
    for ratio in (1 / np.sqrt(3), np.sqrt(3)):
        solve_three(ratio, "leakage")
    for ratio in (0.99 / np.sqrt(3), 1.01 * np.sqrt(3)):
        with pytest.raises(InfeasibleDesign):
            solve_three(ratio, "leakage")


def test_constraint_dimensions():
    dims = {
        "three-qubit-error": (2, 1),
        "three-leakage": (2, 2),
        "five-leakage": (4, 4),
        "five-qubit": (4, 4),
        "five-full-equal": (4, 3),
        "seven-full-equal": (6, 6),
    }
    for mode, (nx, nr) in dims.items():
        system = ConstraintSystem(1.0, mode)
        assert system.dim == nx
        assert system.residual(np.full(nx, 0.3)).shape == (nr,)
    assert ConstraintSystem(1.1, "five-leakage", relaxed=True).residual(np.zeros(4)).shape == (3,)
    with pytest.raises(ValueError):
        ConstraintSystem(1.2, "seven-full-equal")
    with pytest.raises(ValueError):
        ConstraintSystem(1.0, "nine")


def test_gauge_invariance():
    rng = np.random.default_rng(4)
    for n, elements in ((5, five_pulse_elements), (7, seven_pulse_elements)):
        m = (n + 1) // 2
        a, b = rng.uniform(0, 6, m), rng.uniform(0, 6, m)
        base = SequenceSpec.palindrome(a, b)
        shifted = SequenceSpec.palindrome(a + 0.7, b - 1.9)
        g0, g1 = elements(base), elements(shifted)
        assert g1["g1"] == pytest.approx(g0["g1"], abs=1e-12)
        assert abs(g1["ga"]) == pytest.approx(abs(g0["ga"]), abs=1e-12)
        if n == 7:
            assert abs(g1["g9"]) == pytest.approx(abs(g0["g9"]), abs=1e-12)
        d = np.linspace(-0.4, 0.4, 5)
        assert np.allclose(fidelity_at(base, d, d[::-1]), fidelity_at(shifted, d, d[::-1]), atol=1e-12)


def test_verify_tables():
    checks = verify_tables()
    assert len(checks) == 14
    for c in checks:
        assert c.passed, c
        assert c.iterations <= 20 and c.residual_after <= 1e-9 and c.max_shift <= 0.05
    assert checks[-5].varphi7_computed == pytest.approx(0.948, abs=2e-3)


def test_check_row_rejects_far_start():
    row = dict(load_tables()["I"][2])
    row["alphas"] = [0, 2.584 + 0.4, 0.0]
    assert not check_row("I", row).passed


@pytest.mark.parametrize(
    "ratio, mode, table, index",
    [(1.0, "five-full-equal", "I", 2), (0.8, "five-qubit", "II", 0), (1.2, "five-leakage", "I", 4)],
)
def test_polished_rows_stay_close(ratio, mode, table, index):
    row = load_tables()[table][index]
    check = check_row(table, row)
    assert check.passed and check.max_shift < 1e-3


@pytest.mark.parametrize("mode, ratio", [("five-full-equal", 1.0), ("five-leakage", 1.2), ("five-qubit", 0.8)])
def test_solve_five(mode, ratio):
    sols = solve_five(ratio, mode, starts=30, seed=3)
    assert sols
    system = ConstraintSystem(ratio, mode)
    for s in sols:
        assert s.residual_norm <= 1e-8
        assert np.all((s.alphas >= 0) & (s.alphas < 2 * np.pi))
        x = np.concatenate([s.alphas[1:3], s.betas[1:3]])
        assert np.linalg.norm(system.residual(x)) <= 1e-8
    keys = [s.residual_norm for s in sols]
    assert keys == sorted(keys)


def test_solve_five_is_seeded():
    a = solve_five(1.1, "five-leakage", starts=20, seed=9)
    b = solve_five(1.1, "five-leakage", starts=20, seed=9)
    assert [s.alphas.tolist() for s in a] == [s.alphas.tolist() for s in b]


def test_solve_seven_solutions_are_flat():
    sols = solve_seven([0.0], starts=25, seed=1)
    assert sols
    for s in sols[:3]:
        assert s.residual_norm <= 1e-8 and s.alphas[0] == 0 and s.betas[0] == 0
        assert -np.pi < s.varphi7 <= np.pi
        oracle = taylor_oracle(s.sequence(), "mixed", h=1e-4, richardson=True)
        assert max(np.abs(oracle.u1).max(), np.abs(oracle.u2).max()) < 1e-6
        assert abs(oracle.u12[0, 0]) < 1e-6 and abs(oracle.u12[0, 1]) < 1e-6


class _NoRoot:
    dim = 1

    def residual(self, x):
        return np.array([x[0] ** 2 + 1.0])

    def jacobian(self, x):
        return np.array([[2 * x[0]]])


def test_multistart_reports_best_residual_when_nothing_converges():
    found, best = multistart(_NoRoot(), starts=5, seed=0, max_iter=30)
    assert found == [] and best == pytest.approx(1.0, abs=1e-2)


class _Circle:
    dim = 2

    def residual(self, x):
        return np.array([x[0] ** 2 + x[1] ** 2 - 1.0, x[0] - x[1]])

    def jacobian(self, x):
        return np.array([[2 * x[0], 2 * x[1]], [1.0, -1.0]])


def test_levenberg_marquardt_converges():
    x, cost, it = levenberg_marquardt(_Circle(), [2.0, 0.5])
    assert cost < 1e-10 and it < 30
    assert np.allclose(x, [np.sqrt(0.5)] * 2)
