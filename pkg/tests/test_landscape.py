import numpy as np
import pytest
from scipy.optimize import brentq

from cpforge.landscape import (
    FidelityGrid,
    diagonal_width,
    fidelity_at,
    fidelity_gradient,
    format_csv,
    format_metadata,
    format_report,
    robustness_report,
    sweep,
)
from cpforge.pulses import SequenceSpec
from cpforge.solver import solve_three

SINGLE = SequenceSpec.from_phases([0.0], [0.0])


def single_diag_fidelity(t):
    # along delta1 = delta2 the error is a common scale; U0^H Ua has
    # eigenphases 0 and -+pi t, so |Tr| = 1 + 2 cos(pi t)
    return (3 + (1 + 2 * np.cos(np.pi * t)) ** 2) / 12


def test_single_pulse_width_matches_closed_form():
    for threshold in (0.9, 0.99, 0.999):
        exact = brentq(lambda t: single_diag_fidelity(t) - threshold, 1e-6, 0.5)
        assert diagonal_width(SINGLE, threshold, +1) == pytest.approx(exact, abs=1e-4)
    assert diagonal_width(SINGLE, 0.99, +1) < 0.1


def test_closed_form_fidelity_along_diagonal():
    t = np.linspace(-0.5, 0.5, 11)
    assert np.allclose(fidelity_at(SINGLE, t, t), single_diag_fidelity(t), atol=1e-13)


def test_grid_basics():
    seq = solve_three(1.0, "leakage").sequence()
    grid = sweep(seq, span=0.5, points=41)
    assert grid.values.shape == (41, 41)
    assert grid.values[20, 20] == pytest.approx(1.0, abs=1e-12)
    assert grid.values.min() >= 0 and grid.values.max() <= 1 + 1e-12
    assert grid.delta1_axis[0] == -0.5 and grid.delta1_axis[-1] == 0.5


def test_degenerate_grid_rejected():
    with pytest.raises(ValueError):
        sweep(SINGLE, points=1)
    with pytest.raises(ValueError):
        sweep(SINGLE, span=0.0)


def test_threshold_nesting_and_monotone_widths():
    grid = sweep(solve_three(1.0, "qubit").sequence(), points=51)
    high, mid, low = (grid.values >= t for t in (0.999, 0.99, 0.9))
    assert np.all(mid[high]) and np.all(low[mid])
    rep = robustness_report(grid)
    for widths in (rep.width_diag_plus, rep.width_diag_minus):
        assert widths[0.9] >= widths[0.99] >= widths[0.999]
    areas = [rep.area_fraction[t] for t in rep.thresholds]
    assert areas == sorted(areas, reverse=True)


def test_swap_symmetry():
    rng = np.random.default_rng(6)
    phases = rng.uniform(0, 2 * np.pi, 3)
    seq = SequenceSpec.palindrome(phases, phases)
    grid = sweep(seq, span=0.5, points=21)
    assert np.allclose(grid.values, grid.values.T, atol=1e-10)


def test_report_validation():
    ones = FidelityGrid(np.linspace(-1, 1, 3), np.linspace(-1, 1, 3), np.ones((3, 3)))
    rep = robustness_report(ones, [0.5, 0.99])
    assert rep.area_fraction == {0.5: 1.0, 0.99: 1.0}
    with pytest.raises(ValueError):
        robustness_report(ones, [])
    with pytest.raises(ValueError):
        robustness_report(ones, [1.0])


def test_robust_direction_follows_design():
    qubit = solve_three(1.0, "qubit").sequence()
    leak = solve_three(1.0, "leakage").sequence()
    assert diagonal_width(qubit, 0.99, -1) > 3 * diagonal_width(qubit, 0.99, +1)
    assert diagonal_width(leak, 0.99, +1) > 3 * diagonal_width(leak, 0.99, -1)
    assert diagonal_width(qubit, 0.999, -1) > diagonal_width(SINGLE, 0.999, -1)


def test_flat_designs_have_zero_gradient(five_equal, seven_row1):
    for seq in (five_equal, seven_row1):
        assert max(np.abs(fidelity_gradient(seq))) <= 1e-4


def test_thread_count_does_not_change_values(monkeypatch):
    seq = solve_three(1.2, "leakage").sequence()
    monkeypatch.setenv("CPFORGE_THREADS", "1")
    a = sweep(seq, points=15).values
    monkeypatch.setenv("CPFORGE_THREADS", "4")
    b = sweep(seq, points=15).values
    assert np.array_equal(a, b)


def test_outputs():
    grid = sweep(SINGLE, span=0.5, points=3)
    lines = format_csv(grid).splitlines()
    assert lines[0] == "delta1,delta2,fidelity"
    assert lines[1] == "-0.5,-0.5," + f"{grid.values[0, 0]:.12g}"
    assert lines[2].startswith("-0.5,0,")
    assert len(lines) == 10
    meta = format_metadata(grid)
    assert "grid_points = 3" in meta and "N = 1" in meta
    text = format_report(robustness_report(grid, [0.99]))
    assert text.startswith("area_fraction[0.99] = ")
