"""Three pulses can cancel one error direction or the other, not both.

Run: python3 demos/01_three_pulse_directions.py
"""
import numpy as np

from cpforge.expansion import analytic_expansion
from cpforge.landscape import diagonal_width
from cpforge.pulses import SequenceSpec
from cpforge.solver import solve_three

single = SequenceSpec.from_phases([0.0], [0.0])
designs = {
    "single pulse": single,
    "qubit-error": solve_three(1.0, "qubit").sequence(),
    "leakage": solve_three(1.0, "leakage").sequence(),
}

# Each closed form zeroes a different part of the first-order term.
print(f"{'design':>14} {'qubit err':>10} {'leak err':>10}")
for name, seq in designs.items():
    exp = analytic_expansion(seq)
    print(f"{name:>14} {exp.qubit_error():10.2e} {exp.leakage_error():10.2e}")

# The surviving term shows up as a preferred direction in the landscape.
print()
print(f"{'design':>14} {'F>=0.99 along d1=d2':>20} {'along d1=-d2':>14}")
for name, seq in designs.items():
    plus = diagonal_width(seq, 0.99, sign=+1)
    minus = diagonal_width(seq, 0.99, sign=-1)
    print(f"{name:>14} {plus:20.4f} {minus:14.4f}")

# Strength ratios change the phases but not the story.
print()
for ratio in (0.7, 1.0, 1.4):
    sol = solve_three(ratio, "leakage")
    a12 = np.angle(np.exp(1j * (sol.alphas[0] - sol.alphas[1])))
    b12 = np.angle(np.exp(1j * (sol.betas[0] - sol.betas[1])))
    print(f"ratio {ratio:.1f}: leakage phases alpha12 = {a12:+.4f}, beta12 = {b12:+.4f}")
