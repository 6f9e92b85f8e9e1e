"""Five and seven pulses with equal strengths are both flat at first order.

Seven pulses also cancel the mixed d1*d2 term.  That makes the landscape
rounder: the worst direction improves, while the five-pulse design keeps a
long ridge along d1 = -d2 and ends up with the larger high-fidelity area.

Run: python3 demos/03_five_vs_seven.py
"""
import numpy as np

from cpforge.landscape import diagonal_width, fidelity_at, fidelity_gradient, sweep
from cpforge.solver import ConstraintSystem, load_tables, polish

tables = load_tables()


def from_table(table, index, mode, alpha1=0.0):
    row = tables[table][index]
    system = ConstraintSystem(1.0, mode, alpha1=alpha1, relaxed=table != "III")
    x, _, _ = polish(system, np.array(row["alphas"][1:] + row["betas"][1:]))
    return system.sequence(x)


five = from_table("I", 2, "five-full-equal")
seven = from_table("III", 0, "seven-full-equal")

for name, seq in (("N=5", five), ("N=7", seven)):
    g1, g2 = fidelity_gradient(seq)
    grid = sweep(seq, span=0.5, points=101)
    area = np.mean(grid.values >= 0.999)
    worst = min(diagonal_width(seq, 0.999, +1), diagonal_width(seq, 0.999, -1))
    print(f"{name}: grad ({g1:+.1e}, {g2:+.1e})  area(F>=0.999) {area:.4f}  worst diagonal width {worst:.4f}")

# Fidelity on a circle of radius 0.15 around the origin.
print("\nangle   N=5 F     N=7 F")
for theta in np.linspace(0, np.pi, 9)[:-1]:
    d1, d2 = 0.15 * np.cos(theta), 0.15 * np.sin(theta)
    print(f"{theta:5.2f}  {float(fidelity_at(five, d1, d2)):.6f}  {float(fidelity_at(seven, d1, d2)):.6f}")
