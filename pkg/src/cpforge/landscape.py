"""Fidelity landscapes over the coupling errors and robustness summaries."""
from dataclasses import dataclass, field

import numpy as np

from .parallel import ordered_map
from .pulses import ErrorPair, format_sequence, gate_fidelity, ideal_gate, propagate_sequence

DEFAULT_THRESHOLDS = (0.9, 0.99, 0.999)


@dataclass
class FidelityGrid:
    delta1_axis: np.ndarray
    delta2_axis: np.ndarray
    values: np.ndarray  # values[i, j] = F(delta1_axis[i], delta2_axis[j])
    sequence: object = None

    @property
    def span(self):
        return float(self.delta1_axis[-1])

    @property
    def points(self):
        return int(self.delta1_axis.size)


def fidelity_at(seq, delta1, delta2, target=None):
    """Fidelity of the erroneous sequence against its own ideal propagator."""
    if target is None:
        target = ideal_gate(seq)
    return gate_fidelity(propagate_sequence(seq, ErrorPair(delta1, delta2)), target)


def sweep(seq, span=0.5, points=201):
    """Evaluate F on the square ``[-span, span]^2`` with ``points`` per axis."""
    if not points >= 2 or not span > 0:
        raise ValueError(f"degenerate grid: span={span}, points={points}")
    axis = np.linspace(-span, span, int(points))
    target = ideal_gate(seq)

    def row(d1):
        return fidelity_at(seq, np.full_like(axis, d1), axis, target)

    values = np.array(ordered_map(row, axis))
    return FidelityGrid(axis, axis.copy(), values, seq)


def fidelity_gradient(seq, h=1e-3):
    """Central-difference ``(dF/d delta1, dF/d delta2)`` at the origin."""
    target = ideal_gate(seq)
    f = lambda d1, d2: float(fidelity_at(seq, d1, d2, target))
    return (
        (f(h, 0.0) - f(-h, 0.0)) / (2 * h),
        (f(0.0, h) - f(0.0, -h)) / (2 * h),
    )


def diagonal_width(seq, threshold, sign=1, max_delta=1.0, scan_step=5e-3, tol=1e-4):
    """Distance from the origin to the first crossing of ``F = threshold``.

    Walks along ``(t, sign * t)`` for both signs of ``t`` and returns the
    smaller of the two crossing distances, refined by bisection on the
    propagator itself.  Returns ``max_delta`` when no crossing is found.
    """
    target = ideal_gate(seq)
    ts = np.arange(scan_step, max_delta + 0.5 * scan_step, scan_step)
    widths = []
    for direction in (1.0, -1.0):
        d = direction * ts
        vals = fidelity_at(seq, d, sign * d, target)
        below = np.nonzero(vals < threshold)[0]
        if below.size == 0:
            widths.append(max_delta)
            continue
        k = below[0]
        lo = ts[k - 1] if k > 0 else 0.0
        hi = ts[k]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            t = direction * mid
            if fidelity_at(seq, t, sign * t, target) >= threshold:
                lo = mid
            else:
                hi = mid
        widths.append(lo)
    return float(min(widths))


@dataclass
class RobustnessReport:
    thresholds: tuple
    area_fraction: dict = field(default_factory=dict)
    width_diag_plus: dict = field(default_factory=dict)
    width_diag_minus: dict = field(default_factory=dict)


def robustness_report(grid, thresholds=DEFAULT_THRESHOLDS, max_delta=1.0):
    thresholds = tuple(sorted(thresholds))
    if not thresholds:
        raise ValueError("at least one threshold is required")
    for t in thresholds:
        if not 0 < t < 1:
            raise ValueError(f"thresholds must lie in (0, 1), got {t}")
    rep = RobustnessReport(thresholds)
    for t in thresholds:
        rep.area_fraction[t] = float(np.mean(grid.values >= t))
        if grid.sequence is not None:
            rep.width_diag_plus[t] = diagonal_width(grid.sequence, t, +1, max_delta)
            rep.width_diag_minus[t] = diagonal_width(grid.sequence, t, -1, max_delta)
    return rep


# -- output -------------------------------------------------------------------

def format_csv(grid):
    lines = ["delta1,delta2,fidelity"]
    for i, d1 in enumerate(grid.delta1_axis):
        for j, d2 in enumerate(grid.delta2_axis):
            lines.append(f"{d1:.12g},{d2:.12g},{grid.values[i, j]:.12g}")
    return "\n".join(lines) + "\n"


def format_metadata(grid):
    head = [
        f"grid_span = {grid.span:.12g}",
        f"grid_points = {grid.points}",
        "ordering = row-major (delta1 outer, delta2 inner)",
    ]
    body = format_sequence(grid.sequence) if grid.sequence is not None else ""
    return "\n".join(head) + "\n" + body


def format_report(rep):
    lines = []
    for t in rep.thresholds:
        lines.append(f"area_fraction[{t:g}] = {rep.area_fraction[t]:.12g}")
    for t in rep.thresholds:
        if t in rep.width_diag_plus:
            lines.append(f"width_diag_plus[{t:g}] = {rep.width_diag_plus[t]:.6f}")
            lines.append(f"width_diag_minus[{t:g}] = {rep.width_diag_minus[t]:.6f}")
    return "\n".join(lines) + "\n"
