"""Taylor coefficients of sequence propagators in the coupling errors.

Two independent routes are provided:

* closed-form element formulas for palindromic sequences of length 1, 3, 5
  and (equal strengths) 7, written in the elements ``g1 ... g12``;
* :func:`taylor_oracle`, central finite differences of
  :func:`cpforge.pulses.propagate_sequence`.

The closed forms are stated in a frame that differs from the literal
propagator ``exp(-i H_N T) ... exp(-i H_1 T)`` by fixed signs on the qubit
block and on the leakage entries (see ``FRAMES``).  Matrices stored in an
:class:`ErrorExpansion` are always in the literal-propagator frame, so the
two routes compare entry by entry.
"""
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .pulses import ErrorPair, SequenceSpec, propagate_sequence

# (qubit-block sign, leakage sign) mapping the element frame to the propagator
FRAMES = {1: (-1, -1), 3: (-1, 1), 5: (-1, 1), 7: (-1, -1)}

STEP_RANGE = (1e-5, 1e-3)


@dataclass
class ErrorExpansion:
    u0: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u12: Optional[np.ndarray] = None
    elements: dict = field(default_factory=dict)

    def qubit_error(self):
        """Frobenius norm of the first-order qubit-block content."""
        return float(np.hypot(np.linalg.norm(self.u1[:2, :2]), np.linalg.norm(self.u2[:2, :2])))

    def leakage_error(self):
        leak = lambda u: np.sqrt(np.sum(np.abs(u[:2, 2]) ** 2) + np.sum(np.abs(u[2, :2]) ** 2))
        return float(np.hypot(leak(self.u1), leak(self.u2)))


# -- phase-combination records ----------------------------------------------

_TOKEN = re.compile(r"([+-]?)\s*(\d*)\s*([abg])(\d)(\d?)")


def combo_vector(expr, m):
    """Parse ``"2a12 + a34 - b23"`` into coefficients over (a1..am, b1..bm).

    ``aMN`` stands for ``alpha_M - alpha_N``, ``aM`` for ``alpha_M`` and
    ``gM`` for ``gamma_M = alpha_M - beta_M``.
    """
    vec = np.zeros(2 * m)
    text = expr.replace(" ", "")
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ValueError(f"cannot parse phase combination {expr!r} at {text[pos:]!r}")
        sign, mult, kind, i, j = match.groups()
        k = (-1.0 if sign == "-" else 1.0) * (float(mult) if mult else 1.0)
        i = int(i) - 1
        if kind == "g":
            vec[i] += k
            vec[m + i] -= k
        else:
            off = 0 if kind == "a" else m
            vec[off + i] += k
            if j:
                vec[off + int(j) - 1] -= k
        pos = match.end()
    return vec


def _compile(records, m):
    coeffs = np.array([r[0] for r in records], dtype=float)
    vecs = np.array([combo_vector(r[-1], m) for r in records])
    return coeffs, vecs


def _half_phases(seq, m):
    if not seq.is_palindromic:
        raise ValueError("closed-form elements require a palindromic sequence")
    if seq.n != 2 * m - 1:
        raise ValueError(f"expected {2 * m - 1} pulses, got {seq.n}")
    return np.concatenate([seq.alphas[:m], seq.betas[:m]])


def _assemble(u0, elements, n, mixed=False):
    sq, sl = FRAMES[n]
    g = elements
    cj = np.conj
    u1 = np.array(
        [
            [sq * g["g1"], -sq * g["g2"], sl * g["g3"]],
            [-sq * cj(g["g2"]), -sq * g["g1"], sl * g["g4"]],
            [-sl * cj(g["g3"]), -sl * cj(g["g4"]), 0.0],
        ],
        dtype=complex,
    )
    u2 = np.array(
        [
            [-sq * g["g1"], sq * g["g2"], sl * g["g5"]],
            [sq * cj(g["g2"]), sq * g["g1"], sl * g["g6"]],
            [-sl * cj(g["g5"]), -sl * cj(g["g6"]), 0.0],
        ],
        dtype=complex,
    )
    u12 = None
    if mixed:
        u12 = np.array(
            [
                [sq * g["g7"], sq * g["g9"], sl * g["g10"]],
                [sq * cj(g["g9"]), sq * g["g8"], sl * g["g11"]],
                [-sl * cj(g["g10"]), -sl * cj(g["g11"]), sq * g["g12"]],
            ],
            dtype=complex,
        )
    return ErrorExpansion(u0=u0, u1=u1, u2=u2, u12=u12, elements=dict(elements))


# -- single pulse ------------------------------------------------------------

def single_pulse_elements(pulse):
    chi, gam = pulse.chi, pulse.gamma
    c, s = np.cos(chi), np.sin(chi)
    ea, eb = np.exp(1j * pulse.alpha), np.exp(1j * pulse.beta)
    return {
        "g1": np.sin(2 * chi) ** 2,
        "g2": 0.5 * np.exp(1j * gam) * np.sin(4 * chi),
        "g3": -1j * ea * np.pi * c**3,
        "g4": -1j * eb * np.pi * c**2 * s,
        "g5": -1j * ea * np.pi * c * s**2,
        "g6": -1j * eb * np.pi * s**3,
    }


def first_order_single(pulse):
    seq = SequenceSpec((pulse,))
    return _assemble(propagate_sequence(seq), single_pulse_elements(pulse), 1)


# -- three pulses --------------------------------------------------------------

def three_pulse_elements(seq):
    a1, a2, b1, b2 = _half_phases(seq, 2)
    x, y = seq.omega1**2, seq.omega2**2
    o1, o2 = seq.omega1, seq.omega2
    s = x + y
    a12, b12 = a1 - a2, b1 - b2
    e = lambda t: np.exp(1j * t)
    g1 = 4 * x * y / s**4 * (
        5 * x**2 - 14 * x * y + 5 * y**2 - 4 * (x**2 - 4 * x * y + y**2) * np.cos(a12 - b12)
    )
    g2 = (
        2 * e(a1 - b1) * o1 * o2 * (x - y) / s**4
        * (12 * x * y * e(a12 - b12) + (x**2 - 10 * x * y + y**2) * (2 - e(b12 - a12)))
    )
    common = 2 * x * e(a12) + 2 * y * e(b12) + s
    g3 = 1j * e(a1) * np.pi * o1**3 / s**3.5 * (2 * y * e(-b12) + (x - y) * e(-a12)) * common
    g4 = 1j * e(b1) * np.pi * x * o2 / s**3.5 * (2 * x * e(-a12) - (x - y) * e(-b12)) * common
    return {"g1": g1, "g2": g2, "g3": g3, "g4": g4, "g5": g3 * y / x, "g6": g4 * y / x}


def first_order_three(seq):
    return _assemble(propagate_sequence(seq), three_pulse_elements(seq), 3)


# -- five pulses ---------------------------------------------------------------

def five_pulse_coefficients(omega1, omega2):
    """Polynomial weights ``a0..a4`` and ``b1..b3`` of the five-pulse elements."""
    x, y = omega1**2, omega2**2
    return {
        "a0": -9 * x**4 + 76 * x**3 * y - 150 * x**2 * y**2 + 76 * x * y**3 - 9 * y**4,
        "a1": 8 * (x - y) ** 2 * (x**2 - 8 * x * y + y**2),
        "a2": 32 * x * y * (x**2 - 3 * x * y + y**2),
        # sign fixed against the finite-difference oracle
        "a3": -4 * (x - y) ** 2 * (x**2 - 8 * x * y + y**2),
        "a4": 4 * (x**4 - 18 * x**3 * y + 42 * x**2 * y**2 - 18 * x * y**3 + y**4),
        "b1": (x - y) ** 2 * (x**2 - 18 * x * y + y**2),
        "b2": 4 * x * y * (3 * x**2 - 14 * x * y + 3 * y**2),
        "b3": x**4 - 32 * x**3 * y + 94 * x**2 * y**2 - 32 * x * y**3 + y**4,
    }


def five_pulse_elements(seq):
    a1, a2, a3, b1, b2, b3 = _half_phases(seq, 3)
    o1, o2 = seq.omega1, seq.omega2
    x, y = o1**2, o2**2
    s = x + y
    k = five_pulse_coefficients(o1, o2)
    e = lambda t: np.exp(1j * t)
    a12, a13, a23 = a1 - a2, a1 - a3, a2 - a3
    b12, b13, b23 = b1 - b2, b1 - b3, b2 - b3
    cross = a12 - a23 - b12 + b23
    bracket = (
        k["a0"]
        + k["a1"] * np.cos(a12 - b12)
        + k["a2"] * np.cos(cross)
        + k["a3"] * np.cos(a13 - b13)
        + k["a4"] * np.cos(a23 - b23)
    )
    g1 = -4 * x * y / s**6 * bracket
    g2 = 2 * e(a1 - b1) * o1 * o2 * (x - y) / s**6 * (
        80 * x**2 * y**2 * e(cross)
        + k["b1"] * (e(b13 - a13) - 2 * e(b12 - a12))
        + k["b2"] * (4 * np.cos(a23 - b23) + 2 * e(a12 - b12) - e(-cross) - e(a13 - b13))
        + 2 * k["b3"]
    )
    ga = (
        4 * x * y * (e(a12 + b23) + e(a23 + b12))
        + 2 * (x - y) * (x * e(a13) - y * e(b13))
        + 2 * s * (x * e(a23) + y * e(b23))
        + s**2
    )
    gb = (
        2 * y * (x - y) * (e(-a12 - b23) - e(-b13))
        + 4 * x * y * e(-a23 - b12)
        + (x - y) ** 2 * e(-a13)
    )
    gc = (
        2 * x * (x - y) * (e(-a13) - e(-a23 - b12))
        + 4 * x * y * e(-a12 - b23)
        + (x - y) ** 2 * e(-b13)
    )
    g3 = 1j * e(a1) * np.pi * o1**3 / s**5.5 * ga * gb
    g4 = 1j * e(b1) * np.pi * x * o2 / s**5.5 * ga * gc
    return {
        "g1": g1, "g2": g2, "g3": g3, "g4": g4,
        "g5": g3 * y / x, "g6": g4 * y / x,
        "ga": ga, "gb": gb, "gc": gc,
    }


def first_order_five(seq):
    return _assemble(propagate_sequence(seq), five_pulse_elements(seq), 5)


# -- seven pulses, equal strengths ---------------------------------------------

_SEVEN_G1 = [
    (-1, ""),
    (2, "a34 - b34"),
    (2, "a12 - a23 + a34 - b12 + b23 - b34"),
    (-2, "a23 - a34 - b23 + b34"),
]

_SEVEN_GA = [
    (1, ""),
    (1, "a34"),
    (1, "b34"),
    (1, "a34 + b23"),
    (1, "b34 + a23"),
    (1, "a12 + a34 + b23"),
    (1, "b12 + b34 + a23"),
]

# cosine series; both carry the overall factor -pi^2/8
_SEVEN_G7 = [
    (7, ""),
    (4, "a23"), (4, "b12"), (4, "b34"),
    (4, "a23 + b34"), (4, "a23 + b12"),
    (2, "a34 - b34"),
    (4, "a23 - a34 + b34"),
    (4, "a23 + b12 + b34"),
    (4, "a23 - a34 + b12 - b23 + b34"),
    (2, "a23 - a34 - b23 + b34"),
    (4, "a23 - a34 + b12 + b34"),
    (2, "a12 - a23 + a34 - b12 + b23 - b34"),
]

_SEVEN_G8 = [
    (7, ""),
    (4, "b23"), (4, "a12"), (4, "a34"),
    (4, "b23 + a34"), (4, "b23 + a12"),
    (2, "a34 - b34"),
    (4, "b23 - b34 + a34"),
    (4, "b23 + a12 + a34"),
    (2, "a12 - a23 + a34 - b12 + b23 - b34"),
    (2, "b23 - b34 - a23 + a34"),
    (4, "b23 - b34 + a12 - a23 + a34"),
    (4, "b23 - b34 + a12 + a34"),
]

# exponential series with weight (const + pi2 * pi^2); overall e^{i(g4 - 2 b14)} / 8
_SEVEN_G9 = [
    (32, 0, "a14 + a34 + b13"),
    (-32, 0, "2a14 - a23 + b23"),
    (-32, 0, "a12 + 2a34 + b13 + b23"),
    (16, 0, "2a13 + 2b34"),
    (16, 0, "2a23 + 2b12 + 2b34"),
    (16, 0, "2a12 + 2b24"),
    (-32, 0, "a13 + a23 + b12 + 2b34"),
    (-32, 0, "a12 + a13 + b24 + b34"),
    (32, 0, "a13 + b14 + b34"),
    (0, -2, "a12 + a34 + b23"),
    (0, -2, "2a12 + a34 + b23"),
    (0, -2, "a12 + 2a34 + b23"),
    (0, -2, "2a12 + 2a34 + b23"),
    # the 2b23 here was verified symbolically against the propagator
    (0, -2, "2a12 + a34 + 2b23"),
    (0, -2, "2a12 + 2a34 + b13 + b23"),
    (0, -2, "2a14 - a23 + b13 + b23"),
    (0, -2, "a12 + 2a34 + 2b23"),
    (0, -2, "2a14 - a23 + 2b23"),
    (0, -2, "a12 + a34 + b24"),
    (0, -2, "2a12 + a34 + b24"),
    (0, -2, "a14 + b24"),
    (0, -2, "a12 + a14 + b14"),
    (0, -2, "a12 + a14 + b23 + b24"),
    (0, -2, "2a12 + 2a34 + b23 + b24"),
    (0, -2, "2a14 - a23 + b23 + b24"),
    (0, -2, "a12 + a14 + b14 + b23"),
    (0, -2, "2a14 - a23 + b14 + b23"),
    (32, -2, "a12 + a14 + b24"),
    (56, -7, "2a12 + 2a34 + 2b23"),
    (-32, -2, "a14 + b14"),
    (-32, -2, "2a12 + a34 + b23 + b24"),
]

_T7 = {
    "g1": _compile(_SEVEN_G1, 4),
    "ga": _compile(_SEVEN_GA, 4),
    "g7": _compile(_SEVEN_G7, 4),
    "g8": _compile(_SEVEN_G8, 4),
}
_G9_CONST = np.array([r[0] for r in _SEVEN_G9], dtype=float)
_G9_PI2 = np.array([r[1] for r in _SEVEN_G9], dtype=float)
_G9_VECS = np.array([combo_vector(r[2], 4) for r in _SEVEN_G9])
_G9_WEIGHTS = _G9_CONST + _G9_PI2 * np.pi**2

_VARPHI7 = combo_vector("-2g1 + 2g2 - 2g3 + g4", 4)
_G9_PREFIX = combo_vector("g4 - 2b14", 4)
_G3_PREFIX = combo_vector("a4 + a12 + a34 - b12 - b34", 4)
_G4_PREFIX = combo_vector("b4 - a12 - a34 + b12 + b34", 4)


def _cos_series(table, phases):
    coeffs, vecs = table
    return float(coeffs @ np.cos(vecs @ phases))


def _exp_series(table, phases):
    coeffs, vecs = table
    return complex(coeffs @ np.exp(1j * (vecs @ phases)))


def seven_pulse_elements(seq):
    if not np.isclose(seq.omega1, seq.omega2, rtol=1e-12, atol=0):
        raise ValueError("seven-pulse closed forms need equal coupling strengths")
    ph = _half_phases(seq, 4)
    ga = _exp_series(_T7["ga"], ph)
    g3 = -1j * np.pi * np.exp(1j * (_G3_PREFIX @ ph)) / (2 * np.sqrt(2)) * ga
    g4 = -1j * np.pi * np.exp(1j * (_G4_PREFIX @ ph)) / (2 * np.sqrt(2)) * ga
    g9 = np.exp(1j * (_G9_PREFIX @ ph)) / 8 * complex(_G9_WEIGHTS @ np.exp(1j * (_G9_VECS @ ph)))
    return {
        "g1": _cos_series(_T7["g1"], ph),
        "g2": 0.0,
        "g3": g3, "g4": g4, "g5": g3, "g6": g4,
        "g7": -np.pi**2 / 8 * _cos_series(_T7["g7"], ph),
        "g8": -np.pi**2 / 8 * _cos_series(_T7["g8"], ph),
        "g9": g9,
        "g10": -g3 / 2,
        "g11": -g4 / 2,
        # excited-level entry of the mixed term; vanishes with the leakage
        "g12": -np.pi**2 / 4 * abs(ga) ** 2,
        "ga": ga,
        "varphi7": float(_VARPHI7 @ ph),
    }


def seven_pulse_ideal(seq):
    """Ideal NOT-type gate of a seven-pulse sequence in the element frame."""
    vp = seven_pulse_elements(seq)["varphi7"]
    return np.array(
        [[0, np.exp(-1j * vp), 0], [np.exp(1j * vp), 0, 0], [0, 0, 1]], dtype=complex
    )


def mixed_second_seven(seq):
    return _assemble(propagate_sequence(seq), seven_pulse_elements(seq), 7, mixed=True)


def analytic_expansion(seq):
    """Dispatch to the closed form matching the sequence length."""
    if seq.n == 1:
        return first_order_single(seq.pulses[0])
    if seq.n == 3:
        return first_order_three(seq)
    if seq.n == 5:
        return first_order_five(seq)
    if seq.n == 7:
        return mixed_second_seven(seq)
    raise ValueError(f"no closed form for N={seq.n}")


# -- finite-difference oracle ----------------------------------------------------

def _check_step(h):
    lo, hi = STEP_RANGE
    if not (lo <= h <= hi):
        raise ValueError(f"finite-difference step {h} outside [{lo}, {hi}]")


def _first_diff(seq, h):
    u = lambda d1, d2: propagate_sequence(seq, ErrorPair(d1, d2))
    return (u(h, 0) - u(-h, 0)) / (2 * h), (u(0, h) - u(0, -h)) / (2 * h)


def _mixed_diff(seq, h):
    u = lambda d1, d2: propagate_sequence(seq, ErrorPair(d1, d2))
    return (u(h, h) - u(h, -h) - u(-h, h) + u(-h, -h)) / (4 * h * h)


def taylor_oracle(seq, order="first", h=1e-4, richardson=False):
    """Finite-difference Taylor coefficients of ``propagate_sequence``.

    ``order="first"`` fills ``u1``/``u2``; ``"mixed"`` additionally fills
    ``u12``.  With ``richardson=True`` the O(h^2) stencils at ``h`` and
    ``h/2`` are combined into an O(h^4) estimate.
    """
    _check_step(h)
    if order not in ("first", "mixed"):
        raise ValueError(f"unknown order {order!r}")

    def extrapolate(f):
        coarse = f(seq, h)
        if not richardson:
            return coarse
        fine = f(seq, h / 2)
        if isinstance(coarse, tuple):
            return tuple((4 * b - a) / 3 for a, b in zip(coarse, fine))
        return (4 * fine - coarse) / 3

    u1, u2 = extrapolate(_first_diff)
    u12 = extrapolate(_mixed_diff) if order == "mixed" else None
    return ErrorExpansion(u0=propagate_sequence(seq), u1=u1, u2=u2, u12=u12)


def max_discrepancy(a, b):
    """Largest entrywise gap between two expansions (u1, u2 and, if both have it, u12)."""
    gaps = [np.max(np.abs(a.u1 - b.u1)), np.max(np.abs(a.u2 - b.u2))]
    if a.u12 is not None and b.u12 is not None:
        gaps.append(np.max(np.abs(a.u12 - b.u12)))
    return float(max(gaps))


# -- report -----------------------------------------------------------------------

_REPORT_ORDER = ["g1", "g2", "g3", "g4", "g5", "g6", "g7", "g8", "g9", "g10", "g11", "g12", "ga", "gb", "gc"]


def format_report(expansion):
    """One line per element: name, modulus, real part, imaginary part."""
    lines = []
    for name in _REPORT_ORDER:
        if name not in expansion.elements:
            continue
        z = complex(expansion.elements[name])
        lines.append(f"{name:<4} {abs(z):.12e} {z.real:+.12e} {z.imag:+.12e}")
    if "varphi7" in expansion.elements:
        lines.append(f"varphi7 {expansion.elements['varphi7']:.12e}")
    return "\n".join(lines) + "\n"
