"""Lambda-system pulse model: Hamiltonians, sequence propagators, fidelity.

Basis ordering is ``{|1>, |2>, |3>}`` with ``|3>`` the shared excited level.
Each pulse drives ``|1> <-> |3>`` with ``(1 + delta1) * omega1 * e^{i alpha}``
and ``|2> <-> |3>`` with ``(1 + delta2) * omega2 * e^{i beta}``, for the
duration ``T = pi / sqrt(omega1**2 + omega2**2)`` that makes one full
bright-state pi rotation at zero error.
"""
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import smallmat

TWO_PI = 2.0 * np.pi
BLOCK_TOL = 1e-8


@dataclass(frozen=True)
class PulseSpec:
    omega1: float
    omega2: float
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not (self.omega1 > 0 and self.omega2 > 0):
            raise ValueError(
                f"coupling strengths must be positive, got {self.omega1}, {self.omega2}"
            )

    @property
    def chi(self):
        return float(np.arctan2(self.omega2, self.omega1))

    @property
    def gamma(self):
        return self.alpha - self.beta

    @property
    def duration(self):
        return float(np.pi / np.hypot(self.omega1, self.omega2))


class ErrorPair(NamedTuple):
    """Fractional coupling errors; entries may be arrays for batched sweeps."""

    delta1: float = 0.0
    delta2: float = 0.0


@dataclass(frozen=True)
class SequenceSpec:
    """An odd-length train of equal-strength pulses with individual phases."""

    pulses: tuple

    def __post_init__(self):
        pulses = tuple(self.pulses)
        object.__setattr__(self, "pulses", pulses)
        if not pulses or len(pulses) % 2 == 0:
            raise ValueError(f"sequence length must be odd, got {len(pulses)}")
        first = pulses[0]
        for p in pulses[1:]:
            if (p.omega1, p.omega2) != (first.omega1, first.omega2):
                raise ValueError("all pulses must share the same coupling strengths")

    @classmethod
    def from_phases(cls, alphas, betas, omega1=1.0, omega2=1.0):
        if len(alphas) != len(betas):
            raise ValueError("alphas and betas must have equal length")
        return cls(
            tuple(PulseSpec(omega1, omega2, float(a), float(b)) for a, b in zip(alphas, betas))
        )

    @classmethod
    def palindrome(cls, half_alphas, half_betas, omega1=1.0, omega2=1.0):
        """Mirror ``(a1, ..., am)`` into ``(a1, ..., am, ..., a1)``."""
        half_alphas, half_betas = list(half_alphas), list(half_betas)
        alphas = half_alphas + half_alphas[-2::-1]
        betas = half_betas + half_betas[-2::-1]
        return cls.from_phases(alphas, betas, omega1, omega2)

    @property
    def n(self):
        return len(self.pulses)

    @property
    def omega1(self):
        return self.pulses[0].omega1

    @property
    def omega2(self):
        return self.pulses[0].omega2

    @property
    def ratio(self):
        return self.omega2 / self.omega1

    @property
    def duration_per_pulse(self):
        return self.pulses[0].duration

    @property
    def alphas(self):
        return np.array([p.alpha for p in self.pulses])

    @property
    def betas(self):
        return np.array([p.beta for p in self.pulses])

    @property
    def is_palindromic(self):
        return self.pulses == self.pulses[::-1]

    def reversed(self):
        return SequenceSpec(self.pulses[::-1])


@dataclass(frozen=True)
class GateParams:
    phi: float
    varphi: float
    theta: float
    upsilon: float
    global_phase: float = 0.0

    def qubit_block(self):
        c, s = np.cos(2 * self.theta), np.sin(2 * self.theta)
        return np.array(
            [
                [np.exp(1j * self.phi) * c, np.exp(-1j * self.varphi) * s],
                [-np.exp(1j * self.varphi) * s, np.exp(-1j * self.phi) * c],
            ]
        )

    def matrix(self):
        """Rebuild the 3x3 gate including the stored global qubit phase."""
        u = np.zeros((3, 3), dtype=complex)
        u[:2, :2] = np.exp(1j * self.global_phase) * self.qubit_block()
        u[2, 2] = np.exp(1j * self.upsilon)
        return u


def build_hamiltonian(pulse, errors=ErrorPair()):
    """Hamiltonian of one pulse; broadcasts over array-valued errors."""
    d1 = np.asarray(errors[0], dtype=float)
    d2 = np.asarray(errors[1], dtype=float)
    shape = np.broadcast(d1, d2).shape
    h = np.zeros(shape + (3, 3), dtype=complex)
    c13 = (1 + d1) * pulse.omega1 * np.exp(1j * pulse.alpha)
    c23 = (1 + d2) * pulse.omega2 * np.exp(1j * pulse.beta)
    h[..., 0, 2] = c13
    h[..., 2, 0] = np.conj(c13)
    h[..., 1, 2] = c23
    h[..., 2, 1] = np.conj(c23)
    return h


def propagate_sequence(seq, errors=ErrorPair()):
    """Return ``exp(-i H_N T) ... exp(-i H_1 T)``; pulse 1 acts first."""
    t = seq.duration_per_pulse
    u = None
    for pulse in seq.pulses:
        step = smallmat.hermitian_expm(build_hamiltonian(pulse, errors), t)
        u = step if u is None else step @ u
    return u


def ideal_gate(seq):
    return propagate_sequence(seq)


def gate_fidelity(u_actual, u_target):
    """Trace fidelity ``[Tr(Ua Ua^H) + |Tr(U0^H Ua)|^2] / (d (d + 1))``."""
    u_actual = smallmat.as_matrix(u_actual)
    u_target = smallmat.as_matrix(u_target)
    if u_actual.shape[-2:] != u_target.shape[-2:] or u_actual.shape[-1] != u_actual.shape[-2]:
        raise ValueError(f"shape mismatch: {u_actual.shape} vs {u_target.shape}")
    d = u_actual.shape[-1]
    norm = np.real(np.einsum("...ij,...ij->...", u_actual, np.conj(u_actual)))
    overlap = np.einsum("...ij,...ij->...", np.conj(u_target), u_actual)
    return (norm + np.abs(overlap) ** 2) / (d * (d + 1))


def leakage_magnitude(u):
    u = np.asarray(u)
    return float(max(abs(u[0, 2]), abs(u[1, 2]), abs(u[2, 0]), abs(u[2, 1])))


def extract_gate_params(u):
    """Decompose a block-diagonal unitary into ``GateParams``.

    The qubit block is written as ``e^{i g} G`` with ``G`` in SU(2),
    ``g`` the principal half-angle of ``det``.  ``theta`` lands in
    ``[0, pi/4]``; an undefined phase (zero modulus entry) is set to 0.
    """
    u = smallmat.as_matrix(u)
    if u.shape != (3, 3):
        raise ValueError(f"expected a 3x3 unitary, got {u.shape}")
    leak = leakage_magnitude(u)
    if leak > BLOCK_TOL:
        raise ValueError(f"unitary is not block-diagonal: leakage magnitude {leak:.3e}")
    q = u[:2, :2]
    global_phase = 0.5 * np.angle(np.linalg.det(q))
    g = q * np.exp(-1j * global_phase)
    p, r = g[0, 0], g[0, 1]
    theta = 0.5 * np.arctan2(abs(r), abs(p))
    phi = float(np.angle(p)) if abs(p) > BLOCK_TOL else 0.0
    varphi = float(-np.angle(r)) if abs(r) > BLOCK_TOL else 0.0
    return GateParams(
        phi=phi,
        varphi=varphi,
        theta=float(theta),
        upsilon=float(np.angle(u[2, 2])),
        global_phase=float(global_phase),
    )


def recursive_gate_params(chi, gammas):
    """Gate parameters built pulse by pulse from the composition rule.

    Starts from ``phi = pi/2``, ``varphi = -gamma_1 - pi/2``, ``theta = chi``
    and composes each further pulse's SU(2) block on the left.  The
    ``theta`` update uses the closed arccos form; the phase updates use
    two-argument angles so no branch choice is needed.  Returned values
    describe the SU(2) part only, i.e. ``propagate_sequence`` equals
    ``i**N`` times the rebuilt block up to the sign of the square root.
    """
    c2, s2 = np.cos(2 * chi), np.sin(2 * chi)
    phi, varphi, theta = np.pi / 2, -gammas[0] - np.pi / 2, chi
    history = [(phi, varphi, theta)]
    for gam in gammas[1:]:
        cth, sth = np.cos(2 * theta), np.sin(2 * theta)
        cos_sq = (
            cth**2 * c2**2
            + sth**2 * s2**2
            - 0.5 * np.cos(gam - phi + varphi) * np.sin(4 * theta) * np.sin(4 * chi)
        )
        new_theta = 0.5 * np.arccos(np.sqrt(np.clip(cos_sq, 0.0, 1.0)))
        diag = 1j * (c2 * cth * np.exp(1j * phi) - s2 * sth * np.exp(1j * (gam + varphi)))
        off = 1j * (c2 * sth * np.exp(-1j * varphi) + s2 * cth * np.exp(1j * (gam - phi)))
        phi = float(np.angle(diag)) if abs(diag) > BLOCK_TOL else 0.0
        varphi = float(-np.angle(off)) if abs(off) > BLOCK_TOL else 0.0
        theta = float(new_theta)
        history.append((phi, varphi, theta))
    return history


# -- plain-text sequence documents -----------------------------------------

def _fmt(x):
    return f"{float(x):.17g}"


def format_sequence(seq):
    lines = [
        f"N = {seq.n}",
        f"omega_ratio = {_fmt(seq.ratio)}",
        "alphas = " + ", ".join(_fmt(a) for a in seq.alphas),
        "betas = " + ", ".join(_fmt(b) for b in seq.betas),
    ]
    return "\n".join(lines) + "\n"


def parse_sequence(text, omega1=1.0):
    fields = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        fields[key] = value
    missing = {"N", "omega_ratio", "alphas", "betas"} - set(fields)
    if missing:
        raise ValueError(f"missing fields: {', '.join(sorted(missing))}")
    n = int(fields["N"])
    ratio = float(fields["omega_ratio"])
    alphas = [float(v) for v in fields["alphas"].split(",")]
    betas = [float(v) for v in fields["betas"].split(",")]
    if len(alphas) != n or len(betas) != n:
        raise ValueError(f"expected {n} phases, got {len(alphas)} and {len(betas)}")
    return SequenceSpec.from_phases(alphas, betas, omega1, omega1 * ratio)


def write_sequence(seq, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_sequence(seq))


def read_sequence(path):
    with open(path, encoding="utf-8") as fh:
        return parse_sequence(fh.read())


def wrap_phases(phases: Sequence[float]):
    return np.mod(np.asarray(phases, dtype=float), TWO_PI)


def principal_angle(x):
    """Map an angle into ``(-pi, pi]``."""
    return float(np.pi - np.mod(np.pi - x, TWO_PI))
