"""Two Lambda atoms in a single-mode cavity: information transfer by composite pulses.

Product basis ``|i1, i2, m>`` with atomic levels 0, 1, 2 standing for
``|1>, |2>, |3>`` and ``m`` cavity photons; flat index
``(3 * i1 + i2) * (n_max + 1) + m``.

The laser on atom k drives ``|1>_k <-> |3>_k`` and the cavity drives
``|2>_k <-> |3>_k``.  For ``g >> omega`` the single-excitation dynamics
reduces to a three-level Lambda system on

    |P1> = (|2,3,0> - |3,2,0>) / sqrt(2)     (shared excited state)
    |P2> = |2,1,0>                           (transfer target)
    |P3> = |1,2,0>                           (initial state)

with couplings ``omega e^{i a2} / sqrt(2)`` to ``|P2>`` and
``-omega e^{i a1} / sqrt(2)`` to ``|P3>``.  Identifying ``(P2, P3, P1)``
with ``(|1>, |2>, |3>)`` gives effective phases ``alpha = a2`` and
``beta = a1 + pi``, so phase designs from :mod:`cpforge.solver` at ratio 1
carry over directly.
"""
from dataclasses import dataclass
import numpy as np

from . import smallmat
from .parallel import ordered_map
from .pulses import ErrorPair, PulseSpec, SequenceSpec, build_hamiltonian, propagate_sequence
from .solver import ConstraintSystem, load_tables, polish, solve_three

STEPS_PER_PULSE = 2000
MAX_STEP_PHASE = 0.01  # cap on dt * ||H||
ERROR_TOL = 1e-6


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CavitySystem:
    omega: float = 1.0
    g: float = 30.0
    delta: float = 0.0
    kappa: float = 0.0
    gamma: float = 0.0
    n_max: int = 1

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.omega < 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {self.n_max}")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("decay rates must be non-negative")

    @property
    def dim(self):
        return 9 * (self.n_max + 1)

    def index(self, i1, i2, m=0):
        return (3 * i1 + i2) * (self.n_max + 1) + m

    def ket(self, i1, i2, m=0):
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(i1, i2, m)] = 1.0
        return v


def _atom_op(k, l, which, n_max):
    """``|k><l|`` on atom ``which`` (1 or 2), identity elsewhere."""
    s = np.zeros((3, 3))
    s[k, l] = 1.0
    eye3, eyec = np.eye(3), np.eye(n_max + 1)
    ops = [s, eye3] if which == 1 else [eye3, s]
    return np.kron(np.kron(ops[0], ops[1]), eyec)


def annihilation(n_max):
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)), 1)
    return np.kron(np.eye(9), a)


def excitation_number(sys):
    n = sum(_atom_op(l, l, k, sys.n_max) for k in (1, 2) for l in (0, 2))
    a = annihilation(sys.n_max)
    return n + a.T @ a


def full_hamiltonian(sys, phase1, phase2):
    """Laser phases ``phase1`` (atom 1) and ``phase2`` (atom 2) for one pulse."""
    a = annihilation(sys.n_max)
    amp = (1 + sys.delta) * sys.omega
    h = np.zeros((sys.dim, sys.dim), dtype=complex)
    for k, phase in ((1, phase1), (2, phase2)):
        h += amp * np.exp(1j * phase) * _atom_op(0, 2, k, sys.n_max)
        h += sys.g * _atom_op(2, 1, k, sys.n_max) @ a
    return h + smallmat.dagger(h)


def effective_basis(sys):
    """Columns ``|P2>, |P3>, |P1>`` in the full space."""
    p1 = (sys.ket(1, 2) - sys.ket(2, 1)) / np.sqrt(2)
    return np.column_stack([sys.ket(1, 0), sys.ket(0, 1), p1])


def atom_phases(alpha, beta):
    """Effective ``(alpha, beta)`` to laser phases ``(atom 1, atom 2)``."""
    return beta - np.pi, alpha


def effective_phases(phase1, phase2):
    return phase2, phase1 + np.pi


def effective_hamiltonian(sys, phase1, phase2):
    alpha, beta = effective_phases(phase1, phase2)
    w = sys.omega / np.sqrt(2)
    return build_hamiltonian(PulseSpec(w, w, alpha, beta), ErrorPair(sys.delta, sys.delta))


# -- Lindblad evolution -------------------------------------------------------

def collapse_operators(sys):
    ops = []
    if sys.gamma > 0:
        for k in (1, 2):
            for l in (0, 1):
                ops.append(np.sqrt(sys.gamma / 2) * _atom_op(l, 2, k, sys.n_max))
    if sys.kappa > 0:
        ops.append(np.sqrt(sys.kappa) * annihilation(sys.n_max))
    return ops


def liouvillian(h, jumps):
    """Superoperator acting on row-major ``rho.ravel()``."""
    d = h.shape[0]
    eye = np.eye(d)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in jumps:
        cdc = c.conj().T @ c
        lv += np.kron(c, c.conj()) - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return lv


def _rk4_map(lv, dt, steps):
    # one RK4 step of a linear ODE is the degree-4 Taylor polynomial of dt*L
    x = dt * lv
    eye = np.eye(lv.shape[0])
    step = eye + x @ (eye + x @ (eye / 2 + x @ (eye / 6 + x / 24)))
    return np.linalg.matrix_power(step, steps)


@dataclass
class Evolution:
    rho: np.ndarray
    error_estimate: float
    steps: list


def _steps_for(h, duration):
    norm = float(np.linalg.norm(h, 2))
    return max(STEPS_PER_PULSE, int(np.ceil(duration * norm / MAX_STEP_PHASE)))


def integrate(h, jumps, rho, duration, refine=1):
    """RK4 over one interval of constant ``h``; ``refine`` divides the step.

    Returns ``(rho, steps)``.
    """
    d = h.shape[0]
    steps = _steps_for(h, duration) * refine
    out = _rk4_map(liouvillian(h, jumps), duration / steps, steps) @ np.asarray(rho).ravel()
    return out.reshape(d, d), steps


def lindblad_propagate(sys, phases, rho0, duration, error_tol=ERROR_TOL):
    """Integrate the master equation over consecutive pulses with fixed-step RK4.

    ``phases`` lists ``(phase1, phase2)`` per pulse.  Each pulse uses at
    least ``STEPS_PER_PULSE`` steps (more when ``dt * ||H||`` would exceed
    ``MAX_STEP_PHASE``).  The error estimate compares against a run with
    half the step and applies the fourth-order Richardson factor.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    check_density(rho0, sys.dim)
    jumps = collapse_operators(sys)
    rho, fine = rho0, rho0
    steps_used = []
    for phase1, phase2 in phases:
        h = full_hamiltonian(sys, phase1, phase2)
        rho, steps = integrate(h, jumps, rho, duration)
        fine, _ = integrate(h, jumps, fine, duration, refine=2)
        steps_used.append(steps)
    err = float(np.abs(rho - fine).max()) * 16 / 15
    if not np.all(np.isfinite(rho)) or err > error_tol:
        raise IntegrationError(f"step-size error estimate {err:.3e} exceeds {error_tol:.1e}")
    return Evolution(0.5 * (rho + rho.conj().T), err, steps_used)


def check_density(rho, dim, tol=1e-8):
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix must be {dim}x{dim}, got {rho.shape}")
    dev, _ = smallmat.hermiticity_defect(rho)
    if dev > tol:
        raise ValueError(f"density matrix is not Hermitian (deviation {dev:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix trace is {tr:.12g}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has negative eigenvalues")


def physicality(rho, sys):
    ne = excitation_number(sys)
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return {
        "trace_error": float(abs(np.trace(rho) - 1)),
        "hermiticity": smallmat.hermiticity_defect(rho)[0],
        "min_eigenvalue": float(w.min()),
        "excitation": float(np.trace(ne @ rho).real),
    }


def unitary_sequence(sys, phases, duration):
    u = np.eye(sys.dim, dtype=complex)
    for phase1, phase2 in phases:
        u = smallmat.hermitian_expm(full_hamiltonian(sys, phase1, phase2), duration) @ u
    return u


# -- transfer tasks -----------------------------------------------------------

@dataclass
class TransferTask:
    """Effective-model sequence plus the state of atom 1 to transfer.

    ``theta = 0`` is the population-inversion benchmark ``|1,2,0> -> |2,1,0>``.
    """

    sequence: SequenceSpec
    theta: float = 0.0
    vartheta: float = 0.0

    def __post_init__(self):
        if self.sequence.n % 2 == 0:
            raise ValueError("sequence length must be odd")

    @property
    def phases(self):
        return [atom_phases(a, b) for a, b in zip(self.sequence.alphas, self.sequence.betas)]

    def duration(self, omega):
        # effective strengths omega / sqrt(2) each give T = pi / omega
        return float(np.pi / omega)


def initial_state(sys, task):
    return np.cos(task.theta) * sys.ket(0, 1) + np.exp(1j * task.vartheta) * np.sin(task.theta) * sys.ket(1, 1)


def target_state(sys, task):
    """Target up to the ideal effective gate's phase on the transferred amplitude."""
    u0 = propagate_sequence(task.sequence)
    amp = u0[0, 1] / abs(u0[0, 1]) if abs(u0[0, 1]) > 1e-12 else 1.0
    return (
        np.cos(task.theta) * amp * sys.ket(1, 0)
        + np.exp(1j * task.vartheta) * np.sin(task.theta) * sys.ket(1, 1)
    )


def transfer_fidelity(sys, task, return_state=False):
    if not sys.omega > 0:
        raise ValueError("transfer needs a positive laser coupling")
    psi = initial_state(sys, task)
    rho0 = np.outer(psi, psi.conj())
    ev = lindblad_propagate(sys, task.phases, rho0, task.duration(sys.omega))
    tgt = target_state(sys, task)
    f = float(np.real(tgt.conj() @ ev.rho @ tgt))
    return (f, ev) if return_state else f


def effective_inversion(seq, delta):
    """Population moved ``|P3> -> |P2>`` by the effective model with common error."""
    u = propagate_sequence(seq, ErrorPair(delta, delta))
    return float(abs(u[0, 1]) ** 2)


# Member of the five-pulse full-equal family with the largest worst-case
# inversion over |delta| <= 0.5 along delta1 = delta2, the only error
# direction a common laser error explores.
FIVE_COMMON_HALF = ([0.0, 5 * np.pi / 6, np.pi / 6], [0.0, 7 * np.pi / 6, 11 * np.pi / 6])


def design_sequence(n, variant=None):
    """Effective-model sequence for the transfer: resonant, three- or five-pulse.

    ``n = 5`` defaults to the common-error member of the full-equal family;
    ``variant="table"`` uses the polished published ratio-1 row instead.
    """
    w = 1 / np.sqrt(2)
    if n == 1:
        if variant is not None:
            raise ValueError(f"the resonant pulse has no variants, got {variant!r}")
        return SequenceSpec.from_phases([0.0], [0.0], w, w)
    if n == 3:
        return solve_three(1.0, variant or "leakage").sequence(w)
    if n == 5:
        if variant in (None, "full-equal"):
            return SequenceSpec.palindrome(*FIVE_COMMON_HALF, w, w)
        if variant == "table":
            row = next(r for r in load_tables()["I"] if r["ratio"] == 1.0)
            system = ConstraintSystem(1.0, "five-full-equal")
            x, _, _ = polish(system, np.array(row["alphas"][1:] + row["betas"][1:]))
            seq = system.sequence(x)
            return SequenceSpec.from_phases(seq.alphas, seq.betas, w, w)
        raise ValueError(f"unsupported five-pulse variant {variant!r}")
    raise ValueError(f"transfer supports n in (1, 3, 5), got {n}")


@dataclass(frozen=True)
class SweepPoint:
    delta: float
    kappa: float
    gamma: float
    fidelity: float


def transfer_sweep(task, deltas, kappas=(0.0,), gammas=(0.0,), g=30.0, n_max=1, threads=None):
    """Fidelity over a ``(delta, kappa, gamma)`` grid, ordered delta-major."""
    grid = [(d, k, gm) for d in deltas for k in kappas for gm in gammas]

    def run(point):
        d, k, gm = point
        sys = CavitySystem(omega=1.0, g=g, delta=d, kappa=k, gamma=gm, n_max=n_max)
        return SweepPoint(float(d), float(k), float(gm), transfer_fidelity(sys, task))

    return ordered_map(run, grid, threads)


def format_sweep_csv(points):
    lines = ["delta,kappa,gamma,fidelity"]
    lines += [f"{p.delta:.12g},{p.kappa:.12g},{p.gamma:.12g},{p.fidelity:.12g}" for p in points]
    return "\n".join(lines) + "\n"
