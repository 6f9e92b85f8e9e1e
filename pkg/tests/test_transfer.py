import numpy as np
import pytest
import scipy.linalg

from cpforge import smallmat
from cpforge.pulses import propagate_sequence
from cpforge.transfer import (
    CavitySystem,
    IntegrationError,
    TransferTask,
    annihilation,
    check_density,
    collapse_operators,
    design_sequence,
    effective_basis,
    effective_hamiltonian,
    effective_inversion,
    excitation_number,
    format_sweep_csv,
    full_hamiltonian,
    integrate,
    lindblad_propagate,
    liouvillian,
    physicality,
    transfer_fidelity,
    transfer_sweep,
    unitary_sequence,
)


def pure(sys, *label):
    v = sys.ket(*label)
    return np.outer(v, v.conj())


def test_dimensions_and_conservation():
    for n_max in (1, 2):
        sys = CavitySystem(delta=0.1, n_max=n_max)
        h = full_hamiltonian(sys, 0.4, 2.2)
        assert h.shape == (9 * (n_max + 1),) * 2
        assert smallmat.is_hermitian(h)
        ne = excitation_number(sys)
        assert np.linalg.norm(h @ ne - ne @ h) <= 1e-12


def test_no_laser_means_no_phase_dependence():
    sys = CavitySystem(omega=0.0)
    assert np.array_equal(full_hamiltonian(sys, 0.0, 0.0), full_hamiltonian(sys, 1.0, 2.0))
    with pytest.raises(ValueError):
        transfer_fidelity(sys, TransferTask(design_sequence(3)))


def test_effective_model_is_the_projection():
    sys = CavitySystem(delta=-0.3)
    v = effective_basis(sys)
    for phases in ((0.0, 0.0), (1.1, -0.4)):
        h = full_hamiltonian(sys, *phases)
        assert np.allclose(v.conj().T @ h @ v, effective_hamiltonian(sys, *phases), atol=1e-14)


def test_effective_strengths_are_equal():
    seq = design_sequence(3)
    assert seq.pulses[0].chi == pytest.approx(np.pi / 4)
    assert seq.duration_per_pulse == pytest.approx(np.pi)


def test_not_design_swaps_effective_states():
    task = TransferTask(design_sequence(3, "qubit"))
    u = propagate_sequence(task.sequence)
    assert abs(u[0, 1]) == pytest.approx(1.0, abs=1e-12)


def test_full_model_tracks_effective_model():
    for n in (1, 3, 5):
        task = TransferTask(design_sequence(n))
        for delta in (0.0, 0.3):
            sys = CavitySystem(g=30.0, delta=delta)
            u = unitary_sequence(sys, task.phases, task.duration(sys.omega))
            full = abs(sys.ket(1, 0) @ u @ sys.ket(0, 1)) ** 2
            assert full == pytest.approx(effective_inversion(task.sequence, delta), abs=2e-2)


def test_closed_system_matches_unitary():
    sys = CavitySystem(delta=0.2)
    task = TransferTask(design_sequence(3))
    rho0 = pure(sys, 0, 1)
    ev = lindblad_propagate(sys, task.phases, rho0, task.duration(1.0))
    u = unitary_sequence(sys, task.phases, task.duration(1.0))
    assert smallmat.unitarity_defect(u) < 1e-10
    assert smallmat.frob_dist(ev.rho, u @ rho0 @ u.conj().T) <= 1e-7


def test_rk4_matches_exact_superoperator():
    sys = CavitySystem(delta=0.1, kappa=0.3, gamma=0.2)
    h = full_hamiltonian(sys, 0.5, 1.5)
    jumps = collapse_operators(sys)
    rho0 = pure(sys, 0, 1)
    rho, steps = integrate(h, jumps, rho0, np.pi)
    exact = (scipy.linalg.expm(np.pi * liouvillian(h, jumps)) @ rho0.ravel()).reshape(rho.shape)
    assert steps >= 2000
    assert np.abs(rho - exact).max() < 1e-8


def test_cavity_decay():
    sys = CavitySystem(kappa=0.7)
    a = annihilation(sys.n_max)
    rho0 = pure(sys, 1, 1, 1)
    t = 2.0
    rho, _ = integrate(np.zeros((sys.dim, sys.dim)), [np.sqrt(sys.kappa) * a], rho0, t)
    assert rho[sys.index(1, 1, 1), sys.index(1, 1, 1)].real == pytest.approx(np.exp(-sys.kappa * t), abs=1e-10)
    assert rho[sys.index(1, 1, 0), sys.index(1, 1, 0)].real == pytest.approx(1 - np.exp(-sys.kappa * t), abs=1e-10)


def test_ground_state_is_stationary():
    sys = CavitySystem(delta=0.4)
    task = TransferTask(design_sequence(3))
    rho0 = pure(sys, 1, 1)
    ev = lindblad_propagate(sys, task.phases, rho0, task.duration(1.0))
    assert np.abs(ev.rho - rho0).max() < 1e-12


def test_physicality_with_dissipation():
    sys = CavitySystem(delta=0.25, kappa=0.05, gamma=0.05)
    task = TransferTask(design_sequence(3))
    ev = lindblad_propagate(sys, task.phases, pure(sys, 0, 1), task.duration(1.0))
    p = physicality(ev.rho, sys)
    assert p["trace_error"] <= 1e-8 and p["min_eigenvalue"] >= -1e-8 and p["hermiticity"] <= 1e-10
    # decay only lowers the excitation number
    assert p["excitation"] < 1


def test_closed_system_keeps_excitation():
    sys = CavitySystem(delta=-0.2)
    task = TransferTask(design_sequence(5))
    ev = lindblad_propagate(sys, task.phases, pure(sys, 0, 1), task.duration(1.0))
    assert physicality(ev.rho, sys)["excitation"] == pytest.approx(1.0, abs=1e-8)


def test_no_flow_into_higher_sectors():
    sys = CavitySystem(delta=0.1, kappa=0.2, n_max=2)
    task = TransferTask(design_sequence(3))
    ev = lindblad_propagate(sys, task.phases, pure(sys, 0, 1), task.duration(1.0))
    ne = np.real(np.diag(excitation_number(sys)))
    assert np.real(np.diag(ev.rho))[ne >= 2 - 1e-12].sum() <= 1e-10


def test_cutoff_insensitivity():
    task = TransferTask(design_sequence(3))
    f1 = transfer_fidelity(CavitySystem(delta=0.2, kappa=0.02, n_max=1), task)
    f2 = transfer_fidelity(CavitySystem(delta=0.2, kappa=0.02, n_max=2), task)
    assert f1 == pytest.approx(f2, abs=1e-10)


def test_superposition_transfer():
    task = TransferTask(design_sequence(5), theta=0.6, vartheta=1.3)
    assert transfer_fidelity(CavitySystem(), task) > 0.99


def test_density_validation():
    sys = CavitySystem()
    with pytest.raises(ValueError, match="trace"):
        check_density(2 * pure(sys, 0, 1), sys.dim)
    with pytest.raises(ValueError, match="Hermitian"):
        bad = pure(sys, 0, 1).astype(complex)
        bad[0, 1] = 1j
        check_density(bad, sys.dim)
    with pytest.raises(ValueError):
        check_density(np.eye(3) / 3, sys.dim)


def test_step_failure_is_reported():
    sys = CavitySystem()
    task = TransferTask(design_sequence(1))
    with pytest.raises(IntegrationError):
        lindblad_propagate(sys, task.phases, pure(sys, 0, 1), task.duration(1.0), error_tol=1e-18)


def test_design_sequence_errors():
    with pytest.raises(ValueError):
        design_sequence(7)
    with pytest.raises(ValueError):
        design_sequence(5, "qubit")
    assert design_sequence(5, "table").n == 5


def test_sweep_ordering_and_csv(monkeypatch):
    monkeypatch.setenv("CPFORGE_THREADS", "3")
    task = TransferTask(design_sequence(1))
    pts = transfer_sweep(task, [0.0, 0.1], kappas=[0.0, 0.01], gammas=[0.0])
    assert [(p.delta, p.kappa) for p in pts] == [(0.0, 0.0), (0.0, 0.01), (0.1, 0.0), (0.1, 0.01)]
    text = format_sweep_csv(pts)
    assert text.splitlines()[0] == "delta,kappa,gamma,fidelity"
    monkeypatch.setenv("CPFORGE_THREADS", "1")
    assert format_sweep_csv(transfer_sweep(task, [0.0, 0.1], kappas=[0.0, 0.01])) == text
