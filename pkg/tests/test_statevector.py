import numpy as np
import pytest
import scipy.linalg

from conftest import brute_force_hc
from z2hc.errors import PreconditionError, ResourceLimitError
from z2hc.gauge_model import build_model, diag_z_energy, trotter_step_error_bound
from z2hc.graph_core import (
    boundary,
    complete_graph,
    cycle_graph,
    cycle_space_basis,
    cycle_space_elements,
    is_closed_string_config,
    is_hamiltonian_cycle_config,
    random_connected_graph,
)
from z2hc.statevector import (
    GaugeSector,
    StateVector,
    apply_diag_z,
    apply_x_field,
    basis_state,
    closed_string_condensate,
    dense_hamiltonian,
    dump_state,
    exact_evolution,
    exact_propagator,
    ground_state_exact,
    hc_search,
    load_state,
    measure_observables,
    sample_basis_states,
    symmetric_trotter_step,
    trotter_defect,
    trotter_propagator,
    uniform_plus_state,
    z_energies,
)
from z2hc.statevector.oracle import dense_x, dense_z


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, v / np.linalg.norm(v))


class TestStates:
    def test_condensate_torus(self, torus):
        model = build_model(torus)
        psi = closed_string_condensate(model, cycle_space_basis(torus))
        obs = measure_observables(psi, model, 0.0, per_plaquette=True)
        assert psi.norm_squared() == pytest.approx(1.0, abs=1e-14)
        assert obs.z_total == pytest.approx(-9.0, abs=1e-12)
        assert np.allclose(obs.per_plaquette, -1.0, atol=1e-12)
        support = np.flatnonzero(np.abs(psi.amplitudes) > 0)
        assert support.size == 1024
        assert all(is_closed_string_config(torus, int(m)) for m in support[:100])

    def test_uniform_plus(self, torus):
        model = build_model(torus)
        psi = uniform_plus_state(18)
        obs = measure_observables(psi, model, 1.0)
        assert obs.x_total == pytest.approx(-18.0, abs=1e-10)
        assert obs.z_total == pytest.approx(0.0, abs=1e-10)

    def test_cap(self):
        with pytest.raises(ResourceLimitError):
            uniform_plus_state(10, cap=8)

    def test_z_energies_match_formula(self, small_graphs):
        for g in small_graphs:
            model = build_model(g)
            ref = [diag_z_energy(model, m) for m in range(1 << g.n_edges)]
            assert np.array_equal(z_energies(model), ref)


class TestDenseOracles:
    def test_dense_x_against_kron(self):
        sx = np.array([[0, 1], [1, 0]])
        ref = -(np.kron(sx, np.eye(4)) + np.kron(np.kron(np.eye(2), sx), np.eye(2)) + np.kron(np.eye(4), sx))
        assert np.array_equal(dense_x(3), ref)

    def test_exact_propagator_against_expm(self, small_graphs):
        model = build_model(small_graphs[0])
        h = dense_hamiltonian(model, 0.7)
        assert np.allclose(exact_propagator(model, 0.7, 0.3), scipy.linalg.expm(-1j * h * 0.3), atol=1e-12)

    def test_trotter_propagator_against_factors(self, small_graphs):
        model = build_model(small_graphs[1])
        g, t, n = 0.6, 0.5, 3
        z = np.diag(dense_z(model))
        x = dense_x(model.n_qubits)
        a_half = scipy.linalg.expm(-1j * z * t / (2 * n))
        a_full = scipy.linalg.expm(-1j * z * t / n)
        b = scipy.linalg.expm(-1j * g * x * t / n)
        ref = a_half @ b @ np.linalg.matrix_power(a_full @ b, n - 1) @ a_half
        assert np.allclose(trotter_propagator(model, g, t, n), ref, atol=1e-12)

    def test_single_substep_defect_slope(self, small_graphs):
        model = build_model(small_graphs[2])
        ns = np.array([4, 8, 16, 32])
        d = [trotter_defect(model, 0.5, 1.0, int(n)) for n in ns]
        slope = np.polyfit(np.log(ns), np.log(d), 1)[0]
        assert slope == pytest.approx(-2.0, abs=0.1)


class TestEvolution:
    def test_diag_phase(self, small_graphs):
        model = build_model(small_graphs[0])
        psi = random_state(model.n_qubits, 1)
        ref = np.exp(-0.37j * dense_z(model)) * psi.amplitudes
        apply_diag_z(psi, model, 0.37)
        assert np.allclose(psi.amplitudes, ref, atol=1e-13)

    def test_x_field(self, small_graphs):
        n = small_graphs[0].n_edges
        psi = random_state(n, 2)
        ref = scipy.linalg.expm(-1j * 0.8 * dense_x(n) * 0.25) @ psi.amplitudes
        apply_x_field(psi, 0.8, 0.25)
        assert np.allclose(psi.amplitudes, ref, atol=1e-12)

    @pytest.mark.parametrize("idx", range(5))
    def test_trotter_step_matches_dense(self, small_graphs, idx):
        model = build_model(small_graphs[idx])
        psi = random_state(model.n_qubits, idx)
        ref = trotter_propagator(model, 0.45, 0.2, 7) @ psi.amplitudes
        symmetric_trotter_step(psi, model, 0.45, 0.2, 7)
        assert np.allclose(psi.amplitudes, ref, atol=1e-12)

    def test_z_coeff(self, small_graphs):
        model = build_model(small_graphs[3])
        psi = random_state(model.n_qubits, 9)
        ref = trotter_propagator(model, 1.0, 0.3, 4, z_coeff=1.7) @ psi.amplitudes
        symmetric_trotter_step(psi, model, 1.0, 0.3, 4, z_coeff=1.7)
        assert np.allclose(psi.amplitudes, ref, atol=1e-12)

    def test_unitarity(self, torus):
        model = build_model(torus)
        psi = random_state(18, 3)
        for _ in range(5):
            symmetric_trotter_step(psi, model, 0.4, 0.1, 10)
        assert psi.norm_squared() == pytest.approx(1.0, abs=1e-12)

    def test_size_mismatch(self, torus, small_graphs):
        with pytest.raises(PreconditionError):
            symmetric_trotter_step(uniform_plus_state(5), build_model(torus), 0.1, 0.1, 1)

    def test_energy_identity(self, small_graphs):
        model = build_model(small_graphs[4])
        psi = random_state(model.n_qubits, 4)
        obs = measure_observables(psi, model, 0.37)
        h = dense_hamiltonian(model, 0.37)
        assert obs.energy == pytest.approx(np.vdot(psi.amplitudes, h @ psi.amplitudes).real, abs=1e-12)
        assert obs.energy == pytest.approx(obs.z_total + 0.37 * obs.x_total, abs=1e-12)


class TestSector:
    @pytest.mark.parametrize("idx", range(5))
    def test_sweep_agrees_with_full(self, small_graphs, idx):
        graph = small_graphs[idx]
        model = build_model(graph)
        sector = GaugeSector(graph)
        s = sector.condensate()
        f = closed_string_condensate(model, cycle_space_basis(graph))
        assert np.allclose(s.to_statevector().amplitudes, f.amplitudes, atol=1e-14)
        for g in (0.1, 0.2, 0.3):
            sector.trotter_step(s, g, 0.3, 5)
            symmetric_trotter_step(f, model, g, 0.3, 5)
            a, b = sector.observables(s, g), measure_observables(f, model, g)
            assert a.energy == pytest.approx(b.energy, abs=1e-12)
            assert a.x_total == pytest.approx(b.x_total, abs=1e-12)
        assert abs(s.to_statevector().overlap(f)) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_plus_lifts(self, torus):
        sector = GaugeSector(torus)
        lifted = sector.uniform_plus().to_statevector()
        assert np.allclose(lifted.amplitudes, uniform_plus_state(18).amplitudes, atol=1e-14)

    def test_from_amplitudes_inverse(self, small_graphs):
        sector = GaugeSector(small_graphs[2])
        s = sector.condensate()
        sector.trotter_step(s, 0.5, 0.4, 4)
        back = sector.from_amplitudes(s.to_statevector())
        assert np.allclose(back.phi, s.phi, atol=1e-12)
        with pytest.raises(PreconditionError):
            sector.from_amplitudes(basis_state(sector.n_qubits, 1))

    @pytest.mark.parametrize("g", [0.2, 0.5, 1.3])
    def test_ground_state_three_ways(self, small_graphs, g):
        graph = small_graphs[3]
        model = build_model(graph)
        e_sec, s = GaugeSector(graph).ground_state(g)
        e_lan, f = ground_state_exact(model, g)
        w, v = scipy.linalg.eigh(dense_hamiltonian(model, g))
        # the lowest level of H lives in the gauge-invariant sector
        assert e_sec == pytest.approx(w[0], abs=1e-9)
        assert e_lan == pytest.approx(w[0], abs=1e-9)
        assert abs(s.to_statevector().overlap(f)) == pytest.approx(1.0, abs=1e-8)

    def test_torus_ground_state_lanczos(self, torus):
        e_sec, _ = GaugeSector(torus).ground_state(0.3)
        e_lan, _ = ground_state_exact(build_model(torus), 0.3)
        assert e_sec == pytest.approx(e_lan, abs=1e-9)

    def test_ground_state_zero_coupling(self, torus):
        e, psi = ground_state_exact(build_model(torus), 0.0)
        ref = closed_string_condensate(build_model(torus), cycle_space_basis(torus))
        assert e == -9.0
        assert abs(psi.overlap(ref)) == pytest.approx(1.0, abs=1e-12)

    def test_tree_representative(self, torus):
        sector = GaugeSector(torus)
        for b in (0, 0b11, 0b101000000, 0b111100000):
            m = sector.tree_representative(b)
            assert boundary(torus, m) == b
        with pytest.raises(PreconditionError):
            sector.tree_representative(0b1)


class TestSampling:
    def test_seeded(self, torus):
        sector = GaugeSector(torus)
        a = sample_basis_states(sector.condensate(), 500, 7)
        b = sample_basis_states(sector.condensate(), 500, 7)
        assert a == b

    def test_condensate_samples_closed(self, torus):
        samples = sample_basis_states(GaugeSector(torus).condensate(), 2000, 1)
        assert all(is_closed_string_config(torus, m) for m in samples)

    def test_sector_and_full_sampling_law(self, small_graphs):
        graph = small_graphs[4]
        sector = GaugeSector(graph)
        s = sector.condensate()
        sector.trotter_step(s, 0.7, 0.5, 5)
        probs = s.to_statevector().probabilities()
        shots = 40000
        counts = np.bincount(sample_basis_states(s, shots, 3), minlength=probs.size)
        sigma = np.sqrt(shots * probs * (1 - probs)) + 1e-9
        assert np.max(np.abs(counts - shots * probs) / sigma) < 5.5

    def test_hc_search(self, torus):
        res = hc_search(GaugeSector(torus).condensate(), torus, 2000, 0)
        assert res.found and res.hc_hit_count > 0
        assert is_hamiltonian_cycle_config(torus, res.witness)
        tree = random_connected_graph(9, 8, 0)
        miss = hc_search(GaugeSector(tree).condensate(), tree, 200, 0)
        assert not miss.found and miss.witness is None

    def test_hc_mass_in_condensate(self):
        g = complete_graph(5)
        psi = closed_string_condensate(build_model(g), cycle_space_basis(g))
        mass = sum(abs(psi.amplitudes[m]) ** 2 for m in range(1 << 10) if is_hamiltonian_cycle_config(g, m))
        assert mass == pytest.approx(brute_force_hc(g) / cycle_space_basis(g).size, abs=1e-12)


def test_dump_round_trip(tmp_path):
    psi = random_state(6, 5)
    dump_state(psi, tmp_path / "s.bin")
    again = load_state(tmp_path / "s.bin")
    assert again.n_qubits == 6 and np.array_equal(again.amplitudes, psi.amplitudes)
    (tmp_path / "bad.bin").write_bytes(b"nope\n")
    with pytest.raises(PreconditionError):
        load_state(tmp_path / "bad.bin")


def test_cycle_space_elements_dtype(torus):
    elements = cycle_space_elements(cycle_space_basis(torus))
    assert elements.dtype == np.int64


class TestExactEvolution:
    def test_zero_time_identity(self, small_graphs):
        model = build_model(small_graphs[0])
        psi = random_state(model.n_qubits, 0)
        ref = psi.amplitudes.copy()
        assert np.array_equal(exact_evolution(psi, model, 0.5, 0.0).amplitudes, ref)

    def test_eigenstate_phase(self, small_graphs):
        model = build_model(small_graphs[1])
        w, v = scipy.linalg.eigh(dense_hamiltonian(model, 0.8))
        psi = StateVector(model.n_qubits, v[:, 3].astype(complex))
        exact_evolution(psi, model, 0.8, 1.3)
        assert np.allclose(psi.amplitudes, np.exp(-1j * w[3] * 1.3) * v[:, 3], atol=1e-12)

    @pytest.mark.parametrize("idx", range(5))
    def test_trotter_within_commutator_bound(self, small_graphs, idx):
        model = build_model(small_graphs[idx])
        psi = random_state(model.n_qubits, idx)
        ref = exact_evolution(psi.copy(), model, 0.6, 0.1)
        symmetric_trotter_step(psi, model, 0.6, 0.1, 4)
        err = np.linalg.norm(psi.amplitudes - ref.amplitudes)
        assert err <= trotter_step_error_bound(model, 0.6, 0.1, 4, "commutator")

    def test_oracle_cap(self, torus):
        with pytest.raises(ResourceLimitError):
            exact_evolution(uniform_plus_state(18), build_model(torus), 0.1, 0.1)


def test_large_coupling_energy(torus):
    e, _ = GaugeSector(torus).ground_state(50.0)
    assert e / (-50.0 * 18) == pytest.approx(1.0, abs=2e-3)


def test_ring_witness():
    ring = cycle_graph(9)
    res = hc_search(GaugeSector(ring).condensate(), ring, 50, 0)
    assert res.found and res.witness == (1 << 9) - 1
    assert res.hc_hit_count == pytest.approx(25, abs=15)  # half the ring condensate is the full ring
