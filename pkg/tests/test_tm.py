"""Transfer-matrix engine: mismatch, node counts, eigenvalues, eigenfunctions."""

import numpy as np
import pytest

from cantor_spectra import (
    CantorSpec,
    Grid,
    ModelParams,
    PiecewisePotential,
    ShootingState,
    StaleEigenvalueError,
    assemble_hamiltonian,
    build_cantor_potential,
    eigenvalues_in_range,
    eigenvector,
    node_count,
    sturm_count,
    tm_eigenfunction,
    tm_eigenvalues,
    tm_mismatch,
)
from cantor_spectra.tm import _sweep


def box_continuum(mu, k):
    return (k * np.pi / mu) ** 2 - 1.0


class TestMismatch:
    def test_vanishes_at_the_box_eigenvalues(self):
        # node counts at the exact eigenvalue are knife-edge (the float
        # rounds to either side of the true root), so only |f| is checked
        pot = build_cantor_potential(CantorSpec(order=0))
        params = ModelParams(mu=10.0)
        for k in (1, 2, 3):
            f, _ = tm_mismatch(pot, params, box_continuum(10.0, k))
            assert abs(f) <= 1e-12

    def test_at_the_potential_floor(self):
        # k = 0 exactly: psi(x) = x, so psi(1) = 1 with no interior zeros
        pot = build_cantor_potential(CantorSpec(order=0))
        f, nodes = tm_mismatch(pot, ModelParams(mu=10.0), -1.0)
        assert f == 1.0
        assert nodes == 0

    def test_continuous_across_a_segment_value(self):
        # the propagator switches series branch where eps crosses v_j
        pot = PiecewisePotential(np.array([0.0, 0.5, 1.0]), np.array([-1.0, 0.3]))
        params = ModelParams(mu=25.0)
        for v in (-1.0, 0.3):
            mid = tm_mismatch(pot, params, v)[0]
            for side in (-1e-12, 1e-12):
                assert abs(tm_mismatch(pot, params, v + side)[0] - mid) <= 1e-9

    def test_rejects_nonfinite_energy(self):
        pot = build_cantor_potential(CantorSpec(order=0))
        with pytest.raises(ValueError):
            tm_mismatch(pot, ModelParams(mu=10.0), np.inf)

    def test_rescaling_leaves_signs_and_counts_alone(self):
        pot = build_cantor_potential(CantorSpec(order=1))
        params = ModelParams(mu=6.0)
        eps = np.linspace(-0.99, 2.0, 301)
        f1, _, n1 = _sweep(pot, params, eps, rescale=True)
        f2, _, n2 = _sweep(pot, params, eps, rescale=False)
        np.testing.assert_array_equal(np.sign(f1), np.sign(f2))
        np.testing.assert_array_equal(n1, n2)

    def test_shooting_state_validation(self):
        ShootingState(1.0, 0.0, 3)
        with pytest.raises(ValueError):
            ShootingState(0.0, 0.0, 0)
        with pytest.raises(ValueError):
            ShootingState(1.0, 1.0, -1)


class TestNodeCount:
    def test_box_oscillation_theorem(self):
        pot = build_cantor_potential(CantorSpec(order=0))
        params = ModelParams(mu=20.0)
        for k in range(1, 6):
            assert node_count(pot, params, box_continuum(20.0, k) + 1e-9) == k
            assert node_count(pot, params, box_continuum(20.0, k) - 1e-9) == k - 1

    def test_nondecreasing_in_energy(self, make_random_potential):
        rng = np.random.default_rng(17)
        pot = make_random_potential(rng)
        params = ModelParams(mu=40.0)
        eps = np.sort(rng.uniform(-1.0, 1.0, 80))
        counts = [node_count(pot, params, e) for e in eps]
        assert counts == sorted(counts)

    def test_matches_sturm_counts_on_a_fine_grid(self):
        pot = build_cantor_potential(CantorSpec(order=2))
        params = ModelParams(mu=40.0)
        ham = assemble_hamiltonian(pot, params, Grid(16000))
        rng = np.random.default_rng(23)
        for eps in rng.uniform(-1.0, 0.5, 50):
            assert node_count(pot, params, eps) == sturm_count(ham, eps)

    def test_matches_a_dense_oracle_between_levels(self, make_random_potential):
        rng = np.random.default_rng(41)
        pot = make_random_potential(rng)
        params = ModelParams(mu=15.0)
        ham = assemble_hamiltonian(pot, params, Grid(800))
        vals = eigenvalues_in_range(ham, *ham.eigenvalue_bounds()).eigenvalues[:8]
        mids = 0.5 * (vals[:-1] + vals[1:])
        for i, eps in enumerate(mids):
            assert node_count(pot, params, float(eps)) == i + 1


class TestEigenvalues:
    def test_box_spectrum_is_exact(self):
        pot = build_cantor_potential(CantorSpec(order=0))
        spec = tm_eigenvalues(pot, ModelParams(mu=300.0), -1.0, 0.0)
        k = np.arange(1, 96)
        assert len(spec) == 95
        assert spec.method == "tm"
        np.testing.assert_allclose(spec.eigenvalues, box_continuum(300.0, k), rtol=0, atol=1e-10)
        assert np.all(np.diff(spec.eigenvalues) > 0)

    def test_empty_window(self):
        pot = build_cantor_potential(CantorSpec(order=1))
        spec = tm_eigenvalues(pot, ModelParams(mu=3.0), 0.9999, 1.0)
        assert len(spec) == 0

    def test_count_matches_the_node_count_difference(self, make_random_potential):
        rng = np.random.default_rng(29)
        pot = make_random_potential(rng)
        params = ModelParams(mu=55.0)
        for _ in range(4):
            lo, hi = np.sort(rng.uniform(-1.0, 1.5, 2))
            if hi - lo < 1e-3:
                continue
            spec = tm_eigenvalues(pot, params, lo, hi)
            want = node_count(pot, params, float(np.nextafter(hi, np.inf))) - node_count(
                pot, params, float(np.nextafter(lo, np.inf))
            )
            assert len(spec) == want

    def test_tunneling_ties_keep_their_multiplicity(self):
        pot = PiecewisePotential(np.array([0.0, 0.4, 0.6, 1.0]), np.array([-1.0, 1.0, -1.0]))
        spec = tm_eigenvalues(pot, ModelParams(mu=100.0), -1.0, -0.9)
        assert len(spec) >= 2
        assert spec.eigenvalues[0] == spec.eigenvalues[1]

    def test_deep_barriers_do_not_overflow(self):
        # order-5 barriers at mu = 1000 push kappa*w far past exp range
        pot = build_cantor_potential(CantorSpec(order=5))
        spec = tm_eigenvalues(pot, ModelParams(mu=1000.0), -1.0, -0.95)
        assert np.all(np.isfinite(spec.eigenvalues))
        assert len(spec) == node_count(
            pot, ModelParams(mu=1000.0), float(np.nextafter(-0.95, np.inf))
        )

    def test_rejects_bad_windows(self):
        pot = build_cantor_potential(CantorSpec(order=0))
        with pytest.raises(ValueError):
            tm_eigenvalues(pot, ModelParams(mu=10.0), 0.5, 0.5)
        with pytest.raises(ValueError):
            tm_eigenvalues(pot, ModelParams(mu=10.0), -1.0, 0.0, tol=-1e-10)


class TestEigenfunction:
    def test_box_ground_state_is_a_sine(self):
        pot = build_cantor_potential(CantorSpec(order=0))
        mu = 10.0
        wf = tm_eigenfunction(pot, ModelParams(mu=mu), box_continuum(mu, 1), 500)
        want = np.sqrt(2.0) * np.sin(np.pi * wf.x)
        np.testing.assert_allclose(wf.values, want, rtol=0, atol=1e-10)
        assert abs(wf.h * np.sum(wf.values**2) - 1.0) <= 1e-12

    def test_excited_state_changes_sign(self):
        pot = build_cantor_potential(CantorSpec(order=0))
        mu = 10.0
        wf = tm_eigenfunction(pot, ModelParams(mu=mu), box_continuum(mu, 2), 500)
        want = np.sqrt(2.0) * np.sin(2.0 * np.pi * wf.x)
        np.testing.assert_allclose(wf.values, want, rtol=0, atol=1e-10)

    def test_rejects_a_stale_energy(self):
        pot = build_cantor_potential(CantorSpec(order=0))
        with pytest.raises(StaleEigenvalueError):
            tm_eigenfunction(pot, ModelParams(mu=10.0), -0.5, 100)

    def test_rejects_a_bad_sample_count(self):
        pot = build_cantor_potential(CantorSpec(order=0))
        with pytest.raises(ValueError):
            tm_eigenfunction(pot, ModelParams(mu=10.0), box_continuum(10.0, 1), 0)

    def test_agrees_with_the_fd_eigenvector(self):
        pot = build_cantor_potential(CantorSpec(order=1))
        params = ModelParams(mu=10.0)
        n = 2000
        ham = assemble_hamiltonian(pot, params, Grid(n))
        eps_fd = eigenvalues_in_range(ham, -1.0, 0.0).eigenvalues[0]
        wf_fd = eigenvector(ham, eps_fd)
        eps_tm = tm_eigenvalues(pot, params, -1.0, 0.0).eigenvalues[0]
        wf_tm = tm_eigenfunction(pot, params, eps_tm, n)
        np.testing.assert_allclose(wf_tm.values, wf_fd.values, rtol=0, atol=1e-4)

    def test_localized_state_survives_the_amplitude_ledger(self):
        # a tunneling-tied pair at mu = 300: the state lives in wells
        # separated by barriers whose naive exponentials overflow; the
        # log-amplitude bookkeeping must assemble it anyway
        pot = build_cantor_potential(CantorSpec(order=2))
        params = ModelParams(mu=300.0)
        eps = tm_eigenvalues(pot, params, -0.33, -0.30, tol=1e-15).eigenvalues[0]
        wf = tm_eigenfunction(pot, params, float(eps), 2430)
        assert np.all(np.isfinite(wf.values))
        assert abs(wf.h * np.sum(wf.values**2) - 1.0) <= 1e-12
        assert wf.residual <= 1e-6
        # and it is localized: nearly all mass sits in well material
        b, v = pot.breakpoints, pot.values
        seg = np.minimum(np.searchsorted(b, wf.x, side="right") - 1, v.size - 1)
        well_mass = wf.h * np.sum(wf.values[v[seg] == -1.0] ** 2)
        assert well_mass >= 0.9

    def test_gate_rejects_noise_floored_band_states(self):
        # propagating across fifteen order-4 barriers leaves the boundary
        # mismatch pinned at its evaluation-noise floor (~1e-3) for every
        # float near the band; the staleness gate must refuse to certify
        # an eigenfunction there, no matter how hard the root was refined
        pot = build_cantor_potential(CantorSpec(order=4))
        params = ModelParams(mu=300.0)
        eps = tm_eigenvalues(pot, params, -1.0, -0.6, tol=1e-15).eigenvalues[0]
        with pytest.raises(StaleEigenvalueError):
            tm_eigenfunction(pot, params, float(eps), 1000)
