"""Validation behavior of the shared value types."""

import numpy as np
import pytest

from cantor_spectra import ConvergenceError, Grid, ModelParams, Spectrum, Wavefunction


class TestModelParams:
    def test_accepts_positive_mu(self):
        assert ModelParams(mu=300).mu == 300.0

    @pytest.mark.parametrize("mu", [0.0, -1.0, np.inf, np.nan])
    def test_rejects_nonpositive_or_nonfinite_mu(self, mu):
        with pytest.raises(ValueError):
            ModelParams(mu=mu)


class TestGrid:
    def test_spacing_and_nodes(self):
        g = Grid(3)
        assert g.h == 0.25
        assert g.nodes.tolist() == [0.25, 0.5, 0.75]

    @pytest.mark.parametrize("n", [0, -3, 2.5, True])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            Grid(n)


class TestSpectrum:
    def test_holds_window_tol_and_method(self):
        s = Spectrum(np.array([-0.5, -0.5, -0.1]), (-1.0, 0.0), 1e-10, "fd")
        assert len(s) == 3
        assert list(s) == [-0.5, -0.5, -0.1]
        assert s.window == (-1.0, 0.0)
        assert s.eigenvalues.flags.writeable is False

    def test_ties_are_allowed_but_decreases_are_not(self):
        Spectrum(np.array([0.1, 0.1]), (0.0, 1.0), 1e-10, "tm")
        with pytest.raises(ValueError):
            Spectrum(np.array([0.2, 0.1]), (0.0, 1.0), 1e-10, "tm")

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"eigenvalues": np.array([[0.1]]), "window": (0.0, 1.0), "tol": 1e-10, "method": "fd"},
            {"eigenvalues": np.array([np.nan]), "window": (0.0, 1.0), "tol": 1e-10, "method": "fd"},
            {"eigenvalues": np.array([0.1]), "window": (1.0, 0.0), "tol": 1e-10, "method": "fd"},
            {"eigenvalues": np.array([0.1]), "window": (0.0, 1.0), "tol": 0.0, "method": "fd"},
            {"eigenvalues": np.array([0.1]), "window": (0.0, 1.0), "tol": 1e-10, "method": "qr"},
        ],
    )
    def test_rejects_malformed_spectra(self, kwargs):
        with pytest.raises(ValueError):
            Spectrum(**kwargs)


class TestWavefunction:
    def test_requires_grid_normalization(self):
        n = 99
        h = 1.0 / (n + 1)
        vals = np.full(n, 1.0 / np.sqrt(n * h))
        wf = Wavefunction(vals, -0.5, h)
        assert abs(wf.h * np.sum(wf.values**2) - 1.0) <= 1e-12
        assert wf.x[0] == h and wf.x[-1] == n * h

    def test_rejects_unnormalized_values(self):
        with pytest.raises(ValueError):
            Wavefunction(np.ones(10), -0.5, 1.0 / 11)

    def test_rejects_bad_spacing(self):
        vals = np.full(9, np.sqrt(10.0))  # normalized for h = 0.1
        with pytest.raises(ValueError):
            Wavefunction(vals, -0.5, -0.1)


def test_convergence_error_carries_the_residual():
    err = ConvergenceError("stalled", residual=3e-7)
    assert err.residual == 3e-7
    assert "stalled" in str(err)
