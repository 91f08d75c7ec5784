import math

import numpy as np
import pytest

import kgfilon


def test_moments_at_zero_frequency():
    mu1, mu2, mu3 = kgfilon.moments(0.0, 0.1)
    assert mu1 == pytest.approx(0.1, rel=1e-15)
    assert mu2 == pytest.approx(0.005, rel=1e-15)
    assert mu3 == pytest.approx(1e-3 / 3.0, rel=1e-15)


def test_moments_closed_form():
    omega, h = 1e3, 0.01
    mu1, _, _ = kgfilon.moments(omega, h)
    exact = (np.exp(1j * omega * h) - 1.0) / (1j * omega)
    assert abs(mu1 - exact) <= 1e-13 * abs(exact)


def test_grid():
    grid = kgfilon.Grid(-10.0, 10.0, 200)
    assert len(grid) == 200
    assert grid.nodes[0] == -10.0
    assert grid.dx == pytest.approx(0.1)
    assert grid.symbols.max() == pytest.approx(math.pi * 10.0)


def test_zero_mass_is_free_propagation():
    grid = kgfilon.Grid()
    psi, dpsi = kgfilon.gaussian_initial_state(grid)
    out, _ = kgfilon.solve("xi3-filon", grid, kgfilon.MassModel.zero(), psi, dpsi, 0.01, 100)
    exact, _ = kgfilon.free_propagator(grid, 1.0, psi, dpsi)
    assert np.linalg.norm(out - exact) <= 1e-12 * np.linalg.norm(exact)


def test_third_order_on_constant_mass():
    grid = kgfilon.Grid()
    psi, dpsi = kgfilon.gaussian_initial_state(grid)
    exact, _ = kgfilon.constant_mass_exact(grid, -1.0, 1.0, psi, dpsi)
    errs = []
    for k in (20, 40, 80):
        out, _ = kgfilon.solve("xi3-filon", grid, kgfilon.MassModel.constant(-1.0), psi, dpsi, 1.0 / k, k)
        errs.append(np.linalg.norm(out - exact))
    assert 6.0 <= errs[1] / errs[2] <= 10.0


def test_example1_model_is_real():
    grid = kgfilon.Grid()
    model = kgfilon.MassModel.example1(50.0)
    assert model.omega_max == 50.0
    m = model.evaluate(grid, 0.0)
    assert np.allclose(m.real, -2.0 * grid.nodes**2)
    assert np.abs(m.imag).max() <= 1e-12


def test_run_convergence_records():
    records = kgfilon.run_convergence(problem="free", steps=[10, 20], methods=["xi3-filon", "rk4"])
    assert [r["method"] for r in records] == ["rk4", "rk4", "xi3-filon", "xi3-filon"]
    for r in records:
        assert r["h"] * r["K"] == pytest.approx(1.0)
        if r["method"] == "xi3-filon":
            assert r["error_l2"] <= 1e-11


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        kgfilon.moments(1.0, 0.0)
    with pytest.raises(ValueError):
        kgfilon.run_convergence(methods=["euler"])
    grid = kgfilon.Grid(-1.0, 1.0, 8)
    with pytest.raises(ValueError):
        kgfilon.free_propagator(grid, 1.0, np.zeros(7, complex), np.zeros(8, complex))


def test_cli_in_process():
    code, out, err = kgfilon.cli(["moments", "--omega", "0", "--h", "0.1"])
    assert code == 0
    assert out.splitlines()[0] == "j,re_mu,im_mu"
    code, out, err = kgfilon.cli(["convergence", "--problem", "example2", "--omega", "3"])
    assert code != 0
    assert err.startswith("error: ")
