import cmath
import math

import numpy as np
import pytest

import bornlab


def test_evolve_is_unitary_for_real_hopping():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=64) + 1j * rng.normal(size=64)
    out = bornlab.evolve(psi, 10.0, kappa=0.8, V=0.3)
    assert out.shape == psi.shape
    assert abs(np.linalg.norm(out) - np.linalg.norm(psi)) < 1e-12 * np.linalg.norm(psi)


def test_dispersion_and_growth_rate():
    assert bornlab.dispersion(0.0, kappa=1.0, V=0.5) == pytest.approx(2.5)
    assert bornlab.max_growth_rate(16, kappa=0.5 + 0.1j) == pytest.approx(0.2)
    psi = np.exp(1j * np.arange(16)) + 0.3
    rate = bornlab.norm_growth_rate(psi, 200.0, kappa=0.5 + 0.1j)
    assert abs(rate - 0.2) / 0.2 < 0.01


def test_spread_integral():
    assert bornlab.lorentz_spread_integral(0.1, 0.0, 1.0, math.inf)["value"] == pytest.approx(2.0, abs=1e-6)
    assert bornlab.lorentz_spread_integral(0.1, 0.1, 1.0, 1e4)["overflow"]
    assert bornlab.n_particle_imbalance(0.1j, 3, 10.0) == pytest.approx(math.e**3)


def test_connection_for_scalar_gamma():
    gamma = np.zeros((4, 2, 2), dtype=complex)
    gamma[2] = 0.05 * np.eye(2)
    conn = bornlab.solve_connection(gamma)
    expected = np.zeros((4, 4, 4))
    for mu in range(4):
        expected[mu, mu, 2] = -0.1
    assert np.allclose(conn, expected, atol=1e-15)
    with pytest.raises(bornlab.PreconditionError):
        bornlab.solve_connection(np.zeros((3, 2, 2)))


def test_weyl_mode_error_is_fourth_order():
    coarse = bornlab.weyl_mode_phase_error(8, 0.1, (2, 0, 0), 1, 0.032, 100)
    fine = bornlab.weyl_mode_phase_error(8, 0.1, (2, 0, 0), 1, 0.016, 200)
    assert 12.0 <= coarse / fine <= 20.0


def test_channel_and_imbalance():
    alpha, beta = bornlab.channel_unitary(1.0, 0.0, math.pi / 2)
    assert abs(alpha) < 1e-15 and abs(beta + 1j) < 1e-15
    assert abs(abs(alpha + beta) - 1.0) < 1e-12
    tau = bornlab.opening_duration(4, 1.0)
    assert math.isclose(math.sin(tau), 0.5)
    assert bornlab.imbalance_demo(0.8, 0.3, 3) == pytest.approx([1.1, 1.21, 1.331], rel=1e-12)


def test_deutsch_protocol():
    payload = bornlab.deutsch(2, 3, shots=100000, seed=7)
    assert payload["p_A"]["exact"] == "2/5"
    assert payload["sampled"]["within_3sigma"]
    moduli = [a["modulus"] for a in payload["final_amplitudes"] if a["modulus"] > 0.5]
    assert len(moduli) == 5 and all(abs(x - 1.0) < 1e-12 for x in moduli)
    with pytest.raises(bornlab.PreconditionError):
        bornlab.deutsch(0, 0)


def test_run_envelope_and_csv():
    env = bornlab.run("blowup", mode="integral", kappa_im=0.0)
    assert env["schema"] == "bornlab.result/1"
    assert env["payload"]["I_infinity"] == pytest.approx(2.0, abs=1e-6)
    csv = bornlab.run("dispersion", points=4)
    assert csv.startswith("# schema=bornlab.dispersion/1")
    assert len(csv.strip().splitlines()) == 6


def test_philox_known_answer():
    assert bornlab.philox4x32_10([0, 0, 0, 0], [0, 0]) == [0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8]
