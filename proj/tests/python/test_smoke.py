import math

import numpy as np
import pytest

import sgiif


def test_dof_counts():
    assert [sgiif.dof_count(2, 1, n) for n in range(3, 6)] == [80, 192, 448]
    assert sgiif.dof_count(2, 1, 3, "full") == 256


def test_iif_coefficients():
    assert sgiif.iif_coefficients(2) == pytest.approx([0.5, 0.5], abs=1e-15)
    assert sgiif.iif_coefficients(3) == pytest.approx([5 / 12, 8 / 12, -1 / 12], abs=1e-15)


def test_diffusion_matrix_is_symmetric_nonpositive():
    a = sgiif.diffusion_matrix(2, 1, 2)
    assert a.shape == (32, 32)
    assert np.allclose(a, a.T, atol=1e-10)
    w = np.linalg.eigvalsh(a)
    assert w.max() < 1e-8 * abs(w.min())
    assert np.allclose(a @ np.eye(32)[0], a[:, 0])


def test_spectrum_matches_numpy():
    a = sgiif.diffusion_matrix(2, 1, 3)
    lam0, cond = sgiif.spectrum(2, 1, 3)
    w = np.linalg.eigvalsh(a)
    assert lam0 == pytest.approx(w.min(), rel=1e-6)
    h = 1 / 8
    assert cond == pytest.approx((1 - h * w.min()) / (1 - h * w.max()), rel=1e-5)


def test_heat_run_converges():
    rows = sgiif.converge(example=1, d=1, k=1, nmin=3, nmax=5, T=0.2)
    assert [r["N"] for r in rows] == [3, 4, 5]
    assert rows[0]["order"][0] is None
    assert all(r["order"][0] > 1.5 for r in rows[1:])


def test_single_run_returns_state():
    out = sgiif.run(3, example=4, d=1, k=1, T=0.1)
    assert out["dof"] == 16
    assert out["U"].shape == (32,)
    assert len(out["errors"]) == 2
    assert all(math.isfinite(e) for e in out["errors"])


def test_cfl_matches_stability_bound():
    lam0, _ = sgiif.spectrum(2, 1, 3)
    cfl = sgiif.find_cfl(2, 1, 3, rk=2)
    assert cfl * abs(lam0) / (64 * 4) == pytest.approx(1.0, abs=0.05)


def test_local_maxima():
    v = [0.0] * 16
    v[5] = 1.0
    assert sgiif.count_local_maxima(v, 4) == 1


def test_validation_errors():
    with pytest.raises(sgiif.ValidationError):
        sgiif.converge(nmin=5, nmax=2)
    with pytest.raises(ValueError):
        sgiif.run(3, bogus=1)
