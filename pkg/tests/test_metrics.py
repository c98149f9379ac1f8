import numpy as np
import pytest

from balkit import (DimensionError, bt, bt_bound, error_system, eval_tf, freq_response,
                    hinf_grid, poles, random_stable, reciprocal)


def test_freq_response_s1(s1):
    assert freq_response(s1, [0.0]) == pytest.approx([1.0])
    assert freq_response(s1, [1.0]) == pytest.approx([1.0 / np.sqrt(2.0)])


def test_freq_response_monotone_s1(s1):
    grid = np.geomspace(1e-2, 1e2, 30)
    vals = freq_response(s1, grid)
    assert np.all(np.diff(vals) < 0)  # |H| = 1/sqrt(1 + w^2)


def test_freq_response_all_singular_values():
    sys = random_stable(6, 2, 3, seed=0)
    vals = freq_response(sys, [0.5, 2.0], all_singular_values=True)
    assert vals.shape == (2, 2)
    assert np.all(vals[:, 0] >= vals[:, 1])


def test_hinf_grid_s1(s1):
    est = hinf_grid(s1, 1e-3, 1e3, 200)
    assert est >= 0.999
    assert est <= 1.0 + 1e-12  # grid estimate is a lower bound of the true norm 1


def test_hinf_grid_exact_rom(s1):
    rom = bt(s1, r=1)
    assert hinf_grid(error_system(s1, rom), 1e-3, 1e3, 100) <= 1e-12


def test_hinf_grid_invalid():
    with pytest.raises(ValueError):
        hinf_grid(None, 1.0, 1.0, 100)


def test_bt_bound_examples():
    assert bt_bound([0.7310, 0.0190], 1) == pytest.approx(0.0380)
    assert bt_bound([1.0], 0) == pytest.approx(2.0)
    with pytest.raises(DimensionError):
        bt_bound([1.0, 0.5], 2)


def test_poles_s1(s1):
    rom = bt(s1, r=1)
    assert poles(rom) == pytest.approx([-1.0])


def test_poles_sorted_and_stable():
    sys = random_stable(8, 1, 1, seed=3)
    rom = bt(sys, r=4)
    lam = poles(rom)
    assert np.all(np.diff(lam.real) >= 0)
    assert np.all(lam.real < 0)


@pytest.mark.parametrize("seed", range(300, 310))
def test_error_monotone_in_r(seed):
    from balkit import lyap_factor_dense

    sys = random_stable(12, 2, 2, seed=seed)
    fac = lyap_factor_dense(sys)
    errs = []
    for r in (2, 4, 6):
        rom = bt(sys, r=r, factors=fac)
        errs.append(hinf_grid(error_system(sys, rom), 1e-3, 1e3, 200))
    assert errs[1] <= errs[0] + 1e-12
    assert errs[2] <= errs[1] + 1e-12


def test_response_reciprocity():
    sys = random_stable(7, 2, 2, seed=14)
    rec = reciprocal(sys)
    for w in (0.3, 1.7, 9.0):
        lhs = eval_tf(rec, 1.0 / (1j * w))
        rhs = eval_tf(sys, 1j * w)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(rhs)))
        s_lhs = np.linalg.svd(lhs, compute_uv=False)
        s_rhs = np.linalg.svd(rhs, compute_uv=False)
        assert np.max(np.abs(s_lhs - s_rhs)) <= 1e-10 * max(1.0, s_rhs[0])
