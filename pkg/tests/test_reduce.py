import numpy as np
import pytest

from balkit import (RankError, SigmaTieError, StateSpace, bt, bt_bound, dc_moment,
                    error_system, eval_tf, hankel_projection, hinf_grid, is_stable,
                    lyap_factor_dense, order_from_tolerance, random_stable, spa,
                    spa_direct)

from conftest import default_grid, grid_diff, rel_grid_diff


def hsv_of(sys):
    fac = lyap_factor_dense(sys)
    return hankel_projection(fac, sys.E, 1).sigma


def pick_r_with_gap(sigma, r_max, min_ratio=1.01):
    for r in range(min(r_max, sigma.size - 1), 0, -1):
        if sigma[r] > 0 and sigma[r - 1] / sigma[r] > min_ratio:
            return r
    return None


def test_bt_full_order_identity(s1):
    rom = bt(s1, r=1)
    assert grid_diff(s1, rom.sys, default_grid(20)) <= 1e-12
    assert rom.method == "BT"
    assert rom.hankel_used == pytest.approx([0.5])


def test_bt_s2_error_within_bound(s2):
    rom = bt(s2, r=1)
    sigma = hsv_of(s2)
    err = hinf_grid(error_system(s2, rom), 1e-4, 1e4, 300)
    assert err <= 2.0 * sigma[1] + 1e-10
    assert 2.0 * sigma[1] == pytest.approx(0.0380, abs=2e-4)


def test_bt_full_order_random():
    sys = random_stable(20, 2, 2, seed=0)
    rom = bt(sys, r=20)
    assert rel_grid_diff(sys, rom.sys, default_grid()) <= 1e-10


def test_bt_order_from_tol(s2):
    rom = bt(s2, tol=0.1)
    assert rom.r == 1  # 2 * 0.019 <= 0.1 * 2 * (0.731 + 0.019)


def test_bt_tie_warning():
    # two identical decoupled subsystems give a tied Hankel pair
    A = np.diag([-1.0, -1.0])
    sys = StateSpace(A=A, B=np.eye(2), C=np.eye(2))
    with pytest.warns(UserWarning, match="tied"):
        bt(sys, r=1)


def test_spa_full_order_identity(s1):
    rom = spa(s1, 1)
    assert grid_diff(s1, rom.sys, default_grid(20)) <= 1e-12
    assert rom.method == "SPA"


def test_spa_s2_dc_interpolation(s2):
    rom = spa(s2, 1)
    assert abs(eval_tf(rom.sys, 0.0)[0, 0] - 1.5) <= 1e-10
    direct = spa_direct(s2, 1)
    assert grid_diff(rom.sys, direct.sys, default_grid()) <= 1e-10


def test_spa_tie_error():
    A = np.diag([-1.0, -1.0])
    sys = StateSpace(A=A, B=np.eye(2), C=np.eye(2))
    with pytest.raises(SigmaTieError):
        spa(sys, 1)


@pytest.mark.parametrize("seed", range(8))
def test_spa_equals_direct_formula(seed):
    sys = random_stable(12 + seed, 2, 2, seed=seed, spd_e=(seed % 2 == 1))
    sigma = hsv_of(sys)
    r = pick_r_with_gap(sigma, 6)
    assert r is not None
    rom = spa(sys, r)
    direct = spa_direct(sys, r)
    assert rel_grid_diff(sys, rom.sys, default_grid(), ref=sys) >= 0  # smoke
    assert grid_diff(rom.sys, direct.sys, default_grid()) <= 1e-8 * max(
        1.0, hinf_grid(sys, 1e-3, 1e3, 100))


def test_spa_direct_s1(s1):
    with pytest.raises(RankError):
        spa_direct(s1, 1)  # r must be < n for the partition


def test_spa_direct_full_order(s2):
    # r = n is not partitionable either; r = 1 is the only choice for S2
    rom = spa_direct(s2, 1)
    assert rom.method == "SPA_DIRECT"
    assert rom.r == 1


def test_spa_direct_nonzero_feedthrough(s2):
    rom = spa_direct(s2, 1)
    assert np.abs(rom.sys.D[0, 0]) > 1e-6  # steady-stating creates a D term


def test_order_from_tolerance_examples():
    assert order_from_tolerance([1.0, 1e-12], 1e-6) == 1
    assert order_from_tolerance([1.0], 0.5) == 1
    sigma = [0.7310, 0.0190]
    tol = 0.01
    # hand oracle: r = 1 iff 2*0.0190 <= 0.01 * 2 * 0.75
    expected = 1 if 2 * 0.0190 <= tol * 2 * (0.7310 + 0.0190) else 2
    assert order_from_tolerance(sigma, tol) == expected


def test_order_from_tolerance_empty():
    with pytest.raises(ValueError):
        order_from_tolerance([], 0.1)


@pytest.mark.parametrize("seed", range(5))
def test_rom_stability_and_bound(seed):
    sys = random_stable(15, 2, 2, seed=100 + seed)
    sigma = hsv_of(sys)
    r = pick_r_with_gap(sigma, 6)
    assert r is not None
    bound = bt_bound(sigma, r)
    for rom in (bt(sys, r=r), spa(sys, r)):
        assert is_stable(rom.sys)[0]
        err = hinf_grid(error_system(sys, rom), 1e-4, 1e4, 300)
        assert err <= bound + 1e-10


def test_spa_dc_interpolation_random():
    for seed in (0, 5, 9):
        sys = random_stable(12, 2, 2, seed=seed)
        sigma = hsv_of(sys)
        r = pick_r_with_gap(sigma, 5)
        h0 = dc_moment(sys)
        for rom in (spa(sys, r), spa_direct(sys, r)):
            err = np.max(np.abs(eval_tf(rom.sys, 0.0) - h0))
            assert err <= 1e-10 * (1.0 + np.max(np.abs(h0)))


def test_bt_lowrank_factors_match_dense():
    from balkit import heat_1d

    heat = heat_1d(150)
    rom_lr = bt(heat, r=8, lowrank=True, adi_tol=1e-11)
    dense = StateSpace(A=heat.A.toarray(), B=heat.B, C=heat.C)
    rom_d = bt(dense, r=8)
    assert grid_diff(rom_lr.sys, rom_d.sys, default_grid()) <= 1e-8
