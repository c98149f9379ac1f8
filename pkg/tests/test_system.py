import numpy as np
import pytest

from balkit import (DimensionError, SingularMatrixError, StabilityError, StateSpace,
                    bt, dc_moment, error_system, eval_tf, is_stable, random_stable,
                    reciprocal, strictly_proper_split)

from conftest import default_grid


def test_eval_tf_s1(s1):
    assert eval_tf(s1, 0.0) == pytest.approx(np.array([[1.0]]))
    assert eval_tf(s1, 1j) == pytest.approx(np.array([[0.5 - 0.5j]]))


def test_eval_tf_feedthrough_shift(s1):
    shifted = StateSpace(A=s1.A, B=s1.B, C=s1.C, D=[[2.0]])
    assert eval_tf(shifted, 0.0) == pytest.approx(np.array([[3.0]]))


def test_eval_tf_singular_pencil(s1):
    with pytest.raises(SingularMatrixError):
        eval_tf(s1, -1.0)  # s = pole


def test_eval_tf_conjugate_symmetry():
    sys = random_stable(6, 2, 3, seed=0)
    for w in (0.3, 2.0, 17.0):
        assert np.allclose(eval_tf(sys, np.conj(1j * w)), np.conj(eval_tf(sys, 1j * w)),
                           atol=1e-13)


def test_reciprocal_s1_hand_values(s1):
    rec = reciprocal(s1)
    assert rec.E == pytest.approx(np.array([[1.0]]))
    assert rec.A == pytest.approx(np.array([[-1.0]]))
    assert rec.B == pytest.approx(np.array([[-1.0]]))
    assert rec.C == pytest.approx(np.array([[1.0]]))
    assert rec.D == pytest.approx(np.array([[1.0]]))


def test_reciprocal_involution_random():
    sys = random_stable(8, 2, 2, seed=42)
    back = reciprocal(reciprocal(sys))
    for name in "EABCD":
        orig, twice = getattr(sys, name), getattr(back, name)
        assert np.linalg.norm(twice - orig) <= 1e-12 * max(np.linalg.norm(orig), 1.0)


def test_reciprocal_transfer_identity(s1):
    rec = reciprocal(s1)
    assert eval_tf(rec, 2.0)[0, 0] == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert eval_tf(rec, 2.0)[0, 0] == pytest.approx(eval_tf(s1, 0.5)[0, 0], abs=1e-14)


def test_reciprocal_singular_a():
    sys = StateSpace(A=[[0.0]], B=[[1.0]], C=[[1.0]])
    with pytest.raises(SingularMatrixError):
        reciprocal(sys)


def test_strictly_proper_split(s1):
    shifted = StateSpace(A=s1.A, B=s1.B, C=s1.C, D=[[2.0]])
    sp, d = strictly_proper_split(shifted)
    assert d == pytest.approx(np.array([[2.0]]))
    assert np.all(sp.D == 0)
    sp0, d0 = strictly_proper_split(s1)
    assert d0 == pytest.approx(np.array([[0.0]]))

    sys = random_stable(5, 2, 2, seed=3)
    sys = StateSpace(A=sys.A, B=sys.B, C=sys.C, D=[[1.0, -2.0], [0.5, 3.0]])
    sp, d = strictly_proper_split(sys)
    assert np.max(np.abs(eval_tf(sp, 1j) + d - eval_tf(sys, 1j))) <= 1e-14


def test_dc_moment(s1, s2):
    assert dc_moment(s1) == pytest.approx(np.array([[1.0]]))
    assert dc_moment(s2) == pytest.approx(np.array([[1.5]]))


def test_dc_moment_matches_eval():
    for seed in range(20):
        sys = random_stable(6, 2, 2, seed=seed)
        assert np.max(np.abs(dc_moment(sys) - eval_tf(sys, 0.0))) <= 1e-12


def test_is_stable(s1, s2):
    stable, absc = is_stable(s1)
    assert stable and absc == pytest.approx(-1.0)
    unstable = StateSpace(A=[[1.0]], B=[[1.0]], C=[[1.0]])
    flag, absc = is_stable(unstable)
    assert not flag and absc == pytest.approx(1.0)
    assert is_stable(s2) == (True, pytest.approx(-1.0))


def test_is_stable_singular_e(s1):
    sys = StateSpace(A=[[-1.0]], B=[[1.0]], C=[[1.0]], E=[[0.0]])
    with pytest.raises(SingularMatrixError):
        is_stable(sys)


def test_is_stable_size_guard():
    sys = random_stable(4, 1, 1, seed=0)
    with pytest.raises(StabilityError):
        is_stable(sys, max_dense=3)


def test_random_stable_deterministic():
    a = random_stable(4, 1, 1, seed=7)
    b = random_stable(4, 1, 1, seed=7)
    for name in "EABCD":
        assert np.array_equal(getattr(a, name), getattr(b, name))


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_random_stable_is_stable(seed):
    assert is_stable(random_stable(9, 2, 2, seed=seed))[0]


def test_random_stable_spd_e():
    sys = random_stable(10, 1, 1, seed=5, spd_e=True)
    assert np.allclose(sys.E, sys.E.T)
    assert np.min(np.linalg.eigvalsh(sys.E)) > 0
    assert is_stable(sys)[0]


def test_error_system_exact_rom(s1):
    rom = bt(s1, r=1)
    err = error_system(s1, rom)
    assert np.max(np.abs(eval_tf(err, 1j))) <= 1e-14
    assert err.n == s1.n + rom.sys.n


def test_error_system_is_pointwise_difference():
    fom = random_stable(7, 2, 2, seed=9)
    rom = bt(fom, r=3)
    err = error_system(fom, rom)
    rng = np.random.default_rng(0)
    for _ in range(10):
        s = complex(rng.uniform(0, 2), rng.uniform(-5, 5))
        direct = eval_tf(fom, s) - eval_tf(rom.sys, s)
        assert np.max(np.abs(eval_tf(err, s) - direct)) <= 1e-13


def test_error_system_dimension_mismatch(s1):
    other = random_stable(3, 2, 1, seed=1)
    with pytest.raises(DimensionError):
        error_system(s1, bt(other, r=1))


def test_eval_tf_sparse_real_point():
    from balkit import dc_moment, heat_1d

    heat = heat_1d(30)
    assert eval_tf(heat, 0.0)[0, 0] == pytest.approx(dc_moment(heat)[0, 0], abs=1e-14)
    # complex point on the same sparse pencil
    val = eval_tf(heat, 1j)
    assert np.iscomplexobj(val)


def test_eval_tf_grid_evaluator_consistency():
    # the amortized Schur/QZ evaluator must agree with the direct LU path
    from balkit import tf_evaluator

    for spd in (False, True):
        sys = random_stable(40, 2, 2, seed=12, spd_e=spd)
        ev = tf_evaluator(sys)
        for w in default_grid(6):
            assert np.allclose(ev(1j * w), eval_tf(sys, 1j * w), atol=1e-11)
