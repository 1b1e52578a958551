import csv
import io
import math

import numpy as np
import pytest

from nonlocal_forms import generators as G
from nonlocal_forms import process as P
from nonlocal_forms.forms import TOY, FormConfig
from nonlocal_forms.spaces import EigenSequence


def toy_gen(p):
    return G.build_generator(G.DiscreteStateSpace.toy(p), FormConfig(kernel_profile=TOY))


def test_trajectory_validation():
    with pytest.raises(ValueError):
        P.Trajectory(np.array([0.5]), np.array([0]), 1.0)
    with pytest.raises(ValueError):
        P.Trajectory(np.array([0.0, 0.3, 0.3]), np.array([0, 1, 0]), 1.0)
    with pytest.raises(ValueError):
        P.Trajectory(np.array([0.0, 2.0]), np.array([0, 1]), 1.0)
    with pytest.raises(ValueError):
        P.simulate(toy_gen(0.3), 0, 0.0, seed=1)
    with pytest.raises(ValueError):
        P.simulate(toy_gen(0.3), 2, 1.0, seed=1)


def test_single_state_is_constant():
    gen = G.build_generator(G.DiscreteStateSpace([0.0], [1.0]), FormConfig())
    traj = P.simulate(gen, 0, 50.0, seed=0)
    assert traj.n_jumps == 0
    np.testing.assert_array_equal(traj.state_at([0.0, 10.0, 50.0]), [0, 0, 0])
    chk = P.empirical_invariance(traj, [1.0])
    assert chk.tv == 0 and chk.inconclusive


def test_absorbing_state_stops():
    space = G.DiscreteStateSpace([0.0, 1.0], [0.5, 0.5])
    A = np.array([[1.0, -1.0], [0.0, 0.0]])
    traj = P.simulate(G.GeneratorMatrix(A, space), 0, 1e3, seed=4)
    assert traj.n_jumps == 1 and traj.states[-1] == 1


def test_right_continuity():
    traj = P.Trajectory(np.array([0.0, 1.0, 2.5]), np.array([0, 1, 0]), 4.0)
    np.testing.assert_array_equal(traj.state_at([0.0, 0.999, 1.0, 2.4, 2.5, 4.0]), [0, 0, 1, 1, 0, 0])
    np.testing.assert_allclose(traj.durations(), [1.0, 1.5, 1.5])
    np.testing.assert_allclose(traj.occupation(2), [2.5 / 4, 1.5 / 4])
    with pytest.raises(ValueError):
        traj.state_at(4.5)


def test_seed_determinism():
    a = P.simulate(toy_gen(0.3), 0, 500.0, seed=11)
    b = P.simulate(toy_gen(0.3), 0, 500.0, seed=11)
    c = P.simulate(toy_gen(0.3), 0, 500.0, seed=12)
    np.testing.assert_array_equal(a.jump_times, b.jump_times)
    np.testing.assert_array_equal(a.states, b.states)
    assert a.to_csv() == b.to_csv()
    assert not np.array_equal(a.jump_times[:5], c.jump_times[:5])


def test_toy_half_occupation():
    traj = P.simulate(toy_gen(0.5), 0, 1000.0, seed=2)
    occ = traj.occupation(2)
    # alternating renewal with mean holding 1: each visit contributes Exp(1),
    # so the occupation fraction has variance about 1 / (2 T)
    se = math.sqrt(1 / (2 * 1000.0))
    assert abs(occ[0] - 0.5) <= 3 * se


def test_jump_rate_matches_diagonal():
    p = 0.3
    gen = toy_gen(p)
    traj = P.simulate(gen, 0, 1e4, seed=5)
    rate, se = P.jump_rate_estimate(traj, 0)
    assert gen.A[0, 0] == pytest.approx(2 * (1 - p), rel=1e-15)
    assert abs(rate - 1.4) <= 3 * se
    rate1, se1 = P.jump_rate_estimate(traj, 1)
    assert abs(rate1 - 2 * p) <= 3 * se1


def test_invariance_and_swapped_measure():
    p = 0.3
    x0 = P.stationary_start([p, 1 - p], seed=7)
    traj = P.simulate(toy_gen(p), x0, 1e4, seed=8)
    chk = P.empirical_invariance(traj, [p, 1 - p])
    assert not chk.inconclusive and chk.tv <= 0.02
    swapped = P.empirical_invariance(traj, [1 - p, p])
    assert abs(swapped.tv - abs(1 - 2 * p)) <= 0.02


def test_lag_transitions_match_semigroup():
    p, lag = 0.3, 1.0
    gen = toy_gen(p)
    traj = P.simulate(gen, 0, 1e4, seed=9)
    counts = P.lag_transition_counts(traj, lag, 2)
    assert counts.sum() == 10**4
    Mt = G.semigroup(gen, lag)
    for x in range(2):
        n = counts[x].sum()
        for y in range(2):
            f = counts[x, y] / n
            assert abs(f - Mt[x, y]) <= 4 * math.sqrt(Mt[x, y] * (1 - Mt[x, y]) / n)


def test_csv_export():
    traj = P.Trajectory(np.array([0.0, 0.25]), np.array([1, 0]), 1.0)
    rows = list(csv.reader(io.StringIO(traj.to_csv(coords=[[0.5, 1.0], [-0.5, 2.0]]))))
    assert rows[0] == ["t", "state", "x0", "x1"]
    assert rows[1] == ["0.0", "1", "-0.5", "2.0"]
    assert rows[2] == ["0.25", "0", "0.5", "1.0"]
    assert list(csv.reader(io.StringIO(traj.to_csv())))[0] == ["t", "state"]


def test_reconstruct_field_norms_two_ways():
    eig = EigenSequence.power_law(1.0, 4)
    rng = np.random.default_rng(3)
    coords = rng.normal(size=(5, 4))
    space = G.DiscreteStateSpace(np.arange(5.0), np.full(5, 0.2))
    gen = G.build_generator(space, FormConfig())
    traj = P.simulate(gen, 0, 20.0, seed=1)
    for m in (0, 1, 2, 3):
        field = P.reconstruct_field(traj, coords, eig, m)
        np.testing.assert_allclose(field.norms, field.level_norms(), rtol=1e-12)
        direct = np.sqrt(np.sum(eig.lambdas ** (-2 * m) * coords[traj.states] ** 2, axis=1))
        np.testing.assert_allclose(field.norms, direct, rtol=1e-12)


def test_reconstruct_field_single_coordinate_and_constant():
    eig = EigenSequence(np.array([0.5]))
    traj = P.Trajectory(np.array([0.0, 1.0]), np.array([0, 1]), 2.0)
    field = P.reconstruct_field(traj, np.array([3.0, -2.0]), eig, 3)
    np.testing.assert_allclose(field.norms, [3.0 * 8, 2.0 * 8], rtol=1e-15)
    const = P.Trajectory(np.array([0.0, 1.0, 2.0]), np.array([1, 1, 1]), 3.0)
    norms = P.reconstruct_field(const, np.array([3.0, -2.0]), eig, 1).norms
    assert np.all(norms == norms[0])


def test_reconstruct_field_dimension_mismatch():
    traj = P.Trajectory(np.array([0.0]), np.array([0]), 1.0)
    with pytest.raises(ValueError, match="coordinates"):
        P.reconstruct_field(traj, np.zeros((1, 3)), EigenSequence.power_law(1.0, 4), 1)
