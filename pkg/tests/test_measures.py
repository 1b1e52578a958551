import math

import numpy as np
import pytest
from scipy import integrate, stats

from nonlocal_forms import measures as M
from nonlocal_forms.measures import Conditional1D, GaussianSpectralMeasure, LatticePhi4Measure, ProductMeasure
from nonlocal_forms.stats import batch_means_se


# -- conditionals and density bounds -------------------------------------------


@pytest.mark.parametrize("cond", [
    Conditional1D.gaussian(0.3, 2.0),
    Conditional1D.uniform(-1, 2),
    Conditional1D.atoms([-0.5, 0.5], [0.25, 0.75]),
    Conditional1D.from_log_density(lambda y: -0.5 * y**2 - 0.25 * y**4, 0.0),
])
def test_conditionals_normalized(cond):
    assert cond.total_mass() == pytest.approx(1.0, abs=1e-9)


def test_atoms_validation():
    with pytest.raises(ValueError):
        Conditional1D.atoms([0, 1], [0.5, 0.6])
    with pytest.raises(ValueError):
        Conditional1D.atoms([0, 0], [0.5, 0.5])


def test_tail_examples():
    assert Conditional1D.gaussian(0, 1).tail(1.96) == pytest.approx(0.05, abs=5e-4)
    assert Conditional1D.atoms([-0.5, 0.5], [0.5, 0.5]).tail(0.4) == 1.0
    g = Conditional1D.gaussian(0, 1)
    ts = np.linspace(0, 10, 50)
    tails = [g.tail(t) for t in ts]
    assert all(a >= b for a, b in zip(tails, tails[1:]))
    assert tails[-1] < 1e-20


def test_density_bound_examples():
    assert M.density_bound(Conditional1D.uniform(0, 1), (0, 1)) == pytest.approx(1.0, abs=1e-9)
    assert M.density_bound(Conditional1D.gaussian(0, 1), (-6, 6)) == pytest.approx((2 * math.pi) ** -0.5, rel=1e-9)
    with pytest.raises(ValueError):
        M.density_bound(Conditional1D.atoms([0.0], [1.0]), (-1, 1))


def test_density_bound_phi4_single_site_against_grid():
    meas = LatticePhi4Measure(d=1, eps=1.0, side=3, a_eps=1.0, coupling=2.0)
    cond = meas.conditional(1, np.array([0.4, 0.0, -0.2]))
    ys = np.linspace(-3, 3, 600001)
    grid_max = np.max(cond.pdf(ys))
    assert M.density_bound(cond, (-3, 3)) == pytest.approx(grid_max, abs=1e-6)


def test_integral_density_bound():
    u = Conditional1D.uniform(0, 1)
    # sup_y int_0^1 |y-y'|^(1-2a) dy' at a = 0.25 is attained at y = 1/2... or the ends
    a = 0.25
    e = 1 - 2 * a
    direct = max(integrate.quad(lambda z: abs(y - z) ** e, 0, 1, points=[y])[0] for y in np.linspace(0, 1, 201))
    assert M.density_bound(u, (0, 1), "integral", alpha=a) == pytest.approx(direct, rel=1e-6)
    assert M.density_bound(u, (0, 1), "integral", alpha=1.0) == math.inf


# -- sampling -------------------------------------------------------------------


def test_gaussian_sample_mean_clt():
    X = M.sample(GaussianSpectralMeasure(np.array([1.0])), seed=1, size=10**5)
    assert abs(X.mean()) <= 3 * 10**-2.5


def test_point_mass_sampling():
    m = ProductMeasure((Conditional1D.atoms([-0.5], [1.0]),))
    assert np.all(M.sample(m, 0, 100) == -0.5)


def test_sampling_deterministic():
    g = GaussianSpectralMeasure(np.array([1.0, 4.0]))
    np.testing.assert_array_equal(M.sample(g, 7, 10), M.sample(g, 7, 10))


def test_conditionals_of_backends():
    u = ProductMeasure((Conditional1D.uniform(0, 1), Conditional1D.gaussian(0, 1)))
    c = u.conditional(0, np.array([5.0, 5.0]))
    assert c.family == "uniform" and c.params == {"a": 0.0, "b": 1.0}
    g = GaussianSpectralMeasure(np.array([1.0, 4.0]))
    assert g.conditional(1).var() == pytest.approx(4.0, rel=1e-9)
    with pytest.raises(IndexError):
        g.conditional(2)


def test_phi4_conditional_complete_the_square():
    meas = LatticePhi4Measure(d=1, eps=1.0, side=3, a_eps=1.0, coupling=0.0)
    c = meas.conditional(1, np.zeros(3))
    assert c.mean() == pytest.approx(0.0, abs=1e-12)
    assert c.var() == pytest.approx(1.0 / 3.0, rel=1e-9)


# -- lattice action and chain ---------------------------------------------------


def test_action_examples():
    m = LatticePhi4Measure(d=1, eps=1.0, side=2, a_eps=1.0, coupling=0.0)
    assert m.action(np.zeros(2)) == 0.0
    assert m.action(np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-15)
    m2 = LatticePhi4Measure(d=1, eps=1.0, side=2, a_eps=1.0, coupling=2.0)
    assert m2.action(np.array([1.0, 0.0])) == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(ValueError):
        m.action(np.zeros(3))


def test_action_even_and_matches_precision_matrix():
    rng = np.random.default_rng(0)
    for d, side in ((1, 5), (2, 3), (3, 2)):
        for bc in (M.FREE, M.PERIODIC):
            m = LatticePhi4Measure(d=d, eps=0.7, side=side, a_eps=0.9, coupling=0.0, boundary=bc)
            phi = rng.normal(size=m.dim)
            assert m.action(phi) == m.action(-phi)
            assert m.action(phi) == pytest.approx(0.5 * phi @ m.precision_matrix() @ phi, rel=1e-12)


def test_precision_matrix_independent_oracle():
    # d = 1 free chain, spacing eps: tridiagonal with eps^-1 couplings
    eps, a, n = 0.5, 2.0, 6
    m = LatticePhi4Measure(d=1, eps=eps, side=n, a_eps=a)
    Q = np.zeros((n, n))
    for x in range(n - 1):
        Q[x, x] += 1 / eps
        Q[x + 1, x + 1] += 1 / eps
        Q[x, x + 1] -= 1 / eps
        Q[x + 1, x] -= 1 / eps
    Q += a * eps * np.eye(n)
    np.testing.assert_allclose(m.precision_matrix(), Q, rtol=1e-14)


def test_color_classes_have_no_internal_bonds():
    for d, side, bc in ((1, 5, M.PERIODIC), (2, 3, M.PERIODIC), (2, 4, M.FREE), (3, 3, M.PERIODIC)):
        m = LatticePhi4Measure(d=d, side=side, boundary=bc, a_eps=1.0)
        covered = np.concatenate([c.sites for c in m.color_classes])
        assert sorted(covered.tolist()) == list(range(m.dim))
        for c in m.color_classes:
            s = set(c.sites.tolist())
            assert all(not (set(m.neighbors[x]) & s) for x in s)


def test_zero_step_is_identity():
    m = LatticePhi4Measure(d=1, side=4, a_eps=1.0, coupling=1.0)
    phi = np.arange(4.0)
    out, st = M.mcmc_step(m, phi, np.random.default_rng(0), 0.0)
    np.testing.assert_array_equal(out, phi)
    assert st.rate == 1.0


def test_acceptance_strictly_between():
    m = LatticePhi4Measure(d=1, side=8, a_eps=1.0, coupling=1.0)
    res = M.run_chain(m, 1000, np.random.default_rng(1), burn_in=200)
    assert 0 < res.acceptance < 1


def test_single_site_detailed_balance():
    m = LatticePhi4Measure(d=1, side=2, a_eps=0.7, coupling=1.3)
    rng = np.random.default_rng(2)
    for _ in range(200):
        phi = rng.normal(size=2)
        site = int(rng.integers(2))
        new = phi.copy()
        new[site] += rng.normal(scale=0.8)
        lhs = -m.action(phi) + M.transition_log_density(m, phi, new, site, 0.8)
        rhs = -m.action(new) + M.transition_log_density(m, new, phi, site, 0.8)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_gaussian_chain_covariance():
    m = LatticePhi4Measure(d=1, eps=1.0, side=4, a_eps=1.0)
    res = M.run_chain(m, 40000, np.random.default_rng(3), burn_in=1000)
    C = m.gaussian_covariance()
    X = res.samples
    for x, y in ((0, 0), (1, 2), (0, 3)):
        est, se = batch_means_se(X[:, x] * X[:, y])
        assert abs(est - C[x, y]) <= 3 * se + 1e-3


def test_two_point_function_shape_and_zero_lag():
    m = LatticePhi4Measure(d=2, side=3, a_eps=1.0, boundary=M.PERIODIC)
    X = M.sample(m, 0, 50)
    G = M.two_point_function(X, m)
    assert G.shape == (3,)
    assert G[0] == pytest.approx(np.mean(X**2), rel=1e-12)


# -- characteristic functions and tails ----------------------------------------


def test_characteristic_fn():
    g = GaussianSpectralMeasure(np.array([1.0, 2.0]))
    assert g.characteristic_fn(np.zeros(2)).value == 1
    assert g.characteristic_fn(np.array([1.0, 0.0])).value.real == pytest.approx(math.exp(-0.5), rel=1e-15)
    phi = np.array([0.3, -0.4])
    assert g.characteristic_fn(-phi).value == np.conj(g.characteristic_fn(phi).value)
    X = M.sample(g, 11, 10**5)
    emp = M.empirical_characteristic_fn(X, phi)
    assert abs(emp.value - g.characteristic_fn(phi).value) <= 3 * emp.se


def test_product_characteristic_fn_properties():
    pm = ProductMeasure((Conditional1D.atoms([-1, 2], [0.3, 0.7]), Conditional1D.uniform(0, 1)))
    rng = np.random.default_rng(0)
    for _ in range(20):
        phi = rng.normal(size=2) * 3
        c = pm.characteristic_fn(phi).value
        assert abs(c) <= 1 + 1e-12
        assert pm.characteristic_fn(-phi).value == pytest.approx(np.conj(c), abs=1e-12)
    direct = (0.3 * np.exp(-1j * 0.5) + 0.7 * np.exp(2j * 0.5)) * (np.exp(1j * 0.7) - 1) / (1j * 0.7)
    assert pm.characteristic_fn(np.array([0.5, 0.7])).value == pytest.approx(direct, abs=1e-10)


def test_tail_probs_vectorized_matches_scipy():
    g = GaussianSpectralMeasure(np.array([1.0, 4.0, 0.25]))
    t = np.array([1.0, 2.0, 0.1])
    np.testing.assert_allclose(g.tail_probs(t), 2 * stats.norm.sf(t / np.sqrt(g.variances)), rtol=1e-12)
    assert g.tail_prob(1, 2.0).value == pytest.approx(2 * stats.norm.sf(1.0), rel=1e-12)
