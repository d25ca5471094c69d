import math

import numpy as np
import pytest

from bbm_voting.catalog import (
    catalog,
    evs,
    evs_bias_limit,
    fkpp_uniform,
    group,
    group_bias_limit,
    list_models,
    pushed_speed_theory,
    resolve_name,
    uniform_bias,
    uniform_bias_limit,
)
from bbm_voting.errors import ParameterRangeError, UnknownModelError
from bbm_voting.models import CompositeLabelModel, forward_nonlinearity, validate
from bbm_voting.poly import Polynomial, bernstein_basis


def test_evs_pushmi_pullyu_point():
    model = evs(2, 1.0, 1.0)
    assert isinstance(model, CompositeLabelModel)
    probabilities = {rule.name: rule.probability for rule in model.labels}
    assert probabilities['I'] == pytest.approx(0.5)
    assert probabilities['G'] == pytest.approx(0.5)
    # gamma above the per-table limit is carried by the rate
    assert model.rate == pytest.approx(2.0)
    assert forward_nonlinearity(model).allclose(Polynomial.of(0.0, 0.5, 0.5, -1.0))


def test_evs_pushed_shape():
    model = evs(2, 2.0)
    f = forward_nonlinearity(model)
    shape = Polynomial.of(0.0, 1.0, 3.0, -4.0)  # (u - u^2)(1 + 4u)
    scale = f.coefficient(1)
    assert scale > 0
    assert f.allclose(shape.scale(scale))


def test_evs_n3_is_multiple_of_target():
    n, chi = 3, 1.5
    f = forward_nonlinearity(evs(n, chi))
    # (u - u^3)(1 + chi n u^2)
    target = Polynomial.of(0.0, 1.0, 0.0, -1.0) * Polynomial.of(1.0, 0.0, chi * n)
    assert f.allclose(target.scale(f.coefficient(1)))
    assert validate(evs(n, chi)).valid


def test_evs_rejects_small_chi():
    with pytest.raises(ParameterRangeError):
        evs(2, 0.25)


def test_evs_bias_limit():
    assert evs_bias_limit(2) == pytest.approx(0.5)


def test_uniform_bias_closed_form():
    model = uniform_bias({2: 1.0}, gamma=1.0, rate=1.0)
    assert model.alpha[2] == pytest.approx((0.0, 1.0, 1.0))
    assert forward_nonlinearity(model).allclose(Polynomial.of(0.0, 1.0, -1.0))


def test_uniform_bias_mixed_law_closed_form():
    model = uniform_bias({2: 0.5, 3: 0.5}, gamma=0.4, rate=1.5)
    # beta gamma sum_n p_n (u - u^n)
    expected = Polynomial.of(0.0, 1.0, -0.5, -0.5).scale(0.6)
    assert forward_nonlinearity(model).allclose(expected)


def test_uniform_bias_range_uses_largest_arity():
    with pytest.raises(ParameterRangeError) as info:
        uniform_bias({2: 0.5, 3: 0.5}, gamma=0.6)
    assert "1/(N-1)" in info.value.inequality


def test_group_closed_form():
    model = group(2, {3: 1.0}, gamma=1.0 / 3.0, rate=1.0)
    expected = Polynomial.of(0.0, 0.0, 1.0, -1.0).scale(1.0 / 3.0)
    assert forward_nonlinearity(model).allclose(expected)


def _random_law(rng, smallest):
    arities = rng.choice(np.arange(smallest, 9), size=int(rng.integers(1, 4)), replace=False)
    return {int(n): float(p) for n, p in zip(arities, rng.dirichlet(np.ones(len(arities))))}


def test_uniform_bias_closed_form_random_draws():
    rng = np.random.default_rng(5)
    for _ in range(50):
        law = _random_law(rng, 2)
        gamma = float(rng.uniform(0.0, 1.0)) * uniform_bias_limit(max(law))
        rate = float(rng.uniform(0.5, 3.0))
        expected = Polynomial.zero()
        for n, p in law.items():
            expected = expected + (Polynomial.of(0.0, 1.0) - Polynomial.monomial(n)).scale(p)
        model = uniform_bias(law, gamma=gamma, rate=rate)
        assert forward_nonlinearity(model).allclose(expected.scale(rate * gamma))


def test_group_closed_form_random_draws():
    rng = np.random.default_rng(6)
    for _ in range(50):
        m = int(rng.integers(2, 5))
        law = _random_law(rng, m + 1)
        gamma = float(rng.uniform(0.0, 1.0)) * min(group_bias_limit(n, m) for n in law)
        rate = float(rng.uniform(0.5, 3.0))
        expected = Polynomial.zero()
        for n, p in law.items():
            expected = expected + (Polynomial.monomial(m) - Polynomial.monomial(n)).scale(p)
        model = group(m, law, gamma=gamma, rate=rate)
        assert forward_nonlinearity(model).allclose(expected.scale(rate * gamma))


@pytest.mark.parametrize("n", range(1, 13))
def test_unbiased_table_averages_to_identity(n):
    u = np.linspace(0.0, 1.0, 1000)
    total = sum(bernstein_basis(k, n, u) * (k / n) for k in range(n + 1))
    np.testing.assert_allclose(total, u, rtol=0.0, atol=1e-12)


def test_group_range_checks():
    with pytest.raises(ParameterRangeError):
        group(2, {2: 1.0}, gamma=0.1)
    with pytest.raises(ParameterRangeError):
        group(1, {3: 1.0}, gamma=0.1)
    with pytest.raises(ParameterRangeError):
        group(2, {3: 1.0}, gamma=1.5)
    assert group_bias_limit(3, 2) == pytest.approx(1.0)


def test_fkpp_uniform_is_u_minus_generating_function():
    model = fkpp_uniform({2: 0.5, 3: 0.5})
    assert forward_nonlinearity(model).allclose(Polynomial.of(0.0, 1.0, -0.5, -0.5))


def test_catalog_aliases(efp):
    assert resolve_name('allen-cahn') == 'efp_allen_cahn'
    assert catalog('allen-cahn').alpha == efp.alpha


def test_catalog_unknown_name():
    with pytest.raises(UnknownModelError):
        catalog('no-such-model')


def test_catalog_bad_parameter_name():
    with pytest.raises(ParameterRangeError):
        catalog('heat', temperature=3)


def test_catalog_parameters_pass_through():
    model = catalog('heat', offspring={2: 0.5, 3: 0.5}, rate=2.0)
    assert model.rate == 2.0
    assert model.offspring.arities == [2, 3]


def test_list_models_covers_catalog():
    names = [name for name, _ in list_models()]
    assert {'heat', 'efp_allen_cahn', 'mckean', 'uniform_bias', 'group', 'evs'} <= set(names)


def test_pushed_speed_theory():
    assert pushed_speed_theory(2.0) == pytest.approx(math.sqrt(2.0) + 1.0 / math.sqrt(2.0))
    assert pushed_speed_theory(1.0) == 2.0
    assert pushed_speed_theory(0.5) == 2.0
