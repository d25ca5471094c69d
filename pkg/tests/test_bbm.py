import math
import pickle

import numpy as np
import pytest
from scipy import stats

from bbm_voting.bbm import (
    TREE_PHASE,
    VOTE_PHASE,
    GenealogyParams,
    SeedScheme,
    count_leaves,
    dump_tree,
    expected_population,
    fold_tree,
    max_children_hint,
    start_point,
)
from bbm_voting.errors import PopulationGuardError, ValidationError
from bbm_voting.models import OffspringDistribution


def test_time_zero_is_a_single_leaf_at_the_start():
    params = GenealogyParams.binary()
    seed = SeedScheme(3)
    assert count_leaves(params, 0.0, [1.5], seed, 0) == 1
    position = fold_tree(params, 0.0, [1.5], seed, 0, lambda leaf: leaf.position[0], lambda b, v: None)
    assert position == 1.5


def test_at_least_one_leaf():
    params = GenealogyParams(2.5, OffspringDistribution({2: 0.5, 3: 0.5}))
    seed = SeedScheme(1)
    for replicate in range(50):
        assert count_leaves(params, 1.0, [0.0], seed, replicate) >= 1


def test_same_seed_same_tree():
    params = GenealogyParams.binary()
    first = dump_tree(params, 2.0, [0.0], SeedScheme(42), replicate=5)
    second = dump_tree(params, 2.0, [0.0], SeedScheme(42), replicate=5)
    assert first == second
    others = {dump_tree(params, 2.0, [0.0], SeedScheme(42), replicate=r) for r in range(6, 12)}
    assert first not in others


def test_dump_tree_lists_branch_arities():
    params = GenealogyParams(2.0, OffspringDistribution({2: 0.5, 3: 0.5}))
    text = dump_tree(params, 1.5, [0.0], SeedScheme(9))
    lines = text.splitlines()
    assert lines
    arities = {int(line.rsplit('=', 1)[1]) for line in lines if 'branch' in line}
    assert arities <= {2, 3}
    leaves = sum(1 for line in lines if line.lstrip().startswith('leaf'))
    assert leaves == count_leaves(params, 1.5, [0.0], SeedScheme(9), 0)


def test_node_draws_are_keyed_by_replicate_and_path():
    # no branching: the root is the only node and moves for the whole time
    params = GenealogyParams(0.0, OffspringDistribution.pure(2))
    seed = SeedScheme(8)
    for replicate in (0, 3, 2 ** 40):
        moved = fold_tree(params, 1.5, [0.25], seed, replicate, lambda leaf: leaf.position[0], None)
        expected = 0.25 + seed.node_rng(replicate, ()).normal(0.0, math.sqrt(3.0), 1)[0]
        assert moved == expected
        vote = fold_tree(params, 1.5, [0.25], seed, replicate, lambda leaf: leaf.rng.random(), None)
        assert vote == seed.node_rng(replicate, (), VOTE_PHASE).random()


def test_streams_differ_by_path_and_phase():
    seed = SeedScheme(8)
    draws = {
        seed.node_rng(0, ()).random(),
        seed.node_rng(0, (0,)).random(),
        seed.node_rng(0, (1,)).random(),
        seed.node_rng(0, (0, 0)).random(),
        seed.node_rng(1, ()).random(),
        seed.node_rng(0, (), VOTE_PHASE).random(),
        SeedScheme(9).node_rng(0, (), TREE_PHASE).random(),
    }
    assert len(draws) == 7


def test_vote_draws_do_not_change_the_tree():
    params = GenealogyParams(2.0, OffspringDistribution({2: 0.5, 3: 0.5}))
    seed = SeedScheme(12)

    def voting_leaf(record):
        record.rng.random()
        return 1

    def voting_combine(branch, values):
        branch.rng.random()
        branch.rng.random()
        return sum(values)

    for replicate in range(20):
        assert fold_tree(params, 1.0, [0.0], seed, replicate, voting_leaf, voting_combine) == \
            count_leaves(params, 1.0, [0.0], seed, replicate)


def test_trees_do_not_depend_on_visiting_order():
    params = GenealogyParams.binary()
    seed = SeedScheme(42)
    first = dump_tree(params, 2.0, [0.0], seed, replicate=5)
    for replicate in (9, 1, 7):
        dump_tree(params, 2.0, [0.0], seed, replicate=replicate)
    assert dump_tree(params, 2.0, [0.0], seed, replicate=5) == first


def test_expected_population():
    assert expected_population(GenealogyParams.binary(), 0.0) == 1.0
    assert expected_population(GenealogyParams.binary(), 2.0) == pytest.approx(math.exp(2.0))
    params = GenealogyParams(2.0, OffspringDistribution.pure(3))
    assert expected_population(params, 1.0) == pytest.approx(math.exp(4.0))


def test_population_guard():
    params = GenealogyParams(5.0, OffspringDistribution.pure(2), population_cap=50)
    with pytest.raises(PopulationGuardError) as info:
        count_leaves(params, 3.0, [0.0], SeedScheme(0), 0)
    assert info.value.cap == 50


def test_population_guard_survives_pickling():
    error = PopulationGuardError(100, 12.5)
    copy = pickle.loads(pickle.dumps(error))
    assert copy.cap == 100
    assert copy.expected == 12.5
    assert str(copy) == str(error)


def test_population_cap_from_environment(monkeypatch):
    monkeypatch.setenv('BBM_VOTING_POPULATION_CAP', '77')
    assert GenealogyParams.binary().population_cap == 77


def test_max_children_hint():
    params = GenealogyParams(1.0, OffspringDistribution.pure(2), population_cap=100)
    assert max_children_hint(params, 0.5) is None
    assert "cap" in max_children_hint(params, 5.0)


def test_lineage_marginal_is_gaussian():
    # follow child 0 at every branching: a single Brownian path with variance 2t
    params = GenealogyParams.binary()
    seed = SeedScheme(2024)
    t = 1.0
    samples = np.array([
        fold_tree(params, t, [0.0], seed, r, lambda leaf: leaf.position[0], lambda branch, values: values[0])
        for r in range(2000)
    ])
    result = stats.kstest(samples, stats.norm(loc=0.0, scale=math.sqrt(2.0 * t)).cdf)
    assert result.pvalue > 1e-3


def test_multidimensional_start():
    assert start_point(1.0, 3).tolist() == [1.0, 0.0, 0.0]
    params = GenealogyParams.binary(dimension=2)
    leaf = fold_tree(params, 0.5, start_point(1.0, 2), SeedScheme(5), 0,
                     lambda record: record.position.size, lambda branch, values: values[0])
    assert leaf == 2


def test_input_validation():
    params = GenealogyParams.binary()
    with pytest.raises(ValidationError):
        count_leaves(params, -1.0, [0.0], SeedScheme(0), 0)
    with pytest.raises(ValidationError):
        count_leaves(params, 1.0, [0.0, 1.0], SeedScheme(0), 0)
    with pytest.raises(ValidationError):
        SeedScheme(-1)
    with pytest.raises(ValidationError):
        GenealogyParams(-1.0, OffspringDistribution.pure(2))


@pytest.mark.slow
def test_mean_population_matches_exponential_growth():
    params = GenealogyParams.binary()
    seed = SeedScheme(17)
    counts = np.array([count_leaves(params, 2.0, [0.0], seed, r) for r in range(20_000)], dtype=float)
    se = counts.std(ddof=1) / math.sqrt(counts.size)
    assert abs(counts.mean() - math.exp(2.0)) <= 3.0 * se
