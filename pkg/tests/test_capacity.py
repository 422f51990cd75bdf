# tests/test_capacity.py
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from models.capacity import (
    Capacity, InputModel, OutcomeSpace, capacity_classify, choquet, extend_capacity, mask_of, members,
    outcome_envs, wp_input,
)
from models.answers import EXT, INFINITY, ExprCont
from models.errors import NoModelForSite, NonMonotoneCapacity, SpaceTooLarge
from models.semantics import Env
from services.capacity_files import load_capacity
from services.parse_program import parse_expr

F = Fraction


def space_of(n: int, var: str = "x") -> OutcomeSpace:
    return OutcomeSpace((var,), tuple((F(i),) for i in range(n)))


def random_masses(rng, n: int) -> dict:
    masses = {}
    for _ in range(1 + int(rng.integers(4))):
        subset = frozenset(int(i) for i in np.flatnonzero(rng.integers(2, size=n)))
        if subset:
            masses[subset] = masses.get(subset, F(0)) + F(int(rng.integers(1, 6)), 4)
    return masses or {frozenset(range(n)): F(1)}


def random_table(rng, n: int) -> Capacity:
    values = [F(0)] + [F(int(v), 4) for v in rng.integers(0, 10, size=(1 << n) - 1)]
    return Capacity(space_of(n), values)


def random_integrand(rng, n: int) -> list:
    return [F(int(v), 2) for v in rng.integers(0, 9, size=n)]


def random_monotone(rng, n: int) -> Capacity:
    """A random table closed upwards: every subset is at least the largest of its one-smaller subsets."""
    table = [F(0)] + [F(int(v), 4) for v in rng.integers(0, 10, size=(1 << n) - 1)]
    for mask in range(1, 1 << n):
        table[mask] = max([table[mask]] + [table[mask ^ (1 << i)] for i in members(mask)])
    return Capacity(space_of(n), table)


def sorted_choquet(f, nu: Capacity):
    """Sum over outcomes sorted by value: (f(i) - f(previous)) * nu(outcomes at least as high)."""
    order = sorted(range(len(f)), key=lambda i: f[i])
    total, previous = F(0), F(0)
    for position, i in enumerate(order):
        total += (f[i] - previous) * nu(order[position:])
        previous = f[i]
    return total


def mobius_choquet(f, nu: Capacity):
    """Sum of each Moebius mass times the smallest value of f on its subset."""
    masses = nu.mobius()
    return sum((masses[mask] * min(f[i] for i in members(mask)) for mask in range(1, 1 << len(f))), F(0))


@pytest.fixture
def example(real, corpus) -> Capacity:
    return load_capacity(corpus / "capacity" / "example.cap", real)


class TestOutcomeSpace:
    def test_names(self):
        space = space_of(3)
        assert space.name(0) == "o1"
        assert space.index_of("o2") == 1
        assert space.index_of("3") == 2
        with pytest.raises(ValueError):
            space.index_of("o4")

    def test_validation(self):
        with pytest.raises(ValueError):
            OutcomeSpace(("x",), ((F(0),), (F(0),)))
        with pytest.raises(ValueError):
            OutcomeSpace(("x", "y"), ((F(0),),))
        with pytest.raises(SpaceTooLarge):
            space_of(21)

    def test_masks(self):
        assert mask_of([0, 2]) == 5
        assert members(5) == (0, 2)


class TestClassification:
    def test_example_flags(self, example):
        flags = example.flags
        assert flags.monotone and flags.convex and flags.normalized
        assert not flags.concave
        assert str(flags) == "monotone,convex,normalized,continuous"

    def test_broken_capacity(self, real, corpus):
        nu = load_capacity(corpus / "capacity" / "broken.cap", real)
        assert not nu.flags.monotone
        with pytest.raises(NonMonotoneCapacity):
            choquet([F(1), F(0)], nu)

    def test_belief_and_plausibility(self, real, corpus):
        belief = load_capacity(corpus / "capacity" / "belief.cap", real)
        plausibility = load_capacity(corpus / "capacity" / "plausibility.cap", real)
        assert belief.kind == "belief" and plausibility.kind == "plausibility"
        assert belief.flags.convex and plausibility.flags.concave
        assert belief({0}) == F(3, 10) and plausibility({0}) == 1
        assert plausibility({1, 2}) == F(7, 10)

    def test_probability_is_modular(self, real, corpus):
        flags = load_capacity(corpus / "capacity" / "fair.cap", real).flags
        assert flags.convex and flags.concave

    def test_local_and_pairwise_agree(self, rng):
        for n in range(1, 7):
            for _ in range(8):
                candidates = [random_table(rng, n), Capacity.from_masses(space_of(n), random_masses(rng, n))]
                for nu in candidates:
                    assert capacity_classify(nu) == capacity_classify(nu, pairwise=True)

    def test_pairwise_is_bounded(self):
        nu = Capacity.from_probability(space_of(13), [F(1, 13)] * 13)
        with pytest.raises(SpaceTooLarge):
            capacity_classify(nu, pairwise=True)


class TestChoquet:
    def test_example(self, example):
        assert choquet([F(2), F(1)], example) == F(6, 5)
        assert choquet({0: F(0), 1: F(1)}, example) == F(3, 10)

    def test_probability_gives_the_expectation(self, rng):
        for n in range(1, 6):
            weights = [F(int(w), 7) for w in rng.integers(0, 8, size=n)]
            nu = Capacity.from_probability(space_of(n), weights)
            for _ in range(50):
                f = random_integrand(rng, n)
                assert choquet(f, nu) == sum(w * v for w, v in zip(weights, f))

    def test_belief_functions_are_superlinear(self, rng):
        for k in range(20):
            n = 2 + k % 4
            nu = Capacity.from_masses(space_of(n), random_masses(rng, n))
            for _ in range(500):
                f, g = random_integrand(rng, n), random_integrand(rng, n)
                total = choquet([a + b for a, b in zip(f, g)], nu)
                assert total >= choquet(f, nu) + choquet(g, nu)

    def test_homogeneous_and_monotone(self, rng):
        nu = Capacity.from_masses(space_of(4), random_masses(rng, 4))
        for _ in range(200):
            f = random_integrand(rng, 4)
            alpha = F(int(rng.integers(0, 5)), 3)
            assert choquet([alpha * v for v in f], nu) == alpha * choquet(f, nu)
            bumped = [v + F(int(rng.integers(0, 2))) for v in f]
            assert choquet(f, nu) <= choquet(bumped, nu)

    def test_infinite_values(self, example):
        assert choquet([INFINITY, F(1)], example) == INFINITY
        zero_weight = Capacity.from_table(example.space, {(0,): 0, (1,): 1, (0, 1): 1})
        assert choquet([INFINITY, F(1)], zero_weight) == 1

    def test_negative_integrand(self, example):
        with pytest.raises(ValueError):
            choquet([F(-1), F(1)], example)


class TestConstruction:
    def test_table_validation(self):
        space = space_of(2)
        with pytest.raises(ValueError):
            Capacity(space, [F(1), F(0), F(0), F(1)])
        with pytest.raises(ValueError):
            Capacity(space, [F(0), F(-1), F(0), F(1)])
        with pytest.raises(ValueError):
            Capacity(space, [F(0), F(1)])

    def test_masses_round_trip(self, rng):
        for n in range(1, 6):
            masses = random_masses(rng, n)
            nu = Capacity.from_masses(space_of(n), masses)
            recovered = nu.mobius()
            for mask in range(1 << n):
                assert recovered[mask] == masses.get(frozenset(members(mask)), 0)

    def test_mass_on_the_empty_set(self):
        with pytest.raises(ValueError):
            Capacity.from_masses(space_of(2), {frozenset(): F(1)})

    def test_dual_is_an_involution(self, rng):
        for n in range(1, 5):
            nu = Capacity.from_masses(space_of(n), random_masses(rng, n))
            assert nu.dual().dual() == nu
            assert nu.dual().kind == "plausibility"
            assert nu.dual().total == nu.total

    def test_to_frame(self, example):
        frame = example.to_frame()
        assert list(frame["subset"]) == ["{}", "{1}", "{2}", "{1,2}"]
        assert list(frame["value"]) == [0, F(1, 5), F(3, 10), 1]


class TestInputSemantics:
    def test_extend_capacity(self, example):
        env = Env.of({"x": F(0), "y": F(7)})
        extension = extend_capacity(example, env)
        assert extension(lambda e: e["x"] >= 1) == F(3, 10)
        assert extension(lambda e: e["y"] == 7) == 1
        assert extension([Env.of({"x": F(1, 2), "y": F(7)})]) == F(1, 5)

    def test_outcome_envs_keep_other_variables(self, example):
        envs = outcome_envs(example, Env.of({"y": F(2)}))
        assert [e.as_dict() for e in envs] == [{"x": F(1, 2), "y": F(2)}, {"x": F(1), "y": F(2)}]

    def test_wp_input(self, example, real):
        model = InputModel().add(3, example)
        kappa = ExprCont(parse_expr("x * 2"), real)
        assert wp_input(kappa, model, 3, Env.of({})) == F(13, 10)
        assert kappa.domain is EXT
        with pytest.raises(NoModelForSite):
            wp_input(kappa, model, 4, Env.of({}))
        with pytest.raises(ValueError):
            wp_input(kappa, model, 3, Env.of({}), ("y",))
        assert 3 in model and 4 not in model


def test_subsets_are_enumerated_in_mask_order():
    space = space_of(3)
    nu = Capacity.from_probability(space, [F(1, 3)] * 3)
    for r in range(4):
        for subset in combinations(range(3), r):
            assert nu(subset) == F(r, 3)


class TestChoquetOracles:
    def test_indicators_give_the_capacity(self, rng):
        for n in range(1, 7):
            for nu in (random_monotone(rng, n), Capacity.from_masses(space_of(n), random_masses(rng, n))):
                for mask in range(1 << n):
                    indicator = [F(1) if mask >> i & 1 else F(0) for i in range(n)]
                    assert choquet(indicator, nu) == nu(mask)

    def test_step_function_sums_agree(self, rng):
        for n in range(1, 7):
            for _ in range(6):
                nu = random_monotone(rng, n)
                for _ in range(30):
                    f = random_integrand(rng, n)
                    assert choquet(f, nu) == sorted_choquet(f, nu) == mobius_choquet(f, nu)

    def test_belief_functions_are_superlinear_in_combinations(self, rng):
        for k in range(24):
            n = 1 + k % 6
            nu = Capacity.from_masses(space_of(n), random_masses(rng, n))
            for _ in range(40):
                f, g = random_integrand(rng, n), random_integrand(rng, n)
                alpha, beta = F(int(rng.integers(0, 7)), 3), F(int(rng.integers(0, 7)), 5)
                mixed = [alpha * a + beta * b for a, b in zip(f, g)]
                assert choquet(mixed, nu) >= alpha * choquet(f, nu) + beta * choquet(g, nu)

    def test_plausibilities_are_sublinear(self, rng):
        for k in range(24):
            n = 1 + k % 6
            nu = Capacity.plausibility_of(space_of(n), random_masses(rng, n))
            for _ in range(40):
                f, g = random_integrand(rng, n), random_integrand(rng, n)
                alpha = F(int(rng.integers(0, 7)), 3)
                assert choquet([alpha * a + b for a, b in zip(f, g)], nu) <= alpha * choquet(f, nu) + choquet(g, nu)

    def test_duals_of_beliefs_are_concave(self, rng):
        for n in range(1, 7):
            for _ in range(4):
                nu = Capacity.from_masses(space_of(n), random_masses(rng, n))
                conjugate = nu.dual()
                full = (1 << n) - 1
                for a in range(1 << n):
                    assert conjugate(a) == nu.total - nu(full ^ a)
                    for b in range(1 << n):
                        assert nu(a | b) + nu(a & b) >= nu(a) + nu(b)
                        assert conjugate(a | b) + conjugate(a & b) <= conjugate(a) + conjugate(b)
                assert capacity_classify(conjugate, pairwise=True).concave
                assert conjugate.dual() == nu

    def test_scaled_integrands_approach_the_integral(self, rng):
        for n in range(1, 7):
            nu = random_monotone(rng, n)
            f = random_integrand(rng, n)
            values = [choquet([(1 - F(1, 2 ** k)) * v for v in f], nu) for k in range(12)]
            assert all(a <= b for a, b in zip(values, values[1:]))
            assert all(value <= choquet(f, nu) for value in values)
            assert choquet(f, nu) - values[-1] == choquet(f, nu) / 2 ** 11

    def test_truncated_integrands_approach_the_integral(self, rng, example):
        for n in range(1, 7):
            nu = random_monotone(rng, n)
            f = random_integrand(rng, n)
            f[0] = INFINITY
            values = [choquet([min(v, F(8) ** k) for v in f], nu) for k in range(8)]
            assert all(a <= b for a, b in zip(values, values[1:]))
            if nu({0}) > 0:
                assert choquet(f, nu) == INFINITY and values[-1] > values[-2]
            else:
                assert values[-1] == values[-2] == choquet(f, nu)
        zero_weight = Capacity.from_table(example.space, {(0,): 0, (1,): 1, (0, 1): 1})
        assert [choquet([min(INFINITY, F(8) ** k), F(1)], zero_weight) for k in range(3)] == [1, 1, 1]
