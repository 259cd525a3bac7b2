from fractions import Fraction

import numpy as np
import pytest

from faithlab import __version__
from faithlab.discrete import DiscreteBn, check_faithful, deterministic_variable_bn, sample_parameters
from faithlab.errors import (
    InputError,
    InvariantViolationError,
    ModelInvariantError,
    PreconditionError,
    UnknownVertexError,
)
from faithlab.gaussian import GaussianBn, cancelling_paths_bn
from faithlab.graph import Dag
from faithlab.typicality import (
    ExperimentConfig,
    denseness_experiment,
    latent_experiment,
    line_scan_experiment,
    measure_zero_experiment,
    openness_witness,
    perturb_discrete,
    perturb_gaussian,
    random_direction,
    scan_line,
    shift_gaussian,
)

F = Fraction
CHAIN = Dag(("A", "B", "C"), {("A", "B"), ("B", "C")})
TRIANGLE = Dag(("A", "B", "C"), {("A", "B"), ("B", "C"), ("A", "C")})
PAIR = Dag(("A", "B"), {("A", "B")})
CONFOUNDED = Dag(
    ("A", "B", "C", "L1", "L2"),
    {("A", "B"), ("B", "L2"), ("L2", "C"), ("L1", "A"), ("L1", "B"), ("L1", "C"), ("L1", "L2")},
)


def noisy_copy():
    return DiscreteBn(
        PAIR,
        {"A": 2, "B": 2},
        {"A": [[F(1, 2), F(1, 2)]], "B": [[F(3, 4), F(1, 4)], [F(1, 4), F(3, 4)]]},
    )


def constant_cause():
    return deterministic_variable_bn(
        None, [[F(1, 3), F(2, 3)], [F(3, 4), F(1, 4)]], [[F(1, 5), F(4, 5)], [F(1, 2), F(1, 2)]]
    )


class TestExperimentConfig:
    def test_defaults(self):
        cfg = ExperimentConfig(CHAIN)
        assert cfg.epsilons == (F(1, 100), F(1, 1000))
        assert cfg.radii[0] == F(1, 10)
        assert cfg.radii[-1] == F(1, 10**6)
        assert cfg.observed == ("A", "B", "C")

    def test_unknown_family(self):
        with pytest.raises(InputError):
            ExperimentConfig(CHAIN, family="poisson")

    def test_no_samples(self):
        with pytest.raises(InputError):
            ExperimentConfig(CHAIN, samples=0)

    def test_epsilons_must_decrease(self):
        with pytest.raises(InputError, match="decreasing"):
            ExperimentConfig(CHAIN, epsilons=(F(1, 1000), F(1, 100)))

    def test_radii_must_be_positive(self):
        with pytest.raises(InputError, match="positive"):
            ExperimentConfig(CHAIN, radii=(F(1, 10), 0))

    def test_latent_must_be_declared(self):
        with pytest.raises(UnknownVertexError):
            ExperimentConfig(CHAIN, latent={"Z"})

    def test_dict_is_plain_data(self):
        data = ExperimentConfig(CHAIN, resolution=64).to_dict()
        assert data["edges"] == [["A", "B"], ["B", "C"]]
        assert data["epsilons"] == ["1/100", "1/1000"]
        assert data["resolution"] == 64
        assert data["cardinalities"] == {"A": 2, "B": 2, "C": 2}

    def test_seed_must_be_non_negative(self):
        with pytest.raises(InputError, match="seed"):
            ExperimentConfig(CHAIN, seed=-1)

    def test_per_vertex_cardinalities(self):
        cfg = ExperimentConfig(CHAIN, cardinality=3, cardinalities={"A": 4})
        assert cfg.card_map() == {"A": 4, "B": 3, "C": 3}

    def test_single_state_vertex(self):
        with pytest.raises(ModelInvariantError):
            ExperimentConfig(CHAIN, cardinalities={"A": 1})

    def test_cardinality_of_undeclared_vertex(self):
        with pytest.raises(UnknownVertexError):
            ExperimentConfig(CHAIN, cardinalities={"Z": 3})

    def test_draws_use_per_vertex_cardinalities(self):
        from faithlab import typicality

        bn = typicality._draw(ExperimentConfig(CHAIN, cardinalities={"A": 3}, resolution=64), 0)
        assert bn.cardinalities == {"A": 3, "B": 2, "C": 2}
        assert len(bn.cpts["B"]) == 3


class TestMeasureZero:
    def test_discrete_draws_are_faithful(self):
        report = measure_zero_experiment(ExperimentConfig(TRIANGLE, samples=20, seed=1))
        assert report.exact_unfaithful == 0
        assert report.markov_violations == 0
        assert report.draws == 20

    def test_gaussian_draws_are_faithful(self):
        report = measure_zero_experiment(ExperimentConfig(CHAIN, family="gaussian", samples=20))
        assert report.exact_unfaithful == 0
        assert report.markov_violations == 0

    def test_counts_shrink_with_epsilon(self):
        cfg = ExperimentConfig(CHAIN, samples=30, epsilons=(F(1, 10), F(1, 100), F(1, 1000)))
        counts = [n for _, n in measure_zero_experiment(cfg).epsilon_counts]
        assert counts == sorted(counts, reverse=True)
        assert counts[0] <= 30

    def test_same_seed_same_report(self):
        cfg = ExperimentConfig(CHAIN, samples=10, seed=42, cardinality=3)
        assert measure_zero_experiment(cfg).to_dict() == measure_zero_experiment(cfg).to_dict()

    def test_report_has_no_timing(self):
        data = measure_zero_experiment(ExperimentConfig(PAIR, samples=3)).to_dict()
        assert data["runtime"] == {"faithlab": __version__, "draws": 3}
        assert data["kind"] == "measure-zero"
        assert data["epsilon_counts"][0][0] == "1/100"

    @pytest.mark.slow
    def test_many_draws(self):
        report = measure_zero_experiment(ExperimentConfig(TRIANGLE, samples=500, seed=7))
        assert report.exact_unfaithful == 0
        assert report.markov_violations == 0


    @pytest.mark.slow
    @pytest.mark.parametrize("family", ["discrete", "gaussian"])
    def test_near_unfaithful_counts_scale_with_epsilon(self, family):
        cfg = ExperimentConfig(TRIANGLE, family=family, samples=10000, seed=11)
        report = measure_zero_experiment(cfg)
        assert report.exact_unfaithful == 0
        assert report.markov_violations == 0
        (_, coarse), (_, fine) = report.epsilon_counts
        assert coarse >= fine
        if fine >= 20:
            assert 2 <= coarse / fine <= 50

class TestLatent:
    def test_confounded_margin_is_markov(self):
        cfg = ExperimentConfig(CONFOUNDED, samples=5, latent={"L1", "L2"}, resolution=256)
        report = latent_experiment(cfg)
        assert report.markov_violations == 0
        assert report.exact_unfaithful == 0
        assert report.details["projection"] == {
            "vertices": ["A", "B", "C"],
            "directed": [["A", "B"], ["B", "C"]],
            "bidirected": [["A", "B"], ["A", "C"], ["B", "C"]],
        }

    def test_gaussian_margin(self):
        cfg = ExperimentConfig(CONFOUNDED, family="gaussian", samples=5, latent={"L1", "L2"})
        report = latent_experiment(cfg)
        assert report.markov_violations == 0

    def test_nothing_hidden_matches_measure_zero(self):
        cfg = ExperimentConfig(CHAIN, samples=8, seed=3)
        latent = latent_experiment(cfg)
        plain = measure_zero_experiment(cfg)
        assert latent.exact_unfaithful == plain.exact_unfaithful
        assert latent.epsilon_counts == plain.epsilon_counts

    @pytest.mark.slow
    def test_many_confounded_draws(self):
        report = latent_experiment(ExperimentConfig(CONFOUNDED, samples=500, seed=13, latent={"L1", "L2"}))
        assert report.draws == 500
        assert report.markov_violations == 0
        assert report.exact_unfaithful == 0


class TestPerturbation:
    def test_discrete_rows_stay_distributions(self):
        rng = np.random.default_rng(0)
        moved = perturb_discrete(constant_cause(), F(1, 10), rng, 1024)
        for rows in moved.cpts.values():
            for row in rows:
                assert sum(row) == 1
                assert all(x > 0 for x in row)

    def test_point_mass_is_lifted(self):
        moved = perturb_discrete(constant_cause(), F(1, 1000), np.random.default_rng(1), 1024)
        assert 0 < moved.cpts["B"][0][1] <= F(1, 1000)

    def test_gaussian_offsets_are_within_radius(self):
        bn = cancelling_paths_bn(1, 2)
        radius = F(1, 100)
        moved = perturb_gaussian(bn, radius, np.random.default_rng(2), 1024)
        for v in bn.graph.vertices:
            assert abs(moved.variances[v] - bn.variances[v]) <= radius
            for p, beta in bn.coefficients[v].items():
                assert abs(moved.coefficients[v][p] - beta) <= radius

    def test_seed_must_be_non_negative(self):
        with pytest.raises(InputError):
            openness_witness(noisy_copy(), 5, F(1, 100), seed=-1)
        with pytest.raises(InputError):
            line_scan_experiment(cancelling_paths_bn(1, 2), seed=-1, grid=4)


class TestDenseness:
    def test_constant_cause_is_escaped(self):
        cfg = ExperimentConfig(constant_cause().graph, samples=10, radii=(F(1, 10), F(1, 1000)))
        report = denseness_experiment(constant_cause(), cfg)
        assert [f for _, f in report.radius_faithful] == [1, 1]
        assert "(A, C | {})" in report.details["start_unfaithful"]

    def test_cancelling_paths_are_escaped(self):
        bn = cancelling_paths_bn(1, 2)
        cfg = ExperimentConfig(bn.graph, family="gaussian", samples=10, radii=(F(1, 100), F(1, 10**6)))
        report = denseness_experiment(bn, cfg)
        assert report.exact_unfaithful == 0
        assert report.to_dict()["radius_faithful"] == [["1/100", "1"], ["1/1000000", "1"]]

    @pytest.mark.slow
    def test_every_radius_escapes_the_zero_set(self):
        bn = cancelling_paths_bn(1, 2)
        report = denseness_experiment(bn, ExperimentConfig(bn.graph, family="gaussian", samples=100, seed=17))
        assert [r for r, _ in report.radius_faithful] == [F(1, 10**k) for k in range(1, 7)]
        for _, fraction in report.radius_faithful:
            assert fraction >= F(99, 100)

    def test_needs_unfaithful_start(self):
        bn = noisy_copy()
        with pytest.raises(PreconditionError):
            denseness_experiment(bn, ExperimentConfig(PAIR, samples=2))

    def test_graph_must_match(self):
        with pytest.raises(InputError):
            denseness_experiment(constant_cause(), ExperimentConfig(CHAIN, samples=2))


class TestOpenness:
    def test_small_perturbations_stay_faithful(self):
        report = openness_witness(noisy_copy(), 20, F(1, 1000), seed=4, resolution=1024)
        assert report.details["delta"] == "1/8"
        assert report.details["threshold"] == "1/32"
        assert report.details["passing"] == 20
        assert report.details["faithful_passing"] == 20
        assert report.details["vacuous"] is False

    @pytest.mark.slow
    def test_hundred_small_perturbations(self):
        report = openness_witness(noisy_copy(), 100, F(1, 1000), seed=19)
        assert report.details["passing"] == 100
        assert report.details["faithful_passing"] == 100

    def test_large_perturbations_may_leave_the_ball(self):
        report = openness_witness(noisy_copy(), 20, F(1), seed=4, resolution=1024)
        assert report.details["passing"] <= 20
        assert report.details["faithful_passing"] == report.details["passing"]

    def test_unfaithful_start(self):
        with pytest.raises(PreconditionError):
            openness_witness(constant_cause(), 5, F(1, 100))

    def test_gaussian_start(self):
        with pytest.raises(PreconditionError):
            openness_witness(cancelling_paths_bn(1, 2), 5, F(1, 100))

    def test_nothing_to_protect(self):
        edgeless = sample_parameters(Dag(("A", "B"), set()), None, 0)
        assert check_faithful(edgeless).is_faithful
        with pytest.raises(PreconditionError):
            openness_witness(edgeless, 5, F(1, 100))

    def test_radius_must_be_positive(self):
        with pytest.raises(InputError):
            openness_witness(noisy_copy(), 5, 0)

    def test_unfaithful_neighbour_inside_the_ball_is_reported(self, monkeypatch):
        from faithlab import typicality

        monkeypatch.setattr(typicality, "perturb_discrete", lambda theta, *args: theta.with_cpts(
            {"B": ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))}
        ))
        monkeypatch.setattr(typicality, "tv_distance", lambda t0, t1: F(0))
        with pytest.raises(InvariantViolationError):
            openness_witness(noisy_copy(), 3, F(1, 100))


class TestLineScan:
    def test_direction_keeps_variances_positive(self):
        bn = cancelling_paths_bn(1, 2, variances=(F(1, 3), 1, 2))
        direction = random_direction(bn, np.random.default_rng(0), 1024)
        for t in (F(-1), F(1)):
            shifted = shift_gaussian(bn, direction, t)
            assert all(s > 0 for s in shifted.variances.values())

    def test_scan_grid(self):
        bn = cancelling_paths_bn(1, 2)
        direction = {("beta", "C", "A"): F(1)}
        profile = scan_line(bn, direction, 4, ("A", "C", ()))
        assert [t for t, _ in profile] == [-1, F(-1, 2), 0, F(1, 2), 1]
        assert [d for _, d in profile] == [1, F(1, 2), 0, F(1, 2), 1]

    def test_odd_grid_keeps_the_origin(self):
        bn = cancelling_paths_bn(1, 2)
        profile = scan_line(bn, {("beta", "C", "A"): F(1)}, 3, ("A", "C", ()))
        assert [t for t, _ in profile] == [-1, F(-1, 3), 0, F(1, 3), 1]
        assert [d for _, d in profile] == [1, F(1, 3), 0, F(1, 3), 1]

    def test_defect_scales_with_the_cause_variance(self):
        # Cov(A, C) = t * Var(A) once the direct effect moves by t
        bn = cancelling_paths_bn(1, 2, variances=(3, 1, 1))
        profile = scan_line(bn, {("beta", "C", "A"): F(1)}, 4, ("A", "C", ()))
        assert [d for _, d in profile] == [3, F(3, 2), 0, F(3, 2), 3]

    def test_odd_grid_finds_the_start(self):
        report = line_scan_experiment(cancelling_paths_bn(1, 2), grid=11)
        line = report.details["lines"][0]
        assert report.line_zeros == 1
        assert line["zero_at"] == ["0"]
        assert len(line["profile"]) == 13

    def test_cancelling_paths_meet_the_zero_set_once(self):
        report = line_scan_experiment(cancelling_paths_bn(1, 2), seed=5, grid=100, directions=3)
        assert report.details["witness"] == "(A, C | {})"
        assert report.line_zeros == 3
        for line in report.details["lines"]:
            assert line["zeros"] == 1
            assert line["zero_at"] == ["0"]
            assert len(line["profile"]) == 101

    def test_explicit_witness(self):
        report = line_scan_experiment(cancelling_paths_bn(1, 2), grid=10, witness=("A", "C", ()))
        assert report.line_zeros == 1

    def test_needs_unfaithful_start(self):
        bn = GaussianBn(CHAIN, {"A": {}, "B": {"A": 1}, "C": {"B": 1}}, {"A": 1, "B": 1, "C": 1})
        with pytest.raises(PreconditionError):
            line_scan_experiment(bn, grid=4)

    def test_needs_gaussian_start(self):
        with pytest.raises(PreconditionError):
            line_scan_experiment(constant_cause(), grid=4)

    def test_same_seed_same_report(self):
        bn = cancelling_paths_bn(1, 2)
        assert line_scan_experiment(bn, seed=9, grid=8).to_dict() == line_scan_experiment(bn, seed=9, grid=8).to_dict()

    @pytest.mark.slow
    def test_twenty_fine_lines(self):
        report = line_scan_experiment(cancelling_paths_bn(1, 2), seed=23, grid=10000, directions=20)
        assert report.line_zeros == 20
        for line in report.details["lines"]:
            assert line["zero_at"] == ["0"]
            assert len(line["profile"]) == 10001
