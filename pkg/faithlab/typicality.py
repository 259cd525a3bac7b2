"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Typicality Experiments Module

Seeded experiments around unfaithful parameters: how rarely random draws hit
them, how any perturbation escapes them, how a faithful network keeps a
faithful neighbourhood, how a line through one meets the zero set, and how
latent projection carries all of this to the observed margin.
"""

import time
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

try:
    from .__init__ import __version__ as version
    from .config import resolution as default_resolution
    from .discrete import (
        DiscreteBn,
        assess,
        check_faithful,
        ci_defect,
        joint,
        marginal,
        sample_parameters,
    )
    from .errors import InputError, InvariantViolationError, ModelInvariantError, PreconditionError
    from .gaussian import (
        GaussianBn,
        check_faithful_gaussian,
        covariance,
        covariance_defect,
        sample_parameters_gaussian,
    )
    from .graph import Dag, SeparationStatement, check_vertices, enumerate_statements, latent_project
    from .interpolate import tv_distance
    from .utils import format_rational, print_progress_bar, sub_seed, time_formatter
except ImportError:
    from __init__ import __version__ as version
    from config import resolution as default_resolution
    from discrete import (
        DiscreteBn,
        assess,
        check_faithful,
        ci_defect,
        joint,
        marginal,
        sample_parameters,
    )
    from errors import InputError, InvariantViolationError, ModelInvariantError, PreconditionError
    from gaussian import (
        GaussianBn,
        check_faithful_gaussian,
        covariance,
        covariance_defect,
        sample_parameters_gaussian,
    )
    from graph import Dag, SeparationStatement, check_vertices, enumerate_statements, latent_project
    from interpolate import tv_distance
    from utils import format_rational, print_progress_bar, sub_seed, time_formatter

logger = logging.getLogger(__name__)

FAMILIES = ("discrete", "gaussian")

DEFAULT_EPSILONS = (Fraction(1, 100), Fraction(1, 1000))
DEFAULT_RADII = tuple(Fraction(1, 10**k) for k in range(1, 7))


def _strictly_decreasing_positive(values, name):
    values = tuple(Fraction(v) for v in values)
    if any(v <= 0 for v in values):
        raise InputError(f"{name} must be strictly positive")
    if any(x <= y for x, y in zip(values, values[1:])):
        raise InputError(f"{name} must be strictly decreasing")
    return values


@dataclass(frozen=True)
class ExperimentConfig:
    graph: Dag
    family: str = "discrete"
    samples: int = 100
    seed: int = 0
    epsilons: tuple = DEFAULT_EPSILONS
    radii: tuple = DEFAULT_RADII
    grid: int = 100
    latent: frozenset = frozenset()
    cardinality: int = 2
    cardinalities: dict = None
    resolution: int = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"Unknown family {self.family!r}, expected one of {list(FAMILIES)}")
        if self.samples < 1:
            raise InputError(f"samples must be at least 1, got {self.samples}")
        if self.grid < 1:
            raise InputError(f"grid must be at least 1, got {self.grid}")
        if self.cardinality < 2:
            raise InputError(f"cardinality must be at least 2, got {self.cardinality}")
        if self.seed < 0:
            raise InputError(f"seed must be non-negative, got {self.seed}")
        cards = dict(self.cardinalities or {})
        check_vertices(self.graph, cards)
        for v, k in cards.items():
            if k < 2:
                raise ModelInvariantError(f"Vertex {v} needs at least 2 states, got {k}")
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "epsilons", _strictly_decreasing_positive(self.epsilons, "epsilons"))
        object.__setattr__(self, "radii", _strictly_decreasing_positive(self.radii, "radii"))
        object.__setattr__(self, "latent", frozenset(self.latent))
        check_vertices(self.graph, self.latent)

    def card_map(self):
        """States per vertex: the per-vertex map first, then the shared cardinality."""
        return {v: self.cardinalities.get(v, self.cardinality) for v in self.graph.vertices}

    @property
    def observed(self):
        return tuple(v for v in self.graph.vertices if v not in self.latent)

    def resolved_resolution(self):
        return default_resolution() if self.resolution is None else int(self.resolution)

    def to_dict(self):
        return {
            "vertices": list(self.graph.vertices),
            "edges": [list(e) for e in self.graph.sorted_edges()],
            "latent": [v for v in self.graph.vertices if v in self.latent],
            "family": self.family,
            "samples": self.samples,
            "seed": self.seed,
            "epsilons": [format_rational(e) for e in self.epsilons],
            "radii": [format_rational(r) for r in self.radii],
            "grid": self.grid,
            "cardinality": self.cardinality,
            "cardinalities": self.card_map(),
            "resolution": self.resolved_resolution(),
        }


@dataclass(frozen=True)
class TypicalityReport:
    """
    Counts gathered by one experiment. Holds nothing that depends on wall-clock
    time, so equal inputs give equal reports.
    """

    kind: str
    config: dict
    seed: int
    draws: int
    exact_unfaithful: int = None
    markov_violations: int = None
    epsilon_counts: tuple = ()
    radius_faithful: tuple = ()
    line_zeros: int = None
    details: dict = field(default_factory=dict)

    @property
    def runtime(self):
        return {"faithlab": version, "draws": self.draws}

    def to_dict(self):
        result = {
            "kind": self.kind,
            "config": self.config,
            "seed": self.seed,
            "runtime": self.runtime,
        }
        if self.exact_unfaithful is not None:
            result["exact_unfaithful"] = self.exact_unfaithful
        if self.markov_violations is not None:
            result["markov_violations"] = self.markov_violations
        if self.epsilon_counts:
            result["epsilon_counts"] = [[format_rational(e), n] for e, n in self.epsilon_counts]
        if self.radius_faithful:
            result["radius_faithful"] = [
                [format_rational(r), format_rational(f)] for r, f in self.radius_faithful
            ]
        if self.line_zeros is not None:
            result["line_zeros"] = self.line_zeros
        result.update(self.details)
        return result


def family_of(model):
    if isinstance(model, DiscreteBn):
        return "discrete"
    if isinstance(model, GaussianBn):
        return "gaussian"
    raise InputError(f"Expected a discrete or Gaussian network, got {type(model).__name__}")


def faithfulness(model):
    if family_of(model) == "discrete":
        return check_faithful(model)
    return check_faithful_gaussian(model)


def _draw(cfg, seed):
    if cfg.family == "discrete":
        return sample_parameters(cfg.graph, cfg.card_map(), seed, cfg.resolution)
    return sample_parameters_gaussian(cfg.graph, seed, cfg.resolution)


def _observed_report(model, projection, observed):
    if isinstance(model, DiscreteBn):
        t = marginal(joint(model), observed)
        return assess(
            enumerate_statements(projection), lambda a, b, c: ci_defect(t, {a}, {b}, c)
        )
    m = covariance(model).submatrix(observed)
    return assess(
        enumerate_statements(projection), lambda a, b, c: covariance_defect(m, {a}, {b}, c)
    )


def _count_draws(cfg, kind, report_of):
    exact = violations = 0
    counts = [0] * len(cfg.epsilons)
    start = time.perf_counter()
    for i in range(cfg.samples):
        report = report_of(_draw(cfg, sub_seed(cfg.seed, i)))
        if report.markov_violations:
            violations += 1
            logger.warning(f"Draw {i} violates the Markov property: {report.markov_violations[0][0]}")
        if report.unfaithful_statements:
            exact += 1
            logger.info(f"Draw {i} is unfaithful: {report.unfaithful_statements[0][0]}")
        delta = report.min_connected_defect
        if delta is not None:
            for j, epsilon in enumerate(cfg.epsilons):
                if delta < epsilon:
                    counts[j] += 1
        logger.debug(f"Draw {i}: min connected defect {None if delta is None else format_rational(delta)}")
        print_progress_bar(i + 1, cfg.samples, prefix="Draws:", suffix="Complete")
    logger.info(f"{kind}: {cfg.samples} draws in {time_formatter(time.perf_counter() - start)}")
    return TypicalityReport(
        kind=kind,
        config=cfg.to_dict(),
        seed=cfg.seed,
        draws=cfg.samples,
        exact_unfaithful=exact,
        markov_violations=violations,
        epsilon_counts=tuple(zip(cfg.epsilons, counts)),
    )


def measure_zero_experiment(cfg):
    """
    Draws `cfg.samples` networks and counts the exactly unfaithful ones and,
    per ε, those whose smallest defect over d-connected statements is below ε.
    """
    return _count_draws(cfg, "measure-zero", faithfulness)


def latent_experiment(cfg):
    """
    Draws networks over the full graph and checks their observed margin
    against the latent projection: Markov violations under m-separation and
    exact unfaithfulness. An empty latent set reduces to the measure-zero run.
    """
    observed = cfg.observed
    projection = latent_project(cfg.graph, observed)
    logger.info(
        f"Projected onto {list(observed)}: directed {projection.sorted_edges()}, "
        f"bidirected {projection.bidirected_pairs()}"
    )
    report = _count_draws(
        cfg, "latent", lambda model: _observed_report(model, projection, observed)
    )
    details = {
        "projection": {
            "vertices": list(projection.vertices),
            "directed": [list(e) for e in projection.sorted_edges()],
            "bidirected": [list(p) for p in projection.bidirected_pairs()],
        }
    }
    return replace(report, details=details)


def _offset(rng, radius, resolution):
    k = int(rng.integers(-resolution, resolution, endpoint=True))
    return radius * Fraction(k, resolution)


def _reflect(value, rng, radius, resolution):
    """|value + u| for a uniform offset u, redrawn while the result is 0."""
    while True:
        shifted = abs(value + _offset(rng, radius, resolution))
        if shifted != 0:
            return shifted


def perturb_discrete(bn, radius, rng, resolution):
    """
    Moves every CPT entry by an independent offset in [-r, r], reflects it
    into the positive reals and renormalizes each row by its sum.
    """
    cpts = {}
    for v in bn.graph.vertices:
        rows = []
        for row in bn.cpts[v]:
            moved = [_reflect(x, rng, radius, resolution) for x in row]
            total = sum(moved)
            rows.append(tuple(x / total for x in moved))
        cpts[v] = tuple(rows)
    return DiscreteBn(bn.graph, bn.cardinalities, cpts)


def perturb_gaussian(bn, radius, rng, resolution):
    """Offsets every coefficient and variance; variances are reflected positive."""
    coefficients = {}
    variances = {}
    for v in bn.graph.vertices:
        coefficients[v] = {
            p: beta + _offset(rng, radius, resolution) for p, beta in bn.coefficients[v].items()
        }
        variances[v] = _reflect(bn.variances[v], rng, radius, resolution)
    return GaussianBn(bn.graph, coefficients, variances)


def perturb(model, radius, rng, resolution):
    if family_of(model) == "discrete":
        return perturb_discrete(model, radius, rng, resolution)
    return perturb_gaussian(model, radius, rng, resolution)


def denseness_experiment(theta0, cfg):
    """
    For every radius, perturbs the unfaithful `theta0` `cfg.samples` times and
    reports the faithful fraction.

    Raises:
        PreconditionError: theta0 is already faithful.
    """
    if cfg.graph != theta0.graph:
        raise InputError("Experiment graph differs from the graph of the starting network")
    base = faithfulness(theta0)
    if base.is_faithful:
        raise PreconditionError("Denseness starts from an unfaithful network, this one is faithful")
    resolution = cfg.resolved_resolution()
    start = time.perf_counter()
    fractions = []
    unfaithful = 0
    for j, radius in enumerate(cfg.radii):
        faithful = 0
        for i in range(cfg.samples):
            rng = np.random.default_rng(sub_seed(sub_seed(cfg.seed, j), i))
            if faithfulness(perturb(theta0, radius, rng, resolution)).is_faithful:
                faithful += 1
            else:
                unfaithful += 1
        logger.info(f"Radius {format_rational(radius)}: {faithful}/{cfg.samples} faithful")
        fractions.append((radius, Fraction(faithful, cfg.samples)))
        print_progress_bar(j + 1, len(cfg.radii), prefix="Radii:", suffix="Complete")
    logger.info(f"denseness: {cfg.samples * len(cfg.radii)} perturbations in {time_formatter(time.perf_counter() - start)}")
    return TypicalityReport(
        kind="denseness",
        config=cfg.to_dict(),
        seed=cfg.seed,
        draws=cfg.samples * len(cfg.radii),
        exact_unfaithful=unfaithful,
        radius_faithful=tuple(fractions),
        details={"start_unfaithful": [str(s) for s, _ in base.unfaithful_statements]},
    )


def openness_witness(theta, n_probes, radius, seed=0, resolution=None):
    """
    Probes the neighbourhood of a faithful discrete network.

    With δ the smallest defect over d-connected statements, every probe whose
    joint lies within total variation δ/4 of theta's joint must be faithful,
    since a defect moves by at most 4 times the total variation.

    Raises:
        PreconditionError: theta is unfaithful or not discrete.
        InvariantViolationError: A probe inside the δ/4 ball is unfaithful.
    """
    if family_of(theta) != "discrete":
        raise PreconditionError("Openness probes need total variation, available for discrete networks only")
    radius = Fraction(radius)
    if radius <= 0 or n_probes < 1:
        raise InputError("Openness needs a positive radius and at least one probe")
    report = check_faithful(theta)
    if not report.is_faithful:
        raise PreconditionError("Openness starts from a faithful network, this one is unfaithful")
    delta = report.min_connected_defect
    if delta is None:
        raise PreconditionError("The graph has no d-connected statements to protect")
    resolution = default_resolution() if resolution is None else int(resolution)
    threshold = delta / 4
    t = joint(theta)
    passing = faithful = 0
    for i in range(n_probes):
        probe = perturb_discrete(theta, radius, np.random.default_rng(sub_seed(seed, i)), resolution)
        distance = tv_distance(joint(probe), t)
        if distance >= threshold:
            continue
        passing += 1
        if not check_faithful(probe).is_faithful:
            raise InvariantViolationError(
                f"Probe {i} at total variation {format_rational(distance)} < δ/4 is unfaithful"
            )
        faithful += 1
    if not passing:
        logger.warning(f"No probe within δ/4 = {format_rational(threshold)}; the result is vacuous")
    return TypicalityReport(
        kind="openness",
        config={"probes": n_probes, "radius": format_rational(radius), "resolution": resolution},
        seed=seed,
        draws=n_probes,
        details={
            "delta": format_rational(delta),
            "threshold": format_rational(threshold),
            "passing": passing,
            "faithful_passing": faithful,
            "vacuous": passing == 0,
        },
    )


def gaussian_coordinates(bn):
    """Free parameters of a GaussianBn as ("beta", v, p) and ("variance", v) keys."""
    keys = []
    for v in bn.graph.vertices:
        keys.extend(("beta", v, p) for p in bn.coefficients[v])
        keys.append(("variance", v))
    return keys


def shift_gaussian(bn, direction, t):
    """bn + t * direction, with direction a map from coordinates to rationals."""
    coefficients = {
        v: {p: beta + t * direction.get(("beta", v, p), 0) for p, beta in bn.coefficients[v].items()}
        for v in bn.graph.vertices
    }
    variances = {
        v: bn.variances[v] + t * direction.get(("variance", v), 0) for v in bn.graph.vertices
    }
    return GaussianBn(bn.graph, coefficients, variances)


def random_direction(bn, rng, resolution):
    """
    Coordinates k/M with k uniform in [-M, M]; variance components are scaled
    by half the smallest variance so the segment t in [-1, 1] stays valid.
    """
    scale = min(bn.variances.values()) / 2
    direction = {}
    for key in gaussian_coordinates(bn):
        value = Fraction(int(rng.integers(-resolution, resolution, endpoint=True)), resolution)
        direction[key] = value * scale if key[0] == "variance" else value
    return direction


def _as_statement(witness):
    if isinstance(witness, SeparationStatement):
        return witness.a, witness.b, frozenset(witness.c)
    a, b, c = witness
    return a, b, frozenset(c)


def scan_line(theta0, direction, grid, witness):
    """
    Exact defect of `witness` at t = -1 + 2i/grid, i = 0..grid, along
    theta0 + t * direction. An odd grid misses t = 0, which is then added
    between the two middle points.
    """
    a, b, c = _as_statement(witness)
    points = [Fraction(-1) + Fraction(2 * i, grid) for i in range(grid + 1)]
    if grid % 2:
        points.insert((grid + 1) // 2, Fraction(0))
    profile = []
    for t in points:
        m = covariance(shift_gaussian(theta0, direction, t))
        profile.append((t, covariance_defect(m, {a}, {b}, c)))
    return profile


def line_scan_experiment(theta0, seed=0, grid=100, directions=1, witness=None, resolution=None):
    """
    Scans random lines through an unfaithful Gaussian network and counts the
    exact zeros of the witness statement's defect on each.

    Raises:
        PreconditionError: theta0 is not Gaussian or is faithful.
    """
    if family_of(theta0) != "gaussian":
        raise PreconditionError("Line scans run through Gaussian parameter space")
    if grid < 1 or directions < 1:
        raise InputError("grid and directions must be at least 1")
    report = check_faithful_gaussian(theta0)
    if witness is None:
        if not report.unfaithful_statements:
            raise PreconditionError("Line scans start from an unfaithful network, this one is faithful")
        witness = report.unfaithful_statements[0][0]
    a, b, c = _as_statement(witness)
    resolution = default_resolution() if resolution is None else int(resolution)
    start = time.perf_counter()
    lines = []
    total = 0
    for j in range(directions):
        attempt = 0
        while True:
            rng = np.random.default_rng(sub_seed(sub_seed(seed, j), attempt))
            direction = random_direction(theta0, rng, resolution)
            if any(direction.values()):
                break
            attempt += 1
            logger.debug(f"Direction {j}: all-zero draw, retrying")
        profile = scan_line(theta0, direction, grid, (a, b, c))
        zeros = [t for t, defect in profile if defect == 0]
        total += len(zeros)
        lines.append(
            {
                "direction": {":".join(key): format_rational(value) for key, value in direction.items()},
                "zeros": len(zeros),
                "zero_at": [format_rational(t) for t in zeros],
                "profile": [[format_rational(t), format_rational(d)] for t, d in profile],
            }
        )
        print_progress_bar(j + 1, directions, prefix="Lines:", suffix="Complete")
    logger.info(f"line-scan: {directions} line(s) of {grid + 1 + grid % 2} points in {time_formatter(time.perf_counter() - start)}")
    return TypicalityReport(
        kind="line-scan",
        config={"grid": grid, "directions": directions, "resolution": resolution},
        seed=seed,
        draws=directions,
        line_zeros=total,
        details={"witness": f"({a}, {b} | {{{', '.join(sorted(c))}}})", "lines": lines},
    )
