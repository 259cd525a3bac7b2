"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Command Handlers Module

One handler per subcommand. Handlers print their result and return an exit
code; errors propagate as FaithlabError subclasses.
"""

import logging

try:
    from .config import (
        DEFAULTS,
        check_value,
        list_config,
        remove_config_key,
        set_config_value,
    )
    from .discrete import DiscreteBn, check_faithful, ci_defect, joint
    from .errors import InputError, PreconditionError
    from .gaussian import check_faithful_gaussian
    from .graph import Admg, d_separated, d_separated_sets, latent_project, m_separated
    from .interpolate import (
        InterpolationPath,
        cell_polynomials,
        interpolate as interpolate_path,
        lambda_star,
        tv_distance,
    )
    from .model_io import dump_graph, dump_model, load_graph, load_model
    from .output import format_report, write_output
    from .typicality import (
        ExperimentConfig,
        denseness_experiment,
        family_of,
        latent_experiment,
        line_scan_experiment,
        measure_zero_experiment,
        openness_witness,
    )
    from .utils import format_rational, parse_name_list, parse_rational, parse_rational_list
except ImportError:
    from config import (
        DEFAULTS,
        check_value,
        list_config,
        remove_config_key,
        set_config_value,
    )
    from discrete import DiscreteBn, check_faithful, ci_defect, joint
    from errors import InputError, PreconditionError
    from gaussian import check_faithful_gaussian
    from graph import Admg, d_separated, d_separated_sets, latent_project, m_separated
    from interpolate import (
        InterpolationPath,
        cell_polynomials,
        interpolate as interpolate_path,
        lambda_star,
        tv_distance,
    )
    from model_io import dump_graph, dump_model, load_graph, load_model
    from output import format_report, write_output
    from typicality import (
        ExperimentConfig,
        denseness_experiment,
        family_of,
        latent_experiment,
        line_scan_experiment,
        measure_zero_experiment,
        openness_witness,
    )
    from utils import format_rational, parse_name_list, parse_rational, parse_rational_list

logger = logging.getLogger(__name__)

EXPERIMENTS = ("measure-zero", "denseness", "openness", "line-scan", "latent")


def dsep(graph, a, b, c=None):
    """
    Prints "separated" or "connected" for a and b given c. Comma separated
    lists query every pair.
    """
    parsed = load_graph(graph)
    g = parsed.graph
    a, b, c = parse_name_list(a), parse_name_list(b), parse_name_list(c)
    if not a or not b:
        raise InputError("--a and --b need at least one vertex each")
    if isinstance(g, Admg):
        separated = all(m_separated(g, x, y, c) for x in a for y in b)
    elif len(a) == 1 and len(b) == 1:
        separated = d_separated(g, a[0], b[0], c)
    else:
        separated = d_separated_sets(g, a, b, c)
    print("separated" if separated else "connected")
    return 0


def project(graph, latent=None, out=None):
    """
    Prints the latent projection of a graph as ADMG JSON.
    """
    parsed = load_graph(graph)
    if isinstance(parsed.graph, Admg):
        raise InputError(f"{graph}: projection needs a DAG, got a graph with bidirected edges")
    hidden = set(parse_name_list(latent)) if latent else set(parsed.latent)
    observed = [v for v in parsed.graph.vertices if v not in hidden]
    admg = latent_project(parsed.graph, observed)
    data = dump_graph(admg)
    data.setdefault("bidirected", [])
    write_output(format_report(data, "json"), out)
    return 0


def check_faithful_model(model, fmt="json", out=None):
    """
    Prints the faithfulness report of a discrete or Gaussian model.
    """
    bn = load_model(model)
    if isinstance(bn, DiscreteBn):
        family, report = "discrete", check_faithful(bn)
    else:
        family, report = "gaussian", check_faithful_gaussian(bn)
    data = {"family": family, **report.to_dict()}
    write_output(format_report(data, fmt), out)
    return 0


def interpolate(model0, model1, lam, a=None, b=None, c=None, fmt="json", out=None):
    """
    Prints the per-vertex mixture at λ with its faithfulness report, and for a
    statement given by --a/--b/--c its cell polynomials and λ*.
    """
    p0, p1 = load_model(model0), load_model(model1)
    if not isinstance(p0, DiscreteBn) or not isinstance(p1, DiscreteBn):
        raise InputError("Interpolation needs two discrete models")
    path = InterpolationPath(p0, p1)
    lam = parse_rational(lam, "--lambda")
    mixed = interpolate_path(path, lam)
    t = joint(mixed)
    data = {
        "lambda": format_rational(lam),
        "model": dump_model(mixed),
        "tv_to_start": format_rational(tv_distance(t, joint(p0))),
        "report": check_faithful(mixed).to_dict(),
    }
    if a or b:
        a, b, c = set(parse_name_list(a)), set(parse_name_list(b)), set(parse_name_list(c))
        data["statement"] = {"a": sorted(a), "b": sorted(b), "c": sorted(c)}
        data["defect"] = format_rational(ci_defect(t, a, b, c))
        data["polynomials"] = [
            {"cell": cell, "q": q.to_strings()}
            for cell, q in cell_polynomials(path, a, b, c)
            if not q.is_zero
        ]
        try:
            data["lambda_star"] = format_rational(lambda_star(path, a, b, c))
        except PreconditionError as e:
            logger.info(f"No λ* for this path: {e}")
            data["lambda_star"] = None
    write_output(format_report(data, fmt), out)
    return 0


def experiment(
    kind,
    graph=None,
    model=None,
    family="discrete",
    samples=100,
    seed=0,
    epsilons=None,
    radii=None,
    radius=None,
    grid=100,
    probes=100,
    directions=1,
    latent=None,
    resolution=None,
    cardinality=2,
    fmt="json",
    out=None,
):
    """
    Runs one typicality experiment and prints its report.
    """
    options = {}
    if epsilons:
        options["epsilons"] = parse_rational_list(epsilons, "--epsilons")
    if radii:
        options["radii"] = parse_rational_list(radii, "--radii")

    def config_for(g, latent_set=frozenset(), model_family=None, cards=None):
        return ExperimentConfig(
            g,
            family=model_family or family,
            samples=samples,
            seed=seed,
            grid=grid,
            latent=latent_set,
            cardinality=cardinality,
            cardinalities=cards,
            resolution=resolution,
            **options,
        )

    if kind in ("measure-zero", "latent"):
        if not graph:
            raise InputError(f"experiment {kind} needs --graph")
        parsed = load_graph(graph)
        if isinstance(parsed.graph, Admg):
            raise InputError(f"{graph}: experiments sample DAG parameters, got bidirected edges")
        if kind == "measure-zero":
            report = measure_zero_experiment(config_for(parsed.graph, cards=parsed.cardinalities))
        else:
            hidden = frozenset(parse_name_list(latent)) if latent else parsed.latent
            report = latent_experiment(config_for(parsed.graph, hidden, cards=parsed.cardinalities))
    else:
        if not model:
            raise InputError(f"experiment {kind} needs --model")
        theta = load_model(model)
        if kind == "denseness":
            report = denseness_experiment(theta, config_for(theta.graph, model_family=family_of(theta)))
        elif kind == "openness":
            r = parse_rational(radius or "1/1000000", "--radius")
            report = openness_witness(theta, probes, r, seed=seed, resolution=resolution)
        elif kind == "line-scan":
            report = line_scan_experiment(
                theta, seed=seed, grid=grid, directions=directions, resolution=resolution
            )
        else:
            raise InputError(f"Unknown experiment {kind!r}, expected one of {list(EXPERIMENTS)}")
    write_output(format_report(report.to_dict(), fmt), out)
    return 0


def configure(values):
    """
    Sets the given configuration values, or lists the configuration when none
    is given. A negative value removes the key.
    """
    changed = False
    for key, value in values.items():
        if value is None:
            continue
        changed = True
        removing = value.startswith("-") if isinstance(value, str) else value < 0
        if removing:
            print(f"Removing {key}, back to {DEFAULTS[key]}")
            remove_config_key(key)
            continue
        check_value(key, value)
        print(f"Setting {key} to {value}")
        set_config_value(key, value)
    if not changed:
        list_config()
    return 0
