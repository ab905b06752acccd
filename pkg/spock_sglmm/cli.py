"""Command line interface: ``spock-sglmm {diagnose,project,fit,simulate}``.

Exit codes
----------
0
    Success.
2
    Invalid input or parameters.
3
    Numerical failure.
4
    Input or output error.
"""

import argparse
import json
import logging
import os
import sys

import pandas as pd
from nengo.exceptions import ValidationError

from spock_sglmm import io
from spock_sglmm.diagnostics import diagnose
from spock_sglmm.exceptions import InvalidParameter, IoError, SpockException
from spock_sglmm.geometry import build_projector, project_centroids
from spock_sglmm.graph import (
    connected_components,
    edge_direction_alignment,
    score_reconstruction,
)
from spock_sglmm.models import (
    McmcConfig,
    ModelSpec,
    PriorConfig,
    fit_model,
    posterior_summary,
    spock_graph,
)
from spock_sglmm.models.config import METHODS
from spock_sglmm.precisions import make_family
from spock_sglmm.simulation import ScenarioConfig, run_study
from spock_sglmm.version import version

logger = logging.getLogger(__name__)

INPUT_ERROR = 2

#: Reference direction of the edge alignment reported by ``project``.
ALIGNMENT_DIRECTION = (1.0, 1.0)


def _makedirs(directory):
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise IoError("Cannot create {}: {}".format(directory, e))


def _load_inputs(args, family="gaussian"):
    area_map = io.load_map(args.map, args.adjacency, allow_islands=args.allow_islands)
    dataset = io.load_dataset(
        args.data,
        family=family,
        area_map=area_map,
        intercept=not args.no_intercept,
        expected_column=getattr(args, "offset", None),
        standardize=args.standardize,
    )
    return area_map, dataset


def _input_config(args, **extra):
    config = {
        "map": args.map,
        "adjacency": args.adjacency,
        "data": args.data,
        "intercept": not args.no_intercept,
        "allow_islands": args.allow_islands,
        "standardize": args.standardize,
    }
    config.update(extra)
    return config


def cmd_diagnose(args):
    """Test the covariates for association with the centroids."""
    area_map, dataset = _load_inputs(args)
    report = diagnose(
        area_map.centroids,
        dataset.X,
        n_perm=args.n_perm,
        seed=args.seed,
        n_jobs=args.workers,
    )
    record = report.to_dict()
    record.update(
        {
            "alpha": args.alpha,
            "correction_recommended": report.correction_recommended(args.alpha),
            "covariates": list(dataset.X.covariate_names),
        }
    )
    config = _input_config(args, n_perm=args.n_perm, alpha=args.alpha)
    if args.out is None:
        data = io.with_provenance(record, seed=args.seed, config=config)
        print(json.dumps(data, indent=2, sort_keys=True, allow_nan=False))
    else:
        io.write_record(record, args.out, seed=args.seed, config=config)
    print(report.verdict(args.alpha))
    return 0


def cmd_project(args):
    """Project the centroids away from the covariates and rebuild the graph."""
    area_map, dataset = _load_inputs(args)
    s = area_map.centroids
    g = area_map.adjacency
    s_star = project_centroids(s, build_projector(dataset.X))
    rebuilt = spock_graph(
        s, dataset.X, g, method=args.reconstruction, k=args.k_override
    )
    score = score_reconstruction(g, rebuilt)
    n_components, _ = connected_components(rebuilt)

    _makedirs(args.out)
    io.write_centroids(
        s_star, os.path.join(args.out, "centroids_projected.csv"), original=s
    )
    io.write_graph(
        rebuilt, os.path.join(args.out, "adjacency_new.txt"), s.area_ids, by_index=True
    )
    io.write_graph(rebuilt, os.path.join(args.out, "adjacency_new_ids.txt"), s.area_ids)
    io.write_segments(rebuilt, s, os.path.join(args.out, "segments.csv"))

    record = score.to_dict()
    record.update(
        {
            "reconstruction": args.reconstruction,
            "k_override": args.k_override,
            "n_edges_original": int(g.n_edges),
            "n_edges_new": int(rebuilt.n_edges),
            "n_components": n_components,
            "alignment_direction": list(ALIGNMENT_DIRECTION),
            "alignment": edge_direction_alignment(rebuilt, s, ALIGNMENT_DIRECTION),
        }
    )
    config = _input_config(
        args, reconstruction=args.reconstruction, k_override=args.k_override
    )
    io.write_record(record, os.path.join(args.out, "score.json"), config=config)
    print(
        "sensitivity = {:.4f}, recall = {:.4f}, {} edges (original {})".format(
            score.sensitivity, score.recall, rebuilt.n_edges, g.n_edges
        )
    )
    return 0


def _spatial_family(args):
    family = args.spatial_family.lower().replace("-", "_")
    if args.rho is not None and family != "proper_car":
        raise InvalidParameter("--rho needs --spatial-family proper_car.", attr="rho")
    if args.lam is not None and family != "leroux":
        raise InvalidParameter("--lambda needs --spatial-family leroux.", attr="lam")
    return make_family(family, args.rho if args.lam is None else args.lam)


def _priors(args):
    given = {
        "beta_precision": args.beta_precision,
        "tau_shape": args.tau_shape,
        "tau_rate": args.tau_rate,
    }
    return PriorConfig(**{k: v for k, v in given.items() if v is not None})


def model_spec(args):
    """The `.ModelSpec` described by the ``fit`` arguments."""
    return ModelSpec(
        family=args.family,
        method=args.method,
        spatial_family=_spatial_family(args),
        h=args.h,
        priors=_priors(args),
        mcmc=McmcConfig(
            n_iter=args.iters, n_burn=args.burn, thin=args.thin, seed=args.seed
        ),
        learn_spatial_parameter=args.learn_spatial_parameter,
        reconstruction=args.reconstruction,
        k_override=args.k_override,
    )


def cmd_fit(args):
    """Fit one model and write its summary and draws."""
    spec = model_spec(args)
    area_map, dataset = _load_inputs(args, family=spec.family)
    fit = fit_model(dataset.y, dataset.X, area_map, spec, offset=dataset.offset)

    _makedirs(args.out)
    io.write_fit(
        fit,
        os.path.join(args.out, "fit.json"),
        draws_path=os.path.join(args.out, "draws.csv"),
        timing_path=os.path.join(args.out, "timing.json"),
    )
    table = pd.DataFrame(posterior_summary(fit)).T[["mean", "q025", "q975"]]
    print(table.to_string())
    return 0


def cmd_simulate(args):
    """Run a simulation study described by a JSON configuration file."""
    config = io.read_study_config(args.config)
    scenario = dict(config.get("scenario", {}), seed=args.seed)
    summary = run_study(
        ScenarioConfig.from_dict(scenario),
        models=config.get("models", METHODS),
        mcmc=config.get("mcmc"),
        spec=config.get("spec"),
        n_jobs=args.workers,
    )
    paths = io.write_study(summary, args.out)
    print(summary.summary_frame().to_string(index=False))
    logger.info("Wrote %s", ", ".join(sorted(paths.values())))
    return 0


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("invalid seed {!r}".format(text))
    if value < 0:
        raise argparse.ArgumentTypeError(
            "seed must be non-negative, got {}".format(value)
        )
    return value


def _add_inputs(parser):
    parser.add_argument(
        "--map", required=True, help="centroid CSV with the columns id,x,y"
    )
    parser.add_argument(
        "--adjacency", required=True, help="edge list of neighboring area ids"
    )
    parser.add_argument(
        "--data", required=True, help="CSV with the columns id,y,<covariates>"
    )
    parser.add_argument(
        "--allow-islands",
        action="store_true",
        help="accept areas without neighbors",
    )
    parser.add_argument(
        "--no-intercept",
        action="store_true",
        help="do not add an intercept column to the covariates",
    )
    parser.add_argument(
        "--standardize",
        action="store_true",
        help="center the covariates and scale them to unit standard deviation",
    )


def _add_reconstruction(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument(
        "--knn",
        dest="reconstruction",
        action="store_const",
        const="knn",
        help="rebuild the graph with k nearest neighbors (default)",
    )
    group.add_argument(
        "--delaunay",
        dest="reconstruction",
        action="store_const",
        const="delaunay",
        help="rebuild the graph by Delaunay triangulation",
    )
    parser.set_defaults(reconstruction="knn")
    parser.add_argument(
        "--k-override",
        type=int,
        default=None,
        help="neighbor count of every area instead of the original degrees",
    )


def _add_workers(parser):
    parser.add_argument(
        "--workers",
        type=int,
        default=1,
        help="number of worker processes (-1 for all cores)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spock-sglmm",
        description="Spatial confounding diagnostics and spatial GLMMs "
        "on areal data.",
    )
    parser.add_argument("--version", action="version", version=version)
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="log progress (-v) or debugging details (-vv)",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    p = subparsers.add_parser(
        "diagnose", help="test whether the covariates are spatially confounded"
    )
    _add_inputs(p)
    p.add_argument("--n-perm", type=int, default=999, help="number of permutations")
    p.add_argument("--seed", type=_seed, default=0, help="seed of the permutations")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p.add_argument("--out", default=None, help="JSON report (default: stdout)")
    _add_workers(p)
    p.set_defaults(func=cmd_diagnose)

    p = subparsers.add_parser(
        "project", help="project centroids and rebuild the neighborhood graph"
    )
    _add_inputs(p)
    _add_reconstruction(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_project)

    p = subparsers.add_parser("fit", help="fit a (spatial) regression model")
    _add_inputs(p)
    p.add_argument("--method", choices=METHODS, default="spock")
    p.add_argument("--family", choices=("gaussian", "poisson"), default="gaussian")
    p.add_argument(
        "--spatial-family",
        choices=("icar", "proper_car", "proper-car", "leroux"),
        default="icar",
    )
    p.add_argument("--rho", type=float, default=None, help="proper CAR parameter")
    p.add_argument(
        "--lambda", dest="lam", type=float, default=None, help="Leroux parameter"
    )
    p.add_argument(
        "--learn-spatial-parameter",
        action="store_true",
        help="sample rho or lambda instead of holding it fixed",
    )
    p.add_argument("--h", type=int, default=None, help="Moran basis rank (hh only)")
    p.add_argument("--iters", type=int, default=10000, help="MCMC iterations")
    p.add_argument("--burn", type=int, default=2000, help="burn-in iterations")
    p.add_argument("--thin", type=int, default=1, help="thinning interval")
    p.add_argument(
        "--beta-precision",
        type=float,
        default=None,
        help="precision of the normal prior of the coefficients (default: 1e-6)",
    )
    p.add_argument(
        "--tau-shape",
        type=float,
        default=None,
        help="shape of the gamma priors of the precisions (default: 0.5)",
    )
    p.add_argument(
        "--tau-rate",
        type=float,
        default=None,
        help="rate of the gamma priors of the precisions (default: 0.0005)",
    )
    p.add_argument("--seed", type=_seed, required=True, help="seed of the chain")
    p.add_argument(
        "--offset",
        default=None,
        metavar="COLUMN",
        help="data column with the expected counts of a Poisson response",
    )
    _add_reconstruction(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fit)

    p = subparsers.add_parser("simulate", help="run a simulation study")
    p.add_argument("config", help="JSON file with scenario, models, mcmc and spec")
    p.add_argument("--seed", type=_seed, required=True, help="seed of the study")
    p.add_argument("--out", required=True, help="output directory")
    _add_workers(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    """Run the command line interface and return the exit code."""
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except SpockException as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print("error: {}".format(e), file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print("error: {}".format(e), file=sys.stderr)
        return INPUT_ERROR
