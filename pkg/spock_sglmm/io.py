"""Reading maps and data sets, writing fits, studies and derived geometry.

Input formats
-------------
* Centroids: CSV with header ``id,x,y``.
* Adjacency: one edge per line, ``id_a id_b`` (whitespace or comma
  separated). A first line ``i j`` declares 0-based indices into the
  centroid order instead of ids; a first line ``id_a id_b`` is an optional
  header. Blank lines and lines starting with ``#`` are skipped.
* Data sets: CSV with header ``id,y,<covariates...>``.

Areas are put into canonical order by sorting their ids, numerically if
all ids are integers.

Every output embeds the package version, the seed and the hash of the
configuration it was produced with.
"""

import json
import logging
import os

import numpy as np
import pandas as pd
import scipy.sparse

from spock_sglmm.exceptions import (
    DimensionMismatch,
    DuplicateCentroid,
    IoError,
    LengthMismatch,
    NegativeCount,
    ParseError,
    UnknownAreaId,
)
from spock_sglmm.geometry import CentroidSet, DesignMatrix
from spock_sglmm.graph import NeighborhoodGraph
from spock_sglmm.maps import AreaMap, lattice_map  # noqa: F401
from spock_sglmm.models import posterior_summary, spatial_effect_summary
from spock_sglmm.params import config_hash
from spock_sglmm.version import version

logger = logging.getLogger(__name__)

INDEX_HEADER = ("i", "j")
ID_HEADER = ("id_a", "id_b")


def _canonical_order(ids):
    """Indices that sort *ids*, numerically if they are all integers."""
    try:
        keys = [int(i) for i in ids]
    except ValueError:
        keys = list(ids)
    return sorted(range(len(ids)), key=lambda k: keys[k])


def _read_table(path, required, dtype=None):
    try:
        frame = pd.read_csv(path, dtype=dtype, skipinitialspace=True)
    except FileNotFoundError as e:
        raise IoError("Cannot read {}: {}".format(path, e))
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(str(e).strip(), path=path)
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ParseError(
            "Missing column(s) {} in header {}".format(
                ", ".join(missing), list(frame.columns)
            ),
            path=path,
            line=1,
        )
    return frame


def _read_csv(path, required, duplicate_error=None):
    frame = _read_table(path, ("id",) + tuple(required), dtype={"id": str})
    if frame["id"].isnull().any():
        raise ParseError(
            "Missing area id", path=path, line=int(np.argmax(frame["id"].isnull())) + 2
        )
    duplicated = frame["id"].duplicated()
    if duplicated.any():
        row = int(np.argmax(duplicated.values))
        msg = "Duplicate area id {!r}".format(frame["id"].iloc[row])
        if duplicate_error is not None:
            raise duplicate_error("{}:{}: {}".format(path, row + 2, msg))
        raise ParseError(msg, path=path, line=row + 2)
    return frame


def _numeric(frame, column, path):
    values = pd.to_numeric(frame[column], errors="coerce").values.astype(float)
    bad = ~np.isfinite(values)
    if np.any(bad):
        row = int(np.argmax(bad))
        raise ParseError(
            "Invalid value {!r} in column {!r}".format(frame[column].iloc[row], column),
            path=path,
            line=row + 2,
        )
    return values


def load_centroids(path):
    """Read a centroid CSV with the columns ``id,x,y`` into canonical order."""
    frame = _read_csv(path, ("x", "y"), duplicate_error=DuplicateCentroid)
    coords = np.column_stack((_numeric(frame, "x", path), _numeric(frame, "y", path)))
    ids = [str(i).strip() for i in frame["id"]]
    order = _canonical_order(ids)
    return CentroidSet(coords[order], [ids[k] for k in order])


def _edge_lines(path):
    try:
        with open(path, "r") as f:
            lines = f.readlines()
    except OSError as e:
        raise IoError("Cannot read {}: {}".format(path, e))
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if len(line) == 0 or line.startswith("#"):
            continue
        yield lineno, tuple(t for t in line.replace(",", " ").split())


def read_edges(path, area_ids):
    """Read an edge list into a graph on the areas *area_ids*."""
    index = {area_id: k for k, area_id in enumerate(area_ids)}
    n = len(area_ids)
    by_index = False
    edges = []
    first = True
    for lineno, tokens in _edge_lines(path):
        if first:
            first = False
            if tokens == INDEX_HEADER:
                by_index = True
                continue
            if tokens == ID_HEADER:
                continue
        if len(tokens) != 2:
            raise ParseError(
                "Expected two areas per line, got {}".format(len(tokens)),
                path=path,
                line=lineno,
            )
        if by_index:
            try:
                pair = tuple(int(t) for t in tokens)
            except ValueError:
                raise ParseError(
                    "Expected integer indices, got {!r}".format(" ".join(tokens)),
                    path=path,
                    line=lineno,
                )
            for k in pair:
                if not 0 <= k < n:
                    raise ParseError(
                        "Area index {} outside of [0, {})".format(k, n),
                        path=path,
                        line=lineno,
                    )
        else:
            for t in tokens:
                if t not in index:
                    raise UnknownAreaId(t, source="{}:{}".format(path, lineno))
            pair = (index[tokens[0]], index[tokens[1]])
        if pair[0] == pair[1]:
            raise ParseError(
                "Area {!r} is its own neighbor".format(tokens[0]),
                path=path,
                line=lineno,
            )
        edges.append(pair)
    return NeighborhoodGraph(n, edges)


def load_map(centroid_path, adjacency_path, allow_islands=False):
    """Read centroids and adjacency into an `.AreaMap`.

    Parameters
    ----------
    centroid_path : str
        CSV with the columns ``id,x,y``.
    adjacency_path : str
        Edge list by area id (or by 0-based index in canonical order after an
        ``i j`` header line).
    allow_islands : bool, optional
        Accept areas without neighbors.
    """
    centroids = load_centroids(centroid_path)
    graph = read_edges(adjacency_path, centroids.area_ids)
    area_map = AreaMap(centroids, graph, allow_islands=allow_islands)
    logger.info(
        "Loaded map with %d areas and %d edges from %s",
        area_map.n,
        graph.n_edges,
        centroid_path,
    )
    return area_map


class Dataset(object):
    """Response and design of a regression on the areas of a map.

    Parameters
    ----------
    y : (n,) array_like
        Response. Counts for the Poisson family.
    X : DesignMatrix
        Design matrix.
    family : {"gaussian", "poisson"}
        Response distribution.
    area_ids : sequence of str
        Areas in the row order of *y* and *X*.
    expected : (n,) array_like, optional
        Expected counts of a Poisson response; the offset is their log.
    """

    def __init__(self, y, X, family, area_ids, expected=None):
        y = np.array(y, dtype=float)
        if y.ndim != 1 or len(y) != X.n or len(area_ids) != X.n:
            raise LengthMismatch(
                "Got {} responses and {} area ids for {} design rows.".format(
                    y.size, len(area_ids), X.n
                )
            )
        if family == "poisson" and (np.any(y < 0) or np.any(y != np.round(y))):
            row = int(np.argmax((y < 0) | (y != np.round(y))))
            raise NegativeCount(
                "Poisson response of area {!r} is {}, expected a non-negative "
                "integer.".format(area_ids[row], y[row])
            )
        if expected is not None:
            expected = np.array(expected, dtype=float)
            if expected.shape != y.shape:
                raise LengthMismatch("Need one expected count per area.")
            if np.any(expected <= 0):
                raise NegativeCount("Expected counts must be positive.")
        self.y = y
        self.X = X
        self.family = family
        self.area_ids = tuple(area_ids)
        self.expected = expected

    @property
    def n(self):
        return len(self.y)

    @property
    def offset(self):
        return None if self.expected is None else np.log(self.expected)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        same_expected = (self.expected is None and other.expected is None) or (
            self.expected is not None
            and other.expected is not None
            and np.array_equal(self.expected, other.expected)
        )
        return (
            self.family == other.family
            and self.area_ids == other.area_ids
            and self.X.names == other.X.names
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.X.values, other.X.values)
            and same_expected
        )

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    def __repr__(self):
        return "Dataset(n={}, family={!r}, X={!r})".format(
            self.n, self.family, self.X.names
        )


def load_dataset(
    path,
    family="gaussian",
    area_map=None,
    intercept=True,
    expected_column=None,
    standardize=False,
):
    """Read a data set CSV with the columns ``id,y,<covariates...>``.

    Parameters
    ----------
    path : str
        CSV file.
    family : {"gaussian", "poisson"}, optional
        Response distribution.
    area_map : AreaMap, optional
        Rows are put into the area order of the map, which must have the
        same areas. Without a map, rows are put into canonical order.
    intercept : bool, optional
        Prepend an intercept column to the covariates.
    expected_column : str, optional
        Column with the expected counts of a Poisson response. It is not
        used as a covariate.
    standardize : bool, optional
        Center the covariates and scale them to unit standard deviation.

    Returns
    -------
    Dataset
    """
    required = ("y",) if expected_column is None else ("y", expected_column)
    frame = _read_csv(path, required)
    ids = [str(i).strip() for i in frame["id"]]
    y = _numeric(frame, "y", path)
    expected = None
    if expected_column is not None:
        expected = _numeric(frame, expected_column, path)
    names = [c for c in frame.columns if c not in ("id", "y", expected_column)]
    covariates = np.column_stack(
        [_numeric(frame, c, path) for c in names] or [np.zeros((len(frame), 0))]
    )

    if area_map is None:
        order = _canonical_order(ids)
    else:
        rows = {area_id: k for k, area_id in enumerate(ids)}
        for k, area_id in enumerate(ids):
            if area_map.index_of(area_id) is None:
                raise UnknownAreaId(area_id, source="{}:{}".format(path, k + 2))
        missing = [a for a in area_map.area_ids if a not in rows]
        if missing:
            raise LengthMismatch(
                "{} area(s) of the map have no data, e.g. {!r}.".format(
                    len(missing), missing[0]
                )
            )
        order = [rows[a] for a in area_map.area_ids]

    X = DesignMatrix.from_covariates(
        covariates[order], names=names, intercept=intercept
    )
    if standardize:
        X = X.standardized()
    return Dataset(
        y[order],
        X,
        family,
        [ids[k] for k in order],
        expected=None if expected is None else expected[order],
    )


def write_dataset(dataset, path, expected_column="expected"):
    """Write a data set in the format read by `.load_dataset`.

    The intercept column is not written.
    """
    frame = pd.DataFrame({"id": list(dataset.area_ids), "y": dataset.y})
    for name, keep, column in zip(
        dataset.X.names, dataset.X.covariate_mask, dataset.X.values.T
    ):
        if keep:
            frame[name] = column
    if dataset.expected is not None:
        frame[expected_column] = dataset.expected
    _write_frame(frame, path)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def _provenance(seed, config):
    return {"version": version, "seed": seed, "config_hash": config_hash(config)}


def _write_json(data, path):
    try:
        with open(path, "w") as f:
            json.dump(_jsonable(data), f, indent=2, sort_keys=True, allow_nan=False)
            f.write("\n")
    except OSError as e:
        raise IoError("Cannot write {}: {}".format(path, e))
    logger.debug("Wrote %s", path)


def _read_json(path):
    try:
        with open(path, "r") as f:
            return json.load(f)
    except OSError as e:
        raise IoError("Cannot read {}: {}".format(path, e))
    except ValueError as e:
        raise ParseError(str(e), path=path)


def _write_frame(frame, path):
    try:
        frame.to_csv(path, index=False, float_format=None)
    except OSError as e:
        raise IoError("Cannot write {}: {}".format(path, e))
    logger.debug("Wrote %s (%d rows)", path, len(frame))


def fit_record(fit):
    """JSON-compatible description of a fit: summaries, settings and provenance.

    Raises
    ------
    InsufficientDraws
        If the fit has too few draws to be summarized.
    """
    spec = fit.spec.to_dict()
    record = _provenance(fit.spec.mcmc.seed, spec)
    record.update(
        {
            "method": fit.method,
            "family": fit.family,
            "spec": spec,
            "n_draws": fit.n_draws,
            "info": fit.info,
            "summary": posterior_summary(fit),
        }
    )
    effect = spatial_effect_summary(fit)
    if effect is not None:
        effect = {k: list(v) for k, v in effect.items()}
        if fit.area_ids is not None:
            effect["area_ids"] = list(fit.area_ids)
        record["spatial_effect"] = effect
    return record


def write_fit(fit, path, draws_path=None, timing_path=None):
    """Write the summary of *fit* as JSON and optionally its draws as CSV.

    The summary holds no wall time, so equal seeds give equal files.

    Parameters
    ----------
    fit : ModelFit
        The fit.
    path : str
        JSON output file (``fit.json``).
    draws_path : str, optional
        CSV output file (``draws.csv``) with one row per retained draw.
    timing_path : str, optional
        JSON output file (``timing.json``) with the wall time of the fit.
    """
    record = fit_record(fit)
    _write_json(record, path)
    if draws_path is not None:
        frame = pd.DataFrame(fit.scalar_draws())
        if fit.theta_draws is not None:
            m = fit.theta_draws.shape[1]
            theta = pd.DataFrame(
                fit.theta_draws, columns=["theta[{}]".format(j) for j in range(m)]
            )
            frame = pd.concat((frame, theta), axis=1)
        _write_frame(frame, draws_path)
    if timing_path is not None:
        timing = _provenance(fit.spec.mcmc.seed, fit.spec.to_dict())
        timing.update({"method": fit.method, "wall_time": fit.wall_time})
        _write_json(timing, timing_path)
    return record


def read_fit(path):
    """Read a fit summary written by `.write_fit` as a dict."""
    record = _read_json(path)
    for key in ("version", "config_hash", "summary"):
        if key not in record:
            raise ParseError("Missing entry {!r}".format(key), path=path)
    return record


def with_provenance(record, seed=None, config=None):
    """Copy of the dict *record* with version, seed and configuration hash."""
    data = _provenance(seed, {} if config is None else config)
    data.update(record)
    return _jsonable(data)


def write_record(record, path, seed=None, config=None):
    """Write the dict *record* as JSON together with its provenance."""
    data = with_provenance(record, seed=seed, config=config)
    _write_json(data, path)
    return data


STUDY_KEYS = ("scenario", "models", "mcmc", "spec")


def read_study_config(path):
    """Read a study configuration file.

    The JSON object may hold the entries ``scenario`` (a `.ScenarioConfig`
    dict), ``models`` (list of methods), ``mcmc`` (a `.McmcConfig` dict)
    and ``spec`` (a `.ModelSpec` template dict).
    """
    config = _read_json(path)
    if not isinstance(config, dict):
        raise ParseError("Expected a JSON object", path=path, line=1)
    unknown = sorted(set(config) - set(STUDY_KEYS))
    if unknown:
        raise ParseError(
            "Unknown entries {}; expected some of {}".format(unknown, list(STUDY_KEYS)),
            path=path,
        )
    return config


def write_study(summary, directory):
    """Write ``summary.csv``, ``ratios.csv``, ``timing.csv`` and ``study.json``.

    Returns
    -------
    dict
        Paths of the written files.
    """
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise IoError("Cannot create {}: {}".format(directory, e))
    paths = {
        name: os.path.join(directory, name + ext)
        for name, ext in (
            ("summary", ".csv"),
            ("ratios", ".csv"),
            ("timing", ".csv"),
            ("study", ".json"),
        )
    }
    _write_frame(summary.summary_frame(), paths["summary"])
    _write_frame(summary.ratio_frame(), paths["ratios"])
    _write_frame(summary.timing_frame(), paths["timing"])

    config = {
        "scenario": summary.cfg.to_dict(),
        "models": list(summary.models),
        "mcmc": None if summary.mcmc is None else summary.mcmc.to_dict(),
    }
    record = _provenance(summary.cfg.seed, config)
    record.update(config)
    record["n_replicates"] = summary.n_replicates
    record["failures"] = {
        str(r.replicate_id): r.failures for r in summary.results if r.failures
    }
    _write_json(record, paths["study"])
    return paths


def write_graph(g, path, area_ids=None, by_index=False):
    """Write *g* as JSON (``.json`` suffix) or as an edge list.

    Edge lists hold one pair per line, either area ids under an
    ``id_a id_b`` header or, with *by_index*, 0-based indices ``i < j``
    under an ``i j`` header.
    """
    area_ids = [str(i) for i in range(g.n)] if area_ids is None else list(area_ids)
    if len(area_ids) != g.n:
        raise DimensionMismatch(
            "Got {} area ids for a graph on {} areas.".format(len(area_ids), g.n)
        )
    if path.endswith(".json"):
        _write_json({"n": g.n, "area_ids": area_ids, "edges": g.edges}, path)
        return
    try:
        with open(path, "w") as f:
            f.write(" ".join(INDEX_HEADER if by_index else ID_HEADER) + "\n")
            for i, j in g.edges:
                if by_index:
                    f.write("{} {}\n".format(i, j))
                else:
                    f.write("{} {}\n".format(area_ids[i], area_ids[j]))
    except OSError as e:
        raise IoError("Cannot write {}: {}".format(path, e))


def read_graph(path, area_ids=None):
    """Read a graph written by `.write_graph`.

    Edge lists need the *area_ids* of the map.
    """
    if path.endswith(".json"):
        record = _read_json(path)
        try:
            return NeighborhoodGraph(record["n"], record["edges"])
        except KeyError as e:
            raise ParseError("Missing entry {}".format(e), path=path)
    if area_ids is None:
        raise DimensionMismatch("Reading an edge list needs the area ids.")
    return read_edges(path, area_ids)


def write_centroids(s, path, original=None):
    """Write centroids as CSV ``id,x,y``.

    With *original* centroids, their coordinates are added as
    ``x_original,y_original`` for plotting.
    """
    frame = pd.DataFrame({"id": list(s.area_ids), "x": s.s1, "y": s.s2})
    if original is not None:
        if original.n != s.n:
            raise DimensionMismatch("Centroid sets differ in size.")
        frame["x_original"] = original.s1
        frame["y_original"] = original.s2
    _write_frame(frame, path)


def write_segments(g, s, path):
    """Write the edges of *g* as line segments between the centroids *s*."""
    i, j = g.edges[:, 0], g.edges[:, 1]
    ids = np.asarray(s.area_ids, dtype=object)
    frame = pd.DataFrame(
        {
            "id_a": ids[i],
            "id_b": ids[j],
            "x_a": s.s1[i],
            "y_a": s.s2[i],
            "x_b": s.s1[j],
            "y_b": s.s2[j],
        }
    )
    _write_frame(frame, path)


def write_precision(Q, path):
    """Write the lower triangle of a precision matrix as ``row,col,value``."""
    rows, cols, values = Q.lower_triplets()
    frame = pd.DataFrame({"row": rows, "col": cols, "value": values})
    _write_frame(frame, path)


def read_precision(path, n=None):
    """Read a precision matrix written by `.write_precision`.

    Returns
    -------
    scipy.sparse.csc_matrix
        The full symmetric matrix of size *n* (default: largest index + 1).
    """
    frame = _read_table(path, ("row", "col", "value"))
    rows = _numeric(frame, "row", path).astype(np.int64)
    cols = _numeric(frame, "col", path).astype(np.int64)
    values = _numeric(frame, "value", path)
    if np.any(cols > rows):
        row = int(np.argmax(cols > rows))
        raise ParseError("Entry above the diagonal", path=path, line=row + 2)
    if n is None:
        n = int(max(rows.max(initial=-1), cols.max(initial=-1)) + 1)
    lower = scipy.sparse.coo_matrix((values, (rows, cols)), shape=(n, n))
    strict = scipy.sparse.tril(lower, k=-1)
    return (lower + strict.T).tocsc()

