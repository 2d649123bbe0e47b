"""Comparison harness: order sweeps across algorithms, reports, sigma CSV.

A comparison run fills one cell per (algorithm, order) pair with the
additive, multiplicative, and relative error H2 norms, the iteration count,
and the reduced-model stability flags.  Cell failures are recorded as typed
entries and do not stop the run.  Reports are deterministic for a fixed
seed: cells are evaluated with per-cell seeds derived from the base seed,
and wall-clock timings are excluded from the emitted file unless requested.
"""

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import algorithms
from .exceptions import RelmorError
from .relerr import (
    build_delta_mul,
    compute_gramians,
    h2_norm_delta_mul,
    weighted_error_h2,
)
from .sstools import (
    StateSpace,
    frequency_response,
    h2_norm,
    regularize_d,
    relative_error_weight,
    series,
    subtract,
)

__all__ = [
    "ALGORITHM_ORDER",
    "CellResult",
    "ReductionReport",
    "run_comparison",
    "report_to_text",
    "emit_report",
    "emit_sigma_csv",
    "default_frequency_grid",
]

SCHEMA_VERSION = "relmor-report-v1"

# canonical column order for tables
ALGORITHM_ORDER = ("bt", "bst", "tsia", "irhmora", "fwh2")

# mutual agreement required between the two evaluation paths of the
# multiplicative error norm; a worse mismatch fails the whole run
_DUAL_PATH_RTOL = 1e-6


def default_frequency_grid(points=400, lo=1e-2, hi=1e4):
    """Default sigma-plot grid: log-spaced points over [1e-2, 1e4] rad/s."""
    return np.logspace(np.log10(lo), np.log10(hi), points)


@dataclass
class CellResult:
    algorithm: str
    order: int
    seed: int
    delta_add_h2: float = None
    delta_mul_h2: float = None
    delta_rel_h2: float = None
    iterations: int = 0
    converged: bool = True
    rom_stable: bool = None
    rom_minimum_phase: bool = None
    seconds: float = 0.0
    failure: str = None

    def as_dict(self, include_timings=False):
        d = {
            "algorithm": self.algorithm,
            "order": self.order,
            "seed": self.seed,
            "delta_add_h2": self.delta_add_h2,
            "delta_mul_h2": self.delta_mul_h2,
            "delta_rel_h2": self.delta_rel_h2,
            "iterations": self.iterations,
            "converged": self.converged,
            "rom_stable": self.rom_stable,
            "rom_minimum_phase": self.rom_minimum_phase,
            "failure": self.failure,
        }
        if include_timings:
            d["seconds"] = self.seconds
        return d


@dataclass
class ReductionReport:
    model_name: str
    n: int
    m: int
    seed: int
    epsilon: float
    max_iterations: int
    convergence_tol: float
    cells: list = field(default_factory=list)

    @property
    def failures(self):
        return [c for c in self.cells if c.failure is not None]


def _cell_seed(base_seed, algorithm, order):
    """Stable per-cell seed; identical base seed gives identical cells."""
    h = 1469598103934665603
    for token in (str(base_seed), algorithm, str(order)):
        for ch in token.encode():
            h = ((h ^ ch) * 1099511628211) % (1 << 63)
    return h


def _run_algorithm(full, algorithm, order, cfg, seed):
    if algorithm == "bt":
        return algorithms.balanced_truncation(full, order), None
    if algorithm == "bst":
        return algorithms.balanced_stochastic_truncation(full, order, cfg), None
    run_cfg = algorithms.ReductionConfig(
        order=order,
        max_iterations=cfg.max_iterations,
        epsilon=cfg.epsilon,
        convergence_tol=cfg.convergence_tol,
        initial_rom=seed,
        init=cfg.init,
    )
    if algorithm == "tsia":
        return algorithms.tsia(full, run_cfg)
    if algorithm == "irhmora":
        return algorithms.irhmora(full, run_cfg)
    if algorithm == "fwh2":
        return algorithms.relative_error_h2_weighted(full, run_cfg)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _delta_mul_cross_checked(work, rom_reg):
    """Multiplicative error norm with the dual-path consistency gate.

    Minimum-phase reduced models are evaluated both through the block
    gramian trace form and the assembled error realization; a relative
    mismatch above 1e-6 aborts the run.  Non-minimum-phase reduced models
    use the conjugate-inverse-factor route, cross-checked against the dual
    observability-form evaluation of the same cascade.
    """
    if rom_reg.is_stable and rom_reg.is_minimum_phase:
        trace_form = h2_norm_delta_mul(compute_gramians(work, rom_reg), work, rom_reg)
        assembled = h2_norm(build_delta_mul(work, rom_reg))
    else:
        cascade = series(relative_error_weight(rom_reg), subtract(work, rom_reg))
        trace_form = h2_norm(cascade, method="controllability")
        assembled = h2_norm(cascade, method="observability")
    scale = max(trace_form, assembled, 1e-300)
    if abs(trace_form - assembled) > _DUAL_PATH_RTOL * scale:
        raise RelmorError(
            f"multiplicative error norm paths disagree: {trace_form:.9e} vs "
            f"{assembled:.9e} (relative {abs(trace_form - assembled) / scale:.3e})"
        )
    return trace_form


def _evaluate_cell(full, work, rel_weight, algorithm, order, cfg, base_seed):
    seed = _cell_seed(base_seed, algorithm, order)
    cell = CellResult(algorithm=algorithm, order=order, seed=seed)
    t0 = time.perf_counter()
    try:
        candidate, trace = _run_algorithm(full, algorithm, order, cfg, seed)
        rom = candidate.rom
        rom_reg = candidate.info.get("regularized_rom")
        if rom_reg is None:
            rom_reg = StateSpace(rom.A, rom.B, rom.C, work.D)
        cell.iterations = trace.iterations if trace is not None else 0
        cell.converged = trace.converged if trace is not None else True
        cell.rom_stable = bool(rom.is_stable)
        cell.rom_minimum_phase = bool(rom_reg.is_minimum_phase)
        if rom.is_stable:
            cell.delta_add_h2 = h2_norm(subtract(_strictly_proper(full), _strictly_proper(rom)))
            cell.delta_mul_h2 = _delta_mul_cross_checked(work, rom_reg)
            cell.delta_rel_h2 = weighted_error_h2(rel_weight, work, rom_reg)
        else:
            cell.failure = "unstable reduced model: error norms undefined"
    except (RelmorError, np.linalg.LinAlgError, ValueError) as exc:
        cell.failure = f"{type(exc).__name__}: {exc}"
    cell.seconds = time.perf_counter() - t0
    return cell


def _strictly_proper(sys):
    return StateSpace(sys.A, sys.B, sys.C, np.zeros((sys.m, sys.m)))


def run_comparison(model, algorithms_list, orders, cfg, model_name="model", seed=0):
    """Reduce ``model`` with each algorithm at each order and collect norms.

    Parameters
    ----------
    model : StateSpace
    algorithms_list : sequence of str
        Subset of :data:`ALGORITHM_ORDER`.
    orders : sequence of int
        Reduced orders, each ``< model.n``.
    cfg : algorithms.ReductionConfig
        Template configuration; ``cfg.order`` is overridden per cell, the
        per-cell random seed is derived from ``seed``.
    seed : int
        Base seed; identical seed and inputs give an identical report.

    Returns
    -------
    ReductionReport
        One cell per (algorithm, order); failures are recorded per cell and
        the run continues.

    Notes
    -----
    Error norms are evaluated on the epsilon-regularized shared-D pair
    whenever the model's D is rank deficient (the multiplicative and
    relative errors are otherwise undefined); the additive error uses the
    strictly proper parts.  Cells may be evaluated concurrently
    (``RELMOR_THREADS``); results are merged in a fixed order.
    """
    if not algorithms_list:
        raise ValueError("algorithms list must be non-empty")
    unknown = set(algorithms_list) - set(ALGORITHM_ORDER)
    if unknown:
        raise ValueError(f"unknown algorithms: {sorted(unknown)}")
    orders = list(orders)
    if any(not 1 <= r < model.n for r in orders):
        raise ValueError(f"orders must satisfy 1 <= r < n = {model.n}, got {orders}")

    work = regularize_d(model, cfg.epsilon)
    rel_weight = relative_error_weight(work)
    grid = [
        (alg, order)
        for order in sorted(orders)
        for alg in sorted(algorithms_list, key=ALGORITHM_ORDER.index)
    ]
    workers = max(1, int(os.environ.get("RELMOR_THREADS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(
                pool.map(
                    lambda cell: _evaluate_cell(model, work, rel_weight, *cell, cfg, seed),
                    grid,
                )
            )
    else:
        cells = [
            _evaluate_cell(model, work, rel_weight, alg, order, cfg, seed)
            for alg, order in grid
        ]
    return ReductionReport(
        model_name=model_name,
        n=model.n,
        m=model.m,
        seed=seed,
        epsilon=cfg.epsilon,
        max_iterations=cfg.max_iterations,
        convergence_tol=cfg.convergence_tol,
        cells=cells,
    )


def _fmt_norm(x):
    return "failed" if x is None else format(x, ".6g")


def _table_lines(report):
    """Aligned table, rows ordered by order then canonical algorithm order."""
    algs = sorted(
        {c.algorithm for c in report.cells}, key=ALGORITHM_ORDER.index
    )
    header = ["order"] + [a.upper() for a in algs]
    rows = [header]
    for order in sorted({c.order for c in report.cells}):
        row = [str(order)]
        for alg in algs:
            cell = next(
                (c for c in report.cells if c.order == order and c.algorithm == alg), None
            )
            row.append("-" if cell is None else _fmt_norm(cell.delta_mul_h2))
        rows.append(row)
    widths = [max(len(r[k]) for r in rows) for k in range(len(header))]
    return [
        "  ".join(val.rjust(width) for val, width in zip(row, widths)) for row in rows
    ]


def report_to_text(report, include_timings=False):
    """Serialize a report deterministically (JSON tree plus aligned table)."""
    doc = {
        "schema": SCHEMA_VERSION,
        "model": {"name": report.model_name, "n": report.n, "m": report.m},
        "settings": {
            "seed": report.seed,
            "epsilon": report.epsilon,
            "max_iterations": report.max_iterations,
            "convergence_tol": report.convergence_tol,
        },
        "cells": [c.as_dict(include_timings=include_timings) for c in report.cells],
        "table_delta_mul_h2": _table_lines(report),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit_report(report, path, include_timings=False):
    """Write the report file; identical reports re-emit byte-identically."""
    text = report_to_text(report, include_timings=include_timings)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def emit_sigma_csv(systems, grid, labels=None):
    """CSV of the largest singular value per frequency for each system.

    Columns: ``frequency``, then one column per system in input order
    (RFC-4180 quoting via the csv module).  Resolvent singularities are
    emitted as ``nan`` and counted.

    Returns
    -------
    (text, warning_count)
    """
    systems = list(systems)
    if not systems:
        raise ValueError("need at least one system")
    m = systems[0].m
    if any(s.m != m for s in systems):
        raise ValueError("all systems must share the port dimension")
    if labels is None:
        labels = [f"sigma_max_{k}" for k in range(len(systems))]
    if len(labels) != len(systems):
        raise ValueError("one label per system required")
    tables = [frequency_response(s, grid) for s in systems]
    warnings_count = sum(len(t.failures) for t in tables)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["frequency"] + list(labels))
    for k, w in enumerate(np.asarray(grid, dtype=float)):
        row = [repr(float(w))]
        for t in tables:
            v = t.singular_values[k, 0]
            row.append("nan" if np.isnan(v) else repr(float(v)))
        writer.writerow(row)
    return buf.getvalue(), warnings_count
