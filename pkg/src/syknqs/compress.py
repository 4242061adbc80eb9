"""Relative-threshold SVD truncation of trained weight matrices."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .nqs import NetworkParams
from .optimize import Objective

__all__ = ["CompressionReport", "compression_scan", "svd_truncate", "write_compression_csv"]


@dataclass(eq=False)
class CompressionReport:
    rel_threshold: float
    ranks: list[int]
    sizes: list[int]
    singular_values: list[np.ndarray] = field(repr=False)
    delta_e_before: float | None = None
    delta_e_after: float | None = None

    @property
    def q(self) -> float:
        """Fraction of singular values kept over all weight matrices."""
        return sum(self.ranks) / sum(self.sizes)


def svd_truncate(params: NetworkParams, rel_threshold: float,
                 objective: Objective | None = None) -> tuple[NetworkParams, CompressionReport]:
    """Zero every singular value with ``s_i / s_1 < rel_threshold``, layer by layer.

    Biases are untouched.  When ``objective`` is given (it must know ``H``
    and ``E_gs``) the relative energy error is evaluated before and after.
    """
    if not 0.0 <= rel_threshold < 1.0:
        raise ValueError(f"rel_threshold must lie in [0, 1), got {rel_threshold}")
    weights, ranks, sizes, spectra = [], [], [], []
    for W in params.weights:
        try:
            U, s, Vh = np.linalg.svd(W, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError(f"SVD failed on a {W.shape} weight matrix") from exc
        if rel_threshold == 0.0:
            keep = np.ones_like(s, dtype=bool)
        elif s[0] > 0:
            keep = s / s[0] >= rel_threshold
        else:
            keep = np.zeros_like(s, dtype=bool)
        s_kept = np.where(keep, s, 0.0)
        weights.append(W if keep.all() else (U * s_kept) @ Vh)
        ranks.append(int(keep.sum()))
        sizes.append(len(s))
        spectra.append(s)
    truncated = NetworkParams.from_layers(params.arch, weights, params.biases)
    report = CompressionReport(rel_threshold, ranks, sizes, spectra)
    if objective is not None:
        report.delta_e_before = objective.evaluate(params).delta_e
        report.delta_e_after = objective.evaluate(truncated).delta_e
    return truncated, report


def compression_scan(params: NetworkParams, thresholds, objective: Objective | None = None):
    return [svd_truncate(params, lam, objective)[1] for lam in thresholds]


COMPRESSION_COLUMNS = ["rel_threshold", "q", "delta_e_before", "delta_e_after", "ranks"]


def write_compression_csv(reports, path, append: bool = False) -> Path:
    path = Path(path)
    new = not (append and path.exists())
    with path.open("a" if append else "w", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(COMPRESSION_COLUMNS)
        for r in reports:
            w.writerow([repr(r.rel_threshold), repr(r.q), repr(r.delta_e_before), repr(r.delta_e_after),
                        ";".join(map(str, r.ranks))])
    return path
