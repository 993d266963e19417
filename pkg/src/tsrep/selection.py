"""Greedy diversity/coverage selection of representative series.

Given the pairwise distance matrix D over n series, pick k of them
maximizing

    alpha * Div(R) - (1 - alpha) * Cov(R, T)

where Div(R) is the smallest pairwise distance among the chosen set
(well-separated representatives) and Cov(R, T) is the mean distance from
every series to its closest representative (good approximation of the
whole collection). Both are in raw DTW units; alpha alone balances them.

The greedy loop adds, at each step, the candidate with the greatest
incremental improvement. Conventions where the formulas are undefined:
Div of fewer than two series is 0, which makes the first pick the
1-medoid (smallest single-set coverage) and rewards a maximally distant
second pick. Ties break by score, then lower resulting coverage, then
smaller series index, so output is deterministic.

``greedy_select`` keeps per-series nearest-representative state for O(n)
candidate evaluation; ``greedy_select_oracle`` recomputes everything from
scratch at every step and exists as the slow reference the fast path is
tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyMatrix,
    EmptyRepresentativeSet,
    KOutOfRange,
    MatrixMissing,
)
from .matrix import DistanceMatrix
from .model import SelectionParams


def diversity(chosen: Sequence[int], d: np.ndarray) -> float:
    """Smallest pairwise distance within ``chosen``; 0 below two members."""
    idx = list(chosen)
    if len(idx) < 2:
        return 0.0
    sub = d[np.ix_(idx, idx)]
    return float(sub[np.triu_indices(len(idx), 1)].min())


def coverage(chosen: Sequence[int], d: np.ndarray) -> float:
    """Mean distance from every series to its closest chosen series."""
    idx = list(chosen)
    if not idx:
        raise EmptyRepresentativeSet("coverage of an empty set")
    return float(d[:, idx].min(axis=1).mean())


def objective(chosen: Sequence[int], d: np.ndarray, alpha: float) -> float:
    """alpha * diversity - (1 - alpha) * coverage."""
    return alpha * diversity(chosen, d) - (1.0 - alpha) * coverage(chosen, d)


@dataclass(frozen=True)
class GreedyStep:
    """One greedy iteration: what was picked and why."""

    picked: int
    picked_id: str
    delta_div: float
    delta_cov: float
    score: float
    div_after: float
    cov_after: float
    objective_after: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "picked": self.picked,
            "picked_id": self.picked_id,
            "delta_div": self.delta_div,
            "delta_cov": self.delta_cov,
            "score": self.score,
            "div_after": self.div_after,
            "cov_after": self.cov_after,
            "objective_after": self.objective_after,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GreedyStep":
        return cls(
            picked=int(d["picked"]),
            picked_id=str(d["picked_id"]),
            delta_div=float(d["delta_div"]),
            delta_cov=float(d["delta_cov"]),
            score=float(d["score"]),
            div_after=float(d["div_after"]),
            cov_after=float(d["cov_after"]),
            objective_after=float(d["objective_after"]),
        )


def _series_name(series_id: str) -> str:
    return series_id.split(":", 1)[1] if ":" in series_id else series_id


@dataclass(frozen=True)
class SelectionResult:
    """Ordered representative set plus the per-step trace."""

    params: SelectionParams
    representatives: tuple[str, ...]
    representative_indices: tuple[int, ...]
    trace: tuple[GreedyStep, ...]
    final_div: float
    final_cov: float
    final_objective: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "representatives": [
                {"index": i, "id": sid, "name": _series_name(sid)}
                for i, sid in zip(self.representative_indices, self.representatives)
            ],
            "trace": [s.to_dict() for s in self.trace],
            "final_div": self.final_div,
            "final_cov": self.final_cov,
            "final_objective": self.final_objective,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SelectionResult":
        reps = d["representatives"]
        return cls(
            params=SelectionParams.from_dict(d["params"]),
            representatives=tuple(str(r["id"]) for r in reps),
            representative_indices=tuple(int(r["index"]) for r in reps),
            trace=tuple(GreedyStep.from_dict(s) for s in d["trace"]),
            final_div=float(d["final_div"]),
            final_cov=float(d["final_cov"]),
            final_objective=float(d["final_objective"]),
        )


@dataclass
class _Candidate:
    score: float
    cov_new: float
    index: int
    delta_div: float
    delta_cov: float
    div_new: float


def _better(a: _Candidate, b: _Candidate | None) -> bool:
    """Tie-break chain: higher score, then lower coverage, then lower index."""
    if b is None:
        return True
    if a.score != b.score:
        return a.score > b.score
    if a.cov_new != b.cov_new:
        return a.cov_new < b.cov_new
    return a.index < b.index


def _validate(matrix: DistanceMatrix, params: SelectionParams) -> None:
    if matrix.n == 0:
        raise EmptyMatrix("cannot select from an empty matrix")
    if not (1 <= params.k <= matrix.n):
        raise KOutOfRange(params.k, matrix.n)


def _result(
    matrix: DistanceMatrix,
    params: SelectionParams,
    chosen: list[int],
    trace: list[GreedyStep],
) -> SelectionResult:
    last = trace[-1]
    return SelectionResult(
        params=params,
        representatives=tuple(matrix.order[i] for i in chosen),
        representative_indices=tuple(chosen),
        trace=tuple(trace),
        final_div=last.div_after,
        final_cov=last.cov_after,
        final_objective=last.objective_after,
    )


def greedy_select(matrix: DistanceMatrix, params: SelectionParams) -> SelectionResult:
    """Greedy selection with incremental O(n) candidate evaluation."""
    _validate(matrix, params)
    d = matrix.d
    n = matrix.n
    alpha = params.alpha

    chosen: list[int] = []
    in_set = np.zeros(n, dtype=bool)
    trace: list[GreedyStep] = []
    # per-series distance to (and index of) the closest representative
    nearest: np.ndarray | None = None
    nearest_idx: np.ndarray | None = None
    div = 0.0
    cov = 0.0

    for step in range(params.k):
        best: _Candidate | None = None
        for t in range(n):
            if in_set[t]:
                continue
            row = d[t]
            if step == 0:
                # Div is 0 for any singleton; candidates rank by their
                # single-set coverage alone (the 1-medoid seed).
                cov_new = float(np.mean(row))
                cand = _Candidate(
                    score=alpha * 0.0 - (1.0 - alpha) * cov_new,
                    cov_new=cov_new,
                    index=t,
                    delta_div=0.0,
                    delta_cov=cov_new,
                    div_new=0.0,
                )
            else:
                # nearest[t] is min over chosen of d[t][.]
                mind = float(nearest[t])
                div_new = mind if step == 1 else min(div, mind)
                cov_new = float(np.mean(np.minimum(nearest, row)))
                dd = div_new - div
                dc = cov_new - cov
                cand = _Candidate(
                    score=alpha * dd - (1.0 - alpha) * dc,
                    cov_new=cov_new,
                    index=t,
                    delta_div=dd,
                    delta_cov=dc,
                    div_new=div_new,
                )
            if _better(cand, best):
                best = cand

        assert best is not None
        t = best.index
        chosen.append(t)
        in_set[t] = True
        if nearest is None:
            nearest = d[t].copy()
            nearest_idx = np.full(n, t, dtype=np.int64)
        else:
            closer = d[t] < nearest
            nearest_idx[closer] = t
            nearest = np.minimum(nearest, d[t])
        div = best.div_new
        cov = best.cov_new
        trace.append(
            GreedyStep(
                picked=t,
                picked_id=matrix.order[t],
                delta_div=best.delta_div,
                delta_cov=best.delta_cov,
                score=best.score,
                div_after=div,
                cov_after=cov,
                objective_after=alpha * div - (1.0 - alpha) * cov,
            )
        )

    return _result(matrix, params, chosen, trace)


def greedy_select_oracle(
    matrix: DistanceMatrix, params: SelectionParams
) -> SelectionResult:
    """Reference implementation: every delta recomputed from scratch.

    Same contract and tie-breaks as :func:`greedy_select`, with no
    incremental state. Intended for small n; quadratic per candidate.
    """
    _validate(matrix, params)
    d = matrix.d
    n = matrix.n
    alpha = params.alpha

    chosen: list[int] = []
    trace: list[GreedyStep] = []
    for step in range(params.k):
        div_cur = diversity(chosen, d)
        cov_cur = coverage(chosen, d) if chosen else 0.0
        best: _Candidate | None = None
        for t in range(n):
            if t in chosen:
                continue
            div_new = diversity(chosen + [t], d)
            cov_new = coverage(chosen + [t], d)
            dd = div_new - div_cur if step > 0 else 0.0
            dc = cov_new - cov_cur if step > 0 else cov_new
            cand = _Candidate(
                score=alpha * dd - (1.0 - alpha) * dc,
                cov_new=cov_new,
                index=t,
                delta_div=dd,
                delta_cov=dc,
                div_new=div_new,
            )
            if _better(cand, best):
                best = cand
        assert best is not None
        chosen.append(best.index)
        trace.append(
            GreedyStep(
                picked=best.index,
                picked_id=matrix.order[best.index],
                delta_div=best.delta_div,
                delta_cov=best.delta_cov,
                score=best.score,
                div_after=best.div_new,
                cov_after=best.cov_new,
                objective_after=alpha * best.div_new - (1.0 - alpha) * best.cov_new,
            )
        )

    return _result(matrix, params, chosen, trace)


def reselect(matrix: DistanceMatrix | None, params: SelectionParams) -> SelectionResult:
    """Re-run selection on an already-built matrix; never touches DTW."""
    if matrix is None:
        raise MatrixMissing("no cached distance matrix; build it first")
    return greedy_select(matrix, params)
