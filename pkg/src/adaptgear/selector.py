"""Feedback-driven adaptive kernel selection.

During the first iterations of a run, the candidate kernels for each
subgraph role are scheduled round-robin and their wall times recorded.
Once every candidate has profile_iters_per_candidate measurements, the
selector locks in the median-fastest kernel per role for the remainder of
the run. Profiling iterations execute real work, so the only cost of
profiling is the speed gap between candidates.
"""

from __future__ import annotations

import enum
import statistics
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .decompose import DecomposedGraph
from .kernels import (
    DEFAULT_TILE_BUDGET_BYTES,
    AggregateOp,
    KernelKind,
    SubgraphExec,
    combine,
)

DEFAULT_INTRA_CANDIDATES = (KernelKind.CSR_INTRA_BLOCKED, KernelKind.DENSE_BLOCK)
DEFAULT_INTER_CANDIDATES = (KernelKind.CSR_INTER, KernelKind.COO_ATOMIC)
DEFAULT_PROFILE_ITERS = 3

INTRA = "intra"
INTER = "inter"


class SelectorError(RuntimeError):
    pass


class Phase(enum.Enum):
    PROFILING = "profiling"
    LOCKED = "locked"


@dataclass(frozen=True)
class SelectorState:
    candidates_intra: tuple[KernelKind, ...] = DEFAULT_INTRA_CANDIDATES
    candidates_inter: tuple[KernelKind, ...] = DEFAULT_INTER_CANDIDATES
    profile_iters_per_candidate: int = DEFAULT_PROFILE_ITERS
    timings: dict = field(default_factory=dict)
    phase: Phase = Phase.PROFILING
    choice_intra: KernelKind | None = None
    choice_inter: KernelKind | None = None

    @classmethod
    def fresh(cls, op: AggregateOp | None = None,
              candidates_intra=None, candidates_inter=None,
              profile_iters_per_candidate: int = DEFAULT_PROFILE_ITERS) -> "SelectorState":
        """Default candidate sets; dense_block is dropped for max."""
        if candidates_intra is None:
            candidates_intra = DEFAULT_INTRA_CANDIDATES
            if op is AggregateOp.MAX:
                candidates_intra = tuple(k for k in candidates_intra
                                         if k is not KernelKind.DENSE_BLOCK)
        if candidates_inter is None:
            candidates_inter = DEFAULT_INTER_CANDIDATES
        if profile_iters_per_candidate < 1:
            raise ValueError("profile_iters_per_candidate must be >= 1")
        return cls(candidates_intra=tuple(candidates_intra),
                   candidates_inter=tuple(candidates_inter),
                   profile_iters_per_candidate=profile_iters_per_candidate)

    def candidates(self, role: str) -> tuple[KernelKind, ...]:
        if role == INTRA:
            return self.candidates_intra
        if role == INTER:
            return self.candidates_inter
        raise ValueError(f"unknown role {role!r}")

    @property
    def total_profiling_iters(self) -> int:
        return self.profile_iters_per_candidate * max(
            len(self.candidates_intra), len(self.candidates_inter))


@dataclass(frozen=True)
class IterationPlan:
    iter_index: int
    kernel_intra: KernelKind
    kernel_inter: KernelKind
    is_profiling: bool


@dataclass(frozen=True)
class IterationRecord:
    iter_index: int
    kernel_intra: KernelKind
    kernel_inter: KernelKind
    intra_us: float
    inter_us: float
    is_profiling: bool

    @property
    def total_us(self) -> float:
        return self.intra_us + self.inter_us


def plan_iteration(s: SelectorState, iter_index: int) -> IterationPlan:
    """Kernel pair for one iteration: round-robin while profiling, the
    locked pair afterwards."""
    if s.phase is Phase.LOCKED:
        return IterationPlan(iter_index, s.choice_intra, s.choice_inter,
                             is_profiling=False)
    intra = s.candidates_intra[iter_index % len(s.candidates_intra)]
    inter = s.candidates_inter[iter_index % len(s.candidates_inter)]
    return IterationPlan(iter_index, intra, inter, is_profiling=True)


def _argmin_median(candidates, timings, role) -> KernelKind:
    best = None
    best_med = None
    for k in candidates:  # ties resolve to candidate-list order
        med = statistics.median(timings[(role, k)])
        if best_med is None or med < best_med:
            best, best_med = k, med
    return best


def record_timing(s: SelectorState, role: str, kind: KernelKind,
                  elapsed: float) -> SelectorState:
    """Append one measurement; lock the state once every candidate of both
    roles has profile_iters_per_candidate measurements."""
    if s.phase is Phase.LOCKED:
        raise SelectorError("cannot record timings after the selector locked")
    if kind not in s.candidates(role):
        raise SelectorError(f"{kind} is not a candidate for role {role!r}")
    timings = {k: list(v) for k, v in s.timings.items()}
    timings.setdefault((role, kind), []).append(float(elapsed))
    need = s.profile_iters_per_candidate
    complete = all(
        len(timings.get((r, k), ())) >= need
        for r, cands in ((INTRA, s.candidates_intra), (INTER, s.candidates_inter))
        for k in cands
    )
    if not complete:
        return replace(s, timings=timings)
    return replace(
        s,
        timings=timings,
        phase=Phase.LOCKED,
        choice_intra=_argmin_median(s.candidates_intra, timings, INTRA),
        choice_inter=_argmin_median(s.candidates_inter, timings, INTER),
    )


def run_training_loop(d: DecomposedGraph, x: np.ndarray, op: AggregateOp,
                      iters: int, s: SelectorState | None = None,
                      tile_budget_bytes: int = DEFAULT_TILE_BUDGET_BYTES,
                      threads: int = 1,
                      update=None):
    """Run ``iters`` aggregation rounds under adaptive kernel selection.

    The topology is static across iterations, so the subgraph formats are
    built once up front. Every iteration computes the same combined result
    regardless of which candidate pair executed; only the timing differs.
    ``update``, if given, is applied to the combined features each
    iteration (outside the timed kernel region).

    Returns (final result, final selector state, per-iteration trace).
    """
    if s is None:
        s = SelectorState.fresh(op)
    if iters < s.total_profiling_iters:
        raise ValueError(
            f"iters={iters} is below the profiling budget {s.total_profiling_iters}"
        )
    intra_exec = SubgraphExec.for_intra(d.intra, d.block_size)
    inter_exec = SubgraphExec.for_inter(d.inter, d.block_size)
    trace: list[IterationRecord] = []
    result = None
    for i in range(iters):
        plan = plan_iteration(s, i)
        t0 = time.perf_counter_ns()
        p_intra = intra_exec.run(plan.kernel_intra, x, op,
                                 tile_budget_bytes=tile_budget_bytes, threads=threads)
        t1 = time.perf_counter_ns()
        p_inter = inter_exec.run(plan.kernel_inter, x, op, threads=threads)
        t2 = time.perf_counter_ns()
        if plan.is_profiling:
            # When the roles have unequal candidate counts, one role can
            # complete (and lock the state) before the other's final
            # measurement; surplus measurements are simply dropped.
            s = record_timing(s, INTRA, plan.kernel_intra, (t1 - t0) / 1000.0)
            if s.phase is Phase.PROFILING:
                s = record_timing(s, INTER, plan.kernel_inter, (t2 - t1) / 1000.0)
        result = combine(p_intra, p_inter, op, full_in_degree=d.full_in_degree)
        if update is not None:
            result = update(result)
        trace.append(IterationRecord(
            iter_index=i,
            kernel_intra=plan.kernel_intra,
            kernel_inter=plan.kernel_inter,
            intra_us=(t1 - t0) / 1000.0,
            inter_us=(t2 - t1) / 1000.0,
            is_profiling=plan.is_profiling,
        ))
    return result, s, trace
