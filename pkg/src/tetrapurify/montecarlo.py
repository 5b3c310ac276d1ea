"""Stochastic simulation of a schedule at the level of Pauli error labels.

Raw pairs arrive one at a time, each carrying an error label drawn from the
input odds. Every stage holds at most one pending state. Detection is looked
up in the circuit-derived error tables, so the simulation never touches a
closed-form formula.

The generator is numpy's PCG64 (``numpy.random.default_rng(seed)``); labels are
drawn in fixed-size chunks so a seed fully determines the run.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .noise import PAULI_LABELS, Basis, normalize
from .oracle import error_tables
from .pipeline import Boost, Distill, Mode, Schedule

__all__ = ["SimConfig", "SimStats", "run_sim", "MAX_SIM_REPS"]

MAX_SIM_REPS = 10**6
_CHUNK = 1 << 16


@dataclass
class SimConfig:
    schedule: Schedule
    raw_pair_budget: int
    seed: int = 0

    def __post_init__(self):
        if self.raw_pair_budget < 1:
            raise ValueError("raw pair budget must be at least 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        for stage in self.schedule.stages:
            if isinstance(stage, Boost):
                if stage.mode is Mode.BOUND:
                    raise ValueError("bound-mode stages cannot be simulated")
                if stage.reps > MAX_SIM_REPS:
                    raise ValueError(f"boost reps above {MAX_SIM_REPS} cannot be simulated")


@dataclass
class SimStats:
    outputs_produced: int
    per_stage_attempts: list
    per_stage_discards: list
    empirical_discard_rates: list
    per_step_attempts: list
    per_step_discards: list
    peak_storage_per_party: int
    raw_pairs_consumed: int
    output_error_histogram: dict
    stage_output_histograms: list
    raw_pairs_in_outputs: int
    raw_pairs_discarded: int
    raw_pairs_pending: int
    partial: bool = False
    seed: int = 0

    @property
    def accounted(self) -> bool:
        """Every consumed raw pair is in an output, a discard, or a pending slot."""
        return self.raw_pairs_consumed == (
            self.raw_pairs_in_outputs + self.raw_pairs_discarded + self.raw_pairs_pending
        )

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "outputs_produced": self.outputs_produced,
            "raw_pairs_consumed": self.raw_pairs_consumed,
            "per_stage_attempts": self.per_stage_attempts,
            "per_stage_discards": self.per_stage_discards,
            "empirical_discard_rates": self.empirical_discard_rates,
            "peak_storage_per_party": self.peak_storage_per_party,
            "output_error_histogram": self.output_error_histogram,
            "raw_pairs_in_outputs": self.raw_pairs_in_outputs,
            "raw_pairs_discarded": self.raw_pairs_discarded,
            "raw_pairs_pending": self.raw_pairs_pending,
            "partial": self.partial,
        }

    def to_table(self) -> str:
        lines = [f"{'stage':<6}{'attempts':>12}{'discards':>12}{'rate':>10}"]
        for i, (a, d, r) in enumerate(
            zip(self.per_stage_attempts, self.per_stage_discards, self.empirical_discard_rates), 1
        ):
            rate = "-" if r is None else f"{r:.4f}"
            lines.append(f"{i:<6}{a:>12}{d:>12}{rate:>10}")
        lines.append("")
        lines.append(f"raw pairs consumed: {self.raw_pairs_consumed}")
        lines.append(f"outputs produced: {self.outputs_produced}")
        hist = " ".join(f"{k}={v}" for k, v in self.output_error_histogram.items())
        lines.append(f"output errors: {hist}")
        lines.append(f"peak storage per party: {self.peak_storage_per_party}")
        if self.partial:
            lines.append("partial: budget ran out with states still held in stages")
        return "\n".join(lines)


def _label_probs(schedule: Schedule) -> np.ndarray:
    u = normalize(schedule.input)
    t = u.total()
    p = np.array([float(c / t) for c in u], dtype=float)
    return p / p.sum()


def run_sim(cfg: SimConfig) -> SimStats:
    stages = cfg.schedule.stages
    n = len(stages)
    tables = {b: t.as_index_arrays() for b, t in error_tables().items()}
    # Per stage: list of (detected, output) lookup pairs, one per fold step pattern entry.
    plans = []
    total_steps = []
    for st in stages:
        if isinstance(st, Distill):
            plans.append([tables[st.basis]])
            total_steps.append(1)
        else:
            plans.append([tables[Basis.parse(b)] for b in st.pattern])
            total_steps.append(st.steps)

    slot_label = [-1] * n  # -1 means empty
    slot_step = [0] * n
    slot_weight = [0] * n  # raw pairs embodied in the held state
    attempts = [0] * n
    discards = [0] * n
    step_attempts = [[0] * len(p) for p in plans]
    step_discards = [[0] * len(p) for p in plans]
    stage_hist = [[0, 0, 0, 0] for _ in range(n)]
    out_hist = [0, 0, 0, 0]
    outputs = 0
    in_outputs = 0
    discarded = 0
    peak = 0
    occupied = 0

    rng = np.random.default_rng(cfg.seed)
    probs = _label_probs(cfg.schedule)
    remaining = cfg.raw_pair_budget
    consumed = 0
    while remaining > 0:
        size = min(_CHUNK, remaining)
        labels = rng.choice(4, size=size, p=probs).tolist()
        remaining -= size
        for label in labels:
            consumed += 1
            # The arriving pair occupies one extra qubit per party.
            if occupied + 1 > peak:
                peak = occupied + 1
            weight = 1
            k = 0
            while True:
                if k == n:
                    outputs += 1
                    in_outputs += weight
                    out_hist[label] += 1
                    break
                if slot_label[k] < 0:
                    slot_label[k] = label
                    slot_weight[k] = weight
                    slot_step[k] = 0
                    occupied += 1
                    break
                plan = plans[k]
                step = slot_step[k]
                pi = step % len(plan)
                det, out = plan[pi]
                held = slot_label[k]
                step_attempts[k][pi] += 1
                if det[held][label]:
                    step_discards[k][pi] += 1
                    attempts[k] += 1
                    discards[k] += 1
                    discarded += weight + slot_weight[k]
                    slot_label[k] = -1
                    occupied -= 1
                    break
                new = out[held][label]
                weight += slot_weight[k]
                if step + 1 == total_steps[k]:
                    attempts[k] += 1
                    slot_label[k] = -1
                    occupied -= 1
                    stage_hist[k][new] += 1
                    label = new
                    k += 1
                    continue
                slot_label[k] = new
                slot_weight[k] = weight
                slot_step[k] = step + 1
                break

    pending = sum(w for lab, w in zip(slot_label, slot_weight) if lab >= 0)
    rates = [d / a if a else None for a, d in zip(attempts, discards)]
    return SimStats(
        outputs_produced=outputs,
        per_stage_attempts=attempts,
        per_stage_discards=discards,
        empirical_discard_rates=rates,
        per_step_attempts=step_attempts,
        per_step_discards=step_discards,
        peak_storage_per_party=peak,
        raw_pairs_consumed=consumed,
        output_error_histogram=dict(zip(PAULI_LABELS, out_hist)),
        stage_output_histograms=[dict(zip(PAULI_LABELS, h)) for h in stage_hist],
        raw_pairs_in_outputs=in_outputs,
        raw_pairs_discarded=discarded,
        raw_pairs_pending=pending,
        partial=pending > 0,
        seed=cfg.seed,
    )
