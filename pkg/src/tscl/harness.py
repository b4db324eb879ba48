"""Experiment runner: baselines, sessions, traces, and aggregation."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, UsageError
from .rng import session_streams
from .students import (
    ChainMdpConfig,
    ChainStudentConfig,
    GridStudentConfig,
    Student,
    make_student,
)
from .teachers import Formulation, TeacherConfig, make_teacher

STUDENT_CONFIGS = {
    "chain": ChainStudentConfig,
    "grid2d": GridStudentConfig,
    "chain_mdp": ChainMdpConfig,
}


class Baseline(str, enum.Enum):
    UNIFORM = "uniform"
    MANUAL = "manual"
    FINAL_ONLY = "final_only"


@dataclass(frozen=True)
class BaselineConfig:
    """A fixed schedule instead of a learning Teacher.

    ``schedule`` is a list of ``(task, steps)`` used by ``MANUAL``; once it
    runs out the manual teacher samples tasks uniformly.
    """

    kind: Baseline = Baseline.UNIFORM
    formulation: Formulation = Formulation.SIMPLE
    schedule: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Baseline(self.kind))
        object.__setattr__(self, "formulation", Formulation(self.formulation))
        object.__setattr__(self, "schedule", tuple((int(a), int(n)) for a, n in self.schedule))
        if self.kind is Baseline.MANUAL and not self.schedule:
            raise ConfigError("manual baseline needs a schedule")
        if any(n < 0 for _, n in self.schedule):
            raise ConfigError("schedule step counts must be >= 0")


class BaselineTeacher:
    """Non-adaptive teacher with the same protocol as the learning teachers."""

    def __init__(self, n_tasks: int, cfg: BaselineConfig, rng: np.random.Generator):
        self.n_tasks = n_tasks
        self.cfg = cfg
        self.formulation = cfg.formulation
        self.rng = rng
        self._plan = [a for a, n in cfg.schedule for _ in range(n)]
        self._step = 0
        for a, _ in cfg.schedule:
            if not 0 <= a < n_tasks:
                raise ConfigError(f"schedule task {a} out of range for {n_tasks} tasks")

    @property
    def values(self) -> np.ndarray:
        return np.zeros(self.n_tasks)

    def _task(self) -> int | None:
        kind = self.cfg.kind
        if kind is Baseline.FINAL_ONLY:
            return self.n_tasks - 1
        if kind is Baseline.MANUAL and self._step < len(self._plan):
            return self._plan[self._step]
        return None

    def next_action(self):
        task = self._task()
        self._step += 1
        if self.formulation is Formulation.SIMPLE:
            return int(self.rng.integers(self.n_tasks)) if task is None else task
        if task is None:
            return np.full(self.n_tasks, 1.0 / self.n_tasks)
        p = np.zeros(self.n_tasks)
        p[task] = 1.0
        return p

    def observe(self, action, obs, t: int) -> None:
        pass


@dataclass(frozen=True)
class ExperimentConfig:
    student_kind: str = "chain"
    student: object = None
    teacher: TeacherConfig | BaselineConfig = field(default_factory=TeacherConfig)
    max_steps: int = 20000
    mastery_threshold: float = 0.99
    seeds: tuple[int, ...] = (0,)
    name: str | None = None

    def __post_init__(self) -> None:
        if self.student_kind not in STUDENT_CONFIGS:
            raise ConfigError(f"unknown student kind {self.student_kind!r}")
        if self.student is None:
            object.__setattr__(self, "student", STUDENT_CONFIGS[self.student_kind]())
        elif not isinstance(self.student, STUDENT_CONFIGS[self.student_kind]):
            raise ConfigError(f"student config does not match kind {self.student_kind!r}")
        if self.max_steps < 0:
            raise ConfigError("max_steps must be >= 0")
        if not 0.0 < self.mastery_threshold <= 1.0:
            raise ConfigError("mastery_threshold must be in (0, 1]")
        if isinstance(self.teacher, BaselineConfig):
            if sum(n for _, n in self.teacher.schedule) > self.max_steps:
                raise ConfigError("manual schedule is longer than max_steps")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def formulation(self) -> Formulation:
        return self.teacher.formulation

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        t = self.teacher
        if isinstance(t, BaselineConfig):
            parts = [t.kind.value, t.formulation.value]
        else:
            parts = [t.algorithm.value, t.formulation.value]
            if t.algorithm.value != "sampling":
                parts.append(t.policy.value)
            parts.append("abs" if t.use_abs else "raw")
        return f"{self.student_kind}:" + "/".join(parts)


def build_teacher(cfg: ExperimentConfig, n_tasks: int, rng: np.random.Generator):
    if isinstance(cfg.teacher, BaselineConfig):
        return BaselineTeacher(n_tasks, cfg.teacher, rng)
    return make_teacher(cfg.teacher, n_tasks, rng)


@dataclass
class RunTrace:
    """Everything that happened in one Teacher-Student session.

    ``rewards`` are the Teacher's POMDP rewards: for Simple runs the change in
    the trained task's observed score since it was last trained (a first
    observation counts from 0), for Batch runs the summed change of the
    observed score vector. ``values`` are the per-task numbers the Teacher
    ranks tasks by after observing the step, ``scores`` the Student's
    noise-free evaluation after each step.
    """

    label: str
    seed: int
    formulation: Formulation
    n_tasks: int
    max_steps: int
    actions: list = field(default_factory=list)
    observations: list = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    values: list[np.ndarray] = field(default_factory=list)
    scores: list[np.ndarray] = field(default_factory=list)
    steps_to_mastery: int | None = None
    final_scores: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def teacher_return(self) -> float:
        return math.fsum(self.rewards)

    def selection_counts(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Training mass per task over steps ``[start, stop)``."""
        counts = np.zeros(self.n_tasks)
        for a in self.actions[start:stop]:
            if self.formulation is Formulation.SIMPLE:
                counts[a] += 1.0
            else:
                counts += a
        return counts

    def summary(self) -> dict:
        final = [] if self.final_scores is None else [float(x) for x in self.final_scores]
        return {
            "label": self.label,
            "seed": self.seed,
            "formulation": self.formulation.value,
            "n_tasks": self.n_tasks,
            "max_steps": self.max_steps,
            "n_steps": len(self),
            "steps_to_mastery": self.steps_to_mastery,
            "final_scores": final,
            "final_min_score": min(final) if final else None,
            "teacher_return": self.teacher_return,
        }


def run_session(
    cfg: ExperimentConfig, seed: int, student: Student | None = None
) -> RunTrace:
    """Run one Teacher-Student session until mastery or ``max_steps``.

    ``student`` overrides the one built from ``cfg``.
    """
    streams = session_streams(seed)
    if student is None:
        student = make_student(cfg.student_kind, cfg.student)
    form = cfg.formulation
    if form not in student.formulations:
        raise ConfigError(f"student does not support the {form.value} formulation")
    n = student.num_tasks()
    teacher = build_teacher(cfg, n, streams["teacher"])
    srng = streams["student"]
    thr = cfg.mastery_threshold
    trace = RunTrace(cfg.label, seed, form, n, cfg.max_steps)

    prev = np.zeros(n)
    for t in range(1, cfg.max_steps + 1):
        action = teacher.next_action()
        if form is Formulation.SIMPLE:
            obs = student.train_simple(action, srng)
            reward = obs - prev[action]
            prev[action] = obs
        else:
            obs = student.train_batch(action, srng)
            reward = float(np.sum(obs - prev))
            prev = obs
        teacher.observe(action, obs, t)
        scores = student.eval_all()
        trace.actions.append(action)
        trace.observations.append(obs)
        trace.rewards.append(float(reward))
        trace.values.append(teacher.values)
        trace.scores.append(scores)
        if np.all(scores >= thr):
            trace.steps_to_mastery = t
            break
    trace.final_scores = student.eval_all()
    return trace


def last_observed_scores(trace: RunTrace) -> np.ndarray:
    """Each task's score at the last step it was trained (0 if never)."""
    if trace.formulation is Formulation.BATCH:
        return np.asarray(trace.observations[-1]) if trace.observations else np.zeros(trace.n_tasks)
    last = np.zeros(trace.n_tasks)
    for a, x in zip(trace.actions, trace.observations):
        last[a] = x
    return last


def telescoping_check(trace: RunTrace, atol: float = 1e-9) -> bool:
    """Cumulative teacher reward equals the sum of last observed task scores."""
    return abs(trace.teacher_return - math.fsum(last_observed_scores(trace))) <= atol


def aggregate(traces: Sequence[RunTrace]) -> dict:
    """Summary statistics over runs of one configuration.

    Runs that never reach mastery count as ``max_steps`` and are reported in
    ``n_censored``.
    """
    if not traces:
        raise UsageError("aggregate needs at least one trace")
    steps = np.array(
        [t.steps_to_mastery if t.steps_to_mastery is not None else t.max_steps for t in traces],
        dtype=float,
    )
    finals = np.array([t.final_scores for t in traces])
    return {
        "label": traces[0].label,
        "n_runs": len(traces),
        "n_mastered": sum(t.steps_to_mastery is not None for t in traces),
        "n_censored": sum(t.steps_to_mastery is None for t in traces),
        "median_steps": float(np.median(steps)),
        "mean_steps": float(np.mean(steps)),
        "std_steps": float(np.std(steps)),
        "mean_final_scores": [float(x) for x in finals.mean(axis=0)],
        "mean_final_min": float(finals.min(axis=1).mean()),
        "mean_teacher_return": float(np.mean([t.teacher_return for t in traces])),
    }


# --------------------------------------------------------------------------
# serialisation


def _fmt(x: float) -> str:
    return repr(float(x))


def trace_header(n_tasks: int) -> list[str]:
    return (
        ["t", "action", "reward"]
        + [f"score_{i}" for i in range(n_tasks)]
        + [f"q_{i}" for i in range(n_tasks)]
    )


def trace_rows(trace: RunTrace):
    for t, (a, r, s, q) in enumerate(
        zip(trace.actions, trace.rewards, trace.scores, trace.values), start=1
    ):
        action = str(a) if trace.formulation is Formulation.SIMPLE else "|".join(_fmt(p) for p in a)
        yield [str(t), action, _fmt(r)] + [_fmt(x) for x in s] + [_fmt(x) for x in q]


def trace_to_csv(trace: RunTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trace_header(trace.n_tasks))
    w.writerows(trace_rows(trace))
    return buf.getvalue()


def trace_to_json(trace: RunTrace) -> str:
    header = trace_header(trace.n_tasks)
    rows = [dict(zip(header, row)) for row in trace_rows(trace)]
    return json.dumps({"summary": trace.summary(), "steps": rows}, indent=1) + "\n"


def read_trace_rewards(text: str) -> list[float]:
    return [float(row["reward"]) for row in csv.DictReader(io.StringIO(text))]
