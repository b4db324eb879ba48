"""Simulated Students.

Three learners expose the same observable surface a real model would: train on
a task (or a task distribution) and report per-task scores in ``[0, 1]``.

* :class:`ChainStudent` -- task ``i`` only improves once task ``i - 1`` passes a
  gate threshold; untrained tasks are slowly forgotten.
* :class:`GridStudent` -- the same dynamics on an ``L x L`` grid of tasks where
  a cell is gated by its upper and left neighbours.
* :class:`ChainMdpStudent` -- a tabular Q-learner on combination-lock chains of
  increasing length sharing one Q-table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from . import kernels
from .errors import ConfigError, DomainError
from .teachers import Formulation


@runtime_checkable
class Student(Protocol):
    formulations: frozenset[Formulation]

    def num_tasks(self) -> int: ...

    def train_simple(self, task: int, rng: np.random.Generator) -> float: ...

    def train_batch(self, dist: np.ndarray, rng: np.random.Generator) -> np.ndarray: ...

    def eval_all(self) -> np.ndarray: ...


BOTH = frozenset({Formulation.SIMPLE, Formulation.BATCH})


def _check_task(task: int, n: int) -> int:
    task = int(task)
    if not 0 <= task < n:
        raise DomainError(f"task {task} out of range for {n} tasks")
    return task


def _check_dist(dist, n: int) -> np.ndarray:
    p = np.ascontiguousarray(dist, dtype=float)
    if p.shape != (n,):
        raise DomainError(f"distribution must have {n} entries, got shape {p.shape}")
    if np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"not a probability distribution: {p}")
    return p


@dataclass(frozen=True)
class ChainStudentConfig:
    n_tasks: int = 5
    learn_rate: float = 0.08
    gate_threshold: float = 0.7
    forget_rate: float = 1e-4
    noise_sigma: float = 0.01

    def __post_init__(self) -> None:
        if self.n_tasks < 2:
            raise ConfigError("chain student needs n_tasks >= 2")
        _check_rates(self.learn_rate, self.gate_threshold, self.forget_rate, self.noise_sigma)


@dataclass(frozen=True)
class GridStudentConfig:
    side: int = 4
    learn_rate: float = 0.08
    gate_threshold: float = 0.7
    forget_rate: float = 1e-5
    noise_sigma: float = 0.01

    def __post_init__(self) -> None:
        if self.side < 1:
            raise ConfigError("grid side must be >= 1")
        _check_rates(self.learn_rate, self.gate_threshold, self.forget_rate, self.noise_sigma)


def _check_rates(eta, gamma, delta, sigma):
    if not 0.0 < eta <= 1.0:
        raise ConfigError(f"learn_rate must be in (0, 1], got {eta}")
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gate_threshold must be in [0, 1], got {gamma}")
    if not 0.0 <= delta < 1.0:
        raise ConfigError(f"forget_rate must be in [0, 1), got {delta}")
    if sigma < 0.0:
        raise ConfigError(f"noise_sigma must be >= 0, got {sigma}")


class _SkillStudent:
    """Latent skill per task, observed through clipped Gaussian noise."""

    formulations = BOTH

    def __init__(self, n_tasks: int, noise_sigma: float) -> None:
        self.skills = np.zeros(n_tasks)
        self.noise_sigma = noise_sigma

    def num_tasks(self) -> int:
        return len(self.skills)

    def eval_all(self) -> np.ndarray:
        return np.clip(self.skills, 0.0, 1.0)

    def _observe(self, s, rng):
        if self.noise_sigma > 0.0:
            s = s + rng.normal(0.0, self.noise_sigma, size=np.shape(s))
        return np.clip(s, 0.0, 1.0)


class ChainStudent(_SkillStudent):
    """Linear chain of prerequisite-gated tasks.

    Training task ``i`` moves its skill toward 1 at rate ``learn_rate`` times
    a gate that opens linearly once task ``i - 1`` exceeds ``gate_threshold``.
    Every other task is multiplied by ``1 - forget_rate``.
    """

    def __init__(self, cfg: ChainStudentConfig | None = None) -> None:
        self.cfg = cfg or ChainStudentConfig()
        super().__init__(self.cfg.n_tasks, self.cfg.noise_sigma)

    def train_simple(self, task: int, rng: np.random.Generator) -> float:
        task = _check_task(task, len(self.skills))
        c = self.cfg
        s = kernels.chain_train(self.skills, task, c.learn_rate, c.gate_threshold, c.forget_rate)
        return float(self._observe(s, rng))

    def train_batch(self, dist, rng: np.random.Generator) -> np.ndarray:
        p = _check_dist(dist, len(self.skills))
        c = self.cfg
        kernels.chain_train_batch(self.skills, p, c.learn_rate, c.gate_threshold, c.forget_rate)
        return self._observe(self.skills, rng)


class GridStudent(_SkillStudent):
    """Row-major ``side x side`` grid; cell ``(i, j)`` is gated by ``(i-1, j)`` and ``(i, j-1)``."""

    def __init__(self, cfg: GridStudentConfig | None = None) -> None:
        self.cfg = cfg or GridStudentConfig()
        super().__init__(self.cfg.side * self.cfg.side, self.cfg.noise_sigma)

    def task_index(self, row: int, col: int) -> int:
        side = self.cfg.side
        if not (0 <= row < side and 0 <= col < side):
            raise DomainError(f"cell ({row}, {col}) outside a {side}x{side} grid")
        return row * side + col

    def train_simple(self, task: int, rng: np.random.Generator) -> float:
        task = _check_task(task, len(self.skills))
        c = self.cfg
        s = kernels.grid_train(
            self.skills, c.side, task, c.learn_rate, c.gate_threshold, c.forget_rate
        )
        return float(self._observe(s, rng))

    def train_batch(self, dist, rng: np.random.Generator) -> np.ndarray:
        p = _check_dist(dist, len(self.skills))
        c = self.cfg
        kernels.grid_train_batch(
            self.skills, c.side, p, c.learn_rate, c.gate_threshold, c.forget_rate
        )
        return self._observe(self.skills, rng)


@dataclass(frozen=True)
class ChainMdpConfig:
    """Combination-lock chains sharing one Q-table.

    ``episode_cap`` of ``None`` caps each episode at twice its chain length.
    """

    chain_lengths: tuple[int, ...] = (3, 5, 7, 9, 12)
    episode_cap: int | None = None
    q_learn_rate: float = 0.5
    explore_eps: float = 0.5
    discount: float = 0.9
    step_penalty: float = 0.0
    goal_reward: float = 1.0
    eval_episodes: int = 1
    batch_episodes: int = 1

    def __post_init__(self) -> None:
        lengths = tuple(int(x) for x in self.chain_lengths)
        object.__setattr__(self, "chain_lengths", lengths)
        if len(lengths) < 1 or lengths[0] < 1:
            raise ConfigError("chain_lengths must be positive")
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ConfigError(f"chain_lengths must be strictly increasing, got {lengths}")
        if self.episode_cap is not None and self.episode_cap < 1:
            raise ConfigError("episode_cap must be >= 1")
        if not 0.0 < self.q_learn_rate <= 1.0:
            raise ConfigError("q_learn_rate must be in (0, 1]")
        if not 0.0 <= self.explore_eps <= 1.0:
            raise ConfigError("explore_eps must be in [0, 1]")
        if not 0.0 <= self.discount < 1.0:
            raise ConfigError("discount must be in [0, 1)")
        if self.eval_episodes < 1 or self.batch_episodes < 1:
            raise ConfigError("eval_episodes and batch_episodes must be >= 1")

    def cap(self, task: int) -> int:
        return self.episode_cap if self.episode_cap is not None else 2 * self.chain_lengths[task]


class ChainMdpStudent:
    """Tabular Q-learning on chains where any wrong action resets to the start.

    Two actions: 0 resets to state 0, 1 advances one state. Reaching the end of
    chain ``k`` (length ``L_k``) pays ``goal_reward`` and ends the episode. The
    Q-table is indexed by the remaining distance to the goal, so what the agent
    learns near the goal of a short chain is reused on longer ones. Greedy ties
    go to action 0, which makes an untrained agent never reach a distant goal.

    The environment and the greedy policy are deterministic, so every
    evaluation episode of a task has the same outcome; the score is 1.0 when
    the greedy policy reaches the goal within the cap and 0.0 otherwise.
    """

    formulations = BOTH

    def __init__(self, cfg: ChainMdpConfig | None = None) -> None:
        self.cfg = cfg or ChainMdpConfig()
        self.q = np.zeros((max(self.cfg.chain_lengths) + 1, 2))

    def num_tasks(self) -> int:
        return len(self.cfg.chain_lengths)

    def _episode(self, task: int, rng: np.random.Generator) -> int:
        c = self.cfg
        cap = c.cap(task)
        draws = rng.random(2 * cap)
        return kernels.mdp_episode(
            self.q, c.chain_lengths[task], cap, c.q_learn_rate, c.discount,
            c.explore_eps, c.goal_reward, c.step_penalty, draws,
        )

    def _score(self, task: int) -> float:
        length, cap = self.cfg.chain_lengths[task], self.cfg.cap(task)
        hits = sum(kernels.mdp_greedy_success(self.q, length, cap) for _ in range(self.cfg.eval_episodes))
        return hits / self.cfg.eval_episodes

    def train_simple(self, task: int, rng: np.random.Generator) -> float:
        task = _check_task(task, self.num_tasks())
        self._episode(task, rng)
        return self._score(task)

    def train_batch(self, dist, rng: np.random.Generator) -> np.ndarray:
        p = _check_dist(dist, self.num_tasks())
        cdf = np.cumsum(p)
        for _ in range(self.cfg.batch_episodes):
            task = min(int(np.searchsorted(cdf, rng.random(), side="right")), len(p) - 1)
            self._episode(task, rng)
        return self.eval_all()

    def eval_all(self) -> np.ndarray:
        return np.array([self._score(k) for k in range(self.num_tasks())])


def random_policy_success(length: int, cap: int) -> float:
    """Exact probability that a uniformly random policy reaches the goal.

    Dynamic programme over (steps taken, position); used as an oracle for the
    untrained explorer.
    """
    if length < 1 or cap < 0:
        raise DomainError("length must be >= 1 and cap >= 0")
    dist = np.zeros(length)
    dist[0] = 1.0
    hit = 0.0
    for _ in range(cap):
        new = np.zeros(length)
        new[0] = 0.5 * dist.sum()
        new[1:] = 0.5 * dist[:-1]
        hit += 0.5 * dist[-1]
        dist = new
    return hit


def make_student(kind: str, cfg=None) -> Student:
    kinds = {"chain": ChainStudent, "grid2d": GridStudent, "chain_mdp": ChainMdpStudent}
    if kind not in kinds:
        raise ConfigError(f"unknown student kind {kind!r}; expected one of {sorted(kinds)}")
    return kinds[kind](cfg)
