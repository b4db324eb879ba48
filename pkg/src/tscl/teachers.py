"""Teacher algorithms that schedule Student training by learning progress.

Four algorithms (Online, Naive, Window, Sampling) each come in a Simple
formulation, where the Teacher picks one task per step and observes that
task's score, and a Batch formulation, where the Teacher emits a probability
distribution over tasks and observes the score vector of all tasks.

All teachers share one protocol::

    action = teacher.next_action()
    ...train the student...
    teacher.observe(action, observation, t)

Simple actions are ``int`` task indices and observations are ``float`` scores.
Batch actions and observations are float64 arrays of length ``n_tasks``.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DomainError, UsageError


class Algorithm(str, enum.Enum):
    ONLINE = "online"
    NAIVE = "naive"
    WINDOW = "window"
    SAMPLING = "sampling"


class Formulation(str, enum.Enum):
    SIMPLE = "simple"
    BATCH = "batch"


class Policy(str, enum.Enum):
    EPS_GREEDY = "eps_greedy"
    BOLTZMANN = "boltzmann"


@dataclass(frozen=True)
class TeacherConfig:
    """Hyperparameters for one Teacher.

    ``window_k`` is the FIFO capacity for Window and Sampling and the repeat
    count for Naive. Sampling ignores ``policy``, ``alpha`` and ``tau``; the
    Batch Sampling teacher still uses ``epsilon`` to mix in a uniform
    distribution.
    """

    algorithm: Algorithm = Algorithm.WINDOW
    formulation: Formulation = Formulation.SIMPLE
    policy: Policy = Policy.EPS_GREEDY
    alpha: float = 0.1
    epsilon: float = 0.1
    tau: float = 0.0004
    window_k: int = 10
    use_abs: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        # accept plain strings from config files
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "formulation", Formulation(self.formulation))
        object.__setattr__(self, "policy", Policy(self.policy))
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if not self.tau > 0.0:
            raise DomainError(f"tau must be > 0, got {self.tau}")
        if self.window_k < 2:
            raise DomainError(f"window_k must be >= 2, got {self.window_k}")


# --------------------------------------------------------------------------
# shared machinery


class QTable:
    """Exponentially weighted moving average of per-task rewards."""

    def __init__(self, n_tasks: int, alpha: float = 0.1) -> None:
        if n_tasks < 1:
            raise DomainError("QTable needs at least one task")
        if not 0.0 < alpha <= 1.0:
            raise DomainError(f"alpha must be in (0, 1], got {alpha}")
        self.q = np.zeros(n_tasks)
        self.alpha = float(alpha)

    def __len__(self) -> int:
        return len(self.q)

    def update(self, task: int, reward: float) -> None:
        if not math.isfinite(reward):
            raise DomainError(f"reward must be finite, got {reward}")
        if not 0 <= task < len(self.q):
            raise DomainError(f"task {task} out of range for {len(self.q)} tasks")
        self.q[task] = self.alpha * reward + (1.0 - self.alpha) * self.q[task]

    def update_all(self, rewards: np.ndarray) -> None:
        rewards = np.asarray(rewards, dtype=float)
        if rewards.shape != self.q.shape:
            raise DomainError(f"expected {len(self.q)} rewards, got shape {rewards.shape}")
        if not np.all(np.isfinite(rewards)):
            raise DomainError("rewards must be finite")
        self.q = self.alpha * rewards + (1.0 - self.alpha) * self.q


def q_update(q: Sequence[float], task: int, reward: float, alpha: float) -> np.ndarray:
    """Return a copy of ``q`` with ``q[task]`` moved toward ``reward``."""
    table = QTable(len(q), alpha)
    table.q = np.array(q, dtype=float)
    table.update(task, reward)
    return table.q


def preference(q: Sequence[float], use_abs: bool) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.abs(q) if use_abs else q.copy()


def argmax_random_tie(values: np.ndarray, rng: np.random.Generator) -> int:
    """Index of the maximum, ties broken uniformly at random."""
    if len(values) == 0:
        raise DomainError("cannot take argmax of an empty vector")
    best = np.flatnonzero(values == values.max())
    if len(best) == 1:
        return int(best[0])
    return int(best[rng.integers(len(best))])


def eps_greedy_select(pref: Sequence[float], epsilon: float, rng: np.random.Generator) -> int:
    pref = np.asarray(pref, dtype=float)
    n = len(pref)
    if n == 0:
        raise DomainError("preference vector is empty")
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must be in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(n))
    return argmax_random_tie(pref, rng)


def eps_greedy_distribution(
    pref: Sequence[float], epsilon: float, rng: np.random.Generator
) -> np.ndarray:
    """``epsilon / N`` on every task plus ``1 - epsilon`` on the argmax."""
    pref = np.asarray(pref, dtype=float)
    n = len(pref)
    if n == 0:
        raise DomainError("preference vector is empty")
    p = np.full(n, epsilon / n)
    p[argmax_random_tie(pref, rng)] += 1.0 - epsilon
    return p


def boltzmann_probs(pref: Sequence[float], tau: float) -> np.ndarray:
    """Softmax of ``pref / tau``, stabilised by subtracting the maximum first.

    The shift happens before the division, so whenever ``pref + c`` is exact in
    floating point the result for ``pref + c`` is bit-identical to ``pref``.
    """
    if not tau > 0.0:
        raise DomainError(f"tau must be > 0, got {tau}")
    pref = np.asarray(pref, dtype=float)
    if len(pref) == 0:
        raise DomainError("preference vector is empty")
    z = np.exp((pref - pref.max()) / tau)
    return z / z.sum()


def sample_index(p: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one index from the distribution ``p`` by inverse CDF."""
    u = rng.random()
    k = int(np.searchsorted(np.cumsum(p), u, side="right"))
    return min(k, len(p) - 1)


class NoSlope(ValueError):
    """Raised when a learning-curve slope is undefined."""


def ols_slope(points: Sequence[tuple[float, float]]) -> float:
    """Ordinary least squares slope of ``y`` on ``t``.

    Raises
    ------
    NoSlope
        With fewer than two points or when every ``t`` is equal.
    """
    n = len(points)
    if n < 2:
        raise NoSlope("need at least two points")
    ts = np.ascontiguousarray([float(p[0]) for p in points])
    ys = np.ascontiguousarray([float(p[1]) for p in points])
    if ts.min() == ts.max():
        raise NoSlope("all abscissae are equal")
    slope = kernels.ols_slope(ts, ys, n)
    if math.isnan(slope):
        raise NoSlope("degenerate abscissae")
    return slope


def _slope_or_zero(ts: np.ndarray, ys: np.ndarray, n: int) -> float:
    s = kernels.ols_slope(ts, ys, n)
    return 0.0 if math.isnan(s) else s


class ScoreWindow:
    """Per-task FIFO of the last ``k`` ``(timestep, score)`` pairs."""

    def __init__(self, n_tasks: int, k: int) -> None:
        if k < 2:
            raise DomainError(f"window capacity must be >= 2, got {k}")
        self.k = k
        self._t = np.zeros((n_tasks, k))
        self._y = np.zeros((n_tasks, k))
        self._count = [0] * n_tasks
        self._head = [0] * n_tasks
        self._last_t = [-math.inf] * n_tasks

    def __len__(self) -> int:
        return len(self._count)

    def size(self, task: int) -> int:
        return self._count[task]

    def push(self, task: int, t: float, score: float) -> None:
        if t <= self._last_t[task]:
            raise UsageError(f"timestep {t} not after {self._last_t[task]} for task {task}")
        h = self._head[task]
        self._t[task, h] = t
        self._y[task, h] = score
        self._head[task] = (h + 1) % self.k
        if self._count[task] < self.k:
            self._count[task] += 1
        self._last_t[task] = t

    def entries(self, task: int) -> list[tuple[float, float]]:
        """Oldest-first contents of one task's window."""
        n = self._count[task]
        start = (self._head[task] - n) % self.k
        idx = [(start + i) % self.k for i in range(n)]
        return [(float(self._t[task, i]), float(self._y[task, i])) for i in idx]

    def slope(self, task: int) -> float:
        """Slope of the task's learning curve; 0.0 while it is undefined."""
        return _slope_or_zero(self._t[task], self._y[task], self._count[task])


class RewardBuffer:
    """Per-task FIFO of the last ``k`` rewards."""

    def __init__(self, n_tasks: int, k: int) -> None:
        self.k = k
        self._buf = [deque(maxlen=k) for _ in range(n_tasks)]

    def __len__(self) -> int:
        return len(self._buf)

    def size(self, task: int) -> int:
        return len(self._buf[task])

    def push(self, task: int, reward: float) -> None:
        self._buf[task].append(float(reward))

    def sample(self, task: int, rng: np.random.Generator) -> float:
        """Uniform draw from the buffer; an empty buffer yields 1.0."""
        buf = self._buf[task]
        if not buf:
            return 1.0
        return buf[int(rng.integers(len(buf)))]

    def sample_all(self, rng: np.random.Generator) -> np.ndarray:
        return np.array([self.sample(a, rng) for a in range(len(self._buf))])

    def means(self) -> np.ndarray:
        return np.array([sum(b) / len(b) if b else 0.0 for b in self._buf])


def check_distribution(p: np.ndarray, n_tasks: int, atol: float = 1e-9) -> None:
    if p.shape != (n_tasks,):
        raise UsageError(f"distribution must have shape ({n_tasks},), got {p.shape}")
    if np.any(p < 0.0) or abs(p.sum() - 1.0) > atol:
        raise DomainError(f"not a probability distribution: {p}")


# --------------------------------------------------------------------------
# teachers


class Teacher:
    """Common state of every teacher: task count, RNG, step clock."""

    formulation: Formulation = Formulation.SIMPLE

    def __init__(self, n_tasks: int, cfg: TeacherConfig, rng: np.random.Generator | None = None):
        if n_tasks < 1:
            raise DomainError("need at least one task")
        if cfg.formulation != self.formulation:
            raise UsageError(
                f"{type(self).__name__} is {self.formulation.value}, config asks for "
                f"{cfg.formulation.value}"
            )
        self.n_tasks = n_tasks
        self.cfg = cfg
        self.rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        self._last_t = -math.inf
        self._pending = None

    @property
    def values(self) -> np.ndarray:
        """Per-task numbers the teacher ranks tasks by (Q for most algorithms)."""
        return np.zeros(self.n_tasks)

    def next_action(self):
        raise NotImplementedError

    def observe(self, action, obs, t: int) -> None:
        raise NotImplementedError

    def _tick(self, t: int) -> None:
        if t <= self._last_t:
            raise UsageError(f"timestep {t} is not after {self._last_t}")
        self._last_t = t

    def _check_simple(self, action, obs) -> tuple[int, float]:
        if isinstance(action, np.ndarray) or isinstance(obs, (np.ndarray, list, tuple)):
            raise UsageError("simple teacher expects an integer task and a scalar score")
        if self._pending is None or int(action) != self._pending:
            raise UsageError(f"observation for task {action}, which was not requested")
        score = float(obs)
        if not math.isfinite(score):
            raise DomainError(f"score must be finite, got {score}")
        return int(action), score

    def _check_batch(self, obs) -> np.ndarray:
        if np.ndim(obs) != 1:
            raise UsageError("batch teacher expects a score vector")
        x = np.asarray(obs, dtype=float)
        if x.shape != (self.n_tasks,):
            raise UsageError(f"expected {self.n_tasks} scores, got {x.shape[0]}")
        if not np.all(np.isfinite(x)):
            raise DomainError("scores must be finite")
        return x


class _QTeacher(Teacher):
    """Teachers that rank tasks by a Q-table through eps-greedy or Boltzmann."""

    def __init__(self, n_tasks, cfg, rng=None):
        super().__init__(n_tasks, cfg, rng)
        self.qtable = QTable(n_tasks, cfg.alpha)

    @property
    def values(self) -> np.ndarray:
        return self.qtable.q.copy()

    def _select(self) -> int:
        pref = preference(self.qtable.q, self.cfg.use_abs)
        if self.cfg.policy is Policy.EPS_GREEDY:
            return eps_greedy_select(pref, self.cfg.epsilon, self.rng)
        return sample_index(boltzmann_probs(pref, self.cfg.tau), self.rng)

    def _distribution(self) -> np.ndarray:
        pref = preference(self.qtable.q, self.cfg.use_abs)
        if self.cfg.policy is Policy.EPS_GREEDY:
            return eps_greedy_distribution(pref, self.cfg.epsilon, self.rng)
        return boltzmann_probs(pref, self.cfg.tau)


class OnlineTeacher(_QTeacher):
    """Q tracks the change in a task's score since it was last trained."""

    def __init__(self, n_tasks, cfg, rng=None):
        super().__init__(n_tasks, cfg, rng)
        self.last_score = np.zeros(n_tasks)

    def next_action(self) -> int:
        self._pending = self._select()
        return self._pending

    def observe(self, action, obs, t):
        task, score = self._check_simple(action, obs)
        self._tick(t)
        self.qtable.update(task, score - self.last_score[task])
        self.last_score[task] = score
        self._pending = None


class NaiveTeacher(_QTeacher):
    """Trains the chosen task ``K`` times, then rewards the regression slope."""

    def __init__(self, n_tasks, cfg, rng=None):
        super().__init__(n_tasks, cfg, rng)
        self._scores: list[float] = []
        self._abscissa = np.arange(1.0, cfg.window_k + 1.0)

    def next_action(self) -> int:
        if self._pending is None:
            self._pending = self._select()
            self._scores = []
        return self._pending

    def observe(self, action, obs, t):
        task, score = self._check_simple(action, obs)
        self._tick(t)
        self._scores.append(score)
        if len(self._scores) == self.cfg.window_k:
            ys = np.asarray(self._scores)
            self.qtable.update(task, _slope_or_zero(self._abscissa, ys, len(ys)))
            self._pending = None


class WindowTeacher(_QTeacher):
    """Regresses the last ``K`` (timestep, score) pairs of the trained task."""

    def __init__(self, n_tasks, cfg, rng=None):
        super().__init__(n_tasks, cfg, rng)
        self.window = ScoreWindow(n_tasks, cfg.window_k)

    def next_action(self) -> int:
        self._pending = self._select()
        return self._pending

    def observe(self, action, obs, t):
        task, score = self._check_simple(action, obs)
        self._tick(t)
        self.window.push(task, float(t), score)
        self.qtable.update(task, self.window.slope(task))
        self._pending = None


class SamplingTeacher(Teacher):
    """Thompson-style: sample a recent reward per task, pick the largest magnitude."""

    def __init__(self, n_tasks, cfg, rng=None):
        super().__init__(n_tasks, cfg, rng)
        self.buffer = RewardBuffer(n_tasks, cfg.window_k)
        self.last_score = np.zeros(n_tasks)
        self._sampled = np.ones(n_tasks)

    @property
    def values(self) -> np.ndarray:
        return self._sampled.copy()

    def next_action(self) -> int:
        self._sampled = self.buffer.sample_all(self.rng)
        self._pending = argmax_random_tie(np.abs(self._sampled), self.rng)
        return self._pending

    def observe(self, action, obs, t):
        task, score = self._check_simple(action, obs)
        self._tick(t)
        self.buffer.push(task, score - self.last_score[task])
        self.last_score[task] = score
        self._pending = None


class BatchOnlineTeacher(_QTeacher):
    formulation = Formulation.BATCH

    def __init__(self, n_tasks, cfg, rng=None):
        super().__init__(n_tasks, cfg, rng)
        self.prev_obs = np.zeros(n_tasks)

    def next_action(self) -> np.ndarray:
        return self._distribution()

    def observe(self, action, obs, t):
        x = self._check_batch(obs)
        self._tick(t)
        self.qtable.update_all(x - self.prev_obs)
        self.prev_obs = x


class BatchNaiveTeacher(_QTeacher):
    """Holds one distribution for ``K`` steps, then regresses every task's scores."""

    formulation = Formulation.BATCH

    def __init__(self, n_tasks, cfg, rng=None):
        super().__init__(n_tasks, cfg, rng)
        self._dist: np.ndarray | None = None
        self._scores: list[np.ndarray] = []
        self._abscissa = np.arange(1.0, cfg.window_k + 1.0)

    def next_action(self) -> np.ndarray:
        if self._dist is None:
            self._dist = self._distribution()
            self._scores = []
        return self._dist.copy()

    def observe(self, action, obs, t):
        x = self._check_batch(obs)
        self._tick(t)
        self._scores.append(x)
        if len(self._scores) == self.cfg.window_k:
            ys = np.array(self._scores).T.copy()
            k = len(self._scores)
            slopes = np.array([_slope_or_zero(self._abscissa, ys[a], k) for a in range(self.n_tasks)])
            self.qtable.update_all(slopes)
            self._dist = None


class BatchWindowTeacher(_QTeacher):
    formulation = Formulation.BATCH

    def __init__(self, n_tasks, cfg, rng=None):
        super().__init__(n_tasks, cfg, rng)
        self.window = ScoreWindow(n_tasks, cfg.window_k)

    def next_action(self) -> np.ndarray:
        return self._distribution()

    def observe(self, action, obs, t):
        x = self._check_batch(obs)
        self._tick(t)
        for a in range(self.n_tasks):
            self.window.push(a, float(t), x[a])
        self.qtable.update_all(np.array([self.window.slope(a) for a in range(self.n_tasks)]))


class BatchSamplingTeacher(Teacher):
    formulation = Formulation.BATCH

    def __init__(self, n_tasks, cfg, rng=None):
        super().__init__(n_tasks, cfg, rng)
        self.buffer = RewardBuffer(n_tasks, cfg.window_k)
        self.prev_obs = np.zeros(n_tasks)
        self._sampled = np.ones(n_tasks)

    @property
    def values(self) -> np.ndarray:
        return self._sampled.copy()

    def next_action(self) -> np.ndarray:
        self._sampled = self.buffer.sample_all(self.rng)
        eps = self.cfg.epsilon
        p = np.full(self.n_tasks, eps / self.n_tasks)
        p[argmax_random_tie(np.abs(self._sampled), self.rng)] += 1.0 - eps
        return p

    def observe(self, action, obs, t):
        x = self._check_batch(obs)
        self._tick(t)
        r = x - self.prev_obs
        for a in range(self.n_tasks):
            self.buffer.push(a, r[a])
        self.prev_obs = x


TEACHERS: dict[tuple[Algorithm, Formulation], type[Teacher]] = {
    (Algorithm.ONLINE, Formulation.SIMPLE): OnlineTeacher,
    (Algorithm.NAIVE, Formulation.SIMPLE): NaiveTeacher,
    (Algorithm.WINDOW, Formulation.SIMPLE): WindowTeacher,
    (Algorithm.SAMPLING, Formulation.SIMPLE): SamplingTeacher,
    (Algorithm.ONLINE, Formulation.BATCH): BatchOnlineTeacher,
    (Algorithm.NAIVE, Formulation.BATCH): BatchNaiveTeacher,
    (Algorithm.WINDOW, Formulation.BATCH): BatchWindowTeacher,
    (Algorithm.SAMPLING, Formulation.BATCH): BatchSamplingTeacher,
}


def make_teacher(
    cfg: TeacherConfig, n_tasks: int, rng: np.random.Generator | None = None
) -> Teacher:
    return TEACHERS[(cfg.algorithm, cfg.formulation)](n_tasks, cfg, rng)
