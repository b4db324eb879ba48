from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_slope
from tscl.errors import DomainError, UsageError
from tscl.teachers import (
    TEACHERS,
    Algorithm,
    BatchOnlineTeacher,
    Formulation,
    NaiveTeacher,
    NoSlope,
    OnlineTeacher,
    Policy,
    QTable,
    RewardBuffer,
    SamplingTeacher,
    ScoreWindow,
    TeacherConfig,
    WindowTeacher,
    boltzmann_probs,
    eps_greedy_distribution,
    eps_greedy_select,
    make_teacher,
    ols_slope,
    preference,
    q_update,
)

ALL_KINDS = sorted(TEACHERS, key=lambda k: (k[0].value, k[1].value))


def rng(seed=0):
    return np.random.default_rng(seed)


def frequencies(draw, n, draws=100_000):
    counts = np.zeros(n)
    for _ in range(draws):
        counts[draw()] += 1
    return counts / draws


# --------------------------------------------------------------------------
# Q-table


@pytest.mark.parametrize(
    "q0, alpha, reward, expected",
    [(0.0, 0.1, 1.0, 0.1), (0.5, 1.0, -0.2, -0.2), (0.5, 0.1, 0.5, 0.5)],
)
def test_q_update_examples(q0, alpha, reward, expected):
    q = q_update([q0, 0.7], 0, reward, alpha)
    assert q[0] == pytest.approx(expected, abs=1e-15)
    assert q[1] == 0.7


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_q_update_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        q_update([0.0], 0, bad, 0.1)
    with pytest.raises(DomainError):
        QTable(2).update_all(np.array([0.0, bad]))


def test_q_update_task_out_of_range():
    with pytest.raises(DomainError):
        q_update([0.0, 0.0], 2, 1.0, 0.1)


@settings(max_examples=60, deadline=None)
@given(
    R=st.floats(1e-3, 1e3),
    alpha=st.floats(0.01, 1.0),
    units=st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=200),
)
def test_ewma_stays_within_reward_bound(R, alpha, units):
    table = QTable(3, alpha)
    for i, u in enumerate(units):
        table.update(i % 3, u * R)
        assert np.all(np.abs(table.q) <= R)
    vec = QTable(3, alpha)
    for u in units:
        vec.update_all(np.array([u, -u, 0.5 * u]) * R)
        assert np.all(np.abs(vec.q) <= R)


# --------------------------------------------------------------------------
# preference and selection


def test_preference_examples():
    assert preference([-0.3, 0.2], True).tolist() == [0.3, 0.2]
    assert preference([-0.3, 0.2], False).tolist() == [-0.3, 0.2]
    assert preference([0.0, 0.0, 0.0], True).tolist() == [0.0, 0.0, 0.0]


def test_preference_does_not_alias_input():
    q = np.array([1.0, -2.0])
    p = preference(q, False)
    p[0] = 9.0
    assert q[0] == 1.0


def test_eps_greedy_greedy_unique_argmax():
    g = rng(1)
    assert all(eps_greedy_select([0.3, 0.1], 0.0, g) == 0 for _ in range(1000))


def test_eps_greedy_symmetric_tie():
    g = rng(2)
    f = frequencies(lambda: eps_greedy_select([0.5, 0.5], 0.0, g), 2)
    assert f[0] == pytest.approx(0.5, abs=0.01)


def test_eps_greedy_frequency_oracle():
    g = rng(3)
    eps, n = 0.1, 2
    f = frequencies(lambda: eps_greedy_select([0.3, 0.1], eps, g), n)
    assert f[0] == pytest.approx(1 - eps + eps / n, abs=0.01)
    assert f[1] == pytest.approx(eps / n, abs=0.01)


def test_eps_greedy_errors():
    with pytest.raises(DomainError):
        eps_greedy_select([], 0.1, rng())
    with pytest.raises(DomainError):
        eps_greedy_select([1.0], 1.5, rng())


@settings(max_examples=40, deadline=None)
@given(
    q=st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=8),
    eps=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_abs_preference_is_negation_invariant(q, eps, seed):
    q = np.array(q)
    a, b = rng(seed), rng(seed)
    for _ in range(20):
        x = eps_greedy_select(preference(q, True), eps, a)
        y = eps_greedy_select(preference(-q, True), eps, b)
        assert x == y


def test_boltzmann_examples():
    assert boltzmann_probs([0.7, 0.7, 0.7], 0.3) == pytest.approx([1 / 3] * 3, abs=1e-15)
    p = boltzmann_probs([0.1, 0.0], 0.1)
    assert p[0] == pytest.approx(math.e / (math.e + 1), abs=1e-12)
    with np.errstate(over="raise"):
        p = boltzmann_probs([1000.0, 0.0], 0.0004)
    assert p[0] == 1.0 and p[1] == 0.0


@pytest.mark.parametrize("tau", [0.0, -1.0])
def test_boltzmann_rejects_bad_tau(tau):
    with pytest.raises(DomainError):
        boltzmann_probs([0.1, 0.2], tau)


@settings(max_examples=100, deadline=None)
@given(
    ints=st.lists(st.integers(-(2**20), 2**20), min_size=1, max_size=10),
    c=st.integers(-(2**20), 2**20),
    tau_exp=st.integers(-12, 2),
)
def test_boltzmann_shift_invariance_exact(ints, c, tau_exp):
    # dyadic preferences and integer shifts: pref + c is computed exactly
    pref = np.array(ints, dtype=float) / 2**10
    tau = 2.0**tau_exp
    a = boltzmann_probs(pref, tau)
    b = boltzmann_probs(pref + c, tau)
    assert np.array_equal(a, b)


@settings(max_examples=100, deadline=None)
@given(
    pref=st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=10),
    c=st.floats(-1.0, 1.0),
    tau=st.floats(1e-3, 10.0),
)
def test_boltzmann_shift_invariance_general(pref, c, tau):
    pref = np.array(pref)
    a = boltzmann_probs(pref, tau)
    b = boltzmann_probs(pref + c, tau)
    assert abs(a.sum() - 1.0) <= 1e-9
    np.testing.assert_allclose(a, b, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(
    pref=st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=20),
    tau=st.floats(1e-6, 1e3),
)
def test_boltzmann_is_a_distribution(pref, tau):
    p = boltzmann_probs(pref, tau)
    assert np.all(np.isfinite(p)) and np.all(p >= 0.0)
    assert abs(p.sum() - 1.0) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(
    pref=st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=10),
    eps=st.floats(0.0, 1.0),
)
def test_eps_greedy_distribution_is_a_distribution(pref, eps):
    p = eps_greedy_distribution(pref, eps, rng())
    assert np.all(p >= 0.0) and abs(p.sum() - 1.0) <= 1e-9


# --------------------------------------------------------------------------
# slope


@pytest.mark.parametrize(
    "points, expected",
    [
        ([(0, 0), (1, 1), (2, 2)], 1.0),
        ([(0, 5), (1, 5), (2, 5)], 0.0),
        ([(0, 0), (1, 2), (2, 1)], 0.5),
    ],
)
def test_ols_slope_examples(points, expected):
    assert ols_slope(points) == expected
    assert brute_force_slope(points) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("points", [[], [(1.0, 2.0)], [(3.0, 0.1), (3.0, 0.9), (3.0, 0.5)]])
def test_ols_slope_undefined(points):
    with pytest.raises(NoSlope):
        ols_slope(points)


def test_ols_slope_matches_brute_force_on_random_sets():
    g = rng(11)
    for _ in range(100):
        n = int(g.integers(2, 9))
        ts = g.choice(np.arange(-20, 21), size=n, replace=False) + g.uniform(-0.4, 0.4, n)
        ys = g.uniform(-1.0, 1.0, n)
        pts = list(zip(ts, ys))
        assert ols_slope(pts) == pytest.approx(brute_force_slope(pts), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(
    ts=st.lists(st.integers(-1000, 1000), min_size=2, max_size=12, unique=True),
    m=st.integers(-64, 64),
    c=st.integers(-1000, 1000),
    scale=st.sampled_from([1.0, 0.5, 0.25, 1 / 1024]),
)
def test_ols_slope_exact_on_lines_and_constants(ts, m, c, scale):
    slope = m * scale
    pts = [(t, slope * t + c * scale) for t in ts]
    assert ols_slope(pts) == slope
    assert ols_slope([(t, c * scale) for t in ts]) == 0.0


# --------------------------------------------------------------------------
# buffers


def test_score_window_keeps_last_k_in_order():
    w = ScoreWindow(2, 3)
    for t in range(1, 6):
        w.push(1, float(t), t * 0.1)
    assert [t for t, _ in w.entries(1)] == [3.0, 4.0, 5.0]
    assert w.size(0) == 0 and w.slope(0) == 0.0
    assert w.slope(1) == pytest.approx(0.1, abs=1e-12)


def test_score_window_rejects_time_going_backwards():
    w = ScoreWindow(1, 3)
    w.push(0, 5.0, 0.1)
    with pytest.raises(UsageError):
        w.push(0, 5.0, 0.2)


def test_reward_buffer_empty_samples_one():
    b = RewardBuffer(2, 3)
    assert b.sample(0, rng()) == 1.0
    for r in (0.1, 0.2, 0.3, 0.4):
        b.push(1, r)
    assert b.size(1) == 3
    draws = {b.sample(1, rng(s)) for s in range(50)}
    assert draws == {0.2, 0.3, 0.4}


# --------------------------------------------------------------------------
# teacher_next / teacher_observe examples


def cfg(**kw):
    return TeacherConfig(**kw)


def test_sampling_empty_buffers_uniform_choice():
    t = SamplingTeacher(3, cfg(algorithm="sampling"), rng(5))
    f = frequencies(t.next_action, 3, draws=30_000)
    assert f == pytest.approx([1 / 3] * 3, abs=0.01)
    assert t.values.tolist() == [1.0, 1.0, 1.0]


def test_batch_eps_greedy_distribution_example():
    t = make_teacher(cfg(algorithm="online", formulation="batch", epsilon=0.1), 3, rng())
    t.qtable.q[:] = [0.4, 0.1, 0.1]
    p = t.next_action()
    np.testing.assert_allclose(p, [0.9 + 0.1 / 3, 0.1 / 3, 0.1 / 3], atol=1e-15)


def test_online_boltzmann_frequency_example():
    t = OnlineTeacher(2, cfg(algorithm="online", policy="boltzmann", tau=0.0004), rng(7))
    t.qtable.q[:] = [0.001, 0.0]
    f = frequencies(t.next_action, 2)
    closed = math.exp(2.5) / (math.exp(2.5) + 1.0)
    assert closed == pytest.approx(0.9241, abs=1e-4)
    assert f[0] == pytest.approx(closed, abs=0.01)


def test_online_simple_two_observations():
    t = OnlineTeacher(1, cfg(algorithm="online"), rng())
    rewards = []
    for step, score in enumerate([0.2, 0.5], start=1):
        assert t.next_action() == 0
        before = t.last_score[0]
        t.observe(0, score, step)
        rewards.append(score - before)
    assert rewards == pytest.approx([0.2, 0.3], abs=1e-15)
    assert t.values[0] == pytest.approx(0.1 * 0.3 + 0.9 * (0.1 * 0.2), abs=1e-15)
    assert t.values[0] == pytest.approx(0.048, abs=1e-15)


def test_window_constant_scores_decay_q():
    t = WindowTeacher(2, cfg(epsilon=0.0), rng())
    t.qtable.q[:] = [0.0, 0.5]
    expected = 0.5
    for step in range(1, 31):
        assert t.next_action() == 1
        t.observe(1, 0.99, step)
        expected *= 0.9
        assert t.values[1] == pytest.approx(expected, rel=1e-12)
    assert t.values[0] == 0.0


def test_batch_online_example():
    t = BatchOnlineTeacher(2, cfg(algorithm="online", formulation="batch"), rng())
    t.prev_obs = np.array([0.1, 0.2])
    t.observe(t.next_action(), np.array([0.3, 0.1]), 1)
    np.testing.assert_allclose(t.values, [0.02, -0.01], atol=1e-15)
    assert preference(t.values, True)[1] == pytest.approx(0.01, abs=1e-15)


def test_naive_commits_for_k_calls_and_regresses_on_k():
    k = 4
    t = NaiveTeacher(3, cfg(algorithm="naive", window_k=k, epsilon=0.0), rng())
    t.qtable.q[:] = [0.0, 0.0, 1.0]
    scores = [0.1, 0.3, 0.2, 0.6]
    for step, s in enumerate(scores, start=1):
        assert t.next_action() == 2
        t.observe(2, s, step)
        if step < k:
            assert t.values[2] == 1.0
    slope = brute_force_slope(list(zip(range(1, k + 1), scores)))
    assert t.values[2] == pytest.approx(0.1 * slope + 0.9, abs=1e-12)


def test_batch_sampling_mixes_uniform():
    t = make_teacher(cfg(algorithm="sampling", formulation="batch", epsilon=0.2), 4, rng())
    p = t.next_action()
    assert sorted(p.tolist()) == pytest.approx([0.05, 0.05, 0.05, 0.85])


def test_batch_window_uses_every_task():
    t = make_teacher(cfg(algorithm="window", formulation="batch"), 2, rng())
    for step in range(1, 4):
        t.observe(t.next_action(), np.array([0.1 * step, 0.5]), step)
    # slope of task 0 is 0.1 every step once defined, task 1 stays flat
    assert t.values[0] == pytest.approx(0.1 * 0.1 + 0.9 * 0.1 * 0.1, abs=1e-12)
    assert t.values[1] == 0.0


# --------------------------------------------------------------------------
# protocol errors


def test_formulation_mismatch_is_usage_error():
    with pytest.raises(UsageError):
        OnlineTeacher(3, cfg(algorithm="online", formulation="batch"))
    with pytest.raises(UsageError):
        BatchOnlineTeacher(3, cfg(algorithm="online"))


def test_observing_unrequested_task_is_usage_error():
    t = WindowTeacher(3, cfg(epsilon=0.0), rng())
    a = t.next_action()
    with pytest.raises(UsageError):
        t.observe((a + 1) % 3, 0.5, 1)
    fresh = OnlineTeacher(3, cfg(algorithm="online"), rng())
    with pytest.raises(UsageError):
        fresh.observe(0, 0.5, 1)


def test_time_must_increase():
    t = OnlineTeacher(2, cfg(algorithm="online"), rng())
    t.observe(t.next_action(), 0.1, 5)
    with pytest.raises(UsageError):
        t.observe(t.next_action(), 0.1, 5)


def test_batch_observation_shape_checked():
    t = make_teacher(cfg(algorithm="window", formulation="batch"), 3, rng())
    with pytest.raises(UsageError):
        t.observe(t.next_action(), np.array([0.1, 0.2]), 1)
    with pytest.raises(UsageError):
        t.observe(t.next_action(), 0.5, 1)


@pytest.mark.parametrize(
    "kw",
    [{"alpha": 0.0}, {"alpha": 1.5}, {"epsilon": -0.1}, {"tau": 0.0}, {"window_k": 1},
     {"algorithm": "bogus"}, {"policy": "greedy"}],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        TeacherConfig(**kw)


# --------------------------------------------------------------------------
# properties over all eight teachers


def drive(teacher, steps, obs_rng):
    """Feed random observations; return the emitted actions."""
    n = teacher.n_tasks
    actions = []
    for t in range(1, steps + 1):
        a = teacher.next_action()
        if teacher.formulation is Formulation.SIMPLE:
            assert isinstance(a, int) and 0 <= a < n
            teacher.observe(a, float(obs_rng.uniform()), t)
        else:
            assert a.shape == (n,)
            assert np.all(a >= 0.0) and abs(a.sum() - 1.0) <= 1e-9
            teacher.observe(a, obs_rng.uniform(size=n), t)
        actions.append(a)
    return actions


config_strategy = st.builds(
    TeacherConfig,
    policy=st.sampled_from(list(Policy)),
    alpha=st.floats(0.01, 1.0),
    epsilon=st.floats(0.0, 1.0),
    tau=st.floats(1e-5, 1.0),
    window_k=st.integers(2, 12),
    use_abs=st.booleans(),
)


@pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: f"{k[0].value}-{k[1].value}")
@settings(max_examples=15, deadline=None)
@given(base=config_strategy, n=st.integers(1, 7), seed=st.integers(0, 2**32 - 1))
def test_actions_are_valid_for_every_teacher(kind, base, n, seed):
    algo, form = kind
    c = TeacherConfig(**{**base.__dict__, "algorithm": algo, "formulation": form})
    drive(make_teacher(c, n, rng(seed)), 40, rng(seed + 1))


@pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: f"{k[0].value}-{k[1].value}")
def test_teachers_are_deterministic(kind):
    algo, form = kind
    c = TeacherConfig(algorithm=algo, formulation=form, policy=Policy.BOLTZMANN, tau=0.05)
    runs = [drive(make_teacher(c, 4, rng(9)), 60, rng(10)) for _ in range(2)]
    for a, b in zip(*runs):
        assert np.array_equal(a, b)


def test_teacher_default_rng_comes_from_config_seed():
    c = TeacherConfig(algorithm=Algorithm.ONLINE, epsilon=1.0, seed=42)
    a, b = OnlineTeacher(5, c), OnlineTeacher(5, c)
    assert [a.next_action() for _ in range(20)] == [b.next_action() for _ in range(20)]
