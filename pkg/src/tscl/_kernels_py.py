"""Pure-Python implementations of the inner-loop kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature and
the same floating point operation order, so both backends produce bit-identical
results for the same inputs.
"""

from __future__ import annotations

import math


def ols_slope(ts, ys, n):
    """OLS slope of ``ys[:n]`` on ``ts[:n]``; NaN when undefined.

    Points are shifted by the first one and the normal equations are summed
    directly, so integer or dyadic data (constant runs, exact lines) give an
    exact result.
    """
    if n < 2:
        return math.nan
    t0 = ts[0]
    y0 = ys[0]
    st = 0.0
    sy = 0.0
    stt = 0.0
    sty = 0.0
    for k in range(n):
        dt = ts[k] - t0
        dy = ys[k] - y0
        st += dt
        sy += dy
        stt += dt * dt
        sty += dt * dy
    den = n * stt - st * st
    if den <= 0.0:
        return math.nan
    return (n * sty - st * sy) / den


def _gate(prereq, threshold):
    if threshold >= 1.0:
        return 1.0 if prereq >= 1.0 else 0.0
    g = (prereq - threshold) / (1.0 - threshold)
    return g if g > 0.0 else 0.0


def chain_train(skills, task, eta, threshold, delta):
    n = len(skills)
    g = 1.0 if task == 0 else _gate(skills[task - 1], threshold)
    s = skills[task]
    s = s + eta * g * (1.0 - s)
    for j in range(n):
        if j != task:
            skills[j] = skills[j] * (1.0 - delta)
    skills[task] = s
    return s


def chain_train_batch(skills, probs, eta, threshold, delta):
    n = len(skills)
    # gates read the pre-update skills of every task
    prev = 1.0
    for j in range(n):
        s = skills[j]
        g = 1.0 if j == 0 else _gate(prev, threshold)
        prev = s
        p = probs[j]
        s = s + eta * p * g * (1.0 - s)
        skills[j] = s * (1.0 - delta * (1.0 - p))


def _grid_gate(skills, side, i, j, threshold):
    g = 1.0
    if i > 0:
        g *= _gate(skills[(i - 1) * side + j], threshold)
    if j > 0:
        g *= _gate(skills[i * side + j - 1], threshold)
    return g


def grid_train(skills, side, task, eta, threshold, delta):
    n = side * side
    g = _grid_gate(skills, side, task // side, task % side, threshold)
    s = skills[task]
    s = s + eta * g * (1.0 - s)
    for j in range(n):
        if j != task:
            skills[j] = skills[j] * (1.0 - delta)
    skills[task] = s
    return s


def grid_train_batch(skills, side, probs, eta, threshold, delta):
    n = side * side
    gates = [_grid_gate(skills, side, k // side, k % side, threshold) for k in range(n)]
    for k in range(n):
        s = skills[k]
        p = probs[k]
        s = s + eta * p * gates[k] * (1.0 - s)
        skills[k] = s * (1.0 - delta * (1.0 - p))


def mdp_episode(q, length, cap, lr, discount, eps, goal_reward, step_penalty, draws):
    """One epsilon-greedy Q-learning episode; returns 1 if the goal was reached.

    ``q`` rows are indexed by remaining distance to the goal, column 0 is
    "reset" and column 1 "advance". ``draws`` holds ``2 * cap`` uniforms.
    """
    pos = 0
    for step in range(cap):
        d = length - pos
        if draws[2 * step] < eps:
            a = 1 if draws[2 * step + 1] < 0.5 else 0
        else:
            a = 1 if q[d, 1] > q[d, 0] else 0
        pos = pos + 1 if a == 1 else 0
        r = -step_penalty
        if pos == length:
            target = r + goal_reward
            q[d, a] += lr * (target - q[d, a])
            return 1
        nd = length - pos
        best = q[nd, 1] if q[nd, 1] > q[nd, 0] else q[nd, 0]
        target = r + discount * best
        q[d, a] += lr * (target - q[d, a])
    return 0


def mdp_greedy_success(q, length, cap):
    pos = 0
    for _ in range(cap):
        d = length - pos
        if q[d, 1] > q[d, 0]:
            pos += 1
            if pos == length:
                return 1
        else:
            pos = 0
    return 0
