# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner-loop kernels. Mirrors ``_kernels_py`` operation for operation."""

from libc.math cimport NAN
from libc.stdlib cimport free, malloc


def ols_slope(double[::1] ts, double[::1] ys, Py_ssize_t n):
    cdef Py_ssize_t k
    cdef double t0, y0, dt, dy, den
    cdef double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0
    if n < 2:
        return NAN
    t0 = ts[0]
    y0 = ys[0]
    for k in range(n):
        dt = ts[k] - t0
        dy = ys[k] - y0
        st += dt
        sy += dy
        stt += dt * dt
        sty += dt * dy
    den = <double>n * stt - st * st
    if den <= 0.0:
        return NAN
    return (<double>n * sty - st * sy) / den


cdef inline double _gate(double prereq, double threshold) nogil:
    cdef double g
    if threshold >= 1.0:
        return 1.0 if prereq >= 1.0 else 0.0
    g = (prereq - threshold) / (1.0 - threshold)
    return g if g > 0.0 else 0.0


def chain_train(double[::1] skills, Py_ssize_t task, double eta, double threshold, double delta):
    cdef Py_ssize_t n = skills.shape[0], j
    cdef double g, s
    g = 1.0 if task == 0 else _gate(skills[task - 1], threshold)
    s = skills[task]
    s = s + eta * g * (1.0 - s)
    for j in range(n):
        if j != task:
            skills[j] = skills[j] * (1.0 - delta)
    skills[task] = s
    return s


def chain_train_batch(double[::1] skills, double[::1] probs, double eta, double threshold, double delta):
    cdef Py_ssize_t n = skills.shape[0], j
    cdef double prev = 1.0, s, g, p
    for j in range(n):
        s = skills[j]
        g = 1.0 if j == 0 else _gate(prev, threshold)
        prev = s
        p = probs[j]
        s = s + eta * p * g * (1.0 - s)
        skills[j] = s * (1.0 - delta * (1.0 - p))


cdef inline double _grid_gate(double[::1] skills, Py_ssize_t side, Py_ssize_t i, Py_ssize_t j,
                              double threshold) nogil:
    cdef double g = 1.0
    if i > 0:
        g *= _gate(skills[(i - 1) * side + j], threshold)
    if j > 0:
        g *= _gate(skills[i * side + j - 1], threshold)
    return g


def grid_train(double[::1] skills, Py_ssize_t side, Py_ssize_t task, double eta, double threshold,
               double delta):
    cdef Py_ssize_t n = side * side, j
    cdef double g, s
    g = _grid_gate(skills, side, task // side, task % side, threshold)
    s = skills[task]
    s = s + eta * g * (1.0 - s)
    for j in range(n):
        if j != task:
            skills[j] = skills[j] * (1.0 - delta)
    skills[task] = s
    return s


def grid_train_batch(double[::1] skills, Py_ssize_t side, double[::1] probs, double eta,
                     double threshold, double delta):
    cdef Py_ssize_t n = side * side, k
    cdef double s, p
    cdef double* gates = <double*> malloc(n * sizeof(double))
    if gates == NULL:
        raise MemoryError()
    try:
        for k in range(n):
            gates[k] = _grid_gate(skills, side, k // side, k % side, threshold)
        for k in range(n):
            s = skills[k]
            p = probs[k]
            s = s + eta * p * gates[k] * (1.0 - s)
            skills[k] = s * (1.0 - delta * (1.0 - p))
    finally:
        free(gates)


def mdp_episode(double[:, ::1] q, Py_ssize_t length, Py_ssize_t cap, double lr, double discount,
                double eps, double goal_reward, double step_penalty, double[::1] draws):
    cdef Py_ssize_t pos = 0, step, d, nd, a
    cdef double r, target, best
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


def mdp_greedy_success(double[:, ::1] q, Py_ssize_t length, Py_ssize_t cap):
    cdef Py_ssize_t pos = 0, step, d
    for step in range(cap):
        d = length - pos
        if q[d, 1] > q[d, 0]:
            pos += 1
            if pos == length:
                return 1
        else:
            pos = 0
    return 0
