"""Residual vectors of the Moré-Wild least-squares test functions.

Each function maps ``x`` (shape (n,)) to the residual vector ``f_i(x)``;
the objective is the sum of squared residuals. Definitions follow
Moré, Garbow & Hillstrom (1981) as collected by Moré & Wild (2009).
"""
import numpy as np

# data for bard, kowalik-osborne, meyer, osborne 1 and 2, heart8
BARD_Y = np.array([0.14, 0.18, 0.22, 0.25, 0.29, 0.32, 0.35, 0.39,
                   0.37, 0.58, 0.73, 0.96, 1.34, 2.10, 4.39])
KOWOSB_V = np.array([4.0, 2.0, 1.0, 0.5, 0.25, 0.167, 0.125, 0.1, 0.0833, 0.0714, 0.0625])
KOWOSB_Y = np.array([0.1957, 0.1947, 0.1735, 0.1600, 0.0844, 0.0627,
                     0.0456, 0.0342, 0.0323, 0.0235, 0.0246])
MEYER_Y = np.array([34780.0, 28610.0, 23650.0, 19630.0, 16370.0, 13720.0, 11540.0, 9744.0,
                    8261.0, 7030.0, 6005.0, 5147.0, 4427.0, 3820.0, 3307.0, 2872.0])
OSB1_Y = np.array([0.844, 0.908, 0.932, 0.936, 0.925, 0.908, 0.881, 0.850, 0.818, 0.784,
                   0.751, 0.718, 0.685, 0.658, 0.628, 0.603, 0.580, 0.558, 0.538, 0.522,
                   0.506, 0.490, 0.478, 0.467, 0.457, 0.448, 0.438, 0.431, 0.424, 0.420,
                   0.414, 0.411, 0.406])
OSB2_Y = np.array([1.366, 1.191, 1.112, 1.013, 0.991, 0.885, 0.831, 0.847, 0.786, 0.725,
                   0.746, 0.679, 0.608, 0.655, 0.616, 0.606, 0.602, 0.626, 0.651, 0.724,
                   0.649, 0.649, 0.694, 0.644, 0.624, 0.661, 0.612, 0.558, 0.533, 0.495,
                   0.500, 0.423, 0.395, 0.375, 0.372, 0.391, 0.396, 0.405, 0.428, 0.429,
                   0.523, 0.562, 0.607, 0.653, 0.672, 0.708, 0.633, 0.668, 0.645, 0.632,
                   0.591, 0.559, 0.597, 0.625, 0.739, 0.710, 0.729, 0.720, 0.636, 0.581,
                   0.428, 0.292, 0.162, 0.098, 0.054])
HEART8_Y = np.array([-0.69, -0.044, -1.57, -1.31, -2.65, 2.0, -12.6, 9.48])


def linear_full_rank(x, m):
    s = 2.0 * x.sum() / m + 1.0
    r = np.full(m, -s)
    r[: x.size] += x
    return r


def linear_rank_one(x, m):
    s = np.arange(1, x.size + 1) @ x
    return np.arange(1, m + 1) * s - 1.0


def linear_rank_one_zero(x, m):
    n = x.size
    s = np.arange(2, n) @ x[1:-1]
    r = np.arange(m) * s - 1.0
    r[-1] = -1.0
    return r


def rosenbrock(x):
    return np.array([10.0 * (x[1] - x[0] ** 2), 1.0 - x[0]])


def helical_valley(x):
    if x[0] > 0:
        theta = np.arctan(x[1] / x[0]) / (2 * np.pi)
    elif x[0] < 0:
        theta = np.arctan(x[1] / x[0]) / (2 * np.pi) + 0.5
    else:
        theta = np.copysign(0.25, x[1])
    return np.array([
        10.0 * (x[2] - 10.0 * theta),
        10.0 * (np.hypot(x[0], x[1]) - 1.0),
        x[2],
    ])


def powell_singular(x):
    return np.array([
        x[0] + 10.0 * x[1],
        np.sqrt(5.0) * (x[2] - x[3]),
        (x[1] - 2.0 * x[2]) ** 2,
        np.sqrt(10.0) * (x[0] - x[3]) ** 2,
    ])


def freudenstein_roth(x):
    return np.array([
        -13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1],
        -29.0 + x[0] + ((1.0 + x[1]) * x[1] - 14.0) * x[1],
    ])


def bard(x):
    i = np.arange(1, 16)
    u, v = i, 16 - i
    w = np.minimum(u, v)
    return BARD_Y - (x[0] + u / (x[1] * v + x[2] * w))


def kowalik_osborne(x):
    v = KOWOSB_V
    return KOWOSB_Y - x[0] * v * (v + x[1]) / (v * (v + x[2]) + x[3])


def meyer(x):
    t = 45.0 + 5.0 * np.arange(1, 17)
    return x[0] * np.exp(x[1] / (t + x[2])) - MEYER_Y


def watson(x):
    n = x.size
    t = np.arange(1, 30) / 29.0
    j = np.arange(n)
    powers = t[:, None] ** j[None, :]
    s1 = (powers[:, : n - 1] * (j[1:] * x[1:])[None, :]).sum(axis=1)
    s2 = powers @ x
    r = np.empty(31)
    r[:29] = s1 - s2**2 - 1.0
    r[29] = x[0]
    r[30] = x[1] - x[0] ** 2 - 1.0
    return r


def box_3d(x, m):
    t = 0.1 * np.arange(1, m + 1)
    return np.exp(-t * x[0]) - np.exp(-t * x[1]) - x[2] * (np.exp(-t) - np.exp(-10.0 * t))


def jennrich_sampson(x, m):
    i = np.arange(1, m + 1)
    return 2.0 + 2.0 * i - (np.exp(i * x[0]) + np.exp(i * x[1]))


def brown_dennis(x, m):
    t = np.arange(1, m + 1) / 5.0
    return (x[0] + t * x[1] - np.exp(t)) ** 2 + (x[2] + x[3] * np.sin(t) - np.cos(t)) ** 2


def chebyquad(x, m):
    n = x.size
    # shifted Chebyshev polynomials T_i(2x - 1), i = 1..m, by recurrence
    y = 2.0 * x - 1.0
    prev, cur = np.ones(n), y
    sums = np.empty(m)
    for i in range(m):
        sums[i] = cur.sum()
        prev, cur = cur, 2.0 * y * cur - prev
    r = sums / n
    i = np.arange(1, m + 1)
    even = i % 2 == 0
    r[even] += 1.0 / (i[even] ** 2 - 1.0)
    return r


def brown_almost_linear(x):
    n = x.size
    r = x + x.sum() - (n + 1.0)
    r[-1] = np.prod(x) - 1.0
    return r


def osborne_1(x):
    t = 10.0 * np.arange(33)
    return OSB1_Y - (x[0] + x[1] * np.exp(-t * x[3]) + x[2] * np.exp(-t * x[4]))


def osborne_2(x):
    t = np.arange(65) / 10.0
    model = (x[0] * np.exp(-t * x[4])
             + x[1] * np.exp(-((t - x[8]) ** 2) * x[5])
             + x[2] * np.exp(-((t - x[9]) ** 2) * x[6])
             + x[3] * np.exp(-((t - x[10]) ** 2) * x[7]))
    return OSB2_Y - model


def bdqrtic(x):
    n = x.size
    k = n - 4
    r = np.empty(2 * k)
    r[:k] = -4.0 * x[:k] + 3.0
    r[k:] = (x[:k] ** 2 + 2.0 * x[1:k + 1] ** 2 + 3.0 * x[2:k + 2] ** 2
             + 4.0 * x[3:k + 3] ** 2 + 5.0 * x[-1] ** 2)
    return r


def cube(x):
    r = np.empty(x.size)
    r[0] = x[0] - 1.0
    r[1:] = 10.0 * (x[1:] - x[:-1] ** 3)
    return r


def _mancino_sum(x):
    n = x.size
    i = np.arange(1, n + 1)[:, None]
    j = np.arange(1, n + 1)[None, :]
    v = np.sqrt(x[:, None] ** 2 + i / j)
    lv = np.log(v)
    return (v * (np.sin(lv) ** 5 + np.cos(lv) ** 5)).sum(axis=1)


def mancino(x):
    i = np.arange(1, x.size + 1)
    return 1400.0 * x + (i - 50.0) ** 3 + _mancino_sum(x)


def mancino_start(n):
    i = np.arange(1, n + 1)
    return -8.710996e-4 * ((i - 50.0) ** 3 + _mancino_sum(np.zeros(n)))


def heart8(x):
    a, b, c, d, t, u, v, w = x
    y = HEART8_Y
    return np.array([
        a + b - y[0],
        c + d - y[1],
        t * a + u * b - v * c - w * d - y[2],
        v * a + w * b + t * c + u * d - y[3],
        a * (t**2 - v**2) - 2 * c * t * v + b * (u**2 - w**2) - 2 * d * u * w - y[4],
        c * (t**2 - v**2) + 2 * a * t * v + d * (u**2 - w**2) + 2 * b * u * w - y[5],
        a * t * (t**2 - 3 * v**2) + c * v * (v**2 - 3 * t**2)
        + b * u * (u**2 - 3 * w**2) + d * w * (w**2 - 3 * u**2) - y[6],
        c * t * (t**2 - 3 * v**2) - a * v * (v**2 - 3 * t**2)
        + d * u * (u**2 - 3 * w**2) - b * w * (w**2 - 3 * u**2) - y[7],
    ])


def sphere(x):
    return np.array(x, dtype=float)


def wood(x):
    return np.array([
        10.0 * (x[1] - x[0] ** 2),
        1.0 - x[0],
        np.sqrt(90.0) * (x[3] - x[2] ** 2),
        1.0 - x[2],
        np.sqrt(10.0) * (x[1] + x[3] - 2.0),
        (x[1] - x[3]) / np.sqrt(10.0),
    ])


def trigonometric(x):
    n = x.size
    return n - np.cos(x).sum() + np.arange(1, n + 1) * (1.0 - np.cos(x)) - np.sin(x)


BEALE_Y = np.array([1.5, 2.25, 2.625])


def beale(x):
    i = np.arange(1, 4)
    return BEALE_Y - x[0] * (1.0 - x[1] ** i)
