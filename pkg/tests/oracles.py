"""Brute-force reference computations, kept independent of the package code."""

import math
import random


def insertion_sort(arr):
    """Straight insertion sort in plain Python."""
    out = [int(x) for x in arr]
    for i in range(1, len(out)):
        v = out[i]
        j = i - 1
        while j >= 0 and out[j] > v:
            out[j + 1] = out[j]
            j -= 1
        out[j + 1] = v
    return out


def two_pass_mean_sd(col):
    n = len(col)
    mean = math.fsum(col) / n
    ss = math.fsum((x - mean) ** 2 for x in col)
    return mean, math.sqrt(ss / (n - 1))


def pearson(xs, ys):
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


def det3(m):
    """Cofactor expansion along the first row."""
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def inv3(m):
    """Adjugate over determinant."""
    d = det3(m)
    cof = [[0.0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            minor = [[m[r][c] for c in range(3) if c != j] for r in range(3) if r != i]
            cof[i][j] = (-1) ** (i + j) * (minor[0][0] * minor[1][1] - minor[0][1] * minor[1][0])
    return [[cof[j][i] / d for j in range(3)] for i in range(3)]


def matmul(a, b):
    return [[math.fsum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def symmetric_cubic_roots(m):
    """Eigenvalues of a symmetric 3x3 matrix from its characteristic cubic.

    Uses the trigonometric solution of det(m - x I) = 0, descending order.
    """
    p1 = m[0][1] ** 2 + m[0][2] ** 2 + m[1][2] ** 2
    q = (m[0][0] + m[1][1] + m[2][2]) / 3
    if p1 == 0.0:
        return sorted((m[0][0], m[1][1], m[2][2]), reverse=True)
    p2 = (m[0][0] - q) ** 2 + (m[1][1] - q) ** 2 + (m[2][2] - q) ** 2 + 2 * p1
    p = math.sqrt(p2 / 6)
    b = [[(m[i][j] - (q if i == j else 0.0)) / p for j in range(3)] for i in range(3)]
    r = max(-1.0, min(1.0, det3(b) / 2))
    phi = math.acos(r) / 3
    e1 = q + 2 * p * math.cos(phi)
    e3 = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
    e2 = 3 * q - e1 - e3
    return sorted((e1, e2, e3), reverse=True)


def random_correlation(rng: random.Random, n_rows: int = 12):
    """Correlation matrix of random mixed data, via the Pearson oracle."""
    mix = [[rng.uniform(-1, 1) for _ in range(3)] for _ in range(3)]
    rows = []
    for _ in range(n_rows):
        z = [rng.gauss(0, 1) for _ in range(3)]
        rows.append([sum(z[k] * mix[k][j] for k in range(3)) for j in range(3)])
    cols = list(zip(*rows))
    return [[1.0 if i == j else pearson(cols[i], cols[j]) for j in range(3)] for i in range(3)]
