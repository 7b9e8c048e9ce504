"""Independent reference computations used as test oracles.

Nothing here imports the package's GP code: these are plain-Python
re-derivations used to check the numpy/scipy implementation.
"""

import math


def kernel(a, b, length_scale=2.0, amp=1.0):
    return amp * amp * math.exp(-((a - b) ** 2) / (2.0 * length_scale * length_scale))


def dense_inverse(A):
    """Gauss-Jordan inverse with partial pivoting."""
    n = len(A)
    M = [list(map(float, row)) + [1.0 if i == j else 0.0 for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def dense_posterior(xs, ys, xq, length_scale=2.0, amp=1.0, noise=0.1):
    """Posterior mean and std at xq from the textbook formulas via an explicit inverse."""
    n = len(xs)
    K = [[kernel(xs[i], xs[j], length_scale, amp) + (noise * noise if i == j else 0.0)
          for j in range(n)] for i in range(n)]
    Kinv = dense_inverse(K) if n else []
    alpha = [sum(Kinv[i][j] * ys[j] for j in range(n)) for i in range(n)]
    means, stds = [], []
    for x in xq:
        ks = [kernel(x, xi, length_scale, amp) for xi in xs]
        means.append(sum(k * a for k, a in zip(ks, alpha)))
        quad = sum(ks[i] * Kinv[i][j] * ks[j] for i in range(n) for j in range(n))
        stds.append(math.sqrt(max(kernel(x, x, length_scale, amp) - quad, 0.0)))
    return means, stds


def central_difference(f, x, h=1e-4):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def logistic_grid_argmax(m, lambda1, lo=0.0, hi=12.0, n=1201, b=1.0):
    """Brute-force argmax of theta + lambda1 * theta' over an evenly spaced grid."""
    best_x, best_v = None, -math.inf
    for i in range(n):
        x = lo + i * (hi - lo) / (n - 1)
        s = 1.0 / (1.0 + math.exp(-x + m))
        v = s + b + lambda1 * s * (1.0 - s)
        if v > best_v:
            best_x, best_v = x, v
    return best_x
