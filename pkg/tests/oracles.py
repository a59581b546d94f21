"""Independent reference solvers used only by the tests."""
import numpy as np


def dual_objective(alphas, K, y, q, rho):
    """Dual objective for a batch of alpha rows."""
    ay = alphas * y
    return alphas @ q - 0.5 * np.einsum("bi,ij,bj->b", ay, K, ay) / (1.0 + rho)


def grid_search_dual(K, y, q, C, rho, step=1e-3, chunk=2_000_000):
    """Best objective over the feasible set with the last coordinate eliminated.

    Free coordinates run over a regular grid on [0, C]; the last one is fixed by
    the equality constraint and kept only if it lands inside the box.
    Only practical for N <= 3.
    """
    n = len(y)
    grid = np.linspace(0.0, C, int(round(C / step)) + 1)
    if n == 1:
        return float(dual_objective(np.zeros((1, 1)), K, y, q, rho)[0])
    mesh = np.stack(np.meshgrid(*([grid] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)
    best = -np.inf
    for start in range(0, len(mesh), chunk):
        free = mesh[start:start + chunk]
        last = -y[-1] * (free @ y[:-1])
        ok = (last >= -1e-12) & (last <= C + 1e-12)
        if not ok.any():
            continue
        alphas = np.column_stack([free[ok], np.clip(last[ok], 0, C)])
        best = max(best, float(dual_objective(alphas, K, y, q, rho).max()))
    return best


def cvxpy_dual(K, y, q, C, rho):
    import cvxpy as cp

    n = len(y)
    # factor the Gram matrix so the quadratic term is a sum of squares
    w, v = np.linalg.eigh(0.5 * (K + K.T))
    L = v * np.sqrt(np.clip(w, 0, None))
    a = cp.Variable(n)
    obj = q @ a - 0.5 / (1.0 + rho) * cp.sum_squares(L.T @ cp.multiply(a, y))
    prob = cp.Problem(cp.Maximize(obj), [a >= 0, a <= C, y @ a == 0])
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value), np.asarray(a.value)


def random_dual_problem(rng, n, C=None, rho=None):
    feats = rng.standard_normal((n, 3))
    K = feats @ feats.T
    y = rng.choice([-1.0, 1.0], n)
    y[0], y[-1] = 1.0, -1.0
    q = rng.uniform(0.2, 1.5, n)
    C = rng.uniform(0.5, 5.0) if C is None else C
    rho = rng.uniform(0.1, 2.0) if rho is None else rho
    return K, y, q, C, rho
