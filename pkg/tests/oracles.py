"""Independent brute-force oracles used to cross-check the library.

These deliberately avoid the library's own algorithms: the game oracle
enumerates equalizing square subsystems and simplex grids instead of running
a simplex method; the value oracle walks the full control tree; the repair
oracle enumerates every coarse control sequence.
"""

from itertools import combinations, product

import numpy as np

from feastube import geometry as geo


def game_value_enum(Q):
    """Exact value of max_alpha min_row (Q @ alpha) by kernel enumeration.

    Every matrix game has an optimal mixture supported on a square
    equalizing subsystem (or a single column); taking the best feasible
    candidate over all of them gives the exact value.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    m, n = Q.shape
    best = -np.inf
    for j in range(n):
        best = max(best, float(Q[:, j].min()))
    for s in range(2, min(m, n) + 1):
        for rows in combinations(range(m), s):
            for cols in combinations(range(n), s):
                A = np.zeros((s + 1, s + 1))
                A[:s, :s] = Q[np.ix_(rows, cols)]
                A[:s, s] = -1.0
                A[s, :s] = 1.0
                rhs = np.zeros(s + 1)
                rhs[s] = 1.0
                try:
                    sol = np.linalg.solve(A, rhs)
                except np.linalg.LinAlgError:
                    continue
                y = sol[:s]
                if (y < -1e-10).any():
                    continue
                full = np.zeros(n)
                full[list(cols)] = np.clip(y, 0.0, None)
                total = full.sum()
                if total <= 0:
                    continue
                full /= total
                best = max(best, float((Q @ full).min()))
    return best


def game_value_grid(Q, resolution=24):
    """Lower bound on the game value from a barycentric grid of mixtures."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = Q.shape[1]
    best = -np.inf
    for comp in product(range(resolution + 1), repeat=n - 1):
        rest = resolution - sum(comp)
        if rest < 0:
            continue
        w = np.array(comp + (rest,), dtype=float) / resolution
        best = max(best, float((Q @ w).min()))
    return best


def tree_value(p, lam, t, x, steps, dt, level=0):
    """Exhaustive control-tree cost matching the solver's own transition rule
    (grid-aligned instances make this exact)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if not geo.is_feasible(p, t, x):
        return np.inf
    if steps == 0:
        return 0.0
    u = p.controls.at(t, level)
    best = np.inf
    for j in range(u.shape[0]):
        fv = np.asarray(p.f(t, x, u[j]), dtype=float).reshape(-1)
        lv = float(np.asarray(p.running_cost(t, x, u[j]), dtype=float))
        rest = tree_value(p, lam, t + dt, x + dt * fv, steps - 1, dt, level)
        best = min(best, np.exp(-lam * t) * lv * dt + rest)
    return best


def best_feasible_tracking(p, t0, ref_states, dt, level=0):
    """Smallest sup-distance to the reference over all strictly feasible
    coarse control sequences (exhaustive; keep the grid tiny)."""
    steps = len(ref_states) - 1
    u = p.controls.at(t0, level)
    best = np.inf
    for seq in product(range(u.shape[0]), repeat=steps):
        x = ref_states[0].copy()
        ok = True
        worst = 0.0
        for j, idx in enumerate(seq):
            t = t0 + j * dt
            fv = np.asarray(p.f(t, x, u[idx]), dtype=float).reshape(-1)
            x = x + dt * fv
            if not geo.is_feasible(p, t + dt, x) or geo.clearance_proxy(p, t + dt, x) <= 0:
                ok = False
                break
            worst = max(worst, float(np.linalg.norm(x - ref_states[j + 1])))
        if ok:
            best = min(best, worst)
    return best
