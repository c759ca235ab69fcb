"""Independent reference implementations for the test suite.

Everything here is written as plain scalar loops (or textbook
recursions) on purpose: a vectorization or indexing bug in the package
cannot hide inside its own oracle. Keep this module free of smartran
imports.
"""

import numpy as np

# ---------------------------------------------------------------------------
# Two-state toy MDP with a known optimal action-value table.
#
# State 0, action 1 pays 1.0 and leads to state 1; every other (s, a)
# pays 0.25. Action 0 in state 1 returns to state 0, everything else
# lands in state 1. With gamma = 0.5 the optimal Q is small enough to
# verify by hand:
#   Q*(0,1) = 1.0  + 0.5 * max Q*(1,.) = 1.5
#   Q*(1,0) = 0.25 + 0.5 * max Q*(0,.) = 1.0
#   Q*(0,0) = 0.25 + 0.5 * max Q*(1,.) = 0.75
#   Q*(1,1) = 0.25 + 0.5 * max Q*(1,.) = 0.75

TOY_GAMMA = 0.5
TOY_REWARD = {(0, 0): 0.25, (0, 1): 1.0, (1, 0): 0.25, (1, 1): 0.25}
TOY_NEXT = {(0, 0): 1, (0, 1): 1, (1, 0): 0, (1, 1): 1}
TOY_STATES = 2
TOY_ACTIONS = 2


def toy_q_star(tol: float = 1e-13) -> np.ndarray:
    """Value iteration on the toy MDP until the Bellman residual dies."""
    q = np.zeros((TOY_STATES, TOY_ACTIONS))
    while True:
        residual = 0.0
        for s in range(TOY_STATES):
            for a in range(TOY_ACTIONS):
                target = TOY_REWARD[(s, a)] + TOY_GAMMA * q[TOY_NEXT[(s, a)]].max()
                residual = max(residual, abs(target - q[s, a]))
                q[s, a] = target
        if residual < tol:
            return q


# ---------------------------------------------------------------------------
# Signaling overhead and training complexity, recounted the dumb way.


def loop_overhead(bits_power: int, bits_csi: int, bits_subcarrier: int,
                  n_users: int, n_subcarriers: int) -> int:
    total = 0
    for _ in range(n_users):
        for _ in range(n_subcarriers):
            total += bits_power + bits_csi + bits_subcarrier
    return total


def loop_complexity(episodes: int, batch: int, layer_sizes) -> int:
    per_pass = 0
    for left, right in zip(layer_sizes[:-1], layer_sizes[1:]):
        per_pass += int(left) * int(right)
    return episodes * batch * per_pass


# ---------------------------------------------------------------------------
# Rates, both interference models, as scalar triple loops.


def loop_rate_centralized(h: np.ndarray, p: np.ndarray, rho: np.ndarray,
                          noise_w: float) -> float:
    """Sum-rate with cross-site interference from actual grants: the
    victim (b, u, k) hears every other site's granted power (excluding
    grants made to u itself) through its own gain to that site."""
    n_rrs, n_users, n_sub = h.shape
    total = 0.0
    for b in range(n_rrs):
        for u in range(n_users):
            for k in range(n_sub):
                if rho[b, u, k] == 0:
                    continue
                interference = 0.0
                for bp in range(n_rrs):
                    if bp == b:
                        continue
                    for up in range(n_users):
                        if up == u:
                            continue
                        interference += h[bp, u, k] * p[bp, up, k] * rho[bp, up, k]
                sinr = p[b, u, k] * h[b, u, k] / (noise_w + interference)
                total += np.log2(1.0 + sinr)
    return float(total)


def loop_interference_planning(h_large: np.ndarray, counts, p_max_w,
                               n_subcarriers: int, serving) -> np.ndarray:
    """Worst-case interference each user plans against: every foreign
    site spends its full budget in equal shares over its own
    (user, subcarrier) pairs, seen through large-scale gain only."""
    n_rrs, n_users = h_large.shape
    out = np.zeros(n_users)
    for u in range(n_users):
        for bp in range(n_rrs):
            if bp == serving[u]:
                continue
            n_bp = int(counts[bp])
            if n_bp == 0:
                continue
            share = float(p_max_w[bp]) / (n_bp * n_subcarriers)
            for _ in range(n_bp):
                out[u] += h_large[bp, u] * share
    return out


def loop_rate_distributed(h: np.ndarray, p: np.ndarray, rho: np.ndarray,
                          h_large: np.ndarray, counts, p_max_w,
                          serving, noise_w: float) -> float:
    n_rrs, n_users, n_sub = h.shape
    planning = loop_interference_planning(h_large, counts, p_max_w, n_sub, serving)
    total = 0.0
    for b in range(n_rrs):
        for u in range(n_users):
            if serving[u] != b:
                continue
            for k in range(n_sub):
                if rho[b, u, k] == 0:
                    continue
                sinr = p[b, u, k] * h[b, u, k] / (noise_w + planning[u])
                total += np.log2(1.0 + sinr)
    return float(total)


# ---------------------------------------------------------------------------
# TOC recomputation.


def loop_toc(rate: float, taus, gammas, alpha: float, beta: float,
             centralized: bool) -> float:
    if centralized:
        tau, gamma = sum(taus), sum(gammas)
    else:
        tau, gamma = max(taus), max(gammas)
    return rate - beta * tau - alpha * gamma


# ---------------------------------------------------------------------------
# Central finite differences over arbitrary parameter lists.


def fd_gradients(loss_fn, params, eps: float = 1e-6):
    """Central-difference gradient of loss_fn() w.r.t. each entry of
    each array in params (perturbed in place, then restored)."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        flat_p = p.ravel()
        flat_g = g.ravel()
        for i in range(flat_p.size):
            keep = flat_p[i]
            flat_p[i] = keep + eps
            hi = loss_fn()
            flat_p[i] = keep - eps
            lo = loss_fn()
            flat_p[i] = keep
            flat_g[i] = (hi - lo) / (2.0 * eps)
        grads.append(g)
    return grads
