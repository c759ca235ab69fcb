"""Per-slot network metrics.

Everything the mode decision trades off lives here:

* signaling overhead tau (bits) of running the allocation distributed
  at each site versus centralized at the BBU pool,
* sum rate under the two interference models (centralized allocations
  see the actual cross-cell transmissions; a site planning alone only
  knows large-scale gains and assumes neighbors split their budget
  equally over their own users and subcarriers),
* training complexity Gamma (weight multiplications) of the deep
  networks each mode would have to train at the current population,
* and the scalar TOC objective combining the three.

Conventions: powers in watts, gains linear, rates returned as summed
log2(1 + SINR) per subcarrier (multiply by the subcarrier bandwidth for
bits/s). Overheads and complexities are exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .netmodel import ChannelTensor, Topology, UserSet


class Mode(str, Enum):
    CNT = "cnt"  # centralized: BBU pool allocates for all sites
    DST = "dst"  # distributed: each site allocates for its own users

    def __str__(self) -> str:  # keeps CSV cells as bare strings
        return self.value


@dataclass(frozen=True)
class BitBudget:
    """Signaling bits per (user, subcarrier) pair, by field."""

    power: int
    csi: int
    subcarriers: int

    def __post_init__(self):
        for name in ("power", "csi", "subcarriers"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"bit budget field {name} must be a non-negative int")

    @property
    def per_pair(self) -> int:
        return int(self.power) + int(self.csi) + int(self.subcarriers)


@dataclass
class Allocation:
    """One slot's downlink grant: p[b, u, k] watts and rho[b, u, k] in {0, 1}."""

    mode: Mode
    p: np.ndarray  # (B, U, K) float64
    rho: np.ndarray  # (B, U, K) int8

    def validate(self, p_max_w: np.ndarray, atol: float = 1e-9) -> None:
        if self.p.shape != self.rho.shape:
            raise ValueError("p and rho shapes differ")
        if not np.all((self.rho == 0) | (self.rho == 1)):
            raise ValueError("rho must be 0/1")
        if np.any(self.p < -atol):
            raise ValueError("negative power")
        if np.any((self.rho == 0) & (self.p > atol)):
            raise ValueError("power granted on an unassigned pair")
        # one user per subcarrier per site
        if self.rho.size and np.any(self.rho.sum(axis=1) > 1):
            raise ValueError("subcarrier assigned to more than one user at a site")
        totals = self.p.sum(axis=(1, 2))
        if np.any(totals > np.asarray(p_max_w) + atol):
            raise ValueError("site power budget exceeded")


# ---------------------------------------------------------------------------
# Signaling overhead


def overhead_distributed(budget: BitBudget, n_users: int, n_subcarriers: int) -> int:
    """Bits a site must exchange to allocate locally:
    (power + csi + subcarrier bits) * |U_b| * |K_b|. Exact integer."""
    if n_users < 0 or n_subcarriers < 0:
        raise ValueError("counts must be non-negative")
    return budget.per_pair * int(n_users) * int(n_subcarriers)


def overhead_centralized(per_rrs_overheads) -> int:
    """Bits the BBU pool must exchange: the sum of every site's local
    overhead (it needs all sites' CSI and returns all grants)."""
    total = 0
    for v in per_rrs_overheads:
        iv = int(v)
        if iv < 0:
            raise ValueError("per-site overhead must be non-negative")
        total += iv
    return total


# ---------------------------------------------------------------------------
# Interference and rates


def intercell_interference_centralized(
    channels: ChannelTensor, alloc: Allocation, b: int, u: int, k: int
) -> float:
    """Interference at victim (b, u, k) from actual cross-site grants:
    sum over sites b' != b and users u' != u of h[b', u, k] * p[b', u', k]
    * rho[b', u', k]. Reference scalar implementation."""
    n_rrs, n_users = channels.h.shape[0], channels.h.shape[1]
    total = 0.0
    for bp in range(n_rrs):
        if bp == b:
            continue
        for up in range(n_users):
            if up == u:
                continue
            total += float(channels.h[bp, u, k]) * float(alloc.p[bp, up, k]) * float(
                alloc.rho[bp, up, k]
            )
    return total


def interference_matrix_centralized(channels: ChannelTensor, alloc: Allocation) -> np.ndarray:
    """(B, U, K) interference seen by each potential victim link.

    Vectorized form of intercell_interference_centralized: for victim
    (b, u, k), every other site contributes its per-subcarrier granted
    power (minus anything granted to u itself) weighted by the victim's
    gain to that site.
    """
    pr = alloc.p * alloc.rho
    totals = pr.sum(axis=1)  # (B, K) power each site spends on k
    contrib = channels.h * (totals[:, None, :] - pr)  # (B, U, K) per interferer
    return contrib.sum(axis=0)[None, :, :] - contrib


def rate_total_centralized(channels: ChannelTensor, alloc: Allocation, noise_w: float) -> float:
    """Sum over all links of log2(1 + SINR) with the actual-grant
    interference model. Unassigned links contribute zero."""
    if noise_w <= 0:
        raise ValueError("noise power must be positive")
    signal = channels.h * alloc.p * alloc.rho
    interference = interference_matrix_centralized(channels, alloc)
    return float(np.log2(1.0 + signal / (noise_w + interference)).sum())


def equal_share_power(p_max_w: float, n_users: int, n_subcarriers: int) -> float:
    """Budget split evenly over a site's (user, subcarrier) pairs."""
    pairs = int(n_users) * int(n_subcarriers)
    return 0.0 if pairs == 0 else float(p_max_w) / pairs


def intercell_interference_distributed(
    channels: ChannelTensor,
    topology: Topology,
    user_counts,
    b: int,
    u: int,
    k: int = 0,
) -> float:
    """Worst-case interference a lone site plans against for victim u
    (served by site b): every other site b' is assumed to spend its full
    budget in equal shares over its |U_b'| users and |K_b'| subcarriers,
    seen through the large-scale gain only. Independent of k.
    """
    counts = np.asarray(user_counts, dtype=np.int64)
    total = 0.0
    for bp in range(topology.rrs_count):
        if bp == b:
            continue
        n_bp = int(counts[bp])
        if n_bp == 0:
            continue
        k_bp = topology.subcarrier_count
        share = equal_share_power(float(topology.p_max_w[bp]), n_bp, k_bp)
        # u is served by b, so the u' != u exclusion removes nothing here
        total += n_bp * float(channels.h_large[bp, u]) * share
    return total


def interference_vector_distributed(
    channels: ChannelTensor, topology: Topology, users: UserSet
) -> np.ndarray:
    """(U,) worst-case planning interference per user, vectorized."""
    counts = users.user_counts().astype(np.float64)  # (B,)
    k = float(topology.subcarrier_count)
    # |U_b'| interferers each at p_max/(|U_b'| K) collapse to p_max/K per site
    site_load = np.where(counts > 0, np.asarray(topology.p_max_w) / k, 0.0)
    per_site = channels.h_large * site_load[:, None]  # (B, U)
    total = per_site.sum(axis=0)
    return total - per_site[users.serving, np.arange(users.n_users)]


def rate_matrix_distributed(
    channels: ChannelTensor,
    alloc: Allocation,
    topology: Topology,
    users: UserSet,
    noise_w: float,
) -> np.ndarray:
    """(B, U, K) per-link log2(1 + SINR) under the planning model.
    Nonzero only where the serving site granted the pair."""
    if noise_w <= 0:
        raise ValueError("noise power must be positive")
    rates = np.zeros_like(alloc.p)
    if users.n_users == 0:
        return rates
    interference = interference_vector_distributed(channels, topology, users)  # (U,)
    signal = channels.h * alloc.p * alloc.rho
    for b in range(topology.rrs_count):
        rows = users.rrs_members[b]
        if len(rows) == 0:
            continue
        denom = noise_w + interference[rows]
        rates[b, rows, :] = np.log2(1.0 + signal[b, rows, :] / denom[:, None])
    return rates


def rate_total_distributed(
    channels: ChannelTensor,
    alloc: Allocation,
    topology: Topology,
    users: UserSet,
    noise_w: float,
) -> float:
    return float(rate_matrix_distributed(channels, alloc, topology, users, noise_w).sum())


# ---------------------------------------------------------------------------
# Training complexity


@dataclass(frozen=True)
class ComplexityShape:
    """Size card of a training run: episodes E, minibatch M, and the
    dense layer chain input -> hidden* -> output."""

    episodes: int
    batch: int
    input_size: int
    hidden_sizes: tuple[int, ...]
    output_size: int

    def __post_init__(self):
        if self.episodes < 0 or self.batch < 0:
            raise ValueError("episodes and batch must be non-negative")
        if self.input_size < 1 or self.output_size < 1:
            raise ValueError("layer sizes must be >= 1")
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ValueError("need at least one positive hidden layer")

    @property
    def layer_chain(self) -> tuple[int, ...]:
        return (self.input_size, *self.hidden_sizes, self.output_size)


def _chain_multiplications(chain: tuple[int, ...]) -> int:
    return sum(int(a) * int(b) for a, b in zip(chain[:-1], chain[1:]))


def complexity_forward_cost(shape: ComplexityShape) -> int:
    """Weight multiplications of one forward pass (exact integer)."""
    return _chain_multiplications(shape.layer_chain)


def _training_complexity(shape: ComplexityShape) -> int:
    return int(shape.episodes) * int(shape.batch) * complexity_forward_cost(shape)


def centralized_shape(
    episodes: int,
    batch: int,
    hidden_sizes,
    n_users: int,
    n_subcarriers: int,
    n_rrs: int,
) -> ComplexityShape:
    """Layer chain of the BBU-pool network: the input spans every
    (site, user, subcarrier) gain, the output one power level and one
    assignment indicator per triple. Zero-user populations clamp to 1
    so the chain stays well formed."""
    pairs = max(int(n_users) * int(n_subcarriers) * int(n_rrs), 1)
    return ComplexityShape(
        episodes=episodes,
        batch=batch,
        input_size=pairs,
        hidden_sizes=tuple(int(h) for h in hidden_sizes),
        output_size=2 * pairs,
    )


def distributed_shape(
    episodes: int,
    batch: int,
    hidden_sizes,
    n_users_b: int,
    n_subcarriers_b: int,
) -> ComplexityShape:
    """Layer chain of one site's local network over its own pairs."""
    pairs = max(int(n_users_b) * int(n_subcarriers_b), 1)
    return ComplexityShape(
        episodes=episodes,
        batch=batch,
        input_size=pairs,
        hidden_sizes=tuple(int(h) for h in hidden_sizes),
        output_size=2 * pairs,
    )


def complexity_centralized(shape: ComplexityShape) -> int:
    """Gamma_Cnt = E * M * (sum of consecutive layer products)."""
    return _training_complexity(shape)


def complexity_distributed(shape: ComplexityShape) -> int:
    """Gamma_Dst at one site; same counting rule on the local chain."""
    return _training_complexity(shape)


# ---------------------------------------------------------------------------
# TOC objective


@dataclass(frozen=True)
class TocWeights:
    """Linear trade-off weights: TOC = rate - beta*tau - alpha*Gamma."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("TOC weights must be non-negative")


def toc_centralized(rate: float, tau_cnt: float, gamma_cnt: float, w: TocWeights) -> float:
    return float(rate) - w.beta * float(tau_cnt) - w.alpha * float(gamma_cnt)


def toc_distributed(rate: float, per_rrs_tau, per_rrs_gamma, w: TocWeights) -> float:
    """Distributed TOC is penalized by the slowest site on each axis:
    the max per-site overhead and the max per-site complexity."""
    taus = [float(t) for t in per_rrs_tau]
    gammas = [float(g) for g in per_rrs_gamma]
    if not taus or not gammas:
        raise ValueError("need at least one site")
    return float(rate) - w.beta * max(taus) - w.alpha * max(gammas)
