"""Random-policy win probability over explored state graphs.

The random policy draws an action kind uniformly from the declared set
(Undo excluded), and a select kind spreads its share uniformly over all
4096 cells. Win probability from a state is the probability that this
policy eventually reaches a win terminal; self-edges slow absorption
but do not change it.

Fully explored graphs yield the exact value by solving the absorbing
chain p = A p + b (fixed point to 1e-12, dense solve fallback for small
systems). Partially explored graphs yield bounds: the lower bound
treats every frontier node as losing, the upper bound as winning; both
are exact fixed points of correspondingly modified systems, so they
bracket the true value and tighten monotonically as budgets grow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse

from .engine import ActionKind
from .stategraph import N_CELLS, StateGraph, TERMINAL_GAME_OVER, TERMINAL_NONE, WIN_TERMINALS


class SingularSystem(Exception):
    """The linear solve failed to converge; indicates a malformed graph."""


class Method(enum.Enum):
    EXACT_SOLVE = "exact_solve"
    FRONTIER_BOUNDS = "frontier_bounds"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class WinProbability:
    lower: float
    upper: float
    exact: Optional[float]
    method: Method

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower <= self.upper <= 1.0 + 1e-15:
            raise ValueError(f"invalid bounds [{self.lower}, {self.upper}]")
        if self.exact is not None and not (self.lower <= self.exact <= self.upper):
            raise ValueError("exact value outside bounds")


def _edge_weights(graph: StateGraph, digest: int) -> list[tuple[int, float]]:
    """Successor digests with random-policy probabilities; sums to 1."""
    kind_w = 1.0 / graph.random_kind_count
    select_w = kind_w / N_CELLS
    out = []
    for action, dst in graph.edges.get(digest, []):
        w = select_w if action.kind is ActionKind.SELECT else kind_w
        out.append((dst, w))
    rest = graph.select_rest.get(digest, 0)
    if rest:
        out.append((digest, rest * select_w))
    return out


def _absorption_probability(
    graph: StateGraph,
    win_value: dict[int, float],
    *,
    tol: float,
    max_iter: int,
    dense_limit: int,
) -> float:
    """Probability of absorbing with value 1, from the graph root.

    ``win_value`` assigns 0 or 1 to every non-expandable digest (true
    terminals plus frontier nodes under a bound policy). Expanded
    non-terminal nodes are transient.
    """
    if graph.root in win_value:
        return win_value[graph.root]

    transient = [
        d
        for d, n in graph.nodes.items()
        if d not in win_value and n.terminal == TERMINAL_NONE and n.expanded
    ]
    if not transient:
        return win_value.get(graph.root, 0.0)
    pos = {d: i for i, d in enumerate(transient)}
    m = len(transient)

    rows, cols, vals = [], [], []
    b = np.zeros(m)
    for d in transient:
        i = pos[d]
        total = 0.0
        for dst, w in _edge_weights(graph, d):
            total += w
            j = pos.get(dst)
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(w)
            else:
                b[i] += w * win_value.get(dst, 0.0)
        if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
            raise SingularSystem(
                f"outgoing probability mass {total} != 1 at node {d:016x}"
            )
    A = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(m, m))

    # Fixed point from zero converges monotonically to the minimal
    # solution, which is the true absorption probability even when the
    # graph contains closed classes that never absorb.
    p = np.zeros(m)
    for _ in range(max_iter):
        nxt = A.dot(p) + b
        delta = float(np.max(np.abs(nxt - p)))
        p = nxt
        if delta < tol:
            return float(p[pos[graph.root]])

    if m <= dense_limit:
        return _dense_absorption(graph, win_value, transient, pos, b, A)
    raise SingularSystem(
        f"fixed point did not reach tol={tol} within {max_iter} iterations on {m} nodes"
    )


def _dense_absorption(graph, win_value, transient, pos, b, A) -> float:
    """Direct solve on the subsystem that can actually reach value mass.

    States with no path to a positive-value absorber have probability
    exactly zero; removing them first keeps (I - A) nonsingular even
    when the graph contains closed recurrent classes.
    """
    m = len(transient)
    can = b > 0
    A_csc = A.tocsc()
    frontier = list(np.nonzero(can)[0])
    while frontier:
        j = frontier.pop()
        start, end = A_csc.indptr[j], A_csc.indptr[j + 1]
        for i in A_csc.indices[start:end]:
            if not can[i]:
                can[i] = True
                frontier.append(i)
    idx = np.nonzero(can)[0]
    if idx.size == 0:
        return 0.0
    sub = A.toarray()[np.ix_(idx, idx)]
    try:
        sol = np.linalg.solve(np.eye(idx.size) - sub, b[idx])
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    p = np.zeros(m)
    p[idx] = sol
    return float(p[pos[graph.root]])


def estimate_win_probability(
    graph: StateGraph,
    *,
    tol: float = 1e-12,
    max_iter: int = 200_000,
    dense_limit: int = 5_000,
) -> WinProbability:
    """Exact win probability on fully explored graphs, bounds otherwise."""
    if not graph.nodes:
        raise ValueError("graph has no nodes")

    terminal_values = {
        d: (1.0 if n.terminal in WIN_TERMINALS else 0.0)
        for d, n in graph.nodes.items()
        if n.terminal != TERMINAL_NONE
    }

    if graph.stats.fully_explored:
        exact = _absorption_probability(
            graph, terminal_values, tol=tol, max_iter=max_iter, dense_limit=dense_limit
        )
        exact = min(1.0, max(0.0, exact))
        return WinProbability(exact, exact, exact, Method.EXACT_SOLVE)

    frontier = graph.frontier_digests()
    low_values = dict(terminal_values)
    low_values.update({d: 0.0 for d in frontier})
    high_values = dict(terminal_values)
    high_values.update({d: 1.0 for d in frontier})
    lower = _absorption_probability(
        graph, low_values, tol=tol, max_iter=max_iter, dense_limit=dense_limit
    )
    upper = _absorption_probability(
        graph, high_values, tol=tol, max_iter=max_iter, dense_limit=dense_limit
    )
    lower = min(1.0, max(0.0, lower))
    upper = min(1.0, max(lower, min(1.0, upper)))
    return WinProbability(lower, upper, None, Method.FRONTIER_BOUNDS)


# ---------------------------------------------------------------------------
# Monte Carlo cross-check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloResult:
    rollouts: int
    wins: int
    capped: int
    win_rate: float


def monte_carlo_win_rate(
    graph: StateGraph,
    rollouts: int,
    *,
    seed: int = 0,
    step_cap: int = 10_000,
    batch: int = 250_000,
) -> MonteCarloResult:
    """Simulate random-policy episodes over a fully explored graph.

    Walkers advance in vectorized batches over a padded successor
    table. Episodes hitting the step cap count as losses; with the
    default cap this truncation is negligible next to sampling noise.
    """
    if not graph.stats.fully_explored:
        raise ValueError("Monte Carlo cross-check requires a fully explored graph")

    digests = list(graph.nodes)
    index = {d: i for i, d in enumerate(digests)}
    n = len(digests)
    width = 1
    table = []
    for d in digests:
        node = graph.nodes[d]
        if node.terminal != TERMINAL_NONE:
            table.append([])
            continue
        out = _edge_weights(graph, d)
        table.append(out)
        width = max(width, len(out))

    cums = np.ones((n, width))
    nexts = np.zeros((n, width), dtype=np.int64)
    absorbing = np.zeros(n, dtype=bool)
    winning = np.zeros(n, dtype=bool)
    for i, d in enumerate(digests):
        node = graph.nodes[d]
        if node.terminal != TERMINAL_NONE:
            absorbing[i] = True
            winning[i] = node.terminal in WIN_TERMINALS
            nexts[i, :] = i
            continue
        acc = 0.0
        for k, (dst, w) in enumerate(table[i]):
            acc += w
            cums[i, k] = acc
            nexts[i, k] = index[dst]
        nexts[i, len(table[i]) :] = nexts[i, len(table[i]) - 1]
        cums[i, -1] = 1.0 + 1e-12

    rng = np.random.default_rng(seed)
    root = index[graph.root]
    wins = 0
    capped = 0
    remaining = rollouts
    while remaining > 0:
        size = min(batch, remaining)
        remaining -= size
        pos = np.full(size, root, dtype=np.int64)
        active = ~absorbing[pos]
        steps = 0
        while active.any():
            if steps >= step_cap:
                capped += int(active.sum())
                pos = pos[~active]
                break
            act_idx = np.nonzero(active)[0]
            u = rng.random(act_idx.size)
            cur = pos[act_idx]
            choice = (u[:, None] > cums[cur]).sum(axis=1)
            pos[act_idx] = nexts[cur, np.minimum(choice, width - 1)]
            active[act_idx] = ~absorbing[pos[act_idx]]
            steps += 1
        wins += int(winning[pos].sum())

    return MonteCarloResult(rollouts, wins, capped, wins / rollouts)


def binomial_interval(p: float, n: int, confidence: float = 0.99) -> tuple[float, float]:
    """Normal-approximation interval around a known success probability."""
    from scipy.stats import norm

    z = float(norm.ppf(0.5 + confidence / 2.0))
    half = z * math.sqrt(max(p * (1.0 - p), 0.0) / n)
    return (max(0.0, p - half), min(1.0, p + half))


def zero_win_upper_bound(episodes: int, confidence: float = 0.95) -> float:
    """One-sided upper confidence bound on a rate after zero successes."""
    if episodes <= 0:
        return 1.0
    return 1.0 - (1.0 - confidence) ** (1.0 / episodes)
