"""Maximal-entropy flow on finite quotient graphs.

The discrete geodesic flow on a graph is the shift on non-backtracking dart
sequences.  Its maximal-entropy invariant measure is the stationary Markov
chain built from the Perron data of the non-backtracking dart operator:
transition weights p(d -> f) = h_f / (lambda h_d) on allowed pairs, entropy
log(lambda).  On a (q+1)-regular graph lambda = q and the chain is the
uniform q-way continuation.

Statistics: maximal runs along a target cycle (in either orientation, with
cyclic wrap), the logarithm-law statistic sup p_n / log t_n over a time
window, Khintchine-style event rates for run-length thresholds g(t), and the
closest-approach statistic to a marked vertex.  Long experiments run
vectorized across paths with online reducers; nothing stores full paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class FlowError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Graphs and darts
# ---------------------------------------------------------------------------


@dataclass
class QuotientGraph:
    """Undirected multigraph with each edge split into two darts."""

    n_vertices: int
    edges: list[tuple[int, int]]
    dart_tail: np.ndarray = field(init=False)
    dart_head: np.ndarray = field(init=False)
    dart_reversal: np.ndarray = field(init=False)

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise FlowError("edge endpoint out of range")
            if u == v:
                raise FlowError("loops are not supported")
        tails, heads = [], []
        for u, v in self.edges:
            tails += [u, v]
            heads += [v, u]
        self.dart_tail = np.array(tails, dtype=np.int64)
        self.dart_head = np.array(heads, dtype=np.int64)
        rev = np.arange(len(tails), dtype=np.int64)
        rev[0::2] += 1
        rev[1::2] -= 1
        self.dart_reversal = rev
        degs = np.bincount(self.dart_tail, minlength=self.n_vertices)
        if degs.min() < 3:
            raise FlowError("every vertex must have degree >= 3")
        if not self._connected():
            raise FlowError("graph must be connected")

    def _connected(self) -> bool:
        adj = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == self.n_vertices

    @property
    def n_darts(self) -> int:
        return 2 * len(self.edges)

    def out_darts(self, v: int) -> list[int]:
        return [d for d in range(self.n_darts) if self.dart_tail[d] == v]

    def continuations(self, d: int) -> list[int]:
        v = self.dart_head[d]
        r = self.dart_reversal[d]
        return [f for f in self.out_darts(int(v)) if f != r]

    def vertex_distances(self, x0: int) -> np.ndarray:
        dist = np.full(self.n_vertices, -1, dtype=np.int64)
        dist[x0] = 0
        frontier = [x0]
        while frontier:
            nxt = []
            for u in frontier:
                for d in self.out_darts(u):
                    v = int(self.dart_head[d])
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        return dist


def complete_graph(n: int) -> QuotientGraph:
    return QuotientGraph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def petersen_graph() -> QuotientGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return QuotientGraph(10, outer + spokes + inner)


def parse_edge_list(text: str) -> QuotientGraph:
    """Edge list, one `u v` pair per line; vertex names become indices."""
    names: dict[str, int] = {}
    edges = []
    for line in text.strip().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FlowError(f"bad edge line: {line!r}")
        ids = []
        for p in parts:
            if p not in names:
                names[p] = len(names)
            ids.append(names[p])
        edges.append((ids[0], ids[1]))
    return QuotientGraph(len(names), edges)


# ---------------------------------------------------------------------------
# Parry chain from the non-backtracking operator
# ---------------------------------------------------------------------------


@dataclass
class ParryChain:
    graph: QuotientGraph
    lam: float
    entropy: float
    cont: np.ndarray  # (n_darts, max_out) continuation table, -1 padded
    cont_prob: np.ndarray  # matching cumulative probabilities
    n_cont: np.ndarray
    pi: np.ndarray  # stationary distribution over darts

    def transition_prob(self, d: int, f: int) -> float:
        row = self.cont[d]
        for j, g in enumerate(row):
            if g == f:
                p = self.cont_prob[d, j] - (self.cont_prob[d, j - 1] if j else 0.0)
                return float(p)
        return 0.0


def _strongly_connected(n: int, succ) -> bool:
    def reach(start, fwd):
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in fwd(x):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    pred: list[list[int]] = [[] for _ in range(n)]
    for d in range(n):
        for f in succ(d):
            pred[f].append(d)
    return len(reach(0, succ)) == n and len(reach(0, lambda x: pred[x])) == n


def perron(G: QuotientGraph, tol: float = 1e-12, max_iter: int = 200_000) -> ParryChain:
    """Perron data of the non-backtracking dart operator by power iteration.

    Right and left vectors give the transition weights and the stationary
    distribution; the chain is rejected if the dart digraph is not strongly
    connected (the flow would not be irreducible).
    """
    nd = G.n_darts
    conts = [G.continuations(d) for d in range(nd)]
    if not _strongly_connected(nd, lambda d: conts[d]):
        raise FlowError("non-backtracking structure is not irreducible")
    max_out = max(len(c) for c in conts)
    cont = np.full((nd, max_out), -1, dtype=np.int64)
    for d, cs in enumerate(conts):
        cont[d, : len(cs)] = cs
    mask = cont >= 0
    safe = np.where(mask, cont, 0)

    def apply(vec):
        out = np.zeros(nd)
        np.add.at(out, safe.ravel(), np.repeat(vec, max_out) * mask.ravel())
        return out

    def apply_T(vec):
        gathered = np.where(mask, vec[safe], 0.0)
        return gathered.sum(axis=1)

    def power(op):
        v = np.ones(nd)
        lam = 1.0
        for _ in range(max_iter):
            w = op(v)
            lam_new = float(np.max(w))
            w = w / lam_new
            if np.max(np.abs(w - v)) < tol and abs(lam_new - lam) < tol:
                return lam_new, w
            v, lam = w, lam_new
        raise FlowError("power iteration did not converge")

    # apply_T(v)[d] = sum over continuations f of v[f]: the operator acting
    # on functions of the next dart (right vector h)
    lam_r, h = power(apply_T)
    lam_l, u = power(apply)
    lam = (lam_r + lam_l) / 2
    probs = np.where(mask, h[safe], 0.0) / (lam * np.maximum(h, 1e-300)[:, None])
    probs = probs / probs.sum(axis=1, keepdims=True)
    cum = np.cumsum(probs, axis=1)
    pi = u * h
    pi = pi / pi.sum()
    return ParryChain(
        graph=G,
        lam=lam,
        entropy=math.log(lam),
        cont=cont,
        cont_prob=cum,
        n_cont=mask.sum(axis=1),
        pi=pi,
    )


def hashimoto_spectrum(G: QuotientGraph) -> np.ndarray:
    """Dense eigenvalues of the dart operator (desk-scale cross-check)."""
    nd = G.n_darts
    B = np.zeros((nd, nd))
    for d in range(nd):
        for f in G.continuations(d):
            B[d, f] = 1.0
    return np.linalg.eigvals(B)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_path(chain: ParryChain, T: int, seed: int) -> list[int]:
    """One dart path of length T: start from pi, step by the chain."""
    if T < 1:
        raise FlowError("T must be >= 1")
    rng = np.random.default_rng(seed)
    d = int(rng.choice(len(chain.pi), p=chain.pi))
    out = [d]
    for _ in range(T - 1):
        u = rng.random()
        row = chain.cont_prob[d]
        j = int(np.searchsorted(row, u, side="right"))
        j = min(j, int(chain.n_cont[d]) - 1)
        d = int(chain.cont[d, j])
        out.append(d)
    return out


# ---------------------------------------------------------------------------
# Cycle targets and penetration records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CycleTarget:
    """Closed non-backtracking dart cycle (wrap included)."""

    darts: tuple[int, ...]

    @classmethod
    def from_vertices(cls, G: QuotientGraph, vertices) -> "CycleTarget":
        vs = list(vertices)
        if len(vs) < 3:
            raise FlowError("cycle needs at least 3 vertices")
        darts = []
        for a, b in zip(vs, vs[1:] + vs[:1]):
            found = None
            for d in G.out_darts(a):
                if int(G.dart_head[d]) == b:
                    found = d
                    break
            if found is None:
                raise FlowError(f"no edge {a}-{b}")
            darts.append(found)
        for d, f in zip(darts, darts[1:] + darts[:1]):
            if G.dart_reversal[d] == f:
                raise FlowError("cycle backtracks")
        return cls(tuple(darts))

    @property
    def length(self) -> int:
        return len(self.darts)


@dataclass(frozen=True)
class PenetrationRecord:
    entry_time: int
    run_length: int

    def turns(self, L: int) -> int:
        return self.run_length // L


def _cycle_positions(G: QuotientGraph, C: CycleTarget):
    """Forward and reversed positions of each dart on the cycle."""
    nd = G.n_darts
    fpos = np.full(nd, -1, dtype=np.int64)
    rpos = np.full(nd, -1, dtype=np.int64)
    for i, d in enumerate(C.darts):
        fpos[d] = i
        rpos[int(G.dart_reversal[d])] = i
    return fpos, rpos


def penetration(G: QuotientGraph, path, C: CycleTarget) -> list[PenetrationRecord]:
    """Maximal aligned runs of the path along lifts of the cycle.

    A run follows consecutive cycle darts in one orientation (wrap allowed);
    orientation cannot flip inside a run without backtracking.
    """
    L = C.length
    fpos, rpos = _cycle_positions(G, C)
    records = []
    run_start = None
    f_prev = r_prev = -1
    for t, d in enumerate(path):
        f, r = int(fpos[d]), int(rpos[d])
        if run_start is not None:
            cont_f = f >= 0 and f_prev >= 0 and f == (f_prev + 1) % L
            cont_r = r >= 0 and r_prev >= 0 and r == (r_prev - 1) % L
            if cont_f or cont_r:
                f_prev, r_prev = (f if cont_f else -1), (r if cont_r else -1)
                continue
            records.append(PenetrationRecord(run_start, t - run_start))
            run_start = None
        if f >= 0 or r >= 0:
            run_start = t
            f_prev, r_prev = f, r
    if run_start is not None:
        records.append(PenetrationRecord(run_start, len(path) - run_start))
    return records


def total_time_on_cycle(records) -> int:
    return sum(r.run_length for r in records)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

NO_EVENT = float("nan")


def loglaw_statistic(records, T: int) -> float:
    """sup of run/log(entry) over runs entering in [sqrt(T), T]."""
    if T < 100:
        raise FlowError("window too short")
    lo = math.sqrt(T)
    best = None
    for r in records:
        if lo <= r.entry_time <= T and r.entry_time > 1:
            v = r.run_length / math.log(r.entry_time)
            best = v if best is None else max(best, v)
    return NO_EVENT if best is None else best


def loglaw_target(chain: ParryChain, delta0: float = 0.0) -> float:
    return 1.0 / (chain.entropy - delta0)


def rate_log(kappa: float):
    """g(t) = kappa log(1+t)."""

    def g(t):
        return kappa * math.log1p(t)

    return g


def khintchine_event_rate(
    G: QuotientGraph,
    C: CycleTarget,
    g,
    T: int,
    n_paths: int,
    seed: int,
    chain: ParryChain | None = None,
) -> float:
    """Fraction of paths with some run at t_n in [T/2, T] of length >= g(t_n).

    g may be None (the +infinity sentinel: rate 0).
    """
    if g is None:
        return 0.0
    chain = chain if chain is not None else perron(G)
    stats = run_experiment(chain, C, T, n_paths, seed, g=g, khintchine_window=(T / 2, T))
    return float(np.mean(stats["event_counts"] >= 1))


def closest_approach_statistic(G: QuotientGraph, path, x0: int, T: int) -> float:
    """inf over t in [sqrt(T), T] of d(path(t), x0)/log t."""
    dist = G.vertex_distances(x0)
    lo = math.sqrt(T)
    best = None
    for t, d in enumerate(path):
        if t < lo or t > T or t <= 1:
            continue
        v = dist[int(G.dart_head[d])] / math.log(t)
        best = v if best is None else min(best, v)
    return NO_EVENT if best is None else best


# ---------------------------------------------------------------------------
# Vectorized experiment runner (paths in parallel, online reducers)
# ---------------------------------------------------------------------------


def run_experiment(
    chain: ParryChain,
    C: CycleTarget | None,
    T: int,
    n_paths: int,
    seed: int,
    g=None,
    khintchine_window: tuple[float, float] | None = None,
    x0: int | None = None,
):
    """Simulate n_paths non-backtracking paths of length T and reduce online.

    Returns per-path arrays: loglaw sup statistic over [sqrt(T), T], counts
    of Khintchine events (runs with length >= g(entry) inside the window),
    total time on the target, and the closest-approach statistic when a
    vertex x0 is given.  Memory stays O(n_paths).
    """
    G = chain.graph
    rng = np.random.default_rng(seed)
    d = rng.choice(len(chain.pi), size=n_paths, p=chain.pi).astype(np.int64)

    if C is not None:
        L = C.length
        fpos, rpos = _cycle_positions(G, C)
    lo_t = math.sqrt(T)
    k_lo, k_hi = khintchine_window if khintchine_window else (T / 2, T)

    run_start = np.full(n_paths, -1, dtype=np.int64)
    f_prev = np.full(n_paths, -1, dtype=np.int64)
    r_prev = np.full(n_paths, -1, dtype=np.int64)
    sup_stat = np.full(n_paths, np.nan)
    event_counts = np.zeros(n_paths, dtype=np.int64)
    time_on = np.zeros(n_paths, dtype=np.int64)

    if x0 is not None:
        vdist = G.vertex_distances(x0).astype(float)
        min_approach = np.full(n_paths, np.inf)

    def close_runs(mask, t):
        """Finish runs for masked paths at time t and fold into reducers."""
        idx = np.where(mask)[0]
        if len(idx) == 0:
            return
        entries = run_start[idx]
        lengths = t - entries
        time_on[idx] += lengths
        ok = (entries >= lo_t) & (entries <= T) & (entries > 1)
        if ok.any():
            vals = lengths[ok] / np.log(entries[ok])
            tgt = idx[ok]
            cur = sup_stat[tgt]
            sup_stat[tgt] = np.where(np.isnan(cur), vals, np.maximum(cur, vals))
        if g is not None:
            kin = (entries >= k_lo) & (entries <= k_hi)
            if kin.any():
                thresholds = np.array([g(float(e)) for e in entries[kin]])
                event_counts[idx[kin]] += (lengths[kin] >= thresholds).astype(np.int64)
        run_start[idx] = -1

    for t in range(T):
        if C is not None:
            f = fpos[d]
            r = rpos[d]
            active = run_start >= 0
            cont_f = active & (f >= 0) & (f_prev >= 0) & (f == (f_prev + 1) % L)
            cont_r = active & (r >= 0) & (r_prev >= 0) & (r == (r_prev - 1) % L)
            cont = cont_f | cont_r
            close_runs(active & ~cont, t)
            on = (f >= 0) | (r >= 0)
            starting = on & (run_start < 0)
            run_start[starting] = t
            f_prev = np.where(cont_f | starting, f, -1)
            r_prev = np.where(cont_r | starting, r, -1)
        if x0 is not None and t >= lo_t and t > 1:
            vals = vdist[G.dart_head[d]] / math.log(t)
            np.minimum(min_approach, vals, out=min_approach)
        # advance every path one step
        u = rng.random(n_paths)
        rows = chain.cont_prob[d]
        j = (rows < u[:, None]).sum(axis=1)
        j = np.minimum(j, chain.n_cont[d] - 1)
        d = chain.cont[d, j]

    if C is not None:
        close_runs(run_start >= 0, T)
    out = {
        "sup_stat": sup_stat,
        "event_counts": event_counts,
        "time_on_target": time_on,
        "final_darts": d,
    }
    if x0 is not None:
        out["min_approach"] = np.where(np.isinf(min_approach), np.nan, min_approach)
    return out
