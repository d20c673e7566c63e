"""Transition graph of the one-block state map, and the chaos certificate.

Vertices are all N-bit words; there is an edge x -> y labeled m whenever
consuming block m in state x yields state y. Strong connectivity of this
graph is a sufficient condition for the mode to be chaotic (it forces both
strong transitivity and dense periodic points), so the verdict reported
here is one-directional: a failed check never asserts non-chaos.

Edge enumeration is the 2^N x 2^N loop over (state, block); n_bits is
capped at 12 and the inner loop is vectorized with numpy. Construction can
be partitioned across workers; the merged result is identical to the
sequential one.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import CONVENTION_XOR, SystemConfig

GRAPH_MAX_BITS = 12

SUFFICIENT_CONDITION_HOLDS = "sufficient-condition-holds"
CONDITION_FAILS = "condition-fails"


@dataclass(frozen=True)
class TransitionGraph:
    """Deduplicated adjacency with one witness block per edge.

    ``targets[x]`` is a sorted integer array of the states reachable from x
    in one step; ``witnesses[x][i]`` is the smallest block value realizing
    the edge x -> targets[x][i].
    """

    n_bits: int
    targets: tuple
    witnesses: tuple

    @property
    def vertex_count(self) -> int:
        return 1 << self.n_bits

    @property
    def edge_count(self) -> int:
        return sum(len(t) for t in self.targets)

    def is_complete(self) -> bool:
        """True iff every ordered pair of vertices is an edge."""
        full = self.vertex_count
        return all(len(t) == full for t in self.targets)

    def witness(self, source: int, target: int) -> int:
        """The stored block label for edge source -> target."""
        row = self.targets[source]
        i = int(np.searchsorted(row, target))
        if i == len(row) or row[i] != target:
            raise KeyError(f"no edge {source} -> {target}")
        return int(self.witnesses[source][i])


def _edges_for_vertex(cfg: SystemConfig, x: int, blocks: np.ndarray, f_arr: np.ndarray):
    mask = (1 << cfg.n_bits) - 1
    forward = np.asarray(cfg.cipher.forward_table, dtype=np.int64)
    if cfg.convention == CONVENTION_XOR:
        combined = np.bitwise_xor(x, blocks)
    else:
        combined = np.bitwise_or(
            np.bitwise_and(x, blocks),
            np.bitwise_and(int(f_arr[x]), np.bitwise_xor(mask, blocks)),
        )
    targets_all = forward[combined]
    # np.unique returns sorted targets with the index of each first
    # occurrence; blocks are scanned in increasing order, so the witness is
    # the smallest block realizing the edge.
    targets, first = np.unique(targets_all, return_index=True)
    return targets, blocks[first]


def build_graph(cfg: SystemConfig, workers: int = 1) -> TransitionGraph:
    """Enumerate every (state, block) pair and record the reachable states."""
    n_bits = cfg.n_bits
    if n_bits > GRAPH_MAX_BITS:
        raise ValueError(
            f"graph construction is capped at n_bits <= {GRAPH_MAX_BITS} "
            f"(2^N x 2^N edge enumeration), got {n_bits}"
        )
    if workers < 1:
        raise ValueError("workers must be >= 1")
    size = 1 << n_bits
    blocks = np.arange(size, dtype=np.int64)
    f_arr = np.asarray(cfg.inner_function, dtype=np.int64)

    def chunk(bounds):
        lo, hi = bounds
        return [_edges_for_vertex(cfg, x, blocks, f_arr) for x in range(lo, hi)]

    if workers == 1 or size < workers:
        rows = chunk((0, size))
    else:
        step = -(-size // workers)
        spans = [(lo, min(lo + step, size)) for lo in range(0, size, step)]
        rows = []
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(chunk, spans):
                rows.extend(part)

    return TransitionGraph(
        n_bits=n_bits,
        targets=tuple(t for t, _ in rows),
        witnesses=tuple(w for _, w in rows),
    )


def strongly_connected(graph: TransitionGraph):
    """Tarjan SCC decomposition with an explicit stack (no recursion).

    Returns (is_strongly_connected, sccs) where sccs is a list of vertex
    lists in the order Tarjan emits them (reverse topological).
    """
    n = graph.vertex_count
    rows = [np.asarray(t).tolist() for t in graph.targets]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    scc_stack = []
    sccs = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        frames = [[root, 0]]
        while frames:
            v, pos = frames[-1]
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                scc_stack.append(v)
                on_stack[v] = True
            row = rows[v]
            descended = False
            row_len = len(row)
            while pos < row_len:
                w = row[pos]
                pos += 1
                if index[w] == -1:
                    frames[-1][1] = pos
                    frames.append([w, 0])
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            frames.pop()
            if frames:
                parent = frames[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                component = []
                while True:
                    w = scc_stack.pop()
                    on_stack[w] = False
                    component.append(w)
                    if w == v:
                        break
                sccs.append(component)

    return len(sccs) == 1, sccs


@dataclass(frozen=True)
class DevaneyVerdict:
    """Outcome of the sufficient-condition check."""

    strongly_connected: bool
    scc_count: int
    scc_sizes: list
    conclusion: str

    def to_json(self) -> dict:
        return {
            "strongly_connected": self.strongly_connected,
            "scc_count": self.scc_count,
            "scc_sizes": self.scc_sizes,
            "conclusion": self.conclusion,
        }


def devaney_verdict(cfg: SystemConfig, workers: int = 1) -> DevaneyVerdict:
    """Build the graph, decompose it, and report.

    ``condition-fails`` means only that this sufficient condition did not
    certify chaos, not that the system is non-chaotic.
    """
    graph = build_graph(cfg, workers=workers)
    connected, sccs = strongly_connected(graph)
    return DevaneyVerdict(
        strongly_connected=connected,
        scc_count=len(sccs),
        scc_sizes=[len(c) for c in sccs],
        conclusion=SUFFICIENT_CONDITION_HOLDS if connected else CONDITION_FAILS,
    )


def graph_to_json(graph: TransitionGraph) -> dict:
    """Adjacency with witness labels, JSON-ready."""
    return {
        "n_bits": graph.n_bits,
        "adjacency": [
            {str(int(t)): int(w) for t, w in zip(row_t, row_w)}
            for row_t, row_w in zip(graph.targets, graph.witnesses)
        ],
    }


def graph_to_dot(graph: TransitionGraph) -> str:
    """DOT rendering; vertex names and edge labels are bit strings."""
    width = graph.n_bits
    lines = ["digraph transitions {"]
    for v in range(graph.vertex_count):
        lines.append(f'  v{v} [label="{v:0{width}b}"];')
    for v in range(graph.vertex_count):
        for t, w in zip(graph.targets[v], graph.witnesses[v]):
            lines.append(f'  v{v} -> v{int(t)} [label="{int(w):0{width}b}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
