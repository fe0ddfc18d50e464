"""Graphs, cycle space and classical Hamiltonian-cycle oracles.

Edge subsets are plain Python ``int`` bitsets: bit ``i`` set means edge ``i``
is occupied (qubit ``i`` in state ``|1>``). Edge order therefore fixes the
qubit order used everywhere downstream.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import GraphFormatError, InvalidArgumentError, PreconditionError, ResourceLimitError

HC_VERTEX_LIMIT = 24
CYCLE_SPACE_LIMIT = 26


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        seen = set()
        for i, (u, v) in enumerate(self.edges):
            if u == v:
                raise InvalidArgumentError(f"edge {i} is a self-loop on vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise InvalidArgumentError(f"edge {i} = ({u}, {v}) references a missing vertex")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidArgumentError(f"edge {i} = ({u}, {v}) is a duplicate")
            seen.add(key)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def incident_edges(self) -> tuple[tuple[int, ...], ...]:
        """Per-vertex incident edge indices, ascending."""
        inc: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, (u, v) in enumerate(self.edges):
            inc[u].append(i)
            inc[v].append(i)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def incidence_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << e for e in es) for es in self.incident_edges)

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        nb = [0] * self.n_vertices
        for u, v in self.edges:
            nb[u] |= 1 << v
            nb[v] |= 1 << u
        return tuple(nb)

    def is_connected(self) -> bool:
        if self.n_vertices == 0:
            return True
        return _reachable(self.neighbor_masks, 1, (1 << self.n_vertices) - 1) == (1 << self.n_vertices) - 1

    def to_text(self) -> str:
        lines = [f"{self.n_vertices} {self.n_edges}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    @cached_property
    def digest(self) -> str:
        """SHA-256 of the canonical file text (truncated to 16 hex chars)."""
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _reachable(nbr: tuple[int, ...] | list[int], start: int, allowed: int) -> int:
    """Vertex bitset reachable from bitset ``start`` inside ``allowed``."""
    seen = start & allowed
    frontier = seen
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= nbr[low.bit_length() - 1]
            f ^= low
        nxt &= allowed & ~seen
        seen |= nxt
        frontier = nxt
    return seen


# --- I/O ---------------------------------------------------------------------


def parse_graph(text: str) -> Graph:
    header = None
    edges: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise GraphFormatError(f"expected integers, got {line!r}", lineno) from None
        if len(nums) != 2:
            raise GraphFormatError(f"expected two integers, got {len(nums)}", lineno)
        if header is None:
            if nums[0] < 0 or nums[1] < 0:
                raise GraphFormatError("negative counts in header", lineno)
            header = (nums[0], nums[1])
            continue
        n_v, n_e = header
        u, v = nums
        if len(edges) >= n_e:
            raise GraphFormatError(f"more edges than the {n_e} declared", lineno)
        if not (0 <= u < n_v and 0 <= v < n_v):
            raise GraphFormatError(f"vertex index out of range 0..{n_v - 1}", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop on vertex {u}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge ({u}, {v}), first on line {seen[key]}", lineno)
        seen[key] = lineno
        edges.append((u, v))
    if header is None:
        raise GraphFormatError("missing header '<N_v> <N_e>'", 1)
    if len(edges) != header[1]:
        raise GraphFormatError(f"header declares {header[1]} edges but {len(edges)} given", last_line)
    return Graph(header[0], tuple(edges))


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(graph: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graph.to_text())


# --- constructors ------------------------------------------------------------


def torus_graph(rows: int, cols: int) -> Graph:
    """Periodic ``rows x cols`` grid; horizontal edges row-major, then vertical."""
    if rows < 3 or cols < 3:
        raise InvalidArgumentError(f"torus needs rows, cols >= 3, got {rows}x{cols}")
    idx = lambda r, c: r * cols + c  # noqa: E731
    horizontal = [(idx(r, c), idx(r, (c + 1) % cols)) for r in range(rows) for c in range(cols)]
    vertical = [(idx(r, c), idx((r + 1) % rows, c)) for r in range(rows) for c in range(cols)]
    return Graph(rows * cols, tuple(horizontal + vertical))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidArgumentError("cycle graph needs at least 3 vertices")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple(combinations(range(n), 2)))


def _prufer_tree(seq: list[int], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(i for i in range(n) if degree[i] == 1)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = (i for i in range(n) if degree[i] == 1)
    edges.append((u, v))
    return edges


def random_connected_graph(n_vertices: int, n_edges: int, seed) -> Graph:
    """Random simple connected graph with exact vertex and edge counts.

    Draws a uniform labelled spanning tree from a random Pruefer sequence, then
    adds ``n_edges - n_vertices + 1`` distinct non-tree pairs uniformly. The
    generator is ``numpy.random.default_rng(seed)`` (PCG64); the Pruefer
    sequence is drawn first, then the extra pairs, from the same stream.
    Edges are returned sorted lexicographically as ``(u, v)`` with ``u < v``.
    """
    max_edges = n_vertices * (n_vertices - 1) // 2
    if n_vertices < 1 or n_edges < n_vertices - 1 or n_edges > max_edges:
        raise InvalidArgumentError(
            f"no simple connected graph with N_v={n_vertices}, N_e={n_edges} "
            f"(need {max(n_vertices - 1, 0)} <= N_e <= {max_edges})"
        )
    rng = np.random.default_rng(seed)
    if n_vertices == 1:
        tree = []
    elif n_vertices == 2:
        tree = [(0, 1)]
    else:
        tree = _prufer_tree([int(x) for x in rng.integers(0, n_vertices, size=n_vertices - 2)], n_vertices)
    tree_set = set(tree)
    candidates = [p for p in combinations(range(n_vertices), 2) if p not in tree_set]
    extra = n_edges - len(tree)
    picks = rng.choice(len(candidates), size=extra, replace=False) if extra else []
    edges = sorted(tree + [candidates[int(i)] for i in picks])
    return Graph(n_vertices, tuple(edges))


def degree_stats(graph: Graph) -> tuple[int, int, list[int]]:
    degrees = [len(es) for es in graph.incident_edges]
    if not degrees:
        return 0, 0, []
    return min(degrees), max(degrees), degrees


# --- cycle space -------------------------------------------------------------


@dataclass(frozen=True)
class CycleSpaceBasis:
    fundamental_cycles: tuple[int, ...]
    tree_edges: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.fundamental_cycles)

    @property
    def size(self) -> int:
        """Number of closed-string configurations, 2**dimension."""
        return 1 << self.dimension


def cycle_space_basis(graph: Graph) -> CycleSpaceBasis:
    """Fundamental cycles of the BFS tree rooted at vertex 0.

    Neighbours are visited in edge-index order, so the basis is reproducible.
    """
    if not graph.is_connected():
        raise PreconditionError("cycle space basis requires a connected graph")
    n = graph.n_vertices
    root_path = [0] * n  # edge mask of the tree path from each vertex to the root
    visited = [False] * n
    tree = []
    if n:
        visited[0] = True
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for e in graph.incident_edges[u]:
                a, b = graph.edges[e]
                w = b if a == u else a
                if not visited[w]:
                    visited[w] = True
                    root_path[w] = root_path[u] | (1 << e)
                    tree.append(e)
                    queue.append(w)
    in_tree = set(tree)
    cycles = []
    for e, (u, v) in enumerate(graph.edges):
        if e not in in_tree:
            cycles.append((1 << e) ^ root_path[u] ^ root_path[v])
    return CycleSpaceBasis(tuple(cycles), tuple(sorted(tree)))


def cycle_space_elements(basis: CycleSpaceBasis) -> np.ndarray:
    """All ``2**dimension`` members, index ``k`` = XOR of cycles at the set bits of ``k``."""
    if basis.dimension > CYCLE_SPACE_LIMIT:
        raise ResourceLimitError(f"cycle space dimension {basis.dimension} exceeds {CYCLE_SPACE_LIMIT}")
    out = np.zeros(1, dtype=np.int64)
    for c in basis.fundamental_cycles:
        out = np.concatenate([out, out ^ np.int64(c)])
    return out


def boundary(graph: Graph, subset: int) -> int:
    """Vertex bitset of odd degree in the occupied subgraph."""
    b = 0
    for i, (u, v) in enumerate(graph.edges):
        if subset >> i & 1:
            b ^= (1 << u) | (1 << v)
    return b


def is_closed_string_config(graph: Graph, subset: int) -> bool:
    if subset >> graph.n_edges:
        return False
    return boundary(graph, subset) == 0


def is_hamiltonian_cycle_config(graph: Graph, subset: int) -> bool:
    n = graph.n_vertices
    if n < 3 or subset < 0 or subset >> graph.n_edges or subset.bit_count() != n:
        return False
    for m in graph.incidence_masks:
        if (subset & m).bit_count() != 2:
            return False
    nbr = [0] * n
    for i, (u, v) in enumerate(graph.edges):
        if subset >> i & 1:
            nbr[u] |= 1 << v
            nbr[v] |= 1 << u
    full = (1 << n) - 1
    return _reachable(nbr, 1, full) == full


# --- Hamiltonian-cycle counting ----------------------------------------------


def _hc_backtrack(graph: Graph) -> int:
    n = graph.n_vertices
    nbr = graph.neighbor_masks
    full = (1 << n) - 1
    if any((m.bit_count() < 2) for m in nbr):
        return 0
    count = 0

    def dead_end(visited: int, last: int) -> bool:
        # every unvisited vertex needs two usable neighbours (unvisited, or an open path end)
        open_ends = (1 << last) | 1
        free = full & ~visited
        f = free
        while f:
            low = f & -f
            v = low.bit_length() - 1
            if (nbr[v] & (free | open_ends)).bit_count() < 2:
                return True
            f ^= low
        return _reachable(nbr, 1 << last, free | (1 << last)) | (1 << last) != free | (1 << last)

    def extend(last: int, visited: int, first: int) -> None:
        nonlocal count
        if visited == full:
            # orientation fixed by first step < last step
            if nbr[last] & 1 and first < last:
                count += 1
            return
        if dead_end(visited, last):
            return
        cand = nbr[last] & ~visited
        while cand:
            low = cand & -cand
            w = low.bit_length() - 1
            extend(w, visited | low, first if first >= 0 else w)
            cand ^= low

    extend(0, 1, -1)
    return count


def _hc_held_karp(graph: Graph) -> int:
    """Count directed Hamiltonian paths 0 -> v over subsets, close at vertex 0, halve."""
    n = graph.n_vertices
    m = n - 1  # vertices 1..n-1 live on bits 0..m-1
    nbr = graph.neighbor_masks
    dp = np.zeros((1 << m, m), dtype=np.int64)
    for j in range(m):
        if nbr[0] >> (j + 1) & 1:
            dp[1 << j, j] = 1
    masks = np.arange(1 << m, dtype=np.int64)
    pop = np.bitwise_count(masks)
    adj = [[i for i in range(m) if nbr[j + 1] >> (i + 1) & 1] for j in range(m)]
    for k in range(1, m):
        layer = masks[pop == k]
        for j in range(m):
            ending = layer[(layer >> j) & 1 == 1]
            if ending.size == 0:
                continue
            for i in adj[j]:
                src = ending[(ending >> i) & 1 == 0]
                dp[src | (1 << i), i] += dp[src, j]
    closing = [j for j in range(m) if nbr[0] >> (j + 1) & 1]
    directed = int(dp[(1 << m) - 1, closing].sum())
    return directed // 2


def count_hamiltonian_cycles(graph: Graph, method: str = "backtrack", limit: int = HC_VERTEX_LIMIT) -> int:
    """Number of Hamiltonian cycles counted as undirected edge sets.

    ``method`` is ``"backtrack"`` (pruned DFS) or ``"held_karp"`` (subset DP).
    """
    if graph.n_vertices > limit:
        raise ResourceLimitError(f"N_v={graph.n_vertices} exceeds the HC counting limit {limit}")
    if graph.n_vertices < 3 or not graph.is_connected():
        return 0
    if method == "backtrack":
        return _hc_backtrack(graph)
    if method == "held_karp":
        return _hc_held_karp(graph)
    raise InvalidArgumentError(f"unknown HC counting method {method!r}")


def count_hc_via_cycle_space(graph: Graph, limit: int = CYCLE_SPACE_LIMIT, chunk_bits: int = 20) -> int:
    """Scan all closed-string configurations for Hamiltonian cycles."""
    basis = cycle_space_basis(graph)
    dim = basis.dimension
    if dim > limit:
        raise ResourceLimitError(f"cycle space dimension {dim} exceeds limit {limit}")
    n = graph.n_vertices
    if n < 3:
        return 0
    low_cycles, high_cycles = basis.fundamental_cycles[:chunk_bits], basis.fundamental_cycles[chunk_bits:]
    low = cycle_space_elements(CycleSpaceBasis(low_cycles, ()))
    inc = [np.int64(m) for m in graph.incidence_masks]
    count = 0
    for k in range(1 << len(high_cycles)):
        offset = 0
        for j, c in enumerate(high_cycles):
            if k >> j & 1:
                offset ^= c
        block = low ^ np.int64(offset)
        block = block[np.bitwise_count(block) == n]
        for m in inc:
            block = block[np.bitwise_count(block & m) == 2]
        count += sum(1 for s in block.tolist() if is_hamiltonian_cycle_config(graph, s))
    return count
