"""Chimera hardware graphs, logical repetition-code blocks, and graph analyses.

Qubit id convention (fixed): a Chimera graph with R x C unit cells and
`cell_size` qubits per bipartite shore numbers qubits as

    id = 2*cell_size*(row*cols + col) + shore*cell_size + index

with shore 0 coupling vertically (to the same index in the cells above and
below) and shore 1 coupling horizontally.  Each unit cell is a complete
bipartite graph between its two shores.

For ``cell_size == 4`` each cell hosts two logical qubits: block A takes
shore-0 indices {0,1,2} as problem qubits with the shore-1 index 3 qubit as
its penalty; block B mirrors this (shore-1 problem qubits {0,1,2}, shore-0
penalty at index 3).  Logical edges are realized by the three same-index
physical couplers between the blocks' problem qubits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ResourceLimitError, ValidationError

__all__ = [
    "HardwareGraph",
    "LogicalBlock",
    "LogicalEncoding",
    "EncodedGraph",
    "K33Certificate",
    "build_chimera",
    "build_encoding",
    "embed_chain",
    "contains_k33_subdivision",
    "validate_k33_certificate",
    "compute_conflict_groups",
    "write_chimera_file",
    "read_chimera_file",
    "write_generic_graph_file",
    "read_generic_graph_file",
    "export_encoded_graph_csv",
]


# ---------------------------------------------------------------------------
# hardware graph


@dataclass(frozen=True)
class HardwareGraph:
    """Chimera-structured physical qubit graph (immutable)."""

    rows: int
    cols: int
    cell_size: int
    active_qubits: frozenset[int]
    edges: frozenset[tuple[int, int]]

    @property
    def num_ids(self) -> int:
        """Size of the qubit id range, including defective ids."""
        return 2 * self.cell_size * self.rows * self.cols

    def qubit_id(self, row: int, col: int, shore: int, index: int) -> int:
        return 2 * self.cell_size * (row * self.cols + col) + shore * self.cell_size + index

    def locate(self, qid: int) -> tuple[int, int, int, int]:
        """Inverse of :meth:`qubit_id`: returns (row, col, shore, index)."""
        cell, within = divmod(qid, 2 * self.cell_size)
        shore, index = divmod(within, self.cell_size)
        return cell // self.cols, cell % self.cols, shore, index

    def neighbors(self, qid: int) -> set[int]:
        return {b if a == qid else a for a, b in self.edges if qid in (a, b)}

    def validate(self) -> None:
        for a, b in self.edges:
            if a == b:
                raise ValidationError(f"self-loop on qubit {a}")
            if a not in self.active_qubits or b not in self.active_qubits:
                raise ValidationError(f"edge ({a},{b}) touches an inactive qubit")
            if not self._chimera_legal(a, b):
                raise ValidationError(f"edge ({a},{b}) is not Chimera-legal")

    def _chimera_legal(self, a: int, b: int) -> bool:
        ra, ca, sa, ia = self.locate(a)
        rb, cb, sb, ib = self.locate(b)
        if (ra, ca) == (rb, cb):
            return sa != sb
        if sa != sb or ia != ib:
            return False
        if sa == 0:  # vertical shore
            return ca == cb and abs(ra - rb) == 1
        return ra == rb and abs(ca - cb) == 1


def build_chimera(
    rows: int,
    cols: int,
    cell_size: int = 4,
    defects: frozenset[int] | set[int] = frozenset(),
) -> HardwareGraph:
    """Build the Chimera graph minus defective qubits and their edges."""
    if rows < 1 or cols < 1 or cell_size < 1:
        raise ValidationError("rows, cols and cell_size must all be >= 1")
    num_ids = 2 * cell_size * rows * cols
    defects = frozenset(defects)
    for d in defects:
        if not 0 <= d < num_ids:
            raise ValidationError(f"defect id {d} outside [0, {num_ids})")

    def qid(r: int, c: int, shore: int, idx: int) -> int:
        return 2 * cell_size * (r * cols + c) + shore * cell_size + idx

    active = frozenset(range(num_ids)) - defects
    edges: set[tuple[int, int]] = set()

    def add(a: int, b: int) -> None:
        if a in active and b in active:
            edges.add((a, b) if a < b else (b, a))

    for r in range(rows):
        for c in range(cols):
            for i in range(cell_size):
                for j in range(cell_size):
                    add(qid(r, c, 0, i), qid(r, c, 1, j))
                for shore, dr, dc in ((0, 1, 0), (1, 0, 1)):
                    rr, cc = r + dr, c + dc
                    if rr < rows and cc < cols:
                        add(qid(r, c, shore, i), qid(rr, cc, shore, i))

    graph = HardwareGraph(rows, cols, cell_size, active, frozenset(edges))
    graph.validate()
    return graph


# ---------------------------------------------------------------------------
# logical encoding


@dataclass(frozen=True)
class LogicalBlock:
    """One repetition-code block: n problem qubits plus an optional penalty."""

    logical_id: int
    problem_ids: tuple[int, ...]
    penalty_id: int | None

    @property
    def complete(self) -> bool:
        return self.penalty_id is not None


@dataclass(frozen=True)
class LogicalEncoding:
    """Assignment of physical qubits to repetition-code blocks.

    ``host`` is the hardware graph the ids refer to; it is None for abstract
    (densely indexed) encodings used in desk-scale simulations.
    """

    n: int
    blocks: tuple[LogicalBlock, ...]
    host: HardwareGraph | None = None

    def __post_init__(self) -> None:
        if self.n % 2 == 0:
            raise ValidationError("code length n must be odd for tie-free majority votes")
        seen: set[int] = set()
        for blk in self.blocks:
            if len(blk.problem_ids) != self.n:
                raise ValidationError(f"block {blk.logical_id} has {len(blk.problem_ids)} problem qubits, expected {self.n}")
            ids = set(blk.problem_ids) | ({blk.penalty_id} if blk.penalty_id is not None else set())
            if len(ids) != len(blk.problem_ids) + (blk.penalty_id is not None):
                raise ValidationError(f"block {blk.logical_id} repeats a physical id")
            if ids & seen:
                raise ValidationError(f"block {blk.logical_id} shares physical ids with another block")
            seen |= ids
        if self.host is not None:
            self._validate_against_host()

    def _validate_against_host(self) -> None:
        assert self.host is not None
        for blk in self.blocks:
            for q in blk.problem_ids:
                if q not in self.host.active_qubits:
                    raise ValidationError(f"problem qubit {q} inactive in host graph")
            if blk.penalty_id is not None:
                nbrs = self.host.neighbors(blk.penalty_id)
                if not set(blk.problem_ids) <= nbrs:
                    raise ValidationError(f"penalty qubit {blk.penalty_id} not adjacent to all problem qubits of block {blk.logical_id}")

    @property
    def num_physical(self) -> int:
        return sum(len(b.problem_ids) + (b.penalty_id is not None) for b in self.blocks)

    def block_by_id(self, logical_id: int) -> LogicalBlock:
        for blk in self.blocks:
            if blk.logical_id == logical_id:
                return blk
        raise ValidationError(f"no block with logical id {logical_id}")


@dataclass(frozen=True)
class EncodedGraph:
    """Logical-qubit graph derived from a hardware graph.

    ``logical_edges`` maps an ordered pair of logical ids to the tuple of
    physical couplers realizing that edge.  ``conflict_groups`` lists sets of
    logical edges sharing a physical coupler (cannot all be active at once);
    for the canonical block placement no coupler is shared, so the list is
    empty on defect-free and defective Chimera graphs alike.
    """

    encoding: LogicalEncoding
    logical_edges: dict[tuple[int, int], tuple[tuple[int, int], ...]] = field(default_factory=dict)
    conflict_groups: tuple[frozenset[tuple[int, int]], ...] = ()

    @property
    def blocks(self) -> tuple[LogicalBlock, ...]:
        return self.encoding.blocks

    def adjacency(self, complete_only: bool = False) -> dict[int, set[int]]:
        ok = {b.logical_id for b in self.blocks if b.complete or not complete_only}
        adj: dict[int, set[int]] = {v: set() for v in ok}
        for (i, j) in self.logical_edges:
            if i in ok and j in ok:
                adj[i].add(j)
                adj[j].add(i)
        return adj

    def validate(self) -> None:
        n = self.encoding.n
        for (i, j), couplers in self.logical_edges.items():
            if len(couplers) != n:
                raise ValidationError(f"logical edge ({i},{j}) realized by {len(couplers)} couplers, expected {n}")
            if self.encoding.host is not None:
                for e in couplers:
                    key = tuple(sorted(e))
                    if key not in self.encoding.host.edges:
                        raise ValidationError(f"coupler {e} of logical edge ({i},{j}) missing from host graph")
        usage = _coupler_usage(self.logical_edges)
        for group in self.conflict_groups:
            if not any(group <= frozenset(edges) for edges in usage.values() if len(edges) > 1):
                raise ValidationError(f"conflict group {sorted(group)} shares no physical coupler")


def _coupler_usage(logical_edges: dict[tuple[int, int], tuple[tuple[int, int], ...]]) -> dict[tuple[int, int], set[tuple[int, int]]]:
    usage: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for edge, couplers in logical_edges.items():
        for c in couplers:
            usage.setdefault(tuple(sorted(c)), set()).add(edge)
    return usage


def compute_conflict_groups(
    logical_edges: dict[tuple[int, int], tuple[tuple[int, int], ...]],
) -> tuple[frozenset[tuple[int, int]], ...]:
    """Group logical edges that compete for a shared physical coupler."""
    groups = {frozenset(edges) for edges in _coupler_usage(logical_edges).values() if len(edges) > 1}
    return tuple(sorted(groups, key=sorted))


def build_encoding(hw: HardwareGraph) -> tuple[LogicalEncoding, EncodedGraph]:
    """Place two logical qubits per unit cell and derive the logical graph.

    Blocks whose penalty position is defective are kept but marked incomplete
    (penalty_id None); blocks missing a problem qubit are dropped entirely.
    """
    if hw.cell_size != 4:
        raise ValidationError("encoding layout requires cell_size == 4")
    blocks: list[LogicalBlock] = []
    present: dict[int, LogicalBlock] = {}
    for r in range(hw.rows):
        for c in range(hw.cols):
            for pos, (pshore, qshore) in enumerate(((0, 1), (1, 0))):
                lid = 2 * (r * hw.cols + c) + pos
                problem = tuple(hw.qubit_id(r, c, pshore, i) for i in range(3))
                penalty = hw.qubit_id(r, c, qshore, 3)
                if not all(q in hw.active_qubits for q in problem):
                    continue
                blk = LogicalBlock(lid, problem, penalty if penalty in hw.active_qubits else None)
                blocks.append(blk)
                present[lid] = blk

    edges: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}

    def try_edge(la: int, lb: int, couplers: list[tuple[int, int]]) -> None:
        if la in present and lb in present:
            normalized = tuple(tuple(sorted(c)) for c in couplers)
            if all(c in hw.edges for c in normalized):
                edges[(min(la, lb), max(la, lb))] = normalized

    for r in range(hw.rows):
        for c in range(hw.cols):
            cell = 2 * (r * hw.cols + c)
            try_edge(cell, cell + 1, [(hw.qubit_id(r, c, 0, i), hw.qubit_id(r, c, 1, i)) for i in range(3)])
            if r + 1 < hw.rows:
                below = 2 * ((r + 1) * hw.cols + c)
                try_edge(cell, below, [(hw.qubit_id(r, c, 0, i), hw.qubit_id(r + 1, c, 0, i)) for i in range(3)])
            if c + 1 < hw.cols:
                right = 2 * (r * hw.cols + c + 1)
                try_edge(cell + 1, right + 1, [(hw.qubit_id(r, c, 1, i), hw.qubit_id(r, c + 1, 1, i)) for i in range(3)])

    encoding = LogicalEncoding(n=3, blocks=tuple(blocks), host=hw)
    graph = EncodedGraph(encoding, edges, compute_conflict_groups(edges))
    graph.validate()
    return encoding, graph


# ---------------------------------------------------------------------------
# chain embeddings


def embed_chain(
    eg: EncodedGraph,
    length: int,
    count: int,
    rng_seed: int = 0,
    max_restarts: int = 20000,
    exhaustive_limit: int = 24,
) -> list[tuple[int, ...]]:
    """Find ``count`` distinct simple paths of ``length`` logical qubits.

    Paths use only complete blocks and never activate two logical edges from
    the same conflict group.  The search is a seeded self-avoiding walk with
    backtracking and restarts; paths equal up to reversal count once.

    Returns fewer than ``count`` paths only when exhaustive enumeration
    proves no more exist (always the case for graphs with at most
    ``exhaustive_limit`` usable nodes); otherwise raises
    :class:`ResourceLimitError` when the randomized budget is exhausted.
    """
    if length < 2:
        raise ValidationError("chain length must be >= 2")
    if count < 1:
        raise ValidationError("embedding count must be >= 1")
    adj = eg.adjacency(complete_only=True)
    conflict_of: dict[tuple[int, int], list[frozenset[tuple[int, int]]]] = {}
    for group in eg.conflict_groups:
        for edge in group:
            conflict_of.setdefault(edge, []).append(group)
    if length > len(adj):
        return []

    rng = np.random.default_rng(rng_seed)
    nodes = sorted(adj)
    found: dict[tuple[int, ...], tuple[int, ...]] = {}

    def canonical(path: tuple[int, ...]) -> tuple[int, ...]:
        rev = path[::-1]
        return path if path <= rev else rev

    def edge_ok(path_edges: set[tuple[int, int]], edge: tuple[int, int]) -> bool:
        for group in conflict_of.get(edge, ()):
            if len(group & path_edges) >= len(group) - 1:
                return False
        return True

    def random_attempt(budget: int) -> tuple[int, ...] | None:
        start = nodes[rng.integers(len(nodes))]
        path = [start]
        on_path = {start}
        path_edges: set[tuple[int, int]] = set()
        choice_stack: list[list[int]] = []
        steps = 0
        while steps < budget:
            steps += 1
            if len(path) == length:
                return tuple(path)
            if len(choice_stack) < len(path):
                cands = [v for v in adj[path[-1]] if v not in on_path]
                rng.shuffle(cands)
                choice_stack.append(cands)
            cands = choice_stack[-1]
            advanced = False
            while cands:
                nxt = cands.pop()
                edge = (min(path[-1], nxt), max(path[-1], nxt))
                if edge_ok(path_edges, edge):
                    path.append(nxt)
                    on_path.add(nxt)
                    path_edges.add(edge)
                    advanced = True
                    break
            if not advanced:
                choice_stack.pop()
                if len(path) == 1:
                    return None
                last = path.pop()
                on_path.discard(last)
                path_edges.discard((min(path[-1], last), max(path[-1], last)))
        return None

    for _ in range(max_restarts):
        if len(found) >= count:
            break
        path = random_attempt(budget=20 * length)
        if path is not None:
            found.setdefault(canonical(path), path)

    if len(found) >= count:
        return list(found.values())[:count]

    if len(adj) <= exhaustive_limit:
        found.clear()
        for path in _all_simple_paths(adj, length, conflict_of):
            found.setdefault(canonical(path), path)
            if len(found) >= count:
                break
        return list(found.values())[:count]
    raise ResourceLimitError(
        f"found {len(found)} of {count} embeddings; graph too large ({len(adj)} nodes) for an exhaustive scarcity proof"
    )


def _all_simple_paths(adj, length, conflict_of):
    def edge_ok(path_edges, edge):
        for group in conflict_of.get(edge, ()):
            if len(group & path_edges) >= len(group) - 1:
                return False
        return True

    def extend(path, on_path, path_edges):
        if len(path) == length:
            yield tuple(path)
            return
        for nxt in sorted(adj[path[-1]]):
            if nxt in on_path:
                continue
            edge = (min(path[-1], nxt), max(path[-1], nxt))
            if not edge_ok(path_edges, edge):
                continue
            path.append(nxt)
            on_path.add(nxt)
            path_edges.add(edge)
            yield from extend(path, on_path, path_edges)
            path.pop()
            on_path.discard(nxt)
            path_edges.discard(edge)

    for start in sorted(adj):
        yield from extend([start], {start}, set())


# ---------------------------------------------------------------------------
# K3,3 subdivision search


@dataclass(frozen=True)
class K33Certificate:
    """Six branch vertices plus nine internally disjoint connecting paths."""

    left: tuple[int, int, int]
    right: tuple[int, int, int]
    paths: dict[tuple[int, int], tuple[int, ...]]


def validate_k33_certificate(adj: dict[int, set[int]], cert: K33Certificate) -> bool:
    """Independent soundness check of a subdivision certificate."""
    branch = set(cert.left) | set(cert.right)
    if len(branch) != 6 or len(set(cert.left)) != 3 or len(set(cert.right)) != 3:
        return False
    if set(cert.paths) != {(l, r) for l in cert.left for r in cert.right}:
        return False
    interior_seen: set[int] = set()
    for (l, r), path in cert.paths.items():
        if len(path) < 2 or path[0] != l or path[-1] != r:
            return False
        if len(set(path)) != len(path):
            return False
        for a, b in zip(path, path[1:]):
            if a not in adj or b not in adj[a]:
                return False
        interior = set(path[1:-1])
        if interior & branch or interior & interior_seen:
            return False
        interior_seen |= interior
    return True


def _normalize_adjacency(graph) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    if isinstance(graph, dict):
        items = graph.items()
    else:  # iterable of edges
        items = None
    if items is not None:
        for v, nbrs in items:
            adj.setdefault(v, set()).update(nbrs)
            for u in nbrs:
                adj.setdefault(u, set()).add(v)
    else:
        for a, b in graph:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
    for v in adj:
        adj[v].discard(v)
    return adj


def _two_core(adj: dict[int, set[int]]) -> dict[int, set[int]]:
    core = {v: set(n) for v, n in adj.items()}
    queue = [v for v, n in core.items() if len(n) < 2]
    while queue:
        v = queue.pop()
        if v not in core:
            continue
        for u in core.pop(v):
            core[u].discard(v)
            if len(core[u]) < 2:
                queue.append(u)
    return core


def _route_disjoint(adj, pairs, branch, rng, exhaustive: bool):
    """Route each (l, r) pair through mutually disjoint interiors.

    Randomized mode uses one BFS per pair (shuffled neighbor order);
    exhaustive mode backtracks over all simple paths, so it is complete but
    only viable for small graphs.
    """
    used: set[int] = set()
    paths: dict[tuple[int, int], tuple[int, ...]] = {}

    def bfs(l, r):
        blocked = (branch - {l, r}) | used
        prev = {l: None}
        frontier = [l]
        while frontier:
            nxt_frontier = []
            for v in frontier:
                nbrs = list(adj[v])
                if rng is not None:
                    rng.shuffle(nbrs)
                for u in nbrs:
                    if u in prev or u in blocked:
                        continue
                    prev[u] = v
                    if u == r:
                        path = [u]
                        while path[-1] is not None:
                            path.append(prev[path[-1]])
                        return tuple(path[-2::-1])
                    nxt_frontier.append(u)
            frontier = nxt_frontier
        return None

    def all_paths(l, r):
        blocked = (branch - {l, r}) | used

        def extend(path, on_path):
            v = path[-1]
            if v == r:
                yield tuple(path)
                return
            for u in sorted(adj[v]):
                if u in on_path or u in blocked or (u in branch and u != r):
                    continue
                path.append(u)
                on_path.add(u)
                yield from extend(path, on_path)
                path.pop()
                on_path.discard(u)

        yield from extend([l], {l})

    def solve(k: int) -> bool:
        if k == len(pairs):
            return True
        l, r = pairs[k]
        if exhaustive:
            for path in all_paths(l, r):
                interior = set(path[1:-1])
                used.update(interior)
                paths[(l, r)] = path
                if solve(k + 1):
                    return True
                used.difference_update(interior)
                del paths[(l, r)]
            return False
        path = bfs(l, r)
        if path is None:
            return False
        used.update(path[1:-1])
        paths[(l, r)] = path
        return solve(k + 1)

    return paths if solve(0) else None


def contains_k33_subdivision(
    graph,
    rng_seed: int = 0,
    max_restarts: int = 600,
    exhaustive_limit: int = 11,
) -> K33Certificate | None:
    """Search for a K3,3 subdivision; certificates are always validated.

    Graphs whose 2-core has at most ``exhaustive_limit`` vertices are searched
    exhaustively (a None answer is then a proof of absence).  Larger graphs
    use a seeded randomized search with restarts: a returned certificate is
    sound, but None only means nothing was found within the budget.
    """
    adj = _normalize_adjacency(graph)
    core = _two_core(adj)
    candidates = sorted(v for v, n in core.items() if len(n) >= 3)
    num_edges = sum(len(n) for n in core.values()) // 2
    if len(candidates) < 6 or num_edges < 9:
        return None

    def attempt(left, right, rng, exhaustive):
        branch = set(left) | set(right)
        pairs = [(l, r) for l in left for r in right]
        paths = _route_disjoint(core, pairs, branch, rng, exhaustive)
        if paths is None:
            return None
        cert = K33Certificate(tuple(left), tuple(right), paths)
        return cert if validate_k33_certificate(adj, cert) else None

    if len(core) <= exhaustive_limit:
        for sextet in itertools.combinations(candidates, 6):
            remaining = set(sextet)
            first = sextet[0]
            for rest in itertools.combinations(sorted(remaining - {first}), 2):
                left = (first,) + rest
                right = tuple(sorted(remaining - set(left)))
                cert = attempt(left, right, None, exhaustive=True)
                if cert is not None:
                    return cert
        return None

    rng = np.random.default_rng(rng_seed)
    cand = np.array(candidates)
    for _ in range(max_restarts):
        pick = rng.choice(len(cand), size=6, replace=False)
        order = [int(cand[i]) for i in pick]
        for li, re_ in (((0, 1, 2), (3, 4, 5)), ((0, 1, 3), (2, 4, 5)), ((0, 2, 4), (1, 3, 5))):
            cert = attempt([order[i] for i in li], [order[i] for i in re_], rng, exhaustive=False)
            if cert is not None:
                return cert
    return None


# ---------------------------------------------------------------------------
# file formats


def write_chimera_file(path, hw: HardwareGraph) -> None:
    defects = sorted(set(range(hw.num_ids)) - hw.active_qubits)
    with open(path, "w") as fh:
        fh.write(f"chimera {hw.rows} {hw.cols} {hw.cell_size}\n")
        for d in defects:
            fh.write(f"defect {d}\n")


def read_chimera_file(path) -> HardwareGraph:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("chimera"):
        raise FormatError(f"{path}: expected 'chimera <rows> <cols> <cell_size>' header")
    try:
        _, rows, cols, cell = lines[0].split()
        defects = set()
        for ln in lines[1:]:
            tag, val = ln.split()
            if tag != "defect":
                raise ValueError(tag)
            defects.add(int(val))
        return build_chimera(int(rows), int(cols), int(cell), defects)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"{path}: malformed chimera graph file ({exc})") from exc


def write_generic_graph_file(path, adj: dict[int, set[int]]) -> None:
    n = max(adj) + 1 if adj else 0
    with open(path, "w") as fh:
        fh.write(f"v {n}\n")
        for a in sorted(adj):
            for b in sorted(adj[a]):
                if a < b:
                    fh.write(f"e {a} {b}\n")


def read_generic_graph_file(path) -> dict[int, set[int]]:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("v "):
        raise FormatError(f"{path}: expected 'v <n>' header")
    try:
        n = int(lines[0].split()[1])
        adj: dict[int, set[int]] = {v: set() for v in range(n)}
        for ln in lines[1:]:
            tag, a, b = ln.split()
            if tag != "e":
                raise ValueError(tag)
            a, b = int(a), int(b)
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ValueError(f"bad edge {a} {b}")
            adj[a].add(b)
            adj[b].add(a)
        return adj
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: malformed graph file ({exc})") from exc


def export_encoded_graph_csv(path, eg: EncodedGraph) -> None:
    with open(path, "w") as fh:
        fh.write("logical_id,problem_ids,penalty_id,complete\n")
        for blk in eg.blocks:
            pen = blk.penalty_id if blk.penalty_id is not None else -1
            fh.write(f"{blk.logical_id},{';'.join(map(str, blk.problem_ids))},{pen},{int(blk.complete)}\n")
