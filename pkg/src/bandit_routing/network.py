"""Directed acyclic networks, paths as 0/1 link vectors, and extremal paths.

Links are addressed by their position in the edge list, so a path is a
vector in {0,1}^d whose coordinate j is link j.  All path optimisation is
done with a dynamic program over a topological order, which handles
negative weights (least-squares estimates can be negative).
"""

from __future__ import annotations

import enum
import graphlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, CycleDetected, DisconnectedLink, NoPath
from .kernels import backward_dp

DEFAULT_PATH_CAP = 20000


class Sense(enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True, eq=True, order=True)
class PathVector:
    """A source-to-destination path.

    ``links`` lists link indices in traversal order; ``d`` is the number of
    links in the network the path belongs to.
    """

    links: tuple[int, ...]
    d: int = field(compare=True)

    @cached_property
    def coords(self) -> np.ndarray:
        v = np.zeros(self.d)
        v[list(self.links)] = 1.0
        v.flags.writeable = False
        return v

    @property
    def hop_count(self) -> int:
        return len(self.links)

    def value(self, weights) -> float:
        """Exactly rounded sum of ``weights`` over the path's links."""
        return math.fsum(weights[j] for j in self.links)

    def __len__(self):
        return len(self.links)


@dataclass(frozen=True)
class NetworkStats:
    d: int
    d0: int
    path_count: int
    min_hops: int
    max_hops: int


class Network:
    """Immutable validated DAG with a designated source and destination.

    Use :func:`build_network` rather than calling the constructor directly.
    """

    def __init__(self, node_count, links, source, destination, topo_order):
        self.node_count = int(node_count)
        self.links = tuple((int(u), int(v)) for u, v in links)
        self.source = int(source)
        self.destination = int(destination)
        self.topo_order = tuple(topo_order)

        d = len(self.links)
        tails = np.array([u for u, _ in self.links], dtype=np.int64)
        order = np.lexsort((np.arange(d), tails))
        counts = np.bincount(tails, minlength=self.node_count)
        self._out_ptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        self._out_links = order.astype(np.int64)
        self._heads = np.array([v for _, v in self.links], dtype=np.int64)
        self._rev_order = np.array(self.topo_order[::-1], dtype=np.int64)
        self._path_cache: dict[tuple[int, ...], PathVector] = {}

    @property
    def d(self) -> int:
        return len(self.links)

    @cached_property
    def _dest_counts(self) -> list[int]:
        return _counts_to_dest(self)

    def out_links(self, node: int) -> list[int]:
        return self._out_links[self._out_ptr[node]:self._out_ptr[node + 1]].tolist()

    def path(self, links: Iterable[int]) -> PathVector:
        key = tuple(links)
        p = self._path_cache.get(key)
        if p is None:
            p = PathVector(key, self.d)
            self._path_cache[key] = p
        return p

    def path_from_coords(self, coords) -> PathVector:
        """Rebuild a path from a 0/1 vector, checking it is a valid path."""
        coords = np.asarray(coords)
        if coords.shape != (self.d,) or not np.all((coords == 0) | (coords == 1)):
            raise ValueError("not a 0/1 vector of the network's dimension")
        chosen = set(np.flatnonzero(coords).tolist())
        links = []
        node = self.source
        while node != self.destination:
            nxt = [j for j in self.out_links(node) if j in chosen]
            if len(nxt) != 1:
                raise ValueError("coordinates do not form a source-destination path")
            links.append(nxt[0])
            node = self.links[nxt[0]][1]
        if len(links) != len(chosen):
            raise ValueError("coordinates do not form a source-destination path")
        return self.path(links)

    def to_json(self) -> dict:
        return {
            "nodes": self.node_count,
            "links": [list(l) for l in self.links],
            "source": self.source,
            "destination": self.destination,
        }

    def __repr__(self):
        return (f"Network(nodes={self.node_count}, d={self.d}, "
                f"source={self.source}, destination={self.destination})")

    def __eq__(self, other):
        return isinstance(other, Network) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash((self.node_count, self.links, self.source, self.destination))


def build_network(nodes: int, links: Sequence[Sequence[int]], source: int,
                  destination: int) -> Network:
    """Validate an edge list and return a :class:`Network`.

    Raises:
        CycleDetected: the links contain a directed cycle.
        NoPath: the destination is unreachable from the source.
        DisconnectedLink: some link lies on no source-destination path.
    """
    if not links:
        raise ValueError("edge list is empty")
    if source == destination:
        raise ValueError("source and destination must differ")
    for node in (source, destination):
        if not 0 <= node < nodes:
            raise ValueError(f"node {node} out of range [0, {nodes})")
    for u, v in links:
        if not (0 <= u < nodes and 0 <= v < nodes):
            raise ValueError(f"link ({u}, {v}) references a node outside [0, {nodes})")

    sorter = graphlib.TopologicalSorter({n: () for n in range(nodes)})
    for u, v in links:
        sorter.add(v, u)
    try:
        topo = list(sorter.static_order())
    except graphlib.CycleError as exc:
        raise CycleDetected(f"cycle through nodes {exc.args[1]}") from None

    succ = [[] for _ in range(nodes)]
    pred = [[] for _ in range(nodes)]
    for u, v in links:
        succ[u].append(v)
        pred[v].append(u)
    fwd = _reach(source, succ)
    bwd = _reach(destination, pred)
    if destination not in fwd:
        raise NoPath(f"destination {destination} unreachable from source {source}")
    for j, (u, v) in enumerate(links):
        if u not in fwd or v not in bwd:
            raise DisconnectedLink(f"link {j} ({u}->{v}) is on no source-destination path")
    return Network(nodes, links, source, destination, topo)


def _reach(start, adj):
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def network_from_json(obj: dict) -> Network:
    try:
        return build_network(int(obj["nodes"]), [tuple(l) for l in obj["links"]],
                             int(obj["source"]), int(obj["destination"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed network description: {exc!r}") from None


def load_network(path) -> Network:
    with open(path) as fh:
        return network_from_json(json.load(fh))


def save_network(net: Network, path) -> None:
    with open(path, "w") as fh:
        json.dump(net.to_json(), fh)


def grid_network(p: int) -> Network:
    """Grid topology: a p-by-p lattice routing right and down.

    The source feeds every node of the first column and every node of the
    last column feeds the destination.  Node 0 is the source, grid node
    (i, j) is ``1 + i*p + j`` and ``p*p + 1`` is the destination.
    """
    if p < 1:
        raise ValueError("grid side must be >= 1")
    src, dst = 0, p * p + 1

    def node(i, j):
        return 1 + i * p + j

    links = [(src, node(i, 0)) for i in range(p)]
    for i in range(p):
        for j in range(p):
            if j + 1 < p:
                links.append((node(i, j), node(i, j + 1)))
            if i + 1 < p:
                links.append((node(i, j), node(i + 1, j)))
    links += [(node(i, p - 1), dst) for i in range(p)]
    return build_network(p * p + 2, links, src, dst)


def extremal_path(net: Network, weights, sense: Sense = Sense.MIN) -> tuple[PathVector, float]:
    """Shortest (or longest) path under arbitrary real link weights.

    Among optimal paths the lexicographically smallest link-index sequence
    is returned.  The reported value is the exactly rounded weight sum.
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.shape != (net.d,):
        raise ValueError(f"expected {net.d} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    dp_w = w if sense is Sense.MIN else -w
    dist, choice = backward_dp(net._rev_order, net._out_ptr, net._out_links,
                               net._heads, dp_w, net.destination)
    if not math.isfinite(dist[net.source]):
        raise NoPath("no source-destination path")
    links = []
    node = net.source
    heads = net._heads
    while node != net.destination:
        j = int(choice[node])
        links.append(j)
        node = int(heads[j])
    path = net.path(links)
    return path, path.value(w)


def count_paths(net: Network) -> int:
    """Number of source-destination paths, by dynamic programming."""
    return net._dest_counts[net.source]


def _counts_to_dest(net: Network) -> list[int]:
    counts = [0] * net.node_count
    counts[net.destination] = 1
    for v in net._rev_order.tolist():
        if v == net.destination:
            continue
        counts[v] = sum(counts[net.links[j][1]] for j in net.out_links(v))
    return counts


def enumerate_paths(net: Network, cap: int = DEFAULT_PATH_CAP) -> list[PathVector]:
    """All source-destination paths in lexicographic link order.

    Raises:
        CapExceeded: there are more than ``cap`` paths.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    total = count_paths(net)
    if total > cap:
        raise CapExceeded(total, cap)
    out = []
    prefix: list[int] = []
    # explicit stack of out-link iterators keeps the order lexicographic
    stack = [iter(net.out_links(net.source))]
    while stack:
        j = next(stack[-1], None)
        if j is None:
            stack.pop()
            if prefix:
                prefix.pop()
            continue
        prefix.append(j)
        head = net.links[j][1]
        if head == net.destination:
            out.append(net.path(prefix))
            prefix.pop()
        else:
            stack.append(iter(net.out_links(head)))
    return out


def path_matrix(paths: Sequence[PathVector]) -> np.ndarray:
    """Stack paths as rows of a (len(paths), d) 0/1 matrix."""
    return np.array([p.coords for p in paths])


def sample_uniform_path(net: Network, rng: np.random.Generator) -> PathVector:
    """Draw a path uniformly at random without enumerating the path set."""
    counts = net._dest_counts
    links = []
    node = net.source
    while node != net.destination:
        outs = net.out_links(node)
        weights = np.array([counts[net.links[j][1]] for j in outs], dtype=float)
        j = outs[int(rng.choice(len(outs), p=weights / weights.sum()))]
        links.append(j)
        node = net.links[j][1]
    return net.path(links)


def network_stats(net: Network, cap: int = DEFAULT_PATH_CAP) -> NetworkStats:
    """Size, basis rank, path count and hop range of a network.

    The rank is taken from the enumerated path matrix when the path count
    fits under ``cap``, otherwise from the greedy basis construction.
    """
    ones = np.ones(net.d)
    min_path, _ = extremal_path(net, ones, Sense.MIN)
    max_path, _ = extremal_path(net, ones, Sense.MAX)
    total = count_paths(net)
    if total <= cap:
        from .oracles import path_matrix_rank
        d0 = path_matrix_rank(net, cap=cap)
    else:
        from .spanner import general_basis
        d0 = general_basis(net).d0
    return NetworkStats(d=net.d, d0=d0, path_count=total,
                        min_hops=min_path.hop_count, max_hops=max_path.hop_count)
