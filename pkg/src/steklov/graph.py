"""Finite simple graphs: subgraph problems, components, effective resistance,
and the tree-gadget chain whose Steklov gap stays bounded away from zero.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu

from .exceptions import DisconnectedPairError, InvalidSpecError, PreconditionError

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class FiniteGraph:
    """Simple undirected graph on vertices ``0..vertex_count-1``.

    ``labels`` maps names to vertex indices; a vertex may carry several names.
    """

    vertex_count: int
    edges: tuple
    labels: dict = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[Sequence[int]], labels=None) -> "FiniteGraph":
        vertex_count = int(vertex_count)
        if vertex_count < 0:
            raise InvalidSpecError("vertex_count must be nonnegative")
        seen = set()
        for e in edges:
            a, b = (int(v) for v in e)
            if a == b:
                raise InvalidSpecError(f"self-loop at vertex {a}")
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise InvalidSpecError(f"edge ({a}, {b}) out of range")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise InvalidSpecError(f"duplicate edge {key}")
            seen.add(key)
        labels = dict(labels or {})
        for name, v in labels.items():
            if not 0 <= int(v) < vertex_count:
                raise InvalidSpecError(f"label {name!r} points outside the graph")
        return cls(vertex_count, tuple(sorted(seen)), {str(k): int(v) for k, v in labels.items()})

    def adjacency(self) -> sparse.csr_matrix:
        n = self.vertex_count
        if not self.edges:
            return sparse.csr_matrix((n, n))
        e = np.asarray(self.edges, dtype=np.int64)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))

    def laplacian(self) -> sparse.csc_matrix:
        a = self.adjacency()
        deg = np.asarray(a.sum(axis=1)).ravel()
        return (sparse.diags(deg) - a).tocsc()

    def neighbour_lists(self) -> list[list[int]]:
        nbrs = [[] for _ in range(self.vertex_count)]
        for a, b in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        return [sorted(v) for v in nbrs]

    def vertex(self, key) -> int:
        """Resolve an integer index or a label to a vertex index."""
        if isinstance(key, str) and key in self.labels:
            return self.labels[key]
        try:
            v = int(key)
        except (TypeError, ValueError):
            raise PreconditionError(f"unknown vertex {key!r}") from None
        if not 0 <= v < self.vertex_count:
            raise PreconditionError(f"vertex {v} out of range")
        return v


def connected_components(g: FiniteGraph) -> list[list[int]]:
    """Vertex sets of the components, each sorted, ordered by smallest vertex."""
    if g.vertex_count == 0:
        return []
    _, comp = csgraph.connected_components(g.adjacency(), directed=False)
    groups: dict[int, list[int]] = {}
    for v, c in enumerate(comp):
        groups.setdefault(int(c), []).append(v)
    return sorted(groups.values(), key=lambda vs: vs[0])


def effective_resistance(g: FiniteGraph, a, b) -> float:
    """Effective resistance between ``a`` and ``b`` with unit resistors.

    Injects unit current at ``a``, grounds ``b`` and reads off the potential
    at ``a`` from a sparse direct solve restricted to their component.
    """
    a, b = g.vertex(a), g.vertex(b)
    if a == b:
        raise PreconditionError("effective resistance needs two distinct vertices")
    comp = next(c for c in connected_components(g) if a in c)
    if b not in comp:
        raise DisconnectedPairError(f"vertices {a} and {b} lie in different components")
    keep = [v for v in comp if v != b]
    lap = g.laplacian()[keep][:, keep].tocsc()
    rhs = np.zeros(len(keep))
    ia = keep.index(a)
    rhs[ia] = 1.0
    pot = splu(lap).solve(rhs)
    res = np.linalg.norm(lap @ pot - rhs)
    if res > RESIDUAL_TOL * max(1.0, np.linalg.norm(pot)):
        raise RuntimeError(f"resistance solve residual {res:.3e} too large")
    return float(pot[ia])


# ---------------------------------------------------------------------------
# Subgraph problems


@dataclass(frozen=True)
class SubgraphProblem:
    """A vertex set ``omega`` inside a host graph, with derived boundary data.

    ``delta`` is the vertex boundary and ``energy_edges`` the edges having at
    least one endpoint in ``omega``. ``degenerate`` is set when some component
    of the closure graph contains no boundary vertex; ``degenerate_component``
    then names one such component.
    """

    host: FiniteGraph
    omega: tuple
    delta: tuple
    energy_edges: tuple
    degenerate: bool
    degenerate_component: tuple = ()

    @property
    def closure(self) -> tuple:
        return self.omega + self.delta


def subgraph_problem(host: FiniteGraph, omega: Iterable) -> SubgraphProblem:
    om = sorted({host.vertex(v) for v in omega})
    if not om:
        raise PreconditionError("omega must be nonempty")
    inside = set(om)
    nbrs = host.neighbour_lists()
    delta = sorted({y for x in om for y in nbrs[x] if y not in inside})
    energy = tuple(e for e in host.edges if e[0] in inside or e[1] in inside)

    closure = om + delta
    index = {v: i for i, v in enumerate(closure)}
    sub = FiniteGraph.from_edges(len(closure), [(index[a], index[b]) for a, b in energy])
    degenerate_component = ()
    n_in = len(om)
    for comp in connected_components(sub):
        if all(i < n_in for i in comp):
            degenerate_component = tuple(closure[i] for i in comp)
            break
    return SubgraphProblem(
        host=host,
        omega=tuple(om),
        delta=tuple(delta),
        energy_edges=energy,
        degenerate=bool(degenerate_component),
        degenerate_component=degenerate_component,
    )


def closure_graph(p: SubgraphProblem) -> FiniteGraph:
    """The graph (closure, energy edges) relabelled to ``0..len(closure)-1``."""
    index = {v: i for i, v in enumerate(p.closure)}
    return FiniteGraph.from_edges(len(index), [(index[a], index[b]) for a, b in p.energy_edges])


# ---------------------------------------------------------------------------
# Tree gadgets


def build_gadget_chain(depths: Sequence[int]) -> FiniteGraph:
    """Chain of tree gadgets ``K_{d_1}, K_{d_2}, ...`` glued at pending vertices.

    ``K_d`` is two complete binary trees of depth ``d`` with corresponding
    leaves identified, each root carrying one pending vertex. The right
    pending vertex of block ``i`` is the left pending vertex of block
    ``i + 1``. Block ``i`` (1-based position in ``depths``) is labelled::

        K{i}:P_left   K{i}:root_left   K{i}:root_right   K{i}:P_right
    """
    depths = [int(d) for d in depths]
    if not depths:
        raise InvalidSpecError("gadget chain needs at least one depth")
    if min(depths) < 1:
        raise InvalidSpecError("gadget depths must be >= 1")

    edges: list[tuple[int, int]] = []
    labels: dict[str, int] = {}
    count = 0

    def new() -> int:
        nonlocal count
        count += 1
        return count - 1

    left_pendant = new()
    for i, d in enumerate(depths, start=1):
        labels[f"K{i}:P_left"] = left_pendant
        root_l, root_r = new(), new()
        edges += [(left_pendant, root_l)]
        level_l, level_r = [root_l], [root_r]
        for depth in range(1, d + 1):
            last = depth == d
            next_l, next_r = [], []
            for pl, pr in zip(level_l, level_r):
                for _ in range(2):
                    if last:
                        leaf = new()
                        edges += [(pl, leaf), (pr, leaf)]
                    else:
                        cl, cr = new(), new()
                        edges += [(pl, cl), (pr, cr)]
                        next_l.append(cl)
                        next_r.append(cr)
            level_l, level_r = next_l, next_r
        right_pendant = new()
        edges += [(root_r, right_pendant)]
        labels[f"K{i}:root_left"] = root_l
        labels[f"K{i}:root_right"] = root_r
        labels[f"K{i}:P_right"] = right_pendant
        left_pendant = right_pendant
    return FiniteGraph.from_edges(count, edges, labels)


def gadget_block(g: FiniteGraph, i: int) -> list[int]:
    """Vertices of block ``K_i`` (pending vertices included) in a gadget chain."""
    try:
        p_left, p_right = g.labels[f"K{i}:P_left"], g.labels[f"K{i}:P_right"]
        root = g.labels[f"K{i}:root_left"]
    except KeyError:
        raise PreconditionError(f"graph has no gadget block K{i}") from None
    cut = {p_left, p_right}
    nbrs = g.neighbour_lists()
    seen = {root}
    stack = [root]
    while stack:
        x = stack.pop()
        for y in nbrs[x]:
            if y not in seen and y not in cut:
                seen.add(y)
                stack.append(y)
    return sorted(seen | cut)


def gadget_problem(depth: int) -> SubgraphProblem:
    """The problem ``Omega = K_depth`` inside a chain long enough to hold its closure.

    For ``depth >= 2`` the host is the chain ``[depth-1, depth, depth+1]`` and
    the block has two boundary vertices. For ``depth == 1`` the block is the
    head of the infinite chain and has a single boundary vertex.
    """
    if depth < 1:
        raise InvalidSpecError("gadget depth must be >= 1")
    if depth == 1:
        g = build_gadget_chain([1, 2])
        return subgraph_problem(g, gadget_block(g, 1))
    g = build_gadget_chain([depth - 1, depth, depth + 1])
    return subgraph_problem(g, gadget_block(g, 2))


def gadget_census(depth: int) -> tuple[int, int]:
    """Closed-form ``(vertices, edges)`` of a single block ``K_depth``."""
    tree = 2 ** (depth + 1) - 1
    vertices = 2 * tree - 2**depth + 2
    edges = 2 * (tree - 1) + 2
    return vertices, edges


# ---------------------------------------------------------------------------
# Graph file format: {"vertices": int, "edges": [[int, int], ...], "labels": {...}}


def graph_to_json(g: FiniteGraph) -> dict:
    return {
        "vertices": g.vertex_count,
        "edges": [list(e) for e in g.edges],
        "labels": dict(sorted(g.labels.items())),
    }


def graph_from_json(obj: dict) -> FiniteGraph:
    try:
        return FiniteGraph.from_edges(obj["vertices"], obj.get("edges", []), obj.get("labels"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidSpecError):
            raise
        raise InvalidSpecError(f"malformed graph object: {exc}") from exc


def read_graph(path) -> FiniteGraph:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidSpecError(f"{path}: {exc}") from exc
    return graph_from_json(obj)


def write_graph(g: FiniteGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_json(g), separators=(",", ":")) + "\n")
