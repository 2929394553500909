"""Cycle and entrance analysis: the finiteness classifier with witnesses.

The decision procedure reduces "no loop has an entrance" to "every vertex
lying on a cycle has exactly one receiving edge".  If a cycle vertex had a
second receiver, the loop through it would have an entrance there; and an
entrance at a loop vertex is by definition a second receiver at that
vertex.  Entrances of non-simple loops add nothing: every vertex of a
closed walk lies on a simple cycle, so the check over cycle vertices is
equivalent to the literal quantification over all loops.  This makes the
classifier O(|V| + |E|) via strongly connected components instead of an
exponential cycle enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .graph import Graph, Path


class Verdict(str, Enum):
    AF = "AF"
    AF_EMBEDDABLE_NOT_AF = "AF_EMBEDDABLE_NOT_AF"
    NOT_FINITE = "NOT_FINITE"


class InvalidWitnessError(ValueError):
    pass


class EntranceExistsError(ValueError):
    """Raised when an operation requires the no-entrance condition."""

    def __init__(self, witness: "EntranceWitness"):
        self.witness = witness
        super().__init__(
            f"loop through {witness.entry_vertex!r} has an entrance "
            f"(edge {witness.entry_edge!r})"
        )


@dataclass(frozen=True)
class SimpleLoop:
    """A loop ``(e_n, ..., e_1)`` whose range vertices are pairwise distinct.

    ``vertices`` lists ``u_i = source(e_i)`` in the order ``(u_1, ..., u_n)``;
    the loop is based at ``u_1``.
    """

    edges: tuple[str, ...]
    vertices: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.edges)

    @property
    def base(self) -> str:
        return self.vertices[0]

    def edge_index(self, i: int) -> str:
        """The edge ``e_i`` (1-based; the stored tuple is ``(e_n, ..., e_1)``)."""
        return self.edges[self.n - i]

    def edge_into(self, v: str) -> str:
        """The unique loop edge with range ``v``."""
        i = self.vertices.index(v)  # range(e_{i}) = u_{i+1}, cyclically
        return self.edge_index(self.n if i == 0 else i)

    def based_at(self, v: str) -> "SimpleLoop":
        """Cyclic rotation so that the loop starts and ends at ``v``."""
        k = self.vertices.index(v)
        if k == 0:
            return self
        verts = self.vertices[k:] + self.vertices[:k]
        # traversal order is reversed(self.edges); rotate there, then flip back
        trav = tuple(reversed(self.edges))
        trav = trav[k:] + trav[:k]
        return SimpleLoop(tuple(reversed(trav)), verts)

    @classmethod
    def from_edges(cls, g: Graph, edges: tuple[str, ...]) -> "SimpleLoop":
        if not edges:
            raise InvalidWitnessError("a loop has at least one edge")
        if not g.is_path(edges):
            raise InvalidWitnessError(f"edges do not compose: {edges!r}")
        first, last = g.edge(edges[0]), g.edge(edges[-1])
        if first.range != last.source:
            raise InvalidWitnessError("path does not close up into a loop")
        ranges = [g.edge(e).range for e in edges]
        if len(set(ranges)) != len(ranges):
            raise InvalidWitnessError("loop is not simple: repeated range vertex")
        vertices = tuple(g.edge(e).source for e in reversed(edges))
        return cls(edges, vertices)


@dataclass(frozen=True)
class EntranceWitness:
    """Data certifying that some loop has an entrance.

    ``alpha`` is the loop based at ``entry_vertex``; ``beta`` is a distinct
    path with the same range (canonically the single entry edge).  Together
    they exhibit ``p`` at the entry vertex as an infinite projection.
    """

    loop: SimpleLoop
    entry_vertex: str
    entry_edge: str
    alpha: Path
    beta: Path


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    loops: tuple[SimpleLoop, ...] = ()
    witness: EntranceWitness | None = None


@dataclass(frozen=True)
class InfiniteProjectionStatement:
    """Rendered inequality chain showing an infinite projection."""

    vertex: str
    alpha: Path
    beta: Path
    lines: tuple[str, ...]

    def render(self) -> str:
        return "\n".join(self.lines)


def _strongly_connected_components(g: Graph) -> list[set[str]]:
    """Iterative Tarjan over the vertex adjacency (parallel edges collapsed)."""
    succ: dict[str, list[str]] = {v: [] for v in g.vertices}
    for e in g.edges:
        succ[e.source].append(e.range)
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = 0
    components: list[set[str]] = []

    for root in sorted(g.vertices):
        if root in index:
            continue
        work: list[tuple[str, int]] = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            advanced = False
            for j in range(pi, len(succ[v])):
                w = succ[v][j]
                if w not in index:
                    work[-1] = (v, j + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp: set[str] = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                components.append(comp)
    return components


def cycle_vertices(g: Graph) -> frozenset[str]:
    """Vertices lying on at least one loop."""
    result: set[str] = set()
    for comp in _strongly_connected_components(g):
        if len(comp) > 1:
            result |= comp
    for e in g.edges:
        if e.source == e.range:
            result.add(e.source)
    return frozenset(result)


def simple_cycle_through(g: Graph, v: str) -> SimpleLoop:
    """First simple cycle through ``v`` found by DFS, edges tried in id order.

    ``v`` must lie on a cycle.  The result is based at ``v``.
    """
    # backtracking DFS over vertex-simple paths starting at v
    chosen: list[str] = []
    visited: set[str] = {v}

    def sorted_out(w: str):
        return sorted(g.out_edges(w), key=lambda e: e.name)

    stack = [iter(sorted_out(v))]
    current = [v]
    while stack:
        it = stack[-1]
        advanced = False
        for e in it:
            if e.range == v:
                traversal = chosen + [e.name]
                return SimpleLoop.from_edges(g, tuple(reversed(traversal)))
            if e.range not in visited:
                chosen.append(e.name)
                visited.add(e.range)
                current.append(e.range)
                stack.append(iter(sorted_out(e.range)))
                advanced = True
                break
        if not advanced:
            stack.pop()
            if chosen:
                visited.discard(current.pop())
                chosen.pop()
    raise ValueError(f"vertex {v!r} does not lie on a cycle")


def entrance_violation(g: Graph) -> tuple[str, str] | None:
    """A cycle vertex with more than one receiver, or None if there is none.

    The returned edge is the smallest receiver that is not the loop's own
    incoming edge at that vertex, i.e. an entry edge usable in a witness.
    """
    for v in sorted(cycle_vertices(g)):
        rec = g.receivers(v)
        if len(rec) > 1:
            loop = simple_cycle_through(g, v)
            entry = min(rec - {loop.edge_into(v)})
            return v, entry
    return None


def make_entrance_witness(g: Graph) -> EntranceWitness:
    violation = entrance_violation(g)
    if violation is None:
        raise ValueError("graph has no loop with an entrance")
    v, entry = violation
    loop = simple_cycle_through(g, v)
    return EntranceWitness(
        loop=loop,
        entry_vertex=v,
        entry_edge=entry,
        alpha=g.path(loop.edges),
        beta=g.path((entry,)),
    )


def disjoint_simple_loops(g: Graph) -> list[SimpleLoop]:
    """All loops of an entrance-free graph, traced along unique receivers.

    Every cycle vertex appears in exactly one returned loop, and the loops
    are pairwise vertex- and edge-disjoint.  Each loop is based at its
    smallest vertex; loops are sorted by base vertex.
    """
    if entrance_violation(g) is not None:
        raise EntranceExistsError(make_entrance_witness(g))
    seen: set[str] = set()
    loops: list[SimpleLoop] = []
    for v in sorted(cycle_vertices(g)):
        if v in seen:
            continue
        edges: list[str] = []
        vertices: list[str] = [v]
        cur = v
        while True:
            (e_name,) = g.receivers(cur)
            edges.append(e_name)
            cur = g.edge(e_name).source
            if cur == v:
                break
            vertices.append(cur)
        # edges collected as (e_n, e_{n-1}, ..., e_1); visited v, u_n, ..., u_2
        loop = SimpleLoop(tuple(edges), (v,) + tuple(reversed(vertices[1:])))
        seen.update(loop.vertices)
        loops.append(loop)
    return loops


def classify(g: Graph) -> Classification:
    """Apply the finiteness trichotomy: AF, AF-embeddable, or not finite."""
    if not cycle_vertices(g):
        return Classification(Verdict.AF)
    if entrance_violation(g) is not None:
        return Classification(Verdict.NOT_FINITE, witness=make_entrance_witness(g))
    return Classification(
        Verdict.AF_EMBEDDABLE_NOT_AF, loops=tuple(disjoint_simple_loops(g))
    )


def validate_witness(g: Graph, w: EntranceWitness) -> None:
    loop = SimpleLoop.from_edges(g, w.loop.edges)
    if loop.vertices != w.loop.vertices:
        raise InvalidWitnessError("loop vertex list inconsistent with its edges")
    if w.entry_vertex != loop.base:
        raise InvalidWitnessError("loop is not based at the entry vertex")
    if w.entry_edge in loop.edges:
        raise InvalidWitnessError("entry edge lies on the loop")
    if g.edge(w.entry_edge).range != w.entry_vertex:
        raise InvalidWitnessError("entry edge does not point at the entry vertex")
    if len(g.receivers(w.entry_vertex)) <= 1:
        raise InvalidWitnessError("entry vertex has a unique receiver; no entrance")
    if w.alpha.edges != loop.edges:
        raise InvalidWitnessError("alpha must be the witness loop as a path")
    beta = g.path(w.beta.edges) if w.beta.edges else w.beta
    if beta.range != w.entry_vertex:
        raise InvalidWitnessError("beta must range at the entry vertex")
    if w.alpha == w.beta:
        raise InvalidWitnessError("alpha and beta must be distinct paths")


def witness_infinite(g: Graph, w: EntranceWitness) -> InfiniteProjectionStatement:
    """Render the strict-inequality chain exhibiting an infinite projection."""
    validate_witness(g, w)
    v = w.entry_vertex
    a = " ".join(f"s({e})" for e in w.alpha.edges)
    b = " ".join(f"s({e})" for e in w.beta.edges)
    a_star = " ".join(f"s*({e})" for e in reversed(w.alpha.edges))
    b_star = " ".join(f"s*({e})" for e in reversed(w.beta.edges))
    lines = (
        f"alpha = {w.alpha} : {w.alpha.source} -> {w.alpha.range}",
        f"beta  = {w.beta} : {w.beta.source} -> {w.beta.range}",
        f"{a_star} {a} = p({v})",
        f"{b_star} {b} = p({w.beta.source})",
        f"{a_star} {b} = 0",
        f"{a} {a_star} < {a} {a_star} + {b} {b_star} <= p({v})",
        f"p({v}) is equivalent to a proper subprojection of itself: infinite",
    )
    return InfiniteProjectionStatement(vertex=v, alpha=w.alpha, beta=w.beta, lines=lines)
