"""Independent brute-force oracles the fast implementations are checked against.

Everything here applies the definitions literally: simple cycles are
enumerated by exhaustive DFS over vertex-simple walks, the entrance test
quantifies over every enumerated cycle, and word normal forms are computed
by exploring *every* rewrite order.  None of it shares code paths with the
production implementations beyond the basic graph accessors.
"""

from __future__ import annotations

from afembed.graph import Graph
from afembed.loops import Verdict
from afembed.terms import ZERO, StarContext, reduce_pair


def enumerate_simple_cycles(g: Graph) -> list[tuple[str, ...]]:
    """All simple cycles as edge tuples in traversal order, one per rotation.

    A cycle is recorded only from its smallest vertex, so each cyclic
    rotation appears exactly once; parallel edges give distinct cycles.
    """
    cycles: list[tuple[str, ...]] = []

    def dfs(start: str, current: str, visited: set[str], trail: list[str]):
        for e in sorted(g.out_edges(current), key=lambda e: e.name):
            if e.range == start:
                cycles.append(tuple(trail + [e.name]))
            elif e.range not in visited and e.range > start:
                visited.add(e.range)
                trail.append(e.name)
                dfs(start, e.range, visited, trail)
                trail.pop()
                visited.discard(e.range)

    for v in sorted(g.vertices):
        dfs(v, v, {v}, [])
    return cycles


def cycle_vertex_set(g: Graph, cycle: tuple[str, ...]) -> set[str]:
    return {g.edge(e).source for e in cycle}


def oracle_cycle_vertices(g: Graph) -> frozenset[str]:
    out: set[str] = set()
    for cycle in enumerate_simple_cycles(g):
        out |= cycle_vertex_set(g, cycle)
    return frozenset(out)


def oracle_classify(g: Graph) -> Verdict:
    """Literal reading of the trichotomy over enumerated simple cycles."""
    cycles = enumerate_simple_cycles(g)
    if not cycles:
        return Verdict.AF
    for cycle in cycles:
        ranges = [g.edge(e).range for e in cycle]
        if any(len(g.receivers(v)) > 1 for v in ranges):
            return Verdict.NOT_FINITE
    return Verdict.AF_EMBEDDABLE_NOT_AF


def oracle_has_entrance(g: Graph) -> bool:
    return oracle_classify(g) is Verdict.NOT_FINITE


def all_order_normal_forms(ctx: StarContext, word: tuple) -> set:
    """Every normal form reachable by any sequence of rewrite choices.

    ``ZERO`` results are represented by the element ``None`` in the set.
    Confluence means the returned set is a singleton.
    """
    seen: dict[tuple, set] = {}

    def explore(w: tuple) -> set:
        if w in seen:
            return seen[w]
        seen[w] = set()  # guard; words strictly shrink so no real cycles
        results: set = set()
        reducible = False
        for i in range(len(w) - 1):
            step = reduce_pair(ctx, w[i], w[i + 1])
            if step == "keep":
                continue
            reducible = True
            if step is ZERO:
                results.add(None)
            else:
                results |= explore(w[:i] + (step,) + w[i + 2 :])
        if not reducible:
            results = {w}
        seen[w] = results
        return results

    return explore(tuple(word))


def count_paths_with_range(g: Graph, v: str, length: int) -> int:
    """Path count by explicit enumeration (checks the product formula)."""
    if length == 0:
        return 1 if g.has_vertex(v) else 0
    frontier = [((e.name,), e.source) for e in g.edges if e.range == v]
    for _ in range(length - 1):
        frontier = [
            (edges + (e.name,), e.source)
            for edges, src in frontier
            for e in g.edges
            if e.range == src
        ]
    return len(frontier)
