"""Loop replacement by Bratteli tails and the generator embedding.

Each disjoint simple loop ``(e_n, ..., e_1)`` of an entrance-free graph is
removed and replaced by a single-sink tail: a fresh vertex ``v``, edges
``f_i : v -> u_i`` into the loop vertices, and levels ``L_1, L_2, ...``
with ``mult(k)`` parallel edges from level ``k`` to level ``k-1``.  The
corner at ``v`` is then a UHF algebra carrying a unitary ``t`` whose power
spectrum fills the circle, and the loop generators embed as
``e_i |-> s(f_{i+1}) t s*(f_i)`` with ``f_{n+1} = f_1``.

The augmented graph is conceptually infinite in the tail direction; it is
materialized to finite depth on demand and answers full receiver sets
lazily, which is what the symbolic rewriting needs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .graph import Edge, Graph
from .loops import EntranceExistsError, SimpleLoop, Verdict, classify
from .terms import CKTerm, ContextMismatchError, NormalMonomial, StarContext


class NamespaceCollisionError(ValueError):
    pass


@dataclass(frozen=True)
class MultiplicitySeq:
    """Edge multiplicities per tail level: a finite prefix, then a constant.

    Every entry is at least 1 and the repeating tail value at least 2, so
    the level sizes grow without bound and the corner is an
    infinite-dimensional UHF algebra.
    """

    prefix: tuple[int, ...] = ()
    tail: int = 2

    def __post_init__(self):
        if any(m < 1 for m in self.prefix):
            raise ValueError("multiplicities must be >= 1")
        if self.tail < 2:
            raise ValueError(
                "the repeating multiplicity must be >= 2 so that entries >= 2 occur infinitely often"
            )

    def value(self, k: int) -> int:
        if k < 1:
            raise ValueError("levels are 1-based")
        return self.prefix[k - 1] if k <= len(self.prefix) else self.tail

    def level_sizes(self, depth: int) -> list[int]:
        """Path counts into the sink per level: ``N_k = prod_{j<=k} mult(j)``."""
        sizes = [1]
        for k in range(1, depth + 1):
            sizes.append(sizes[-1] * self.value(k))
        return sizes

    @classmethod
    def parse(cls, text: str) -> "MultiplicitySeq":
        """Parse ``"m1,m2,...;tail"`` or a bare tail value."""
        text = text.strip()
        if ";" in text:
            head, _, tail = text.partition(";")
            prefix = tuple(int(x) for x in head.split(",") if x.strip())
            return cls(prefix, int(tail))
        return cls((), int(text))

    def render(self) -> str:
        if not self.prefix:
            return str(self.tail)
        return ",".join(str(m) for m in self.prefix) + f";{self.tail}"


@dataclass(frozen=True)
class BratteliTailSpec:
    """One single-sink tail: namespace for generated ids plus multiplicities."""

    namespace: str
    mult: MultiplicitySeq = field(default_factory=MultiplicitySeq)

    @property
    def sink(self) -> str:
        return f"{self.namespace}.v"

    def level_vertex(self, k: int) -> str:
        return f"{self.namespace}.L{k}.1"

    def level_or_sink(self, k: int) -> str:
        return self.sink if k == 0 else self.level_vertex(k)

    def tail_edge(self, k: int, m: int) -> str:
        return f"{self.namespace}.b{k}.{m}"

    def f_edge(self, i: int) -> str:
        return f"{self.namespace}.f{i}"


@dataclass(frozen=True)
class LoopReplacement:
    loop: SimpleLoop
    tail: BratteliTailSpec

    @property
    def f_edges(self) -> tuple[str, ...]:
        return tuple(self.tail.f_edge(i) for i in range(1, self.loop.n + 1))

    def f_edge_for(self, i: int) -> str:
        """``f_i`` with the cyclic convention ``f_{n+1} = f_1``."""
        return self.tail.f_edge((i - 1) % self.loop.n + 1)


_TAIL_EDGE_RE = re.compile(r"^(?P<ns>.+)\.b(?P<k>\d+)\.(?P<m>\d+)$")
_LEVEL_VERTEX_RE = re.compile(r"^(?P<ns>.+)\.L(?P<k>\d+)\.1$")


class AugmentedGraphSpec(StarContext):
    """The replaced graph: finite base plus lazily infinite tails.

    Acts as the symbolic context for the rewriting engine: edge endpoints
    and receiver sets are answered for the full graph, with tail levels
    resolved by parsing generated ids against each tail's namespace.
    """

    def __init__(self, base: Graph, replacements: tuple[LoopReplacement, ...]):
        self.base = base
        self.replacements = tuple(replacements)
        self._tails = {rep.tail.namespace: rep for rep in self.replacements}
        if len(self._tails) != len(self.replacements):
            raise NamespaceCollisionError("tail namespaces must be distinct")
        self._sinks = {rep.tail.sink: rep.tail.namespace for rep in self.replacements}
        self._finite_edges: dict[str, tuple[str, str]] = {
            e.name: (e.source, e.range) for e in base.edges
        }
        self._receiver_extra: dict[str, set[str]] = {}
        for rep in self.replacements:
            for i, f in enumerate(rep.f_edges, start=1):
                u_i = rep.loop.vertices[i - 1]
                if f in self._finite_edges:
                    raise NamespaceCollisionError(f"generated edge id {f!r} already in base graph")
                self._finite_edges[f] = (rep.tail.sink, u_i)
                self._receiver_extra.setdefault(u_i, set()).add(f)
        for v in self._sinks:
            if v in base.vertices:
                raise NamespaceCollisionError(f"generated vertex id {v!r} already in base graph")

    # --- reconstruction of the replaced source graph -----------------------

    def original_graph(self) -> Graph:
        """The input graph: base plus the removed loop edges."""
        edges = [(e.name, e.source, e.range) for e in self.base.edges]
        for rep in self.replacements:
            loop = rep.loop
            for i in range(1, loop.n + 1):
                u_i = loop.vertices[i - 1]
                u_next = loop.vertices[i % loop.n]
                edges.append((loop.edge_index(i), u_i, u_next))
        return Graph.build(self.base.vertices, edges)

    def ck_family_graph(self) -> Graph:
        return self.original_graph()

    def replacement_for(self, loop: SimpleLoop) -> LoopReplacement:
        for rep in self.replacements:
            if rep.loop == loop:
                return rep
        raise KeyError(f"loop {loop.edges!r} is not among the replacements")

    # --- StarContext ---------------------------------------------------------

    def _parse_tail_vertex(self, v: str) -> tuple[BratteliTailSpec, int] | None:
        if v in self._sinks:
            return self._tails[self._sinks[v]].tail, 0
        m = _LEVEL_VERTEX_RE.match(v)
        if m and m.group("ns") in self._tails:
            return self._tails[m.group("ns")].tail, int(m.group("k"))
        return None

    def _parse_tail_edge(self, e: str) -> tuple[BratteliTailSpec, int, int] | None:
        m = _TAIL_EDGE_RE.match(e)
        if not m or m.group("ns") not in self._tails:
            return None
        tail = self._tails[m.group("ns")].tail
        k, mm = int(m.group("k")), int(m.group("m"))
        if k < 1 or not (1 <= mm <= tail.mult.value(k)):
            return None
        return tail, k, mm

    def has_vertex(self, v: str) -> bool:
        return v in self.base.vertices or self._parse_tail_vertex(v) is not None

    def edge_source(self, e: str) -> str:
        if e in self._finite_edges:
            return self._finite_edges[e][0]
        parsed = self._parse_tail_edge(e)
        if parsed is None:
            raise ContextMismatchError(f"unknown edge {e!r}")
        tail, k, _ = parsed
        return tail.level_or_sink(k)

    def edge_range(self, e: str) -> str:
        if e in self._finite_edges:
            return self._finite_edges[e][1]
        parsed = self._parse_tail_edge(e)
        if parsed is None:
            raise ContextMismatchError(f"unknown edge {e!r}")
        tail, k, _ = parsed
        return tail.level_or_sink(k - 1)

    def receivers(self, v: str) -> frozenset[str]:
        if v in self.base.vertices:
            return self.base.receivers(v) | frozenset(self._receiver_extra.get(v, ()))
        parsed = self._parse_tail_vertex(v)
        if parsed is None:
            raise ContextMismatchError(f"unknown vertex {v!r}")
        tail, k = parsed
        mult = tail.mult.value(k + 1)
        return frozenset(tail.tail_edge(k + 1, m) for m in range(1, mult + 1))

    def sink_vertex(self, namespace: str) -> str:
        if namespace not in self._tails:
            raise ContextMismatchError(f"unknown tail namespace {namespace!r}")
        return self._tails[namespace].tail.sink

    def sink_namespace(self, v: str) -> str | None:
        return self._sinks.get(v)


@dataclass(frozen=True)
class GeneratorMap:
    """Images of the input graph's generators inside the augmented algebra.

    Vertices map identically; an unreplaced edge maps to its own isometry
    and the i-th edge of a replaced loop to ``s(f_{i+1}) t s*(f_i)``.
    """

    vertex_map: dict[str, str]
    edge_map: dict[str, CKTerm]


def _pick_namespaces(g: Graph, count: int) -> list[str]:
    taken = set(g.vertices) | {e.name for e in g.edges}

    def collides(ns: str) -> bool:
        prefix = ns + "."
        return any(t == ns or t.startswith(prefix) for t in taken)

    out: list[str] = []
    i = 1
    while len(out) < count:
        ns = f"T{i}"
        i += 1
        if not collides(ns):
            out.append(ns)
    return out


def embed(g: Graph, mult: MultiplicitySeq | None = None) -> tuple[AugmentedGraphSpec, GeneratorMap]:
    """Replace every loop by a tail and produce the generator embedding.

    Requires the no-entrance condition; the raised error carries the
    entrance witness otherwise.  Loop-free inputs come back unchanged with
    the identity map.
    """
    mult = mult or MultiplicitySeq()
    cls = classify(g)
    if cls.verdict is Verdict.NOT_FINITE:
        assert cls.witness is not None
        raise EntranceExistsError(cls.witness)
    loops = cls.loops
    loop_edge_names = {e for loop in loops for e in loop.edges}
    base = Graph.build(g.vertices, [e for e in g.edges if e.name not in loop_edge_names])
    namespaces = _pick_namespaces(g, len(loops))
    replacements = tuple(
        LoopReplacement(loop, BratteliTailSpec(ns, mult))
        for loop, ns in zip(loops, namespaces)
    )
    spec = AugmentedGraphSpec(base, replacements)

    vertex_map = {v: v for v in sorted(g.vertices)}
    edge_map: dict[str, CKTerm] = {}
    for e in g.edges:
        if e.name not in loop_edge_names:
            edge_map[e.name] = CKTerm.of(NormalMonomial((e.name,), 0, (), e.source))
    for rep in replacements:
        sink = rep.tail.sink
        for i in range(1, rep.loop.n + 1):
            edge_map[rep.loop.edge_index(i)] = CKTerm.of(
                NormalMonomial((rep.f_edge_for(i + 1),), 1, (rep.f_edge_for(i),), sink)
            )
    return spec, GeneratorMap(vertex_map=vertex_map, edge_map=edge_map)


def materialize(spec: AugmentedGraphSpec, depth: int) -> Graph:
    """The finite stage ``F_d``: base, f-edges, and ``depth`` tail levels."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    host_ids = set(spec.base.vertices) | {e.name for e in spec.base.edges}
    vertices = list(spec.base.vertices)
    edges: list[tuple[str, str, str]] = [(e.name, e.source, e.range) for e in spec.base.edges]
    for rep in spec.replacements:
        tail = rep.tail
        generated_vertices = [tail.sink] + [tail.level_vertex(k) for k in range(1, depth + 1)]
        generated_edges: list[tuple[str, str, str]] = []
        for i in range(1, rep.loop.n + 1):
            generated_edges.append((tail.f_edge(i), tail.sink, rep.loop.vertices[i - 1]))
        for k in range(1, depth + 1):
            for m in range(1, tail.mult.value(k) + 1):
                generated_edges.append(
                    (tail.tail_edge(k, m), tail.level_vertex(k), tail.level_or_sink(k - 1))
                )
        for vid in generated_vertices:
            if vid in host_ids:
                raise NamespaceCollisionError(f"generated id {vid!r} collides with the base graph")
        for eid, _, _ in generated_edges:
            if eid in host_ids:
                raise NamespaceCollisionError(f"generated id {eid!r} collides with the base graph")
        vertices.extend(generated_vertices)
        edges.extend(generated_edges)
    return Graph.build(vertices, edges)


def corner_dimension(spec: AugmentedGraphSpec, tail_index: int, depth: int) -> list[int]:
    """Matrix sizes of the corner's finite stages: paths into the sink per level."""
    rep = spec.replacements[tail_index]
    return rep.tail.mult.level_sizes(depth)


# ---------------------------------------------------------------------------
# serialization


def spec_to_dict(spec: AugmentedGraphSpec) -> dict:
    from .graph import graph_to_dict

    return {
        "base": graph_to_dict(spec.base),
        "replacements": [
            {
                "loop_edges": list(rep.loop.edges),
                "loop_vertices": list(rep.loop.vertices),
                "namespace": rep.tail.namespace,
                "sink": rep.tail.sink,
                "f_edges": list(rep.f_edges),
                "mult": {"prefix": list(rep.tail.mult.prefix), "tail": rep.tail.mult.tail},
            }
            for rep in spec.replacements
        ],
    }


def spec_from_dict(obj: dict) -> AugmentedGraphSpec:
    from .graph import graph_from_dict

    base = graph_from_dict(obj["base"])
    replacements = []
    for r in obj["replacements"]:
        loop = SimpleLoop(tuple(r["loop_edges"]), tuple(r["loop_vertices"]))
        mult = MultiplicitySeq(tuple(r["mult"]["prefix"]), r["mult"]["tail"])
        replacements.append(LoopReplacement(loop, BratteliTailSpec(r["namespace"], mult)))
    return AugmentedGraphSpec(base, tuple(replacements))


def genmap_to_text(gmap: GeneratorMap, spec: AugmentedGraphSpec) -> str:
    from .terms import term_to_str

    lines = ["# generator map: edge id = image term"]
    for e in sorted(gmap.edge_map):
        lines.append(f"{e} = {term_to_str(gmap.edge_map[e], spec)}")
    return "\n".join(lines) + "\n"


def genmap_from_text(text: str, spec: AugmentedGraphSpec) -> GeneratorMap:
    from .terms import parse_term

    edge_map: dict[str, CKTerm] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected '<edge-id> = <term>'")
        name, _, rhs = line.partition("=")
        edge_map[name.strip()] = parse_term(rhs.strip(), spec)
    vertex_map = {v: v for v in sorted(spec.original_graph().vertices)}
    return GeneratorMap(vertex_map=vertex_map, edge_map=edge_map)
