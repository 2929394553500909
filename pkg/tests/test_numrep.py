import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from afembed.embedding import MultiplicitySeq, embed
from afembed.numrep import (
    PathBasis,
    RepresentationError,
    build_rep,
    loop_spectrum,
    op_of_term,
    relation_residuals,
    spectral_net_bound,
)
from afembed.terms import NormalMonomial, CKTerm, term_of_word

ALG_TOL = 1e-12
SPEC_TOL = 1e-10


@pytest.fixture(scope="module")
def square_rep(square_embedding):
    spec, _ = square_embedding
    return build_rep(spec, 4)


def _dense(x):
    return x.toarray() if sp.issparse(x) else np.asarray(x)


class TestBuildRep:
    def test_depth_zero_rejected(self, square_embedding):
        spec, _ = square_embedding
        with pytest.raises(RepresentationError):
            build_rep(spec, 0)

    def test_corner_block_sizes(self, square_embedding):
        spec, _ = square_embedding
        rep = build_rep(spec, 3)
        levels = rep.corner_levels["T1"]
        assert [len(level) for level in levels] == [1, 2, 4, 8]
        assert sum(len(level) for level in levels) == 15

    def test_depth_one_block_is_plus_minus_one(self, square_embedding):
        spec, _ = square_embedding
        rep = build_rep(spec, 1)
        level1 = rep.corner_levels["T1"][1]
        t = rep.T["T1"]
        entries = [complex(t[i, i]) for i in level1]
        assert np.allclose(sorted(entries, key=lambda z: z.real), [-1.0, 1.0])

    def test_unitary_on_corner(self, square_rep):
        t = square_rep.T["T1"]
        p_v = square_rep.P["T1.v"]
        assert np.max(np.abs(_dense(t @ t.conjugate().T - p_v))) <= ALG_TOL
        assert np.max(np.abs(_dense(t.conjugate().T @ t - p_v))) <= ALG_TOL

    def test_t_supported_on_corner(self, square_rep):
        t = square_rep.T["T1"]
        p_v = square_rep.P["T1.v"]
        assert np.max(np.abs(_dense(p_v @ t - t))) == 0.0
        assert np.max(np.abs(_dense(t @ p_v - t))) == 0.0

    def test_generator_co_isometry_exact_below_boundary(self, square_rep):
        """S[e]* S[e] = P[source(e)] exactly on all paths shorter than the
        depth, vertex vectors included; only the boundary layer truncates."""
        n = square_rep.dimension
        below = [
            i for i, p in enumerate(square_rep.basis.paths) if len(p.edges) <= square_rep.depth - 1
        ]
        mask = sp.csr_matrix(
            (np.ones(len(below)), (below, below)), shape=(n, n), dtype=np.complex128
        )
        for e in square_rep.graph.edges:
            s = square_rep.S[e.name]
            diff = (s.conjugate().T @ s - square_rep.P[e.source]) @ mask
            assert np.max(np.abs(_dense(diff))) == 0.0

    def test_edge_isometry_action(self, square_rep):
        s = square_rep.S["T1.f1"]
        # moves each corner path of length < d to its f1-extension
        v_path = square_rep.graph.vertex_path("T1.v")
        i = square_rep.basis.index[v_path]
        out = s @ np.eye(square_rep.dimension)[:, i]
        target = square_rep.graph.path(("T1.f1",))
        assert out[square_rep.basis.index[target]] == 1.0
        assert np.sum(np.abs(out)) == 1.0


class TestOpOfTerm:
    def test_projection_trace_counts_paths(self, square_rep):
        p = op_of_term(CKTerm.of(NormalMonomial((), 0, (), "u1")), square_rep)
        ranging = [q for q in square_rep.basis.paths if q.range == "u1"]
        assert abs(_dense(p).trace() - len(ranging)) < 1e-14

    def test_mapped_edge_is_partial_isometry(self, square_embedding, square_rep):
        spec, gmap = square_embedding
        a = op_of_term(gmap.edge_map["e1"], square_rep)
        pi = square_rep.interior_projector()
        p_u1 = op_of_term(CKTerm.of(NormalMonomial((), 0, (), "u1")), square_rep)
        diff = pi @ (a.conjugate().T @ a - p_u1) @ pi
        assert np.max(np.abs(_dense(diff))) <= ALG_TOL

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_normal_form_matches_word_product(self, square_embedding, data):
        """Symbolic normalization and raw matrix multiplication agree on the
        interior compression."""
        spec, _ = square_embedding
        rep = build_rep(spec, 3)
        pool = [("p", "u1"), ("p", "T1.v")]
        for e in ("T1.f1", "T1.f2", "T1.b1.1", "T1.b1.2", "T1.b2.1"):
            pool.append(("s", e))
            pool.append(("s*", e))
        pool.append(("t", "T1", 1))
        pool.append(("t", "T1", -1))
        n = data.draw(st.integers(min_value=1, max_value=5))
        word = tuple(data.draw(st.sampled_from(pool)) for _ in range(n))
        try:
            term = term_of_word(spec, word)
        except Exception:
            assume(False)
            return
        symbolic = op_of_term(term, rep)
        numeric = sp.identity(rep.dimension, dtype=np.complex128, format="csr")
        for atom in reversed(word):
            numeric = _atom_matrix(rep, atom) @ numeric
        pi = rep.interior_projector()
        diff = pi @ (symbolic - numeric) @ pi
        assert np.max(np.abs(_dense(diff))) <= SPEC_TOL


def _atom_matrix(rep, atom):
    if atom[0] == "p":
        return rep.P[atom[1]]
    if atom[0] == "s":
        return rep.S[atom[1]]
    if atom[0] == "s*":
        return rep.S[atom[1]].conjugate().T.tocsr()
    ns, k = atom[1], atom[2]
    base = rep.T[ns] if k > 0 else rep.T[ns].conjugate().T.tocsr()
    out = base
    for _ in range(abs(k) - 1):
        out = out @ base
    return out


class TestRelationResiduals:
    def test_square_all_within_tolerance(self, square_embedding, square_rep):
        spec, gmap = square_embedding
        report = relation_residuals(square_rep, gmap)
        assert report.entries
        assert report.max_residual <= ALG_TOL

    def test_boundary_defect_is_exactly_one(self, square_embedding, square_rep):
        spec, gmap = square_embedding
        report = relation_residuals(square_rep, gmap)
        assert len(report.boundary_defects) == 4
        for entry in report.boundary_defects:
            assert entry.value == pytest.approx(1.0, abs=1e-14)

    def test_csv_shape(self, square_embedding, square_rep):
        spec, gmap = square_embedding
        report = relation_residuals(square_rep, gmap)
        lines = report.to_csv().strip().splitlines()
        assert lines[0] == "instance,residual"
        assert len(lines) == 1 + len(report.entries) + len(report.boundary_defects)


class TestLoopSpectrum:
    def test_square_d6_nonzero_eigenvalues(self, square_embedding):
        """Closed form: T^4 on the level-k block contributes the
        2^{k-2}-th roots of unity, so depth 6 realizes the 16th roots."""
        spec, gmap = square_embedding
        rep = build_rep(spec, 6)
        report = loop_spectrum(rep, spec.replacements[0].loop, gmap)
        evals = np.array(report.eigenvalues)
        assert report.max_modulus_deviation <= SPEC_TOL
        roots16 = {np.round(np.exp(2j * np.pi * j / 16), 8) for j in range(16)}
        seen = {np.round(z, 8) for z in evals}
        assert roots16 <= seen
        expected = {
            np.round(np.exp(2j * np.pi * j * 4 / 2**k), 8)
            for k in range(0, 7)
            for j in range(2**k)
        }
        assert seen == expected

    def test_hausdorff_bound_and_conjugation(self, square_embedding):
        spec, gmap = square_embedding
        rep = build_rep(spec, 6)
        report = loop_spectrum(rep, spec.replacements[0].loop, gmap)
        bound = spectral_net_bound(4, 2**6)
        assert bound == pytest.approx(math.pi * 4 / 64)
        assert report.hausdorff_to_circle <= bound
        assert report.conjugation_mismatch <= SPEC_TOL
        # conjugated operator sees exactly the levels below the boundary
        shallow = {
            np.round(np.exp(2j * np.pi * j * 4 / 2**k), 8)
            for k in range(0, 6)
            for j in range(2**k)
        }
        assert {np.round(z, 8) for z in report.conjugated_nonzero} == shallow

    def test_self_loop_spectrum(self, self_loop):
        spec, gmap = embed(self_loop)
        rep = build_rep(spec, 4)
        report = loop_spectrum(rep, spec.replacements[0].loop, gmap)
        seen = {np.round(z, 8) for z in report.eigenvalues}
        expected = {
            np.round(np.exp(2j * np.pi * j / 2**k), 8) for k in range(0, 5) for j in range(2**k)
        }
        assert seen == expected  # all 2^k-th roots, k <= 4
        assert report.hausdorff_to_circle <= math.pi / 16 + 1e-12

    def test_moduli_within_tolerance(self, square_embedding):
        spec, gmap = square_embedding
        rep = build_rep(spec, 5)
        report = loop_spectrum(rep, spec.replacements[0].loop, gmap)
        for z in report.conjugated_nonzero:
            assert abs(abs(z) - 1.0) <= SPEC_TOL

    def test_unreplaced_loop_rejected(self, square_embedding, self_loop):
        spec, gmap = square_embedding
        other_spec, _ = embed(self_loop)
        rep = build_rep(spec, 3)
        with pytest.raises(RepresentationError):
            loop_spectrum(rep, other_spec.replacements[0].loop, gmap)

    def test_prefix_multiplicity(self, square):
        spec, gmap = embed(square, MultiplicitySeq((3,), 2))
        rep = build_rep(spec, 3)
        report = loop_spectrum(rep, spec.replacements[0].loop, gmap)
        sizes = [len(level) for level in rep.corner_levels[spec.replacements[0].tail.namespace]]
        assert sizes == [1, 3, 6, 12]
        expected = {
            np.round(np.exp(2j * np.pi * j * 4 / n), 8) for n in (1, 3, 6, 12) for j in range(n)
        }
        assert {np.round(z, 8) for z in report.eigenvalues} == expected


class TestLevelInterleaving:
    def test_successive_blocks_converge(self, square_rep):
        """The level-(k+1) diagonal refines the level-k diagonal blockwise:
        ``|u_{k+1} - u_k (x) 1| <= 2 sin(pi / N_{k+1})`` for doubling tails,
        which is what makes the tail unitaries a convergent choice."""
        t = square_rep.T["T1"]
        levels = square_rep.corner_levels["T1"]
        for k in range(len(levels) - 1):
            u_k = np.array([t[i, i] for i in levels[k]])
            u_next = np.array([t[i, i] for i in levels[k + 1]])
            refined = np.repeat(u_k, 2)  # u_k (x) 1 in the lexicographic order
            bound = 2 * math.sin(math.pi / len(u_next))
            assert np.max(np.abs(u_next - refined)) <= bound + 1e-12


class TestPathBasis:
    def test_closed_under_suffixes(self, square_rep):
        basis = square_rep.basis
        for p in basis.paths:
            for k in range(1, len(p.edges)):
                suffix = square_rep.graph.path(p.edges[k:])
                assert suffix in basis.index

    def test_contains_all_vertex_paths(self, square_rep):
        for v in square_rep.graph.vertices:
            assert square_rep.graph.vertex_path(v) in square_rep.basis.index
