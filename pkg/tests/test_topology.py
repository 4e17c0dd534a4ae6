import itertools

import numpy as np
import pytest

from qacsim.errors import FormatError, ResourceLimitError, ValidationError
from qacsim.topology import (
    K33Certificate,
    build_chimera,
    build_encoding,
    compute_conflict_groups,
    contains_k33_subdivision,
    embed_chain,
    export_encoded_graph_csv,
    read_chimera_file,
    read_generic_graph_file,
    validate_k33_certificate,
    write_chimera_file,
    write_generic_graph_file,
)


def chimera_edge_count(r: int, c: int) -> int:
    # independent count: 16 intra-cell couplers per cell plus 4 couplers per
    # adjacent cell pair in each direction
    return 16 * r * c + 4 * (r * (c - 1) + (r - 1) * c)


class TestBuildChimera:
    def test_single_cell(self):
        hw = build_chimera(1, 1, 4)
        assert len(hw.active_qubits) == 8
        assert len(hw.edges) == 16

    def test_full_dw2_scale(self):
        hw = build_chimera(8, 8, 4)
        assert len(hw.active_qubits) == 512
        assert len(hw.edges) == 1472

    def test_nine_defects_leaves_503(self):
        defects = {3, 17, 64, 130, 200, 305, 411, 500, 511}
        hw = build_chimera(8, 8, 4, defects)
        assert len(hw.active_qubits) == 503
        for a, b in hw.edges:
            assert a not in defects and b not in defects

    @pytest.mark.parametrize("r,c", list(itertools.product(range(1, 9), range(1, 9))))
    def test_edge_count_formula(self, r, c):
        assert len(build_chimera(r, c, 4).edges) == chimera_edge_count(r, c)

    def test_defect_out_of_range(self):
        with pytest.raises(ValidationError):
            build_chimera(2, 2, 4, {64})

    def test_id_convention_roundtrip(self):
        hw = build_chimera(3, 5, 4)
        for qid in (0, 7, 39, 119):
            r, c, s, i = hw.locate(qid)
            assert hw.qubit_id(r, c, s, i) == qid

    def test_validate_accepts_construction(self):
        build_chimera(4, 4, 4, {10, 20}).validate()


class TestBuildEncoding:
    def test_single_cell_blocks(self):
        _, eg = build_encoding(build_chimera(1, 1, 4))
        assert len(eg.blocks) == 2
        assert all(b.complete for b in eg.blocks)
        assert len(eg.logical_edges) == 1
        (couplers,) = eg.logical_edges.values()
        assert len(couplers) == 3

    def test_defect_free_8x8(self):
        enc, eg = build_encoding(build_chimera(8, 8, 4))
        assert len(eg.blocks) == 2 * 64
        assert all(b.complete for b in eg.blocks)
        assert all(len(c) == 3 for c in eg.logical_edges.values())
        assert eg.conflict_groups == ()

    def test_penalty_defect_marks_incomplete(self):
        hw = build_chimera(1, 1, 4)
        # shore-1 index 3 is block A's penalty qubit
        hw_def = build_chimera(1, 1, 4, {hw.qubit_id(0, 0, 1, 3)})
        _, eg = build_encoding(hw_def)
        flags = sorted(b.complete for b in eg.blocks)
        assert flags == [False, True]

    def test_problem_defect_drops_block(self):
        hw = build_chimera(1, 1, 4)
        hw_def = build_chimera(1, 1, 4, {hw.qubit_id(0, 0, 0, 1)})
        _, eg = build_encoding(hw_def)
        assert len(eg.blocks) == 1
        assert eg.logical_edges == {}

    def test_penalty_adjacent_to_problem_qubits(self):
        hw = build_chimera(2, 3, 4)
        enc, _ = build_encoding(hw)
        for blk in enc.blocks:
            nbrs = hw.neighbors(blk.penalty_id)
            assert set(blk.problem_ids) <= nbrs


class TestConflictGroups:
    def test_shared_coupler_detected(self):
        edges = {
            (0, 1): ((10, 11), (12, 13), (14, 15)),
            (0, 2): ((10, 11), (16, 17), (18, 19)),
            (2, 3): ((20, 21), (22, 23), (24, 25)),
        }
        groups = compute_conflict_groups(edges)
        assert groups == (frozenset({(0, 1), (0, 2)}),)

    def test_disjoint_couplers_no_groups(self):
        edges = {(0, 1): ((1, 2), (3, 4), (5, 6)), (1, 2): ((7, 8), (9, 10), (11, 12))}
        assert compute_conflict_groups(edges) == ()


class TestEmbedChain:
    def test_unique_pair_in_single_cell(self):
        _, eg = build_encoding(build_chimera(1, 1, 4))
        paths = embed_chain(eg, 2, 1, rng_seed=1)
        assert len(paths) == 1
        assert sorted(paths[0]) == [0, 1]

    def test_scarcity_proof_caps_count(self):
        _, eg = build_encoding(build_chimera(1, 1, 4))
        assert len(embed_chain(eg, 2, 5, rng_seed=1)) == 1

    def test_too_long_returns_no_embedding(self):
        _, eg = build_encoding(build_chimera(1, 1, 4))
        assert embed_chain(eg, 200, 1, rng_seed=1) == []

    def test_24_embeddings_of_length_86(self):
        _, eg = build_encoding(build_chimera(8, 8, 4))
        adj = eg.adjacency(complete_only=True)
        paths = embed_chain(eg, 86, 24, rng_seed=7)
        assert len(paths) == 24
        assert len({min(p, p[::-1]) for p in paths}) == 24
        for p in paths:
            assert len(set(p)) == 86
            for a, b in zip(p, p[1:]):
                assert b in adj[a]

    def test_deterministic_under_seed(self):
        _, eg = build_encoding(build_chimera(4, 4, 4))
        assert embed_chain(eg, 12, 5, rng_seed=3) == embed_chain(eg, 12, 5, rng_seed=3)

    def test_conflicting_edges_never_coactivated(self):
        # synthetic triangle whose two edges at vertex 0 fight over a coupler
        from qacsim.topology import EncodedGraph, LogicalBlock, LogicalEncoding

        blocks = tuple(LogicalBlock(i, (10 * i, 10 * i + 1, 10 * i + 2), 10 * i + 3) for i in range(3))
        enc = LogicalEncoding(3, blocks)
        shared = ((100, 101), (102, 103), (104, 105))
        edges = {(0, 1): shared, (0, 2): shared, (1, 2): ((200, 201), (202, 203), (204, 205))}
        eg = EncodedGraph(enc, edges, compute_conflict_groups(edges))
        paths = embed_chain(eg, 3, 10, rng_seed=0)
        # 0-1-2 and 0-2-1 orderings need only one contested edge; 1-0-2 needs both
        assert paths
        for p in paths:
            assert p[1] != 0

    def test_bad_arguments(self):
        _, eg = build_encoding(build_chimera(1, 1, 4))
        with pytest.raises(ValidationError):
            embed_chain(eg, 1, 1)
        with pytest.raises(ValidationError):
            embed_chain(eg, 2, 0)


def complete_bipartite(p, q):
    adj = {i: set() for i in range(p + q)}
    for l in range(p):
        for r in range(p, p + q):
            adj[l].add(r)
            adj[r].add(l)
    return adj


class TestK33Search:
    def test_k33_itself(self):
        adj = complete_bipartite(3, 3)
        cert = contains_k33_subdivision(adj)
        assert cert is not None
        assert validate_k33_certificate(adj, cert)
        assert all(len(p) == 2 for p in cert.paths.values())

    def test_k4_is_planar(self):
        adj = {i: {j for j in range(4) if j != i} for i in range(4)}
        assert contains_k33_subdivision(adj) is None

    def test_subdivided_k33(self):
        adj = complete_bipartite(3, 3)
        # subdivide edge (0, 3) twice
        adj[0].discard(3)
        adj[3].discard(0)
        adj[6] = {0, 7}
        adj[7] = {6, 3}
        adj[0].add(6)
        adj[3].add(7)
        cert = contains_k33_subdivision(adj)
        assert cert is not None and validate_k33_certificate(adj, cert)

    def test_encoded_chimera_not_planar(self):
        _, eg = build_encoding(build_chimera(8, 8, 4))
        adj = eg.adjacency()
        cert = contains_k33_subdivision(adj, rng_seed=3)
        assert cert is not None
        assert validate_k33_certificate(adj, cert)

    def test_planar_delaunay_graphs_rejected(self):
        from scipy.spatial import Delaunay

        rng = np.random.default_rng(11)
        for trial in range(5):
            pts = rng.random((18, 2))
            tri = Delaunay(pts)
            adj = {i: set() for i in range(18)}
            for simplex in tri.simplices:
                for a in simplex:
                    for b in simplex:
                        if a != b:
                            adj[int(a)].add(int(b))
            assert contains_k33_subdivision(adj, rng_seed=trial) is None

    def test_validator_rejects_bad_certificates(self):
        adj = complete_bipartite(3, 3)
        good = contains_k33_subdivision(adj)
        bad_paths = dict(good.paths)
        bad_paths[(0, 3)] = (0, 4)  # wrong endpoint
        assert not validate_k33_certificate(adj, K33Certificate(good.left, good.right, bad_paths))
        missing = dict(good.paths)
        del missing[(0, 3)]
        assert not validate_k33_certificate(adj, K33Certificate(good.left, good.right, missing))


class TestGraphFiles:
    def test_chimera_roundtrip(self, tmp_path):
        hw = build_chimera(2, 3, 4, {5, 17})
        path = tmp_path / "g.txt"
        write_chimera_file(path, hw)
        back = read_chimera_file(path)
        assert back == hw

    def test_generic_roundtrip(self, tmp_path):
        adj = complete_bipartite(3, 3)
        path = tmp_path / "g.txt"
        write_generic_graph_file(path, adj)
        assert read_generic_graph_file(path) == adj

    def test_malformed_files(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("chimera 2 2\n")
        with pytest.raises(FormatError):
            read_chimera_file(bad)
        bad.write_text("v 3\ne 0 9\n")
        with pytest.raises(FormatError):
            read_generic_graph_file(bad)

    def test_encoded_csv(self, tmp_path):
        hw = build_chimera(1, 1, 4, {7})  # shore-1 index 3: block A penalty
        _, eg = build_encoding(hw)
        out = tmp_path / "enc.csv"
        export_encoded_graph_csv(out, eg)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "logical_id,problem_ids,penalty_id,complete"
        assert "0,0;1;2,-1,0" in lines
