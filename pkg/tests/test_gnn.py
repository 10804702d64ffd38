"""Embedding network tests: initialization, forward/backward, invariances,
symbol seeding, cache, checkpoint."""

import threading

import numpy as np
import pytest

import niprover.gnn as gnn
from niprover.checkpoint import (
    CheckpointError,
    load_checkpoint,
    save_checkpoint,
)
from niprover.graph import NodeKind, build_clause_graph, build_theory_graph
from niprover.tptp import Literal, Problem, SymbolTable, make_clause, parse_problem

from util import random_clause, random_problem, make_pool, rename_symbols, rng_for

FIG_PAIR = (
    "cnf(c1, axiom, (p(A) | ~q(B,f(A)) | q(C,f(A)))).\n"
    "cnf(c2, axiom, (q(f(X),Y) | p(f(X)))).\n"
)


def blocks_vector(params):
    return np.concatenate([t.ravel() for _, t in gnn.param_blocks(params)])


class TestInit:
    def test_same_seed_identical(self):
        a, b = gnn.init_params(8, seed=1), gnn.init_params(8, seed=1)
        assert np.array_equal(blocks_vector(a), blocks_vector(b))

    def test_different_seed_differs(self):
        a, b = gnn.init_params(8, seed=1), gnn.init_params(8, seed=2)
        assert not np.array_equal(blocks_vector(a), blocks_vector(b))

    def test_zero_dim_rejected(self):
        with pytest.raises(ValueError):
            gnn.init_params(0, seed=1)


class TestInitialEmbeddings:
    def test_type_only_gives_one_vector_per_kind(self):
        prob = parse_problem(FIG_PAIR)
        tg = build_theory_graph(prob)
        params = gnn.init_params(8, seed=3)
        init = gnn.initial_embeddings(tg, params)
        for node in tg.nodes:
            assert np.array_equal(init[node.id],
                                  params.type_table[int(node.kind)])

    def test_symbol_seeding_gives_distinct_name_vectors(self):
        prob = parse_problem(FIG_PAIR)
        tg = build_theory_graph(prob)
        params = gnn.init_params(8, seed=3)
        sym = gnn.symbol_embeddings(tg, params)
        g = build_clause_graph(prob.clauses[0], prob.symbols)
        init = gnn.initial_embeddings(g, params, sym)
        name_rows = [init[n.id] for n in g.nodes
                     if n.kind in (NodeKind.NAME_PRED, NodeKind.NAME_FUNC)]
        assert len(name_rows) == 3
        for i in range(3):
            for j in range(i + 1, 3):
                assert not np.allclose(name_rows[i], name_rows[j])
        var_rows = [init[n.id] for n in g.nodes if n.kind == NodeKind.VAR]
        for row in var_rows:
            assert np.array_equal(row, params.type_table[int(NodeKind.VAR)])

    def test_missing_symbol_falls_back_to_type_vector(self):
        prob = parse_problem("cnf(a, axiom, p(c)).")
        params = gnn.init_params(8, seed=3)
        g = build_clause_graph(prob.clauses[0], prob.symbols)
        p_id = prob.symbols.lookup("p").id
        c_id = prob.symbols.lookup("c").id
        sym = {p_id: np.ones(8)}
        init = gnn.initial_embeddings(g, params, sym)
        const_node = next(n for n in g.nodes if n.kind == NodeKind.NAME_CONST)
        pred_node = next(n for n in g.nodes if n.kind == NodeKind.NAME_PRED)
        assert np.array_equal(init[pred_node.id], np.ones(8))
        assert c_id not in sym
        assert np.array_equal(init[const_node.id],
                              params.type_table[int(NodeKind.NAME_CONST)])


class TestForward:
    def test_zero_params_give_zero_embeddings(self):
        prob = parse_problem(FIG_PAIR)
        tg = build_theory_graph(prob)
        params = gnn.zeros_like_params(gnn.init_params(8, seed=1))
        trace = gnn.forward(tg, params, gnn.initial_embeddings(tg, params))
        assert np.array_equal(trace.final, np.zeros_like(trace.final))

    def test_single_node_closed_form(self):
        params = gnn.init_params(6, seed=4)
        clause = make_clause([])  # empty clause graph: lone CLAUSE node
        table = SymbolTable()
        g = build_clause_graph(clause, table)
        assert len(g.nodes) == 1 and not g.edges
        init = gnn.initial_embeddings(g, params)
        trace = gnn.forward(g, params, init)
        h = init[0]
        for layer in params.layers:
            h = np.maximum(layer.w_self @ h + layer.bias, 0.0)
        assert np.allclose(trace.final[0], h, atol=1e-12)

    def test_literal_permutation_keeps_root_embedding(self):
        rng = rng_for(91)
        table, preds, funcs, consts = make_pool()
        params = gnn.init_params(8, seed=5)
        for _ in range(30):
            clause = random_clause(rng, table, preds, funcs, consts,
                                   max_literals=4)
            lits = list(clause.literals)
            rng.shuffle(lits)
            shuffled = make_clause(lits)
            e1 = gnn.clause_embedding(clause, table, params, sym=None)
            e2 = gnn.clause_embedding(shuffled, table, params, sym=None)
            assert np.allclose(e1, e2, atol=1e-12)

    def test_nonfinite_params_rejected(self):
        prob = parse_problem("cnf(a, axiom, p(c)).")
        tg = build_theory_graph(prob)
        params = gnn.init_params(4, seed=1)
        params.layers[0].bias[0] = np.inf
        with pytest.raises(FloatingPointError):
            gnn.forward(tg, params, gnn.initial_embeddings(tg, params))


class TestSymbolEmbeddings:
    def test_automorphic_constants_embed_equally(self):
        prob = parse_problem("cnf(a, axiom, q(c1)). cnf(b, axiom, q(c2)).")
        tg = build_theory_graph(prob)
        params = gnn.init_params(8, seed=6)
        sym = gnn.symbol_embeddings(tg, params)
        i, j = prob.symbols.lookup("c1").id, prob.symbols.lookup("c2").id
        assert np.allclose(sym[i], sym[j], atol=1e-12)

    def test_different_arity_predicates_differ(self):
        prob = parse_problem(FIG_PAIR)
        tg = build_theory_graph(prob)
        params = gnn.init_params(8, seed=7)
        sym = gnn.symbol_embeddings(tg, params)
        p, q = prob.symbols.lookup("p").id, prob.symbols.lookup("q").id
        assert not np.allclose(sym[p], sym[q])

    def test_empty_problem_gives_empty_map(self):
        prob = parse_problem("% empty\n")
        tg = build_theory_graph(prob)
        params = gnn.init_params(8, seed=7)
        assert gnn.symbol_embeddings(tg, params) == {}

    def test_forward_counter_increments(self):
        prob = parse_problem("cnf(a, axiom, p(c)).")
        tg = build_theory_graph(prob)
        params = gnn.init_params(4, seed=1)
        before = gnn.theory_forward_count
        gnn.symbol_embeddings(tg, params)
        assert gnn.theory_forward_count == before + 1


class TestClauseEmbedding:
    def test_variants_share_cache_entry(self):
        text = "cnf(a, axiom, (p(X) | q(X,Y))). cnf(b, axiom, (q(U,V) | p(U)))."
        prob = parse_problem(text)
        params = gnn.init_params(8, seed=8)
        cache = gnn.EmbeddingCache()
        e1 = gnn.clause_embedding(prob.clauses[0], prob.symbols, params,
                                  None, cache)
        e2 = gnn.clause_embedding(prob.clauses[1], prob.symbols, params,
                                  None, cache)
        assert len(cache) == 1
        assert np.array_equal(e1, e2)

    def test_name_invariance_end_to_end(self):
        rng = rng_for(92)
        params = gnn.init_params(8, seed=9)
        for _ in range(20):
            prob = random_problem(rng, n_clauses=5)
            renamed = rename_symbols(prob, rng)
            sym_a = gnn.symbol_embeddings(build_theory_graph(prob), params)
            sym_b = gnn.symbol_embeddings(build_theory_graph(renamed), params)
            for ca, cb in zip(prob.clauses, renamed.clauses):
                ea = gnn.clause_embedding(ca, prob.symbols, params, sym_a)
                eb = gnn.clause_embedding(cb, renamed.symbols, params, sym_b)
                assert np.allclose(ea, eb, atol=1e-9)

    def test_seeded_vs_type_only_differ(self):
        prob = parse_problem(FIG_PAIR)
        tg = build_theory_graph(prob)
        params = gnn.init_params(8, seed=10)
        sym = gnn.symbol_embeddings(tg, params)
        with_sym = gnn.clause_embedding(prob.clauses[0], prob.symbols,
                                        params, sym)
        without = gnn.clause_embedding(prob.clauses[0], prob.symbols,
                                       params, None)
        assert np.linalg.norm(with_sym - without) > 1e-6

    def test_cache_concurrent_inserts(self):
        prob = parse_problem("cnf(a, axiom, p(c)).")
        params = gnn.init_params(8, seed=11)
        cache = gnn.EmbeddingCache()
        results = []

        def worker():
            results.append(gnn.clause_embedding(
                prob.clauses[0], prob.symbols, params, None, cache))

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(cache) == 1
        for r in results[1:]:
            assert r is results[0] or np.array_equal(r, results[0])


class TestBackward:
    def test_zero_upstream_gives_zero_grads(self):
        prob = parse_problem(FIG_PAIR)
        tg = build_theory_graph(prob)
        params = gnn.init_params(6, seed=12)
        trace = gnn.forward(tg, params, gnn.initial_embeddings(tg, params))
        grads, d_init = gnn.backward(trace, params,
                                     np.zeros_like(trace.final))
        assert np.array_equal(blocks_vector(grads),
                              np.zeros_like(blocks_vector(grads)))
        assert np.array_equal(d_init, np.zeros_like(d_init))

    def test_single_node_hand_derivative(self):
        # one node, d=1: y = relu(w2 relu(w1 x + b1) + b2); dy/dw1 = w2 x
        # on the active branch, etc.
        params = gnn.init_params(1, seed=13)
        params.layers[0].w_self[0, 0] = 0.7
        params.layers[1].w_self[0, 0] = -1.3
        params.layers[0].bias[0] = 0.2
        params.layers[1].bias[0] = 2.0
        params.type_table[:] = 0.5
        clause = make_clause([])
        g = build_clause_graph(clause, SymbolTable())
        init = gnn.initial_embeddings(g, params)
        trace = gnn.forward(g, params, init)
        x = 0.5
        h1 = max(0.7 * x + 0.2, 0.0)
        y = max(-1.3 * h1 + 2.0, 0.0)
        assert trace.final[0, 0] == pytest.approx(y, abs=1e-15)
        grads, d_init = gnn.backward(trace, params, np.ones((1, 1)))
        assert grads.layers[1].bias[0] == pytest.approx(1.0)
        assert grads.layers[1].w_self[0, 0] == pytest.approx(h1)
        assert grads.layers[0].w_self[0, 0] == pytest.approx(-1.3 * x)
        assert grads.layers[0].bias[0] == pytest.approx(-1.3)
        assert d_init[0, 0] == pytest.approx(-1.3 * 0.7)

    def test_matches_finite_differences(self):
        rng = rng_for(93)
        prob = random_problem(rng, n_clauses=3, max_literals=2, depth=2)
        tg = build_theory_graph(prob)
        assert len(tg.nodes) <= 40
        params = gnn.init_params(4, seed=14)
        upstream = rng.normal(size=(len(tg.nodes), 4))

        def loss_at(p):
            trace = gnn.forward(tg, p, gnn.initial_embeddings(tg, p))
            return float((upstream * trace.final).sum())

        trace = gnn.forward(tg, params, gnn.initial_embeddings(tg, params))
        grads, d_init = gnn.backward(trace, params, upstream)
        # type-table rows also feed init: fold init gradient in
        gnn.scatter_init_grad(tg, None, d_init, grads)

        eps = 1e-5
        worst = 0.0
        for name, tensor in gnn.param_blocks(params):
            if name == "policy.w_attn":
                continue
            analytic = dict(gnn.param_blocks(grads))[name]
            flat = tensor.ravel()
            for k in range(flat.size):
                orig = flat[k]
                flat[k] = orig + eps
                up = loss_at(params)
                flat[k] = orig - eps
                dn = loss_at(params)
                flat[k] = orig
                fd = (up - dn) / (2 * eps)
                a = analytic.ravel()[k]
                rel = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
                worst = max(worst, rel)
        assert worst < 1e-4


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        params = gnn.init_params(8, seed=15)
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, path)
        loaded = load_checkpoint(path)
        assert loaded.dim == params.dim
        assert loaded.n_layers == params.n_layers
        assert loaded.max_arg_pos == params.max_arg_pos
        assert loaded.seed == params.seed
        for (na, ta), (nb, tb) in zip(gnn.param_blocks(params),
                                      gnn.param_blocks(loaded)):
            assert na == nb
            assert ta.tobytes() == tb.tobytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"NOTACKPT" + b"\x00" * 64)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_truncated_rejected(self, tmp_path):
        params = gnn.init_params(8, seed=16)
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, path)
        data = path.read_bytes()
        path.write_bytes(data[:len(data) // 2])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_corrupted_version_rejected(self, tmp_path):
        params = gnn.init_params(8, seed=17)
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, path)
        data = bytearray(path.read_bytes())
        data[8] = 99
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)
