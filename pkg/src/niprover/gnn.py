"""Message-passing embeddings over clause and theory graphs.

Initial node vectors come from a per-kind type table, except that name
nodes may be seeded from previously computed per-symbol vectors.  Running
the network once over the connected theory graph and reading off the name
node outputs yields those per-symbol vectors; per-clause graphs seeded
with them then embed each clause independently.  Both passes use the same
parameters.

Each layer updates every node from itself plus the means of its in- and
out-neighbours, with argument-position vectors added to messages crossing
arg edges:

    h'_v = relu(W_self h_v + W_in mean_{u->v}(h_u + pos)
                + W_out mean_{v->u}(h_u + pos) + b)

The mean over an empty neighbour set is the zero vector.  Aggregation runs
in a fixed edge order, so repeated runs are bit-identical.  ``backward``
implements exact reverse-mode differentiation through the whole stack;
``forward`` keeps the activations it needs.
"""

import threading
from dataclasses import dataclass

import numpy as np

from .graph import (
    EDGE_ARG,
    N_NODE_KINDS,
    NAME_KINDS,
    build_clause_graph,
)
from .logic import variant_key

DEFAULT_DIM = 64
DEFAULT_LAYERS = 2
DEFAULT_MAX_ARG_POS = 8

# incremented on every theory-graph embedding run; tests assert the prover
# triggers exactly one per proof attempt
theory_forward_count = 0


@dataclass
class LayerParams:
    w_self: np.ndarray
    w_in: np.ndarray
    w_out: np.ndarray
    bias: np.ndarray


@dataclass
class ModelParams:
    dim: int
    n_layers: int
    max_arg_pos: int
    seed: int
    type_table: np.ndarray
    pos_table: np.ndarray
    layers: list
    w_attn: np.ndarray


def init_params(dim=DEFAULT_DIM, seed=0, n_layers=DEFAULT_LAYERS,
                max_arg_pos=DEFAULT_MAX_ARG_POS):
    """Seeded initialization; weights scale with 1/sqrt(dim), biases zero."""
    if dim < 1:
        raise ValueError("embedding dimension must be at least 1")
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(dim)

    def mat():
        return rng.normal(0.0, scale, (dim, dim))

    layers = [
        LayerParams(mat(), mat(), mat(), np.zeros(dim))
        for _ in range(n_layers)
    ]
    return ModelParams(
        dim=dim,
        n_layers=n_layers,
        max_arg_pos=max_arg_pos,
        seed=seed,
        type_table=rng.normal(0.0, scale, (N_NODE_KINDS, dim)),
        pos_table=rng.normal(0.0, scale, (max_arg_pos, dim)),
        layers=layers,
        w_attn=rng.normal(0.0, scale, (dim, dim)),
    )


def param_blocks(params):
    """Named tensors in a fixed order (checkpointing, training, checks)."""
    blocks = [("type_table", params.type_table),
              ("pos_table", params.pos_table)]
    for i, layer in enumerate(params.layers):
        blocks.append((f"layer{i}.w_self", layer.w_self))
        blocks.append((f"layer{i}.w_in", layer.w_in))
        blocks.append((f"layer{i}.w_out", layer.w_out))
        blocks.append((f"layer{i}.bias", layer.bias))
    blocks.append(("policy.w_attn", params.w_attn))
    return blocks


def zeros_like_params(params):
    layers = [
        LayerParams(np.zeros_like(l.w_self), np.zeros_like(l.w_in),
                    np.zeros_like(l.w_out), np.zeros_like(l.bias))
        for l in params.layers
    ]
    return ModelParams(params.dim, params.n_layers, params.max_arg_pos,
                       params.seed, np.zeros_like(params.type_table),
                       np.zeros_like(params.pos_table), layers,
                       np.zeros_like(params.w_attn))


def clone_params(params):
    layers = [
        LayerParams(l.w_self.copy(), l.w_in.copy(), l.w_out.copy(),
                    l.bias.copy())
        for l in params.layers
    ]
    return ModelParams(params.dim, params.n_layers, params.max_arg_pos,
                       params.seed, params.type_table.copy(),
                       params.pos_table.copy(), layers,
                       params.w_attn.copy())


class _GraphArrays:
    def __init__(self, g, max_arg_pos):
        n = len(g.nodes)
        e = len(g.edges)
        self.n = n
        self.src = np.empty(e, dtype=np.intp)
        self.dst = np.empty(e, dtype=np.intp)
        self.pos = np.zeros(e, dtype=np.intp)
        for i, edge in enumerate(g.edges):
            self.src[i] = edge.src
            self.dst[i] = edge.dst
            if edge.label == EDGE_ARG:
                self.pos[i] = min(edge.pos, max_arg_pos)
        indeg = np.bincount(self.dst, minlength=n).astype(np.float64)
        outdeg = np.bincount(self.src, minlength=n).astype(np.float64)
        self.indeg = np.maximum(indeg, 1.0)
        self.outdeg = np.maximum(outdeg, 1.0)
        self.kinds = np.array([int(node.kind) for node in g.nodes],
                              dtype=np.intp)


def _arrays_for(g, max_arg_pos):
    cache = getattr(g, "_gnn_arrays", None)
    if cache is None:
        cache = {}
        g._gnn_arrays = cache
    arrays = cache.get(max_arg_pos)
    if arrays is None:
        arrays = _GraphArrays(g, max_arg_pos)
        cache[max_arg_pos] = arrays
    return arrays


def initial_embeddings(g, params, sym=None):
    """Per-kind vectors for every node; name nodes take their symbol's
    vector when one is supplied (unknown symbols keep the kind fallback)."""
    arrays = _arrays_for(g, params.max_arg_pos)
    init = params.type_table[arrays.kinds].copy()
    if sym is not None:
        for node in g.nodes:
            if node.kind in NAME_KINDS:
                vec = sym.get(node.symbol)
                if vec is not None:
                    init[node.id] = vec
    return init


@dataclass
class ForwardTrace:
    graph: object
    arrays: _GraphArrays
    dropout_rate: float
    inputs: list    # h per layer boundary: inputs[0]=init, inputs[-1]=final
    means_in: list
    means_out: list
    pre_relu: list
    masks: list

    @property
    def final(self):
        return self.inputs[-1]


def forward(g, params, init, dropout_rate=0.0, mask_fn=None):
    """Run all layers; returns the trace backward() consumes."""
    arrays = _arrays_for(g, params.max_arg_pos)
    src, dst, pos = arrays.src, arrays.dst, arrays.pos
    arg_rows = pos > 0
    pos_vecs = np.zeros((len(src), params.dim))
    if arg_rows.any():
        pos_vecs[arg_rows] = params.pos_table[pos[arg_rows] - 1]

    h = np.asarray(init, dtype=np.float64)
    trace = ForwardTrace(g, arrays, dropout_rate, [h], [], [], [], [])
    for li, layer in enumerate(params.layers):
        m_in = np.zeros((arrays.n, params.dim))
        np.add.at(m_in, dst, h[src] + pos_vecs)
        m_in /= arrays.indeg[:, None]
        m_out = np.zeros((arrays.n, params.dim))
        np.add.at(m_out, src, h[dst] + pos_vecs)
        m_out /= arrays.outdeg[:, None]
        z = (h @ layer.w_self.T + m_in @ layer.w_in.T
             + m_out @ layer.w_out.T + layer.bias)
        a = np.maximum(z, 0.0)
        mask = None
        if dropout_rate > 0.0 and mask_fn is not None:
            mask = mask_fn(li, a.shape)
            a = a * mask / (1.0 - dropout_rate)
        if not np.isfinite(a).all():
            raise FloatingPointError("non-finite activations in forward pass")
        trace.means_in.append(m_in)
        trace.means_out.append(m_out)
        trace.pre_relu.append(z)
        trace.masks.append(mask)
        trace.inputs.append(a)
        h = a
    return trace


def backward(trace, params, upstream):
    """Exact gradients of sum(upstream * final) w.r.t. params and init.

    Returns (grads, d_init) where grads mirrors the ModelParams layout
    (w_attn stays zero; the policy layer differentiates it separately).
    """
    arrays = trace.arrays
    src, dst, pos = arrays.src, arrays.dst, arrays.pos
    arg_rows = pos > 0
    grads = zeros_like_params(params)
    g_h = np.asarray(upstream, dtype=np.float64).copy()
    for li in reversed(range(params.n_layers)):
        layer = params.layers[li]
        mask = trace.masks[li]
        if mask is not None:
            g_h = g_h * mask / (1.0 - trace.dropout_rate)
        gz = g_h * (trace.pre_relu[li] > 0.0)
        h = trace.inputs[li]
        grads.layers[li].bias += gz.sum(axis=0)
        grads.layers[li].w_self += gz.T @ h
        grads.layers[li].w_in += gz.T @ trace.means_in[li]
        grads.layers[li].w_out += gz.T @ trace.means_out[li]

        gm_in = gz @ layer.w_in
        gm_out = gz @ layer.w_out
        gin_edge = gm_in[dst] / arrays.indeg[dst, None]
        gout_edge = gm_out[src] / arrays.outdeg[src, None]

        g_prev = gz @ layer.w_self
        np.add.at(g_prev, src, gin_edge)
        np.add.at(g_prev, dst, gout_edge)
        if arg_rows.any():
            np.add.at(grads.pos_table, pos[arg_rows] - 1,
                      (gin_edge + gout_edge)[arg_rows])
        g_h = g_prev
    return grads, g_h


def scatter_init_grad(g, sym, d_init, grads, sym_grads=None):
    """Route init-embedding gradients to the type table or, for seeded
    name nodes, to the per-symbol accumulator."""
    for node in g.nodes:
        row = d_init[node.id]
        if sym is not None and node.kind in NAME_KINDS and node.symbol in sym:
            if sym_grads is not None:
                acc = sym_grads.get(node.symbol)
                if acc is None:
                    sym_grads[node.symbol] = row.copy()
                else:
                    acc += row
            continue
        grads.type_table[int(node.kind)] += row
    return sym_grads


def symbol_embeddings(tg, params, dropout_rate=0.0, mask_fn=None):
    """One theory-graph run; name-node outputs keyed by symbol id."""
    global theory_forward_count
    theory_forward_count += 1
    init = initial_embeddings(tg, params)
    trace = forward(tg, params, init, dropout_rate, mask_fn)
    final = trace.final
    return {sym_id: final[node_id].copy()
            for sym_id, node_id in tg.name_index.items()}


def theory_trace(tg, params, dropout_rate=0.0, mask_fn=None):
    """Like symbol_embeddings but keeps the trace (training needs it)."""
    global theory_forward_count
    theory_forward_count += 1
    init = initial_embeddings(tg, params)
    trace = forward(tg, params, init, dropout_rate, mask_fn)
    sym = {sym_id: trace.final[node_id].copy()
           for sym_id, node_id in tg.name_index.items()}
    return sym, trace


class EmbeddingCache:
    """Insert-or-get cache keyed by clause variant key; thread-safe."""

    def __init__(self):
        self._data = {}
        self._lock = threading.Lock()

    def get_or_compute(self, key, compute):
        with self._lock:
            hit = self._data.get(key)
        if hit is not None:
            return hit
        value = compute()
        with self._lock:
            return self._data.setdefault(key, value)

    def __len__(self):
        return len(self._data)


def clause_embedding(clause, table, params, sym, cache=None,
                     dropout_rate=0.0, mask_fn=None):
    """Root-node embedding of the clause graph seeded with symbol vectors.

    Safe to cache per proof attempt: a clause's graph never changes, so
    the vector is reusable wherever the clause reappears.
    """

    def compute():
        g = build_clause_graph(clause, table)
        init = initial_embeddings(g, params, sym)
        trace = forward(g, params, init, dropout_rate, mask_fn)
        return trace.final[g.root].copy()

    if cache is None:
        return compute()
    return cache.get_or_compute(variant_key(clause), compute)


def clause_trace(clause, table, params, sym, dropout_rate=0.0, mask_fn=None):
    g = build_clause_graph(clause, table)
    init = initial_embeddings(g, params, sym)
    trace = forward(g, params, init, dropout_rate, mask_fn)
    return g, trace
