"""Typed DAGs over clauses and whole theories.

A clause graph has a CLAUSE root, one node per literal application (with a
NEG wrapper for negative literals), one shared node per distinct variable,
and hash-consed subterms: identical terms within the clause are one node.
Applications carry no symbol: the symbol is reachable only through a name
edge to the clause's single NAME node for it, so node labels alone reveal
nothing about the vocabulary.

The theory graph strings every clause subgraph under one CONJ root.  Name
nodes become global (one per symbol in the whole problem) while everything
else stays clause-local, even coinciding ground subterms, so the only
nodes with parents in two clauses are name nodes.

Builders also track the node count of the fully expanded form (every term
occurrence its own node) so stats can report how much sharing saved.
"""

import enum
from dataclasses import dataclass, field

from . import _kernels as kernels
from .tptp import CONSTANT, FUNCTION, PREDICATE


class NodeKind(enum.IntEnum):
    CONJ = 0
    CLAUSE = 1
    NEG = 2
    PRED_APP = 3
    FUNC_APP = 4
    NAME_PRED = 5
    NAME_FUNC = 6
    NAME_CONST = 7
    VAR = 8


N_NODE_KINDS = len(NodeKind)

NAME_KINDS = (NodeKind.NAME_PRED, NodeKind.NAME_FUNC, NodeKind.NAME_CONST)

EDGE_NAME = "name"
EDGE_ARG = "arg"
EDGE_LITERAL = "literal"
EDGE_CLAUSE = "clause"

_NAME_KIND_FOR = {
    PREDICATE: NodeKind.NAME_PRED,
    FUNCTION: NodeKind.NAME_FUNC,
    CONSTANT: NodeKind.NAME_CONST,
}


@dataclass(frozen=True)
class GraphNode:
    id: int
    kind: NodeKind
    symbol: int | None = None


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    label: str
    pos: int = 0


@dataclass(eq=False)
class ClauseGraph:
    nodes: list
    edges: list
    root: int
    var_nodes: dict
    tree_node_count: int


@dataclass(eq=False)
class TheoryGraph:
    nodes: list
    edges: list
    root: int
    clause_roots: list
    name_index: dict
    tree_node_count: int


class _Builder:
    def __init__(self, table):
        self.table = table
        self.nodes = []
        self.edges = []
        self.name_nodes = {}
        self.tree_count = 0

    def new_node(self, kind, symbol=None):
        nid = len(self.nodes)
        self.nodes.append(GraphNode(nid, kind, symbol))
        return nid

    def add_edge(self, src, dst, label, pos=0):
        self.edges.append(Edge(src, dst, label, pos))

    def name_node(self, sym_id):
        nid = self.name_nodes.get(sym_id)
        if nid is None:
            kind = _NAME_KIND_FOR[self.table[sym_id].kind]
            nid = self.new_node(kind, sym_id)
            self.name_nodes[sym_id] = nid
        return nid

    def term_node(self, t, memo):
        if type(t) is int:
            self.tree_count += 1
            nid = memo.get(t)
            if nid is None:
                nid = self.new_node(NodeKind.VAR)
                memo[t] = nid
            return nid
        if len(t) == 1:
            # constants are name nodes used directly as argument targets
            self.tree_count += 1
            nid = memo.get(t)
            if nid is None:
                nid = self.name_node(t[0])
                memo[t] = nid
            return nid
        nid = memo.get(t)
        if nid is not None:
            self.tree_count += kernels.term_size(t)
            return nid
        self.tree_count += 1
        nid = self.new_node(NodeKind.FUNC_APP)
        memo[t] = nid
        self.add_edge(nid, self.name_node(t[0]), EDGE_NAME)
        for i, arg in enumerate(t[1:], start=1):
            self.add_edge(nid, self.term_node(arg, memo), EDGE_ARG, i)
        return nid

    def atom_node(self, lit, memo):
        key = ("atom", lit.predicate, lit.args)
        nid = memo.get(key)
        if nid is not None:
            self.tree_count += 1 + sum(kernels.term_size(a) for a in lit.args)
            return nid
        self.tree_count += 1
        nid = self.new_node(NodeKind.PRED_APP)
        memo[key] = nid
        self.add_edge(nid, self.name_node(lit.predicate), EDGE_NAME)
        for i, arg in enumerate(lit.args, start=1):
            self.add_edge(nid, self.term_node(arg, memo), EDGE_ARG, i)
        return nid

    def clause_subgraph(self, clause):
        root = self.new_node(NodeKind.CLAUSE)
        self.tree_count += 1
        memo = {}
        for lit in clause.literals:
            parent = root
            if lit.negated:
                neg = self.new_node(NodeKind.NEG)
                self.tree_count += 1
                self.add_edge(root, neg, EDGE_LITERAL)
                parent = neg
            self.add_edge(parent, self.atom_node(lit, memo), EDGE_LITERAL)
        var_nodes = {k: v for k, v in memo.items() if type(k) is int}
        return root, var_nodes

    def account_names(self):
        # one expanded-form node per pred/func name node, same as the DAG;
        # constant occurrences were already counted per use
        for sym_id in self.name_nodes:
            if self.table[sym_id].kind != CONSTANT:
                self.tree_count += 1


def build_clause_graph(clause, table):
    """Deterministic DAG for one canonical clause."""
    b = _Builder(table)
    root, var_nodes = b.clause_subgraph(clause)
    b.account_names()
    return ClauseGraph(b.nodes, b.edges, root, var_nodes, b.tree_count)


def build_theory_graph(problem):
    """Connected DAG of the whole problem under a CONJ root.

    Name nodes are global; clause-internal structure matches the
    standalone clause graphs apart from that identification.
    """
    b = _Builder(problem.symbols)
    root = b.new_node(NodeKind.CONJ)
    b.tree_count += 1
    clause_roots = []
    for clause in problem.clauses:
        croot, _ = b.clause_subgraph(clause)
        clause_roots.append(croot)
        b.add_edge(root, croot, EDGE_CLAUSE)
    b.account_names()
    return TheoryGraph(b.nodes, b.edges, root, clause_roots,
                       dict(b.name_nodes), b.tree_count)


def graph_stats(g):
    """Size counters; savings is expanded-form nodes minus DAG nodes."""
    indeg = {}
    for e in g.edges:
        indeg[e.dst] = indeg.get(e.dst, 0) + 1
    return {
        "nodes": len(g.nodes),
        "edges": len(g.edges),
        "max_in_degree": max(indeg.values(), default=0),
        "shared_subterm_savings": g.tree_node_count - len(g.nodes),
    }


def to_dot(g, table=None):
    """Graphviz text for debugging; name nodes show their display name."""
    lines = ["digraph g {"]
    for node in g.nodes:
        label = node.kind.name
        if node.symbol is not None and table is not None:
            label += f"\\n{table[node.symbol].display_name}"
        shape = "box" if node.kind in NAME_KINDS else "ellipse"
        lines.append(f'  n{node.id} [label="{label}", shape={shape}];')
    for e in g.edges:
        label = f"{e.label}{e.pos}" if e.label == EDGE_ARG else e.label
        lines.append(f'  n{e.src} -> n{e.dst} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines)
