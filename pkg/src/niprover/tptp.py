"""CNF front end: symbol table, clause data model, parser and renderer.

Accepted input is a sequence of ``cnf(name, role, formula).`` statements
where the formula is a disjunction of possibly negated atoms.  Identifiers
starting lowercase are symbols, uppercase are variables; ``~`` negates,
``|`` separates disjuncts, ``%`` starts a line comment, and ``$false``
denotes the empty clause.  Roles ``axiom``, ``hypothesis`` and ``plain``
all map to axiom; ``negated_conjecture`` is kept distinct.

Variables are clause-local and canonicalized to dense indices 0..k-1 in
first-occurrence order at construction time.  Terms use the kernel
encoding: ``int`` for variables, ``(symbol_id, *args)`` tuples otherwise.
Display names live only in the symbol table; graph and embedding code sees
symbol ids alone.
"""

from dataclasses import dataclass, field

from . import _kernels as kernels

PREDICATE = "predicate"
FUNCTION = "function"
CONSTANT = "constant"

ROLE_AXIOM = "axiom"
ROLE_NEGATED_CONJECTURE = "negated_conjecture"
ROLE_DERIVED = "derived"

_ROLE_MAP = {
    "axiom": ROLE_AXIOM,
    "hypothesis": ROLE_AXIOM,
    "plain": ROLE_AXIOM,
    "negated_conjecture": ROLE_NEGATED_CONJECTURE,
}


class ParseError(Exception):
    """Syntax error with source location."""

    def __init__(self, message, line, col):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class ArityConflictError(Exception):
    """Same display name used with two arities or two kinds."""


@dataclass(frozen=True)
class Symbol:
    id: int
    kind: str
    arity: int
    display_name: str


class SymbolTable:
    """Interning table: (display_name, kind, arity) determines one Symbol.

    Ids are dense and follow first occurrence of the name in the input;
    the parser reserves an id when it reads a name token, before the
    symbol's arity is known, so ``p(c)`` interns p before c.
    """

    def __init__(self):
        self.symbols = []
        self._by_name = {}

    def reserve(self, name):
        sid = self._by_name.get(name)
        if sid is None:
            sid = len(self.symbols)
            self._by_name[name] = sid
            self.symbols.append(None)
        return sid

    def intern(self, name, kind, arity):
        sid = self.reserve(name)
        sym = self.symbols[sid]
        if sym is not None:
            if sym.kind != kind or sym.arity != arity:
                raise ArityConflictError(
                    f"symbol '{name}' used as {sym.kind}/{sym.arity} "
                    f"and as {kind}/{arity}"
                )
            return sym
        sym = Symbol(sid, kind, arity, name)
        self.symbols[sid] = sym
        return sym

    def lookup(self, name):
        sid = self._by_name.get(name)
        return None if sid is None else self.symbols[sid]

    def __getitem__(self, sym_id):
        return self.symbols[sym_id]

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)


@dataclass(frozen=True)
class Literal:
    negated: bool
    predicate: int
    args: tuple

    @property
    def atom(self):
        return (self.predicate, self.args)


@dataclass(eq=False)
class Clause:
    literals: tuple
    role: str = ROLE_AXIOM
    id: int = -1
    parents: tuple = ()

    def __eq__(self, other):
        return isinstance(other, Clause) and self.literals == other.literals

    def is_empty(self):
        return not self.literals

    @property
    def n_vars(self):
        best = -1
        for lit in self.literals:
            for t in lit.args:
                m = kernels.max_var(t)
                if m > best:
                    best = m
        return best + 1


@dataclass
class Problem:
    clauses: list
    symbols: SymbolTable

    def negated_conjecture_ids(self):
        return [c.id for c in self.clauses if c.role == ROLE_NEGATED_CONJECTURE]


def make_clause(literals, role=ROLE_AXIOM, cid=-1, parents=()):
    """Build a canonical clause: dense variable numbering, duplicate
    literals merged (order preserved)."""
    new_args, _ = kernels.canonicalize_args([l.args for l in literals])
    seen = set()
    out = []
    for lit, args in zip(literals, new_args):
        canon = Literal(lit.negated, lit.predicate, args)
        if canon not in seen:
            seen.add(canon)
            out.append(canon)
    return Clause(tuple(out), role, cid, tuple(parents))


# ---------------------------------------------------------------------------
# Tokenizer


_PUNCT = {"(": "LPAREN", ")": "RPAREN", ",": "COMMA", "|": "PIPE",
          "~": "TILDE", ".": "DOT"}


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in _PUNCT:
            tokens.append((_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "$":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word != "$false":
                raise ParseError(f"unknown defined symbol '{word}'", line, col)
            tokens.append(("FALSE", word, line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch.isdigit() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if ch.isupper() or ch == "_":
                kind = "UPPER"
            elif ch.isdigit():
                kind = "NUMBER"
            else:
                kind = "LOWER"
            tokens.append((kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.table = SymbolTable()

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, what):
        tok = self.next()
        if tok[0] != kind:
            got = tok[1] if tok[0] != "EOF" else "end of input"
            raise ParseError(f"expected {what}, found {got!r}", tok[2], tok[3])
        return tok

    def parse_problem(self):
        clauses = []
        while self.peek()[0] != "EOF":
            clauses.append(self.parse_statement(len(clauses)))
        return Problem(clauses, self.table)

    def parse_statement(self, cid):
        kw = self.expect("LOWER", "'cnf'")
        if kw[1] != "cnf":
            raise ParseError(f"expected 'cnf', found {kw[1]!r}", kw[2], kw[3])
        self.expect("LPAREN", "'('")
        name_tok = self.next()
        if name_tok[0] not in ("LOWER", "UPPER", "NUMBER"):
            raise ParseError("expected clause name", name_tok[2], name_tok[3])
        self.expect("COMMA", "','")
        role_tok = self.expect("LOWER", "clause role")
        role = _ROLE_MAP.get(role_tok[1])
        if role is None:
            raise ParseError(f"unknown role {role_tok[1]!r}",
                             role_tok[2], role_tok[3])
        self.expect("COMMA", "','")
        literals = self.parse_formula()
        self.expect("RPAREN", "')'")
        self.expect("DOT", "'.'")
        return make_clause(literals, role, cid)

    def parse_formula(self):
        # Optional outer parentheses around the disjunction.
        var_map = {}
        if self.peek()[0] == "LPAREN":
            self.next()
            literals = self.parse_disjunction(var_map)
            self.expect("RPAREN", "')'")
        else:
            literals = self.parse_disjunction(var_map)
        return literals

    def parse_disjunction(self, var_map):
        literals = self.parse_literal(var_map)
        while self.peek()[0] == "PIPE":
            self.next()
            literals.extend(self.parse_literal(var_map))
        return literals

    def parse_literal(self, var_map):
        tok = self.peek()
        if tok[0] == "FALSE":
            self.next()
            return []
        negated = False
        if tok[0] == "TILDE":
            self.next()
            negated = True
        name_tok = self.expect("LOWER", "predicate symbol")
        self.table.reserve(name_tok[1])
        args = self.parse_arg_list(var_map)
        sym = self.table.intern(name_tok[1], PREDICATE, len(args))
        return [Literal(negated, sym.id, tuple(args))]

    def parse_arg_list(self, var_map):
        args = []
        if self.peek()[0] != "LPAREN":
            return args
        self.next()
        args.append(self.parse_term(var_map))
        while self.peek()[0] == "COMMA":
            self.next()
            args.append(self.parse_term(var_map))
        self.expect("RPAREN", "')'")
        return args

    def parse_term(self, var_map):
        tok = self.next()
        if tok[0] == "UPPER":
            idx = var_map.get(tok[1])
            if idx is None:
                idx = len(var_map)
                var_map[tok[1]] = idx
            return idx
        if tok[0] != "LOWER":
            got = tok[1] if tok[0] != "EOF" else "end of input"
            raise ParseError(f"expected a term, found {got!r}", tok[2], tok[3])
        if self.peek()[0] == "LPAREN":
            self.table.reserve(tok[1])
            args = self.parse_arg_list(var_map)
            sym = self.table.intern(tok[1], FUNCTION, len(args))
            return (sym.id,) + tuple(args)
        sym = self.table.intern(tok[1], CONSTANT, 0)
        return (sym.id,)


def parse_problem(text):
    """Parse CNF source into a Problem with canonical clauses."""
    return _Parser(text).parse_problem()


# ---------------------------------------------------------------------------
# Rendering


def render_term(t, table):
    if type(t) is int:
        return f"X{t}"
    sym = table[t[0]]
    if len(t) == 1:
        return sym.display_name
    args = ",".join(render_term(a, table) for a in t[1:])
    return f"{sym.display_name}({args})"


def render_literal(lit, table):
    sym = table[lit.predicate]
    text = sym.display_name
    if lit.args:
        text += "(" + ",".join(render_term(a, table) for a in lit.args) + ")"
    return ("~" if lit.negated else "") + text


def render_formula(clause, table):
    if clause.is_empty():
        return "$false"
    parts = [render_literal(l, table) for l in clause.literals]
    if len(parts) == 1:
        return parts[0]
    return "(" + " | ".join(parts) + ")"


def render_clause(clause, table, name=None):
    """Render a full ``cnf(...)`` statement that reparses to a variant."""
    if name is None:
        name = f"c{clause.id}" if clause.id >= 0 else "c"
    role = {ROLE_AXIOM: "axiom",
            ROLE_NEGATED_CONJECTURE: "negated_conjecture",
            ROLE_DERIVED: "plain"}[clause.role]
    return f"cnf({name}, {role}, {render_formula(clause, table)})."


def render_problem(problem):
    return "\n".join(render_clause(c, problem.symbols) for c in problem.clauses) + "\n"
