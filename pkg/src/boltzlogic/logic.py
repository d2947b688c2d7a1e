"""Propositional logic core: formula ASTs, normal forms, and DIMACS I/O.

Formulas are parsed into immutable ASTs over a shared variable table, then
normalized into strict DNF (at most one conjunct true under any assignment),
the input form the energy compiler expects.  CNFs can be handled clause by
clause without building a global DNF.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LogicError",
    "ParseError",
    "DimacsError",
    "GuardError",
    "Var",
    "Not",
    "And",
    "Or",
    "Implies",
    "Iff",
    "VariableTable",
    "Wff",
    "ConjClause",
    "Sdnf",
    "Clause",
    "Cnf",
    "Assignment",
    "parse_wff",
    "parse_weighted",
    "eval_wff",
    "render_wff",
    "clause_to_sdnf",
    "wff_to_sdnf",
    "cnf_to_sdnf_list",
    "parse_dimacs",
    "render_dimacs",
    "enumerate_assignments",
]


class LogicError(Exception):
    """Base class for errors raised by the logic layer."""


class ParseError(LogicError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class DimacsError(LogicError):
    pass


class GuardError(LogicError):
    """An operation exceeded its explicit size guard."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    child: "Node"


@dataclass(frozen=True)
class And:
    children: tuple["Node", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise LogicError("And node requires at least 2 children")


@dataclass(frozen=True)
class Or:
    children: tuple["Node", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise LogicError("Or node requires at least 2 children")


@dataclass(frozen=True)
class Implies:
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Iff:
    lhs: "Node"
    rhs: "Node"


Node = Var | Not | And | Or | Implies | Iff


class VariableTable:
    """Ordered symbol table mapping variable names to indices 0..n-1."""

    def __init__(self):
        self.names: list[str] = []
        self.index: dict[str, int] = {}

    def intern(self, name: str) -> int:
        idx = self.index.get(name)
        if idx is None:
            idx = len(self.names)
            self.names.append(name)
            self.index[name] = idx
        return idx

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, VariableTable) and self.names == other.names


@dataclass
class Wff:
    """A well-formed formula: AST root plus the variable table it refers to.

    Several formulas (e.g. the lines of a weighted knowledge base) may share
    one table so their variable indices agree.
    """

    root: Node
    table: VariableTable

    @property
    def n_vars(self) -> int:
        return len(self.table)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Wff)
            and self.root == other.root
            and self.table == other.table
        )


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<iff><->)
  | (?P<implies>->)
  | (?P<not>!)
  | (?P<and>&)
  | (?P<or>\|)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<ws>[\s]+)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


class _Tokenizer:
    def __init__(self, text: str):
        self.tokens: list[tuple[str, str, int, int]] = []
        line, line_start = 1, 0
        for m in _TOKEN_RE.finditer(text):
            kind = m.lastgroup
            value = m.group()
            col = m.start() - line_start + 1
            if kind == "ws":
                for i, ch in enumerate(value):
                    if ch == "\n":
                        line += 1
                        line_start = m.start() + i + 1
                continue
            if kind == "bad":
                raise ParseError(f"unexpected character {value!r}", line, col)
            self.tokens.append((kind, value, line, col))
        self.tokens.append(("eof", "", line, len(text) - line_start + 1))
        self.pos = 0

    def peek(self) -> tuple[str, str, int, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int, int]:
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", tok[2], tok[3])
        return tok


class _Parser:
    """Recursive descent over the grammar:

        iff     := implies ('<->' iff)?
        implies := or ('->' implies)?        # right-associative
        or      := and ('|' and)*
        and     := unary ('&' unary)*
        unary   := '!' unary | atom
        atom    := NAME | '(' iff ')'
    """

    def __init__(self, text: str, table: VariableTable):
        self.toks = _Tokenizer(text)
        self.table = table

    def parse(self) -> Node:
        node = self._iff()
        tok = self.toks.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2], tok[3])
        return node

    def _iff(self) -> Node:
        lhs = self._implies()
        if self.toks.peek()[0] == "iff":
            self.toks.next()
            return Iff(lhs, self._iff())
        return lhs

    def _implies(self) -> Node:
        lhs = self._or()
        if self.toks.peek()[0] == "implies":
            self.toks.next()
            return Implies(lhs, self._implies())
        return lhs

    def _or(self) -> Node:
        parts = [self._and()]
        while self.toks.peek()[0] == "or":
            self.toks.next()
            parts.append(self._and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def _and(self) -> Node:
        parts = [self._unary()]
        while self.toks.peek()[0] == "and":
            self.toks.next()
            parts.append(self._unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def _unary(self) -> Node:
        tok = self.toks.peek()
        if tok[0] == "not":
            self.toks.next()
            return Not(self._unary())
        return self._atom()

    def _atom(self) -> Node:
        kind, value, line, col = self.toks.next()
        if kind == "name":
            self.table.intern(value)
            return Var(value)
        if kind == "lparen":
            node = self._iff()
            self.toks.expect("rparen")
            return node
        raise ParseError(f"expected a variable or '(', found {value!r}", line, col)


def parse_wff(text: str, table: VariableTable | None = None) -> Wff:
    """Parse a formula string into a Wff, interning variables in order of
    first appearance (or into the supplied shared table)."""
    table = table if table is not None else VariableTable()
    root = _Parser(text, table).parse()
    return Wff(root, table)


_WEIGHT_LINE_RE = re.compile(r"^\s*([0-9]+(?:\.[0-9]+)?([eE][+-]?[0-9]+)?)\s*:\s*(.+)$")


def parse_weighted(text: str) -> list[tuple[float, Wff]]:
    """Parse a knowledge base of `<weight>: <formula>` lines.

    Blank lines and `#` comments are skipped; all formulas share one
    variable table.
    """
    table = VariableTable()
    out: list[tuple[float, Wff]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _WEIGHT_LINE_RE.match(line)
        if m is None:
            raise ParseError("expected '<weight>: <formula>'", lineno, 1)
        weight = float(m.group(1))
        if weight <= 0:
            raise ParseError("weight must be positive", lineno, 1)
        out.append((weight, parse_wff(m.group(3), table)))
    return out


# ---------------------------------------------------------------------------
# Rendering (round-trip stable with the parser)

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Var: 6}


def _render(node: Node, parent_prec: int) -> str:
    prec = _PREC[type(node)]
    if isinstance(node, Var):
        s = node.name
    elif isinstance(node, Not):
        s = "!" + _render(node.child, prec)
    elif isinstance(node, And):
        s = " & ".join(_render(c, prec) for c in node.children)
    elif isinstance(node, Or):
        s = " | ".join(_render(c, prec) for c in node.children)
    elif isinstance(node, Implies):
        # right-associative: parenthesize a lhs of equal precedence
        s = _render(node.lhs, prec + 1) + " -> " + _render(node.rhs, prec)
    else:
        s = _render(node.lhs, prec + 1) + " <-> " + _render(node.rhs, prec)
    if prec < parent_prec:
        return "(" + s + ")"
    return s


def render_wff(wff: Wff) -> str:
    """Render a formula so that `parse_wff(render_wff(w))` rebuilds `w`."""
    return _render(wff.root, 0)


# ---------------------------------------------------------------------------
# Evaluation


def _eval_node(node: Node, values, index: dict[str, int]) -> bool:
    if isinstance(node, Var):
        return bool(values[index[node.name]])
    if isinstance(node, Not):
        return not _eval_node(node.child, values, index)
    if isinstance(node, And):
        return all(_eval_node(c, values, index) for c in node.children)
    if isinstance(node, Or):
        return any(_eval_node(c, values, index) for c in node.children)
    if isinstance(node, Implies):
        return (not _eval_node(node.lhs, values, index)) or _eval_node(
            node.rhs, values, index
        )
    if isinstance(node, Iff):
        return _eval_node(node.lhs, values, index) == _eval_node(
            node.rhs, values, index
        )
    raise TypeError(f"not a formula node: {node!r}")


def eval_wff(wff: Wff, x) -> int:
    """Truth value of `wff` under a total assignment (vector of 0/1)."""
    x = np.asarray(x)
    if x.shape != (wff.n_vars,):
        raise LogicError(
            f"assignment has length {x.shape}, formula has {wff.n_vars} variables"
        )
    return int(_eval_node(wff.root, x, wff.table.index))


def _eval_node_bulk(node: Node, cols: np.ndarray, index: dict[str, int]) -> np.ndarray:
    """Evaluate over a matrix of assignments (rows) at once."""
    if isinstance(node, Var):
        return cols[:, index[node.name]].astype(bool)
    if isinstance(node, Not):
        return ~_eval_node_bulk(node.child, cols, index)
    if isinstance(node, And):
        out = _eval_node_bulk(node.children[0], cols, index)
        for c in node.children[1:]:
            out &= _eval_node_bulk(c, cols, index)
        return out
    if isinstance(node, Or):
        out = _eval_node_bulk(node.children[0], cols, index)
        for c in node.children[1:]:
            out |= _eval_node_bulk(c, cols, index)
        return out
    if isinstance(node, Implies):
        return ~_eval_node_bulk(node.lhs, cols, index) | _eval_node_bulk(
            node.rhs, cols, index
        )
    if isinstance(node, Iff):
        return _eval_node_bulk(node.lhs, cols, index) == _eval_node_bulk(
            node.rhs, cols, index
        )
    raise TypeError(f"not a formula node: {node!r}")


def enumerate_assignments(n_vars: int) -> np.ndarray:
    """All 2^n assignments as a (2^n, n) uint8 matrix, row r = binary of r
    with variable 0 in the most significant position."""
    if n_vars > 24:
        raise GuardError(f"enumeration over {n_vars} variables exceeds the 24-var guard")
    rows = np.arange(2**n_vars, dtype=np.uint32)
    shifts = np.arange(n_vars - 1, -1, -1, dtype=np.uint32)
    return ((rows[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def truth_column(wff: Wff) -> np.ndarray:
    """Truth value of `wff` on every assignment of `enumerate_assignments`."""
    cols = enumerate_assignments(wff.n_vars)
    return _eval_node_bulk(wff.root, cols, wff.table.index)


# ---------------------------------------------------------------------------
# Clause / SDNF / CNF types


@dataclass(frozen=True)
class ConjClause:
    """Conjunction of literals: pos indices appear positively, neg negated."""

    pos: frozenset[int]
    neg: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "pos", frozenset(self.pos))
        object.__setattr__(self, "neg", frozenset(self.neg))
        overlap = self.pos & self.neg
        if overlap:
            raise LogicError(f"contradictory conjunct: variables {sorted(overlap)} appear with both polarities")

    def satisfied_by(self, x) -> bool:
        return all(x[t] == 1 for t in self.pos) and all(x[k] == 0 for k in self.neg)

    def key(self) -> tuple:
        return (tuple(sorted(self.pos)), tuple(sorted(self.neg)))

    def __len__(self) -> int:
        return len(self.pos) + len(self.neg)


def _compatible(c1: ConjClause, c2: ConjClause) -> bool:
    """Whether two conjuncts can be true simultaneously."""
    return not (c1.pos & c2.neg) and not (c2.pos & c1.neg)


@dataclass
class Sdnf:
    """Strict DNF: a disjunction of conjuncts of which at most one can hold.

    `weights`, when present, attaches a positive weight to each conjunct
    (penalty-style knowledge bases)."""

    clauses: list[ConjClause]
    n_vars: int
    weights: list[float] | None = None

    def __post_init__(self):
        for c in self.clauses:
            hi = max(c.pos | c.neg, default=-1)
            if hi >= self.n_vars:
                raise LogicError(f"literal index {hi} out of range for {self.n_vars} variables")
        if self.weights is not None:
            if len(self.weights) != len(self.clauses):
                raise LogicError("one weight per conjunct required")
            if any(w <= 0 for w in self.weights):
                raise LogicError("conjunct weights must be positive")

    def eval(self, x) -> int:
        return int(any(c.satisfied_by(x) for c in self.clauses))

    def is_strict(self) -> bool:
        """Exact check: no pair of conjuncts is simultaneously satisfiable."""
        for c1, c2 in itertools.combinations(self.clauses, 2):
            if _compatible(c1, c2):
                return False
        return True


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals (one conjunct of a CNF)."""

    pos: frozenset[int]
    neg: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "pos", frozenset(self.pos))
        object.__setattr__(self, "neg", frozenset(self.neg))
        overlap = self.pos & self.neg
        if overlap:
            raise LogicError(f"tautological clause: variables {sorted(overlap)} appear with both polarities")

    def satisfied_by(self, x) -> bool:
        return any(x[k] == 1 for k in self.pos) or any(x[t] == 0 for t in self.neg)

    def key(self) -> tuple:
        return (tuple(sorted(self.pos)), tuple(sorted(self.neg)))

    def __len__(self) -> int:
        return len(self.pos) + len(self.neg)


@dataclass
class Cnf:
    clauses: list[Clause]
    n_vars: int
    weights: list[float] | None = None
    variables: list[str] | None = None

    def __post_init__(self):
        for c in self.clauses:
            for i in c.pos | c.neg:
                if i >= self.n_vars:
                    raise DimacsError(f"literal index {i + 1} out of range (n_vars={self.n_vars})")
        if self.weights is not None and len(self.weights) != len(self.clauses):
            raise LogicError("one weight per clause required")

    def satisfied_count(self, x) -> float:
        """Number (or weighted sum) of clauses satisfied by assignment x."""
        if self.weights is None:
            return float(sum(1 for c in self.clauses if c.satisfied_by(x)))
        return float(
            sum(w for c, w in zip(self.clauses, self.weights) if c.satisfied_by(x))
        )

    def eval(self, x) -> int:
        return int(all(c.satisfied_by(x) for c in self.clauses))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Cnf)
            and self.n_vars == other.n_vars
            and self.clauses == other.clauses
            and self.weights == other.weights
        )


@dataclass
class Assignment:
    """Total or partial 0/1 assignment; `clamped` indices stay fixed during
    sampling, the rest are free."""

    values: np.ndarray
    clamped: frozenset[int] = frozenset()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.uint8).copy()
        self.clamped = frozenset(self.clamped)
        n = self.values.shape[0]
        bad = [i for i in self.clamped if not (0 <= i < n)]
        if bad:
            raise LogicError(f"clamped indices out of range: {bad}")

    @property
    def n_vars(self) -> int:
        return int(self.values.shape[0])

    @property
    def free(self) -> list[int]:
        return [i for i in range(self.n_vars) if i not in self.clamped]

    @classmethod
    def total(cls, values) -> "Assignment":
        values = np.asarray(values, dtype=np.uint8)
        return cls(values, frozenset(range(values.shape[0])))

    @classmethod
    def empty(cls, n_vars: int) -> "Assignment":
        return cls(np.zeros(n_vars, dtype=np.uint8), frozenset())


# ---------------------------------------------------------------------------
# Normal-form conversions


def clause_to_sdnf(clause: Clause, n_vars: int | None = None) -> Sdnf:
    """Expand a disjunctive clause into an equivalent strict DNF.

    Literals are eliminated in ascending variable order, negated literals
    first; the i-th conjunct asserts literal i and the falsity of every
    literal eliminated before it, so exactly the first satisfied literal
    fires.  Conjunct count equals the clause width.
    """
    if not clause.pos and not clause.neg:
        raise LogicError("unsatisfiable clause: no literals")
    if n_vars is None:
        n_vars = max(clause.pos | clause.neg) + 1
    order = [(t, False) for t in sorted(clause.neg)] + [
        (k, True) for k in sorted(clause.pos)
    ]
    conjuncts: list[ConjClause] = []
    seen_pos: set[int] = set()
    seen_neg: set[int] = set()
    for idx, positive in order:
        # falsify every earlier literal, assert this one
        pos = set(seen_pos)
        neg = set(seen_neg)
        if positive:
            pos.add(idx)
            seen_neg.add(idx)
        else:
            neg.add(idx)
            seen_pos.add(idx)
        conjuncts.append(ConjClause(frozenset(pos), frozenset(neg)))
    return Sdnf(conjuncts, n_vars)


def cnf_to_sdnf_list(cnf: Cnf) -> list[Sdnf]:
    """Per-clause strict DNFs; the conjunction of these is equivalent to the
    CNF but is not itself strict."""
    return [clause_to_sdnf(c, cnf.n_vars) for c in cnf.clauses]


def _desugar_nnf(node: Node, index: dict[str, int], negate: bool):
    """Rewrite to negation normal form over literal leaves (idx, polarity)."""
    if isinstance(node, Var):
        return ("lit", index[node.name], not negate)
    if isinstance(node, Not):
        return _desugar_nnf(node.child, index, not negate)
    if isinstance(node, And):
        kids = tuple(_desugar_nnf(c, index, negate) for c in node.children)
        return ("or" if negate else "and", kids)
    if isinstance(node, Or):
        kids = tuple(_desugar_nnf(c, index, negate) for c in node.children)
        return ("and" if negate else "or", kids)
    if isinstance(node, Implies):
        if negate:  # !(a -> b) == a & !b
            return (
                "and",
                (
                    _desugar_nnf(node.lhs, index, False),
                    _desugar_nnf(node.rhs, index, True),
                ),
            )
        return (
            "or",
            (
                _desugar_nnf(node.lhs, index, True),
                _desugar_nnf(node.rhs, index, False),
            ),
        )
    if isinstance(node, Iff):
        a, b = node.lhs, node.rhs
        if negate:  # (a & !b) | (!a & b)
            return (
                "or",
                (
                    ("and", (_desugar_nnf(a, index, False), _desugar_nnf(b, index, True))),
                    ("and", (_desugar_nnf(a, index, True), _desugar_nnf(b, index, False))),
                ),
            )
        return (
            "and",
            (
                ("or", (_desugar_nnf(a, index, True), _desugar_nnf(b, index, False))),
                ("or", (_desugar_nnf(b, index, True), _desugar_nnf(a, index, False))),
            ),
        )
    raise TypeError(f"not a formula node: {node!r}")


_DNF_CAP = 200_000


def _distribute(nnf) -> list[tuple[frozenset[int], frozenset[int]]] | None:
    """NNF -> DNF as (pos, neg) pairs; contradictory products are dropped.

    Returns None when the product would exceed the size cap (the caller
    falls back to the truth-table route)."""
    kind = nnf[0]
    if kind == "lit":
        _, idx, positive = nnf
        return [(frozenset([idx]), frozenset())] if positive else [
            (frozenset(), frozenset([idx]))
        ]
    if kind == "or":
        out: dict = {}
        for child in nnf[1]:
            part = _distribute(child)
            if part is None:
                return None
            for item in part:
                out[item] = None
            if len(out) > _DNF_CAP:
                return None
        return list(out.keys())
    # and: cross-product of child DNFs
    acc: list[tuple[frozenset[int], frozenset[int]]] = [(frozenset(), frozenset())]
    for child in nnf[1]:
        part = _distribute(child)
        if part is None:
            return None
        merged: dict = {}
        for p1, n1 in acc:
            for p2, n2 in part:
                pos, neg = p1 | p2, n1 | n2
                if pos & neg:
                    continue
                merged[(pos, neg)] = None
        acc = list(merged.keys())
        if len(acc) > _DNF_CAP:
            return None
        if not acc:
            return []
    return acc


def _overlap_components(conjuncts: list[ConjClause]) -> list[list[ConjClause]]:
    """Group conjuncts into connected components of pairwise compatibility."""
    n = len(conjuncts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if _compatible(conjuncts[i], conjuncts[j]):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[ConjClause]] = {}
    for i, c in enumerate(conjuncts):
        groups.setdefault(find(i), []).append(c)
    return list(groups.values())


def _full_dnf_of_group(group: list[ConjClause]) -> list[ConjClause]:
    """Rebuild an overlapping group as the full DNF (truth-table minterms)
    over the group's own variables."""
    vars_sorted = sorted(set().union(*[c.pos | c.neg for c in group]))
    k = len(vars_sorted)
    if k > 24:
        raise GuardError(f"full-DNF rebuild over {k} variables exceeds the 24-var guard")
    cols = enumerate_assignments(k)
    col_of = {v: i for i, v in enumerate(vars_sorted)}
    sat = np.zeros(cols.shape[0], dtype=bool)
    for c in group:
        hit = np.ones(cols.shape[0], dtype=bool)
        for t in c.pos:
            hit &= cols[:, col_of[t]] == 1
        for t in c.neg:
            hit &= cols[:, col_of[t]] == 0
        sat |= hit
    out = []
    for row in cols[sat]:
        pos = frozenset(v for v, bit in zip(vars_sorted, row) if bit)
        neg = frozenset(v for v, bit in zip(vars_sorted, row) if not bit)
        out.append(ConjClause(pos, neg))
    return out


def _truth_table_sdnf(wff: Wff) -> list[ConjClause]:
    n = wff.n_vars
    if n > 20:
        raise GuardError(
            f"formula too entangled for distribution and too wide ({n} vars) for a truth table"
        )
    cols = enumerate_assignments(n)
    sat = truth_column(wff)
    out = []
    for row in cols[sat]:
        pos = frozenset(int(i) for i in range(n) if row[i])
        neg = frozenset(int(i) for i in range(n) if not row[i])
        out.append(ConjClause(pos, neg))
    return out


def wff_to_sdnf(wff: Wff, max_vars: int = 24) -> Sdnf:
    """Convert any formula into an equivalent strict DNF.

    Pipeline: desugar ->/<-> and push negations down, distribute to DNF,
    then make overlapping groups of conjuncts strict.  A group that is a
    plain disjunction of literals goes through the clause expansion; any
    other overlapping group is rebuilt as a full DNF over its variables.
    """
    n = wff.n_vars
    if n > max_vars:
        raise GuardError(f"formula has {n} variables, exceeding the guard of {max_vars}")
    nnf = _desugar_nnf(wff.root, wff.table.index, False)
    raw = _distribute(nnf)
    if raw is None:
        return Sdnf(_truth_table_sdnf(wff), n)
    conjuncts = [ConjClause(p, ng) for p, ng in raw]
    out: list[ConjClause] = []
    for group in _overlap_components(conjuncts):
        if len(group) == 1:
            out.extend(group)
            continue
        if all(len(c) == 1 for c in group):
            # a disjunction of distinct literals: use the clause expansion
            pos = set().union(*[c.pos for c in group])
            neg = set().union(*[c.neg for c in group])
            if not (pos & neg):
                expanded = clause_to_sdnf(Clause(frozenset(pos), frozenset(neg)), n)
                out.extend(expanded.clauses)
                continue
            # opposite literals linked through a third: tautological group
        out.extend(_full_dnf_of_group(group))
    return Sdnf(out, n)


# ---------------------------------------------------------------------------
# DIMACS


def parse_dimacs(text: str) -> Cnf:
    """Parse DIMACS CNF (`p cnf V C`) or WCNF (`p wcnf V C [TOP]`, leading
    weight per clause).  Variable i becomes index i-1."""
    n_vars = None
    declared = None
    weighted = False
    clauses: list[Clause] = []
    weights: list[float] = []
    body_tokens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if n_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate problem line")
            parts = line.split()
            if len(parts) < 4 or parts[1] not in ("cnf", "wcnf"):
                raise DimacsError(f"line {lineno}: malformed problem line {line!r}")
            weighted = parts[1] == "wcnf"
            if weighted and len(parts) not in (4, 5) or not weighted and len(parts) != 4:
                raise DimacsError(f"line {lineno}: malformed problem line {line!r}")
            try:
                n_vars = int(parts[2])
                declared = int(parts[3])
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: malformed problem line {line!r}") from exc
            if n_vars < 0 or declared < 0:
                raise DimacsError(f"line {lineno}: negative counts in problem line")
            continue
        if n_vars is None:
            raise DimacsError(f"line {lineno}: clause data before problem line")
        body_tokens.extend(line.split())
    if n_vars is None:
        raise DimacsError("missing problem line")

    pos: set[int] = set()
    neg: set[int] = set()
    weight: float | None = None
    expect_weight = weighted
    for tok in body_tokens:
        if expect_weight:
            try:
                weight = float(tok)
            except ValueError as exc:
                raise DimacsError(f"bad clause weight {tok!r}") from exc
            if weight <= 0:
                raise DimacsError(f"clause weight must be positive, got {tok}")
            expect_weight = False
            continue
        try:
            lit = int(tok)
        except ValueError as exc:
            raise DimacsError(f"bad literal {tok!r}") from exc
        if lit == 0:
            clauses.append(Clause(frozenset(pos), frozenset(neg)))
            if weighted:
                weights.append(weight)
            pos, neg = set(), set()
            expect_weight = weighted
            continue
        var = abs(lit) - 1
        if var >= n_vars:
            raise DimacsError(f"literal {lit} out of range (header declares {n_vars} variables)")
        (pos if lit > 0 else neg).add(var)
    if pos or neg or (weighted and not expect_weight):
        raise DimacsError("clause not terminated by 0")
    if len(clauses) != declared:
        raise DimacsError(
            f"header declares {declared} clauses, found {len(clauses)}"
        )
    return Cnf(clauses, n_vars, weights if weighted else None)


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(w)


def render_dimacs(cnf: Cnf) -> str:
    """Render back to DIMACS; `parse_dimacs(render_dimacs(c)) == c`."""
    lines = []
    weighted = cnf.weights is not None
    if weighted:
        top = sum(cnf.weights) + 1
        lines.append(f"p wcnf {cnf.n_vars} {len(cnf.clauses)} {_fmt_weight(top)}")
    else:
        lines.append(f"p cnf {cnf.n_vars} {len(cnf.clauses)}")
    for i, c in enumerate(cnf.clauses):
        lits = [str(k + 1) for k in sorted(c.pos)] + [str(-(t + 1)) for t in sorted(c.neg)]
        prefix = [_fmt_weight(cnf.weights[i])] if weighted else []
        lines.append(" ".join(prefix + lits + ["0"]))
    return "\n".join(lines) + "\n"
