"""Compile strict DNFs and CNFs into RBM parameters and evaluate energies.

Each multi-literal conjunct becomes one hidden unit whose energy term is
minimized (at -eps times the conjunct weight) exactly when the conjunct
holds; single-literal conjuncts can optionally fold into visible biases.
The network's minimum energy over hidden states therefore counts satisfied
conjuncts, and its free energy ranks assignments by satisfaction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .logic import Clause, Cnf, ConjClause, LogicError, Sdnf, clause_to_sdnf

__all__ = [
    "CompileError",
    "HiddenUnit",
    "Rbm",
    "EnergyReport",
    "compile_sdnf",
    "compile_cnf",
    "compile_weighted",
    "merge_weighted_conjuncts",
    "energy",
    "min_energy_over_h",
    "min_energy_batch",
    "free_energy",
    "free_energy_batch",
    "energy_report",
    "energy_listing",
]


class CompileError(Exception):
    """Raised for invalid compiler inputs (eps range, weights, dimensions)."""


@dataclass(frozen=True)
class HiddenUnit:
    """Provenance of one hidden unit: the conjunct it encodes, its weight
    multiplier and the eps margin used.  None entries in Rbm.provenance mark
    units that were added randomly (e.g. for learning)."""

    pos: tuple[int, ...]
    neg: tuple[int, ...]
    weight: float
    eps: float


@dataclass
class Rbm:
    """RBM parameters: E(x,h) = -x.W.h - a.x - b.h + e0.

    e0 carries the constant offset produced by folding negative-literal
    singletons into visible biases, so min-energy bookkeeping stays exact.
    """

    n_visible: int
    n_hidden: int
    W: np.ndarray
    a: np.ndarray
    b: np.ndarray
    e0: float = 0.0
    eps: float = 0.5
    tau: float = 1.0
    provenance: list[HiddenUnit | None] = field(default_factory=list)
    variables: list[str] | None = None
    sat_target: float | None = None

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64).reshape(self.n_visible, self.n_hidden)
        self.a = np.asarray(self.a, dtype=np.float64).reshape(self.n_visible)
        self.b = np.asarray(self.b, dtype=np.float64).reshape(self.n_hidden)
        if not self.provenance:
            self.provenance = [None] * self.n_hidden
        if len(self.provenance) != self.n_hidden:
            raise CompileError("one provenance entry per hidden unit required")
        if self.tau <= 0:
            raise CompileError("temperature must be positive")

    def copy(self) -> "Rbm":
        return Rbm(
            self.n_visible,
            self.n_hidden,
            self.W.copy(),
            self.a.copy(),
            self.b.copy(),
            self.e0,
            self.eps,
            self.tau,
            list(self.provenance),
            list(self.variables) if self.variables is not None else None,
            self.sat_target,
        )

    def pre_activation(self, x) -> np.ndarray:
        """Hidden pre-activations W.T x + b for one assignment."""
        x = np.asarray(x, dtype=np.float64)
        return x @ self.W + self.b

    def to_json_doc(self) -> dict:
        return {
            "version": 1,
            "n_visible": self.n_visible,
            "n_hidden": self.n_hidden,
            "W": [float(v) for v in self.W.reshape(-1)],
            "a": [float(v) for v in self.a],
            "b": [float(v) for v in self.b],
            "e0": float(self.e0),
            "eps": float(self.eps),
            "tau": float(self.tau),
            "provenance": [
                None
                if p is None
                else {
                    "pos": list(p.pos),
                    "neg": list(p.neg),
                    "weight": p.weight,
                    "eps": p.eps,
                }
                for p in self.provenance
            ],
            "variables": self.variables,
            "sat_target": self.sat_target,
        }

    @classmethod
    def from_json_doc(cls, doc: dict) -> "Rbm":
        if doc.get("version") != 1:
            raise CompileError(f"unsupported model document version {doc.get('version')!r}")
        prov = [
            None
            if p is None
            else HiddenUnit(tuple(p["pos"]), tuple(p["neg"]), float(p["weight"]), float(p["eps"]))
            for p in doc["provenance"]
        ]
        return cls(
            n_visible=int(doc["n_visible"]),
            n_hidden=int(doc["n_hidden"]),
            W=np.asarray(doc["W"], dtype=np.float64),
            a=np.asarray(doc["a"], dtype=np.float64),
            b=np.asarray(doc["b"], dtype=np.float64),
            e0=float(doc["e0"]),
            eps=float(doc["eps"]),
            tau=float(doc["tau"]),
            provenance=prov,
            variables=doc.get("variables"),
            sat_target=doc.get("sat_target"),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json_doc(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "Rbm":
        return cls.from_json_doc(json.loads(text))


@dataclass
class EnergyReport:
    """Energy summary for one assignment: hidden-minimized energy, free
    energy at the given confidence, and the implied satisfied weight."""

    energy_min_h: float
    free_energy: float
    sat_count: float


def merge_weighted_conjuncts(
    clauses: list[tuple[ConjClause, float]],
) -> list[tuple[ConjClause, float]]:
    """Merge identical and subsumed weighted conjuncts, summing weights.

    A conjunct subsumed by a more general one (its literals a superset) is
    removed and its weight added to the general conjunct.  Note this is the
    penalty-logic simplification rule; for non-identical pairs it changes
    the weighted-satisfaction profile on assignments where only the general
    conjunct holds.  Output is sorted lexicographically on (pos, neg).
    """
    for _, w in clauses:
        if w <= 0:
            raise CompileError("conjunct weights must be positive")
    merged: dict[tuple, float] = {}
    order: list[tuple] = []
    for c, w in clauses:
        k = c.key()
        if k not in merged:
            merged[k] = 0.0
            order.append(k)
        merged[k] += w
    # subsumption: drop the more specific conjunct, credit the general one
    keys = list(merged.keys())
    removed: set[tuple] = set()
    for k1 in keys:
        if k1 in removed:
            continue
        p1, n1 = set(k1[0]), set(k1[1])
        for k2 in keys:
            if k2 is k1 or k2 in removed:
                continue
            p2, n2 = set(k2[0]), set(k2[1])
            if p1 <= p2 and n1 <= n2:
                merged[k1] += merged[k2]
                removed.add(k2)
    out = [
        (ConjClause(frozenset(k[0]), frozenset(k[1])), merged[k])
        for k in sorted(merged.keys())
        if k not in removed
    ]
    return out


def compile_sdnf(
    sdnf: Sdnf,
    eps: float = 0.5,
    fold_singletons: bool = False,
    variables: list[str] | None = None,
) -> Rbm:
    """Build an RBM equivalent to a strict DNF.

    Conjunct j with positive set T and negative set K yields a hidden unit
    with weights +w' on T, -w' on K and bias w'(-|T| + eps), so its energy
    term -h_j(sum_T x - sum_K x - |T| + eps) bottoms out at -w'*eps exactly
    when the conjunct holds.  With fold_singletons, one-literal conjuncts
    are absorbed into visible biases (and e0 for negative literals) instead
    of spending a hidden unit.
    """
    if not 0 < eps < 1:
        raise CompileError(f"eps must lie in (0, 1), got {eps}")
    weights = sdnf.weights if sdnf.weights is not None else [1.0] * len(sdnf.clauses)
    if any(w <= 0 for w in weights):
        raise CompileError("conjunct weights must be positive")
    n = sdnf.n_vars
    hidden: list[tuple[ConjClause, float]] = []
    a = np.zeros(n)
    e0 = 0.0
    for c, w in zip(sdnf.clauses, weights):
        if fold_singletons and len(c) == 1:
            if c.pos:
                (i,) = c.pos
                a[i] += eps * w
            else:
                (i,) = c.neg
                a[i] -= eps * w
                e0 -= eps * w
        else:
            hidden.append((c, w))
    W = np.zeros((n, len(hidden)))
    b = np.zeros(len(hidden))
    prov: list[HiddenUnit | None] = []
    for j, (c, w) in enumerate(hidden):
        for t in c.pos:
            W[t, j] = w
        for k in c.neg:
            W[k, j] = -w
        b[j] = w * (-len(c.pos) + eps)
        prov.append(HiddenUnit(tuple(sorted(c.pos)), tuple(sorted(c.neg)), w, eps))
    sat_target = 1.0 if sdnf.weights is None else None
    return Rbm(
        n_visible=n,
        n_hidden=len(hidden),
        W=W,
        a=a,
        b=b,
        e0=e0,
        eps=eps,
        provenance=prov,
        variables=variables,
        sat_target=sat_target,
    )


def compile_cnf(cnf: Cnf, eps: float = 0.5, variables: list[str] | None = None) -> Rbm:
    """Compile a CNF clause by clause; min energy is -eps times the number
    (weighted sum) of satisfied clauses, for every assignment."""
    if not 0 < eps < 1:
        raise CompileError(f"eps must lie in (0, 1), got {eps}")
    conjuncts: list[ConjClause] = []
    weights: list[float] = []
    for m, clause in enumerate(cnf.clauses):
        w = cnf.weights[m] if cnf.weights is not None else 1.0
        if w <= 0:
            raise CompileError("clause weights must be positive")
        part = clause_to_sdnf(clause, cnf.n_vars)
        conjuncts.extend(part.clauses)
        weights.extend([w] * len(part.clauses))
    sdnf = Sdnf(conjuncts, cnf.n_vars, weights)
    rbm = compile_sdnf(sdnf, eps=eps, fold_singletons=False, variables=variables)
    rbm.sat_target = float(len(cnf.clauses)) if cnf.weights is None else float(sum(cnf.weights))
    return rbm


def compile_weighted(
    items: list[tuple[float, Sdnf]],
    eps: float = 0.5,
    fold_singletons: bool = False,
    variables: list[str] | None = None,
    merge: bool = True,
) -> Rbm:
    """Compile a weighted knowledge base: each formula's conjuncts inherit
    its weight, identical/subsumed conjuncts are merged, then compiled."""
    if not items:
        raise CompileError("empty knowledge base")
    n = items[0][1].n_vars
    pairs: list[tuple[ConjClause, float]] = []
    for w, sdnf in items:
        if sdnf.n_vars != n:
            raise CompileError("all formulas must share one variable space")
        for c in sdnf.clauses:
            pairs.append((c, w))
    if merge:
        pairs = merge_weighted_conjuncts(pairs)
    merged = Sdnf([c for c, _ in pairs], n, [w for _, w in pairs])
    return compile_sdnf(merged, eps=eps, fold_singletons=fold_singletons, variables=variables)


# ---------------------------------------------------------------------------
# Energy evaluation


def energy(rbm: Rbm, x, h) -> float:
    """E(x,h) = -x.W.h - a.x - b.h + e0."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if x.shape != (rbm.n_visible,) or h.shape != (rbm.n_hidden,):
        raise CompileError(
            f"dimension mismatch: x{x.shape}, h{h.shape} vs "
            f"({rbm.n_visible},), ({rbm.n_hidden},)"
        )
    return float(-(x @ rbm.W @ h) - rbm.a @ x - rbm.b @ h + rbm.e0)


def min_energy_over_h(rbm: Rbm, x) -> float:
    """min over h of E(x,h), in closed form: each hidden unit turns on iff
    its pre-activation is positive, contributing -max(0, pre)."""
    x = np.asarray(x, dtype=np.float64)
    pre = rbm.pre_activation(x)
    return float(-np.maximum(pre, 0.0).sum() - rbm.a @ x + rbm.e0)


def min_energy_batch(rbm: Rbm, X: np.ndarray) -> np.ndarray:
    """min_energy_over_h for each row of X."""
    X = np.asarray(X, dtype=np.float64)
    pre = X @ rbm.W + rbm.b
    return -np.maximum(pre, 0.0).sum(axis=1) - X @ rbm.a + rbm.e0


def _softplus(z: np.ndarray) -> np.ndarray:
    # log(1 + e^z) without overflow for large |z|
    return np.logaddexp(0.0, z)


def free_energy(rbm: Rbm, x, c: float = 1.0) -> float:
    """F(x) = -a.x + e0 - sum_j log(1 + exp(c * (W.T x + b)_j)).

    The confidence c scales the whole hidden pre-activation, so a satisfied
    conjunct contributes -log(1 + e^(c*eps*w')).
    """
    if c < 0:
        raise CompileError("confidence must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    pre = rbm.pre_activation(x)
    return float(-rbm.a @ x + rbm.e0 - _softplus(c * pre).sum())


def free_energy_batch(rbm: Rbm, X: np.ndarray, c: float = 1.0) -> np.ndarray:
    """free_energy for each row of X."""
    X = np.asarray(X, dtype=np.float64)
    pre = X @ rbm.W + rbm.b
    return -X @ rbm.a + rbm.e0 - _softplus(c * pre).sum(axis=1)


def energy_report(rbm: Rbm, x, c: float = 1.0) -> EnergyReport:
    e_min = min_energy_over_h(rbm, x)
    return EnergyReport(
        energy_min_h=e_min,
        free_energy=free_energy(rbm, x, c),
        sat_count=-e_min / rbm.eps,
    )


# ---------------------------------------------------------------------------
# Reporting


def _term(coef: float, name: str) -> str:
    if coef == 1:
        return f"+ {name}"
    if coef == -1:
        return f"- {name}"
    if coef < 0:
        return f"- {-coef:g}*{name}"
    return f"+ {coef:g}*{name}"


def energy_listing(rbm: Rbm) -> str:
    """Human-readable energy function, one line per hidden unit plus the
    visible-bias and constant terms."""
    names = rbm.variables or [f"x{i + 1}" for i in range(rbm.n_visible)]
    lines = []
    for j in range(rbm.n_hidden):
        parts = []
        for i in np.nonzero(rbm.W[:, j])[0]:
            parts.append(_term(rbm.W[i, j], names[i]))
        const = rbm.b[j]
        body = " ".join(parts).lstrip("+ ") or "0"
        sign = "+" if const >= 0 else "-"
        lines.append(f"  - h{j + 1} * ({body} {sign} {abs(const):g})")
    bias_parts = [_term(rbm.a[i], names[i]) for i in np.nonzero(rbm.a)[0]]
    if bias_parts:
        lines.append("  - (" + " ".join(bias_parts).lstrip("+ ") + ")")
    if rbm.e0:
        lines.append(f"  + {rbm.e0:g}")
    if not lines:
        return "E = 0"
    return "E =\n" + "\n".join(lines)
