"""Model search on compiled RBMs.

Clamped block-Gibbs sampling visits assignments and accepts those whose
free energy clears the satisfied-conjunct threshold; for small free sets
the free-energy ranking is computed exhaustively instead.  Also hosts the
prefix-AND/suffix-OR formula-class coverage experiment.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .logic import Assignment, ConjClause, GuardError, Sdnf, enumerate_assignments
from .rbm import Rbm, free_energy_batch, min_energy_batch

__all__ = [
    "SamplerConfig",
    "SamplingRun",
    "ModelScore",
    "CoverageResult",
    "gibbs_step",
    "sample_models",
    "enumerate_models",
    "coverage_experiment",
    "class_formula_sdnf",
    "class_model_set",
]

#: Default restart period; uniform reinitialization of the free variables
#: keeps the chain from sticking in local minima.
DEFAULT_RESTART_EVERY = 100


def default_accept_threshold(c: float, eps: float) -> float:
    """Free energy of exactly one satisfied conjunct, -log(1 + e^(c*eps))."""
    return -math.log1p(math.exp(c * eps))


@dataclass
class SamplerConfig:
    """Sampler knobs.

    `tau` is the visible-update temperature; `tau_hidden`, when set, lets the
    hidden block run hotter than the visible one.  A hot hidden block keeps
    proposing nearby conjuncts while a cold visible block snaps onto them,
    which searches far better than a single temperature on flat landscapes;
    None reproduces the single-temperature conditionals.
    """

    c: float = 5.0
    eps: float = 0.5
    tau: float = 1.0
    tau_hidden: float | None = None
    max_samples: int = 10_000
    seed: int = 0
    accept_threshold: float | None = None
    restart_every: int | None = DEFAULT_RESTART_EVERY

    def __post_init__(self):
        if self.max_samples <= 0:
            raise ValueError("max_samples must be positive")
        if self.tau <= 0 or (self.tau_hidden is not None and self.tau_hidden <= 0):
            raise ValueError("temperatures must be positive")
        if self.accept_threshold is None:
            self.accept_threshold = default_accept_threshold(self.c, self.eps)


@dataclass
class SamplingRun:
    accepted: list[np.ndarray]
    samples_drawn: int
    accuracy: float | None
    coverage_curve: list[tuple[int, float]] = field(default_factory=list)

    @property
    def accepted_set(self) -> set[bytes]:
        return {a.tobytes() for a in self.accepted}


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def gibbs_step(
    rbm: Rbm,
    x: Assignment,
    h: np.ndarray,
    rng: np.random.Generator,
    tau: float | None = None,
    tau_hidden: float | None = None,
) -> tuple[Assignment, np.ndarray]:
    """One block-Gibbs update: resample all hidden units from p(h|x), then
    all free visible units from p(x|h); clamped coordinates never change."""
    tau = rbm.tau if tau is None else tau
    tau_h = tau if tau_hidden is None else tau_hidden
    values = x.values.astype(np.float64)
    ph = _sigmoid((values @ rbm.W + rbm.b) / tau_h)
    h_new = (rng.random(rbm.n_hidden) < ph).astype(np.uint8)
    px = _sigmoid((rbm.W @ h_new + rbm.a) / tau)
    new_values = x.values.copy()
    free = x.free
    if free:
        draws = rng.random(len(free))
        new_values[free] = (draws < px[free]).astype(np.uint8)
    return Assignment(new_values, x.clamped), h_new


def _default_truth(rbm: Rbm):
    """Truth oracle from the compiled network itself: the minimum energy
    identifies full satisfaction exactly (valid for unweighted compiles)."""
    if rbm.sat_target is None:
        return None
    target = rbm.sat_target

    def truth(x: np.ndarray) -> bool:
        e = min_energy_batch(rbm, x[None, :])[0]
        return abs(-e / rbm.eps - target) < 1e-6

    return truth


def sample_models(
    rbm: Rbm,
    partial: Assignment,
    cfg: SamplerConfig,
    truth=None,
    model_set: set[bytes] | None = None,
    stop_at_full_coverage: bool = True,
) -> SamplingRun:
    """Search for models of the compiled formula by Gibbs sampling.

    Free variables are initialized uniformly (and reinitialized every
    `restart_every` steps); every post-step assignment whose free energy is
    at or below the acceptance threshold is recorded.  Coverage is tracked
    against `model_set` when given.  Exhausting max_samples is not an
    error: the run returns whatever was found.
    """
    if partial.n_vars != rbm.n_visible:
        raise ValueError("assignment length does not match the network")
    rng = np.random.default_rng(cfg.seed)
    free = np.array(partial.free, dtype=np.intp)
    x = partial.values.copy()
    if free.size:
        x[free] = (rng.random(free.size) < 0.5).astype(np.uint8)

    W, a, b, e0 = rbm.W, rbm.a, rbm.b, rbm.e0
    tau, c, threshold = cfg.tau, cfg.c, cfg.accept_threshold
    tau_h = cfg.tau_hidden if cfg.tau_hidden is not None else tau
    n_hidden = rbm.n_hidden
    if truth is None:
        truth = _default_truth(rbm)

    accepted: list[np.ndarray] = []
    seen: set[bytes] = set()
    n_true = 0
    curve: list[tuple[int, float]] = []
    covered: set[bytes] = set()
    total_models = len(model_set) if model_set else 0
    samples = 0
    restart = cfg.restart_every if cfg.restart_every else 0

    for t in range(cfg.max_samples):
        if restart and t > 0 and t % restart == 0 and free.size:
            x[free] = (rng.random(free.size) < 0.5).astype(np.uint8)
        xf = x.astype(np.float64)
        pre = xf @ W + b
        h = rng.random(n_hidden) < _sigmoid(pre / tau_h)
        act = W @ h + a
        if free.size:
            x[free] = (rng.random(free.size) < _sigmoid(act[free] / tau)).astype(np.uint8)
        samples = t + 1
        xf = x.astype(np.float64)
        pre = xf @ W + b
        fe = -a @ xf + e0 - np.logaddexp(0.0, c * pre).sum()
        if fe <= threshold:
            key = x.tobytes()
            if key not in seen:
                seen.add(key)
                accepted.append(x.copy())
                if truth is not None and truth(x):
                    n_true += 1
                if model_set is not None and key in model_set:
                    covered.add(key)
                    curve.append((samples, len(covered) / total_models))
                    if stop_at_full_coverage and len(covered) == total_models:
                        break
    if model_set is not None and (not curve or curve[-1][0] != samples):
        curve.append((samples, len(covered) / total_models if total_models else 0.0))
    accuracy = None
    if truth is not None:
        accuracy = 1.0 if not accepted else n_true / len(accepted)
    return SamplingRun(accepted, samples, accuracy, curve)


@dataclass
class ModelScore:
    assignment: np.ndarray
    free_energy: float
    posterior: float
    is_model: bool


def enumerate_models(
    rbm: Rbm, partial: Assignment, cfg: SamplerConfig
) -> list[ModelScore]:
    """Score every completion of the free variables by free energy.

    Returns entries in ascending free-energy order with a softmax posterior
    over -F (log-sum-exp stabilized); entries at or below the acceptance
    threshold are flagged as models.
    """
    free = sorted(partial.free)
    if len(free) > 20:
        raise GuardError(f"{len(free)} free variables exceed the exhaustive-enumeration guard of 20")
    k = len(free)
    X = np.tile(partial.values.astype(np.uint8), (2**k, 1))
    if k:
        X[:, free] = enumerate_assignments(k)
    F = free_energy_batch(rbm, X, cfg.c)
    logits = -F
    m = logits.max()
    post = np.exp(logits - m)
    post /= post.sum()
    order = np.argsort(F, kind="stable")
    out = []
    for i in order:
        out.append(
            ModelScore(
                assignment=X[i].copy(),
                free_energy=float(F[i]),
                posterior=float(post[i]),
                is_model=bool(F[i] <= cfg.accept_threshold + 1e-9),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Formula-class coverage experiment


def class_formula_sdnf(M: int, N: int) -> Sdnf:
    """Strict DNF of the class: M leading variables conjoined with a
    disjunction over the N trailing ones.  One conjunct per trailing
    variable j, asserting j is the highest trailing variable set."""
    if M < 1 or N < 1:
        raise ValueError("M and N must be at least 1")
    clauses = []
    for j in range(M, M + N):
        pos = frozenset(range(M)) | {j}
        neg = frozenset(range(j + 1, M + N))
        clauses.append(ConjClause(pos, neg))
    return Sdnf(clauses, M + N)


def class_model_set(M: int, N: int) -> set[bytes]:
    """The 2^N - 1 satisfying assignments: all-ones prefix, nonzero suffix."""
    out = set()
    for suffix in enumerate_assignments(N):
        if not suffix.any():
            continue
        x = np.concatenate([np.ones(M, dtype=np.uint8), suffix])
        out.add(x.tobytes())
    return out


@dataclass
class CoverageResult:
    M: int
    N: int
    runs: int
    checkpoints: np.ndarray
    coverage_mean: np.ndarray
    coverage_std: np.ndarray
    samples_to_full: list[int | None]
    accuracies: list[float | None]
    time_seconds: float

    @property
    def all_runs_full(self) -> bool:
        return all(s is not None for s in self.samples_to_full)

    @property
    def ratio(self) -> float:
        """Mean samples needed over the search-space size."""
        done = [s for s in self.samples_to_full if s is not None]
        if not done:
            return float("nan")
        return float(np.mean(done)) / 2 ** (self.M + self.N)

    def summary(self) -> dict:
        done = [s for s in self.samples_to_full if s is not None]
        return {
            "M": self.M,
            "N": self.N,
            "runs": self.runs,
            "model_count": 2**self.N - 1,
            "search_space": 2 ** (self.M + self.N),
            "all_runs_full": self.all_runs_full,
            "mean_samples_to_full": float(np.mean(done)) if done else None,
            "max_samples_to_full": max(done) if done else None,
            "ratio": self.ratio,
            "min_accuracy": min((a for a in self.accuracies if a is not None), default=None),
            "time_seconds": self.time_seconds,
        }


def _curve_at(curve: list[tuple[int, float]], checkpoints: np.ndarray) -> np.ndarray:
    """Step-function coverage evaluated at given sample counts."""
    out = np.zeros(len(checkpoints))
    if not curve:
        return out
    xs = np.array([p[0] for p in curve])
    ys = np.array([p[1] for p in curve])
    idx = np.searchsorted(xs, checkpoints, side="right") - 1
    mask = idx >= 0
    out[mask] = ys[idx[mask]]
    return out


def default_coverage_config(max_samples: int = 2**15, seed: int = 0) -> SamplerConfig:
    """Sampler settings tuned for the formula-class search: hidden block at
    the model's own temperature proposing conjuncts, visible block quenched."""
    return SamplerConfig(
        c=5.0, eps=0.5, tau=0.05, tau_hidden=1.0, max_samples=max_samples, seed=seed
    )


def coverage_experiment(
    M: int,
    N: int,
    runs: int,
    cfg: SamplerConfig | None = None,
    guard: int = 30,
    force: bool = False,
    eps: float | None = None,
    n_checkpoints: int = 200,
) -> CoverageResult:
    """Compile the (M, N) class formula and measure coverage of its model
    set over `runs` independently seeded sampling runs."""
    if M + N > guard and not force:
        raise GuardError(f"M+N = {M + N} exceeds the guard of {guard} (pass force to override)")
    if cfg is None:
        cfg = default_coverage_config()
    from .rbm import compile_sdnf

    sdnf = class_formula_sdnf(M, N)
    rbm = compile_sdnf(sdnf, eps=eps if eps is not None else cfg.eps)
    models = class_model_set(M, N)
    partial = Assignment.empty(M + N)
    t0 = time.perf_counter()
    curves = []
    samples_to_full: list[int | None] = []
    accuracies: list[float | None] = []
    for r in range(runs):
        run = sample_models(
            rbm,
            partial,
            replace(cfg, seed=cfg.seed + r),
            model_set=models,
            stop_at_full_coverage=True,
        )
        curves.append(run.coverage_curve)
        full = run.coverage_curve and run.coverage_curve[-1][1] >= 1.0
        samples_to_full.append(run.coverage_curve[-1][0] if full else None)
        accuracies.append(run.accuracy)
    elapsed = time.perf_counter() - t0
    checkpoints = np.unique(
        np.linspace(1, cfg.max_samples, n_checkpoints).astype(np.int64)
    )
    mat = np.stack([_curve_at(c, checkpoints) for c in curves])
    return CoverageResult(
        M=M,
        N=N,
        runs=runs,
        checkpoints=checkpoints,
        coverage_mean=mat.mean(axis=0),
        coverage_std=mat.std(axis=0),
        samples_to_full=samples_to_full,
        accuracies=accuracies,
        time_seconds=elapsed,
    )
