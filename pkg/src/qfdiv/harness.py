"""Randomized certification of the data-processing family of inequalities.

Each ``check_*`` function evaluates one inequality on one instance and
returns a signed margin (non-negative when the inequality holds) or, for the
invariance check, an absolute difference. ``run_suite`` draws seeded random
instances for a list of ``TrialSpec`` and aggregates them into a
``SuiteReport`` whose JSON form is deterministic for a given set of specs.

Random inputs for trial ``i`` of a check come from the substream
``(seed, crc32(check), i)``, so every trial is reproducible on its own and
trials can be farmed out to worker processes without changing the report.
"""

import os
import re
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import functions
from .channels import (QuantumChannel, apply_via_stinespring, check_isometry,
                       petz_recovery_channel, petz_recovery_isometry,
                       random_channel)
from .divergences import optimized_objective, petz_f_divergence
from .errors import DomainViolation, InvalidInput, NonConvergence
from .functions import AntiMonotoneFunction
from .io import channel_to_json, dumps, matrix_to_json
from .linalg import (check_dims, kron, matrix_function, matrix_power,
                     partial_trace, require_positive_definite,
                     transpose_in_basis)
from .optimizer import OptimizerConfig, optimized_f_divergence
from .states import make_rng, random_density, random_isometry, random_unitary

OPTIMIZED_TOL = 1e-8
PETZ_TOL = 1e-9
INVARIANCE_TOL = 1e-6
JENSEN_TOL = 1e-9
CHAIN_TOL = 1e-9
TRACE_TOL = 1e-10
INCONCLUSIVE_CAP = 0.02
REGENERATE_ATTEMPTS = 20

DPI_PARTIAL_TRACE = "dpi-partial-trace"
DPI_CHANNEL = "dpi-channel"
ISOMETRIC_INVARIANCE = "isometric-invariance"
OPERATOR_JENSEN = "operator-jensen"
PROOF_CHAIN = "proof-chain"
PETZ_DPI = "petz-dpi"
CONCAVITY = "concavity"

DEFAULT_TOLERANCE = {
    DPI_PARTIAL_TRACE: OPTIMIZED_TOL,
    DPI_CHANNEL: OPTIMIZED_TOL,
    ISOMETRIC_INVARIANCE: INVARIANCE_TOL,
    OPERATOR_JENSEN: JENSEN_TOL,
    PROOF_CHAIN: CHAIN_TOL,
    PETZ_DPI: PETZ_TOL,
    CONCAVITY: JENSEN_TOL,
}
DEFAULT_DIMS = {
    DPI_PARTIAL_TRACE: (2, 2),
    DPI_CHANNEL: (2, 2),
    ISOMETRIC_INVARIANCE: (3,),
    OPERATOR_JENSEN: (4, 8),
    PROOF_CHAIN: (2, 2),
    PETZ_DPI: (2, 2),
    CONCAVITY: (3,),
}
CHECKS = tuple(DEFAULT_TOLERANCE)


# ---------------------------------------------------------------------------
# single-instance checks

def _optimized(X, Y, f, cfg):
    return optimized_f_divergence(X, Y, f, cfg).value


def check_dpi_partial_trace(X_AB, Y_AB, dims: Sequence[int], f: AntiMonotoneFunction,
                            cfg: Optional[OptimizerConfig] = None) -> float:
    """``Q~_f(X_AB||Y_AB) - Q~_f(X_A||Y_A)``."""
    X_AB = require_positive_definite(X_AB, "X_AB")
    Y_AB = require_positive_definite(Y_AB, "Y_AB")
    dims = check_dims(dims, X_AB.shape[0])
    X_A = partial_trace(X_AB, dims, 0)
    Y_A = partial_trace(Y_AB, dims, 0)
    return _optimized(X_AB, Y_AB, f, cfg) - _optimized(X_A, Y_A, f, cfg)


def check_dpi_channel(X, Y, ch: QuantumChannel, f: AntiMonotoneFunction,
                      cfg: Optional[OptimizerConfig] = None) -> float:
    """``Q~_f(X||Y) - Q~_f(N(X)||N(Y))`` with N applied as isometry then partial trace."""
    NX = require_positive_definite(apply_via_stinespring(ch, X), "N(X)")
    NY = require_positive_definite(apply_via_stinespring(ch, Y), "N(Y)")
    return _optimized(X, Y, f, cfg) - _optimized(NX, NY, f, cfg)


def check_isometric_invariance(X, Y, V, f: AntiMonotoneFunction,
                               cfg: Optional[OptimizerConfig] = None) -> float:
    """``|Q~_f(X||Y) - Q~_f(VXV^dag||VYV^dag)|`` for a square unitary ``V``."""
    V = check_isometry(V)
    if V.shape[0] != V.shape[1]:
        raise InvalidInput("isometric invariance is only certified for square unitaries")
    Vd = V.conj().T
    return abs(_optimized(X, Y, f, cfg) - _optimized(V @ X @ Vd, V @ Y @ Vd, f, cfg))


def jensen_gap(V, A, f) -> np.ndarray:
    """``V^dag f(A) V - f(V^dag A V)``."""
    V = check_isometry(V)
    A = require_positive_definite(A, "A")
    Vd = V.conj().T
    gap = Vd @ matrix_function(A, f) @ V - matrix_function(Vd @ A @ V, f)
    return 0.5 * (gap + gap.conj().T)


def check_operator_jensen(V, A, f) -> float:
    """Smallest eigenvalue of ``V^dag f(A) V - f(V^dag A V)``."""
    return float(np.linalg.eigvalsh(jensen_gap(V, A, f))[0])


@dataclass
class ProofChainReport:
    tau_trace_error: float
    tau_min_eigenvalue: float
    identity_residual: float  # max-entry norm of the chain identity
    recovery_residual: float  # |R(X_A) - X_AB|_max
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    def passed(self, tol: float = CHAIN_TOL) -> bool:
        return (self.tau_trace_error <= TRACE_TOL and self.tau_min_eigenvalue > 0
                and self.identity_residual <= tol and self.recovery_residual <= TRACE_TOL
                and self.margin >= -tol)


def chain_state(X_AB, dims, omega_A) -> np.ndarray:
    """``tau_AB``: the Petz recovery of ``X_AB`` applied to ``omega_A``."""
    return petz_recovery_channel(X_AB, dims)(omega_A)


def check_proof_chain(X_AB, Y_AB, dims: Sequence[int], omega_A,
                      f: AntiMonotoneFunction) -> ProofChainReport:
    X_AB = require_positive_definite(X_AB, "X_AB")
    Y_AB = require_positive_definite(Y_AB, "Y_AB")
    dA, dB = check_dims(dims, X_AB.shape[0])
    omega_A = require_positive_definite(omega_A, "omega_A")
    if omega_A.shape != (dA, dA):
        raise InvalidInput(f"omega_A must be {dA}x{dA}")
    if abs(np.trace(omega_A).real - 1.0) > TRACE_TOL:
        raise InvalidInput("omega_A must have unit trace")

    tau = chain_state(X_AB, (dA, dB), omega_A)
    w = np.linalg.eigvalsh(tau)
    if w[0] <= 0:
        raise DomainViolation("recovered tau_AB is not invertible")
    V = petz_recovery_isometry(X_AB, (dA, dB))
    Y_A = partial_trace(Y_AB, (dA, dB), 0)
    left = V.conj().T @ kron(matrix_power(tau, -1.0), transpose_in_basis(Y_AB)) @ V
    right = kron(matrix_power(omega_A, -1.0), transpose_in_basis(Y_A))
    X_A = partial_trace(X_AB, (dA, dB), 0)
    recovered = petz_recovery_channel(X_AB, (dA, dB))(X_A)
    # tau may carry trace 1 + O(eps); rescale before the trace-1 objective check
    tau_unit = tau / max(1.0, np.trace(tau).real)
    return ProofChainReport(
        tau_trace_error=abs(float(np.trace(tau).real) - 1.0),
        tau_min_eigenvalue=float(w[0]),
        identity_residual=float(np.max(np.abs(left - right))),
        recovery_residual=float(np.max(np.abs(recovered - X_AB))),
        lhs=optimized_objective(X_AB, Y_AB, tau_unit, f),
        rhs=optimized_objective(X_A, Y_A, omega_A, f),
    )


def check_petz_dpi(X_AB, Y_AB, dims: Sequence[int], f: AntiMonotoneFunction) -> float:
    """``Q_f(X_AB||Y_AB) - Q_f(X_A||Y_A)`` for the Petz divergence."""
    X_AB = require_positive_definite(X_AB, "X_AB")
    dims = check_dims(dims, X_AB.shape[0])
    return (petz_f_divergence(X_AB, Y_AB, f)
            - petz_f_divergence(partial_trace(X_AB, dims, 0), partial_trace(Y_AB, dims, 0), f))


def check_concavity(X, Y, tau1, tau2, lam: float, f: AntiMonotoneFunction) -> float:
    """``Q(lam tau1 + (1-lam) tau2) - lam Q(tau1) - (1-lam) Q(tau2)`` for the objective."""
    if not 0.0 <= lam <= 1.0:
        raise InvalidInput("lam must lie in [0, 1]")
    mid = lam * tau1 + (1.0 - lam) * tau2
    return (optimized_objective(X, Y, mid, f)
            - lam * optimized_objective(X, Y, tau1, f)
            - (1.0 - lam) * optimized_objective(X, Y, tau2, f))


# ---------------------------------------------------------------------------
# suite

@dataclass(frozen=True)
class TrialSpec:
    """One batch of seeded trials of a single check.

    ``dims`` is ``(dA, dB)`` for the bipartite checks, ``(d_in, d_out)`` for
    the channel and Jensen checks, and ``(d,)`` (or a factorization of it) for
    invariance and concavity. ``function`` is a builtin name or ``custom``
    with ``expr`` and ``anti_monotone``.
    """

    check: str
    function: str = functions.NEG_LOG
    beta: Optional[float] = None
    dims: tuple = ()
    n_trials: int = 100
    seed: int = 0
    tolerance: Optional[float] = None
    expr: Optional[str] = None
    anti_monotone: bool = False

    def __post_init__(self):
        if self.check not in CHECKS:
            raise InvalidInput(f"unknown check {self.check!r}; expected one of {', '.join(CHECKS)}")
        if not self.dims:
            object.__setattr__(self, "dims", DEFAULT_DIMS[self.check])
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if any(d < 1 for d in self.dims):
            raise InvalidInput("dims must be positive")
        if self.check in (DPI_PARTIAL_TRACE, PROOF_CHAIN, PETZ_DPI, DPI_CHANNEL,
                          OPERATOR_JENSEN) and len(self.dims) != 2:
            raise InvalidInput(f"{self.check} needs two dims")
        if self.check == OPERATOR_JENSEN and self.dims[1] < self.dims[0]:
            raise InvalidInput("operator-jensen needs d_out >= d_in")
        if self.n_trials < 1:
            raise InvalidInput("n_trials must be at least 1")
        if self.seed < 0:
            raise InvalidInput("seed must be non-negative")
        if self.tolerance is not None and not self.tolerance > 0:
            raise InvalidInput("tolerance must be positive")
        self.make_function()

    @property
    def tol(self) -> float:
        return DEFAULT_TOLERANCE[self.check] if self.tolerance is None else self.tolerance

    def make_function(self) -> AntiMonotoneFunction:
        if self.function == functions.CUSTOM:
            if not self.expr:
                raise InvalidInput("custom function needs an expression")
            return functions.from_expression(self.expr, self.anti_monotone)
        return functions.builtin(self.function, beta=self.beta)

    @property
    def name(self) -> str:
        dims = "x".join(str(d) for d in self.dims)
        return f"{self.check}[{self.make_function()}; {dims}]"

    @classmethod
    def from_dict(cls, obj) -> "TrialSpec":
        if not isinstance(obj, dict):
            raise InvalidInput("each trial spec must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise InvalidInput(f"unknown trial spec field(s): {', '.join(sorted(extra))}")
        if "check" not in obj:
            raise InvalidInput("trial spec missing field 'check'")
        return cls(**obj)


@dataclass
class Trial:
    margin: float
    passed: bool
    witness: dict


@dataclass
class CheckResult:
    name: str
    spec: TrialSpec
    trials: int = 0
    passes: int = 0
    failures: int = 0
    inconclusive: int = 0
    worst_margin: float = np.inf
    worst_trial: int = -1
    witness: dict = field(default_factory=dict)
    witness_files: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.inconclusive <= INCONCLUSIVE_CAP * self.trials

    def add(self, index: int, trial: Optional[Trial]):
        self.trials += 1
        if trial is None:
            self.inconclusive += 1
            return
        if trial.passed:
            self.passes += 1
        else:
            self.failures += 1
        if trial.margin < self.worst_margin:
            self.worst_margin, self.worst_trial, self.witness = trial.margin, index, trial.witness

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "check": self.spec.check,
            "function": str(self.spec.make_function()),
            "dims": list(self.spec.dims),
            "seed": self.spec.seed,
            "tolerance": self.spec.tol,
            "trials": self.trials,
            "passes": self.passes,
            "failures": self.failures,
            "inconclusive": self.inconclusive,
            "worst_margin": self.worst_margin if self.worst_trial >= 0 else None,
            "worst_trial": self.worst_trial,
            "passed": self.passed,
            "witness_files": self.witness_files,
        }


@dataclass
class SuiteReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks]}

    def dumps(self) -> str:
        return dumps(self.to_json()) + "\n"

    def write(self, path, witness_dir=None):
        """Write the report; witnesses go to ``witness_dir`` when given."""
        if witness_dir is not None:
            write_witnesses(self, witness_dir)
        with open(path, "w") as fh:
            fh.write(self.dumps())


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", text).strip("_")


def write_witnesses(report: SuiteReport, directory):
    os.makedirs(directory, exist_ok=True)
    for i, c in enumerate(report.checks):
        c.witness_files = []
        for key in sorted(c.witness):
            path = os.path.join(str(directory), f"{i:02d}-{_slug(c.name)}-{key}.json")
            value = c.witness[key]
            if isinstance(value, QuantumChannel):
                payload = channel_to_json(value)
            else:
                payload = matrix_to_json(value, c.spec.dims if key.endswith("_AB") else None)
            with open(path, "w") as fh:
                fh.write(dumps(payload) + "\n")
            c.witness_files.append(path)


def _trial_rng(spec: TrialSpec, index: int):
    return make_rng(spec.seed, zlib.crc32(spec.check.encode()), index)


def _random_pair(rng, d):
    return random_density(d, rng), random_density(d, rng)


def _positive_output_channel(rng, X, Y, d_in, d_out):
    for _ in range(REGENERATE_ATTEMPTS):
        ch = random_channel(d_in, d_out, int(rng.integers(2, 4)), rng)
        outs = [apply_via_stinespring(ch, M) for M in (X, Y)]
        if all(np.linalg.eigvalsh(M)[0] > 1e-12 * np.linalg.eigvalsh(M)[-1] for M in outs):
            return ch
    raise DomainViolation("could not draw a channel with invertible outputs")


def run_trial(spec: TrialSpec, index: int, cfg: Optional[OptimizerConfig] = None) -> Optional[Trial]:
    """One seeded trial; None when the optimizer fails to converge."""
    rng = _trial_rng(spec, index)
    f = spec.make_function()
    tol = spec.tol
    d = int(np.prod(spec.dims))
    try:
        if spec.check in (DPI_PARTIAL_TRACE, PETZ_DPI):
            X, Y = _random_pair(rng, d)
            if spec.check == PETZ_DPI:
                m = check_petz_dpi(X, Y, spec.dims, f)
            else:
                m = check_dpi_partial_trace(X, Y, spec.dims, f, cfg)
            return Trial(m, m >= -tol, {"X_AB": X, "Y_AB": Y})
        if spec.check == DPI_CHANNEL:
            d_in, d_out = spec.dims
            X, Y = _random_pair(rng, d_in)
            ch = _positive_output_channel(rng, X, Y, d_in, d_out)
            m = check_dpi_channel(X, Y, ch, f, cfg)
            return Trial(m, m >= -tol, {"X": X, "Y": Y, "channel": ch})
        if spec.check == ISOMETRIC_INVARIANCE:
            X, Y = _random_pair(rng, d)
            U = random_unitary(d, rng)
            diff = check_isometric_invariance(X, Y, U, f, cfg)
            return Trial(-diff, diff <= tol, {"X": X, "Y": Y, "U": U})
        if spec.check == OPERATOR_JENSEN:
            d_in, d_out = spec.dims
            V = random_isometry(d_in, d_out, rng)
            A = d_out * random_density(d_out, rng)
            m = check_operator_jensen(V, A, f)
            return Trial(m, m >= -tol, {"V": V, "A": A})
        if spec.check == PROOF_CHAIN:
            X, Y = _random_pair(rng, d)
            omega = random_density(spec.dims[0], rng)
            r = check_proof_chain(X, Y, spec.dims, omega, f)
            return Trial(r.margin, r.passed(tol), {"X_AB": X, "Y_AB": Y, "omega_A": omega})
        if spec.check == CONCAVITY:
            X, Y = _random_pair(rng, d)
            t1, t2 = random_density(d, rng), random_density(d, rng)
            lam = float(rng.uniform())
            m = check_concavity(X, Y, t1, t2, lam, f)
            return Trial(m, m >= -tol, {"X": X, "Y": Y, "tau1": t1, "tau2": t2})
    except NonConvergence:
        return None
    raise InvalidInput(f"unknown check {spec.check!r}")  # unreachable after validation


def _run_chunk(args):
    spec, indices, cfg = args
    return [run_trial(spec, i, cfg) for i in indices]


def run_check(spec: TrialSpec, cfg: Optional[OptimizerConfig] = None, pool=None) -> CheckResult:
    result = CheckResult(spec.name, spec)
    indices = list(range(spec.n_trials))
    if pool is None:
        trials = _run_chunk((spec, indices, cfg))
    else:
        chunks = [indices[k::8] for k in range(8)]
        trials = [None] * spec.n_trials
        for chunk, out in zip(chunks, pool.map(_run_chunk, [(spec, c, cfg) for c in chunks])):
            for i, t in zip(chunk, out):
                trials[i] = t
    for i, t in enumerate(trials):
        result.add(i, t)
    return result


def run_suite(specs: Sequence[TrialSpec], cfg: Optional[OptimizerConfig] = None,
              workers: int = 1) -> SuiteReport:
    """Run every spec; the report depends only on the specs and ``cfg``."""
    if workers < 1:
        raise InvalidInput("workers must be at least 1")
    if workers == 1:
        return SuiteReport([run_check(s, cfg) for s in specs])
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return SuiteReport([run_check(s, cfg, pool) for s in specs])


BUILTIN_FUNCTIONS = (
    (functions.NEG_LOG, None),
    (functions.NEG_POWER, 1.0 / 3.0),
    (functions.NEG_POWER, 0.5),
    (functions.POWER, -0.5),
    (functions.POWER, -1.0),
)
JENSEN_FUNCTIONS = (
    (functions.NEG_LOG, None),
    (functions.POWER, -1.0),
    (functions.NEG_POWER, 0.5),
)


def default_suite(seed: int = 0, n_trials: int = 100) -> list:
    """Every check over the builtin functions at small dimensions (d <= 4)."""
    specs = []
    for check in CHECKS:
        fs = JENSEN_FUNCTIONS if check == OPERATOR_JENSEN else BUILTIN_FUNCTIONS
        dims = (2, 4) if check == OPERATOR_JENSEN else DEFAULT_DIMS[check]
        for name, beta in fs:
            specs.append(TrialSpec(check, name, beta, dims, n_trials, seed))
    return specs


def negative_control_suite(seed: int = 0, n_trials: int = 500) -> list:
    """``f = +log`` wrongly flagged anti-monotone; these checks should fail."""
    return [TrialSpec(check, functions.CUSTOM, None, (2, 2), n_trials, seed,
                      expr="log(x)", anti_monotone=True)
            for check in (DPI_PARTIAL_TRACE, PETZ_DPI)]
