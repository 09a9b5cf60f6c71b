import numpy as np
import pytest

from qfdiv import functions
from qfdiv.divergences import (classical_f_divergence, fidelity, optimized_objective,
                               petz_f_divergence, petz_renyi, quantum_relative_entropy,
                               sandwiched_quasi_norm, sandwiched_renyi)
from qfdiv.errors import DomainViolation, InvalidInput
from qfdiv.linalg import kron
from qfdiv.states import random_density

KL = 0.75 * np.log(1.5) + 0.25 * np.log(0.5)
P, Q = np.array([0.75, 0.25]), np.array([0.5, 0.5])
BUILTINS = [functions.neg_log(), functions.neg_power(1 / 3), functions.neg_power(0.5),
            functions.power(-0.5), functions.power(-1.0)]


def _pair(d, seed):
    return random_density(d, seed=2 * seed), random_density(d, seed=2 * seed + 1)


def _mpow(X, p):
    w, U = np.linalg.eigh(X)
    return (U * w ** p) @ U.conj().T


def test_worked_scalar_values():
    assert abs(KL - 0.130812) < 1e-6
    X, Y = np.diag(P), np.diag(Q)
    assert abs(quantum_relative_entropy(X, Y) - KL) < 1e-12
    assert abs(petz_renyi(X, Y, 2) - np.log(1.25)) < 1e-12
    assert abs(sandwiched_renyi(X, Y, 2) - np.log(1.25)) < 1e-12
    assert abs(np.log(1.25) - 0.223144) < 1e-6


def test_classical_oracle_argument_order():
    f = functions.neg_log()
    assert abs(classical_f_divergence(P, Q, f) - 0.143841) < 1e-6
    # the Petz quantity on diag(p), diag(q) is the classical one with swapped arguments
    assert abs(petz_f_divergence(np.diag(P), np.diag(Q), f) - classical_f_divergence(Q, P, f)) < 1e-12
    assert abs(petz_f_divergence(np.diag(P), np.diag(Q), f) - KL) < 1e-12
    assert abs(classical_f_divergence(P, P, f)) < 1e-15
    u = np.ones(4) / 4
    assert abs(classical_f_divergence(u, u, functions.neg_power(0.5)) + 1) < 1e-15
    with pytest.raises(InvalidInput):
        classical_f_divergence([0.5, 0.6], [0.5, 0.5], f)


@pytest.mark.parametrize("f", BUILTINS, ids=str)
def test_commuting_petz_reduces_to_classical(f):
    rng = np.random.default_rng(3)
    for _ in range(5):
        p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        assert abs(petz_f_divergence(np.diag(p), np.diag(q), f) - classical_f_divergence(q, p, f)) < 1e-10


@pytest.mark.parametrize("beta", [0.25, 0.5, 1.0])
def test_petz_power_identity(beta):
    for seed in range(5):
        X, Y = _pair(2, seed)
        trace = np.trace(_mpow(X, 1 - beta) @ _mpow(Y, beta)).real
        assert abs(petz_f_divergence(X, Y, functions.neg_power(beta)) + trace) < 1e-10


@pytest.mark.parametrize("f", BUILTINS, ids=str)
def test_direct_and_spectral_routes_agree(f):
    for seed in range(4):
        X, Y = _pair(3, seed)
        X = 1.7 * X
        tau = random_density(3, seed=100 + seed)
        a = optimized_objective(X, Y, tau, f, method="direct")
        b = optimized_objective(X, Y, tau, f, method="spectral")
        assert abs(a - b) < 1e-10 * (1 + abs(a))
        a = petz_f_divergence(X, Y, f, method="direct")
        b = petz_f_divergence(X, Y, f, method="spectral")
        assert abs(a - b) < 1e-10 * (1 + abs(a))


@pytest.mark.parametrize("f", BUILTINS, ids=str)
def test_objective_at_x_is_petz(f):
    X, Y = _pair(3, 7)
    assert abs(optimized_objective(X, Y, X, f) - petz_f_divergence(X, Y, f)) < 1e-12


def test_objective_examples():
    X, Y = _pair(3, 2)
    f = functions.neg_log()
    expected = np.trace(X @ (_log(X) - _log(Y))).real
    assert abs(optimized_objective(X, Y, X, f) - expected) < 1e-12
    half = np.eye(2) / 2
    assert abs(optimized_objective(half, half, half, f)) < 1e-15


def _log(X):
    w, U = np.linalg.eigh(X)
    return (U * np.log(w)) @ U.conj().T


@pytest.mark.parametrize("f", BUILTINS, ids=str)
def test_scaling_tau_down_does_not_help(f):
    X, Y = _pair(2, 4)
    tau = random_density(2, seed=9)
    base = optimized_objective(X, Y, tau, f)
    for c in (0.2, 0.5, 0.9):
        assert optimized_objective(X, Y, c * tau, f) <= base + 1e-10


def test_objective_rejects_large_trace():
    X, Y = _pair(2, 1)
    with pytest.raises(DomainViolation):
        optimized_objective(X, Y, 1.1 * X, functions.neg_log())
    with pytest.raises(DomainViolation):
        optimized_objective(X, Y, np.diag([1.0, 0.0]), functions.neg_log())


def test_relative_entropy_additivity():
    r1, s1 = _pair(2, 1)
    r2, s2 = _pair(3, 2)
    joint = quantum_relative_entropy(kron(r1, r2), kron(s1, s2))
    assert abs(joint - quantum_relative_entropy(r1, s1) - quantum_relative_entropy(r2, s2)) < 1e-9


def test_relative_entropy_normalizes_x():
    X, Y = _pair(3, 5)
    assert abs(quantum_relative_entropy(4 * X, Y) - quantum_relative_entropy(X, Y)) < 1e-12


def test_sandwiched_monotone_in_alpha():
    grid = [a for a in np.round(np.arange(0.5, 3.01, 0.1), 10) if a != 1.0]
    for seed in range(5):
        X, Y = _pair(2, seed)
        vals = [sandwiched_renyi(X, Y, a) for a in grid]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


def test_sandwiched_below_petz():
    # Araki-Lieb-Thirring: sandwiched <= Petz for alpha in (1, 2]
    for seed in range(5):
        X, Y = _pair(3, seed)
        for a in (1.5, 2.0):
            assert sandwiched_renyi(X, Y, a) <= petz_renyi(X, Y, a) + 1e-12


def test_equal_states_give_zero():
    X = random_density(3, seed=1)
    assert abs(sandwiched_renyi(X, X, 2)) < 1e-12
    assert abs(petz_renyi(X, X, 0.5)) < 1e-12
    assert abs(quantum_relative_entropy(X, X)) < 1e-12
    assert abs(fidelity(X, X) - 1) < 1e-12


def test_alpha_ranges():
    X, Y = _pair(2, 0)
    for bad in (1.0, 1 + 1e-7, 0.0, 2.5):
        with pytest.raises(InvalidInput):
            petz_renyi(X, Y, bad)
    for bad in (1.0, 0.4):
        with pytest.raises(InvalidInput):
            sandwiched_renyi(X, Y, bad)
    assert np.isfinite(sandwiched_renyi(X, Y, 7.5))


def test_sandwiched_quasi_norm_commuting():
    X, Y = np.diag(P), np.diag(Q)
    assert abs(sandwiched_quasi_norm(X, Y, 2) - np.sqrt(1.25)) < 1e-12


def test_fidelity_commuting():
    rng = np.random.default_rng(1)
    p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
    assert abs(fidelity(np.diag(p), np.diag(q)) - np.sum(np.sqrt(p * q))) < 1e-12


def test_fidelity_symmetric():
    X, Y = _pair(3, 3)
    assert abs(fidelity(X, Y) - fidelity(Y, X)) < 1e-12
    assert 0 < fidelity(X, Y) <= 1


def test_pd_required():
    with pytest.raises(DomainViolation):
        quantum_relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2)
    with pytest.raises(InvalidInput):
        quantum_relative_entropy(np.eye(2) / 2, np.eye(3) / 3)
