import logging

import numpy as np
import pytest

from qfdiv import functions
from qfdiv.divergences import (optimized_objective, petz_f_divergence, quantum_relative_entropy,
                               sandwiched_quasi_norm)
from qfdiv.errors import InvalidInput, NonConvergence
from qfdiv.linalg import trace_distance
from qfdiv.optimizer import (CLOSED_FORM, ITERATIVE, OptimizerConfig, closed_form_tau_neg_log,
                             closed_form_tau_power, hermitian_basis, optimize_tau_generic,
                             optimized_f_divergence)
from qfdiv.states import random_density

SANDWICHED_ALPHAS = [0.5, 0.6, 0.75, 0.9, 1.5, 2.0, 3.0]


def _pair(d, seed):
    return random_density(d, seed=2 * seed), random_density(d, seed=2 * seed + 1)


def _holder_value(X, Y, alpha):
    # the Schatten form through the other sandwich, Y^{(1-a)/2a} X Y^{(1-a)/2a}
    sign = -1.0 if alpha < 1 else 1.0
    return sign * sandwiched_quasi_norm(X, Y, alpha)


def test_hermitian_basis_orthonormal():
    for d in (1, 2, 3, 4):
        B = hermitian_basis(d)
        assert B.shape == (d * d - 1, d, d)
        if d == 1:
            continue
        gram = np.einsum("aij,bij->ab", B.conj(), B).real
        assert np.abs(gram - np.eye(d * d - 1)).max() < 1e-14
        assert np.abs(np.einsum("aii->a", B)).max() < 1e-14
        assert np.abs(B - B.conj().transpose(0, 2, 1)).max() == 0


def test_closed_form_tau_examples():
    assert np.abs(closed_form_tau_neg_log(np.eye(2)) - np.eye(2) / 2).max() == 0
    assert np.abs(closed_form_tau_neg_log(np.diag([3.0, 1.0])) - np.diag([0.75, 0.25])).max() < 1e-15
    half = np.eye(2) / 2
    for a in SANDWICHED_ALPHAS:
        assert np.abs(closed_form_tau_power(half, half, a) - half).max() < 1e-14


def test_closed_form_tau_power_worked_example():
    X, Y = np.diag([0.75, 0.25]), np.eye(2) / 2
    tau = closed_form_tau_power(X, Y, 2.0)
    # A = X^{1/2} Y^{-1/2} X^{1/2} = diag(0.75, 0.25) sqrt 2, so A^2 = diag(1.125, 0.125)
    assert np.abs(tau - np.diag([0.9, 0.1])).max() < 1e-14
    f = functions.power(-0.5)
    assert abs(optimized_objective(X, Y, tau, f) - np.sqrt(1.25)) < 1e-14


@pytest.mark.parametrize("alpha", SANDWICHED_ALPHAS)
def test_closed_form_tau_saturates_holder(alpha):
    f = functions.from_alpha(alpha)
    for seed in range(5):
        X, Y = _pair(3, seed)
        X = 2.0 * X
        tau = closed_form_tau_power(X, Y, alpha)
        assert abs(optimized_objective(X, Y, tau, f) - _holder_value(X, Y, alpha)) < 1e-9


def test_neg_log_closed_form():
    X, Y = _pair(3, 1)
    X = 3.0 * X
    rep = optimized_f_divergence(X, Y, functions.neg_log())
    assert rep.method == CLOSED_FORM
    assert abs(rep.value - 3.0 * quantum_relative_entropy(X, Y)) < 1e-12
    assert abs(optimized_objective(X, Y, rep.witness_tau, functions.neg_log()) - rep.value) < 1e-12


def test_power_closed_form_alpha_two():
    X, Y = _pair(2, 3)
    rep = optimized_f_divergence(X, Y, functions.power(-0.5))
    assert rep.method == CLOSED_FORM
    assert rep.value > 0
    assert abs(rep.value - sandwiched_quasi_norm(X, Y, 2.0)) < 1e-12


def test_generic_neg_log_finds_xbar():
    for seed in range(5):
        X, Y = _pair(2, seed)
        rep = optimize_tau_generic(X, Y, functions.neg_log())
        assert rep.method == ITERATIVE and rep.converged
        assert trace_distance(rep.witness_tau, X) < 1e-4
        assert abs(rep.value - quantum_relative_entropy(X, Y)) < 1e-6


def test_generic_identical_maximally_mixed():
    half = np.eye(2) / 2
    rep = optimize_tau_generic(half, half, functions.neg_log())
    assert abs(rep.value) < 1e-12
    assert np.abs(rep.witness_tau - half).max() < 1e-9


@pytest.mark.parametrize("alpha", SANDWICHED_ALPHAS)
@pytest.mark.parametrize("d", [2, 3])
def test_generic_matches_closed_form(alpha, d):
    f = functions.from_alpha(alpha)
    cfg = OptimizerConfig()
    for seed in range(3):
        X, Y = _pair(d, 10 * d + seed)
        rep = optimize_tau_generic(X, Y, f, cfg)
        ref = _holder_value(X, Y, alpha)
        assert abs(rep.value - ref) <= 1e-6 * abs(ref)
        w = np.linalg.eigvalsh(rep.witness_tau)
        assert abs(np.trace(rep.witness_tau).real - 1) < 1e-10
        assert w[0] >= cfg.min_eigenvalue_floor * (1 - 1e-6)


def test_alpha_infinity_reaches_max_relative_eigenvalue():
    f = functions.power(-1.0)
    assert f.closed_form is None
    for seed in range(4):
        X, Y = _pair(3, seed)
        w, U = np.linalg.eigh(X)
        sX = (U * np.sqrt(w)) @ U.conj().T
        lam = np.linalg.eigvalsh(sX @ np.linalg.inv(Y) @ sX)[-1]
        rep = optimized_f_divergence(X, Y, f)
        assert rep.method == ITERATIVE and rep.converged
        assert rep.value <= lam + 1e-12
        assert abs(rep.value - lam) < 1e-6 * lam


def test_generic_dominates_random_taus():
    f = functions.neg_power(0.5)
    X, Y = _pair(3, 4)
    rep = optimize_tau_generic(X, Y, f)
    for s in range(100):
        tau = random_density(3, seed=1000 + s)
        assert rep.value >= optimized_objective(X, Y, tau, f) - 1e-8
    assert rep.value >= petz_f_divergence(X, Y, f) - 1e-8


def test_custom_flagged_matches_builtin_route():
    X, Y = _pair(2, 6)
    custom = functions.custom(lambda x: -np.sqrt(x), anti_monotone=True)
    a = optimize_tau_generic(X, Y, custom)
    b = optimize_tau_generic(X, Y, functions.neg_power(0.5))
    assert abs(a.value - b.value) < 1e-12
    assert a.label == "supremum"
    c = optimized_f_divergence(X, Y, functions.neg_power(0.5))
    assert abs(a.value - c.value) < 1e-6 * abs(c.value)


def test_custom_unflagged_warns(caplog):
    X, Y = _pair(2, 6)
    f = functions.from_expression("-x**0.25")
    with caplog.at_level(logging.WARNING):
        rep = optimized_f_divergence(X, Y, f)
    assert rep.label == "stationary value" and not rep.certified
    assert "not flagged" in caplog.text


def test_non_convergence_carries_report():
    X, Y = _pair(3, 2)
    with pytest.raises(NonConvergence) as info:
        optimize_tau_generic(X, Y, functions.power(-1.0), OptimizerConfig(max_iterations=1))
    rep = info.value.report
    assert rep is not None and not rep.converged and np.isfinite(rep.value)


def test_restarts_do_not_lower_value():
    X, Y = _pair(2, 8)
    f = functions.neg_power(1 / 3)
    a = optimize_tau_generic(X, Y, f).value
    b = optimize_tau_generic(X, Y, f, OptimizerConfig(restarts=2, seed=3)).value
    assert b >= a - 1e-10


def test_one_dimensional():
    rep = optimize_tau_generic(np.array([[2.0]]), np.array([[0.5]]), functions.neg_log())
    assert abs(rep.value - np.log(4)) < 1e-12  # x f(y) = -2 log 0.5


def test_config_validation():
    with pytest.raises(InvalidInput):
        OptimizerConfig(convergence_tol=0)
    with pytest.raises(InvalidInput):
        OptimizerConfig(max_iterations=0)
    with pytest.raises(InvalidInput):
        optimize_tau_generic(np.eye(2) / 2, np.eye(2) / 2, functions.neg_log(),
                             OptimizerConfig(min_eigenvalue_floor=0.6))
