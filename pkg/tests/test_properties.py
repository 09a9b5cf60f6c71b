"""Randomized properties over seeds and dimensions (hypothesis-driven)."""

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from qfdiv import functions, harness
from qfdiv.channels import apply_channel, apply_via_stinespring, random_channel
from qfdiv.divergences import optimized_objective, petz_f_divergence, petz_renyi, sandwiched_renyi
from qfdiv.linalg import eig_hermitian, kron, matrix_function, partial_trace
from qfdiv.states import make_rng, random_density, random_hermitian

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(2, 4)
builtin = st.sampled_from([functions.neg_log(), functions.neg_power(1 / 3), functions.neg_power(0.5),
                           functions.power(-0.5), functions.power(-1.0)])
SETTINGS = settings(max_examples=40, deadline=None)


@SETTINGS
@given(seeds, st.integers(1, 8))
def test_spectral_reconstruction(seed, d):
    H = random_hermitian(d, seed=seed)
    for method in ("lapack", "jacobi"):
        assert np.abs(eig_hermitian(H, method=method).reconstruct() - H).max() < 1e-10


@SETTINGS
@given(seeds, dims, dims)
def test_partial_trace_preserves_trace_and_positivity(seed, dA, dB):
    M = random_density(dA * dB, seed=seed)
    for keep in (0, 1):
        R = partial_trace(M, (dA, dB), keep)
        assert abs(np.trace(R).real - 1) < 1e-12
        assert np.linalg.eigvalsh(R)[0] > -1e-10


@SETTINGS
@given(seeds, st.integers(1, 3), st.integers(1, 3), st.integers(1, 4))
def test_channel_kraus_equals_stinespring(seed, d_in, d_out, n):
    assume(d_out * n >= d_in)
    ch = random_channel(d_in, d_out, n, seed=seed)
    X = random_density(d_in, seed=seed + 1)
    assert np.abs(apply_channel(ch, X) - apply_via_stinespring(ch, X)).max() < 1e-10


@SETTINGS
@given(seeds, dims, builtin, st.sampled_from([0.25, 0.5, 0.75]))
def test_objective_concave_in_tau(seed, d, f, lam):
    rng = make_rng(seed)
    X, Y, t1, t2 = (random_density(d, rng) for _ in range(4))
    assert harness.check_concavity(X, Y, t1, t2, lam, f) >= -1e-9


@SETTINGS
@given(seeds, builtin)
def test_petz_dpi_random(seed, f):
    rng = make_rng(seed)
    X, Y = random_density(6, rng), random_density(6, rng)
    assert harness.check_petz_dpi(X, Y, (2, 3), f) >= -1e-9


@SETTINGS
@given(seeds, dims, builtin)
def test_functional_calculus_commutes(seed, d, f):
    X = random_density(d, seed=seed)
    F = matrix_function(X, f)
    assert np.abs(F @ X - X @ F).max() < 1e-9


@SETTINGS
@given(seeds, dims)
def test_petz_renyi_matches_petz_power(seed, d):
    rng = make_rng(seed)
    X, Y = random_density(d, rng), random_density(d, rng)
    # D_alpha = log(-Q_{-x^beta}) / (alpha - 1) with alpha = 1 - beta
    q = petz_f_divergence(X, Y, functions.neg_power(0.5))
    assert abs(np.log(-q) / (0.5 - 1) - petz_renyi(X, Y, 0.5)) < 1e-10


@SETTINGS
@given(seeds, dims, st.sampled_from([0.5, 0.75, 1.5, 2.0, 4.0]))
def test_sandwiched_additive(seed, d, alpha):
    rng = make_rng(seed)
    r1, s1, r2, s2 = (random_density(k, rng) for k in (d, d, 2, 2))
    joint = sandwiched_renyi(kron(r1, r2), kron(s1, s2), alpha)
    assert abs(joint - sandwiched_renyi(r1, s1, alpha) - sandwiched_renyi(r2, s2, alpha)) < 1e-9


@SETTINGS
@given(seeds, dims, builtin)
def test_objective_routes_agree(seed, d, f):
    rng = make_rng(seed)
    X, Y, tau = (random_density(d, rng) for _ in range(3))
    a = optimized_objective(X, Y, tau, f, method="direct")
    b = optimized_objective(X, Y, tau, f, method="spectral")
    assert abs(a - b) < 1e-9 * (1 + abs(a))
