"""Lax matrices of the finite lattice flow and isospectrality diagnostics.

A finite-closure state (alpha_{N+1} = 0) assembles into the pair

    H: N x N lower Hessenberg, H[i][j] = gamma_{j+1} for j >= i,
       first subdiagonal alpha_2..alpha_N, zero below,
    F = p X + q Y,   X lower bidiagonal {diag alpha_k, sub -alpha_k},
                     Y upper bidiagonal {diag 1/beta_k, super -1/beta_k},

with gamma_k = alpha_{k+1} + beta_k (so gamma_k - alpha_{k+1} = beta_k).  The
flow satisfies  dH/dt = [H, F] = HF - FH  pointwise in the coefficients, an
algebraic identity with no integration involved; ``lax_residual`` measures it
directly.  Consequently the spectrum of H is conserved along trajectories,
and the zeros of Q_N coincide with the eigenvalues of H, which ``spectrum``
exploits: roots come from simultaneous Aberth iteration on the recurrence
evaluation of Q_N (a dense eigensolver is kept test-side as an oracle).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, SingularDenominator
from .lattice import EPS_SING, LatticeState, Trajectory, rhs_ertl, rhs_gamma
from .lorth import triangle_from_coeffs


@dataclass(frozen=True)
class LaxPair:
    """Dense Lax matrices of one finite-closure state (value object)."""

    N: int
    H: np.ndarray
    F: np.ndarray
    X: np.ndarray
    Y: np.ndarray


def build_pair(state: LatticeState) -> LaxPair:
    """Assemble (H, F) from a finite-closure state.

    F is constructed both as p X + q Y and directly from its tridiagonal
    entries -p alpha_k / p alpha_k + q/beta_k / -q/beta_k; the two must agree
    exactly (same arithmetic), which guards the assembly against index slips.
    """
    if state.closure != "finite":
        raise ValueError("Lax pair needs a finite-closure state")
    N = state.N
    beta = np.array(state.beta, dtype=complex)
    alpha = np.array(state.alpha, dtype=complex)  # alpha[k-1] = alpha_k
    if np.min(np.abs(beta)) < EPS_SING:
        k = int(np.argmin(np.abs(beta)))
        raise SingularDenominator(k + 1, complex(beta[k]), t=state.t)
    gamma = alpha[1:] + beta  # gamma_k, k = 1..N
    inv_beta = 1.0 / beta

    H = np.zeros((N, N), dtype=complex)
    for i in range(N):
        H[i, i:] = gamma[i:]
    for i in range(1, N):
        H[i, i - 1] = alpha[i]  # alpha_{i+1}

    X = np.zeros((N, N), dtype=complex)
    Y = np.zeros((N, N), dtype=complex)
    for k in range(N):
        X[k, k] = alpha[k]              # alpha_{k+1} on the diagonal
        if k > 0:
            X[k, k - 1] = -alpha[k]
        Y[k, k] = inv_beta[k]
        if k < N - 1:
            Y[k, k + 1] = -inv_beta[k]

    p, q = state.p, state.q
    # scalar arithmetic on both routes so the comparison is exact (numpy's
    # vectorized complex products round differently from CPython's)
    F = np.zeros((N, N), dtype=complex)
    for i in range(N):
        for j in range(N):
            F[i, j] = p * complex(X[i, j]) + q * complex(Y[i, j])

    F_direct = np.zeros((N, N), dtype=complex)
    for k in range(N):
        F_direct[k, k] = p * complex(alpha[k]) + q * complex(inv_beta[k])
        if k > 0:
            F_direct[k, k - 1] = p * complex(-alpha[k])
        if k < N - 1:
            F_direct[k, k + 1] = q * complex(-inv_beta[k])
    if not np.array_equal(F, F_direct):
        raise AssertionError("tridiagonal assembly of F disagrees with p X + q Y")

    return LaxPair(N=N, H=H, F=F, X=X, Y=Y)


def commutator(pair: LaxPair) -> np.ndarray:
    """[H, F] = H F - F H by dense multiplication."""
    return pair.H @ pair.F - pair.F @ pair.H


def lax_residual(state: LatticeState) -> float:
    """max |dH/dt - [H, F]| normalized by max(1, |H|_max |F|_max).

    dH/dt is assembled from the lattice right-hand sides: the subdiagonal
    carries alpha_dot and every row above the diagonal carries gamma_dot.
    """
    pair = build_pair(state)
    N = state.N
    _, dalpha = rhs_ertl(state)
    dgamma = rhs_gamma(state)

    Hdot = np.zeros((N, N), dtype=complex)
    for i in range(N):
        for j in range(i, N):
            Hdot[i, j] = dgamma[j]
    for i in range(1, N):
        Hdot[i, i - 1] = dalpha[i]

    resid = np.max(np.abs(Hdot - commutator(pair)))
    scale = max(1.0, float(np.max(np.abs(pair.H))) * float(np.max(np.abs(pair.F))))
    return float(resid) / scale


# ---------------------------------------------------------------------------
# Spectrum of the finite system
# ---------------------------------------------------------------------------

def _q_and_dq(beta, alpha, n, x):
    """(Q_n(x), Q_n'(x)) by differentiating the forward recurrence."""
    q_prev, dq_prev = 1.0 + 0j, 0j
    if n == 0:
        return q_prev, dq_prev
    q_cur, dq_cur = x - beta[0], 1.0 + 0j
    for k in range(1, n):
        b, a = beta[k], alpha[k - 1]
        q_next = (x - b) * q_cur - a * x * q_prev
        dq_next = q_cur + (x - b) * dq_cur - a * (q_prev + x * dq_prev)
        q_prev, dq_prev = q_cur, dq_cur
        q_cur, dq_cur = q_next, dq_next
    return q_cur, dq_cur


#: Aberth stopping tolerance on corrections (relative to 1 + |z|)
ABERTH_TOL = 1e-13
ABERTH_MAX_ITER = 200


def spectrum(state: LatticeState) -> list:
    """All N zeros of Q_N (= eigenvalues of H) for a finite-closure state.

    Simultaneous Aberth iteration with the polynomial and its derivative
    evaluated through the recurrence (numerically stable; no companion
    matrix), finished with two Newton polish sweeps.  Returned sorted
    lexicographically by (Re, Im).
    """
    if state.closure != "finite":
        raise ValueError("spectrum needs a finite-closure state")
    N = state.N
    beta = [complex(b) for b in state.beta]
    alpha = [complex(a) for a in state.alpha[1:-1]]  # alpha_2..alpha_N
    if N == 1:
        return [beta[0]]

    coeffs = triangle_from_coeffs(beta, alpha, N)[N]  # monic c_0..c_N
    centroid = -coeffs[N - 1] / N
    radius = 1.0 + max(abs(c) for c in coeffs[:-1])
    z = [centroid + 0.7 * radius * cmath.exp(2j * cmath.pi * (k + 0.37) / N + 0.41j)
         for k in range(N)]

    converged = False
    for _ in range(ABERTH_MAX_ITER):
        worst = 0.0
        for i in range(N):
            qv, dqv = _q_and_dq(beta, alpha, N, z[i])
            if qv == 0:
                continue
            if dqv == 0:
                z[i] += 1e-8 * (1.0 + abs(z[i]))
                worst = float("inf")
                continue
            w = qv / dqv
            s = sum(1.0 / (z[i] - z[j]) for j in range(N) if j != i)
            denom = 1.0 - w * s
            step = w if denom == 0 else w / denom
            z[i] -= step
            worst = max(worst, abs(step) / (1.0 + abs(z[i])))
        if worst <= ABERTH_TOL:
            converged = True
            break
    if not converged:
        raise NonConvergence(f"Aberth iteration stalled (last correction {worst:.3e})")

    for _ in range(2):  # Newton polish on the recurrence evaluation
        for i in range(N):
            qv, dqv = _q_and_dq(beta, alpha, N, z[i])
            if dqv != 0:
                z[i] -= qv / dqv
    return sorted(z, key=lambda v: (v.real, v.imag))


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two finite point sets in the plane."""
    d_ab = max(min(abs(x - y) for y in b) for x in a)
    d_ba = max(min(abs(x - y) for y in a) for x in b)
    return max(d_ab, d_ba)


def isospectral_drift(traj: Trajectory) -> float:
    """Worst spectral movement along a finite-closure trajectory.

    Returns the max over output times of the Hausdorff distance between the
    spectrum at t and the spectrum at the initial snapshot; for an exact Lax
    flow this is zero, so the value measures integrator (plus root-finder)
    error.
    """
    if any(s.closure != "finite" for s in traj.states):
        raise ValueError("isospectral drift is defined for finite-closure trajectories")
    base = spectrum(traj.states[0])
    drift = 0.0
    for s in traj.states[1:]:
        drift = max(drift, hausdorff_distance(spectrum(s), base))
    return drift
