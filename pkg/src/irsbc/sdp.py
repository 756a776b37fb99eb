"""Solver for the unit-diagonal complex semidefinite program.

Solves  max tr(C V)  s.t.  diag(V) = 1, V >= 0 (Hermitian PSD), the relaxed
form of maximizing v^H C v over unit-modulus vectors v.

Two methods are provided.  The primary one factorizes V = Y Y^H with
unit-norm rows of Y (oblique-manifold parameterization) and runs Riemannian
gradient ascent with backtracking, checking the global-optimality certificate
diag(row duals) - C >= 0 and escaping rank-deficient saddles when it fails.
A dense barrier interior-point follower serves as a correctness oracle for
small instances.  Feasible unit-modulus vectors are recovered from V by
Gaussian randomization.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

LOW_RANK = "low_rank"
INTERIOR_POINT = "interior_point"

_EIG_CLAMP = 1e-10  # negative-eigenvalue clamp before sampling


@dataclass(frozen=True)
class SdpProblem:
    """Hermitian cost matrix of the unit-diagonal SDP."""

    cost: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cost, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("cost must be a square matrix")
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("cost must have finite entries")
        scale = np.linalg.norm(c)
        if np.linalg.norm(c - c.conj().T) > 1e-10 * max(scale, 1e-300):
            raise ValueError("cost matrix must be Hermitian")
        object.__setattr__(self, "cost", 0.5 * (c + c.conj().T))

    @property
    def dim(self) -> int:
        return self.cost.shape[0]


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for solve_diag_sdp and the randomization stage.

    factor_rank None picks ceil(sqrt(2 M)), enough for low-rank factorizations
    to reach the SDP optimum generically.
    """

    method: str = LOW_RANK
    factor_rank: Optional[int] = None
    max_iterations: int = 5000
    stationarity_tolerance: float = 1e-7
    randomization_count: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.method not in (LOW_RANK, INTERIOR_POINT):
            raise ValueError(f"unknown method: {self.method!r}")
        if self.factor_rank is not None and self.factor_rank < 1:
            raise ValueError("factor_rank must be >= 1")
        if self.randomization_count < 1:
            raise ValueError("randomization_count must be >= 1")


@dataclass
class SdpSolution:
    """Relaxed solution: Hermitian PSD matrix with unit diagonal.

    kkt_residual is reported on the spectrally normalized problem: the larger
    of the RMS Riemannian gradient and the certificate violation (low-rank
    method), or the final duality-gap bound (interior point).
    """

    matrix: np.ndarray
    objective: float
    iterations: int
    kkt_residual: float
    converged: bool
    method: str = LOW_RANK
    factor: Optional[np.ndarray] = None


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _normalize_rows(y: np.ndarray) -> np.ndarray:
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def _low_rank_solve(
    cost: np.ndarray, config: SolverConfig, initial_factor: Optional[np.ndarray]
) -> SdpSolution:
    m = cost.shape[0]
    k = config.factor_rank or int(np.ceil(np.sqrt(2 * m)))
    k = min(max(k, 1), m)
    rng = np.random.default_rng(config.rng_seed)

    if initial_factor is not None and initial_factor.shape[0] == m:
        y = _normalize_rows(np.asarray(initial_factor, dtype=complex).copy())
        k = y.shape[1]
    else:
        y = _normalize_rows(rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k)))

    g_full = cost @ y
    f = float(np.real(np.sum(np.conj(y) * g_full)))
    step = 0.5
    tol = config.stationarity_tolerance
    cert_tol = max(10.0 * tol, 1e-8)
    iters = 0
    escapes_left = 4
    converged = False
    residual = np.inf

    while iters < config.max_iterations:
        duals = np.sum(np.real(np.conj(y) * g_full), axis=1)
        grad = g_full - duals[:, None] * y
        gnorm2 = float(np.sum(np.abs(grad) ** 2))
        residual = np.sqrt(gnorm2 / (m * y.shape[1]))

        if residual <= tol:
            cert = np.diag(duals) - cost
            mu_min = float(np.linalg.eigvalsh(_hermitize(cert))[0])
            residual = max(residual, max(0.0, -mu_min))
            if mu_min >= -cert_tol:
                converged = True
                break
            if escapes_left == 0:
                break
            escapes_left -= 1
            evals, evecs = np.linalg.eigh(_hermitize(cert))
            z = evecs[:, 0]
            sv = np.linalg.svd(y, compute_uv=True)
            if sv[1][-1] < 1e-8 * sv[1][0]:
                null_dir = sv[2][-1].conj()  # right-singular vector, Y @ u ~ 0
            else:
                y = np.hstack([y, np.zeros((m, 1), dtype=complex)])
                null_dir = np.zeros(y.shape[1], dtype=complex)
                null_dir[-1] = 1.0
            y = _normalize_rows(y + 0.3 * np.outer(z, np.conj(null_dir)))
            g_full = cost @ y
            f = float(np.real(np.sum(np.conj(y) * g_full)))
            step = max(step, 0.1)
            iters += 1
            continue

        accepted = False
        while step > 1e-18:
            cand = _normalize_rows(y + step * grad)
            g_cand = cost @ cand
            f_new = float(np.real(np.sum(np.conj(cand) * g_cand)))
            iters += 1
            if f_new >= f + 1e-4 * step * gnorm2:
                y, f, g_full = cand, f_new, g_cand
                step = min(step * 1.5, 1e6)
                accepted = True
                break
            step *= 0.5
            if iters >= config.max_iterations:
                break
        if not accepted:
            break

    v = y @ y.conj().T
    v = _hermitize(v)
    np.fill_diagonal(v, 1.0)
    return SdpSolution(
        matrix=v,
        objective=float(np.real(np.trace(cost @ v))),
        iterations=iters,
        kkt_residual=residual,
        converged=converged,
        method=LOW_RANK,
        factor=y,
    )


def _interior_point_solve(cost: np.ndarray, config: SolverConfig) -> SdpSolution:
    m = cost.shape[0]
    v = np.eye(m, dtype=complex)
    mu = 1.0
    mu_min = 1e-11
    iters = 0
    converged = True

    def psd_step(base: np.ndarray, delta: np.ndarray) -> float:
        t = 1.0
        while t > 1e-14:
            try:
                np.linalg.cholesky(base + t * delta)
                return t
            except np.linalg.LinAlgError:
                t *= 0.5
        return 0.0

    while mu > mu_min:
        for _ in range(40):
            v_inv = _hermitize(np.linalg.inv(v))
            grad = cost + mu * v_inv
            weights = np.abs(v) ** 2
            rhs = np.real(np.diag(v @ grad @ v))
            nu = np.linalg.solve(weights, rhs)
            delta = _hermitize(v @ (grad - np.diag(nu)) @ v) / mu
            np.fill_diagonal(delta, 0.0)
            t = psd_step(v, delta)
            if t <= 0.0:
                converged = False
                break
            v = _hermitize(v + (t if t >= 1.0 else 0.9 * t) * delta)
            np.fill_diagonal(v, 1.0)
            iters += 1
            if np.linalg.norm(delta) <= 1e-10 * max(1.0, np.linalg.norm(v)):
                break
            if iters >= config.max_iterations:
                converged = False
                break
        if iters >= config.max_iterations:
            converged = False
            break
        mu *= 0.2

    return SdpSolution(
        matrix=v,
        objective=float(np.real(np.trace(cost @ v))),
        iterations=iters,
        kkt_residual=mu * m,
        converged=converged,
        method=INTERIOR_POINT,
        factor=None,
    )


def solve_diag_sdp(
    problem: SdpProblem,
    config: SolverConfig = SolverConfig(),
    initial_factor: Optional[np.ndarray] = None,
) -> SdpSolution:
    """Maximize tr(cost V) over Hermitian PSD V with unit diagonal.

    The returned objective upper-bounds v^H cost v for every unit-modulus v
    (relaxation property).  Non-convergence is reported on the result, which
    then carries the best iterate found.  The cost matrix is spectrally
    normalized internally; all outputs are rescaled back.
    """
    cost = problem.cost
    m = problem.dim
    if m == 1:
        return SdpSolution(
            matrix=np.ones((1, 1), dtype=complex),
            objective=float(np.real(cost[0, 0])),
            iterations=0,
            kkt_residual=0.0,
            converged=True,
            method=config.method,
        )
    scale = float(np.linalg.norm(cost))  # Frobenius: cheap, within sqrt(M) of spectral
    if scale == 0.0:
        return SdpSolution(
            matrix=np.eye(m, dtype=complex),
            objective=0.0,
            iterations=0,
            kkt_residual=0.0,
            converged=True,
            method=config.method,
        )
    normalized = cost / scale
    if config.method == INTERIOR_POINT:
        sol = _interior_point_solve(normalized, config)
    else:
        sol = _low_rank_solve(normalized, config, initial_factor)
    sol.objective *= scale
    return sol


def gaussian_randomize(
    solution, cost: np.ndarray, count: int = 100, seed: int = 0
) -> np.ndarray:
    """Extract a feasible unit-modulus vector from a relaxed solution.

    Draws `count` complex Gaussian vectors with covariance V (eigenvalues
    below 1e-10 clamped to zero before factorization), projects each entrywise
    to unit modulus, rotates so the last entry is exactly 1, and returns the
    candidate with the largest v^H cost v.  Candidates are drawn one at a
    time, so a larger count extends the same stream (the best objective is
    nondecreasing in count for a fixed seed); among ties the first drawn wins.
    """
    v_mat = solution.matrix if isinstance(solution, SdpSolution) else np.asarray(solution)
    m = v_mat.shape[0]
    evals, evecs = np.linalg.eigh(_hermitize(v_mat))
    evals = np.where(evals < _EIG_CLAMP, 0.0, evals)
    factor = evecs * np.sqrt(evals)[None, :]
    rng = np.random.default_rng(seed)
    # One (2, m) block per candidate, filled from the stream in C order, so
    # the first G candidates are identical for any larger count.
    noise = rng.standard_normal((count, 2, m))
    x = ((noise[:, 0, :] + 1j * noise[:, 1, :]) / np.sqrt(2.0)) @ factor.T
    mag = np.abs(x)
    vecs = np.where(mag > 0.0, x / np.where(mag > 0.0, mag, 1.0), 1.0 + 0.0j)
    vecs = vecs * np.conj(vecs[:, -1:])
    vecs[:, -1] = 1.0 + 0.0j
    vals = np.real(np.sum((vecs.conj() @ cost) * vecs, axis=1))
    return vecs[int(np.argmax(vals))]


def psd_project(matrix: np.ndarray) -> np.ndarray:
    """Nearest-PSD cleanup: clamp negative eigenvalues at 0, renormalize the
    diagonal to 1.  Idempotent on feasible inputs up to round-off."""
    evals, evecs = np.linalg.eigh(_hermitize(np.asarray(matrix, dtype=complex)))
    evals = np.clip(evals, 0.0, None)
    out = _hermitize((evecs * evals) @ evecs.conj().T)
    diag = np.real(np.diag(out))
    scale = 1.0 / np.sqrt(np.where(diag > 0.0, diag, 1.0))
    out = out * np.outer(scale, scale)
    np.fill_diagonal(out, 1.0)
    return out
