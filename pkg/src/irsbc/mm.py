"""Minorization-maximization loop for the quartic phase-shift objective.

Each iteration builds a quadratic lower bound that touches the quartic at the
current iterate (a linearization damped by a curvature term), maximizes it via
the unit-diagonal SDP relaxation plus Gaussian randomization, and re-anchors.
The previous iterate is always kept as a fallback candidate, so the objective
trace is monotone nondecreasing by construction.

A Dinkelbach-transformed variant handles the power-splitting ratio objective
that appears once the tag draws circuit power.
"""

import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .geometry import ChannelSet
from .sdp import SdpProblem, SdpSolution, SolverConfig, gaussian_randomize, solve_diag_sdp
from .signal_model import PhaseVector, QuadraticForms, TagParams

ADAPTIVE = "adaptive"
FIXED = "fixed"

_CURVATURE_FLOOR = 1e-30
_TINY = 1e-300


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class MmConfig:
    """Outer-loop configuration.

    curvature_mode 'adaptive' recomputes the damping bound from the problem
    matrices; 'fixed' uses fixed_curvature (only meaningful when the channel
    scale is known in advance).  multi_start is the total number of starts;
    the first two are the closed-form link alignments unless disabled.
    """

    curvature_mode: str = ADAPTIVE
    fixed_curvature: float = 2.5e-16
    curvature_safety: float = 2.0
    convergence_threshold: float = 1e-4
    max_outer_iterations: int = 50
    multi_start: int = 3
    include_aligned_starts: bool = True
    max_ratio_iterations: int = 10
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.curvature_mode not in (ADAPTIVE, FIXED):
            raise ValueError(f"unknown curvature_mode: {self.curvature_mode!r}")
        if self.convergence_threshold <= 0.0:
            raise ValueError("convergence_threshold must be positive")
        if self.fixed_curvature <= 0.0:
            raise ValueError("fixed_curvature must be positive")


@dataclass
class MmTrace:
    """Per-iteration diagnostics of one optimization run."""

    objectives: np.ndarray
    converged: bool
    iterations: int
    start_index: int
    start_objectives: list
    start_converged: list
    wall_ms: float = 0.0
    ratio_values: Optional[np.ndarray] = None


@dataclass(frozen=True)
class MinorizerModel:
    """Quadratic model that touches the quartic objective at `anchor` and
    lies below it everywhere on the torus when `curvature` is a valid bound.

    The model value is [u; 1]^H cost_matrix [u; 1] + constant, with
    cost_matrix the arrowhead lift of the damped linearization.
    """

    gradient_matrix: np.ndarray
    cost_matrix: np.ndarray
    curvature: float
    anchor: np.ndarray
    constant: float

    def value(self, u_bar: np.ndarray) -> float:
        m = u_bar.shape[0]
        border = self.cost_matrix[:m, m]
        quad = -0.5 * self.curvature * float(np.real(u_bar.conj() @ u_bar))
        lin = 2.0 * float(np.real(u_bar.conj() @ border))
        return quad + lin + self.constant


def _assemble_minorizer(
    grad_matrix: np.ndarray, anchor_value: float, anchor: np.ndarray, curvature: float
) -> MinorizerModel:
    m = anchor.shape[0]
    border = grad_matrix @ anchor + 0.5 * curvature * anchor
    cost = np.zeros((m + 1, m + 1), dtype=complex)
    cost[:m, :m] = -0.5 * curvature * np.eye(m)
    cost[:m, m] = border
    cost[m, :m] = np.conj(border)
    constant = (
        anchor_value
        - 2.0 * float(np.real(anchor.conj() @ grad_matrix @ anchor))
        - 0.5 * curvature * float(np.real(anchor.conj() @ anchor))
    )
    return MinorizerModel(
        gradient_matrix=grad_matrix,
        cost_matrix=cost,
        curvature=curvature,
        anchor=anchor,
        constant=constant,
    )


def quadratic_minorizer(
    forms: QuadraticForms, anchor: np.ndarray, curvature: float
) -> MinorizerModel:
    """Touching quadratic lower bound of the cascade objective at `anchor`.

    The linearization matrix is the Hermitian
    Q_ct a a^H Q_tr + Q_tr a a^H Q_ct + c_tr Q_ct + c_ct Q_tr, whose product
    with the anchor is the conjugate gradient of the quartic.
    """
    if curvature <= 0.0:
        raise ValueError("curvature must be positive")
    qa = forms.ce_tag_matrix @ anchor
    qb = forms.tag_reader_matrix @ anchor
    grad_matrix = (
        np.outer(qa, np.conj(qb))
        + np.outer(qb, np.conj(qa))
        + forms.tag_reader_const * forms.ce_tag_matrix
        + forms.ce_tag_const * forms.tag_reader_matrix
    )
    return _assemble_minorizer(grad_matrix, forms.objective(anchor), anchor, curvature)


def curvature_bound(forms: QuadraticForms, safety: float = 2.0) -> float:
    """Upper bound on the curvature of the cascade objective over the torus.

    2 * (|Q_ct| |Q_tr| (2N + 2) + c_tr |Q_ct| + c_ct |Q_tr|) * safety, with
    spectral norms; floored at 1e-30 so flat objectives stay well posed.
    """
    norm_ct = float(np.linalg.norm(forms.ce_tag_matrix, 2))
    norm_tr = float(np.linalg.norm(forms.tag_reader_matrix, 2))
    n = forms.dim - 1
    bound = 2.0 * (
        norm_ct * norm_tr * (2 * n + 2)
        + forms.tag_reader_const * norm_ct
        + forms.ce_tag_const * norm_tr
    )
    return max(bound * safety, _CURVATURE_FLOOR)


def aligned_phases_tag_reader(channels: ChannelSet) -> PhaseVector:
    """Closed-form phases making all tag-reader reflector terms add coherently."""
    theta = (
        np.angle(channels.tag_reader)
        + np.angle(channels.reader_irs)
        - np.angle(channels.tag_irs)
    )
    return PhaseVector(theta)


def aligned_phases_ce_tag(channels: ChannelSet) -> PhaseVector:
    """Per-element alignment of the CE-tag cascade onto the direct link.

    Exact maximizer of the CE-tag gain for one CE antenna; a projection
    heuristic otherwise.
    """
    cascade = np.conj(channels.tag_irs)[:, None] * channels.ce_irs
    border = cascade @ np.conj(channels.ce_tag)
    return PhaseVector(np.mod(-np.angle(border), 2.0 * np.pi))


def _start_list(
    channels: ChannelSet,
    config: MmConfig,
    extra_starts: Sequence[PhaseVector],
) -> list[np.ndarray]:
    starts: list[np.ndarray] = []
    if config.include_aligned_starts:
        starts.append(aligned_phases_tag_reader(channels).theta)
        starts.append(aligned_phases_ce_tag(channels).theta)
    starts.extend(np.asarray(p.theta, dtype=float) for p in extra_starts)
    total = max(config.multi_start, len(starts))
    n = channels.n_elements
    fill = 0
    while len(starts) < total:
        rng = np.random.default_rng(_derive_seed(config.seed, 7001, fill))
        starts.append(rng.uniform(0.0, 2.0 * np.pi, n))
        fill += 1
    return starts


def _resolve_curvature(forms: QuadraticForms, config: MmConfig) -> float:
    if config.curvature_mode == FIXED:
        return config.fixed_curvature
    return curvature_bound(forms, config.curvature_safety)


def _mm_ascent(
    forms: QuadraticForms,
    build_model,
    objective,
    theta0: np.ndarray,
    config: MmConfig,
    start_seed: int,
) -> tuple[np.ndarray, list[float], bool]:
    """Generic MM ascent on `objective` with per-iterate models from
    `build_model(anchor)`; returns (final lifted vector, trace, converged).

    The per-iteration candidate list is the randomization winner, the previous
    iterate (ascent safeguard), and torus-projected extrapolations along the
    accepted phase step; the objective trace is monotone by construction.
    """
    u_bar = PhaseVector(theta0).lifted()
    value = objective(u_bar)
    trace = [value]
    converged = False
    for it in range(config.max_outer_iterations):
        model = build_model(u_bar)
        solver_cfg = replace(config.solver, rng_seed=_derive_seed(start_seed, it, 0))
        # The arrowhead cost of the lifted quadratic model is maximized by a
        # rank-one point aligned with its border; seeding the factorization
        # there lets the solver certify optimality without a cold search.
        border = model.cost_matrix[:-1, -1]
        mag = np.abs(border)
        warm = np.concatenate(
            [np.where(mag > 0.0, border / np.where(mag > 0.0, mag, 1.0), 1.0 + 0.0j), [1.0 + 0.0j]]
        )[:, None]
        sol = solve_diag_sdp(SdpProblem(model.cost_matrix), solver_cfg, initial_factor=warm)
        cand = gaussian_randomize(
            sol,
            model.cost_matrix,
            config.solver.randomization_count,
            _derive_seed(start_seed, it, 1),
        )
        prev = np.concatenate([u_bar, [1.0 + 0.0j]])
        quad = lambda vec: float(np.real(vec.conj() @ model.cost_matrix @ vec))
        chosen = cand if quad(cand) > quad(prev) else prev
        u_new = chosen[:-1]
        new_value = objective(u_new)
        step = np.angle(u_new * np.conj(u_bar))
        factor = 2.0
        while factor <= 2.0**20:
            u_try = u_bar * np.exp(1j * factor * step)
            val_try = objective(u_try)
            if val_try <= new_value:
                break
            u_new, new_value = u_try, val_try
            factor *= 2.0
        if new_value < value:
            u_new, new_value = u_bar, value
        trace.append(new_value)
        done = abs(new_value - value) <= config.convergence_threshold * max(abs(value), _TINY)
        u_bar, value = u_new, new_value
        if done:
            converged = True
            break
    return u_bar, trace, converged


def optimize_phases(
    channels: ChannelSet,
    config: MmConfig = MmConfig(),
    extra_starts: Sequence[PhaseVector] = (),
) -> tuple[PhaseVector, MmTrace]:
    """Maximize the squared cascade gain over the reflector phases.

    Runs the MM/SDR loop from each start (link alignments, callers' extras,
    then seeded random fills) and keeps the best final objective.
    """
    t0 = time.perf_counter()
    forms = QuadraticForms.from_channels(channels)
    curvature = _resolve_curvature(forms, config)
    build = lambda anchor: quadratic_minorizer(forms, anchor, curvature)

    best = None
    traces, flags = [], []
    for idx, theta0 in enumerate(_start_list(channels, config, extra_starts)):
        u_bar, trace, converged = _mm_ascent(
            forms, build, forms.objective, theta0, config, _derive_seed(config.seed, idx)
        )
        traces.append(trace)
        flags.append(converged)
        if best is None or trace[-1] > best[2]:
            best = (idx, u_bar, trace[-1])
    idx, u_bar, _ = best
    phases = PhaseVector.from_lifted(u_bar)
    trace = MmTrace(
        objectives=np.asarray(traces[idx]),
        converged=flags[idx],
        iterations=len(traces[idx]) - 1,
        start_index=idx,
        start_objectives=traces,
        start_converged=flags,
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )
    return phases, trace


def optimize_phases_ratio(
    channels: ChannelSet,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
    config: MmConfig = MmConfig(),
    extra_starts: Sequence[PhaseVector] = (),
) -> tuple[PhaseVector, MmTrace]:
    """Dinkelbach loop for the circuit-constrained minimum-power objective.

    Maximizes the ratio of the squared cascade gain to the circuit-adjusted
    noise term; the inner difference problems reuse the MM machinery with the
    linearization shifted by the ratio-weighted tag-reader form and the
    curvature enlarged to cover it.  One full inner MM convergence is run per
    ratio update, at most max_ratio_iterations times; the ratio sequence is
    nondecreasing because each inner solve warm-starts at the previous point.
    """
    if tag.circuit_power <= 0.0:
        raise ValueError("ratio objective requires circuit_power > 0; use optimize_phases")
    if tag.harvest_efficiency <= 0.0:
        raise ValueError("harvest_efficiency must be positive with circuit power")
    t0 = time.perf_counter()
    forms = QuadraticForms.from_channels(channels)
    base_curvature = _resolve_curvature(forms, config)
    norm_tr = float(np.linalg.norm(forms.tag_reader_matrix, 2))
    b2 = tag.reflection_magnitude**2
    drain = tag.circuit_power / tag.harvest_efficiency
    noise_term = snr_target * noise_power

    def numerator(u_bar: np.ndarray) -> float:
        return b2 * forms.objective(u_bar)

    def denominator(u_bar: np.ndarray) -> float:
        return noise_term + drain * b2 * forms.tag_reader_gain(u_bar)

    best = None
    all_ratio_traces, all_flags = [], []
    for idx, theta0 in enumerate(_start_list(channels, config, extra_starts)):
        u_bar = PhaseVector(theta0).lifted()
        ratio = numerator(u_bar) / denominator(u_bar)
        ratios = [ratio]
        converged = False
        for outer in range(config.max_ratio_iterations):
            weight = ratio * drain

            def difference(u: np.ndarray) -> float:
                return forms.objective(u) - weight * forms.tag_reader_gain(u)

            def build(anchor: np.ndarray) -> MinorizerModel:
                model = quadratic_minorizer(forms, anchor, base_curvature)
                shifted = model.gradient_matrix - weight * forms.tag_reader_matrix
                return _assemble_minorizer(
                    shifted,
                    difference(anchor),
                    anchor,
                    base_curvature + 2.0 * weight * norm_tr,
                )

            u_bar, _, _ = _mm_ascent(
                forms,
                build,
                difference,
                PhaseVector.from_lifted(u_bar).theta,
                config,
                _derive_seed(config.seed, idx, outer),
            )
            new_ratio = numerator(u_bar) / denominator(u_bar)
            ratios.append(new_ratio)
            gain = new_ratio - ratio
            ratio = max(new_ratio, ratio)
            if gain <= config.convergence_threshold * max(1.0, ratio):
                converged = True
                break
        all_ratio_traces.append(ratios)
        all_flags.append(converged)
        if best is None or ratio > best[2]:
            best = (idx, u_bar, ratio)
    idx, u_bar, _ = best
    phases = PhaseVector.from_lifted(u_bar)
    trace = MmTrace(
        objectives=np.asarray([numerator(u_bar) / b2]),
        converged=all_flags[idx],
        iterations=len(all_ratio_traces[idx]) - 1,
        start_index=idx,
        start_objectives=all_ratio_traces,
        start_converged=all_flags,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        ratio_values=np.asarray(all_ratio_traces[idx]),
    )
    return phases, trace
