"""Benchmark schemes and independent oracles used for validation.

The schemes mirror the comparison curves of the experiments: no reflector,
random phases, and single-link alignments.  The oracles (exhaustive grid
search, finite-difference gradient check) are deliberately independent of the
optimizer's own code paths.
"""

from dataclasses import replace
from typing import Optional

import numpy as np

from .geometry import ChannelSet
from .mm import aligned_phases_ce_tag, aligned_phases_tag_reader, quadratic_minorizer
from .power import InfeasibleError
from .sdp import SdpProblem, SolverConfig, gaussian_randomize, solve_diag_sdp
from .signal_model import (
    PhaseVector,
    QuadraticForms,
    TagParams,
    ce_tag_quadratic,
    composite_links,
)

SCHEME_IDS = ("mm_sdr", "no_irs", "random_phases", "align_cit", "align_tir", "grid_oracle")

GRID_BUDGET = 10_000_000


class GridBudgetError(RuntimeError):
    """Exhaustive enumeration would exceed the configured evaluation budget."""


def power_for_phases(
    channels: ChannelSet,
    phases: PhaseVector,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
) -> float:
    """Transmit power meeting the SNR target with equality at fixed phases
    (semipassive tag, full reflection, MRT beamforming)."""
    gain = composite_links(channels, phases).cascade_gain()
    if gain == 0.0:
        raise InfeasibleError("composite cascade gain is zero")
    return snr_target * noise_power / (tag.reflection_magnitude**2 * gain)


def no_irs_power(
    channels: ChannelSet, tag: TagParams, snr_target: float, noise_power: float
) -> float:
    """Benchmark power using the direct links only."""
    direct = float(abs(channels.tag_reader) ** 2 * np.linalg.norm(channels.ce_tag) ** 2)
    if direct == 0.0:
        raise InfeasibleError("direct links are dead; no-reflector system infeasible")
    return snr_target * noise_power / (tag.reflection_magnitude**2 * direct)


def random_phase_power(
    channels: ChannelSet,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
    seed: int,
) -> float:
    """Benchmark power with one seeded uniform draw of the reflector phases."""
    rng = np.random.default_rng(seed)
    phases = PhaseVector(rng.uniform(0.0, 2.0 * np.pi, channels.n_elements))
    return power_for_phases(channels, phases, tag, snr_target, noise_power)


def align_single_link(
    channels: ChannelSet,
    which: str,
    config: Optional[SolverConfig] = None,
    seed: int = 0,
) -> PhaseVector:
    """Phases maximizing the strength of one composite link only.

    'tir' (tag-reader) has the closed-form per-element alignment.  'cit'
    (CE-tag) is a vector-norm objective with no closed form for multiple CE
    antennas; it is solved by one SDP relaxation plus randomization.
    """
    if which == "tir":
        return aligned_phases_tag_reader(channels)
    if which != "cit":
        raise ValueError(f"unknown link selector: {which!r}")
    cfg = config or SolverConfig()
    q_ct, _ = ce_tag_quadratic(channels)
    sol = solve_diag_sdp(SdpProblem(q_ct), replace(cfg, rng_seed=seed))
    lifted = gaussian_randomize(sol, q_ct, cfg.randomization_count, seed + 1)
    return PhaseVector.from_lifted(lifted)


def grid_search_oracle(
    channels: ChannelSet,
    tag: TagParams,
    levels: int,
    snr_target: float,
    noise_power: float,
) -> tuple[PhaseVector, float]:
    """Exhaustive search of the cascade objective over a uniform phase grid.

    Enumerates theta_n in {2 pi k / levels} and returns the best objective
    value and its phases (first hit wins ties).  Guarded by a total budget of
    1e7 evaluations.
    """
    n = channels.n_elements
    total = levels**n
    if total > GRID_BUDGET:
        raise GridBudgetError(f"{levels}^{n} = {total} points exceeds budget {GRID_BUDGET}")
    forms = QuadraticForms.from_channels(channels)
    grid = 2.0 * np.pi * np.arange(levels) / levels
    thetas = np.stack(np.meshgrid(*([grid] * n), indexing="ij"), axis=-1).reshape(-1, n)

    best_val = -np.inf
    best_idx = 0
    chunk = 65536
    for lo in range(0, total, chunk):
        block = thetas[lo : lo + chunk]
        u = np.exp(-1j * block)
        u_bar = np.concatenate([u, np.ones((block.shape[0], 1))], axis=1)
        ct = np.einsum("pi,ij,pj->p", u_bar.conj(), forms.ce_tag_matrix, u_bar).real
        tr = np.einsum("pi,ij,pj->p", u_bar.conj(), forms.tag_reader_matrix, u_bar).real
        vals = (ct + forms.ce_tag_const) * (tr + forms.tag_reader_const)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_idx = lo + k
    return PhaseVector(thetas[best_idx]), best_val


def finite_diff_gradient_check(
    q_ct: np.ndarray,
    q_tr: np.ndarray,
    c_ct: float,
    c_tr: float,
    anchor: np.ndarray,
    step: float,
    n_directions: int = 100,
    seed: int = 0,
) -> float:
    """Worst relative error of the linearization slope vs central differences.

    Compares Re{(2 T a)^H d} against (F(a + s d) - F(a - s d)) / (2 s) along
    random unit directions d; validates the gradient surrogate used by the
    minorizer.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    forms = QuadraticForms(q_ct, q_tr, c_ct, c_tr)
    grad = 2.0 * (quadratic_minorizer(forms, anchor, 1.0).gradient_matrix @ anchor)
    rng = np.random.default_rng(seed)
    worst = 0.0
    m = anchor.shape[0]
    for _ in range(n_directions):
        d = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        d /= np.linalg.norm(d)
        predicted = float(np.real(grad.conj() @ d))
        fwd = forms.objective(anchor + step * d)
        bwd = forms.objective(anchor - step * d)
        fd = (fwd - bwd) / (2.0 * step)
        denom = max(abs(fd), abs(predicted), 1e-300)
        worst = max(worst, abs(fd - predicted) / denom)
    return worst
