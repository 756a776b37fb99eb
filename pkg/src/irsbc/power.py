"""Closed-form layers around the phase optimizer.

Given reflector phases, the remaining variables of the power-minimization
problem have closed forms: maximum-ratio transmission for the beamformer, an
explicit optimum for the tag's power-splitting coefficient (both constraints
tight), and the resulting minimum transmit power.  This module also hosts the
regime shortcuts for circuit-limited / noise-limited operation and the
monostatic special case.
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .geometry import MONOSTATIC, ChannelSet
from .mm import (
    MmConfig,
    MmTrace,
    aligned_phases_tag_reader,
    optimize_phases,
    optimize_phases_ratio,
    _derive_seed,
)
from .sdp import SdpProblem, gaussian_randomize, solve_diag_sdp
from .signal_model import (
    CompositeLinks,
    PhaseVector,
    TagParams,
    ce_tag_quadratic,
    composite_links,
)

NO_CIRCUIT = "no_circuit"
DINKELBACH = "dinkelbach"
CIRCUIT_LIMITED = "circuit_limited"
NOISE_LIMITED = "noise_limited"
MONOSTATIC_REGIME = "monostatic"

CIRCUIT_LIMITED_THRESHOLD = 100.0
NOISE_LIMITED_THRESHOLD = 0.01


class InfeasibleError(ValueError):
    """The instance admits no finite-power solution (dead composite link)."""


@dataclass
class SolverSolution:
    """Joint design point: beamformer, phases, split, and transmit power.

    ||weights||^2 equals transmit_power; with circuit power both the SNR and
    harvest constraints are tight.  Infeasible instances are returned with
    feasible=False and infinite power rather than raised, so sweeps can
    record gaps.
    """

    weights: np.ndarray
    phases: PhaseVector
    power_split: float
    transmit_power: float
    regime: str
    diagnostics: Optional[MmTrace] = None
    feasible: bool = True


def mrt_beamformer(links: CompositeLinks, power: float) -> np.ndarray:
    """Maximum-ratio transmission along the composite cascade, norm sqrt(P)."""
    if power < 0.0:
        raise ValueError("power must be >= 0")
    row = links.tag_reader * links.ce_tag
    norm = np.linalg.norm(row)
    if norm == 0.0:
        raise InfeasibleError("composite cascade gain is zero; no beam direction")
    return np.sqrt(power) * np.conj(row) / norm


def _infeasible(phases: PhaseVector, n_antennas: int, regime: str,
                diagnostics: Optional[MmTrace] = None) -> SolverSolution:
    return SolverSolution(
        weights=np.zeros(n_antennas, dtype=complex),
        phases=phases,
        power_split=1.0,
        transmit_power=np.inf,
        regime=regime,
        diagnostics=diagnostics,
        feasible=False,
    )


def min_power_no_circuit(
    channels: ChannelSet,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
    config: MmConfig = MmConfig(),
    extra_starts: Sequence[PhaseVector] = (),
) -> SolverSolution:
    """Minimum transmit power for a semipassive tag (no circuit constraint).

    Phases from the MM optimizer, full reflection (split 1), MRT beamformer;
    the SNR constraint is met with equality.
    """
    if tag.circuit_power != 0.0:
        raise ValueError("tag has circuit power; use the circuit-aware paths")
    phases, trace = optimize_phases(channels, config, extra_starts)
    links = composite_links(channels, phases)
    gain = links.cascade_gain()
    if gain == 0.0:
        return _infeasible(phases, channels.n_antennas, NO_CIRCUIT, trace)
    power = snr_target * noise_power / (tag.reflection_magnitude**2 * gain)
    return SolverSolution(
        weights=mrt_beamformer(links, power),
        phases=phases,
        power_split=1.0,
        transmit_power=power,
        regime=NO_CIRCUIT,
        diagnostics=trace,
    )


def optimal_power_split(
    channels: ChannelSet,
    phases: PhaseVector,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
) -> float:
    """Power-splitting coefficient equating the SNR- and circuit-implied powers.

    As the split grows the SNR-implied power falls while the harvest-implied
    power rises; the optimum sits where the two branches meet.
    """
    if tag.circuit_power <= 0.0:
        raise ValueError("power split optimization requires circuit_power > 0")
    if tag.harvest_efficiency <= 0.0:
        raise ValueError("harvest_efficiency must be positive")
    links = composite_links(channels, phases)
    ce_gain = float(np.linalg.norm(links.ce_tag) ** 2)
    if ce_gain == 0.0:
        raise InfeasibleError("CE-tag composite gain is zero; cannot power the tag")
    eta, xi, b2 = tag.harvest_efficiency, tag.circuit_power, tag.reflection_magnitude**2
    snr_side = eta * snr_target * noise_power * ce_gain
    return snr_side / (xi * b2 * links.cascade_gain() + snr_side)


def min_power_with_circuit(
    channels: ChannelSet,
    phases: PhaseVector,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
) -> float:
    """Minimum transmit power at the optimal split for fixed phases.

    Equals either branch of the two-constraint power expression evaluated at
    the optimal splitting coefficient.
    """
    if tag.circuit_power <= 0.0:
        raise ValueError("use the no-circuit power expression when circuit_power == 0")
    links = composite_links(channels, phases)
    cascade = links.cascade_gain()
    if cascade == 0.0:
        raise InfeasibleError("composite cascade gain is zero")
    b2 = tag.reflection_magnitude**2
    drain = tag.circuit_power / tag.harvest_efficiency
    reader_gain = abs(links.tag_reader) ** 2
    return (snr_target * noise_power + drain * b2 * reader_gain) / (b2 * cascade)


def regime_indicator(
    channels: ChannelSet,
    phases: PhaseVector,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
) -> float:
    """Ratio of the circuit-driven term to the noise term; >> 1 means the
    circuit constraint dominates, << 1 means noise does."""
    links = composite_links(channels, phases)
    drain = tag.circuit_power / tag.harvest_efficiency
    b2 = tag.reflection_magnitude**2
    return drain * b2 * abs(links.tag_reader) ** 2 / (snr_target * noise_power)


def _circuit_solution(
    channels: ChannelSet,
    phases: PhaseVector,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
    regime: str,
    diagnostics: Optional[MmTrace],
) -> SolverSolution:
    try:
        split = optimal_power_split(channels, phases, tag, snr_target, noise_power)
        power = min_power_with_circuit(channels, phases, tag, snr_target, noise_power)
        weights = mrt_beamformer(composite_links(channels, phases), power)
    except InfeasibleError:
        return _infeasible(phases, channels.n_antennas, regime, diagnostics)
    return SolverSolution(
        weights=weights,
        phases=phases,
        power_split=split,
        transmit_power=power,
        regime=regime,
        diagnostics=diagnostics,
        feasible=True,
    )


def solve_circuit_limited(
    channels: ChannelSet,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
    config: MmConfig = MmConfig(),
) -> SolverSolution:
    """Circuit-limited shortcut: phases maximize the CE-tag gain alone.

    That objective is quadratic, so a single SDP relaxation plus
    randomization suffices; the split and power then follow in closed form.
    """
    if tag.circuit_power <= 0.0:
        raise ValueError("circuit-limited regime requires circuit_power > 0")
    q_ct, _ = ce_tag_quadratic(channels)
    solver_cfg = replace(config.solver, rng_seed=_derive_seed(config.seed, 4000))
    sol = solve_diag_sdp(SdpProblem(q_ct), solver_cfg)
    lifted = gaussian_randomize(
        sol, q_ct, config.solver.randomization_count, _derive_seed(config.seed, 4001)
    )
    phases = PhaseVector.from_lifted(lifted)
    return _circuit_solution(
        channels, phases, tag, snr_target, noise_power, CIRCUIT_LIMITED, None
    )


def solve_noise_limited(
    channels: ChannelSet,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
    config: MmConfig = MmConfig(),
    extra_starts: Sequence[PhaseVector] = (),
) -> SolverSolution:
    """Noise-limited shortcut: phases from the unconstrained cascade problem."""
    if tag.circuit_power <= 0.0:
        raise ValueError("noise-limited regime requires circuit_power > 0")
    phases, trace = optimize_phases(channels, config, extra_starts)
    return _circuit_solution(
        channels, phases, tag, snr_target, noise_power, NOISE_LIMITED, trace
    )


def solve_dinkelbach(
    channels: ChannelSet,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
    config: MmConfig = MmConfig(),
    extra_starts: Sequence[PhaseVector] = (),
) -> SolverSolution:
    """Full fractional-programming solution of the circuit-constrained problem."""
    phases, trace = optimize_phases_ratio(
        channels, tag, snr_target, noise_power, config, extra_starts
    )
    return _circuit_solution(
        channels, phases, tag, snr_target, noise_power, DINKELBACH, trace
    )


def solve_monostatic(
    channels: ChannelSet,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
) -> SolverSolution:
    """Closed-form optimum for the reciprocal single-antenna architecture.

    Each reflector phase cancels its element's round-trip phase offset, so
    the composite tag-reader gain is the coherent magnitude sum; the power
    follows from the fourth power of that gain.
    """
    if channels.architecture != MONOSTATIC:
        raise ValueError("solve_monostatic requires a monostatic channel set")
    if tag.circuit_power != 0.0:
        raise ValueError("monostatic closed form assumes a semipassive tag")
    phases = aligned_phases_tag_reader(channels)
    links = composite_links(channels, phases)
    reader_gain = abs(links.tag_reader) ** 2
    if reader_gain == 0.0:
        return _infeasible(phases, channels.n_antennas, MONOSTATIC_REGIME)
    power = snr_target * noise_power / (tag.reflection_magnitude**2 * reader_gain**2)
    return SolverSolution(
        weights=mrt_beamformer(links, power),
        phases=phases,
        power_split=1.0,
        transmit_power=power,
        regime=MONOSTATIC_REGIME,
        diagnostics=None,
    )


def solve(
    channels: ChannelSet,
    tag: TagParams,
    snr_target: float,
    noise_power: float,
    config: MmConfig = MmConfig(),
    regime: str = "auto",
    circuit_threshold: float = CIRCUIT_LIMITED_THRESHOLD,
    noise_threshold: float = NOISE_LIMITED_THRESHOLD,
) -> SolverSolution:
    """Dispatch to the right solution path.

    Semipassive tags use the unconstrained path (monostatic channel sets get
    the closed form).  With circuit power, 'auto' probes the regime indicator
    at the tag-reader alignment and picks the circuit-limited shortcut
    (indicator >= circuit_threshold), the noise-limited shortcut
    (<= noise_threshold), or the full Dinkelbach loop in between.
    """
    if tag.circuit_power == 0.0:
        if channels.architecture == MONOSTATIC:
            return solve_monostatic(channels, tag, snr_target, noise_power)
        return min_power_no_circuit(channels, tag, snr_target, noise_power, config)
    if regime == "auto":
        probe = aligned_phases_tag_reader(channels)
        indicator = regime_indicator(channels, probe, tag, snr_target, noise_power)
        if indicator >= circuit_threshold:
            regime = CIRCUIT_LIMITED
        elif indicator <= noise_threshold:
            regime = NOISE_LIMITED
        else:
            regime = DINKELBACH
    if regime == CIRCUIT_LIMITED:
        return solve_circuit_limited(channels, tag, snr_target, noise_power, config)
    if regime == NOISE_LIMITED:
        return solve_noise_limited(channels, tag, snr_target, noise_power, config)
    if regime == DINKELBACH:
        return solve_dinkelbach(channels, tag, snr_target, noise_power, config)
    raise ValueError(f"unknown regime: {regime!r}")
