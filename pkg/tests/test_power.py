import numpy as np
import pytest

from irsbc import (
    InfeasibleError,
    MmConfig,
    PhaseVector,
    TagParams,
    composite_links,
    grid_search_oracle,
    harvested_power,
    min_power_no_circuit,
    min_power_with_circuit,
    mrt_beamformer,
    optimal_power_split,
    received_snr,
    regime_indicator,
    solve,
    solve_circuit_limited,
    solve_dinkelbach,
    solve_monostatic,
    solve_noise_limited,
    synthesize_channels,
)
from irsbc.geometry import ChannelSet, PathLossModel
from irsbc.signal_model import QuadraticForms, ce_tag_quadratic

from conftest import (
    NOISE_POWER,
    SNR_TARGET,
    bistatic_layout,
    monostatic_layout,
    toy_channels,
)


class TestMrtBeamformer:
    def test_scalar_case(self):
        rng = np.random.default_rng(0)
        ch = toy_channels(3, 1, rng)
        links = composite_links(ch, PhaseVector(rng.uniform(0, 2 * np.pi, 3)))
        w = mrt_beamformer(links, 4.0)
        assert abs(w[0]) ** 2 == pytest.approx(4.0, rel=1e-12)

    def test_norm_equals_power(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            ch = toy_channels(4, 3, rng)
            links = composite_links(ch, PhaseVector(rng.uniform(0, 2 * np.pi, 4)))
            p = float(rng.uniform(0.1, 10.0))
            w = mrt_beamformer(links, p)
            assert np.linalg.norm(w) ** 2 == pytest.approx(p, rel=1e-12)

    def test_cauchy_schwarz_optimality(self):
        rng = np.random.default_rng(2)
        ch = toy_channels(4, 3, rng)
        links = composite_links(ch, PhaseVector(rng.uniform(0, 2 * np.pi, 4)))
        w = mrt_beamformer(links, 1.0)
        row = links.tag_reader * links.ce_tag
        best = abs(row @ w) ** 2
        for _ in range(1000):
            other = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            other /= np.linalg.norm(other)
            assert abs(row @ other) ** 2 <= best * (1 + 1e-12)

    def test_dead_cascade_raises(self):
        rng = np.random.default_rng(3)
        ch = toy_channels(2, 2, rng)
        dead = composite_links(ch, PhaseVector(np.zeros(2)))
        dead = type(dead)(ce_tag=np.zeros(2, dtype=complex), tag_reader=0.0 + 0.0j)
        with pytest.raises(InfeasibleError):
            mrt_beamformer(dead, 1.0)


class TestMinPowerNoCircuit:
    def test_snr_met_with_equality(self, model):
        layout = bistatic_layout(n_elements=8)
        ch = synthesize_channels(layout, model, 4)
        sol = min_power_no_circuit(ch, TagParams(), SNR_TARGET, NOISE_POWER, MmConfig(seed=1))
        links = composite_links(ch, sol.phases)
        snr = received_snr(links, sol.weights, TagParams(), NOISE_POWER)
        assert snr == pytest.approx(SNR_TARGET, rel=1e-8)
        assert np.linalg.norm(sol.weights) ** 2 == pytest.approx(
            sol.transmit_power, rel=1e-10
        )
        assert sol.power_split == 1.0
        assert sol.regime == "no_circuit"

    def test_power_linear_in_noise(self, model):
        layout = bistatic_layout(n_elements=4)
        ch = synthesize_channels(layout, model, 5)
        cfg = MmConfig(seed=2)
        p1 = min_power_no_circuit(ch, TagParams(), SNR_TARGET, NOISE_POWER, cfg).transmit_power
        p2 = min_power_no_circuit(ch, TagParams(), SNR_TARGET, 2 * NOISE_POWER, cfg).transmit_power
        assert p2 == pytest.approx(2.0 * p1, rel=1e-9)

    def test_dead_reflector_reduces_to_direct_formula(self):
        rng = np.random.default_rng(6)
        ch = toy_channels(4, 2, rng).without_irs()
        sol = min_power_no_circuit(ch, TagParams(), 6.3, 1e-2, MmConfig(seed=3))
        expected = 6.3 * 1e-2 / (
            abs(ch.tag_reader) ** 2 * np.linalg.norm(ch.ce_tag) ** 2
        )
        assert sol.transmit_power == pytest.approx(expected, rel=1e-12)

    def test_rejects_circuit_tag(self):
        rng = np.random.default_rng(7)
        ch = toy_channels(3, 2, rng)
        with pytest.raises(ValueError):
            min_power_no_circuit(ch, TagParams(circuit_power=0.1), 6.3, 1e-2)

    def test_infeasible_typed_result(self):
        dead = ChannelSet(
            ce_tag=np.zeros(2, dtype=complex),
            ce_irs=np.zeros((3, 2), dtype=complex),
            ce_reader=np.zeros(2, dtype=complex),
            tag_irs=np.zeros(3, dtype=complex),
            reader_irs=np.zeros(3, dtype=complex),
            tag_reader=0.0 + 0.0j,
        )
        sol = min_power_no_circuit(dead, TagParams(), 6.3, 1e-2, MmConfig(seed=4))
        assert not sol.feasible
        assert np.isinf(sol.transmit_power)


class TestPowerSplit:
    def make(self, seed=8):
        rng = np.random.default_rng(seed)
        ch = toy_channels(5, 3, rng)
        phases = PhaseVector(rng.uniform(0, 2 * np.pi, 5))
        tag = TagParams(reflection_magnitude=0.85, circuit_power=0.3, harvest_efficiency=0.75)
        return ch, phases, tag

    def test_small_circuit_power_pushes_split_to_one(self):
        ch, phases, _ = self.make()
        tag = TagParams(circuit_power=1e-12, harvest_efficiency=1.0)
        split = optimal_power_split(ch, phases, tag, 6.3, 1e-2)
        assert split == pytest.approx(1.0, abs=1e-8)

    def test_branches_equal_at_optimum(self):
        ch, phases, tag = self.make()
        gamma, sigma2 = 6.3, 1e-2
        split = optimal_power_split(ch, phases, tag, gamma, sigma2)
        links = composite_links(ch, phases)
        b2 = tag.reflection_magnitude**2
        snr_branch = gamma * sigma2 / (split * b2 * links.cascade_gain())
        harvest_branch = tag.circuit_power / (
            tag.harvest_efficiency * (1 - split) * np.linalg.norm(links.ce_tag) ** 2
        )
        assert snr_branch == pytest.approx(harvest_branch, rel=1e-12)

    def test_split_interior(self):
        for seed in range(10):
            ch, phases, tag = self.make(seed)
            split = optimal_power_split(ch, phases, tag, 6.3, 1e-2)
            assert 0.0 < split < 1.0

    def test_power_equals_both_branches(self):
        ch, phases, tag = self.make()
        gamma, sigma2 = 6.3, 1e-2
        split = optimal_power_split(ch, phases, tag, gamma, sigma2)
        p = min_power_with_circuit(ch, phases, tag, gamma, sigma2)
        links = composite_links(ch, phases)
        b2 = tag.reflection_magnitude**2
        snr_branch = gamma * sigma2 / (split * b2 * links.cascade_gain())
        assert p == pytest.approx(snr_branch, rel=1e-12)

    def test_circuit_power_zero_limit_matches_no_circuit_formula(self):
        ch, phases, _ = self.make()
        gamma, sigma2 = 6.3, 1e-2
        tag = TagParams(circuit_power=1e-15, harvest_efficiency=1.0)
        p = min_power_with_circuit(ch, phases, tag, gamma, sigma2)
        links = composite_links(ch, phases)
        expected = gamma * sigma2 / links.cascade_gain()
        assert p == pytest.approx(expected, rel=1e-6)

    def test_constraints_tight_at_design_point(self):
        ch, phases, tag = self.make()
        gamma, sigma2 = 6.3, 1e-2
        split = optimal_power_split(ch, phases, tag, gamma, sigma2)
        p = min_power_with_circuit(ch, phases, tag, gamma, sigma2)
        links = composite_links(ch, phases)
        w = mrt_beamformer(links, p)
        design = TagParams(
            reflection_magnitude=tag.reflection_magnitude,
            power_split=split,
            circuit_power=tag.circuit_power,
            harvest_efficiency=tag.harvest_efficiency,
        )
        assert received_snr(links, w, design, sigma2) == pytest.approx(gamma, rel=1e-8)
        assert harvested_power(links, w, design) == pytest.approx(
            tag.circuit_power, rel=1e-8
        )


class TestRegimeShortcuts:
    def test_circuit_limited_single_element_grid(self, model):
        layout = bistatic_layout(n_elements=1, l_antennas=3)
        ch = synthesize_channels(layout, model, 11)
        tag = TagParams(circuit_power=1e-6, harvest_efficiency=0.5)
        sol = solve_circuit_limited(ch, tag, SNR_TARGET, NOISE_POWER, MmConfig(seed=5))
        links = composite_links(ch, sol.phases)
        got = np.linalg.norm(links.ce_tag) ** 2
        q, c = ce_tag_quadratic(ch)
        best = max(
            float(
                np.real(u.conj() @ q @ u) + c
            )
            for u in (
                np.concatenate([np.exp(-1j * np.array([t])), [1.0 + 0j]])
                for t in 2 * np.pi * np.arange(3600) / 3600
            )
        )
        assert got >= best * (1 - 1e-6)

    def test_circuit_limited_not_better_than_dinkelbach(self):
        rng = np.random.default_rng(12)
        ch = toy_channels(4, 2, rng)
        tag = TagParams(circuit_power=2.0, harvest_efficiency=0.9)
        gamma, sigma2 = 6.3, 1e-4
        short = solve_circuit_limited(ch, tag, gamma, sigma2, MmConfig(seed=6))
        full = solve_dinkelbach(
            ch, tag, gamma, sigma2, MmConfig(seed=6), extra_starts=[short.phases]
        )
        assert short.transmit_power >= full.transmit_power - 1e-6

    def test_noise_limited_close_to_dinkelbach(self):
        rng = np.random.default_rng(13)
        ch = toy_channels(4, 2, rng)
        gamma, sigma2 = 6.3, 1e-2
        # scale circuit power for a ~1e-6 regime indicator
        probe = composite_links(ch, PhaseVector(np.zeros(4)))
        xi = 1e-6 * gamma * sigma2 / abs(probe.tag_reader) ** 2
        tag = TagParams(circuit_power=xi, harvest_efficiency=1.0)
        short = solve_noise_limited(ch, tag, gamma, sigma2, MmConfig(seed=7))
        full = solve_dinkelbach(
            ch, tag, gamma, sigma2, MmConfig(seed=7), extra_starts=[short.phases]
        )
        assert short.transmit_power == pytest.approx(full.transmit_power, rel=1e-3)
        assert short.power_split < 1.0

    def test_regime_dispatch(self):
        rng = np.random.default_rng(14)
        ch = toy_channels(3, 2, rng)
        gamma, sigma2 = 6.3, 1e-3
        cfg = MmConfig(seed=8)
        big = TagParams(circuit_power=50.0, harvest_efficiency=0.5)
        assert solve(ch, big, gamma, sigma2, cfg).regime == "circuit_limited"
        tiny = TagParams(circuit_power=1e-9, harvest_efficiency=0.5)
        assert solve(ch, tiny, gamma, sigma2, cfg).regime == "noise_limited"
        mid_indicator = regime_indicator(
            ch, PhaseVector(np.zeros(3)), TagParams(circuit_power=1.0), gamma, sigma2
        )
        mid_xi = 1.0 / mid_indicator  # rescale to indicator ~ 1
        mid = TagParams(circuit_power=mid_xi, harvest_efficiency=1.0)
        assert solve(ch, mid, gamma, sigma2, cfg).regime == "dinkelbach"
        assert solve(ch, TagParams(), gamma, sigma2, cfg).regime == "no_circuit"

    def test_forced_regime(self):
        rng = np.random.default_rng(15)
        ch = toy_channels(3, 2, rng)
        tag = TagParams(circuit_power=0.5)
        sol = solve(ch, tag, 6.3, 1e-2, MmConfig(seed=9), regime="circuit_limited")
        assert sol.regime == "circuit_limited"


class TestMonostatic:
    def test_zero_phase_channels_give_zero_shifts(self):
        n = 4
        ch = ChannelSet(
            ce_tag=np.ones(1, dtype=complex),
            ce_irs=np.ones((n, 1), dtype=complex),
            ce_reader=np.zeros(1, dtype=complex),
            tag_irs=np.ones(n, dtype=complex) * 0.5,
            reader_irs=np.ones(n, dtype=complex) * 0.25,
            tag_reader=1.0 + 0.0j,
            architecture="monostatic",
        )
        sol = solve_monostatic(ch, TagParams(), 6.3, 1e-2)
        np.testing.assert_allclose(sol.phases.theta, 0.0, atol=1e-12)

    def test_coherent_sum_and_plugback(self, model):
        for n in (4, 16):
            layout = monostatic_layout(n_elements=n)
            ch = synthesize_channels(layout, model, 16 + n)
            sol = solve_monostatic(ch, TagParams(), SNR_TARGET, NOISE_POWER)
            links = composite_links(ch, sol.phases)
            coherent = float(
                np.sum(np.abs(ch.reader_irs) * np.abs(ch.tag_irs)) + abs(ch.tag_reader)
            )
            assert abs(links.tag_reader) == pytest.approx(coherent, rel=1e-12)
            expected_p = SNR_TARGET * NOISE_POWER / coherent**4
            assert sol.transmit_power == pytest.approx(expected_p, rel=1e-12)
            snr = received_snr(links, sol.weights, TagParams(), NOISE_POWER)
            assert snr == pytest.approx(SNR_TARGET, rel=1e-8)

    def test_dominates_random_phases(self, model):
        layout = monostatic_layout(n_elements=8)
        ch = synthesize_channels(layout, model, 17)
        sol = solve_monostatic(ch, TagParams(), SNR_TARGET, NOISE_POWER)
        best = abs(composite_links(ch, sol.phases).tag_reader) ** 2
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            pv = PhaseVector(rng.uniform(0, 2 * np.pi, 8))
            assert abs(composite_links(ch, pv).tag_reader) ** 2 <= best * (1 + 1e-12)

    def test_scale_invariant_shifts(self, model):
        layout = monostatic_layout(n_elements=6)
        ch = synthesize_channels(layout, model, 18)
        scaled = ChannelSet(
            ce_tag=3.0 * ch.ce_tag,
            ce_irs=3.0 * ch.ce_irs,
            ce_reader=3.0 * ch.ce_reader,
            tag_irs=3.0 * ch.tag_irs,
            reader_irs=3.0 * ch.reader_irs,
            tag_reader=3.0 * ch.tag_reader,
            architecture="monostatic",
        )
        a = solve_monostatic(ch, TagParams(), 6.3, 1e-2)
        b = solve_monostatic(scaled, TagParams(), 6.3, 1e-2)
        np.testing.assert_allclose(a.phases.theta, b.phases.theta, atol=1e-12)

    def test_rejects_bistatic_set(self):
        rng = np.random.default_rng(19)
        ch = toy_channels(4, 1, rng)
        with pytest.raises(ValueError):
            solve_monostatic(ch, TagParams(), 6.3, 1e-2)

    def test_rejects_circuit_tag(self, model):
        ch = synthesize_channels(monostatic_layout(n_elements=4), model, 20)
        with pytest.raises(ValueError):
            solve_monostatic(ch, TagParams(circuit_power=0.1), 6.3, 1e-2)


class TestMonotonicity:
    def test_power_nondecreasing_in_snr_target(self):
        rng = np.random.default_rng(21)
        ch = toy_channels(4, 2, rng)
        phases = PhaseVector(rng.uniform(0, 2 * np.pi, 4))
        tag = TagParams(circuit_power=0.2, harvest_efficiency=0.9)
        targets = [1.0, 2.0, 4.0, 8.0]
        powers = [min_power_with_circuit(ch, phases, tag, g, 1e-2) for g in targets]
        assert all(b >= a for a, b in zip(powers, powers[1:]))
