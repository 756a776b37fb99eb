"""Composite link gains, SNR/harvest expressions, and the cascade objective.

The reflector phase design works on a lifted unit-modulus vector: with
phasors p_n = exp(j theta_n), define u_n = conj(p_n) and the lifted vector
u_bar = [u; 1].  Both squared composite gains are then Hermitian quadratic
forms in u_bar (plus a constant), and their product -- the quantity the phase
optimizer maximizes -- is a quartic polynomial on the torus |u_n| = 1.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import ChannelSet


@dataclass(frozen=True)
class TagParams:
    """Backscatter tag operating point.

    reflection_magnitude: common magnitude of all modulation impedances, (0, 1].
    impedance_count: number of load impedances (metadata only).
    power_split: fraction of incident power reflected; the rest is harvested.
    circuit_power: circuit consumption in Watts (0 for semipassive tags).
    harvest_efficiency: RF-to-DC conversion efficiency in [0, 1].
    """

    reflection_magnitude: float = 1.0
    impedance_count: int = 2
    power_split: float = 1.0
    circuit_power: float = 0.0
    harvest_efficiency: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.reflection_magnitude <= 1.0:
            raise ValueError("reflection_magnitude must be in (0, 1]")
        if self.impedance_count < 1:
            raise ValueError("impedance_count must be >= 1")
        if not 0.0 <= self.power_split <= 1.0:
            raise ValueError("power_split must be in [0, 1]")
        if self.circuit_power < 0.0:
            raise ValueError("circuit_power must be >= 0")
        if not 0.0 <= self.harvest_efficiency <= 1.0:
            raise ValueError("harvest_efficiency must be in [0, 1]")


@dataclass(frozen=True)
class PhaseVector:
    """Per-element reflector phase shifts in [0, 2 pi)."""

    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.mod(np.asarray(self.theta, dtype=float), 2.0 * np.pi))

    @property
    def n_elements(self) -> int:
        return self.theta.shape[0]

    def phasors(self) -> np.ndarray:
        """exp(j theta), the diagonal of the reflection matrix."""
        return np.exp(1j * self.theta)

    def lifted(self) -> np.ndarray:
        """Lifted optimization vector [conj(phasors); 1] of length N + 1."""
        return np.concatenate([np.exp(-1j * self.theta), [1.0 + 0.0j]])

    @staticmethod
    def from_lifted(u_bar: np.ndarray) -> "PhaseVector":
        """Recover phases from a lifted unit-modulus vector.

        The vector is first rotated by the conjugate phase of its last entry
        (the homogenization slot), which leaves both quadratic forms
        unchanged; phases are then read off the leading N entries.
        """
        u_bar = np.asarray(u_bar)
        last = u_bar[-1]
        if last == 0:
            raise ValueError("homogenization entry of the lifted vector is zero")
        u = u_bar[:-1] * np.conj(last / abs(last))
        return PhaseVector(np.mod(-np.angle(u), 2.0 * np.pi))


@dataclass(frozen=True)
class CompositeLinks:
    """Effective channels including reflector paths.

    ce_tag: 1 x L effective CE-to-tag gain (stored as shape (L,)).
    tag_reader: scalar effective tag-to-reader gain.
    """

    ce_tag: np.ndarray
    tag_reader: complex

    def cascade_gain(self) -> float:
        """Squared norm of the end-to-end cascade, |tag_reader|^2 * ||ce_tag||^2."""
        return float(abs(self.tag_reader) ** 2 * np.linalg.norm(self.ce_tag) ** 2)


def composite_links(channels: ChannelSet, phases: PhaseVector) -> CompositeLinks:
    """Combined channel gains for the CE-to-tag and tag-to-reader links."""
    if phases.n_elements != channels.n_elements:
        raise ValueError(
            f"phase vector has {phases.n_elements} entries, channels have "
            f"{channels.n_elements} elements"
        )
    p = phases.phasors()
    ce_tag = (np.conj(channels.tag_irs) * p) @ channels.ce_irs + channels.ce_tag
    tag_reader = np.sum(np.conj(channels.reader_irs) * p * channels.tag_irs) + channels.tag_reader
    return CompositeLinks(ce_tag=ce_tag, tag_reader=complex(tag_reader))


def received_snr(
    links: CompositeLinks, weights: np.ndarray, tag: TagParams, noise_power: float
) -> float:
    """Reader SNR of the backscattered signal (off-state power as reference)."""
    if noise_power <= 0.0:
        raise ValueError("noise_power must be positive")
    signal = links.tag_reader * (links.ce_tag @ weights)
    return float(
        tag.power_split * tag.reflection_magnitude**2 * abs(signal) ** 2 / noise_power
    )


def harvested_power(links: CompositeLinks, weights: np.ndarray, tag: TagParams) -> float:
    """DC power harvested from the non-reflected signal fraction, in Watts.

    Circuit feasibility requires this to reach tag.circuit_power.
    """
    incident = abs(links.ce_tag @ weights) ** 2
    return float(tag.harvest_efficiency * (1.0 - tag.power_split) * incident)


def ce_tag_quadratic(channels: ChannelSet) -> tuple[np.ndarray, float]:
    """Hermitian form (Q, c) with u_bar^H Q u_bar + c = ||composite CE-tag||^2.

    Q is (N+1) x (N+1) with zero bottom-right entry; c = ||direct CE-tag||^2.
    """
    cascade = np.conj(channels.tag_irs)[:, None] * channels.ce_irs  # (N, L)
    border = cascade @ np.conj(channels.ce_tag)  # (N,)
    n = channels.n_elements
    q = np.zeros((n + 1, n + 1), dtype=complex)
    q[:n, :n] = cascade @ cascade.conj().T
    q[:n, n] = border
    q[n, :n] = np.conj(border)
    q = 0.5 * (q + q.conj().T)
    return q, float(np.linalg.norm(channels.ce_tag) ** 2)


def tag_reader_quadratic(channels: ChannelSet) -> tuple[np.ndarray, float]:
    """Hermitian form (Q, c) with u_bar^H Q u_bar + c = |composite tag-reader|^2.

    The top-left block is the rank-one outer product of the per-element
    cascade vector; c = |direct tag-reader|^2.
    """
    cascade = np.conj(channels.reader_irs) * channels.tag_irs  # (N,)
    border = cascade * np.conj(channels.tag_reader)
    n = channels.n_elements
    q = np.zeros((n + 1, n + 1), dtype=complex)
    q[:n, :n] = np.outer(cascade, np.conj(cascade))
    q[:n, n] = border
    q[n, :n] = np.conj(border)
    q = 0.5 * (q + q.conj().T)
    return q, float(abs(channels.tag_reader) ** 2)


def quadratic_value(q: np.ndarray, const: float, u_bar: np.ndarray) -> float:
    return float(np.real(u_bar.conj() @ q @ u_bar)) + const


def cascade_objective(
    q_ct: np.ndarray, q_tr: np.ndarray, c_ct: float, c_tr: float, u_bar: np.ndarray
) -> float:
    """Quartic objective (u^H Q_ct u + c_ct)(u^H Q_tr u + c_tr).

    On lifted unit-modulus vectors this equals the product of the squared
    composite gains, i.e. the squared end-to-end cascade gain.
    """
    return quadratic_value(q_ct, c_ct, u_bar) * quadratic_value(q_tr, c_tr, u_bar)


@dataclass(frozen=True)
class QuadraticForms:
    """Bundle of both quadratic forms defining the cascade objective."""

    ce_tag_matrix: np.ndarray
    tag_reader_matrix: np.ndarray
    ce_tag_const: float
    tag_reader_const: float

    @classmethod
    def from_channels(cls, channels: ChannelSet) -> "QuadraticForms":
        q_ct, c_ct = ce_tag_quadratic(channels)
        q_tr, c_tr = tag_reader_quadratic(channels)
        return cls(q_ct, q_tr, c_ct, c_tr)

    @property
    def dim(self) -> int:
        return self.ce_tag_matrix.shape[0]

    def ce_tag_gain(self, u_bar: np.ndarray) -> float:
        return quadratic_value(self.ce_tag_matrix, self.ce_tag_const, u_bar)

    def tag_reader_gain(self, u_bar: np.ndarray) -> float:
        return quadratic_value(self.tag_reader_matrix, self.tag_reader_const, u_bar)

    def objective(self, u_bar: np.ndarray) -> float:
        return self.ce_tag_gain(u_bar) * self.tag_reader_gain(u_bar)
