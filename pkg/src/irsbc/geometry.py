"""System geometry, per-link path-loss factors, and seeded channel synthesis.

All functions are pure; channel randomness comes exclusively from an explicit
integer seed, so identical inputs give bit-identical channel sets.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

SPEED_OF_LIGHT = 299792458.0

BISTATIC = "bistatic"
MONOSTATIC = "monostatic"


@dataclass(frozen=True)
class Position2D:
    """A point in the 2-D deployment plane, in meters."""

    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distance_to(self, other: "Position2D") -> float:
        return float(np.hypot(self.x - other.x, self.y - other.y))


@dataclass(frozen=True)
class IrsGeometry:
    """Planar reflector array: element grid centered on `center`.

    Elements fill a grid with ceil(sqrt(N)) columns, row-major, spaced by
    `element_width`.  Rows run perpendicular to `orientation`; a partial last
    row is left-aligned.
    """

    center: Position2D
    orientation: tuple[float, float]
    element_count: int
    element_width: float

    def __post_init__(self):
        if self.element_count < 1:
            raise ValueError("element_count must be >= 1")
        if self.element_width <= 0.0:
            raise ValueError("element_width must be positive")
        norm = float(np.hypot(*self.orientation))
        if not np.isfinite(norm) or norm <= 0.0:
            raise ValueError("orientation must be a nonzero 2-vector")
        object.__setattr__(
            self, "orientation", (self.orientation[0] / norm, self.orientation[1] / norm)
        )


@dataclass(frozen=True)
class SystemLayout:
    """Node placement and radio constants for one deployment."""

    ce_position: Position2D
    reader_position: Position2D
    tag_position: Position2D
    irs: IrsGeometry
    wavelength: float
    ce_antennas: int = 1
    architecture: str = BISTATIC

    def __post_init__(self):
        if self.wavelength <= 0.0:
            raise ValueError("wavelength must be positive")
        if self.ce_antennas < 1:
            raise ValueError("ce_antennas must be >= 1")
        if self.architecture not in (BISTATIC, MONOSTATIC):
            raise ValueError(f"unknown architecture: {self.architecture!r}")
        if self.architecture == MONOSTATIC:
            if self.ce_antennas != 1:
                raise ValueError("monostatic layout requires a single antenna")
            if self.ce_position.distance_to(self.reader_position) > 0.0:
                raise ValueError("monostatic layout requires ce_position == reader_position")


@dataclass(frozen=True)
class PathLossModel:
    """Amplitude path-loss model.

    Direct links use (wavelength / 4 pi) * d**(-exponent / 2), so received
    power scales as d**(-exponent).  IRS element hops default to a
    plate-scattering stand-in (see `path_loss_irs_hop`); both pieces can be
    replaced by caller-supplied functions to drop in an exact model.
    """

    exponent: float = 2.1
    direct_fn: Optional[Callable[[float, float], float]] = None
    irs_hop_fn: Optional[Callable[[float, float, float, float], float]] = None

    def __post_init__(self):
        if self.exponent < 2.0:
            raise ValueError("path-loss exponent must be >= 2 for the default model")


def element_positions(irs: IrsGeometry) -> np.ndarray:
    """Grid positions of all reflector elements, shape (N, 2).

    Row-major fill of a ceil(sqrt(N))-column grid centered on irs.center;
    for perfect squares the centroid coincides with the center exactly.
    """
    n = irs.element_count
    cols = int(np.ceil(np.sqrt(n)))
    rows = int(np.ceil(n / cols))
    along = np.array(irs.orientation, dtype=float)
    across = np.array([-along[1], along[0]])  # row direction, perpendicular
    idx = np.arange(n)
    r = idx // cols
    c = idx % cols
    offsets_c = (c - (cols - 1) / 2.0) * irs.element_width
    offsets_r = (r - (rows - 1) / 2.0) * irs.element_width
    return (
        irs.center.as_array()[None, :]
        + offsets_c[:, None] * across[None, :]
        + offsets_r[:, None] * along[None, :]
    )


def path_loss_direct(distance: float, model: PathLossModel, wavelength: float) -> float:
    """Amplitude factor of a direct link; power falls off as d**(-exponent)."""
    if distance <= 0.0:
        raise ValueError(f"link distance must be positive, got {distance}")
    if model.direct_fn is not None:
        return float(model.direct_fn(distance, wavelength))
    return wavelength / (4.0 * np.pi) * distance ** (-model.exponent / 2.0)


def path_loss_irs_hop(
    distance: float,
    cosine: float,
    element_width: float,
    model: PathLossModel,
    wavelength: float,
) -> float:
    """Amplitude factor of one hop to/from a single reflector element.

    Stand-in form sqrt(A_e * cos) / (sqrt(4 pi) * d) with aperture
    A_e = element_width**2; the product of the two hops of a reflected path
    equals `path_loss_irs_element`.  Back-side illumination (cos <= 0) gives 0.
    """
    if distance <= 0.0:
        raise ValueError(f"hop distance must be positive, got {distance}")
    if model.irs_hop_fn is not None:
        return float(model.irs_hop_fn(distance, cosine, element_width, wavelength))
    cosine = max(0.0, float(cosine))
    aperture = element_width**2
    return np.sqrt(aperture * cosine / (4.0 * np.pi)) / distance


def path_loss_irs_element(
    d_in: float,
    d_out: float,
    incidence_cos: float,
    departure_cos: float,
    model: PathLossModel,
    wavelength: float,
    element_width: float,
) -> float:
    """Amplitude factor of a full element reflection, strictly decreasing in
    both hop distances:

        sqrt(A_e**2 * cos_in * cos_out / ((4 pi)**2 * d_in**2 * d_out**2))
    """
    return path_loss_irs_hop(d_in, incidence_cos, element_width, model, wavelength) * (
        path_loss_irs_hop(d_out, departure_cos, element_width, model, wavelength)
    )


@dataclass(frozen=True)
class ChannelSet:
    """All complex channel gains with path loss absorbed (unit-magnitude fading).

    Shapes: ce_tag (L,), ce_irs (N, L), ce_reader (L,), tag_irs (N,),
    reader_irs (N,), tag_reader scalar.  The tag/reader element channels enter
    the reader-side composite conjugated (see signal_model.composite_links).
    ce_reader is carried for completeness but unused by the optimizer.
    """

    ce_tag: np.ndarray
    ce_irs: np.ndarray
    ce_reader: np.ndarray
    tag_irs: np.ndarray
    reader_irs: np.ndarray
    tag_reader: complex
    architecture: str = BISTATIC

    @property
    def n_elements(self) -> int:
        return self.tag_irs.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.ce_tag.shape[0]

    def without_irs(self) -> "ChannelSet":
        """Copy with all reflector amplitudes zeroed (direct links only)."""
        return ChannelSet(
            ce_tag=self.ce_tag,
            ce_irs=np.zeros_like(self.ce_irs),
            ce_reader=self.ce_reader,
            tag_irs=np.zeros_like(self.tag_irs),
            reader_irs=np.zeros_like(self.reader_irs),
            tag_reader=self.tag_reader,
            architecture=self.architecture,
        )


def _incidence_cosines(
    points: np.ndarray, node: np.ndarray, orientation: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    diff = node[None, :] - points
    dist = np.linalg.norm(diff, axis=1)
    if np.any(dist <= 0.0):
        raise ValueError("node coincides with a reflector element (zero distance)")
    return dist, np.maximum(0.0, diff @ orientation / dist)


def _hop_amplitudes(
    dist: np.ndarray,
    cosine: np.ndarray,
    width: float,
    model: PathLossModel,
    wavelength: float,
) -> np.ndarray:
    if model.irs_hop_fn is None:
        return np.sqrt(width**2 * np.maximum(0.0, cosine) / (4.0 * np.pi)) / dist
    return np.array(
        [path_loss_irs_hop(d, c, width, model, wavelength) for d, c in zip(dist, cosine)]
    )


def _uniform_phases(rng: np.random.Generator, shape) -> np.ndarray:
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=shape))


def synthesize_channels(layout: SystemLayout, model: PathLossModel, seed: int) -> ChannelSet:
    """Draw one channel realization: analytic amplitudes, seeded uniform phases.

    Every entry has magnitude equal to its path-loss amplitude exactly.  In
    monostatic layouts only the three unique links (reader-tag, reader-IRS,
    tag-IRS) are drawn; the CE-side entries are derived from them so that the
    forward and reverse composites through the reflector coincide, as channel
    reciprocity requires.  The CE-reader self link is carried as zero.
    """
    rng = np.random.default_rng(seed)
    elems = element_positions(layout.irs)
    orient = np.array(layout.irs.orientation)
    width = layout.irs.element_width
    wl = layout.wavelength
    ce = layout.ce_position.as_array()
    tag = layout.tag_position.as_array()
    reader = layout.reader_position.as_array()

    d_tag_elems, cos_tag = _incidence_cosines(elems, tag, orient)
    d_reader_elems, cos_reader = _incidence_cosines(elems, reader, orient)
    amp_tag_irs = _hop_amplitudes(d_tag_elems, cos_tag, width, model, wl)
    amp_reader_irs = _hop_amplitudes(d_reader_elems, cos_reader, width, model, wl)
    amp_tag_reader = path_loss_direct(layout.tag_position.distance_to(layout.reader_position), model, wl)

    if layout.architecture == MONOSTATIC:
        tag_irs = amp_tag_irs * _uniform_phases(rng, layout.irs.element_count)
        reader_irs = amp_reader_irs * _uniform_phases(rng, layout.irs.element_count)
        tag_reader = complex(amp_tag_reader * _uniform_phases(rng, ()))
        # Reciprocity: the CE-side composite must equal the reader-side one
        # for every phase configuration, which pins the derived entries below.
        ce_irs = (np.conj(reader_irs) * np.exp(2j * np.angle(tag_irs)))[:, None]
        return ChannelSet(
            ce_tag=np.array([tag_reader]),
            ce_irs=ce_irs,
            ce_reader=np.zeros(1, dtype=complex),
            tag_irs=tag_irs,
            reader_irs=reader_irs,
            tag_reader=tag_reader,
            architecture=MONOSTATIC,
        )

    d_ce_elems, cos_ce = _incidence_cosines(elems, ce, orient)
    amp_ce_irs = _hop_amplitudes(d_ce_elems, cos_ce, width, model, wl)
    amp_ce_tag = path_loss_direct(layout.ce_position.distance_to(layout.tag_position), model, wl)
    amp_ce_reader = path_loss_direct(layout.ce_position.distance_to(layout.reader_position), model, wl)

    L = layout.ce_antennas
    N = layout.irs.element_count
    ce_tag = amp_ce_tag * _uniform_phases(rng, L)
    ce_irs = amp_ce_irs[:, None] * _uniform_phases(rng, (N, L))
    ce_reader = amp_ce_reader * _uniform_phases(rng, L)
    tag_irs = amp_tag_irs * _uniform_phases(rng, N)
    reader_irs = amp_reader_irs * _uniform_phases(rng, N)
    tag_reader = complex(amp_tag_reader * _uniform_phases(rng, ()))
    return ChannelSet(
        ce_tag=ce_tag,
        ce_irs=ce_irs,
        ce_reader=ce_reader,
        tag_irs=tag_irs,
        reader_irs=reader_irs,
        tag_reader=tag_reader,
        architecture=BISTATIC,
    )
