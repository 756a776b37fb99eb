"""Transmit-power minimization for reflector-aided backscatter links.

Layers: geometry/channel synthesis -> composite-gain quadratic forms ->
unit-diagonal SDP solver -> MM phase optimization -> closed-form power
allocation -> benchmark oracles -> experiment sweeps/CLI.
"""

from .geometry import (
    BISTATIC,
    MONOSTATIC,
    SPEED_OF_LIGHT,
    ChannelSet,
    IrsGeometry,
    PathLossModel,
    Position2D,
    SystemLayout,
    element_positions,
    path_loss_direct,
    path_loss_irs_element,
    path_loss_irs_hop,
    synthesize_channels,
)
from .signal_model import (
    CompositeLinks,
    PhaseVector,
    QuadraticForms,
    TagParams,
    cascade_objective,
    ce_tag_quadratic,
    composite_links,
    harvested_power,
    received_snr,
    tag_reader_quadratic,
)
from .sdp import (
    INTERIOR_POINT,
    LOW_RANK,
    SdpProblem,
    SdpSolution,
    SolverConfig,
    gaussian_randomize,
    psd_project,
    solve_diag_sdp,
)
from .mm import (
    MinorizerModel,
    MmConfig,
    MmTrace,
    aligned_phases_ce_tag,
    aligned_phases_tag_reader,
    curvature_bound,
    optimize_phases,
    optimize_phases_ratio,
    quadratic_minorizer,
)
from .power import (
    InfeasibleError,
    SolverSolution,
    min_power_no_circuit,
    min_power_with_circuit,
    mrt_beamformer,
    optimal_power_split,
    regime_indicator,
    solve,
    solve_circuit_limited,
    solve_dinkelbach,
    solve_monostatic,
    solve_noise_limited,
)
from .benchmarks import (
    GridBudgetError,
    SCHEME_IDS,
    align_single_link,
    finite_diff_gradient_check,
    grid_search_oracle,
    no_irs_power,
    power_for_phases,
    random_phase_power,
)
from .experiments import (
    ExperimentConfig,
    SweepResult,
    SweepRow,
    emit_outputs,
    load_config,
    load_results,
    run_experiment,
    run_fig2,
    run_fig3,
    run_fig4,
    run_single,
)

__version__ = "0.1.0"
