"""Seeded experiment sweeps and their CSV/plot outputs.

Each experiment enumerates sweep points and, per point, a fixed number of
channel realizations.  Realization seeds derive from
(master seed, experiment id, point index, realization index) through a
SeedSequence, so points never share random streams and reruns with the same
config are byte-identical.  Wall-clock columns are written as 0 unless timing
is explicitly enabled, to keep output files deterministic.
"""

import configparser
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import benchmarks, power
from .geometry import (
    BISTATIC,
    MONOSTATIC,
    SPEED_OF_LIGHT,
    IrsGeometry,
    PathLossModel,
    Position2D,
    SystemLayout,
    synthesize_channels,
)
from .mm import MmConfig
from .sdp import SolverConfig
from .signal_model import TagParams

EXPERIMENT_IDS = {"single": 1, "fig2": 2, "fig3": 3, "fig4": 4}

DEFAULT_SCHEMES = {
    "fig2": ("mm_sdr", "no_irs", "random_phases", "align_cit", "align_tir"),
    "fig3": ("mm_sdr", "no_irs"),
    "fig4": ("monostatic", "no_irs"),
    "single": ("mm_sdr", "no_irs"),
}

RESULT_COLUMNS = (
    "experiment",
    "sweep_var_name",
    "sweep_var_value",
    "scheme",
    "realization",
    "p_star_dbm",
    "feasible",
    "mm_iterations",
    "wall_ms",
)


def watts_to_dbm(p: float) -> float:
    return 10.0 * np.log10(p) + 30.0


def dbm_to_watts(p: float) -> float:
    return 10.0 ** ((p - 30.0) / 10.0)


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


@dataclass
class ExperimentConfig:
    """All experiment inputs.  dB/dBm fields are converted to linear units
    once, on construction; everything downstream works in Watts."""

    experiment: str = "fig2"
    seed: int = 2024
    realizations: int = 100
    out_dir: str = "results"
    schemes: tuple = ()
    regime: str = "auto"
    measure_walltime: bool = False
    # geometry
    ce_position: tuple = (0.0, 0.0)
    reader_position: tuple = (100.0, 0.0)
    irs_center: tuple = (20.0, 20.0)
    irs_orientation: tuple = (0.0, -1.0)
    n_elements: int = 64
    element_width_wavelengths: float = 1.0
    ce_antennas: int = 4
    carrier_frequency_hz: float = 915e6
    path_loss_exponent: float = 2.1
    tag_position: tuple = (50.0, 0.0)
    # tag
    reflection_magnitude: float = 1.0
    circuit_power_w: float = 0.0
    harvest_efficiency: float = 1.0
    # targets (dB domain inputs)
    snr_target_db: float = 8.0
    noise_power_dbm: float = -110.0
    # fig2 sweep
    tag_x_start: float = 5.0
    tag_x_stop: float = 95.0
    tag_x_step: float = 5.0
    tag_y: float = 0.0
    # fig3 sweep
    n_elements_list: tuple = (16, 36, 49, 64, 100)
    fig3_tag_position: tuple = (20.0, 0.0)
    # fig4 sweep
    fig4_reader_position: tuple = (0.0, 0.0)
    fig4_irs_center: tuple = (40.0, 0.0)
    fig4_irs_orientation: tuple = (-1.0, 0.0)
    fig4_distances: tuple = (10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0)
    fig4_angles_deg: tuple = (0.0, 45.0, 90.0, 135.0, 180.0)
    # solver
    convergence_threshold: float = 1e-4
    max_outer_iterations: int = 50
    multi_start: int = 3
    curvature_mode: str = "adaptive"
    fixed_curvature: float = 2.5e-16
    randomization_count: int = 100
    sdp_method: str = "low_rank"
    sdp_max_iterations: int = 5000
    sdp_tolerance: float = 1e-7

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment: {self.experiment!r}")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        self.snr_target = db_to_linear(self.snr_target_db)
        self.noise_power_w = dbm_to_watts(self.noise_power_dbm)
        self.wavelength = SPEED_OF_LIGHT / self.carrier_frequency_hz
        if not self.schemes:
            self.schemes = DEFAULT_SCHEMES[self.experiment]

    def tag_params(self) -> TagParams:
        return TagParams(
            reflection_magnitude=self.reflection_magnitude,
            circuit_power=self.circuit_power_w,
            harvest_efficiency=self.harvest_efficiency,
        )

    def path_loss_model(self) -> PathLossModel:
        return PathLossModel(exponent=self.path_loss_exponent)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            method=self.sdp_method,
            max_iterations=self.sdp_max_iterations,
            stationarity_tolerance=self.sdp_tolerance,
            randomization_count=self.randomization_count,
        )

    def mm_config(self, seed: int) -> MmConfig:
        return MmConfig(
            curvature_mode=self.curvature_mode,
            fixed_curvature=self.fixed_curvature,
            convergence_threshold=self.convergence_threshold,
            max_outer_iterations=self.max_outer_iterations,
            multi_start=self.multi_start,
            seed=seed,
            solver=self.solver_config(),
        )

    def bistatic_layout(self, tag_xy: tuple, n_elements: Optional[int] = None) -> SystemLayout:
        return SystemLayout(
            ce_position=Position2D(*self.ce_position),
            reader_position=Position2D(*self.reader_position),
            tag_position=Position2D(*tag_xy),
            irs=IrsGeometry(
                center=Position2D(*self.irs_center),
                orientation=tuple(self.irs_orientation),
                element_count=n_elements or self.n_elements,
                element_width=self.element_width_wavelengths * self.wavelength,
            ),
            wavelength=self.wavelength,
            ce_antennas=self.ce_antennas,
            architecture=BISTATIC,
        )

    def monostatic_layout(self, tag_xy: tuple) -> SystemLayout:
        return SystemLayout(
            ce_position=Position2D(*self.fig4_reader_position),
            reader_position=Position2D(*self.fig4_reader_position),
            tag_position=Position2D(*tag_xy),
            irs=IrsGeometry(
                center=Position2D(*self.fig4_irs_center),
                orientation=tuple(self.fig4_irs_orientation),
                element_count=self.n_elements,
                element_width=self.element_width_wavelengths * self.wavelength,
            ),
            wavelength=self.wavelength,
            ce_antennas=1,
            architecture=MONOSTATIC,
        )


_TUPLE_FIELDS = {
    "ce_position",
    "reader_position",
    "irs_center",
    "irs_orientation",
    "tag_position",
    "fig3_tag_position",
    "fig4_reader_position",
    "fig4_irs_center",
    "fig4_irs_orientation",
    "fig4_distances",
    "fig4_angles_deg",
}
_INT_TUPLE_FIELDS = {"n_elements_list"}
_INT_FIELDS = {
    "seed",
    "realizations",
    "n_elements",
    "ce_antennas",
    "max_outer_iterations",
    "multi_start",
    "randomization_count",
    "sdp_max_iterations",
}
_STR_FIELDS = {"experiment", "out_dir", "regime", "curvature_mode", "sdp_method"}
_BOOL_FIELDS = {"measure_walltime"}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key == "schemes":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if key in _TUPLE_FIELDS:
        return tuple(float(v) for v in raw.replace(",", " ").split())
    if key in _INT_TUPLE_FIELDS:
        return tuple(int(float(v)) for v in raw.replace(",", " ").split())
    if key in _INT_FIELDS:
        return int(float(raw))
    if key in _STR_FIELDS:
        return raw
    if key in _BOOL_FIELDS:
        return raw.lower() in ("1", "true", "yes", "on")
    return float(raw)


def load_config(path, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Build an ExperimentConfig from a key = value config file.

    Sections are organizational only; keys must match ExperimentConfig field
    names.  `overrides` (e.g. from the command line) win over file values.
    """
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        with open(path) as fh:
            parser.read_file(fh)
        known = set(ExperimentConfig.__dataclass_fields__)
        for section in parser.sections():
            for key, raw in parser.items(section):
                if key not in known:
                    raise ValueError(f"unknown config key: {key!r} in [{section}]")
                values[key] = _coerce(key, raw)
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    return ExperimentConfig(**values)


@dataclass(frozen=True)
class SweepRow:
    experiment: str
    sweep_var_name: str
    sweep_var_value: float
    scheme: str
    realization: int
    p_star_dbm: Optional[float]
    feasible: bool
    mm_iterations: int
    wall_ms: float


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def sorted_rows(self) -> list:
        return sorted(
            self.rows,
            key=lambda r: (r.sweep_var_name, r.sweep_var_value, r.scheme, r.realization),
        )


def _realization_seeds(config: ExperimentConfig, point_index: int, realization: int):
    ss = np.random.SeedSequence(
        [config.seed, EXPERIMENT_IDS[config.experiment], point_index, realization]
    )
    words = ss.generate_state(4, np.uint64)
    return tuple(int(w) for w in words)


def _row(config, name, value, scheme, realization, p_watts, feasible, iterations, wall_ms):
    return SweepRow(
        experiment=config.experiment,
        sweep_var_name=name,
        sweep_var_value=float(value),
        scheme=scheme,
        realization=realization,
        p_star_dbm=watts_to_dbm(p_watts) if feasible and np.isfinite(p_watts) else None,
        feasible=feasible and np.isfinite(p_watts),
        mm_iterations=iterations,
        wall_ms=wall_ms,
    )


def _bistatic_schemes(config, channels, tag, seeds, schemes):
    """Evaluate requested schemes for one bistatic realization.

    Returns {scheme: (power_watts, feasible, iterations)}.  The CE-tag
    alignment phases (when computed) are fed to the MM runner as an extra
    start, so its result can never fall behind that benchmark.
    """
    channel_seed, scheme_seed, mm_seed, _ = seeds
    gamma, sigma2 = config.snr_target, config.noise_power_w
    out = {}

    def run(scheme, fn):
        t0 = time.perf_counter()
        try:
            p, iters = fn()
            feasible = True
        except power.InfeasibleError:
            p, iters, feasible = np.inf, 0, False
        wall = (time.perf_counter() - t0) * 1e3 if config.measure_walltime else 0.0
        out[scheme] = (p, feasible, iters, wall)

    cit_phases = None
    if "align_cit" in schemes or "mm_sdr" in schemes:
        cit_phases = benchmarks.align_single_link(
            channels, "cit", config.solver_config(), seed=scheme_seed
        )
    if "no_irs" in schemes:
        run("no_irs", lambda: (benchmarks.no_irs_power(channels, tag, gamma, sigma2), 0))
    if "random_phases" in schemes:
        run(
            "random_phases",
            lambda: (benchmarks.random_phase_power(channels, tag, gamma, sigma2, scheme_seed), 0),
        )
    if "align_tir" in schemes:
        tir = benchmarks.align_single_link(channels, "tir")
        run("align_tir", lambda: (benchmarks.power_for_phases(channels, tir, tag, gamma, sigma2), 0))
    if "align_cit" in schemes:
        run(
            "align_cit",
            lambda: (benchmarks.power_for_phases(channels, cit_phases, tag, gamma, sigma2), 0),
        )
    if "mm_sdr" in schemes:

        def run_mm():
            sol = power.min_power_no_circuit(
                channels,
                tag,
                gamma,
                sigma2,
                config.mm_config(mm_seed),
                extra_starts=[cit_phases] if cit_phases is not None else (),
            )
            if not sol.feasible:
                raise power.InfeasibleError("mm solution infeasible")
            return sol.transmit_power, sol.diagnostics.iterations

        run("mm_sdr", run_mm)
    return out


def run_fig2(config: ExperimentConfig) -> SweepResult:
    """Tag moved along the CE-reader line; all benchmark schemes."""
    if config.circuit_power_w != 0.0:
        raise ValueError("figure sweeps assume a semipassive tag (circuit_power_w = 0)")
    xs = np.arange(config.tag_x_start, config.tag_x_stop + 0.5 * config.tag_x_step, config.tag_x_step)
    tag = config.tag_params()
    model = config.path_loss_model()
    result = SweepResult()
    for point_index, x in enumerate(xs):
        layout = config.bistatic_layout((float(x), config.tag_y))
        for realization in range(config.realizations):
            seeds = _realization_seeds(config, point_index, realization)
            channels = synthesize_channels(layout, model, seeds[0])
            for scheme, (p, ok, iters, wall) in _bistatic_schemes(
                config, channels, tag, seeds, config.schemes
            ).items():
                result.rows.append(
                    _row(config, "tag_x_m", x, scheme, realization, p, ok, iters, wall)
                )
    return result


def run_fig3(config: ExperimentConfig) -> SweepResult:
    """Sweep over the reflector element count at a fixed tag position."""
    if config.circuit_power_w != 0.0:
        raise ValueError("figure sweeps assume a semipassive tag (circuit_power_w = 0)")
    tag = config.tag_params()
    model = config.path_loss_model()
    result = SweepResult()
    for point_index, n in enumerate(config.n_elements_list):
        layout = config.bistatic_layout(tuple(config.fig3_tag_position), n_elements=int(n))
        for realization in range(config.realizations):
            seeds = _realization_seeds(config, point_index, realization)
            channels = synthesize_channels(layout, model, seeds[0])
            for scheme, (p, ok, iters, wall) in _bistatic_schemes(
                config, channels, tag, seeds, config.schemes
            ).items():
                result.rows.append(
                    _row(config, "n_elements", n, scheme, realization, p, ok, iters, wall)
                )
    return result


def run_fig4(config: ExperimentConfig) -> SweepResult:
    """Monostatic sweep over tag-reader distance and tag angle.

    The angle enters the scheme label (one curve per scheme and angle), since
    rows carry a single numeric sweep value.
    """
    if config.circuit_power_w != 0.0:
        raise ValueError("figure sweeps assume a semipassive tag (circuit_power_w = 0)")
    tag = config.tag_params()
    model = config.path_loss_model()
    reader = np.asarray(config.fig4_reader_position, dtype=float)
    irs_center = np.asarray(config.fig4_irs_center, dtype=float)
    axis = irs_center - reader
    axis = axis / np.linalg.norm(axis)
    normal = np.array([-axis[1], axis[0]])
    result = SweepResult()
    base_schemes = [s for s in config.schemes if s in ("monostatic", "no_irs")]
    point_index = 0
    for angle_deg in config.fig4_angles_deg:
        phi = np.deg2rad(angle_deg)
        for dist in config.fig4_distances:
            tag_xy = reader + dist * (np.cos(phi) * axis + np.sin(phi) * normal)
            layout = config.monostatic_layout(tuple(tag_xy))
            for realization in range(config.realizations):
                seeds = _realization_seeds(config, point_index, realization)
                channels = synthesize_channels(layout, model, seeds[0])
                for scheme in base_schemes:
                    label = f"{scheme}@phi{angle_deg:g}"
                    t0 = time.perf_counter()
                    try:
                        if scheme == "monostatic":
                            sol = power.solve_monostatic(
                                channels, tag, config.snr_target, config.noise_power_w
                            )
                            p, ok = sol.transmit_power, sol.feasible
                        else:
                            p = benchmarks.no_irs_power(
                                channels, tag, config.snr_target, config.noise_power_w
                            )
                            ok = True
                    except power.InfeasibleError:
                        p, ok = np.inf, False
                    wall = (time.perf_counter() - t0) * 1e3 if config.measure_walltime else 0.0
                    result.rows.append(
                        _row(config, "tag_distance_m", dist, label, realization, p, ok, 0, wall)
                    )
            point_index += 1
    return result


def run_single(config: ExperimentConfig) -> SweepResult:
    """One tag position, requested schemes, all realizations.

    With circuit power only the joint solver runs (dispatched per
    config.regime); benchmark schemes are defined for semipassive tags.
    """
    tag = config.tag_params()
    model = config.path_loss_model()
    layout = config.bistatic_layout(tuple(config.tag_position))
    result = SweepResult()
    x = config.tag_position[0]
    for realization in range(config.realizations):
        seeds = _realization_seeds(config, 0, realization)
        channels = synthesize_channels(layout, model, seeds[0])
        if config.circuit_power_w > 0.0:
            t0 = time.perf_counter()
            sol = power.solve(
                channels,
                tag,
                config.snr_target,
                config.noise_power_w,
                config.mm_config(seeds[2]),
                regime=config.regime,
            )
            wall = (time.perf_counter() - t0) * 1e3 if config.measure_walltime else 0.0
            iters = sol.diagnostics.iterations if sol.diagnostics else 0
            result.rows.append(
                _row(config, "tag_x_m", x, sol.regime, realization, sol.transmit_power,
                     sol.feasible, iters, wall)
            )
            continue
        for scheme, (p, ok, iters, wall) in _bistatic_schemes(
            config, channels, tag, seeds, config.schemes
        ).items():
            result.rows.append(_row(config, "tag_x_m", x, scheme, realization, p, ok, iters, wall))
    return result


RUNNERS = {"fig2": run_fig2, "fig3": run_fig3, "fig4": run_fig4, "single": run_single}


def run_experiment(config: ExperimentConfig) -> SweepResult:
    return RUNNERS[config.experiment](config)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_outputs(result: SweepResult, out_dir) -> dict:
    """Write results.csv, summary.csv, and a gnuplot script of mean curves.

    results.csv column order is fixed; floats use shortest round-trip
    formatting so reloading reproduces the in-memory rows exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = result.sorted_rows()

    results_path = out / "results.csv"
    with open(results_path, "w", newline="") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    (
                        r.experiment,
                        r.sweep_var_name,
                        _fmt(r.sweep_var_value),
                        r.scheme,
                        str(r.realization),
                        _fmt(r.p_star_dbm),
                        _fmt(r.feasible),
                        str(r.mm_iterations),
                        _fmt(r.wall_ms),
                    )
                )
                + "\n"
            )

    groups: dict = {}
    for r in rows:
        groups.setdefault((r.sweep_var_name, r.sweep_var_value, r.scheme), []).append(r)
    summary_path = out / "summary.csv"
    schemes = []
    with open(summary_path, "w", newline="") as fh:
        fh.write("sweep_var_name,sweep_var_value,scheme,n_feasible,n_total,"
                 "mean_p_star_dbm,std_p_star_dbm\n")
        for (name, value, scheme), grp in sorted(groups.items()):
            if scheme not in schemes:
                schemes.append(scheme)
            vals = np.array([g.p_star_dbm for g in grp if g.feasible], dtype=float)
            mean = float(np.mean(vals)) if vals.size else None
            std = float(np.std(vals, ddof=1)) if vals.size > 1 else (0.0 if vals.size else None)
            fh.write(
                f"{name},{_fmt(value)},{scheme},{vals.size},{len(grp)},"
                f"{_fmt(mean)},{_fmt(std)}\n"
            )

    plot_path = out / "plot.gp"
    with open(plot_path, "w", newline="") as fh:
        fh.write("# gnuplot script: mean transmit power per scheme\n")
        fh.write("set datafile separator ','\n")
        fh.write("set key outside\n")
        fh.write(f"set xlabel '{rows[0].sweep_var_name if rows else 'sweep'}'\n")
        fh.write("set ylabel 'mean transmit power (dBm)'\n")
        fh.write("set grid\n")
        parts = [
            f"'summary.csv' using (strcol(3) eq '{s}' ? $2 : NaN):6 "
            f"with linespoints title '{s}'"
            for s in schemes
        ]
        fh.write("plot \\\n    " + ", \\\n    ".join(parts) + "\n")

    return {"results": results_path, "summary": summary_path, "plot": plot_path}


def load_results(path) -> SweepResult:
    """Reload a results.csv written by emit_outputs."""
    result = SweepResult()
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != RESULT_COLUMNS:
            raise ValueError(f"unexpected results.csv header: {header}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rec = dict(zip(RESULT_COLUMNS, parts))
            result.rows.append(
                SweepRow(
                    experiment=rec["experiment"],
                    sweep_var_name=rec["sweep_var_name"],
                    sweep_var_value=float(rec["sweep_var_value"]),
                    scheme=rec["scheme"],
                    realization=int(rec["realization"]),
                    p_star_dbm=float(rec["p_star_dbm"]) if rec["p_star_dbm"] else None,
                    feasible=rec["feasible"] == "1",
                    mm_iterations=int(rec["mm_iterations"]),
                    wall_ms=float(rec["wall_ms"]),
                )
            )
    return result
