"""Command-line harness: config parsing, scans, figure data, reporting.

Subcommands:

  simulate  one engine run over a time grid, driven by a JSON config
  fig1      fidelity surface F(t, eta) for the four-node network
  fig2      noise-benefit map Delta(t, n) at m = n - 2
  fig3      noise-benefit map Delta(t, m) at n = 10
  report    cross-oracle consistency suite (JSON + text)

Every command takes --config, --out, --seed, --threads; the thread
count falls back to the SPINNET_THREADS environment variable, then 1.
All output is a deterministic function of the resolved configuration:
CSV rows are emitted in grid order, floats in %.12e, UNIX newlines,
UTF-8, and nothing time- or host-dependent is ever written. Exit codes
are 0 (success), 1 (configuration error), 2 (numeric failure, or a
consistency report in which two engines disagree).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import lindblad, stochastic
from .analytics import ReportConfig, consistency_report
from .network import (
    NoiseSpec,
    complete_graph,
    lindblad_edge_operators,
    single_excitation_hamiltonian,
)
from .perturbation import (
    baseline_max_fidelity,
    first_order_numeric,
    printed_weak_noise_channel,
)
from .propagator import BlochInput, ChannelParams, optimal_avg_fidelity, transfer_amplitude

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ScanRecord",
    "run_simulate",
    "run_scan_fig1",
    "run_scan_fig2",
    "run_scan_fig3",
    "run_report",
    "main",
]

CSV_HEADER = "n,m,eta,t,F,abs_z,lambda,delta,method,seed"

_METHODS = ("unitary", "lindblad", "trajectories", "perturbation-numeric", "perturbation-printed")

_PROBE = BlochInput(math.pi / 2.0, 0.0)


class ConfigError(ValueError):
    """Configuration rejection carrying the offending field name."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"field '{field_name}': {message}")
        self.field_name = field_name


def _parse_eta(raw: object) -> float | dict[tuple[int, int], float]:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        if raw < 0:
            raise ConfigError("eta", "must be nonnegative")
        return float(raw)
    if isinstance(raw, Mapping):
        out: dict[tuple[int, int], float] = {}
        for key, value in raw.items():
            parts = str(key).split("-")
            if len(parts) != 2:
                raise ConfigError("eta", f"edge key {key!r} is not of the form 'k-l'")
            try:
                k, l = int(parts[0]), int(parts[1])
            except ValueError:
                raise ConfigError("eta", f"edge key {key!r} is not a pair of integers") from None
            if not isinstance(value, (int, float)) or isinstance(value, bool) or value < 0:
                raise ConfigError("eta", f"strength for edge {key!r} must be a nonnegative number")
            out[(k, l)] = float(value)
        if not out:
            raise ConfigError("eta", "per-edge map must not be empty")
        return out
    raise ConfigError("eta", "must be a number or a map of 'k-l' edge keys to numbers")


def _require_int(raw: object, name: str, minimum: int) -> int:
    if not isinstance(raw, int) or isinstance(raw, bool):
        raise ConfigError(name, "must be an integer")
    if raw < minimum:
        raise ConfigError(name, f"must be at least {minimum}")
    return raw


def _require_number(raw: object, name: str) -> float:
    if not isinstance(raw, (int, float)) or isinstance(raw, bool):
        raise ConfigError(name, "must be a number")
    return float(raw)


@dataclass(frozen=True)
class ExperimentConfig:
    """One fully resolved experiment: network, noise, grid, engine, seeds.

    Built from a flat JSON document; unknown keys are rejected so a
    typo cannot silently fall back to a default. Either the noisy
    vertices are listed explicitly or a count m is given, in which
    case the m highest-numbered vertices away from the transfer pair
    are picked.
    """

    n: int
    input_vertex: int = 1
    output_vertex: int = 2
    noisy_vertices: tuple[int, ...] = ()
    eta: float | dict[tuple[int, int], float] = 0.0
    t_min: float = 0.0
    t_max: float = 2.0 * math.pi
    t_steps: int = 64
    method: str = "lindblad"
    dt: float = 1e-3
    n_traj: int = 10000
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.input_vertex == self.output_vertex:
            raise ConfigError("output_vertex", "must differ from input_vertex")
        for name, v in (("input_vertex", self.input_vertex), ("output_vertex", self.output_vertex)):
            if not 1 <= v <= self.n:
                raise ConfigError(name, f"must lie in 1..{self.n}")
        clash = set(self.noisy_vertices) & {self.input_vertex, self.output_vertex}
        if clash:
            raise ConfigError("noisy_vertices", f"{sorted(clash)} overlap the transfer pair")
        if any(not 1 <= v <= self.n for v in self.noisy_vertices):
            raise ConfigError("noisy_vertices", f"vertices must lie in 1..{self.n}")
        if len(set(self.noisy_vertices)) != len(self.noisy_vertices):
            raise ConfigError("noisy_vertices", "contains duplicates")
        if self.method not in _METHODS:
            raise ConfigError("method", f"must be one of {', '.join(_METHODS)}")
        if self.t_steps < 1:
            raise ConfigError("t_steps", "must be at least 1")
        if self.t_min < 0 or self.t_max < self.t_min:
            raise ConfigError("t_max", "time grid needs 0 <= t_min <= t_max")
        if self.dt <= 0:
            raise ConfigError("dt", "must be positive")
        if self.n_traj < 1:
            raise ConfigError("n_traj", "must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed", "must fit in 64 bits")

    @classmethod
    def from_dict(cls, raw: Mapping[str, object]) -> "ExperimentConfig":
        known = {
            "n",
            "input_vertex",
            "output_vertex",
            "noisy_vertices",
            "m",
            "eta",
            "t_min",
            "t_max",
            "t_steps",
            "method",
            "dt",
            "n_traj",
            "master_seed",
        }
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        if "n" not in raw:
            raise ConfigError("n", "required")
        n = _require_int(raw["n"], "n", 2)
        input_vertex = _require_int(raw.get("input_vertex", 1), "input_vertex", 1)
        output_vertex = _require_int(raw.get("output_vertex", 2), "output_vertex", 1)
        if "noisy_vertices" in raw and "m" in raw:
            raise ConfigError("m", "give either noisy_vertices or m, not both")
        if "noisy_vertices" in raw:
            vertices = raw["noisy_vertices"]
            if not isinstance(vertices, Sequence) or isinstance(vertices, (str, bytes)):
                raise ConfigError("noisy_vertices", "must be a list of vertices")
            noisy = tuple(_require_int(v, "noisy_vertices", 1) for v in vertices)
        elif "m" in raw:
            m = _require_int(raw["m"], "m", 0)
            if m > n - 2:
                raise ConfigError("m", f"must not exceed n-2 = {n - 2}")
            pool = [v for v in range(n, 0, -1) if v not in (input_vertex, output_vertex)]
            noisy = tuple(sorted(pool[:m]))
        else:
            noisy = ()
        config = cls(
            n=n,
            input_vertex=input_vertex,
            output_vertex=output_vertex,
            noisy_vertices=noisy,
            eta=_parse_eta(raw.get("eta", 0.0)),
            t_min=_require_number(raw.get("t_min", 0.0), "t_min"),
            t_max=_require_number(raw.get("t_max", 2.0 * math.pi), "t_max"),
            t_steps=_require_int(raw.get("t_steps", 64), "t_steps", 1),
            method=str(raw.get("method", "lindblad")),
            dt=_require_number(raw.get("dt", 1e-3), "dt"),
            n_traj=_require_int(raw.get("n_traj", 10000), "n_traj", 1),
            master_seed=_require_int(raw.get("master_seed", 0), "master_seed", 0),
        )
        return config

    @property
    def m(self) -> int:
        return len(self.noisy_vertices)

    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(self.noisy_vertices, self.eta)

    def uniform_eta(self) -> float:
        """Scalar noise strength; rejects per-edge maps where one value is needed."""
        if isinstance(self.eta, dict):
            raise ConfigError("eta", f"method '{self.method}' needs a scalar eta, not a map")
        return self.eta

    def eta_column(self) -> float:
        """Value for the CSV eta column: the scalar, or the mean of a per-edge map."""
        if isinstance(self.eta, dict):
            return float(np.mean(list(self.eta.values())))
        return self.eta

    def times(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_steps)

    def to_metadata(self) -> dict:
        eta = self.eta
        if isinstance(eta, dict):
            eta = {f"{k}-{l}": v for (k, l), v in sorted(eta.items())}
        return {
            "n": self.n,
            "input_vertex": self.input_vertex,
            "output_vertex": self.output_vertex,
            "noisy_vertices": list(self.noisy_vertices),
            "eta": eta,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "t_steps": self.t_steps,
            "method": self.method,
            "dt": self.dt,
            "n_traj": self.n_traj,
            "master_seed": self.master_seed,
        }


@dataclass(frozen=True)
class ScanRecord:
    """One CSV row: channel numbers at a single grid cell."""

    n: int
    m: int
    eta: float
    t: float
    fidelity: float
    abs_z: float
    dephasing: float
    delta: float | None
    method: str
    seed: int

    def __post_init__(self) -> None:
        # the literal first-order forms are claims, not channels, and
        # may leave the physical range; engine rows must not
        if self.method != "perturbation-printed":
            if not 0.5 - 1e-9 <= self.fidelity <= 1.0 + 1e-9:
                raise RuntimeError(
                    f"numeric failure: fidelity {self.fidelity} outside [1/2, 1] at t={self.t}"
                )

    def to_csv_row(self) -> str:
        delta = "" if self.delta is None else f"{self.delta:.12e}"
        return (
            f"{self.n},{self.m},{self.eta:.12e},{self.t:.12e},{self.fidelity:.12e},"
            f"{self.abs_z:.12e},{self.dephasing:.12e},{delta},{self.method},{self.seed}"
        )


def records_to_csv(records: Sequence[ScanRecord]) -> str:
    return "\n".join([CSV_HEADER, *(r.to_csv_row() for r in records)]) + "\n"


def _channel_record(
    config: ExperimentConfig,
    t: float,
    params: ChannelParams,
    delta: float | None = None,
) -> ScanRecord:
    fidelity, _ = optimal_avg_fidelity(params)
    return ScanRecord(
        n=config.n,
        m=config.m,
        eta=config.eta_column(),
        t=float(t),
        fidelity=fidelity,
        abs_z=abs(params.amplitude),
        dephasing=params.dephasing,
        delta=delta,
        method=config.method,
        seed=config.master_seed,
    )


def run_simulate(config: ExperimentConfig, threads: int = 1) -> list[ScanRecord]:
    """Evaluate the configured engine at every time-grid point.

    unitary ignores the noise entirely; lindblad and trajectories run
    the full noisy engines; the perturbation methods use the
    first-order machinery, which by the permutation symmetry of the
    complete graph depends on the noisy set only through its size.
    """
    graph = complete_graph(config.n)
    h = single_excitation_hamiltonian(graph)
    times = config.times()
    records: list[ScanRecord] = []

    if config.method == "unitary":
        for t in times:
            z = transfer_amplitude(h, float(t), config.input_vertex, config.output_vertex)
            records.append(_channel_record(config, t, ChannelParams(z, 1.0)))
        return records

    if config.method == "lindblad":
        spec = config.noise_spec()
        ops = lindblad_edge_operators(graph, spec, config.input_vertex, config.output_vertex)
        liouville = lindblad.build_liouvillian(h, ops)
        start = lindblad.initial_network_state(config.n, config.input_vertex, _PROBE)
        states = lindblad.evolve_at_times(liouville, start, times)
        for t, state in zip(times, states):
            params = lindblad.extract_channel(
                state, _PROBE, config.input_vertex, config.output_vertex
            )
            records.append(_channel_record(config, t, params))
        return records

    if config.method == "trajectories":
        spec = config.noise_spec()
        spec.validate_for(graph, config.input_vertex, config.output_vertex)
        a, b = _PROBE.amplitudes()
        psi = np.zeros(config.n + 1, dtype=complex)
        psi[0], psi[config.input_vertex] = a, b
        for t in times:
            plan = stochastic.TrajectoryPlan(
                n_traj=config.n_traj,
                dt=config.dt,
                t_final=float(t),
                master_seed=config.master_seed,
                noise=spec,
            )
            result = stochastic.ensemble_average(plan, h, psi, threads=threads)
            params = lindblad.extract_channel(
                result.rho_mean, _PROBE, config.input_vertex, config.output_vertex
            )
            records.append(_channel_record(config, t, params))
        return records

    # perturbation routes: uniform strength only
    eta = config.uniform_eta()
    for t in times:
        if config.method == "perturbation-numeric":
            channel = first_order_numeric(config.n, config.m, eta, float(t))
        else:
            channel = printed_weak_noise_channel(config.n, config.m, eta, float(t))
        records.append(
            ScanRecord(
                n=config.n,
                m=config.m,
                eta=eta,
                t=float(t),
                fidelity=channel.fidelity(),
                abs_z=channel.abs_z,
                dephasing=channel.dephasing,
                delta=None,
                method=config.method,
                seed=config.master_seed,
            )
        )
    return records


def _delta_records(
    n: int,
    m: int,
    eta: float,
    times: np.ndarray,
    seed: int,
) -> list[ScanRecord]:
    """Lindblad channel plus Delta against the analytic noiseless baseline."""
    baseline = baseline_max_fidelity(n)
    liouville = lindblad.complete_network_liouvillian(n, m, eta)
    start = lindblad.initial_network_state(n, 1, _PROBE)
    states = lindblad.evolve_at_times(liouville, start, times)
    records = []
    for t, state in zip(times, states):
        params = lindblad.extract_channel(state, _PROBE, 1, 2)
        fidelity, _ = optimal_avg_fidelity(params)
        records.append(
            ScanRecord(
                n=n,
                m=m,
                eta=eta,
                t=float(t),
                fidelity=fidelity,
                abs_z=abs(params.amplitude),
                dephasing=params.dephasing,
                delta=max(fidelity - baseline, 0.0),
                method="lindblad",
                seed=seed,
            )
        )
    return records


def _fig_overrides(raw: Mapping[str, object], allowed: dict[str, object]) -> dict:
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    merged = dict(allowed)
    merged.update(raw)
    return merged


def run_scan_fig1(overrides: Mapping[str, object] | None = None, seed: int = 0) -> list[ScanRecord]:
    """Fidelity surface for the four-node network with one noisy edge.

    Defaults: eta = 0, 1, ..., 64 by the Lindblad engine, against the
    time grid t = k pi/32 for k = 1..64, so the fidelity peak t = pi/4
    and the resonance t = 3 pi/2 sit exactly on grid points.
    """
    options = _fig_overrides(
        overrides or {},
        {"n": 4, "eta_values": list(range(0, 65)), "t_max": 2.0 * math.pi, "t_steps": 64},
    )
    n = _require_int(options["n"], "n", 4)
    t_steps = _require_int(options["t_steps"], "t_steps", 1)
    t_max = _require_number(options["t_max"], "t_max")
    etas = options["eta_values"]
    if not isinstance(etas, Sequence) or isinstance(etas, (str, bytes)) or not etas:
        raise ConfigError("eta_values", "must be a nonempty list of numbers")
    times = np.arange(1, t_steps + 1) * (t_max / t_steps)
    records: list[ScanRecord] = []
    for eta in etas:
        eta = _require_number(eta, "eta_values")
        config = ExperimentConfig(
            n=n, noisy_vertices=tuple(range(3, n + 1)[-(n - 2) :]), eta=eta, method="lindblad"
        )
        graph = complete_graph(n)
        ops = lindblad_edge_operators(graph, config.noise_spec(), 1, 2)
        liouville = lindblad.build_liouvillian(single_excitation_hamiltonian(graph), ops)
        start = lindblad.initial_network_state(n, 1, _PROBE)
        states = lindblad.evolve_at_times(liouville, start, times)
        for t, state in zip(times, states):
            params = lindblad.extract_channel(state, _PROBE, 1, 2)
            fidelity, _ = optimal_avg_fidelity(params)
            records.append(
                ScanRecord(
                    n=n,
                    m=n - 2,
                    eta=eta,
                    t=float(t),
                    fidelity=fidelity,
                    abs_z=abs(params.amplitude),
                    dephasing=params.dephasing,
                    delta=None,
                    method="lindblad",
                    seed=seed,
                )
            )
    return records


def run_scan_fig2(overrides: Mapping[str, object] | None = None, seed: int = 0) -> list[ScanRecord]:
    """Noise-benefit map over network size: Delta(t, n) at m = n - 2, eta = 0.01."""
    options = _fig_overrides(
        overrides or {},
        {"n_min": 4, "n_max": 12, "eta": 0.01, "t_max": 4.0 * math.pi, "t_steps": 200},
    )
    n_min = _require_int(options["n_min"], "n_min", 4)
    n_max = _require_int(options["n_max"], "n_max", n_min)
    eta = _require_number(options["eta"], "eta")
    t_steps = _require_int(options["t_steps"], "t_steps", 1)
    t_max = _require_number(options["t_max"], "t_max")
    times = np.arange(1, t_steps + 1) * (t_max / t_steps)
    records: list[ScanRecord] = []
    for n in range(n_min, n_max + 1):
        records.extend(_delta_records(n, n - 2, eta, times, seed))
    return records


def run_scan_fig3(overrides: Mapping[str, object] | None = None, seed: int = 0) -> list[ScanRecord]:
    """Noise-benefit map over noisy-set size: Delta(t, m) at n = 10, eta = 0.01."""
    options = _fig_overrides(
        overrides or {},
        {"n": 10, "m_values": list(range(2, 9)), "eta": 0.01, "t_max": 4.0 * math.pi, "t_steps": 200},
    )
    n = _require_int(options["n"], "n", 4)
    eta = _require_number(options["eta"], "eta")
    t_steps = _require_int(options["t_steps"], "t_steps", 1)
    t_max = _require_number(options["t_max"], "t_max")
    m_values = options["m_values"]
    if not isinstance(m_values, Sequence) or isinstance(m_values, (str, bytes)) or not m_values:
        raise ConfigError("m_values", "must be a nonempty list of integers")
    times = np.arange(1, t_steps + 1) * (t_max / t_steps)
    records: list[ScanRecord] = []
    for m in m_values:
        m = _require_int(m, "m_values", 0)
        records.extend(_delta_records(n, m, eta, times, seed))
    return records


def run_report(config: ReportConfig | None = None) -> tuple[str, str, bool]:
    """Consistency suite: returns (json_text, table_text, engines_disagree)."""
    report = consistency_report(config)
    return report.to_json(), report.to_text(), report.has_engine_mismatch


def _resolve_threads(flag: int | None) -> int:
    if flag is not None:
        if flag < 1:
            raise ConfigError("threads", "must be at least 1")
        return flag
    env = os.environ.get("SPINNET_THREADS", "").strip()
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError("threads", f"SPINNET_THREADS = {env!r} is not an integer") from None
        if value < 1:
            raise ConfigError("threads", "SPINNET_THREADS must be at least 1")
        return value
    return 1


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as err:
        raise ConfigError("config", f"cannot read {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError("config", f"{path} is not valid JSON: {err}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return raw


def _write_output(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _write_metadata(out_path: str | None, payload: dict) -> None:
    # sidecar lives next to the data file; stdout runs skip it
    if out_path is None:
        return
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    with open(out_path + ".meta.json", "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="spinnet",
        description="State-transfer experiments on noisy fully connected spin networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("simulate", "run one engine over a time grid"),
        ("fig1", "four-node fidelity surface F(t, eta)"),
        ("fig2", "noise-benefit map Delta(t, n) at m = n-2"),
        ("fig3", "noise-benefit map Delta(t, m) at n = 10"),
        ("report", "cross-oracle consistency suite"),
    ):
        cmd = sub.add_parser(name, help=blurb)
        cmd.add_argument("--config", help="JSON configuration file")
        cmd.add_argument("--out", help="output path (default: stdout)")
        cmd.add_argument("--seed", type=int, help="override the master seed")
        cmd.add_argument("--threads", type=int, help="worker threads (default: SPINNET_THREADS or 1)")
    args = parser.parse_args(argv)

    try:
        threads = _resolve_threads(args.threads)
        raw = _load_config_file(args.config)
        seed = args.seed if args.seed is not None else 0

        if args.command == "simulate":
            if args.seed is not None:
                raw = {**raw, "master_seed": args.seed}
            config = ExperimentConfig.from_dict(raw)
            records = run_simulate(config, threads=threads)
            _write_output(records_to_csv(records), args.out)
            _write_metadata(args.out, {"command": "simulate", "config": config.to_metadata()})
            return 0

        if args.command in ("fig1", "fig2", "fig3"):
            runner = {"fig1": run_scan_fig1, "fig2": run_scan_fig2, "fig3": run_scan_fig3}[
                args.command
            ]
            records = runner(raw, seed=seed)
            _write_output(records_to_csv(records), args.out)
            _write_metadata(
                args.out,
                {
                    "command": args.command,
                    "overrides": raw,
                    "seed": seed,
                    "time_axis": "open-start grid: t = k * t_max / t_steps, k = 1..t_steps",
                },
            )
            return 0

        # report
        known = {"n_traj", "dt", "seed", "threads"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        report_config = ReportConfig(
            n_traj=_require_int(raw.get("n_traj", 2000), "n_traj", 1),
            dt=_require_number(raw.get("dt", 1e-3), "dt"),
            seed=args.seed if args.seed is not None else _require_int(raw.get("seed", 20240817), "seed", 0),
            threads=threads,
        )
        json_text, table_text, engines_disagree = run_report(report_config)
        _write_output(json_text + "\n", args.out)
        if args.out is not None:
            sys.stdout.write(table_text + "\n")
        if engines_disagree:
            print("consistency report: engine-grade mismatch", file=sys.stderr)
            return 2
        return 0

    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        # engine-level argument rejections (step too coarse for the
        # rate, geometry violations) are configuration problems too
        print(f"configuration error: {err}", file=sys.stderr)
        return 1
    except RuntimeError as err:
        print(str(err), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
