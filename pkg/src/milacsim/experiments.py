"""Configuration-driven Monte-Carlo sweeps over SNR and antenna-count grids.

Channels are drawn from counter-based substreams keyed by (seed, antenna
point, trial); every scheme and every SNR point of a trial consumes the
identical realization (paired comparisons along both axes), and one row is
recorded per (scheme, grid point, trial). Results are fully deterministic
given the configuration seed, independent of worker count. With
``warm_start = true`` each scheme reuses its solution from the previous SNR
point of the same trial as the next initialization (default: fresh starts).

SNR convention: SNR = budget / (physical receiver noise power), with the
budget fixed by the config (default 1). The solvers consume the normalized
noise power, which is four times the physical one; the conversion happens
here.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channels as chans
from . import solvers
from .exceptions import ConfigError

CSV_HEADER = "scheme,N,K,snr_db,trial,seed,sum_rate_bits,iterations,converged,wall_time_ms"

SCHEMES = ("milac", "milac_fulldim", "digital")

_SOLVER_BY_SCHEME = {
    "milac": solvers.wmmse_lc,
    "milac_fulldim": solvers.wmmse_lc_fulldim,
    "digital": solvers.digital_wmmse,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one sweep."""

    n_antennas: int = 64
    n_users: int = 4
    channel: str = "rayleigh"
    paths: int = chans.DEFAULT_PATHS
    snr_grid_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    n_grid: tuple | None = None
    trials: int = 100
    seed: int = 1
    schemes: tuple = ("milac", "digital")
    power_budget: float = 1.0
    eps_out: float = 1e-6
    eps_in: float = 1e-6
    max_outer: int = 500
    max_inner: int = 2000
    out: str | None = None
    export_channels: bool = False
    warm_start: bool = False

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.snr_grid_db:
            raise ConfigError("snr_db grid must be nonempty")
        if self.channel not in ("rayleigh", "clustered"):
            raise ConfigError(f"unknown channel model '{self.channel}'")
        if self.channel == "clustered" and self.paths < 1:
            raise ConfigError("clustered channel needs at least one path")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        for scheme in self.schemes:
            if scheme not in SCHEMES:
                raise ConfigError(
                    f"unknown scheme '{scheme}' (expected one of {', '.join(SCHEMES)})"
                )
        for n in self.antenna_grid():
            if self.n_users > n:
                raise ConfigError(
                    f"K={self.n_users} exceeds N={n} somewhere on the antenna grid"
                )
        if self.power_budget <= 0:
            raise ConfigError("power budget must be positive")

    def antenna_grid(self) -> tuple:
        return tuple(self.n_grid) if self.n_grid else (self.n_antennas,)

    def solver_config(self, snr_db: float) -> solvers.SolverConfig:
        noise_physical = self.power_budget * 10.0 ** (-snr_db / 10.0)
        return solvers.SolverConfig(
            power_budget=self.power_budget,
            noise_var=4.0 * noise_physical,
            eps_out=self.eps_out,
            eps_in=self.eps_in,
            max_outer=self.max_outer,
            max_inner=self.max_inner,
        )


@dataclass(frozen=True)
class SweepRecord:
    """One (scheme, grid point, trial) outcome."""

    scheme: str
    n_antennas: int
    n_users: int
    snr_db: float
    trial: int
    seed: int
    sum_rate_bits: float
    iterations: int
    converged: bool
    wall_time_ms: float


@dataclass(frozen=True)
class SummaryRow:
    scheme: str
    n_antennas: int
    snr_db: float
    trials: int
    mean_rate: float
    stderr: float
    ratio_to_digital: float | None


# ---------------------------------------------------------------------------
# Config file parsing: flat key = value lines, lists in brackets, # comments.
# ---------------------------------------------------------------------------

_KEY_ALIASES = {
    "n": "n_antennas",
    "k": "n_users",
    "snr_db": "snr_grid_db",
    "l": "paths",
}

_INT_KEYS = {"n_antennas", "n_users", "paths", "trials", "seed", "max_outer", "max_inner"}
_FLOAT_KEYS = {"power_budget", "eps_out", "eps_in"}
_BOOL_KEYS = {"export_channels", "warm_start"}


def _parse_scalar(token: str):
    token = token.strip()
    low = token.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def parse_config(text: str) -> ScenarioConfig:
    """Parse the flat key=value grammar into a validated ScenarioConfig.

    Grammar: one ``key = value`` pair per line; ``#`` starts a comment;
    lists are bracketed, comma-separated (``snr_db = [0, 10, 20]``); the
    channel accepts ``rayleigh``, ``clustered``, or ``clustered(L)``.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        key = _KEY_ALIASES.get(key, key)
        val = val.strip()
        if val.startswith("[") and val.endswith("]"):
            items = [t for t in val[1:-1].split(",") if t.strip()]
            values[key] = tuple(_parse_scalar(t) for t in items)
        else:
            values[key] = _parse_scalar(val)

    if "channel" in values:
        chan = str(values["channel"])
        if chan.startswith("clustered(") and chan.endswith(")"):
            try:
                values["paths"] = int(chan[len("clustered(") : -1])
            except ValueError as exc:
                raise ConfigError(f"bad path count in '{chan}'") from exc
            values["channel"] = "clustered"

    known = set(ScenarioConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    for key in list(values):
        if key in _INT_KEYS:
            values[key] = int(values[key])
        elif key in _FLOAT_KEYS:
            values[key] = float(values[key])
        elif key in _BOOL_KEYS and not isinstance(values[key], bool):
            raise ConfigError(f"{key} must be true or false")
    if "snr_grid_db" in values:
        values["snr_grid_db"] = tuple(float(v) for v in values["snr_grid_db"])
    if "n_grid" in values:
        values["n_grid"] = tuple(int(v) for v in values["n_grid"])
    if "schemes" in values:
        schemes = values["schemes"]
        if isinstance(schemes, str):
            schemes = (schemes,)
        values["schemes"] = tuple(str(s) for s in schemes)

    try:
        config = ScenarioConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# Sweep execution.
# ---------------------------------------------------------------------------


def _draw_channel(config: ScenarioConfig, n: int, n_idx: int, trial: int):
    rng = chans.substream(config.seed, n_idx, trial)
    if config.channel == "rayleigh":
        return chans.rayleigh_channel(n, config.n_users, rng)
    params = chans.GeometricChannelParams(config.paths)
    return chans.clustered_channel(n, config.n_users, params, rng)


def _warm_init(scheme: str, result):
    if scheme == "digital":
        return result.state.y
    return result.state.y, result.state.p


def _run_cell(args) -> list:
    """Solve all schemes over the SNR grid for one (antenna count, trial) cell."""
    config, n, n_idx, trial, timing = args
    channel = _draw_channel(config, n, n_idx, trial)
    records = []
    warm: dict = {}
    for snr_db in config.snr_grid_db:
        cfg = config.solver_config(snr_db)
        for scheme in config.schemes:
            solver = _SOLVER_BY_SCHEME[scheme]
            init = warm.get(scheme) if config.warm_start else None
            start = time.perf_counter()
            try:
                result = solver(channel.h, cfg, init=init)
                rate = result.rate_bits
                iterations = result.iterations
                converged = result.converged
                if config.warm_start:
                    warm[scheme] = _warm_init(scheme, result)
            except Exception:
                rate, iterations, converged = 0.0, 0, False
            elapsed_ms = (time.perf_counter() - start) * 1e3 if timing else 0.0
            records.append(
                SweepRecord(
                    scheme=scheme,
                    n_antennas=n,
                    n_users=config.n_users,
                    snr_db=snr_db,
                    trial=trial,
                    seed=config.seed,
                    sum_rate_bits=rate,
                    iterations=iterations,
                    converged=converged,
                    wall_time_ms=elapsed_ms,
                )
            )
    return records


def run_sweep(config: ScenarioConfig, threads: int = 1, timing: bool = True) -> list:
    """Run every (scheme, grid point, trial) cell and return sorted records.

    ``threads`` > 1 fans (antenna point, trial) cells out over worker
    processes; results are merged in canonical order so the output is
    identical regardless of parallelism. ``timing=False`` zeroes
    wall_time_ms, making the CSV byte-reproducible.
    """
    config.validate()
    tasks = [
        (config, n, n_idx, trial, timing)
        for n_idx, n in enumerate(config.antenna_grid())
        for trial in range(config.trials)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_cell, tasks, chunksize=4))
    else:
        chunks = [_run_cell(task) for task in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.scheme, r.n_antennas, r.snr_db, r.trial))
    return records


# ---------------------------------------------------------------------------
# CSV emission and parsing.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def format_records(records) -> str:
    if not records:
        raise ValueError("no records to emit")
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    r.scheme,
                    str(r.n_antennas),
                    str(r.n_users),
                    _fmt(r.snr_db),
                    str(r.trial),
                    str(r.seed),
                    _fmt(r.sum_rate_bits),
                    str(r.iterations),
                    "true" if r.converged else "false",
                    _fmt(r.wall_time_ms),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def emit_csv(records, path) -> None:
    """Write records with a fixed header, 17-significant-digit floats, LF endings."""
    text = format_records(records)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def parse_csv(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header in {path}")
    records = []
    for line in lines[1:]:
        f = line.split(",")
        records.append(
            SweepRecord(
                scheme=f[0],
                n_antennas=int(f[1]),
                n_users=int(f[2]),
                snr_db=float(f[3]),
                trial=int(f[4]),
                seed=int(f[5]),
                sum_rate_bits=float(f[6]),
                iterations=int(f[7]),
                converged=(f[8] == "true"),
                wall_time_ms=float(f[9]),
            )
        )
    return records


def export_channel_csv(config: ScenarioConfig, path) -> None:
    """Write every channel realization of the sweep as complex literals.

    One row per (antenna count, trial); realizations are shared across the
    SNR grid. Row format: ``N,K,trial,rows,cols,v0,v1,...`` with entries in
    row-major order, each formatted as ``re+imj`` (parseable by complex()).
    Intended for cross-implementation regression of the channel draws.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("N,K,trial,rows,cols,entries_row_major\n")
        for n_idx, n in enumerate(config.antenna_grid()):
            for trial in range(config.trials):
                h = _draw_channel(config, n, n_idx, trial).h
                entries = ",".join(format_complex(v) for v in h.ravel())
                fh.write(
                    f"{n},{config.n_users},{trial},"
                    f"{h.shape[0]},{h.shape[1]},{entries}\n"
                )


def parse_channel_csv(path) -> list:
    """Read back a channel export: (N, K, trial, H) tuples."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for line in lines[1:]:
        if not line:
            continue
        f = line.split(",")
        rows, cols = int(f[3]), int(f[4])
        entries = np.asarray([complex(tok) for tok in f[5:]])
        out.append((int(f[0]), int(f[1]), int(f[2]), entries.reshape(rows, cols)))
    return out


def format_complex(value: complex) -> str:
    return f"{value.real:.17g}{value.imag:+.17g}j"


def write_complex_matrix_csv(matrix: np.ndarray, path) -> None:
    """Debug dump of one complex matrix, one row per matrix row."""
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in np.atleast_2d(matrix):
            fh.write(",".join(format_complex(v) for v in row) + "\n")


def read_complex_matrix_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        rows = [
            [complex(tok) for tok in line.split(",")]
            for line in fh.read().splitlines()
            if line
        ]
    return np.asarray(rows, dtype=complex)


# ---------------------------------------------------------------------------
# Aggregation.
# ---------------------------------------------------------------------------


def summarize(records) -> list:
    """Per-(scheme, N, snr) means and standard errors, plus scheme/digital ratios."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r.scheme, r.n_antennas, r.snr_db), []).append(r.sum_rate_bits)
    means = {key: float(np.mean(vals)) for key, vals in groups.items()}
    rows = []
    for (scheme, n, snr), vals in sorted(groups.items()):
        arr = np.asarray(vals)
        stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        digital = means.get(("digital", n, snr))
        ratio = None
        if digital is not None and scheme != "digital" and digital > 0:
            ratio = means[(scheme, n, snr)] / digital
        rows.append(
            SummaryRow(
                scheme=scheme,
                n_antennas=n,
                snr_db=snr,
                trials=arr.size,
                mean_rate=means[(scheme, n, snr)],
                stderr=stderr,
                ratio_to_digital=ratio,
            )
        )
    return rows


def format_summary(rows) -> str:
    header = f"{'scheme':<15}{'N':>6}{'snr_db':>9}{'trials':>8}{'mean_bits':>14}{'stderr':>12}{'vs_digital':>12}"
    lines = [header]
    for row in rows:
        ratio = f"{row.ratio_to_digital:.4f}" if row.ratio_to_digital is not None else "-"
        lines.append(
            f"{row.scheme:<15}{row.n_antennas:>6}{row.snr_db:>9.1f}{row.trials:>8}"
            f"{row.mean_rate:>14.6f}{row.stderr:>12.6f}{ratio:>12}"
        )
    return "\n".join(lines)


def write_plots(records, out_prefix) -> list:
    """Emit vector-graphics mean-rate curves; returns the written paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = summarize(records)
    paths = []
    antenna_counts = sorted({row.n_antennas for row in rows})
    snrs = sorted({row.snr_db for row in rows})
    schemes = sorted({row.scheme for row in rows})

    if len(snrs) > 1:
        for n in antenna_counts:
            fig, ax = plt.subplots(figsize=(5, 3.5))
            for scheme in schemes:
                pts = [(r.snr_db, r.mean_rate) for r in rows if r.scheme == scheme and r.n_antennas == n]
                if pts:
                    xs, ys = zip(*sorted(pts))
                    ax.plot(xs, ys, marker="o", label=scheme)
            ax.set_xlabel("SNR (dB)")
            ax.set_ylabel("mean sum rate (bits)")
            ax.set_title(f"N = {n}")
            ax.grid(True, alpha=0.4)
            ax.legend()
            path = f"{out_prefix}_rate_vs_snr_N{n}.svg"
            fig.savefig(path, bbox_inches="tight")
            plt.close(fig)
            paths.append(path)
    if len(antenna_counts) > 1:
        for snr in snrs:
            fig, ax = plt.subplots(figsize=(5, 3.5))
            for scheme in schemes:
                pts = [(r.n_antennas, r.mean_rate) for r in rows if r.scheme == scheme and r.snr_db == snr]
                if pts:
                    xs, ys = zip(*sorted(pts))
                    ax.semilogx(xs, ys, marker="o", label=scheme)
            ax.set_xlabel("transmit antennas")
            ax.set_ylabel("mean sum rate (bits)")
            ax.set_title(f"SNR = {snr:g} dB")
            ax.grid(True, alpha=0.4)
            ax.legend()
            path = f"{out_prefix}_rate_vs_N_snr{snr:g}.svg"
            fig.savefig(path, bbox_inches="tight")
            plt.close(fig)
            paths.append(path)
    return paths
