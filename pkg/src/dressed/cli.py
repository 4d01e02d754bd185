"""Command-line interface: `dressed <command> --config <file> [--out DIR]`.

Commands: moments, spectrum, correlations, chi-check, oracle-compare, pair.
Configs are flat key=value lines ('#' comments allowed) with section
prefixes model., grid., quad., cmd.; unknown keys are rejected so typos
cannot silently fall back to defaults.  Every CSV starts with a '#'-prefixed
metadata block carrying the full configuration, so a result file is
re-runnable on its own.  Output is deterministic: floats print with 17
significant digits, no timestamps, files appear atomically (temp + rename).

Exit codes: 0 success, 1 configuration, 2 physics threshold, 3 numerics.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import plotting
from .chifunc import default_grid, moment_by_differentiation
from .errors import ConfigError, DressedError, NumericalError, ThresholdError
from .fano import pi_distribution, resonance
from .model import (
    ModelParams,
    derived_frequencies,
    omega_in_figure_units,
    threshold_frequency,
)
from .observables import (
    atom_field_correlations,
    compute_moments,
    photon_spectral_density,
    x_b_plus_values,
    field_coherence,
)
from .oracle import convergence_study
from .pair import (
    PairParams,
    pair_correlations,
    pair_ground_energy,
    pair_single_oscillator_energy,
)

VERSION = "0.1.0"

COMMANDS = ("moments", "spectrum", "correlations", "chi-check",
            "oracle-compare", "pair")

_KNOWN_KEYS = {
    "model.omega0", "model.coupling_scale", "model.omega_c", "model.units",
    "grid.min", "grid.max", "grid.points", "grid.spacing",
    "quad.rel_tol", "quad.abs_tol", "quad.truncation", "quad.panels",
    "cmd.sweep_omega0", "cmd.defect_target",
    "cmd.frequency", "cmd.step", "cmd.tolerance",
    "cmd.m_list",
    "cmd.g_list", "cmd.mass",
}

# frozen probe sets for the oracle comparison, in units of omega_c;
# measured so discretization error dominates roundoff at every M
ORACLE_DENSITY_PROBES = (0.15, 0.25, 0.35, 0.45, 0.6, 0.8, 1.1, 1.5, 2.2, 3.3)
ORACLE_COHERENCE_PROBES = ((0.4, 1.1), (0.5, 1.0), (0.7, 1.2),
                           (1.0, 2.0), (1.3, 2.6))
ORACLE_CORRELATION_PROBES = (0.2, 0.42, 0.7, 1.5, 3.0)


@dataclass
class RunConfig:
    """Parsed and validated key=value configuration."""

    params: ModelParams
    raw: dict = field(default_factory=dict)

    def get(self, key: str, default=None):
        return self.raw.get(key, default)

    def get_float(self, key: str, default: float) -> float:
        val = self.raw.get(key)
        if val is None:
            return default
        try:
            return float(val)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {val!r}") from None

    def get_int(self, key: str, default: int) -> int:
        val = self.raw.get(key)
        if val is None:
            return default
        try:
            return int(val)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {val!r}") from None

    def get_floats(self, key: str, default: tuple) -> tuple:
        val = self.raw.get(key)
        if val is None:
            return default
        try:
            return tuple(float(tok) for tok in val.split(",") if tok.strip())
        except ValueError:
            raise ConfigError(
                f"{key} must be comma-separated numbers, got {val!r}"
            ) from None

    def get_ints(self, key: str, default: tuple) -> tuple:
        return tuple(int(round(v)) for v in self.get_floats(
            key, tuple(float(v) for v in default)))


def parse_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value

    for required in ("model.omega0", "model.coupling_scale"):
        if required not in raw:
            raise ConfigError(f"config is missing required key {required}")
    try:
        params = ModelParams(
            omega0=float(raw["model.omega0"]),
            coupling_scale=float(raw["model.coupling_scale"]),
            omega_c=float(raw.get("model.omega_c", "1.0")),
            units_mode=raw.get("model.units", "reduced"),
        )
    except ValueError as exc:
        raise ConfigError(f"malformed model numbers: {exc}") from None
    spacing = raw.get("grid.spacing", "log")
    if spacing not in ("log", "linear"):
        raise ConfigError(f"grid.spacing must be log or linear, got {spacing!r}")
    return RunConfig(params=params, raw=raw)


def output_grid(cfg: RunConfig, default_lo: float, default_hi: float,
                default_points: int) -> np.ndarray:
    lo = cfg.get_float("grid.min", default_lo)
    hi = cfg.get_float("grid.max", default_hi)
    n = cfg.get_int("grid.points", default_points)
    if not (0.0 < lo < hi):
        raise ConfigError(f"grid range must satisfy 0 < min < max, got [{lo}, {hi}]")
    if n < 2:
        raise ConfigError(f"grid.points must be >= 2, got {n}")
    if cfg.get("grid.spacing", "log") == "linear":
        return np.linspace(lo, hi, n)
    return np.geomspace(lo, hi, n)


# ---------------------------------------------------------------------------
# deterministic emission
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return str(value)


def write_atomic(path: str, data: bytes):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-dressed-")
    try:
        os.fchmod(fd, 0o644)
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, meta: dict, columns, rows):
    lines = [f"# {key}={_fmt(val)}" for key, val in meta.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(cell) for cell in row))
    write_atomic(path, ("\n".join(lines) + "\n").encode("utf-8"))


def base_metadata(command: str, cfg: RunConfig) -> dict:
    meta = {"command": command, "version": VERSION}
    for key in sorted(cfg.raw):
        meta[key] = cfg.raw[key]
    p = cfg.params
    meta.update({
        "resolved.omega0": p.omega0, "resolved.coupling_scale": p.coupling_scale,
        "resolved.omega_c": p.omega_c, "resolved.units": p.units_mode,
    })
    return meta


def _thread_count() -> int:
    raw = os.environ.get("DRESSED_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"DRESSED_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise ConfigError("DRESSED_THREADS must be >= 1")
        return n
    return min(4, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_moments(cfg: RunConfig, out_dir: str) -> int:
    params = cfg.params
    freqs = derived_frequencies(params)
    omega_t_quad = threshold_frequency(params, method="quadrature")
    mom = compute_moments(params)
    meta = base_metadata("moments", cfg)
    meta["omega_T_quadrature"] = omega_t_quad
    columns = ["omega0", "omega_c", "A", "omega_T", "omega0_renorm",
               "avg_omega", "avg_inv_omega", "var_x", "var_p",
               "uncertainty_product", "atom_energy", "mean_excitation",
               "a_squared"]
    row = [params.omega0, params.omega_c, params.reduced_amplitude,
           freqs.omega_t, freqs.omega0_renorm,
           mom.avg_omega, mom.avg_inv_omega,
           mom.var_x_quadrature, mom.var_p_quadrature,
           mom.uncertainty_product,
           # in units of the bare level spacing: 0.5 exactly when uncoupled
           mom.atom_energy / params.omega0,
           mom.mean_excitation, mom.a_squared]
    write_csv(os.path.join(out_dir, "moments.csv"), meta, columns, [row])
    print("wrote moments.csv")
    return 0


def _spectrum_member(params: ModelParams, cfg: RunConfig):
    target = cfg.get_float("cmd.defect_target", 2e-7)
    base = None
    if any(k in cfg.raw for k in ("grid.min", "grid.max", "grid.points")):
        res = resonance(params)
        base = output_grid(cfg, res.omega_peak / 100.0,
                           50.0 * params.omega_c, 400)
    pi = pi_distribution(params, grid=base, target_defect=target)
    spec = photon_spectral_density(params, pi, pi.grid)
    return pi, spec


def cmd_spectrum(cfg: RunConfig, out_dir: str) -> int:
    sweep = cfg.get_floats("cmd.sweep_omega0", (cfg.params.omega0,))
    if not sweep:
        raise ConfigError("cmd.sweep_omega0 must list at least one frequency")
    members = [replace(cfg.params, omega0=val) for val in sweep]

    def job(params):
        return _spectrum_member(params, cfg)

    if len(members) > 1:
        with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
            results = list(pool.map(job, members))
    else:
        results = [job(members[0])]

    curves = []
    for index, (params, (pi, spec)) in enumerate(zip(members, results), start=1):
        meta = base_metadata("spectrum", cfg)
        freqs = derived_frequencies(params)
        meta.update({
            "member.omega0": params.omega0,
            "member.omega_T": freqs.omega_t,
            "member.omega0_renorm": freqs.omega0_renorm,
            "member.pi_norm": pi.norm,
            "member.pi_tail_low": pi.tail_low,
            "member.pi_tail_high": pi.tail_high,
            "member.total_number": spec.total_number,
            "member.total_energy": spec.total_energy,
        })
        rows = list(zip(
            pi.grid,
            omega_in_figure_units(params, pi.grid),
            pi.values,
            spec.density,
            spec.spectrum,
        ))
        name = f"spectrum_{index:02d}.csv"
        write_csv(os.path.join(out_dir, name), meta,
                  ["omega", "omega_in_figure_units", "pi", "N", "S"], rows)
        print(f"wrote {name} (omega0={params.omega0:g})")
        curves.append({
            "omega": pi.grid / params.omega_c,
            "density": spec.density,
            "spectrum": spec.spectrum,
            "label": f"omega0={params.omega0:g}",
        })
    write_atomic(os.path.join(out_dir, "spectrum.png"),
                 plotting.spectrum_figure(curves))
    print("wrote spectrum.png")
    return 0


def cmd_correlations(cfg: RunConfig, out_dir: str) -> int:
    params = cfg.params
    grid = output_grid(cfg, 0.05 * params.omega_c, 5.0 * params.omega_c, 40)
    cors = atom_field_correlations(params, None, grid)
    meta = base_metadata("correlations", cfg)
    meta["z_E"] = cors.z_e
    meta["dz_dE"] = cors.dz_de
    rows = [
        (w, xb, pb, c1, c2, ab.real, ab.imag)
        for w, xb, pb, c1, c2, ab in zip(
            cors.grid, cors.x_b_plus, cors.p_b_minus,
            cors.cross_zero_1, cors.cross_zero_2, cors.cross_ab)
    ]
    write_csv(os.path.join(out_dir, "correlations.csv"), meta,
              ["omega", "x_b_plus", "p_b_minus", "cross_zero_1",
               "cross_zero_2", "cross_ab_re", "cross_ab_im"], rows)
    coh_rows = []
    for i, wi in enumerate(cors.coherence_grid):
        for j, wj in enumerate(cors.coherence_grid):
            coh_rows.append((wi, wj, cors.coherence_bb[i, j]))
    write_csv(os.path.join(out_dir, "coherence.csv"), meta,
              ["omega", "omega_prime", "bb"], coh_rows)
    write_atomic(os.path.join(out_dir, "correlations.png"),
                 plotting.correlations_figure(
                     cors.grid / params.omega_c, cors.x_b_plus, cors.p_b_minus))
    print("wrote correlations.csv, coherence.csv, correlations.png")
    return 0


def cmd_chi_check(cfg: RunConfig, out_dir: str) -> int:
    params = cfg.params
    tol = cfg.get_float("cmd.tolerance", 1e-5)
    step = cfg.get_float("cmd.step", 1e-3)
    freq = cfg.get_float("cmd.frequency", 0.8 * params.omega_c)
    grid = default_grid(params)
    mom = compute_moments(params)
    if params.coupling_scale == 0.0:
        density_direct = 0.0
    else:
        density_direct = float(photon_spectral_density(
            params, None, np.array([freq])).density[0])
    checks = [
        ("a", 0.0, moment_by_differentiation(params, "a", grid=grid, step=step)),
        ("a_squared", mom.a_squared,
         moment_by_differentiation(params, "a_squared", grid=grid, step=step)),
        ("a_dagger_a", mom.mean_excitation,
         moment_by_differentiation(params, "a_dagger_a", grid=grid, step=step)),
        ("b_dagger_b", density_direct,
         moment_by_differentiation(params, "b_dagger_b", frequency=freq,
                                   grid=grid, step=step)),
    ]
    meta = base_metadata("chi-check", cfg)
    meta["probe_frequency"] = freq
    rows = []
    failures = 0
    for name, direct, extracted in checks:
        dev = abs(extracted - direct)
        status = "PASS" if dev <= tol * max(1.0, abs(direct)) else "FAIL"
        failures += status == "FAIL"
        rows.append((name, direct, extracted.real, extracted.imag, dev,
                     tol, status))
    write_csv(os.path.join(out_dir, "chi_check.csv"), meta,
              ["moment", "direct", "extracted_re", "extracted_im",
               "abs_deviation", "tolerance", "status"], rows)
    print(f"wrote chi_check.csv ({len(rows) - failures}/{len(rows)} PASS)")
    if failures:
        raise NumericalError(
            f"{failures} chi-extracted moment(s) deviate beyond {tol:g}"
        )
    return 0


def cmd_oracle_compare(cfg: RunConfig, out_dir: str) -> int:
    params = cfg.params
    m_list = cfg.get_ints("cmd.m_list", (500, 1000, 2000, 4000))
    if any(m < 2 for m in m_list):
        raise ConfigError("cmd.m_list entries must be >= 2")
    wc = params.omega_c
    mom = compute_moments(params)
    density_probes = [f * wc for f in ORACLE_DENSITY_PROBES]
    coherence_probes = [(a * wc, b * wc) for a, b in ORACLE_COHERENCE_PROBES]
    correlation_probes = [f * wc for f in ORACLE_CORRELATION_PROBES]
    reference = {
        "mean_excitation": mom.mean_excitation,
        "a_squared": mom.a_squared,
        "var_x": mom.var_x_quadrature,
        "var_p": mom.var_p_quadrature,
        "density": lambda nodes: photon_spectral_density(
            params, None, np.asarray(nodes)).density,
        "coherence_bb": lambda f1, f2: field_coherence(params, f1, f2).real,
        "x_b_plus": lambda nodes: x_b_plus_values(params, np.asarray(nodes)),
    }
    rows = convergence_study(params, m_list, reference, density_probes,
                             coherence_probes, correlation_probes)
    keys = ["mean_excitation", "a_squared", "var_x", "var_p",
            "density", "coherence_bb", "x_b_plus"]
    monotone = all(
        rows[i + 1][key] <= rows[i][key]
        for key in keys for i in range(len(rows) - 1)
    )
    meta = base_metadata("oracle-compare", cfg)
    meta["monotone"] = monotone
    write_csv(os.path.join(out_dir, "oracle_compare.csv"), meta,
              ["m"] + keys,
              [[r["m"]] + [r[k] for k in keys] for r in rows])
    write_atomic(os.path.join(out_dir, "oracle_compare.png"),
                 plotting.convergence_figure(rows, keys))
    print(f"wrote oracle_compare.csv, oracle_compare.png (monotone={monotone})")
    return 0


def cmd_pair(cfg: RunConfig, out_dir: str) -> int:
    g_list = cfg.get_floats("cmd.g_list", (0.0, 0.3, 0.6, 0.9))
    mass = cfg.get_float("cmd.mass", 1.0)
    rows = []
    for g in g_list:
        p = PairParams(m=mass, omega0=cfg.params.omega0, g=g)
        cor = pair_correlations(p)
        rows.append((g, pair_ground_energy(p),
                     pair_single_oscillator_energy(p),
                     cor.xx, cor.pp, cor.xp, cor.px))
    meta = base_metadata("pair", cfg)
    meta["mass"] = mass
    write_csv(os.path.join(out_dir, "pair.csv"), meta,
              ["g", "ground_energy", "single_oscillator_energy",
               "xx", "pp", "xp", "px"], rows)
    print("wrote pair.csv")
    return 0


_DISPATCH = {
    "moments": cmd_moments,
    "spectrum": cmd_spectrum,
    "correlations": cmd_correlations,
    "chi-check": cmd_chi_check,
    "oracle-compare": cmd_oracle_compare,
    "pair": cmd_pair,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dressed",
        description="Ground-state observables of a harmonically bound "
                    "charge dressed by its field",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="key=value config file")
    parser.add_argument("--out", default=".", help="output directory")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = parse_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        return _DISPATCH[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ThresholdError as exc:
        print(f"threshold violation: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except DressedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
