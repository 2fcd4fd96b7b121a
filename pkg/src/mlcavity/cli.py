"""Command-line interface: configs in, CSV/JSON artifacts out.

Configs are INI files with units carried in key names (``g0_kHz``,
``delta_p_MHz``); frequencies are entered as ordinary frequencies and
converted by 2 pi internally.  Every run writes its outputs atomically and
drops a JSON manifest with the fully resolved config, so identical
invocations produce byte-identical files and a manifest can be re-run.

Exit codes: 0 ok, 2 config error, 3 integration failure, 4 degenerate
parameters.
"""

from __future__ import annotations

import argparse
import configparser
import copy
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from importlib import resources

import numpy as np

from . import __version__, meanfield, pumping, scenarios, spectra
from .levels import LevelScheme, TransitionGeometry, coupling_set
from .ode import StiffnessError
from .pumping import DegenerateParameterError

_TWO_PI = 2 * math.pi


class ConfigError(ValueError):
    """Invalid or inconsistent configuration; maps to exit code 2."""


# Every key the CLI understands, with its default value as a string.
# Unknown sections or keys in a config file are rejected with a
# field-level message rather than silently ignored.
DEFAULTS: dict[str, dict[str, str]] = {
    "scheme": {
        "two_fg": "4",
        "two_fe": "6",
        "geometry": "pi",
        "g0_kHz": "210.0",
        "gamma_MHz": "6.065",
    },
    "cavity": {
        "kappa_MHz": "6.7",
        "frequency_THz": "384.2304844685",
        "round_trip_m": "0.1",
        "mirror_transmission": "0.015",
    },
    "drive": {
        "p_cav_nW": "2.4",
        "delta_p_MHz": "24.0",
        "eta_over_kappa": "",  # empty: derive eta from p_cav_nW
    },
    "cloud": {
        "n0": "11200.0",
        "n0_per_detuning": "",  # e.g. "-24:10600, -15:9200, 15:10500, 24:11200"
        "temperature_uK": "75.0",
        "sigma0_um": "200.0",
        "waist_um": "80.0",
    },
    "dynamics": {
        "t_end_ms": "5.0",
        "n_out": "1001",
        "rtol": "1e-8",
        "atol": "1e-10",
    },
    "spectrum": {
        "mode": "scan",  # scan | coupling-table
        "n_atoms": "11200.0",
        "populations": "equal",  # equal | steady
        "delta_min_MHz": "-25.0",
        "delta_max_MHz": "25.0",
        "n_points": "2001",
    },
    "rates": {
        "c_minus_sq": "0.3333333333333333",
        "c_plus_sq": "1.0",
        "gamma_MHz": "6.065",
        "kappa_MHz": "6.065",
        "n_atoms": "10000.0",
        "coupling_ratio": "10.0",  # g0 sqrt(N) / Gamma
        "weak_ratio": "0.01",
        "delta_a_over_gn": "0.0",
        "eta_over_kappa": "0.1",
        "t_end_gamma_eff": "6.0",  # horizon in units of 1 / Gamma_eff
        "n_out": "401",
        "landscape": "false",  # also emit the alpha/beta sweep + traces
        "grid_min": "-3.0",
        "grid_max": "3.0",
        "grid_points": "601",
    },
    "sweep": {
        "observable": "splitting_MHz",  # splitting_MHz | intensity | max_rho_ee
        "param_x": "spectrum.n_atoms",
        "x_start": "11200.0",
        "x_stop": "11200.0",
        "x_points": "1",
        "param_y": "drive.delta_p_MHz",
        "y_start": "24.0",
        "y_stop": "24.0",
        "y_points": "1",
    },
}

_MAX_SWEEP_POINTS = 1_000_000


# --------------------------------------------------------------------------
# config handling


def _load_file(path: str) -> dict[str, dict[str, str]]:
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        cfg = manifest.get("config")
        if not isinstance(cfg, dict):
            raise ConfigError(f"{path}: manifest has no 'config' object")
        return {s: {k: str(v) for k, v in kv.items()} for s, kv in cfg.items()}
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys carry units in their case (MHz, uK)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _preset_path(name: str):
    ref = resources.files("mlcavity").joinpath("presets", f"{name}.cfg")
    if not ref.is_file():
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return ref


def preset_names() -> list[str]:
    base = resources.files("mlcavity").joinpath("presets")
    return sorted(p.name[:-4] for p in base.iterdir() if p.name.endswith(".cfg"))


def _merge(cfg: dict, updates: dict[str, dict[str, str]], origin: str) -> None:
    for sec, kv in updates.items():
        if sec not in cfg:
            raise ConfigError(f"{origin}: unknown config section [{sec}]")
        for key, value in kv.items():
            if key not in cfg[sec]:
                raise ConfigError(f"{origin}: unknown key {key!r} in section [{sec}]")
            cfg[sec][key] = value


def resolve_config(
    config_path: str | None,
    preset: str | None,
    overrides: list[str],
) -> dict[str, dict[str, str]]:
    """Materialize all defaults, then apply preset, file and --set overrides."""
    cfg = copy.deepcopy(DEFAULTS)
    if preset:
        with resources.as_file(_preset_path(preset)) as p:
            _merge(cfg, _load_file(str(p)), f"preset {preset}")
    if config_path:
        _merge(cfg, _load_file(config_path), config_path)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        sec, key = dotted.split(".", 1)
        _merge(cfg, {sec: {key: value}}, "--set")
    return cfg


def _getf(cfg: dict, sec: str, key: str) -> float:
    raw = cfg[sec][key]
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: expected a number, got {raw!r}") from exc


def _geti(cfg: dict, sec: str, key: str) -> int:
    raw = cfg[sec][key]
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: expected an integer, got {raw!r}") from exc


def _getlist(cfg: dict, sec: str, key: str) -> list[float]:
    raw = cfg[sec][key]
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: expected numbers, got {raw!r}") from exc


def _scheme_from(cfg: dict) -> LevelScheme:
    geom_raw = cfg["scheme"]["geometry"].strip().lower()
    geometries = {
        "pi": TransitionGeometry.PI,
        "sigma+": TransitionGeometry.SIGMA_PLUS,
        "sigma_plus": TransitionGeometry.SIGMA_PLUS,
        "sigma-": TransitionGeometry.SIGMA_MINUS,
        "sigma_minus": TransitionGeometry.SIGMA_MINUS,
    }
    if geom_raw not in geometries:
        raise ConfigError(f"[scheme] geometry: unknown geometry {geom_raw!r}")
    try:
        return LevelScheme(
            two_fg=_geti(cfg, "scheme", "two_fg"),
            two_fe=_geti(cfg, "scheme", "two_fe"),
            geometry=geometries[geom_raw],
            g0=_TWO_PI * _getf(cfg, "scheme", "g0_kHz") * 1e3,
            gamma=_TWO_PI * _getf(cfg, "scheme", "gamma_MHz") * 1e6,
        )
    except ValueError as exc:
        raise ConfigError(f"[scheme]: {exc}") from exc


def _experiment_from(cfg: dict) -> scenarios.ExperimentConfig:
    kappa = _TWO_PI * _getf(cfg, "cavity", "kappa_MHz") * 1e6
    omega = _TWO_PI * _getf(cfg, "cavity", "frequency_THz") * 1e12
    round_trip = _getf(cfg, "cavity", "round_trip_m")
    eta_raw = cfg["drive"]["eta_over_kappa"].strip()
    if eta_raw:
        # translate the requested pump rate back into the equivalent
        # resonant circulating power the scenario config carries
        eta = float(eta_raw) * kappa
        from scipy.constants import c as c_light
        from scipy.constants import hbar

        p_cav = (eta / kappa) ** 2 * hbar * omega * c_light / round_trip
    else:
        p_cav = _getf(cfg, "drive", "p_cav_nW") * 1e-9
    try:
        return scenarios.ExperimentConfig(
            scheme=_scheme_from(cfg),
            kappa=kappa,
            delta_p_mhz=tuple(_getlist(cfg, "drive", "delta_p_MHz")),
            n0=_getf(cfg, "cloud", "n0"),
            temperature=_getf(cfg, "cloud", "temperature_uK") * 1e-6,
            sigma0=_getf(cfg, "cloud", "sigma0_um") * 1e-6,
            waist=_getf(cfg, "cloud", "waist_um") * 1e-6,
            p_cav=p_cav,
            round_trip=round_trip,
            mirror_transmission=_getf(cfg, "cavity", "mirror_transmission"),
            omega=omega,
            t_span=(0.0, _getf(cfg, "dynamics", "t_end_ms") * 1e-3),
            n_out=_geti(cfg, "dynamics", "n_out"),
            rtol=_getf(cfg, "dynamics", "rtol"),
            atol=_getf(cfg, "dynamics", "atol"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _n0_map(cfg: dict) -> dict[float, float]:
    raw = cfg["cloud"]["n0_per_detuning"].strip()
    if not raw:
        return {}
    out: dict[float, float] = {}
    for chunk in raw.split(","):
        if not chunk.strip():
            continue
        try:
            dp, n0 = chunk.split(":")
            out[float(dp)] = float(n0)
        except ValueError as exc:
            raise ConfigError(
                f"[cloud] n0_per_detuning: expected 'dp:n0' pairs, got {chunk!r}"
            ) from exc
    return out


# --------------------------------------------------------------------------
# output helpers


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(
    path: str,
    header: list[str],
    rows,
    metadata: dict[str, str] | None = None,
) -> None:
    lines = [f"# {k} = {v}" for k, v in (metadata or {}).items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_manifest(
    outdir: str,
    command: str,
    cfg: dict,
    outputs: list[str],
    wall_time: float,
    extra: dict | None = None,
) -> None:
    manifest = {
        "tool": "mlcavity",
        "version": __version__,
        "command": command,
        "config": cfg,
        "outputs": outputs,
        "wall_time_s": wall_time,
    }
    manifest.update(extra or {})
    _atomic_write(
        os.path.join(outdir, "manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )


def _m_label(two_m: int) -> str:
    return str(two_m // 2) if two_m % 2 == 0 else f"{two_m}/2"


def _base_metadata(command: str) -> dict[str, str]:
    return {"tool": f"mlcavity {__version__}", "command": command}


# --------------------------------------------------------------------------
# subcommands


def cmd_spectrum(cfg: dict, outdir: str, args) -> int:
    t_start = time.perf_counter()
    scheme = _scheme_from(cfg)
    outputs: list[str] = []
    extra: dict = {}

    if cfg["spectrum"]["mode"].strip() == "coupling-table":
        rows = scenarios.scenario_fig2(scheme)
        path = os.path.join(outdir, "coupling_table.csv")
        _write_csv(
            path,
            ["label", "g_eff_sq_over_g0_sq"],
            [(label, value) for label, value in rows],
            _base_metadata("spectrum"),
        )
        outputs.append("coupling_table.csv")
        for label, value in rows:
            print(f"{label}: g_eff^2/g0^2 = {value:.6f}")
    elif cfg["spectrum"]["mode"].strip() == "scan":
        couplings = coupling_set(scheme)
        n_atoms = _getf(cfg, "spectrum", "n_atoms")
        if n_atoms < 0:
            raise ConfigError("[spectrum] n_atoms must be nonnegative")
        pop_kind = cfg["spectrum"]["populations"].strip()
        if pop_kind == "equal":
            pops = {m: 1.0 / len(couplings.ground) for m in couplings.ground}
        elif pop_kind == "steady":
            pops = scenarios.steady_state_populations(scheme)
        else:
            raise ConfigError(
                f"[spectrum] populations: expected equal|steady, got {pop_kind!r}"
            )
        n_points = _geti(cfg, "spectrum", "n_points")
        if n_points < 2:
            raise ConfigError("[spectrum] n_points must be at least 2")
        lo = _getf(cfg, "spectrum", "delta_min_MHz")
        hi = _getf(cfg, "spectrum", "delta_max_MHz")
        if hi <= lo:
            raise ConfigError("[spectrum] delta_max_MHz must exceed delta_min_MHz")
        grid = _TWO_PI * 1e6 * np.linspace(lo, hi, n_points)
        exp = _experiment_from(cfg)
        eta = scenarios.eta_from_power(exp.p_cav, exp.kappa, exp.omega, exp.round_trip)
        drive = meanfield.DriveParams(
            eta=eta, delta_a=0.0, delta_c=0.0, kappa=exp.kappa
        )
        scan = spectra.transmission_spectrum(
            drive, scheme.gamma, n_atoms, couplings, pops, grid
        )
        power = [
            spectra.transmitted_power(
                i, exp.omega, exp.round_trip, exp.mirror_transmission
            )
            for i in scan.intensities
        ]
        sep_mhz = scan.separation / _TWO_PI / 1e6
        g_eff = spectra.effective_coupling(couplings, pops)
        nms_mhz = spectra.normal_mode_splitting(g_eff, n_atoms) / _TWO_PI / 1e6
        path = os.path.join(outdir, "spectrum.csv")
        meta = _base_metadata("spectrum")
        meta["peak_separation_MHz"] = _fmt(sep_mhz)
        meta["normal_mode_splitting_MHz"] = _fmt(nms_mhz)
        _write_csv(
            path,
            ["delta_p_MHz", "intensity", "power_W"],
            zip(grid / _TWO_PI / 1e6, scan.intensities, power),
            meta,
        )
        outputs.append("spectrum.csv")
        extra["peak_separation_MHz"] = sep_mhz
        extra["normal_mode_splitting_MHz"] = nms_mhz
        print(f"peak separation: {sep_mhz:.4g} MHz")
        print(f"normal-mode splitting 2 g_eff sqrt(N): {nms_mhz:.4g} MHz")
    else:
        raise ConfigError(
            f"[spectrum] mode: expected scan|coupling-table, got {cfg['spectrum']['mode']!r}"
        )

    _write_manifest(
        outdir, "spectrum", cfg, outputs, time.perf_counter() - t_start, extra
    )
    return 0


def _dynamics_one(work) -> scenarios.DynamicsResult:
    exp, dp = work
    return scenarios.run_dynamics(exp, dp)


def cmd_dynamics(cfg: dict, outdir: str, args) -> int:
    t_start = time.perf_counter()
    exp = _experiment_from(cfg)
    n0_map = _n0_map(cfg)
    detunings = sorted(exp.delta_p_mhz)
    work = [
        (replace(exp, n0=n0_map.get(dp, exp.n0), delta_p_mhz=(dp,)), dp)
        for dp in detunings
    ]
    if args.jobs and args.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_dynamics_one, work))
    else:
        results = [_dynamics_one(w) for w in work]

    outputs = []
    drift = 0.0
    peak_rho = 0.0
    warnings = {}
    for res in results:
        series = res.series
        header = ["t_s", "re_a", "im_a", "photon_number"]
        header += [f"P_m{_m_label(m)}" for m in series.ground_two_m]
        header += [f"rho_ee_m{_m_label(m)}" for m in series.coupled_two_m]
        header += ["g_eff_sqrtN_MHz", "N_eff", "power_W", "power_normalized"]
        rows = []
        for i, t in enumerate(series.times):
            row = [
                t,
                series.a[i].real,
                series.a[i].imag,
                series.photon_number[i],
                *series.populations[i],
                *series.rho_ee[i],
                res.coupling_mhz[i],
                series.n_eff[i],
                res.power_watts[i],
                res.power_normalized[i],
            ]
            rows.append(row)
        meta = _base_metadata("dynamics")
        meta["delta_p_MHz"] = _fmt(res.delta_p_mhz)
        meta["n0"] = _fmt(n0_map.get(res.delta_p_mhz, exp.n0))
        meta["peak_rho_ee"] = _fmt(series.meta["peak_rho_ee"])
        meta["weak_field_warning"] = str(res.weak_field_warning).lower()
        name = f"dynamics_dp{res.delta_p_mhz:+g}MHz.csv"
        _write_csv(os.path.join(outdir, name), header, rows, meta)
        outputs.append(name)
        drift = max(drift, series.meta["conservation_drift"])
        peak_rho = max(peak_rho, series.meta["peak_rho_ee"])
        warnings[_fmt(res.delta_p_mhz)] = res.weak_field_warning

    _write_manifest(
        outdir,
        "dynamics",
        cfg,
        outputs,
        time.perf_counter() - t_start,
        {
            "tolerances": {"rtol": exp.rtol, "atol": exp.atol},
            "conservation_drift": drift,
            "peak_rho_ee": peak_rho,
            "weak_field_warnings": warnings,
        },
    )
    return 0


def _rates_params(cfg: dict) -> pumping.TwoTransitionParams:
    gamma = _TWO_PI * _getf(cfg, "rates", "gamma_MHz") * 1e6
    kappa = _TWO_PI * _getf(cfg, "rates", "kappa_MHz") * 1e6
    n_atoms = _getf(cfg, "rates", "n_atoms")
    ratio = _getf(cfg, "rates", "coupling_ratio")
    if n_atoms <= 0 or ratio <= 0:
        raise ConfigError("[rates] n_atoms and coupling_ratio must be positive")
    g0 = ratio * gamma / math.sqrt(n_atoms)
    gn = g0 * math.sqrt(n_atoms)
    delta = _getf(cfg, "rates", "delta_a_over_gn") * gn
    try:
        return pumping.TwoTransitionParams(
            c_minus_sq=_getf(cfg, "rates", "c_minus_sq"),
            c_plus_sq=_getf(cfg, "rates", "c_plus_sq"),
            g0=g0,
            gamma=gamma,
            kappa=kappa,
            n_atoms=n_atoms,
            delta_a=delta,
            delta_c=delta,
            eta=_getf(cfg, "rates", "eta_over_kappa") * kappa,
        )
    except ValueError as exc:
        raise ConfigError(f"[rates]: {exc}") from exc


def cmd_rates(cfg: dict, outdir: str, args) -> int:
    t_start = time.perf_counter()
    params = _rates_params(cfg)
    coeffs = pumping.rate_coefficients(params)
    regime = pumping.classify_regime(coeffs)
    horizon = _getf(cfg, "rates", "t_end_gamma_eff") / coeffs.gamma_eff
    n_out = _geti(cfg, "rates", "n_out")
    t_eval = np.linspace(0.0, horizon, n_out)
    trace = pumping.integrate_rate(params, (0.0, horizon), t_eval=t_eval)

    # cross-check against the closed-form implicit solution
    residual = 0.0
    for t, pm in zip(trace.times, trace.p_minus):
        residual = max(residual, abs(pumping.implicit_time(pm, coeffs) - t))
    residual /= horizon

    meta = _base_metadata("rates")
    for key in ("alpha", "beta", "u", "w", "gamma_eff"):
        meta[key] = _fmt(getattr(coeffs, key))
    meta["regime"] = regime
    meta["implicit_residual"] = _fmt(residual)
    _write_csv(
        os.path.join(outdir, "rates_trace.csv"),
        ["t_s", "p_minus", "p_plus"],
        zip(trace.times, trace.p_minus, trace.p_plus),
        meta,
    )
    outputs = ["rates_trace.csv"]
    print(
        f"alpha = {coeffs.alpha:.6g}, beta = {coeffs.beta:.6g}, "
        f"u = {coeffs.u:.6g}, w = {coeffs.w:.6g}, "
        f"Gamma_eff = {coeffs.gamma_eff:.6g} 1/s"
    )
    print(f"regime: {regime}")
    print(f"implicit-solution residual (relative to horizon): {residual:.3g}")

    if cfg["rates"]["landscape"].strip().lower() in ("true", "1", "yes", "on"):
        grid = np.linspace(
            _getf(cfg, "rates", "grid_min"),
            _getf(cfg, "rates", "grid_max"),
            _geti(cfg, "rates", "grid_points"),
        )
        result = scenarios.scenario_fig5(
            c_minus_sq=params.c_minus_sq,
            c_plus_sq=params.c_plus_sq,
            gamma=params.gamma,
            n_atoms=params.n_atoms,
            strong_ratio=_getf(cfg, "rates", "coupling_ratio"),
            weak_ratio=_getf(cfg, "rates", "weak_ratio"),
            grid=grid,
            n_trace=n_out,
        )
        _write_csv(
            os.path.join(outdir, "rates_landscape.csv"),
            [
                "delta_over_g0sqrtN",
                "alpha_strong",
                "beta_strong",
                "alpha_plus_beta_strong",
                "alpha_weak",
                "beta_weak",
            ],
            zip(
                result.delta_over_gn,
                result.alpha_strong,
                result.beta_strong,
                result.alpha_strong + result.beta_strong,
                result.alpha_weak,
                result.beta_weak,
            ),
            _base_metadata("rates"),
        )
        outputs.append("rates_landscape.csv")
        for label, tr in result.traces.items():
            name = f"rates_trace_{label}.csv"
            tmeta = _base_metadata("rates")
            tmeta["trace"] = label
            tmeta["alpha"] = _fmt(tr.coeffs.alpha)
            tmeta["beta"] = _fmt(tr.coeffs.beta)
            tmeta["gamma_eff"] = _fmt(tr.coeffs.gamma_eff)
            _write_csv(
                os.path.join(outdir, name),
                ["t_s", "p_minus", "p_plus"],
                zip(tr.times, tr.p_minus, tr.p_plus),
                tmeta,
            )
            outputs.append(name)

    _write_manifest(
        outdir,
        "rates",
        cfg,
        outputs,
        time.perf_counter() - t_start,
        {
            "coefficients": {
                "alpha": coeffs.alpha,
                "beta": coeffs.beta,
                "u": coeffs.u,
                "w": coeffs.w,
                "gamma_eff": coeffs.gamma_eff,
            },
            "regime": regime,
            "implicit_residual": residual,
        },
    )
    return 0


def _apply_path(cfg: dict, dotted: str, value: float) -> None:
    if "." not in dotted:
        raise ConfigError(f"[sweep] parameter path {dotted!r} must be section.key")
    sec, key = dotted.split(".", 1)
    if sec not in cfg or key not in cfg[sec]:
        raise ConfigError(f"[sweep] unknown parameter path {dotted!r}")
    cfg[sec][key] = _fmt(value)


def _sweep_observable(cfg: dict, name: str) -> float:
    if name == "splitting_MHz":
        scheme = _scheme_from(cfg)
        couplings = coupling_set(scheme)
        pops = {m: 1.0 / len(couplings.ground) for m in couplings.ground}
        n_atoms = _getf(cfg, "spectrum", "n_atoms")
        exp = _experiment_from(cfg)
        eta = scenarios.eta_from_power(exp.p_cav, exp.kappa, exp.omega, exp.round_trip)
        drive = meanfield.DriveParams(eta=eta, delta_a=0.0, delta_c=0.0, kappa=exp.kappa)
        lo = _getf(cfg, "spectrum", "delta_min_MHz")
        hi = _getf(cfg, "spectrum", "delta_max_MHz")
        grid = _TWO_PI * 1e6 * np.linspace(lo, hi, _geti(cfg, "spectrum", "n_points"))
        scan = spectra.transmission_spectrum(
            drive, scheme.gamma, n_atoms, couplings, pops, grid
        )
        return scan.separation / _TWO_PI / 1e6
    if name == "intensity":
        scheme = _scheme_from(cfg)
        couplings = coupling_set(scheme)
        pops = {m: 1.0 / len(couplings.ground) for m in couplings.ground}
        g_eff = spectra.effective_coupling(couplings, pops)
        exp = _experiment_from(cfg)
        eta = scenarios.eta_from_power(exp.p_cav, exp.kappa, exp.omega, exp.round_trip)
        delta = _TWO_PI * 1e6 * _getlist(cfg, "drive", "delta_p_MHz")[0]
        drive = meanfield.DriveParams(
            eta=eta, delta_a=delta, delta_c=delta, kappa=exp.kappa
        )
        return spectra.intracavity_intensity_ss(
            drive, scheme.gamma, _getf(cfg, "spectrum", "n_atoms"), g_eff
        )
    if name == "max_rho_ee":
        exp = _experiment_from(cfg)
        res = scenarios.run_dynamics(exp, exp.delta_p_mhz[0])
        return res.series.meta["peak_rho_ee"]
    raise ConfigError(
        f"[sweep] observable: expected splitting_MHz|intensity|max_rho_ee, got {name!r}"
    )


def _sweep_point(work) -> tuple[float, float, list[float]]:
    cfg, px, x, py, y, observables = work
    local = copy.deepcopy(cfg)
    _apply_path(local, px, x)
    _apply_path(local, py, y)
    return x, y, [_sweep_observable(local, obs) for obs in observables]


def cmd_sweep(cfg: dict, outdir: str, args) -> int:
    t_start = time.perf_counter()
    observables = [
        tok.strip() for tok in cfg["sweep"]["observable"].split(",") if tok.strip()
    ]
    if not observables:
        raise ConfigError("[sweep] observable: none given")
    px = cfg["sweep"]["param_x"].strip()
    py = cfg["sweep"]["param_y"].strip()
    nx = _geti(cfg, "sweep", "x_points")
    ny = _geti(cfg, "sweep", "y_points")
    if nx < 1 or ny < 1:
        raise ConfigError("[sweep] grid point counts must be at least 1")
    if nx * ny > _MAX_SWEEP_POINTS:
        raise ConfigError(
            f"[sweep] grid has {nx * ny} points, above the {_MAX_SWEEP_POINTS} "
            f"limit; reduce x_points/y_points"
        )
    xs = np.linspace(_getf(cfg, "sweep", "x_start"), _getf(cfg, "sweep", "x_stop"), nx)
    ys = np.linspace(_getf(cfg, "sweep", "y_start"), _getf(cfg, "sweep", "y_stop"), ny)
    # validate the paths and observables once before fanning out
    probe = copy.deepcopy(cfg)
    _apply_path(probe, px, xs[0])
    _apply_path(probe, py, ys[0])
    for obs in observables:
        if obs not in ("splitting_MHz", "intensity", "max_rho_ee"):
            raise ConfigError(
                f"[sweep] observable: expected splitting_MHz|intensity|max_rho_ee, "
                f"got {obs!r}"
            )

    work = [(cfg, px, x, py, y, observables) for x in xs for y in ys]
    if args.jobs and args.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            points = list(pool.map(_sweep_point, work))
    else:
        points = [_sweep_point(w) for w in work]

    outputs = []
    for idx, obs in enumerate(observables):
        name = f"sweep_{obs}.csv"
        meta = _base_metadata("sweep")
        meta["param_x"] = px
        meta["param_y"] = py
        _write_csv(
            os.path.join(outdir, name),
            [px, py, obs],
            [(x, y, vals[idx]) for x, y, vals in points],
            meta,
        )
        outputs.append(name)

    _write_manifest(outdir, "sweep", cfg, outputs, time.perf_counter() - t_start)
    return 0


def cmd_presets(args) -> int:
    if args.action != "list":
        raise ConfigError(f"unknown presets action {args.action!r}; try 'list'")
    for name in preset_names():
        ref = _preset_path(name)
        first = ref.read_text(encoding="utf-8").splitlines()[0].lstrip("# ").strip()
        print(f"{name}: {first}")
    return 0


# --------------------------------------------------------------------------
# entry point


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file (or a manifest.json)")
    parser.add_argument("--preset", help="bundled preset name (see 'presets list')")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config key (repeatable)",
    )
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument(
        "--jobs", type=int, default=1, help="worker processes for parallel runs"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlcavity",
        description="Collective atom-cavity coupling: spectra, dynamics, rate model.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="steady-state transmission spectrum")
    _add_common(p)
    p.add_argument("--atoms", type=float, help="shortcut for --set spectrum.n_atoms=X")

    p = sub.add_parser("dynamics", help="mean-field transmission dynamics")
    _add_common(p)
    p.add_argument(
        "--eta", type=float, help="pump rate in units of kappa (overrides p_cav_nW)"
    )

    p = sub.add_parser("rates", help="two-transition optical-pumping rate model")
    _add_common(p)

    p = sub.add_parser("sweep", help="grid sweep over two scalar parameters")
    _add_common(p)

    p = sub.add_parser("presets", help="inspect bundled presets")
    p.add_argument("action", help="'list'")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            return cmd_presets(args)
        overrides = list(args.set)
        if args.command == "spectrum" and args.atoms is not None:
            overrides.append(f"spectrum.n_atoms={args.atoms!r}")
        if args.command == "dynamics" and args.eta is not None:
            overrides.append(f"drive.eta_over_kappa={args.eta!r}")
        cfg = resolve_config(args.config, args.preset, overrides)
        os.makedirs(args.out, exist_ok=True)
        dispatch = {
            "spectrum": cmd_spectrum,
            "dynamics": cmd_dynamics,
            "rates": cmd_rates,
            "sweep": cmd_sweep,
        }
        return dispatch[args.command](cfg, args.out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StiffnessError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return 3
    except DegenerateParameterError as exc:
        print(f"degenerate parameters: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
