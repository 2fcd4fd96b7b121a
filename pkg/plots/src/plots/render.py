"""Figure builders over the mlcavity CSV contract.

One function per figure id; each takes the input directory and the output
image path, reads only contract CSVs, and writes a single image under the
pinned style sheet so re-renders of identical inputs are pixel-identical.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import PlotDataError, Table, find_tables, read_table

STYLE_PATH = os.path.join(os.path.dirname(__file__), "style.mplstyle")


def _save(fig, out: str) -> None:
    fig.savefig(out, metadata={"Software": "plots"})
    plt.close(fig)


def _dynamics_tables(indir: str) -> list[Table]:
    tables = find_tables(indir, "dynamics_dp*MHz.csv")
    return sorted(tables, key=lambda t: float(t.meta.get("delta_p_MHz", "nan")))


def render_fig2(indir: str, out: str) -> None:
    """Bar chart of g_eff^2/g0^2 for the characteristic populations."""
    table = read_table(os.path.join(indir, "coupling_table.csv"))
    labels = [str(v) for v in table.col("label")]
    values = table.col("g_eff_sq_over_g0_sq").astype(float)
    with plt.style.context(STYLE_PATH):
        fig, ax = plt.subplots(figsize=(6.0, 3.2))
        x = np.arange(len(labels))
        colors = [
            "#d62728" if lab in ("equal", "steady-state") else "#1f77b4"
            for lab in labels
        ]
        ax.bar(x, values, color=colors, width=0.7)
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=20)
        ax.set_ylabel(r"$g_\mathrm{eff}^2 / g_0^2$")
        ax.set_title("Effective coupling by ground-state distribution")
        fig.tight_layout()
        _save(fig, out)


def render_fig3(indir: str, out: str) -> None:
    """Three-panel stack: transmitted power, collective coupling, populations."""
    table = _dynamics_tables(indir)[-1]
    t_ms = table.col("t_s") * 1e3
    power = table.col("power_normalized")
    coupling = table.col("g_eff_sqrtN_MHz")
    pops = table.cols_with_prefix("P_m")
    dp = table.meta.get("delta_p_MHz", "?")
    with plt.style.context(STYLE_PATH):
        fig, axes = plt.subplots(
            3, 1, sharex=True, figsize=(6.0, 6.5), height_ratios=[1, 1, 1]
        )
        axes[0].plot(t_ms, power)
        axes[0].set_ylabel("transmission (norm.)")
        axes[0].set_title(f"Transmission dynamics at $\\delta_p$ = {dp} MHz")
        axes[1].plot(t_ms, coupling, color="#d62728")
        axes[1].set_ylabel(r"$g_\mathrm{eff}\sqrt{N}/2\pi$ (MHz)")
        for name, values in pops.items():
            axes[2].plot(t_ms, values, label=f"$m$ = {name[len('P_m'):]}")
        axes[2].set_ylabel("population")
        axes[2].set_xlabel("time (ms)")
        axes[2].legend(ncols=3, loc="upper right")
        fig.tight_layout()
        _save(fig, out)


def render_fig4(indir: str, out: str) -> None:
    """Overlaid transmission traces, one per probe detuning."""
    tables = _dynamics_tables(indir)
    with plt.style.context(STYLE_PATH):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for table in tables:
            dp = table.meta.get("delta_p_MHz", "?")
            ax.plot(
                table.col("t_s") * 1e3,
                table.col("power_normalized"),
                label=f"$\\delta_p$ = {dp} MHz",
            )
        ax.set_xlabel("time (ms)")
        ax.set_ylabel("transmission (norm.)")
        ax.set_title("Transmission dynamics on the normal-mode slopes")
        ax.legend()
        fig.tight_layout()
        _save(fig, out)


def render_fig5(indir: str, out: str) -> None:
    """Two panels: alpha/beta landscape and the matched decay traces."""
    land = read_table(os.path.join(indir, "rates_landscape.csv"))
    x = land.col("delta_over_g0sqrtN")
    traces = {
        label: read_table(os.path.join(indir, f"rates_trace_{label}.csv"))
        for label in ("weak", "decelerated", "accelerated")
    }
    with plt.style.context(STYLE_PATH):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.6))
        ax1.plot(x, land.col("alpha_strong"), label=r"$\alpha$ strong")
        ax1.plot(x, land.col("beta_strong"), label=r"$\beta$ strong")
        ax1.plot(x, land.col("alpha_weak"), "k-", lw=1.0, label=r"$\alpha$ weak")
        ax1.plot(x, land.col("beta_weak"), "k--", lw=1.0, label=r"$\beta$ weak")
        ax1.set_xlabel(r"$\Delta_a / g_0\sqrt{N}$")
        ax1.set_ylabel("coefficient")
        ax1.legend()

        colors = {"weak": "black", "decelerated": "#d62728", "accelerated": "#1f77b4"}
        for label, table in traces.items():
            coeffs_ok = all(k in table.meta for k in ("alpha", "beta", "gamma_eff"))
            if not coeffs_ok:
                raise PlotDataError(
                    f"{table.path}: missing alpha/beta/gamma_eff metadata"
                )
            alpha = float(table.meta["alpha"])
            beta = float(table.meta["beta"])
            gamma_eff = float(table.meta["gamma_eff"])
            # time axis in units of the matched initial slope, so all three
            # traces depart from P_- = 1 with slope -1
            slope = gamma_eff / (alpha + beta + 1.0)
            ax2.plot(
                table.col("t_s") * slope,
                table.col("p_minus"),
                color=colors[label],
                label=label,
            )
        ax2.set_xlim(0.0, 6.0)
        ax2.set_xlabel("time (matched-slope units)")
        ax2.set_ylabel(r"$P_-$")
        ax2.legend()
        fig.tight_layout()
        _save(fig, out)


RENDERERS = {
    "fig2": render_fig2,
    "fig3": render_fig3,
    "fig4": render_fig4,
    "fig5": render_fig5,
}


def render(figure: str, indir: str, out: str) -> None:
    """Render one figure id from the CSVs in ``indir`` to ``out``."""
    if figure not in RENDERERS:
        raise PlotDataError(
            f"unknown figure {figure!r}; expected one of {', '.join(RENDERERS)}"
        )
    RENDERERS[figure](indir, out)
