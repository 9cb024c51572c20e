"""Figure rendering for the report paths; every figure sits beside its CSV."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_COMPONENTS = ("m_x", "m_y", "m_z")


def plot_magnetization(grid, m, path, snapshots=None):
    """Per-site magnetization components vs time, one panel per component.

    snapshots: optional (times, m_z values) pairs from the self-consistent
    solver, overlaid on the m_z panel as markers.
    """
    m = np.asarray(m)
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7.0, 7.5))
    for k, ax in enumerate(axes):
        for i in range(m.shape[1]):
            ax.plot(grid, m[:, i, k], lw=0.9)
        ax.set_ylabel(_COMPONENTS[k])
        ax.axhline(0.0, color="0.8", lw=0.5, zorder=0)
    if snapshots is not None:
        times, mz = snapshots
        for i in range(np.asarray(mz).shape[1]):
            axes[2].plot(times, np.asarray(mz)[:, i], "o", ms=3.5,
                         mfc="none", mec="black", mew=0.7, zorder=5)
    axes[2].set_xlabel("t (ns)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_fidelity_batch(fid_cd, fid_none, path):
    """Final fidelities per sample, counter-diabatic arm against the bare one."""
    fid_cd = np.asarray(fid_cd, dtype=float)
    fid_none = np.asarray(fid_none, dtype=float)
    order = np.argsort(fid_none)
    fig, (left, right) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    idx = np.arange(order.size)
    left.plot(idx, fid_cd[order], ".", ms=4, color="crimson", label="with drive")
    left.plot(idx, fid_none[order], ".", ms=4, color="royalblue", label="without")
    left.set_xlabel("sample (sorted by bare fidelity)")
    left.set_ylabel("final fidelity")
    left.set_ylim(-0.03, 1.03)
    left.legend(frameon=False)
    good = np.isfinite(fid_cd)
    right.plot(fid_none[good], fid_cd[good], ".", ms=4, color="black")
    right.plot([0, 1], [0, 1], lw=0.7, color="0.6")
    right.set_xlabel("fidelity without drive")
    right.set_ylabel("fidelity with drive")
    right.set_xlim(-0.03, 1.03)
    right.set_ylim(-0.03, 1.03)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_success_curve(total_times, rows, path):
    """Success probability vs annealing time with confidence bars per arm."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    styles = {"mfcd": ("crimson", "o"), "linear": ("royalblue", "s")}
    for arm, (color, marker) in styles.items():
        ps = [rows[t][arm]["probability"] for t in total_times]
        lo = [rows[t][arm]["wilson_low"] for t in total_times]
        hi = [rows[t][arm]["wilson_high"] for t in total_times]
        err = [np.subtract(ps, lo), np.subtract(hi, ps)]
        ax.errorbar(total_times, ps, yerr=err, color=color, marker=marker,
                    capsize=3, lw=1.2, label=arm)
    ax.set_xscale("log")
    ax.set_xlabel("annealing time T (ns)")
    ax.set_ylabel("success probability")
    ax.set_ylim(-0.03, 1.03)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_check_margins(names, values, thresholds, path):
    """Measured check values against their thresholds on a log axis."""
    names = list(names)
    values = np.asarray(values, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    floor = 1e-18
    fig, ax = plt.subplots(figsize=(7.0, 0.6 * len(names) + 1.2))
    y = np.arange(len(names))
    ok = values <= thresholds
    colors = np.where(ok, "seagreen", "crimson")
    ax.barh(y, np.maximum(values, floor), color=colors, height=0.6)
    for yi, thr in zip(y, thresholds):
        ax.plot([thr, thr], [yi - 0.4, yi + 0.4], color="black", lw=1.2)
    ax.set_xscale("log")
    ax.set_yticks(y)
    ax.set_yticklabels(names)
    ax.invert_yaxis()
    ax.set_xlabel("measured value (bar) vs threshold (tick)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_schedules(exports, path):
    """A(s) and g'(s) breakpoint curves for one or more exported schedules."""
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 5.5))
    for label, exp in exports.items():
        s_a = [p[0] for p in exp.breakpoints_a]
        a = [p[1] for p in exp.breakpoints_a]
        s_g = [p[0] for p in exp.breakpoints_g]
        gp = [p[1] for p in exp.breakpoints_g]
        top.plot(s_a, a, lw=1.1, label=label)
        bottom.plot(s_g, gp, lw=1.1, label=label)
    top.set_ylabel("A(s)")
    top.legend(frameon=False)
    bottom.set_ylabel("g'(s)")
    bottom.set_xlabel("s")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
