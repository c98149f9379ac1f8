"""Figure rendering for the CLI report paths (written next to the CSV output)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_compare_figure(path, grid, fom, errors):
    """Frequency response of the full model with per-method error curves."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.loglog(grid, fom, "k-", lw=1.8, label="FOM")
    for label, err in errors.items():
        ax.loglog(grid, err, lw=1.2, label=f"error {label}")
    ax.set_xlabel(r"frequency $\omega$")
    ax.set_ylabel(r"$\sigma_{\max}$")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def save_timing_figure(path, sizes, times):
    """Wall-clock against model size per method (log-log)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, ts in times.items():
        pts = [(n, t) for n, t in zip(sizes, ts) if t is not None]
        if pts:
            ax.loglog([q[0] for q in pts], [q[1] for q in pts], "o-", label=label)
    ax.set_xlabel("state dimension n")
    ax.set_ylabel("CPU time [s]")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def save_convergence_figure(path, counts, deviations):
    """Quadrature/intrusive ROM deviation against node count per method."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, devs in deviations.items():
        ax.loglog(counts, devs, "s-", label=label)
    ax.set_xlabel(r"quadrature nodes $N_p$")
    ax.set_ylabel(r"grid $H_\infty$ deviation")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
