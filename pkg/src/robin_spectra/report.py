"""Report serialization: canonical CSV, JSON metadata sidecar, figures.

The CSV is the canonical artifact (fixed column order, 17 significant
digits, byte-reproducible); the PNG figures rendered next to it are a
convenience view of the residual decay and the two-sided effective-operator
sandwich.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .harness import AsymptoticReport

CSV_COLUMNS = (
    "alpha",
    "n",
    "E_strip",
    "E_lambda_prime",
    "E_lambda_rho",
    "E_predicted",
    "residual",
    "regime",
    "n_s",
    "n_t",
    "r",
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(report: AsymptoticReport, path) -> Path:
    path = Path(path)
    lines = [",".join(CSV_COLUMNS)]
    for row in report.rows:
        lines.append(
            ",".join(
                [
                    _fmt(row.alpha),
                    str(row.n),
                    _fmt(row.E_strip),
                    _fmt(row.E_lambda_prime),
                    _fmt(row.E_lambda_rho),
                    _fmt(row.E_predicted),
                    _fmt(row.residual),
                    row.regime,
                    str(row.n_s),
                    str(row.n_t),
                    _fmt(row.r),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_metadata(report: AsymptoticReport, path) -> Path:
    path = Path(path)
    payload = {
        "metadata": report.metadata,
        "fitted_exponents": {str(k): v for k, v in report.fitted_exponents.items()},
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return path


def render_figures(report: AsymptoticReport, outdir) -> list:
    """Residual-decay and sandwich figures; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    good = [r for r in report.rows if r.n > 0 and math.isfinite(r.E_strip)]
    if not good:
        return []
    written = []
    k_star = report.metadata["k_star"]
    ns = sorted({r.n for r in good})

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for n in ns:
        sub = [r for r in good if r.n == n]
        alphas = [r.alpha for r in sub]
        res = [abs(r.residual) for r in sub]
        ax.loglog(alphas, res, "o-", label=f"n = {n}")
        fit = report.fitted_exponents.get(n, {})
        if "slope" in fit:
            xs = [min(alphas), max(alphas)]
            ys = [math.exp(fit["intercept"]) * x ** fit["slope"] for x in xs]
            ax.loglog(xs, ys, "--", color="gray", lw=0.8)
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel("|strip eigenvalue - prediction|")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    p = outdir / "residual_decay.png"
    fig.savefig(p, dpi=130)
    plt.close(fig)
    written.append(p)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for n in ns:
        sub = [r for r in good if r.n == n]
        alphas = [r.alpha for r in sub]
        shifted = [r.E_strip + r.alpha**2 + k_star * r.alpha for r in sub]
        ax.semilogx(alphas, shifted, "o-", label=f"strip (n = {n})")
        ax.semilogx(alphas, [r.E_lambda_prime for r in sub], "s--", lw=0.9,
                    label=f"upper 1D operator (n = {n})")
        ax.semilogx(alphas, [r.E_lambda_rho for r in sub], "v:", lw=0.9,
                    label=f"penalized torus (n = {n})")
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel(r"$E_n + \alpha^2 + k_* \alpha$")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    p = outdir / "effective_sandwich.png"
    fig.savefig(p, dpi=130)
    plt.close(fig)
    written.append(p)
    return written


def write_report(report: AsymptoticReport, outdir, plots: bool = True) -> dict:
    """Write CSV + metadata (+ figures) into outdir; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": write_csv(report, outdir / "sweep.csv"),
        "metadata": write_metadata(report, outdir / "sweep_metadata.json"),
    }
    if plots:
        paths["figures"] = render_figures(report, outdir)
    return paths
