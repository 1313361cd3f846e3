"""Self-contained matplotlib scripts for the CSV files written by the CLI."""

from __future__ import annotations

import csv
from pathlib import Path

__all__ = ["emit_plot_script", "PLOT_KINDS", "UnknownColumnsError"]


class UnknownColumnsError(ValueError):
    """CSV columns do not match the requested plot kind."""


# columns required per kind, plot body
PLOT_KINDS = {
    "sweep-h": (
        ("h", "norm"),
        """ax.loglog(col["h"], col["norm"], "o-")
ax.set_xlabel("h")
ax.set_ylabel("weighted resolvent norm")""",
    ),
    "sweep-m": (
        ("m", "norm", "log_norm_times_h_over_1_plus_sqrt_m"),
        """ax.plot(col["m"], col["log_norm_times_h_over_1_plus_sqrt_m"], "o-")
ax.set_xlabel("m")
ax.set_ylabel("h log(norm) / (1 + sqrt|m|)")""",
    ),
    "norm": (
        ("k", "m", "norm"),
        """rows = [i for i, k in enumerate(col["k"]) if k == k]
ax.semilogy([col["k"][i] for i in rows], [col["norm"][i] for i in rows], "o-")
ax.set_xlabel("degree k")
ax.set_ylabel("channel norm")""",
    ),
    "solve": (
        ("r", "log10_abs_u0", "log10_abs_u1"),
        """ax.plot(col["r"], col["log10_abs_u0"], label="log10|u0|")
ax.plot(col["r"], col["log10_abs_u1"], label="log10|u1|")
ax.set_xlabel("r")
ax.legend()""",
    ),
    "bessel-check": (
        ("nu", "z", "envelope_ratio_J", "envelope_ratio_Y"),
        """for nu in sorted(set(col["nu"])):
    idx = [i for i, v in enumerate(col["nu"]) if v == nu]
    ax.plot([col["z"][i] for i in idx], [col["envelope_ratio_J"][i] for i in idx], label=f"J, nu={nu:g}")
    ax.plot([col["z"][i] for i in idx], [col["envelope_ratio_Y"][i] for i in idx], "--", label=f"Y, nu={nu:g}")
ax.set_xlabel("z = x / nu")
ax.set_ylabel("envelope ratio")
ax.legend(fontsize="small")""",
    ),
    "mellin-check": (
        ("tau", "abs_multiplier", "Lambda"),
        """order = sorted(range(len(col["tau"])), key=lambda i: col["tau"][i])
ax.plot([col["tau"][i] for i in order], [col["abs_multiplier"][i] for i in order], label="|1/p(tau + i t0)|")
ax.plot([col["tau"][i] for i in order], [col["Lambda"][i] for i in order], "--", label="Lambda(t0, m)")
ax.set_xlabel("tau")
ax.set_yscale("log")
ax.legend()""",
    ),
}

_TEMPLATE = '''"""Plot {csv_name} ({kind})."""
import csv

import matplotlib.pyplot as plt

CSV = {csv_path!r}


def _num(s):
    try:
        return float(s)
    except ValueError:
        return float("nan")


with open(CSV) as fh:
    lines = [ln for ln in fh if not ln.startswith("#")]
reader = csv.DictReader(lines)
col = {{}}
for row in reader:
    for key, val in row.items():
        col.setdefault(key, []).append(_num(val))

fig, ax = plt.subplots()
{body}
fig.tight_layout()
fig.savefig({png_path!r})
'''


def _columns(path: Path):
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                return next(csv.reader([line]))
    return []


def emit_plot_script(csv_path, kind: str, script_path=None) -> Path:
    """Write ``<csv stem>_plot.py`` (or ``script_path``) plotting ``csv_path``; returns its path."""
    csv_path = Path(csv_path)
    if kind not in PLOT_KINDS:
        raise UnknownColumnsError(f"unknown plot kind {kind!r}")
    needed, body = PLOT_KINDS[kind]
    cols = _columns(csv_path)
    missing = [c for c in needed if c not in cols]
    if missing:
        raise UnknownColumnsError(f"{csv_path} lacks columns {missing} for a {kind} plot")
    script_path = Path(script_path) if script_path else csv_path.with_name(csv_path.stem + "_plot.py")
    text = _TEMPLATE.format(
        csv_name=csv_path.name,
        kind=kind,
        csv_path=str(csv_path),
        png_path=str(csv_path.with_suffix(".png")),
        body=body,
    )
    script_path.write_text(text)
    return script_path
