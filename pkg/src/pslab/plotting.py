"""Figure rendering for CLI reports.

Each command's CSV can be accompanied by one PNG (opt-in via --plot); the
CSV stays the reproducibility contract, figures are a convenience view.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_DPI = 150


def _numeric_columns(header: Sequence[str], rows: Sequence[Tuple]):
    cols = {}
    for j, name in enumerate(header):
        try:
            cols[name] = [float(r[j]) for r in rows]
        except (TypeError, ValueError):
            continue
    return cols


def render(command: str, header: Sequence[str], rows: Sequence[Tuple], png_path: str) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    cols = _numeric_columns(header, rows)
    if command == "ps-count" and len(rows) >= 1:
        ax.loglog(cols["x"], cols["pi_c"], "o-", label="pi_c(x)")
        ax.loglog(cols["x"], cols["x^gamma/log x"], "s--", label="x^gamma/log x")
        ax.set_xlabel("x")
        ax.legend()
    elif command == "discorrelate" and len(rows) >= 1:
        ax.semilogx(cols["N"], cols["delta"], "o-")
        ax.set_xlabel("N")
        ax.set_ylabel("delta = |S1 - S2| / N")
    elif command == "sawtooth-check":
        ax.loglog(cols["H"], cols["max_error_interior"], "o-", label="interior error")
        ax.loglog(cols["H"], [5.0 / h for h in cols["H"]], ":", label="5/H")
        ax.set_xlabel("H")
        ax.legend()
    elif command == "local-density":
        ax.plot(cols["p"], cols["beta"], "o-")
        ax.set_xlabel("p")
        ax.set_ylabel("beta_p")
    elif cols:
        names = list(cols)
        x = cols[names[0]]
        monotone_x = len(rows) > 1 and all(a < b for a, b in zip(x, x[1:]))
        if monotone_x:
            for name in names[1:]:
                ax.plot(x, cols[name], "o-", label=name)
            ax.set_xlabel(names[0])
            ax.legend()
        else:
            vals = [cols[n][0] for n in names]
            ax.bar(range(len(names)), vals)
            ax.set_xticks(range(len(names)))
            ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    ax.set_title(command)
    fig.tight_layout()
    fig.savefig(png_path, dpi=_DPI)
    plt.close(fig)
