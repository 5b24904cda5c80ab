"""CPLEX LP text export of the allocation model."""
from __future__ import annotations

from pathlib import Path

from .model import IlpModel


def _wrap(terms: list[str], width: int = 8) -> str:
    lines = [" ".join(terms[i:i + width]) for i in range(0, len(terms), width)]
    return "\n   ".join(lines)


def lp_text(model: IlpModel) -> str:
    """Deterministic LP text: variables ``x_g_j_k``, ``c_g_k``, ``r_g_j``, ``p_g``."""
    G, lam = model.G, model.lam
    cells = model.x_cells
    cols = sorted({k for _, k in cells})
    rows = model.rows
    out = [f"\\ projection allocation: rows={len(rows)} cols={len(model.cols)} G={G} lambda={lam}",
           "Minimize", " obj: " + _wrap([("+ " if g else "") + f"p_{g}" for g in range(G)]),
           "Subject To"]
    for g in range(G):
        terms = [f"+ c_{g}_{k}" for k in cols] + [f"- {lam} p_{g}"]
        terms[0] = terms[0].removeprefix("+ ")
        out.append(f" cap_{g}: " + _wrap(terms) + " <= 0")
    for lab, cs in model.copies.items():
        terms = [f"+ x_{g}_{j}_{k}" for j, k in cs for g in range(G)]
        terms[0] = terms[0].removeprefix("+ ")
        out.append(f" once_{lab}: " + _wrap(terms) + " = 1")
    for g in range(G):
        for j, k in cells:
            out.append(f" col_{g}_{j}_{k}: x_{g}_{j}_{k} - c_{g}_{k} <= 0")
            out.append(f" row_{g}_{j}_{k}: x_{g}_{j}_{k} - r_{g}_{j} <= 0")
    for j in rows:
        out.append(f" part_{j}: " + " + ".join(f"r_{g}_{j}" for g in range(G)) + " = 1")
    for g, size in enumerate(model.row_sizes):
        out.append(f" size_{g}: " + _wrap([("+ " if i else "") + f"r_{g}_{j}"
                                           for i, j in enumerate(rows)]) + f" = {size}")
    out.append("Bounds")
    out += [f" 0 <= c_{g}_{k} <= 1" for g in range(G) for k in cols]
    out += [f" 0 <= r_{g}_{j} <= 1" for g in range(G) for j in rows]
    out += [f" p_{g} >= 0" for g in range(G)]
    out += ["Generals", " " + _wrap([f"p_{g}" for g in range(G)])]
    if cells:
        out += ["Binaries", " " + _wrap([f"x_{g}_{j}_{k}" for g in range(G) for j, k in cells])]
    out.append("End")
    return "\n".join(out) + "\n"


def export_lp(model: IlpModel, path) -> Path:
    path = Path(path)
    path.write_text(lp_text(model))
    return path
