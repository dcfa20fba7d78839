"""Plain-text dump/load of conic problems for debugging and cross-solver replay.

Format (version 1), whitespace separated, floats written with repr (shortest
round-trip).  Field order is fixed:

    SOCPTXT 1
    nvars <n>
    cost <n floats>
    eq <p> <nnz>
    <row> <col> <value>        # nnz triplet lines
    rhs <p floats>
    cones <ncones>
    <t> <x1> ... <xk>          # one line per cone
    bounds <nbounds>
    <var> <sense> <offset> <ncoef> [<j> <coef> ...]
    end
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from corvx.socp.problem import AffineBound, SocpProblem

FORMAT_VERSION = 1


def dumps(problem: SocpProblem) -> str:
    lines = [f"SOCPTXT {FORMAT_VERSION}", f"nvars {problem.n_vars}"]
    lines.append("cost " + " ".join(repr(float(v)) for v in problem.cost))
    coo = problem.a_eq.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines.append(f"eq {problem.n_eq} {coo.nnz}")
    for k in order:
        lines.append(f"{coo.row[k]} {coo.col[k]} {repr(float(coo.data[k]))}")
    lines.append("rhs " + " ".join(repr(float(v)) for v in problem.b_eq))
    lines.append(f"cones {len(problem.cones)}")
    for cone in problem.cones:
        lines.append(" ".join(str(i) for i in cone))
    lines.append(f"bounds {len(problem.bounds)}")
    for b in problem.bounds:
        parts = [str(b.var), b.sense, repr(float(b.offset)), str(len(b.coeffs))]
        for j, v in b.coeffs:
            parts.append(str(j))
            parts.append(repr(float(v)))
        lines.append(" ".join(parts))
    lines.append("end")
    return "\n".join(lines) + "\n"


def dump(problem: SocpProblem, path: str | Path) -> None:
    Path(path).write_text(dumps(problem))


class FormatError(ValueError):
    pass


def loads(text: str) -> SocpProblem:
    tokens = text.split("\n")
    lines = [ln.strip() for ln in tokens if ln.strip()]
    it = iter(lines)

    def take(prefix: str) -> list[str]:
        try:
            line = next(it)
        except StopIteration:
            raise FormatError(f"unexpected end of file, wanted {prefix!r}") from None
        parts = line.split()
        if parts[0] != prefix:
            raise FormatError(f"expected {prefix!r}, got {parts[0]!r}")
        return parts[1:]

    header = take("SOCPTXT")
    if int(header[0]) != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {header[0]}")
    n = int(take("nvars")[0])
    cost = np.array([float(v) for v in take("cost")])
    p, nnz = (int(v) for v in take("eq"))
    rows, cols, vals = [], [], []
    for _ in range(nnz):
        r, c_, v = next(it).split()
        rows.append(int(r))
        cols.append(int(c_))
        vals.append(float(v))
    b = np.array([float(v) for v in take("rhs")])
    ncones = int(take("cones")[0])
    cones = [tuple(int(v) for v in next(it).split()) for _ in range(ncones)]
    nbounds = int(take("bounds")[0])
    bounds = []
    for _ in range(nbounds):
        parts = next(it).split()
        var, sense, offset, ncoef = int(parts[0]), parts[1], float(parts[2]), int(parts[3])
        coeffs = tuple(
            (int(parts[4 + 2 * k]), float(parts[5 + 2 * k])) for k in range(ncoef)
        )
        bounds.append(AffineBound(var, sense, offset, coeffs))
    take("end")
    a = sp.csr_matrix((vals, (rows, cols)), shape=(p, n))
    return SocpProblem(n, cost, a, b, cones, bounds)


def load(path: str | Path) -> SocpProblem:
    return loads(Path(path).read_text())
