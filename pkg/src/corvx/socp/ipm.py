"""Primal-dual interior-point method for second-order cone programs.

Solves the conic pair

    min c'x  s.t.  A x = b,  G x + s = h,  s in K
    max -b'y - h'z  s.t.  A'y + G'z + c = 0,  z in K

with K a product of a nonnegative orthant and second-order cones, via the
homogeneous self-dual embedding (extra scalars tau, kappa), Nesterov-Todd
scaling and Mehrotra predictor-corrector steps.  The KKT system is solved
through a sparse LU factorization of the statically regularized
quasi-definite 3x3 block matrix, with iterative refinement against the
unregularized operator.  Everything is deterministic: fixed orderings, no
randomized pivoting.

Cone blocks are grouped by size so all per-block arithmetic (Jordan
products, scalings, step-to-boundary) runs as batched numpy operations, and
the KKT sparsity pattern is built once per solve with only the W^2 entries
rewritten between factorizations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from corvx.socp.problem import (
    STATUS_INFEASIBLE,
    STATUS_MAX_ITERS,
    STATUS_NUMERICAL,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    ConeDims,
    ConeLP,
    SolverSettings,
)

_STATIC_REG = 1e-10
_REFINE_STEPS = 2
_STEP_FRACTION = 0.99
_MIN_STEP = 1e-10
_EXPON = 3.0


@dataclass
class IpmResult:
    status: str
    x: np.ndarray | None
    y: np.ndarray | None
    z: np.ndarray | None
    s: np.ndarray | None
    objective: float | None
    gap: float | None
    iterations: int
    message: str = ""


class ConeOps:
    """Batched vector operations on the cone R+^l x Q^q1 x ... x Q^qp."""

    def __init__(self, dims: ConeDims) -> None:
        self.l = dims.l
        self.q = list(dims.q)
        self.m = dims.m
        self.degree = dims.degree
        if self.q:
            starts = np.asarray(
                np.concatenate([[self.l], self.l + np.cumsum(self.q)[:-1]]), dtype=np.intp
            )
        else:
            starts = np.zeros(0, np.intp)
        # group q blocks by size: list of (size, (nb, size) index matrix)
        self.groups: list[tuple[int, np.ndarray]] = []
        sizes = np.asarray(self.q, dtype=np.intp)
        for size in sorted(set(self.q)):
            st = starts[sizes == size]
            self.groups.append((size, st[:, None] + np.arange(size)[None, :]))
        self.e = np.zeros(self.m)
        self.e[: self.l] = 1.0
        if starts.size:
            self.e[starts] = 1.0
        # fixed pattern of the W^2 block-diagonal matrix (orthant diagonal,
        # then dense blocks group by group, row-major within each block)
        rows = [np.arange(self.l)]
        cols = [np.arange(self.l)]
        for size, idx in self.groups:
            rows.append(np.repeat(idx, size, axis=1).ravel())
            cols.append(np.tile(idx, (1, size)).ravel())
        self.w2_rows = np.concatenate(rows) if self.m else np.zeros(0, np.intp)
        self.w2_cols = np.concatenate(cols) if self.m else np.zeros(0, np.intp)

    def margins(self, u: np.ndarray) -> float:
        vals = [np.inf]
        if self.l:
            vals.append(float(np.min(u[: self.l])))
        for _size, idx in self.groups:
            blk = u[idx]
            vals.append(float(np.min(blk[:, 0] - np.linalg.norm(blk[:, 1:], axis=1))))
        return min(vals)

    def prod(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Jordan product u o v blockwise."""
        out = np.empty(self.m)
        out[: self.l] = u[: self.l] * v[: self.l]
        for _size, idx in self.groups:
            ub, vb = u[idx], v[idx]
            blk = np.empty_like(ub)
            blk[:, 0] = np.einsum("bi,bi->b", ub, vb)
            blk[:, 1:] = ub[:, :1] * vb[:, 1:] + vb[:, :1] * ub[:, 1:]
            out[idx] = blk
        return out

    def jordan_solve(self, lam: np.ndarray, d: np.ndarray) -> np.ndarray:
        """Solve lam o w = d for w (lam strictly inside K)."""
        out = np.empty(self.m)
        out[: self.l] = d[: self.l] / lam[: self.l]
        for _size, idx in self.groups:
            lb, db = lam[idx], d[idx]
            l0 = lb[:, 0]
            det = l0**2 - np.einsum("bi,bi->b", lb[:, 1:], lb[:, 1:])
            w0 = (l0 * db[:, 0] - np.einsum("bi,bi->b", lb[:, 1:], db[:, 1:])) / det
            blk = np.empty_like(db)
            blk[:, 0] = w0
            blk[:, 1:] = (db[:, 1:] - w0[:, None] * lb[:, 1:]) / l0[:, None]
            out[idx] = blk
        return out

    def max_step(self, u: np.ndarray, du: np.ndarray) -> float:
        """sup { alpha >= 0 : u + alpha du in K } for u strictly inside K."""
        alpha = np.inf
        if self.l:
            neg = du[: self.l] < 0.0
            if np.any(neg):
                alpha = float(np.min(-u[: self.l][neg] / du[: self.l][neg]))
        for _size, idx in self.groups:
            ub, db = u[idx], du[idx]
            # positive roots of (u0 + a d0)^2 - ||u1 + a d1||^2 = 0
            a2 = db[:, 0] ** 2 - np.einsum("bi,bi->b", db[:, 1:], db[:, 1:])
            a1 = 2.0 * (
                ub[:, 0] * db[:, 0] - np.einsum("bi,bi->b", ub[:, 1:], db[:, 1:])
            )
            a0 = ub[:, 0] ** 2 - np.einsum("bi,bi->b", ub[:, 1:], ub[:, 1:])
            with np.errstate(divide="ignore", invalid="ignore"):
                disc = a1 * a1 - 4.0 * a2 * a0
                sq = np.sqrt(np.maximum(disc, 0.0))
                qq = -0.5 * (a1 + np.where(a1 >= 0.0, sq, -sq))
                r1 = qq / a2
                r2 = a0 / qq
                lin = -a0 / a1
            quad = np.abs(a2) > 1e-300
            best = np.full(a0.shape, np.inf)
            for roots in (r1, r2):
                cand = np.where(
                    quad & (disc >= 0.0) & np.isfinite(roots) & (roots > 0.0),
                    roots,
                    np.inf,
                )
                best = np.minimum(best, cand)
            cand = np.where(
                ~quad & (a1 < 0.0) & np.isfinite(lin) & (lin > 0.0), lin, np.inf
            )
            best = np.minimum(best, cand)
            if best.size:
                alpha = min(alpha, float(np.min(best)))
        return alpha


class NTScaling:
    """Nesterov-Todd scaling point: symmetric W with W z = W^{-1} s = lambda."""

    def __init__(self, cone: ConeOps, s: np.ndarray, z: np.ndarray) -> None:
        self.cone = cone
        l = cone.l
        if l and (np.any(s[:l] <= 0.0) or np.any(z[:l] <= 0.0)):
            raise FloatingPointError("orthant iterate left the interior")
        self.w_l = np.sqrt(s[:l] / z[:l]) if l else np.zeros(0)
        self.lam = np.empty(cone.m)
        self.lam[:l] = np.sqrt(s[:l] * z[:l])
        self.w_blocks: list[np.ndarray] = []
        self.winv_blocks: list[np.ndarray] = []
        self.w2_blocks: list[np.ndarray] = []
        for size, idx in cone.groups:
            sb, zb = s[idx], z[idx]
            snrm = np.linalg.norm(sb[:, 1:], axis=1)
            znrm = np.linalg.norm(zb[:, 1:], axis=1)
            sdet = (sb[:, 0] - snrm) * (sb[:, 0] + snrm)
            zdet = (zb[:, 0] - znrm) * (zb[:, 0] + znrm)
            if np.any(sdet <= 0.0) or np.any(zdet <= 0.0):
                raise FloatingPointError("cone iterate left the interior")
            aa = np.sqrt(sdet)
            bb = np.sqrt(zdet)
            beta = np.sqrt(aa / bb)
            sn = sb / aa[:, None]
            zn = zb / bb[:, None]
            gamma = np.sqrt((1.0 + np.einsum("bi,bi->b", sn, zn)) / 2.0)
            vbar = np.empty_like(sn)
            vbar[:, 0] = sn[:, 0] + zn[:, 0]
            vbar[:, 1:] = sn[:, 1:] - zn[:, 1:]
            vbar /= (2.0 * gamma)[:, None]
            v = vbar
            v[:, 0] += 1.0
            v /= np.sqrt(2.0 * v[:, 0])[:, None]
            jdiag = -np.eye(size)
            jdiag[0, 0] = 1.0
            w = 2.0 * np.einsum("bi,bj->bij", v, v) - jdiag[None]
            jv = v.copy()
            jv[:, 1:] *= -1.0
            winv = 2.0 * np.einsum("bi,bj->bij", jv, jv) - jdiag[None]
            w *= beta[:, None, None]
            winv /= beta[:, None, None]
            self.w_blocks.append(w)
            self.winv_blocks.append(winv)
            self.w2_blocks.append(np.einsum("bij,bjk->bik", w, w))
            # scaled variable lambda = W z = W^{-1} s
            dd = 2.0 * gamma + sn[:, 0] + zn[:, 0]
            lam_blk = np.empty_like(sn)
            lam_blk[:, 0] = gamma
            lam_blk[:, 1:] = ((gamma + zn[:, 0]) / dd)[:, None] * sn[:, 1:] + (
                (gamma + sn[:, 0]) / dd
            )[:, None] * zn[:, 1:]
            lam_blk *= np.sqrt(aa * bb)[:, None]
            self.lam[idx] = lam_blk

    def _apply_blocks(self, blocks: list[np.ndarray], u: np.ndarray, w_l) -> np.ndarray:
        out = np.empty(self.cone.m)
        out[: self.cone.l] = w_l * u[: self.cone.l]
        for mats, (_size, idx) in zip(blocks, self.cone.groups):
            out[idx] = np.einsum("bij,bj->bi", mats, u[idx])
        return out

    def apply(self, u: np.ndarray) -> np.ndarray:
        """W u."""
        return self._apply_blocks(self.w_blocks, u, self.w_l)

    def apply_inv(self, u: np.ndarray) -> np.ndarray:
        """W^{-1} u."""
        return self._apply_blocks(self.winv_blocks, u, 1.0 / self.w_l)

    def apply_w2(self, u: np.ndarray) -> np.ndarray:
        """W^2 u."""
        return self._apply_blocks(self.w2_blocks, u, self.w_l**2)

    def w2_data(self) -> np.ndarray:
        """Entries of W^2 in the cone's fixed pattern order."""
        parts = [self.w_l**2] if self.cone.l else []
        for blk in self.w2_blocks:
            parts.append(blk.ravel())
        return np.concatenate(parts) if parts else np.zeros(0)


class _IdentityScaling:
    """W = I stand-in for the initialization solves."""

    def __init__(self, cone: ConeOps) -> None:
        self.cone = cone

    def apply_w2(self, u: np.ndarray) -> np.ndarray:
        return u.copy()

    def w2_data(self) -> np.ndarray:
        parts = [np.ones(self.cone.l)] if self.cone.l else []
        for size, idx in self.cone.groups:
            parts.append(
                np.broadcast_to(np.eye(size).ravel(), (idx.shape[0], size * size)).ravel()
            )
        return np.concatenate(parts) if parts else np.zeros(0)


class _KKT:
    """Factorizations of the regularized quasi-definite KKT matrix

        [ dI   A'   G'    ]
        [ A   -dI         ]
        [ G        -W2-dI ]

    with a fixed sparsity pattern; refactor() rewrites the W2 entries.
    Solves apply iterative refinement against the unregularized operator.
    """

    def __init__(self, a: sp.csr_matrix, g: sp.csr_matrix, cone: ConeOps) -> None:
        self.a = a.tocsr()
        self.at = self.a.T.tocsr()
        self.g = g.tocsr()
        self.gt = self.g.T.tocsr()
        self.cone = cone
        self.n = a.shape[1]
        self.p = a.shape[0]
        self.m = g.shape[0]
        n, p, m = self.n, self.p, self.m
        dim = n + p + m

        a_coo = a.tocoo()
        g_coo = g.tocoo()
        diag = np.arange(dim)
        self._rows = np.concatenate(
            [a_coo.col, a_coo.row + n, g_coo.col, g_coo.row + n + p, diag,
             cone.w2_rows + n + p]
        )
        self._cols = np.concatenate(
            [a_coo.row + n, a_coo.col, g_coo.row + n + p, g_coo.col, diag,
             cone.w2_cols + n + p]
        )
        self._fixed_data = np.concatenate(
            [a_coo.data, a_coo.data, g_coo.data, g_coo.data,
             np.full(n, _STATIC_REG), np.full(p + m, -_STATIC_REG)]
        )
        self.scaling = None
        self.factor = None

    def refactor(self, scaling) -> None:
        self.scaling = scaling
        data = np.concatenate([self._fixed_data, -scaling.w2_data()])
        dim = self.n + self.p + self.m
        kkt = sp.coo_matrix((data, (self._rows, self._cols)), shape=(dim, dim))
        self.factor = splu(kkt.tocsc())

    def _apply_exact(self, sol: np.ndarray) -> np.ndarray:
        """Unregularized KKT operator, by blocks."""
        n, p = self.n, self.p
        x, y, z = sol[:n], sol[n : n + p], sol[n + p :]
        top = self.at @ y + self.gt @ z if (p or self.m) else np.zeros(n)
        mid = self.a @ x
        bot = self.g @ x - self.scaling.apply_w2(z)
        return np.concatenate([top, mid, bot])

    def solve(self, rx: np.ndarray, ry: np.ndarray, rz: np.ndarray):
        rhs = np.concatenate([rx, ry, rz])
        sol = self.factor.solve(rhs)
        for _ in range(_REFINE_STEPS):
            resid = rhs - self._apply_exact(sol)
            if np.max(np.abs(resid)) < 1e-14 * max(1.0, float(np.max(np.abs(rhs)))):
                break
            sol += self.factor.solve(resid)
        n, p = self.n, self.p
        return sol[:n], sol[n : n + p], sol[n + p :]


def _shift_into_cone(cone: ConeOps, u: np.ndarray) -> np.ndarray:
    # shift unless comfortably interior; a start on the boundary would make
    # the first Nesterov-Todd scaling singular
    margin = cone.margins(u)
    scale = max(1.0, float(np.linalg.norm(u)))
    if margin > 1e-8 * scale:
        return u
    return u + (1.0 - margin) * cone.e


def solve_conelp(lp: ConeLP, settings: SolverSettings | None = None) -> IpmResult:
    settings = settings or SolverSettings()
    c, a, b, g, h = lp.c, lp.a.tocsr(), lp.b, lp.g.tocsr(), lp.h
    n = c.size
    p = b.size
    cone = ConeOps(lp.dims)
    m = cone.m

    if n == 0:
        ok = (p == 0 or np.max(np.abs(b)) <= settings.feas_tol) and (
            m == 0 or cone.margins(h) >= -settings.feas_tol
        )
        status = STATUS_OPTIMAL if ok else STATUS_INFEASIBLE
        return IpmResult(
            status, np.zeros(0), np.zeros(p), np.zeros(m), h.copy(), 0.0, 0.0, 0,
            message="empty problem",
        )

    if m == 0 and p == 0:
        if np.max(np.abs(c)) == 0.0:
            return IpmResult(
                STATUS_OPTIMAL, np.zeros(n), np.zeros(0), np.zeros(0), np.zeros(0),
                0.0, 0.0, 0,
            )
        return IpmResult(
            STATUS_UNBOUNDED, None, None, None, None, None, None, 0,
            message="unconstrained nonzero cost",
        )

    norm_b = max(1.0, float(np.linalg.norm(b))) if p else 1.0
    norm_h = max(1.0, float(np.linalg.norm(h))) if m else 1.0
    norm_c = max(1.0, float(np.linalg.norm(c)))

    # --- initialization: least-norm primal/dual points, shifted into K
    try:
        kkt = _KKT(a, g, cone)
        kkt.scaling = _IdentityScaling(cone)
        kkt.refactor(kkt.scaling)
        x, _y0, zt = kkt.solve(np.zeros(n), b, h)
        s = _shift_into_cone(cone, -zt) if m else np.zeros(0)
        _x1, y, z1 = kkt.solve(-c, np.zeros(p), np.zeros(m))
        z = _shift_into_cone(cone, z1) if m else np.zeros(0)
    except (RuntimeError, FloatingPointError) as exc:
        return IpmResult(
            STATUS_NUMERICAL, None, None, None, None, None, None, 0,
            message=f"initialization factorization failed: {exc}",
        )
    tau, kappa = 1.0, 1.0

    best = None
    status = STATUS_MAX_ITERS
    message = ""
    iters = 0

    for iteration in range(1, settings.max_iters + 1):
        iters = iteration
        hx = a.T @ y + g.T @ z + c * tau
        hy = a @ x - b * tau
        hz = g @ x + s - h * tau
        htau = -(c @ x) - (b @ y) - (h @ z) - kappa

        sz = s @ z if m else 0.0
        mu = (sz + tau * kappa) / (cone.degree + 1)

        pcost = (c @ x) / tau
        gap_abs = sz / tau**2
        relgap = gap_abs / max(1.0, abs(pcost))
        pres = max(
            (np.linalg.norm(hy) / tau / norm_b) if p else 0.0,
            (np.linalg.norm(hz) / tau / norm_h) if m else 0.0,
        )
        dres = np.linalg.norm(hx) / tau / norm_c
        best = (x / tau, y / tau, z / tau, s / tau, pcost, gap_abs)

        if pres <= settings.feas_tol and dres <= settings.feas_tol and (
            gap_abs <= settings.gap_tol or relgap <= settings.gap_tol
        ):
            status = STATUS_OPTIMAL
            break

        # infeasibility certificates
        iota = -((b @ y) + (h @ z))
        if iota > 0.0:
            dual_res = np.linalg.norm(a.T @ (y / iota) + g.T @ (z / iota))
            if dual_res <= settings.feas_tol * norm_c and (
                m == 0 or cone.margins(z / iota) >= -settings.feas_tol
            ):
                status = STATUS_INFEASIBLE
                message = "primal infeasibility certificate found"
                best = (None, y / iota, z / iota, None, None, None)
                break
        crit = -(c @ x)
        if crit > 0.0:
            pres_ray = max(
                np.linalg.norm(a @ (x / crit)) if p else 0.0,
                np.linalg.norm(g @ (x / crit) + s / crit) if m else 0.0,
            )
            if pres_ray <= settings.feas_tol * max(norm_b, norm_h):
                status = STATUS_UNBOUNDED
                message = "dual infeasibility certificate found"
                best = (x / crit, None, None, s / crit, None, None)
                break

        # --- Nesterov-Todd scaling and KKT factorization
        try:
            scal = NTScaling(cone, s, z)
            kkt.refactor(scal)
            x1, y1, z1 = kkt.solve(-c, b, h)
        except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
            status = STATUS_NUMERICAL
            message = f"KKT factorization failed: {exc}"
            break
        den_tau = kappa / tau - (c @ x1) - (b @ y1) - (h @ z1)

        lam = scal.lam
        lam_lam = cone.prod(lam, lam)

        def direction(xi: float, d_s: np.ndarray, d_kappa: float):
            """Newton direction for residual scaling xi and complementarity
            targets (d_s, d_kappa); returns (dx, dy, dz, ds, dtau, dkappa)."""
            wl = scal.apply(cone.jordan_solve(lam, d_s))
            x2, y2, z2 = kkt.solve(-xi * hx, -xi * hy, -xi * hz - wl)
            num = -xi * htau + (c @ x2) + (b @ y2) + (h @ z2) + d_kappa / tau
            dtau = num / den_tau
            dx = x2 + dtau * x1
            dy = y2 + dtau * y1
            dz = z2 + dtau * z1
            ds = wl - scal.apply_w2(dz)
            dkappa = (d_kappa - kappa * dtau) / tau
            return dx, dy, dz, ds, dtau, dkappa

        def boundary_step(ds, dz, dtau, dkappa) -> float:
            alpha = min(cone.max_step(s, ds), cone.max_step(z, dz))
            if dtau < 0.0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0.0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        # predictor (affine scaling) direction
        dxa, dya, dza, dsa, dtaua, dkappaa = direction(1.0, -lam_lam, -tau * kappa)
        alpha_aff = min(1.0, boundary_step(dsa, dza, dtaua, dkappaa))

        # Mehrotra centering parameter
        sz_aff = (s + alpha_aff * dsa) @ (z + alpha_aff * dza)
        mu_aff = (
            sz_aff + (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa)
        ) / (cone.degree + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** _EXPON

        # corrector (combined) direction
        eta = cone.prod(scal.apply_inv(dsa), scal.apply(dza))
        d_s = -lam_lam - eta + sigma * mu * cone.e
        d_kappa = -tau * kappa - dtaua * dkappaa + sigma * mu
        dx, dy, dz, ds, dtau, dkappa = direction(1.0 - sigma, d_s, d_kappa)

        alpha = min(1.0, _STEP_FRACTION * boundary_step(ds, dz, dtau, dkappa))
        if not np.isfinite(alpha) or alpha <= _MIN_STEP:
            status = STATUS_NUMERICAL
            message = f"step size collapsed at iteration {iteration}"
            break

        x += alpha * dx
        y += alpha * dy
        z += alpha * dz
        s += alpha * ds
        tau += alpha * dtau
        kappa += alpha * dkappa
        if tau <= 0.0 or kappa < 0.0 or not np.isfinite(tau):
            status = STATUS_NUMERICAL
            message = "tau left the positive ray"
            break

    xs, ys, zs, ss, pcost_v, gap_v = best if best is not None else (None,) * 6
    if status in (STATUS_OPTIMAL, STATUS_MAX_ITERS):
        return IpmResult(status, xs, ys, zs, ss, pcost_v, gap_v, iters, message)
    if status == STATUS_INFEASIBLE:
        return IpmResult(status, None, ys, zs, None, None, None, iters, message)
    if status == STATUS_UNBOUNDED:
        return IpmResult(status, xs, None, None, ss, None, None, iters, message)
    return IpmResult(status, None, None, None, None, None, None, iters, message)
