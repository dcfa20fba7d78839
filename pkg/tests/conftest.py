import numpy as np
import scipy.sparse as sp

from corvx.socp.problem import ConeDims, ConeLP


def random_kkt_instance(rng: np.random.Generator) -> tuple[ConeLP, float]:
    """Random conic problem with a known optimum, built backwards from KKT.

    A complementary primal-dual pair (s*, z*) is drawn blockwise (one side
    interior, or both on opposite boundary rays), then b, h, c are derived so
    that (x*, y*, s*, z*) satisfies the optimality system exactly.  Returns
    the problem and its optimal objective c'x*.
    """
    l = int(rng.integers(0, 5))
    nq = int(rng.integers(1, 4))
    qsizes = [int(rng.integers(2, 6)) for _ in range(nq)]
    m = l + sum(qsizes)
    n = m + int(rng.integers(1, 5))
    p = int(rng.integers(1, max(2, n - m + 1)))
    a = rng.normal(size=(p, n))
    g = rng.normal(size=(m, n))

    s = np.zeros(m)
    z = np.zeros(m)
    for i in range(l):
        if rng.random() < 0.5:
            s[i] = rng.uniform(0.5, 2.0)
        else:
            z[i] = rng.uniform(0.5, 2.0)
    pos = l
    for size in qsizes:
        mode = rng.integers(0, 3)
        vec = rng.normal(size=size - 1)
        vec /= np.linalg.norm(vec)
        if mode == 0:
            s[pos] = rng.uniform(1.0, 2.0)
            s[pos + 1 : pos + size] = rng.uniform(0.0, 0.5) * vec
        elif mode == 1:
            z[pos] = rng.uniform(1.0, 2.0)
            z[pos + 1 : pos + size] = rng.uniform(0.0, 0.5) * vec
        else:
            sa, zb = rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)
            s[pos] = sa
            s[pos + 1 : pos + size] = sa * vec
            z[pos] = zb
            z[pos + 1 : pos + size] = -zb * vec
        pos += size

    x = rng.normal(size=n)
    y = rng.normal(size=p)
    c = -a.T @ y - g.T @ z
    lp = ConeLP(
        c=c,
        a=sp.csr_matrix(a),
        b=a @ x,
        g=sp.csr_matrix(g),
        h=g @ x + s,
        dims=ConeDims(l, tuple(qsizes)),
    )
    return lp, float(c @ x)


def lp_to_problem(lp: ConeLP):
    """Re-express a ConeLP as a SocpProblem (cones/bounds over new slacks).

    Adds one slack column per cone row; bound rows become plain lower
    bounds.  Used to push KKT-oracle instances through the public API.
    """
    from corvx.socp.problem import AffineBound, SocpProblem

    n = lp.c.size
    m = lp.g.shape[0]
    n_new = n + m
    cost = np.concatenate([lp.c, np.zeros(m)])
    eye = sp.identity(m, format="csr")
    a_eq = sp.bmat(
        [[lp.a, None], [lp.g, eye]], format="csr"
    )
    b_eq = np.concatenate([lp.b, lp.h])
    bounds = [AffineBound(n + i, "lower", 0.0) for i in range(lp.dims.l)]
    cones = []
    pos = lp.dims.l
    for size in lp.dims.q:
        cones.append(tuple(n + pos + k for k in range(size)))
        pos += size
    return SocpProblem(n_new, cost, a_eq, b_eq, cones, bounds)
