"""NumPy reference implementation of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with identical signature
and semantics; ``kernels.py`` picks one at import time.
"""

import numpy as np


def riemann_lower(ginv, gamma1, d2g):
    """All-lower Riemann tensor from metric data at a batch of nodes.

    Parameters
    ----------
    ginv : (M, N, N) inverse metric.
    gamma1 : (M, N, N, N) Christoffel symbols of the first kind,
        ``gamma1[m, f, b, c] = Gamma_{f,bc}``.
    d2g : (M, N, N, N, N) second derivatives, ``d2g[m, a, b, i, j] = d_a d_b g_ij``.

    Returns
    -------
    (M, N, N, N, N) array ``R[m, a, b, c, d] = R_abcd`` with
    ``R_abcd = g_de (d_a Gamma^e_bc - d_b Gamma^e_ac + ...)``.
    """
    # d_a d_c g_bd - d_a d_d g_bc - d_b d_c g_ad + d_b d_d g_ac
    t = np.einsum("macbd->mabcd", d2g)
    lin = 0.5 * (t - t.transpose(0, 1, 2, 4, 3) - t.transpose(0, 2, 1, 3, 4)
                 + t.transpose(0, 2, 1, 4, 3))
    quad = (np.einsum("mef,mebd,mfac->mabcd", ginv, gamma1, gamma1)
            - np.einsum("mef,mead,mfbc->mabcd", ginv, gamma1, gamma1))
    return lin + quad


def b_tensor(ginv, R):
    """``B_abcd = g^ip g^jq R_paqb R_icjd`` at a batch of nodes."""
    Rup = np.einsum("mip,mjq,mpaqb->miajb", ginv, ginv, R)
    return np.einsum("miajb,micjd->mabcd", Rup, R)


def pair_modulus(points, values, alpha, log2_lo, nbins):
    """Binned pairwise modulus of continuity over all point pairs.

    Pairs are binned by ``k = floor(log2(d)) - log2_lo``; pairs outside
    ``[0, nbins)`` are dropped.

    Returns
    -------
    maxdiff : (nbins,) max ``|F(p) - F(q)|`` per bin.
    maxquot : (nbins,) max ``|F(p) - F(q)| / d**alpha`` per bin.
    count : (nbins,) int64 number of pairs per bin.
    """
    points = np.ascontiguousarray(points, dtype=float)
    values = np.ascontiguousarray(values, dtype=float)
    maxdiff = np.zeros(nbins)
    maxquot = np.zeros(nbins)
    count = np.zeros(nbins, dtype=np.int64)
    P = points.shape[0]
    for i in range(P - 1):
        d = np.sqrt(((points[i + 1:] - points[i]) ** 2).sum(axis=1))
        df = np.abs(values[i + 1:] - values[i])
        ok = d > 0
        d, df = d[ok], df[ok]
        k = np.floor(np.log2(d)).astype(np.int64) - log2_lo
        keep = (k >= 0) & (k < nbins)
        k, d, df = k[keep], d[keep], df[keep]
        np.maximum.at(maxdiff, k, df)
        np.maximum.at(maxquot, k, df / d ** alpha)
        np.add.at(count, k, 1)
    return maxdiff, maxquot, count
