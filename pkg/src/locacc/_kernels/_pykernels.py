"""Numpy implementation of the hot kernels.

The Jacobi sweep is applied to every matrix of a batch in lock-step and
the divided-difference table is built column by column across all spectra;
rows with clustered eigenvalues are redone one at a time.
"""
from __future__ import annotations

import math

import numpy as np

LN2 = math.log(2.0)


def jacobi_eigh(a, want_vectors=True, tol=1e-13, max_sweeps=100):
    """Cyclic complex Jacobi on a stack of Hermitian matrices.

    Returns ``(w, v, sweeps)`` where ``w`` has shape ``(n, d)`` sorted
    descending, ``v`` holds the matching eigenvectors as columns (or is
    None) and ``sweeps`` is the number of sweeps used, ``-1`` when the
    off-diagonal norm did not drop below ``tol`` within ``max_sweeps``.
    """
    a = np.array(a, dtype=np.complex128, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("expected an array of shape (n, d, d)")
    n, d, _ = a.shape
    v = np.broadcast_to(np.eye(d, dtype=np.complex128), (n, d, d)).copy() if want_vectors else None
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2))))
    iu = np.triu_indices(d, 1)
    sweeps = 0
    converged = d < 2
    while not converged:
        off = np.sqrt(2.0 * np.sum(np.abs(a[:, iu[0], iu[1]]) ** 2, axis=1))
        if np.all(off < tol * scale):
            converged = True
            break
        if sweeps >= max_sweeps:
            break
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[:, p, q]
                r = np.abs(apq)
                active = r > 1e-300
                if not np.any(active):
                    continue
                e = np.where(active, apq / np.where(active, r, 1.0), 1.0)
                rr = np.where(active, r, 1.0)
                tau = (a[:, q, q].real - a[:, p, p].real) / (2.0 * rr)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = np.where(active, t * c, 0.0)
                c = np.where(active, c, 1.0)
                se = (s * e)[:, None]
                sec = (s * np.conj(e))[:, None]
                cc = c[:, None]

                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                a[:, :, p] = cc * colp - sec * colq
                a[:, :, q] = se * colp + cc * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :].copy()
                a[:, p, :] = cc * rowp - se * rowq
                a[:, q, :] = sec * rowp + cc * rowq
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                a[:, p, p] = a[:, p, p].real
                a[:, q, q] = a[:, q, q].real
                if v is not None:
                    vp = v[:, :, p].copy()
                    vq = v[:, :, q].copy()
                    v[:, :, p] = cc * vp - sec * vq
                    v[:, :, q] = se * vp + cc * vq

    w = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    if v is not None:
        v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v, (sweeps if converged else -1)


CLUSTER_RHO = 0.5
SERIES_MAX_TERMS = 2000


def _g(x, d):
    # x^d ln x with g(0) = 0
    safe = np.where(x > 0, x, 1)
    return np.where(x > 0, safe ** d * np.log(safe), 0)


def _g_taylor(x, d, j, harmonic):
    # g^{(j)}(x) / j!, vanishing at x = 0 for j < d
    safe = np.where(x > 0, x, 1)
    coef = math.comb(d, j) * safe ** (d - j) * (np.log(safe) + harmonic[d] - harmonic[d - j])
    return np.where(x > 0, coef, 0)


def _cluster_dd(nodes, d, harmonic):
    """Divided difference of g over a tight cluster from the Taylor series of
    g about its centre, sum_k g^(j+k)(c)/(j+k)! h_k(nodes - c), with h_k the
    complete homogeneous symmetric polynomials."""
    j = len(nodes) - 1
    c = (nodes[0] + nodes[-1]) / 2
    q = (nodes[-1] - nodes[0]) / (2 * c)
    nterms, t = 0, 1.0
    if q > 0:
        while nterms < SERIES_MAX_TERMS:
            nterms += 1
            t *= (j + nterms) * float(q) / nterms
            if t < 1e-22:
                break
    h = np.zeros(nterms + 1, dtype=np.longdouble)
    h[0] = 1
    for y in nodes - c:
        for k in range(1, nterms + 1):
            h[k] += y * h[k - 1]
    logc = np.log(c)
    total = np.longdouble(0)
    r = np.longdouble(0)
    for k in range(nterms + 1):
        m = j + k
        if m <= d:
            a = math.comb(d, m) * c ** (d - m) * (logc + harmonic[d] - harmonic[d - m])
        else:
            kk = m - d
            r = np.longdouble(1) / (d + 1) if kk == 1 else r * (kk - 1) / (d + kk)
            a = r / c ** kk if kk % 2 else -r / c ** kk
        total += a * h[k]
    return total


def _subentropy_row(x, d, harmonic, degeneracy_tol):
    # scalar Newton table with cluster series, for rows containing close nodes
    c = _g(x, d)
    for j in range(1, d):
        for i in range(d - 1, j - 1, -1):
            gap = x[i] - x[i - j]
            mid = (x[i] + x[i - j]) / 2
            if mid > 0 and gap <= CLUSTER_RHO * mid:
                c[i] = _cluster_dd(x[i - j:i + 1], d, harmonic)
            elif gap < degeneracy_tol:
                c[i] = _g_taylor(mid, d, j, harmonic)
            else:
                c[i] = (c[i] - c[i - 1]) / gap
    return c[d - 1]


def subentropy(lam, degeneracy_tol=1e-9):
    """Subentropy in bits of each row of ``lam``.

    Minus the divided difference of ``x**d * log2(x)`` over the ``d`` entries
    of the row. Entries whose nodes span less than half their centre are
    summed from the Taylor series about the centre; exactly coincident nodes
    reduce to the confluent derivative. The table is kept in extended
    precision.
    """
    x = np.array(lam, dtype=np.float64, ndmin=2, copy=True)
    n, d = x.shape
    x = np.sort(np.clip(x, 0.0, None), axis=1).astype(np.longdouble)
    harmonic = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, d + 1))]).astype(np.longdouble)
    c = _g(x, d)
    for j in range(1, d):
        for i in range(d - 1, j - 1, -1):
            gap = x[:, i] - x[:, i - j]
            close = gap < degeneracy_tol
            mid = 0.5 * (x[:, i] + x[:, i - j])
            with np.errstate(divide="ignore", invalid="ignore"):
                dd = (c[:, i] - c[:, i - 1]) / np.where(close, 1.0, gap)
            c[:, i] = np.where(close, _g_taylor(mid, d, j, harmonic), dd)
    out = c[:, d - 1]
    if d > 1:
        gaps = np.diff(x, axis=1)
        mids = 0.5 * (x[:, 1:] + x[:, :-1])
        for row in np.flatnonzero(np.any((mids > 0) & (gaps <= CLUSTER_RHO * mids), axis=1)):
            out[row] = _subentropy_row(x[row], d, harmonic, degeneracy_tol)
    return (-out / LN2).astype(np.float64)


def givens_unitary(angles, d):
    """Product of two-level rotations over the pairs ``i < j`` in order.

    Pair ``(i, j)`` consumes a mixing angle and a phase from ``angles``.
    Plain Python complex arithmetic is faster than numpy at these sizes.
    """
    cols = [[0j] * d for _ in range(d)]
    for i in range(d):
        cols[i][i] = 1 + 0j
    k = 0
    for i in range(d - 1):
        for j in range(i + 1, d):
            th = float(angles[k])
            ph = float(angles[k + 1])
            k += 2
            c, s = math.cos(th), math.sin(th)
            se = complex(s * math.cos(ph), s * math.sin(ph))
            sec = se.conjugate()
            ci, cj = cols[i], cols[j]
            cols[i] = [c * a - sec * b for a, b in zip(ci, cj)]
            cols[j] = [se * a + c * b for a, b in zip(ci, cj)]
    return np.array(cols, dtype=np.complex128).T
