"""Pure-numpy batch kernel; the fallback when the compiled core is absent.

Mirrors ``_kernels.comoment_batch`` exactly in signature and semantics.
"""

import numpy as np

DEGENERATE_RTOL = 1e-12


def _trimmed_rows(a, k):
    if k == 0:
        return a.mean(axis=1)
    n = a.shape[1]
    part = np.partition(a, (k, n - k - 1), axis=1)
    return part[:, k:n - k].mean(axis=1)


def comoment_batch(S, vc, sdv, eu, ev, w, scaled, k):
    """Weighted co-moment sum for every row of ``S``.

    Parameters
    ----------
    S : (m, n) array
        One candidate score series per row.
    vc : (n,) array or None
        Centered dependent series; ``None`` pairs each row with itself.
    sdv : float
        Scale of the dependent series (ignored unless ``scaled``).
    eu, ev : (r,) int arrays
        Exponent pairs of the co-moments to sum.
    w : (r,) float array
        Weights; zero entries are skipped.
    scaled : bool
    k : int
        Values trimmed from each tail.

    Returns
    -------
    (m,) array, NaN where a row has degenerate scale and ``scaled`` is set.
    """
    S = np.ascontiguousarray(S, dtype=float)
    m = S.shape[0]
    uc = S - _trimmed_rows(S, k)[:, None]
    out = np.zeros(m)
    bad = np.zeros(m, dtype=bool)
    if scaled:
        su = np.sqrt(_trimmed_rows(uc * uc, k))
        bad = su <= DEGENERATE_RTOL * np.max(np.abs(S), axis=1)
        su = np.where(bad, 1.0, su)
    for a, b, wt in zip(eu, ev, w):
        if wt == 0.0:
            continue
        a = int(a)
        b = int(b)
        if vc is None:
            prod = uc ** (a + b)
        else:
            prod = (uc ** a) * (vc[None, :] ** b)
        val = _trimmed_rows(prod, k)
        if scaled:
            if vc is None:
                val = val / su ** (a + b)
            else:
                val = val / ((su ** a) * (sdv ** b))
        out += wt * val
    out[bad] = np.nan
    return out
