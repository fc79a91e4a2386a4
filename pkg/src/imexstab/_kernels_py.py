"""Pure numpy implementation of the root-modulus kernels.

Same contract as the compiled module; used when the extension is not built
or when ``IMEXSTAB_PURE_PYTHON=1`` is set.
"""
import numpy as np

_CHUNK = 4096


def _companions(c: np.ndarray, b: np.ndarray, mu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = c.size - 1
    p = c[None, :] - mu[:, None] * b[None, :]
    lead = p[:, -1]
    ok = lead != 0
    safe = np.where(ok, lead, 1.0)
    comp = np.zeros((mu.size, n, n), dtype=complex)
    comp[:, 0, :] = -p[:, n - 1 :: -1] / safe[:, None]
    idx = np.arange(1, n)
    comp[:, idx, idx - 1] = 1.0
    return comp, ok


def max_root_modulus(c, b, mu):
    """Largest root modulus of ``c(z) - mu_i b(z)`` for every ``mu_i``."""
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    if c.size < 2:
        raise ValueError("polynomial degree must be at least 1")
    mu_arr = np.asarray(mu, dtype=complex)
    flat = np.atleast_1d(mu_arr).ravel()
    out = np.empty(flat.size)
    for start in range(0, flat.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        comp, ok = _companions(c, b, flat[sl])
        # geev balances internally
        mods = np.abs(np.linalg.eigvals(comp)).max(axis=1)
        out[sl] = np.where(ok, mods, np.inf)
    return out.reshape(np.atleast_1d(mu_arr).shape)


def first_exceeding(c, b, mu, threshold: float) -> int:
    """Index of the first ``mu_i`` with largest root modulus ``>= threshold``, else -1."""
    flat = np.ravel(np.asarray(mu, dtype=complex))
    for start in range(0, flat.size, 256):
        mods = max_root_modulus(c, b, flat[start : start + 256])
        bad = np.flatnonzero(~(mods < threshold))
        if bad.size:
            return int(start + bad[0])
    return -1
