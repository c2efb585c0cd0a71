"""
Periodic stencil kernels shared by the grid and solver modules.

Every kernel exists twice: a plain-NumPy implementation and a Numba
``@njit`` implementation with identical per-element arithmetic, so both
paths produce bitwise-equal results.  The active set is chosen at import
time: Numba is used when it is importable and the environment variable
``FLUCTLAB_DISABLE_NUMBA`` is not set to a truthy value.

All kernels act on batched fields: shape (B, n) in one dimension and
(B, n, n) in two, where B indexes independent states advanced together.
Faces follow the forward convention: face i of an axis sits between
cells i and i+1 (periodic wrap), so ``div(grad(u))`` is the standard
second-order Laplacian and every divergence telescopes to zero over the
grid.
"""

import os

import numpy as np

_DISABLE = os.environ.get("FLUCTLAB_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false")

try:
    if _DISABLE:
        raise ImportError("numba disabled by FLUCTLAB_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    njit = None
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# NumPy implementations
# ---------------------------------------------------------------------------

def np_grad1(u: np.ndarray, inv_dx: float) -> np.ndarray:
    """Forward difference to faces along the last axis of (B, n)."""
    out = np.empty_like(u)
    out[:, :-1] = u[:, 1:] - u[:, :-1]
    out[:, -1] = u[:, 0] - u[:, -1]
    out *= inv_dx
    return out


def np_div1(f: np.ndarray, inv_dx: float) -> np.ndarray:
    """Backward difference from faces along the last axis of (B, n)."""
    out = np.empty_like(f)
    out[:, 1:] = f[:, 1:] - f[:, :-1]
    out[:, 0] = f[:, 0] - f[:, -1]
    out *= inv_dx
    return out


def np_favg1(u: np.ndarray) -> np.ndarray:
    """Arithmetic cell-to-face average along the last axis of (B, n)."""
    out = np.empty_like(u)
    out[:, :-1] = u[:, :-1] + u[:, 1:]
    out[:, -1] = u[:, -1] + u[:, 0]
    out *= 0.5
    return out


def np_gradx(u: np.ndarray, inv_dx: float) -> np.ndarray:
    """Forward difference along axis 1 of (B, n, n)."""
    out = np.empty_like(u)
    out[:, :-1, :] = u[:, 1:, :] - u[:, :-1, :]
    out[:, -1, :] = u[:, 0, :] - u[:, -1, :]
    out *= inv_dx
    return out


def np_grady(u: np.ndarray, inv_dx: float) -> np.ndarray:
    """Forward difference along axis 2 of (B, n, n)."""
    out = np.empty_like(u)
    out[:, :, :-1] = u[:, :, 1:] - u[:, :, :-1]
    out[:, :, -1] = u[:, :, 0] - u[:, :, -1]
    out *= inv_dx
    return out


def np_divx(f: np.ndarray, inv_dx: float) -> np.ndarray:
    """Backward difference along axis 1 of (B, n, n)."""
    out = np.empty_like(f)
    out[:, 1:, :] = f[:, 1:, :] - f[:, :-1, :]
    out[:, 0, :] = f[:, 0, :] - f[:, -1, :]
    out *= inv_dx
    return out


def np_divy(f: np.ndarray, inv_dx: float) -> np.ndarray:
    """Backward difference along axis 2 of (B, n, n)."""
    out = np.empty_like(f)
    out[:, :, 1:] = f[:, :, 1:] - f[:, :, :-1]
    out[:, :, 0] = f[:, :, 0] - f[:, :, -1]
    out *= inv_dx
    return out


def np_favgx(u: np.ndarray) -> np.ndarray:
    """Cell-to-face average along axis 1 of (B, n, n)."""
    out = np.empty_like(u)
    out[:, :-1, :] = u[:, :-1, :] + u[:, 1:, :]
    out[:, -1, :] = u[:, -1, :] + u[:, 0, :]
    out *= 0.5
    return out


def np_favgy(u: np.ndarray) -> np.ndarray:
    """Cell-to-face average along axis 2 of (B, n, n)."""
    out = np.empty_like(u)
    out[:, :, :-1] = u[:, :, :-1] + u[:, :, 1:]
    out[:, :, -1] = u[:, :, -1] + u[:, :, 0]
    out *= 0.5
    return out


# ---------------------------------------------------------------------------
# Numba implementations (same arithmetic, explicit loops, no fastmath)
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def nb_grad1(u, inv_dx):
        B, n = u.shape
        out = np.empty_like(u)
        for b in range(B):
            for i in range(n - 1):
                out[b, i] = (u[b, i + 1] - u[b, i]) * inv_dx
            out[b, n - 1] = (u[b, 0] - u[b, n - 1]) * inv_dx
        return out

    @njit(cache=True, nogil=True)
    def nb_div1(f, inv_dx):
        B, n = f.shape
        out = np.empty_like(f)
        for b in range(B):
            out[b, 0] = (f[b, 0] - f[b, n - 1]) * inv_dx
            for i in range(1, n):
                out[b, i] = (f[b, i] - f[b, i - 1]) * inv_dx
        return out

    @njit(cache=True, nogil=True)
    def nb_favg1(u):
        B, n = u.shape
        out = np.empty_like(u)
        for b in range(B):
            for i in range(n - 1):
                out[b, i] = (u[b, i] + u[b, i + 1]) * 0.5
            out[b, n - 1] = (u[b, n - 1] + u[b, 0]) * 0.5
        return out

    @njit(cache=True, nogil=True)
    def nb_gradx(u, inv_dx):
        B, n, m = u.shape
        out = np.empty_like(u)
        for b in range(B):
            for i in range(n - 1):
                for j in range(m):
                    out[b, i, j] = (u[b, i + 1, j] - u[b, i, j]) * inv_dx
            for j in range(m):
                out[b, n - 1, j] = (u[b, 0, j] - u[b, n - 1, j]) * inv_dx
        return out

    @njit(cache=True, nogil=True)
    def nb_grady(u, inv_dx):
        B, n, m = u.shape
        out = np.empty_like(u)
        for b in range(B):
            for i in range(n):
                for j in range(m - 1):
                    out[b, i, j] = (u[b, i, j + 1] - u[b, i, j]) * inv_dx
                out[b, i, m - 1] = (u[b, i, 0] - u[b, i, m - 1]) * inv_dx
        return out

    @njit(cache=True, nogil=True)
    def nb_divx(f, inv_dx):
        B, n, m = f.shape
        out = np.empty_like(f)
        for b in range(B):
            for j in range(m):
                out[b, 0, j] = (f[b, 0, j] - f[b, n - 1, j]) * inv_dx
            for i in range(1, n):
                for j in range(m):
                    out[b, i, j] = (f[b, i, j] - f[b, i - 1, j]) * inv_dx
        return out

    @njit(cache=True, nogil=True)
    def nb_divy(f, inv_dx):
        B, n, m = f.shape
        out = np.empty_like(f)
        for b in range(B):
            for i in range(n):
                out[b, i, 0] = (f[b, i, 0] - f[b, i, m - 1]) * inv_dx
                for j in range(1, m):
                    out[b, i, j] = (f[b, i, j] - f[b, i, j - 1]) * inv_dx
        return out

    @njit(cache=True, nogil=True)
    def nb_favgx(u):
        B, n, m = u.shape
        out = np.empty_like(u)
        for b in range(B):
            for i in range(n - 1):
                for j in range(m):
                    out[b, i, j] = (u[b, i, j] + u[b, i + 1, j]) * 0.5
            for j in range(m):
                out[b, n - 1, j] = (u[b, n - 1, j] + u[b, 0, j]) * 0.5
        return out

    @njit(cache=True, nogil=True)
    def nb_favgy(u):
        B, n, m = u.shape
        out = np.empty_like(u)
        for b in range(B):
            for i in range(n):
                for j in range(m - 1):
                    out[b, i, j] = (u[b, i, j] + u[b, i, j + 1]) * 0.5
                out[b, i, m - 1] = (u[b, i, m - 1] + u[b, i, 0]) * 0.5
        return out


# ---------------------------------------------------------------------------
# Active set
# ---------------------------------------------------------------------------

if HAS_NUMBA:
    grad1, div1, favg1 = nb_grad1, nb_div1, nb_favg1
    gradx, grady = nb_gradx, nb_grady
    divx, divy = nb_divx, nb_divy
    favgx, favgy = nb_favgx, nb_favgy
else:
    grad1, div1, favg1 = np_grad1, np_div1, np_favg1
    gradx, grady = np_gradx, np_grady
    divx, divy = np_divx, np_divy
    favgx, favgy = np_favgx, np_favgy


NUMPY_KERNELS = {
    "grad1": np_grad1, "div1": np_div1, "favg1": np_favg1,
    "gradx": np_gradx, "grady": np_grady,
    "divx": np_divx, "divy": np_divy,
    "favgx": np_favgx, "favgy": np_favgy,
}

if HAS_NUMBA:
    NUMBA_KERNELS = {
        "grad1": nb_grad1, "div1": nb_div1, "favg1": nb_favg1,
        "gradx": nb_gradx, "grady": nb_grady,
        "divx": nb_divx, "divy": nb_divy,
        "favgx": nb_favgx, "favgy": nb_favgy,
    }
else:
    NUMBA_KERNELS = {}
