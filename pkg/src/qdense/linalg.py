"""Small dense complex linear algebra.

Matrices and vectors are plain ``complex128`` numpy arrays. Products, adjoints
and Kronecker products defer to numpy; the Hermitian eigensolver and the SVD
are cyclic Jacobi methods written here, using a round-robin pairing so that a
whole round of disjoint rotations is applied as one vectorized update.
"""

from __future__ import annotations

import numpy as np

TOL_HERM = 1e-10
TOL_RECON = 1e-9

_EPS = np.finfo(float).eps


class NumericalError(ArithmeticError):
    """An iterative routine failed to converge within its sweep cap."""


def cmatrix(data, *, name: str = "matrix") -> np.ndarray:
    """Coerce ``data`` to a finite 2-D complex array."""
    a = np.array(data, dtype=complex)
    if a.ndim != 2 or 0 in a.shape:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def cvector(data, *, name: str = "vector") -> np.ndarray:
    """Coerce ``data`` to a finite 1-D complex array."""
    v = np.array(data, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(np.asarray(a, dtype=complex), -1, -2))


def kron(a, b) -> np.ndarray:
    """Kronecker product; composite index is ``i_a * b.shape[0] + i_b``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hermitian_residual(a) -> float:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - adjoint(a))))


def _round_robin_orders(n: int) -> list[np.ndarray]:
    """Index orders, one per round, that place each round's pairs side by side.

    Over one sweep the rounds pair every ``p != q`` exactly once (circle
    method). In each order positions ``(2i, 2i + 1)`` hold a pair; for odd
    ``n`` the idle index sits last.
    """
    m = n + (n % 2)
    players = list(range(m))
    orders = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        flat = [k for p, q in pairs if p < n and q < n for k in (p, q)]
        flat += [k for p, q in pairs if not (p < n and q < n) for k in (p, q) if k < n]
        orders.append(np.array(flat))
        players = [players[0], players[-1]] + players[1:-1]
    return orders


def _transitions(n: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Initial order plus the permutations stepping between successive rounds."""
    orders = _round_robin_orders(n)
    steps = []
    for cur, nxt in zip(orders, orders[1:] + orders[:1]):
        where = np.empty(n, dtype=int)
        where[cur] = np.arange(n)
        steps.append(where[nxt])
    return orders[0], steps


def _rotations(app, aqq, apq):
    """Jacobi rotations zeroing the (p, q) entries of Hermitian 2x2 blocks.

    ``app``/``aqq`` are the real diagonals and ``apq`` the complex off-diagonal,
    each of shape ``(batch, pairs)``. The rotation on a pair is
    ``G = [[c, s], [-s * conj(w), c * conj(w)]]`` with ``G^H A G`` diagonal;
    returns ``(c, s, w)``.
    """
    mag = np.abs(apq)
    live = mag > 0
    safe = np.where(live, mag, 1.0)
    phase = np.where(live, apq / safe, 1.0)
    tau = (aqq - app) / (2.0 * safe)
    t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
    t = np.where(live, t, 0.0)
    c = 1.0 / np.hypot(1.0, t)
    return c, t * c, phase


def _rotate_columns(x, k: int, c, s, w) -> None:
    """In place ``x <- x @ G`` on column pairs ``(2i, 2i + 1)``, ``i < k``."""
    c, s, wc = c[:, None, :], s[:, None, :], np.conj(w)[:, None, :]
    xp, xq = x[:, :, 0 : 2 * k : 2], x[:, :, 1 : 2 * k : 2]
    xp, xq = c * xp - s * wc * xq, s * xp + c * wc * xq
    x[:, :, 0 : 2 * k : 2], x[:, :, 1 : 2 * k : 2] = xp, xq


def _rotate_rows(x, k: int, c, s, w) -> None:
    """In place ``x <- G^H @ x`` on row pairs ``(2i, 2i + 1)``, ``i < k``."""
    c, s, w = c[:, :, None], s[:, :, None], w[:, :, None]
    xp, xq = x[:, 0 : 2 * k : 2, :], x[:, 1 : 2 * k : 2, :]
    xp, xq = c * xp - s * w * xq, s * xp + c * w * xq
    x[:, 0 : 2 * k : 2, :], x[:, 1 : 2 * k : 2, :] = xp, xq


def _sweep_cap(n: int) -> int:
    return 100 * n * n


def hermitian_eig(a, *, vectors: bool = True):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Accepts a single ``(n, n)`` matrix or a stack ``(..., n, n)``. Eigenvalues
    are returned in descending order (stable for ties) with the matching
    eigenvectors as columns, so ``a == v @ diag(w) @ v^H``. With
    ``vectors=False`` only the eigenvalues are returned.
    """
    a = np.array(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    res = hermitian_residual(a)
    if res > TOL_HERM:
        raise ValueError(f"matrix is not Hermitian (residual {res:.3e})")

    lead, n = a.shape[:-2], a.shape[-1]
    work = a.reshape((-1, n, n))
    work = 0.5 * (work + adjoint(work))
    vecs = np.broadcast_to(np.eye(n, dtype=complex), work.shape).copy() if vectors else None

    if n > 1:
        k = n // 2
        scale = np.linalg.norm(work, axis=(1, 2))
        target = (n * _EPS * scale) ** 2
        offdiag = ~np.eye(n, dtype=bool)
        first, steps = _transitions(n)
        pos = first
        work = work[:, first][:, :, first]
        if vectors:
            vecs = vecs[:, :, first]
        for _ in range(_sweep_cap(n)):
            off = np.sum(np.abs(work[:, offdiag]) ** 2, axis=1)
            if np.all(off <= target):
                break
            for step in steps:
                diag = np.diagonal(work, axis1=1, axis2=2).real
                rot = _rotations(
                    diag[:, 0 : 2 * k : 2],
                    diag[:, 1 : 2 * k : 2],
                    np.diagonal(work, offset=1, axis1=1, axis2=2)[:, 0 : 2 * k : 2],
                )
                _rotate_columns(work, k, *rot)
                _rotate_rows(work, k, *rot)
                work = work[:, step][:, :, step]
                pos = pos[step]
                if vectors:
                    _rotate_columns(vecs, k, *rot)
                    vecs = vecs[:, :, step]
            work = 0.5 * (work + adjoint(work))
        else:
            raise NumericalError(f"Jacobi eigensolver did not converge in {_sweep_cap(n)} sweeps")
        back = np.argsort(pos)
        work = work[:, back][:, :, back]
        if vectors:
            vecs = vecs[:, :, back]

    w = np.real(np.diagonal(work, axis1=1, axis2=2))
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1).reshape(lead + (n,))
    if not vectors:
        return w
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    return w, vecs.reshape(lead + (n, n))


def eigvalsh(a) -> np.ndarray:
    return hermitian_eig(a, vectors=False)


def _complete_basis(cols: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a ``dim x dim`` unitary by Gram-Schmidt."""
    basis = [cols[:, j] for j in range(cols.shape[1])]
    for e in np.eye(dim, dtype=complex):
        if len(basis) == dim:
            break
        v = e.copy()
        for _ in range(2):
            for b in basis:
                v -= np.vdot(b, v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
    return np.stack(basis, axis=1)


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD by one-sided (Hestenes) Jacobi.

    Returns ``(u, s, v)`` with ``a == u[:, :k] @ diag(s) @ v[:, :k]^H`` where
    ``k = min(a.shape)``; ``u`` and ``v`` are square unitaries and ``s`` is
    descending. Left vectors for numerically zero singular values are filled
    in arbitrarily to complete the basis.
    """
    a = cmatrix(a)
    rows, cols = a.shape
    if rows < cols:
        u, s, v = svd(adjoint(a))
        return v, s, u

    work = a.copy()[None]
    v = np.eye(cols, dtype=complex)[None]
    if cols > 1:
        k = cols // 2
        first, steps = _transitions(cols)
        pos = first
        work, v = work[:, :, first], v[:, :, first]
        for _ in range(_sweep_cap(cols)):
            worst = 0.0
            for step in steps:
                xp, xq = work[:, :, 0 : 2 * k : 2], work[:, :, 1 : 2 * k : 2]
                alpha = np.sum(np.abs(xp) ** 2, axis=1)
                beta = np.sum(np.abs(xq) ** 2, axis=1)
                gamma = np.sum(np.conj(xp) * xq, axis=1)
                denom = np.sqrt(alpha * beta)
                ratio = np.abs(gamma) / np.where(denom > 0, denom, 1.0)
                worst = max(worst, float(np.max(ratio)))
                gamma = np.where(ratio > _EPS, gamma, 0.0)
                rot = _rotations(alpha, beta, gamma)
                _rotate_columns(work, k, *rot)
                _rotate_columns(v, k, *rot)
                work, v = work[:, :, step], v[:, :, step]
                pos = pos[step]
            if worst <= rows * _EPS:
                break
        else:
            raise NumericalError(f"Jacobi SVD did not converge in {_sweep_cap(cols)} sweeps")
        back = np.argsort(pos)
        work, v = work[:, :, back], v[:, :, back]

    work, v = work[0], v[0]
    s = np.linalg.norm(work, axis=0)
    order = np.argsort(-s, kind="stable")
    s, work, v = s[order], work[:, order], v[:, order]

    cutoff = max(rows, cols) * _EPS * (s[0] if s.size else 0.0)
    keep = s > cutoff
    u = work[:, keep] / s[keep]
    u = _complete_basis(u, rows)
    return u, s, v
