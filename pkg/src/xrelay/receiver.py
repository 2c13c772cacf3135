"""Per-receiver effective channels and zero-forcing decoding.

Symbols are stacked receiver by receiver: the symbol from transmitter ``m``
to receiver ``n`` sits at index ``n * num_tx + m`` of the stacked vector
``d`` (which is ``grid.reshape(-1)`` for a ``(num_rx, num_tx)`` grid).
"""

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_RANK_TOL, RankDeficientError, numerical_rank, right_pinv_apply
from .scheme import select_rx

__all__ = [
    "EffectiveChannel",
    "build_U",
    "stack_symbols",
    "extract_desired",
    "effective_channel",
    "decode",
    "zf_filter",
    "interference_basis",
    "interference_collinearity",
]


def build_U(cfg):
    """Map from stacked symbols to stacked transmit vectors, shape ``(T*num_tx, num_rx*num_tx)``.

    The top block is the identity (broadcast slots). Relay slot ``num_rx + k``
    contributes the block ``kron(ones(num_rx)^T, e_k e_k^T)``, which sums the
    symbols of transmitter ``k`` over all receivers.
    """
    M, N = cfg.num_tx, cfg.num_rx
    blocks = [np.eye(N * M)]
    for k in range(M - 1):
        e = np.zeros((M, M))
        e[k, k] = 1.0
        blocks.append(np.kron(np.ones((1, N)), e))
    return np.vstack(blocks)


def stack_symbols(d):
    return np.asarray(d, dtype=complex).reshape(-1)


def extract_desired(n, stacked, cfg):
    """``kron(e_n^T, I_M) @ stacked``: the block belonging to receiver `n`."""
    M = cfg.num_tx
    return np.asarray(stacked)[n * M:(n + 1) * M]


@dataclass(frozen=True)
class EffectiveChannel:
    """What receiver `n` sees over the symbol extension, ``y_n = H_hat @ d``."""

    n: int
    H_hat: np.ndarray
    desired_cols: np.ndarray
    interference_cols: np.ndarray

    @property
    def desired(self):
        return self.H_hat[:, self.desired_cols]

    @property
    def interference(self):
        return self.H_hat[:, self.interference_cols]


def effective_channel(n, ext, U, cfg):
    """``kron(I_T, e_n^T) @ H_tilde @ U`` for receiver `n`."""
    M, N = cfg.num_tx, cfg.num_rx
    H_hat = select_rx(n, ext.matrix, cfg) @ U
    cols = np.arange(N * M)
    desired = cols[n * M:(n + 1) * M]
    interference = np.concatenate([cols[:n * M], cols[(n + 1) * M:]])
    return EffectiveChannel(n, H_hat, desired, interference)


def zf_filter(eff, tol=DEFAULT_RANK_TOL):
    """Rows of the right pseudo-inverse of ``H_hat`` that produce the desired symbols, shape ``(M, T)``."""
    T = eff.H_hat.shape[0]
    return right_pinv_apply(eff.H_hat, np.eye(T), tol)[eff.desired_cols]


def decode(n, y_n, eff, tol=DEFAULT_RANK_TOL):
    """Zero-forcing estimate of receiver `n`'s symbols from its receive vector.

    Applies the right pseudo-inverse ``H^H (H H^H)^{-1}`` of the effective
    channel and keeps the receiver's own block.

    Raises
    ------
    RankDeficientError
        If the effective channel does not have full row rank.
    """
    if eff.n != n:
        raise ValueError(f"effective channel belongs to receiver {eff.n}, not {n}")
    rank = numerical_rank(eff.H_hat, tol)
    if rank < eff.H_hat.shape[0]:
        raise RankDeficientError(
            f"effective channel of receiver {n} has rank {rank} < {eff.H_hat.shape[0]}")
    z = right_pinv_apply(eff.H_hat, y_n, tol)
    return z[eff.desired_cols]


def interference_basis(n, eff, cfg):
    """One interference direction per broadcast slot ``tau != n``, shape ``(T, num_rx - 1)``.

    Uses the column of transmitter 0; once aligned, every transmitter of that
    slot points the same way.
    """
    M = cfg.num_tx
    cols = [tau * M for tau in range(cfg.num_rx) if tau != n]
    return eff.H_hat[:, cols]


def _sine(u, v):
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    # residual after projection; sqrt(1 - cos^2) loses half the digits near 0
    u = u / nu
    return float(np.linalg.norm(v - u * np.vdot(u, v)) / nv)


def interference_collinearity(n, eff, cfg):
    """Largest sine of the angle between an interference column and its slot's representative."""
    M = cfg.num_tx
    worst = 0.0
    for tau in range(cfg.num_rx):
        if tau == n:
            continue
        ref = eff.H_hat[:, tau * M]
        for m in range(1, M):
            worst = max(worst, _sine(ref, eff.H_hat[:, tau * M + m]))
    return worst
