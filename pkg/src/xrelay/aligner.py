"""Relay precoders that align interference at every receiver.

For a relay slot ``t`` and a broadcast slot ``tau``, each unintended
receiver ``n != tau`` must see the ``num_tx`` symbols sent in slot ``tau``
along one common direction. Written per transmitter ``m != m'`` this is one
scalar equation that is linear in the relay matrices ``R_j(t, tau)``.
Vectorising with ``vec(A C B) = kron(B^T, A) vec(C)`` turns the
``(num_rx - 1)(num_tx - 1)`` equations into one linear system in
``sum_j L_j**2`` unknowns.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import (DEFAULT_COND_CAP, DEFAULT_RANK_TOL, kron, min_norm_solve, numerical_rank,
                     solve_square, unvec, vec)
from .model import InfeasibleConfigError, check_feasibility

__all__ = [
    "PrecoderSet",
    "AlignmentSystem",
    "RESIDUAL_TOL",
    "build_row",
    "build_system",
    "solve_precoders",
    "system_ranks",
    "aggregate_gain",
    "verify_alignment_condition",
]

RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class PrecoderSet:
    """Relay precoding matrices for every relay slot and broadcast slot.

    ``matrices[j]`` has shape ``(num_tx - 1, num_rx, L_j, L_j)``; entry
    ``[t - num_rx, tau]`` is the matrix relay ``j`` applies in slot ``t`` to
    what it received in slot ``tau``. Index as ``pre[j, t, tau]``.
    """

    matrices: tuple
    num_rx: int

    def __getitem__(self, key):
        j, t, tau = key
        if not 0 <= j < len(self.matrices):
            raise KeyError(f"no relay {j}")
        r = self.matrices[j]
        k = t - self.num_rx
        if not (0 <= k < r.shape[0] and 0 <= tau < r.shape[1]):
            raise KeyError(f"no precoder for relay {j}, slot {t}, broadcast slot {tau}")
        return r[k, tau]

    def vector(self, t, tau):
        """All relay matrices for ``(t, tau)`` vectorised and concatenated."""
        parts = [vec(self[j, t, tau]) for j in range(len(self.matrices))]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=complex)

    @classmethod
    def zeros(cls, cfg):
        k = max(cfg.num_tx - 1, 0)
        return cls(tuple(np.zeros((k, cfg.num_rx, l, l), dtype=complex)
                         for l in cfg.relay_antennas), cfg.num_rx)

    @classmethod
    def random(cls, cfg, rng):
        """Unit-variance complex Gaussian precoders (no alignment)."""
        k = max(cfg.num_tx - 1, 0)
        mats = []
        for l in cfg.relay_antennas:
            shape = (k, cfg.num_rx, l, l)
            mats.append((rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2))
        return cls(tuple(mats), cfg.num_rx)


@dataclass(frozen=True)
class AlignmentSystem:
    """``V r = b`` for one ``(t, tau)`` pair; ``rows`` lists the ``(n, m)`` of each row."""

    t: int
    tau: int
    V: np.ndarray
    b: np.ndarray
    rows: tuple


def build_row(n, m, t, tau, ch, cfg):
    """One alignment equation: receiver `n`, transmitter `m`, slots `t` and `tau`.

    Returns ``(row, rhs)`` where ``row @ r(t, tau) = rhs`` and ``r`` stacks
    ``vec(R_j(t, tau))`` over the relays. The block for relay ``j`` is
    ``kron(df^T, g^T)`` with ``g^T`` row ``n`` of the relay-to-receiver
    channel in slot ``t`` and::

        df = h[n, m'](tau) f_m(tau) - h[n, m](tau) f_m'(tau)

    The right-hand side is ``h[n, m'](t) * h[n, m](tau)``.
    """
    mp = t - cfg.num_rx
    if not 0 <= mp < cfg.num_tx - 1:
        raise ValueError(f"slot {t} is not a relay slot")
    if n == tau:
        raise ValueError("receiver index equals the broadcast slot (desired signal, no equation)")
    if m == mp:
        raise ValueError("transmitter index equals the active transmitter of the slot")
    h = ch.direct
    blocks = []
    for f, g in zip(ch.tx_to_relay, ch.relay_to_rx):
        df = h[tau, n, mp] * f[tau][:, m] - h[tau, n, m] * f[tau][:, mp]
        blocks.append(kron(df[np.newaxis, :], g[t][n][np.newaxis, :])[0])
    row = np.concatenate(blocks) if blocks else np.zeros(0, dtype=complex)
    rhs = h[t, n, mp] * h[tau, n, m]
    return row, complex(rhs)


def build_system(t, tau, ch, cfg):
    """Stack every alignment equation of ``(t, tau)``.

    Rows run over receivers ``n != tau`` (outer) and transmitters
    ``m != m'`` (inner), both ascending.
    """
    mp = t - cfg.num_rx
    pairs = tuple((n, m) for n in range(cfg.num_rx) if n != tau
                  for m in range(cfg.num_tx) if m != mp)
    V = np.zeros((len(pairs), cfg.num_unknowns), dtype=complex)
    b = np.zeros(len(pairs), dtype=complex)
    for i, (n, m) in enumerate(pairs):
        V[i], b[i] = build_row(n, m, t, tau, ch, cfg)
    return AlignmentSystem(t, tau, V, b, pairs)


def solve_precoders(ch, cfg, rank_tol=DEFAULT_RANK_TOL, cond_cap=DEFAULT_COND_CAP):
    """Solve every alignment system and reshape the solutions into matrices.

    A square system is solved directly; a wide one gets the minimum-norm
    solution.

    Raises
    ------
    InfeasibleConfigError
        If the relays have fewer unknowns than there are equations.
    RankDeficientError, IllConditionedError
        If a system matrix loses row rank (a probability-zero channel draw).
    """
    feas = check_feasibility(cfg)
    if not feas:
        raise InfeasibleConfigError(
            f"{cfg.num_unknowns} precoder unknowns < {cfg.num_equations} alignment equations")
    k = max(cfg.num_tx - 1, 0)
    mats = [np.zeros((k, cfg.num_rx, l, l), dtype=complex) for l in cfg.relay_antennas]
    offsets = np.cumsum([0] + [l * l for l in cfg.relay_antennas])
    for t in cfg.relay_slots:
        for tau in cfg.broadcast_slots:
            sys_ = build_system(t, tau, ch, cfg)
            if feas.margin == 0:
                r = solve_square(sys_.V, sys_.b, cond_cap)
            else:
                r = min_norm_solve(sys_.V, sys_.b, rank_tol)
            if sys_.b.size:
                resid = np.linalg.norm(sys_.V @ r - sys_.b)
                if resid > RESIDUAL_TOL * np.linalg.norm(sys_.b):
                    raise np.linalg.LinAlgError(
                        f"alignment residual {resid:.3g} too large at slot {t}, {tau}")
            for j, l in enumerate(cfg.relay_antennas):
                mats[j][t - cfg.num_rx, tau] = unvec(r[offsets[j]:offsets[j + 1]], l, l)
    return PrecoderSet(tuple(mats), cfg.num_rx)


def system_ranks(ch, cfg, tol=DEFAULT_RANK_TOL):
    """Numerical rank of every alignment system matrix, keyed by ``(t, tau)``."""
    return {(t, tau): numerical_rank(build_system(t, tau, ch, cfg).V, tol)
            for t in cfg.relay_slots for tau in cfg.broadcast_slots}


def aggregate_gain(n, m, t, tau, ch, pre):
    """Two-hop gain ``sum_j g_nj(t)^T R_j(t, tau) f_jm(tau)`` from transmitter `m` to receiver `n`."""
    s = 0j
    for j, (f, g) in enumerate(zip(ch.tx_to_relay, ch.relay_to_rx)):
        s += g[t][n] @ pre[j, t, tau] @ f[tau][:, m]
    return complex(s)


def verify_alignment_condition(ch, pre, cfg):
    """Largest relative violation of the alignment equalities.

    For every relay slot ``t``, broadcast slot ``tau``, receiver ``n != tau``
    and transmitter ``m != m'`` compares::

        (s[n, m'](t, tau) + h[n, m'](t)) / h[n, m'](tau)  with  s[n, m](t, tau) / h[n, m](tau)

    and returns ``max |lhs - rhs| / max(|lhs|, |rhs|)``; 0 when there is
    nothing to check.
    """
    h = ch.direct
    worst = 0.0
    for t in cfg.relay_slots:
        mp = t - cfg.num_rx
        for tau in cfg.broadcast_slots:
            for n in range(cfg.num_rx):
                if n == tau:
                    continue
                lhs = (aggregate_gain(n, mp, t, tau, ch, pre) + h[t, n, mp]) / h[tau, n, mp]
                for m in range(cfg.num_tx):
                    if m == mp:
                        continue
                    rhs = aggregate_gain(n, m, t, tau, ch, pre) / h[tau, n, m]
                    scale = max(abs(lhs), abs(rhs))
                    if scale > 0:
                        worst = max(worst, abs(lhs - rhs) / scale)
    return worst
