"""Slot schedule, slot-by-slot signal flow and the extended channel matrix.

The first ``num_rx`` slots are broadcast slots: every transmitter sends the
symbol meant for the receiver with the same index as the slot, and relays
only listen. In each of the remaining ``num_tx - 1`` relay slots the relays
forward precoded copies of everything they stored, jointly with a single
transmitter ``m' = t - num_rx`` that resends the sum of all its symbols.

The end-to-end map is computed twice on purpose: by stepping through the
slots (:func:`simulate_slots`) and as one block lower-triangular matrix
(:func:`assemble_extended_channel`). Tests use each as an oracle for the other.
"""

from dataclasses import dataclass

import numpy as np

from .model import NOISELESS

__all__ = [
    "SlotSchedule",
    "ExtendedChannel",
    "SlotTrace",
    "schedule",
    "active_tx",
    "tx_signal",
    "stacked_tx",
    "relay_rx",
    "relay_tx",
    "assemble_S",
    "assemble_extended_channel",
    "simulate_slots",
    "rx_signal_slotwise",
    "select_rx",
    "relay_noise_map",
]


@dataclass(frozen=True)
class SlotSchedule:
    num_slots: int
    broadcast_slots: range
    relay_slots: range


def schedule(cfg):
    return SlotSchedule(cfg.num_slots, cfg.broadcast_slots, cfg.relay_slots)


def active_tx(t, cfg):
    """Index of the single transmitter active in relay slot `t`."""
    if t not in cfg.relay_slots:
        raise ValueError(f"slot {t} is not a relay slot")
    return t - cfg.num_rx


def _check_slot(t, cfg):
    if not 0 <= t < cfg.num_slots:
        raise IndexError(f"slot {t} outside 0..{cfg.num_slots - 1}")


def tx_signal(t, d, cfg):
    """Transmit vector of all transmitters in slot `t` (length ``num_tx``).

    In broadcast slot ``t`` this is row ``t`` of the symbol grid. In relay
    slot ``t`` only transmitter ``m' = t - num_rx`` is active and sends the
    sum of its symbols over all receivers.
    """
    _check_slot(t, cfg)
    d = np.asarray(d, dtype=complex)
    if t < cfg.num_rx:
        return d[t].copy()
    m = active_tx(t, cfg)
    x = np.zeros(cfg.num_tx, dtype=complex)
    x[m] = d[:, m].sum()
    return x


def stacked_tx(d, cfg):
    """Transmit vectors of all slots stacked slot after slot (length ``T * num_tx``)."""
    return np.concatenate([tx_signal(t, d, cfg) for t in range(cfg.num_slots)])


def relay_rx(t, ch, x, noise=NOISELESS, rng=None):
    """Signals received by every relay in broadcast slot `t`.

    Returns a list with one vector of length ``L_j`` per relay.
    """
    if t >= ch.num_slots:
        raise IndexError(f"slot {t} outside the channel set")
    out = []
    for f in ch.tx_to_relay:
        y = f[t] @ x
        if noise.enabled:
            y = y + noise.sample(rng, y.shape)
        out.append(y)
    return out


def relay_tx(t, stored, pre, cfg):
    """Signals sent by every relay in slot `t`.

    Parameters
    ----------
    stored : sequence of ndarray
        Per relay, the raw receptions of all broadcast slots, shape
        ``(num_rx, L_j)``.
    pre : PrecoderSet
        Relay precoders; a missing entry raises ``KeyError``.
    """
    _check_slot(t, cfg)
    out = []
    for j, y in enumerate(stored):
        if t < cfg.num_rx:
            out.append(np.zeros(y.shape[1], dtype=complex))
            continue
        acc = np.zeros(y.shape[1], dtype=complex)
        for tau in cfg.broadcast_slots:
            acc = acc + pre[j, t, tau] @ y[tau]
        out.append(acc)
    return out


def assemble_S(t, tau, ch, pre):
    """Aggregate two-hop matrix ``sum_j G_j(t) R_j(t, tau) F_j(tau)``, shape ``(num_rx, num_tx)``."""
    num_rx, num_tx = ch.direct.shape[1:]
    s = np.zeros((num_rx, num_tx), dtype=complex)
    for j, (f, g) in enumerate(zip(ch.tx_to_relay, ch.relay_to_rx)):
        s += g[t] @ pre[j, t, tau] @ f[tau]
    return s


@dataclass(frozen=True)
class ExtendedChannel:
    """End-to-end channel over the whole symbol extension.

    Attributes
    ----------
    matrix : ndarray, shape (T * num_rx, T * num_tx)
        Maps the stacked transmit vector to the stacked receive vector.
    aggregate : ndarray, shape (num_tx - 1, num_rx, num_rx, num_tx)
        ``aggregate[t - num_rx, tau]`` is the relay block of relay slot ``t``
        fed by broadcast slot ``tau``.
    """

    matrix: np.ndarray
    aggregate: np.ndarray
    num_tx: int
    num_rx: int

    def block(self, t, tau):
        r, c = self.num_rx, self.num_tx
        return self.matrix[t * r:(t + 1) * r, tau * c:(tau + 1) * c]


def assemble_extended_channel(ch, pre, cfg):
    """Build the block lower-triangular end-to-end matrix.

    Diagonal block ``t`` is the direct channel of slot ``t``; block
    ``(t, tau)`` for a relay slot ``t`` and broadcast slot ``tau`` is the
    aggregate relay matrix. All other blocks are exactly zero.
    """
    N, M, T = cfg.num_rx, cfg.num_tx, cfg.num_slots
    big = np.zeros((T * N, T * M), dtype=complex)
    agg = np.zeros((max(M - 1, 0), N, N, M), dtype=complex)
    for t in range(T):
        big[t * N:(t + 1) * N, t * M:(t + 1) * M] = ch.direct[t]
    for t in cfg.relay_slots:
        for tau in cfg.broadcast_slots:
            s = assemble_S(t, tau, ch, pre)
            agg[t - N, tau] = s
            big[t * N:(t + 1) * N, tau * M:(tau + 1) * M] = s
    return ExtendedChannel(big, agg, M, N)


@dataclass(frozen=True)
class SlotTrace:
    """Everything that happened during one pass over the symbol extension.

    ``tx`` is ``(T, num_tx)``, ``rx`` is ``(T, num_rx)``; ``relay_in[j]`` is
    ``(num_rx, L_j)`` and ``relay_out[j]`` is ``(T, L_j)``.
    """

    tx: np.ndarray
    rx: np.ndarray
    relay_in: tuple
    relay_out: tuple

    @property
    def per_rx(self):
        """Receive vector of every receiver over all slots, shape ``(num_rx, T)``."""
        return self.rx.T.copy()

    def relay_power(self):
        """Mean transmit power per relay antenna over the relay slots."""
        total = sum(float(np.sum(np.abs(o) ** 2)) for o in self.relay_out)
        antennas = sum(o.shape[1] for o in self.relay_out)
        slots = self.tx.shape[0] - self.relay_in[0].shape[0] if self.relay_in else 0
        if antennas == 0 or slots == 0:
            return 0.0
        return total / (antennas * slots)


def simulate_slots(ch, pre, d, cfg, noise=NOISELESS, rng=None):
    """Run the protocol one slot at a time.

    Transmit symbols are scaled by ``sqrt(P)`` of the noise model; with noise
    enabled, receiver and relay noise are drawn from `rng` (default: the
    config's noise stream).
    """
    if noise.enabled and rng is None:
        rng = noise.rng(cfg)
    N, T = cfg.num_rx, cfg.num_slots
    amp = noise.amplitude
    stored = [np.zeros((N, l), dtype=complex) for l in cfg.relay_antennas]
    tx = np.zeros((T, cfg.num_tx), dtype=complex)
    rx = np.zeros((T, N), dtype=complex)
    relay_out = [np.zeros((T, l), dtype=complex) for l in cfg.relay_antennas]
    for t in range(T):
        x = amp * tx_signal(t, d, cfg)
        tx[t] = x
        if t < N:
            for j, y in enumerate(relay_rx(t, ch, x, noise, rng)):
                stored[j][t] = y
        xr = relay_tx(t, stored, pre, cfg)
        y = ch.direct[t] @ x
        for j, g in enumerate(ch.relay_to_rx):
            relay_out[j][t] = xr[j]
            y = y + g[t] @ xr[j]
        if noise.enabled:
            y = y + noise.sample(rng, y.shape)
        rx[t] = y
    return SlotTrace(tx, rx, tuple(stored), tuple(relay_out))


def rx_signal_slotwise(ch, pre, d, cfg, noise=NOISELESS, rng=None):
    """Receive vectors of all receivers, shape ``(num_rx, T)``; row ``n`` is receiver ``n``."""
    return simulate_slots(ch, pre, d, cfg, noise, rng).per_rx


def select_rx(n, stacked, cfg):
    """Pick receiver `n`'s entries out of a stacked per-slot vector or matrix.

    This is left multiplication by ``kron(I_T, e_n^T)``.
    """
    return np.asarray(stacked)[n::cfg.num_rx]


def relay_noise_map(n, ch, pre, cfg):
    """Linear map from all relay noise samples to receiver `n`'s slots.

    Columns are ordered relay by relay, and within a relay broadcast slot by
    broadcast slot, ``L_j`` entries each. Shape ``(T, num_rx * sum(L_j))``.
    """
    N, T = cfg.num_rx, cfg.num_slots
    blocks = []
    for j, (g, l) in enumerate(zip(ch.relay_to_rx, cfg.relay_antennas)):
        a = np.zeros((T, N * l), dtype=complex)
        for t in cfg.relay_slots:
            for tau in cfg.broadcast_slots:
                a[t, tau * l:(tau + 1) * l] = g[t][n] @ pre[j, t, tau]
        blocks.append(a)
    if not blocks:
        return np.zeros((T, 0), dtype=complex)
    return np.hstack(blocks)
