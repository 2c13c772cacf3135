"""Network configuration, random channel realisations and data symbols.

Slot, transmitter, receiver and relay indices are 0-based everywhere in the
package: broadcast slots are ``0 .. num_rx - 1`` and relay slots are
``num_rx .. num_slots - 1``.
"""

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_RANK_TOL, numerical_rank

__all__ = [
    "ChannelMode",
    "Constellation",
    "NetworkConfig",
    "Feasibility",
    "ChannelSet",
    "NoiseModel",
    "InfeasibleConfigError",
    "make_config",
    "config_from_dict",
    "config_to_dict",
    "check_feasibility",
    "derive_seed",
    "draw_channels",
    "draw_symbols",
    "load_config",
    "NOISELESS",
]


class InfeasibleConfigError(ValueError):
    """Relays have fewer precoder unknowns than there are alignment equations."""


class ChannelMode(str, enum.Enum):
    TIME_VARYING = "varying"
    CONSTANT = "constant"


class Constellation(str, enum.Enum):
    GAUSSIAN = "gaussian"
    QPSK = "qpsk"


@dataclass(frozen=True)
class NetworkConfig:
    """Dimensions of a relay-aided X-network.

    Attributes
    ----------
    num_tx, num_rx : int
        Single-antenna transmitters and receivers.
    relay_antennas : tuple of int
        Antenna count of every relay; its length is the number of relays.
    channel_mode : ChannelMode
        Fresh channel every slot, or one realisation held for all slots.
    seed : int
        Master seed for every random draw tied to this config.
    constellation : Constellation
        Symbol alphabet used by :func:`draw_symbols`.
    """

    num_tx: int
    num_rx: int
    relay_antennas: tuple = ()
    channel_mode: ChannelMode = ChannelMode.TIME_VARYING
    seed: int = 0
    constellation: Constellation = Constellation.GAUSSIAN

    @property
    def num_relays(self):
        return len(self.relay_antennas)

    @property
    def num_slots(self):
        """Length of the symbol extension, ``num_tx + num_rx - 1``."""
        return self.num_tx + self.num_rx - 1

    @property
    def num_unknowns(self):
        """Precoder unknowns per alignment system, the sum of squared antenna counts."""
        return sum(l * l for l in self.relay_antennas)

    @property
    def num_equations(self):
        """Alignment equations per system, ``(num_rx - 1) * (num_tx - 1)``."""
        return (self.num_rx - 1) * (self.num_tx - 1)

    @property
    def relay_slots(self):
        return range(self.num_rx, self.num_slots)

    @property
    def broadcast_slots(self):
        return range(self.num_rx)

    def with_seed(self, seed):
        return make_config(self.num_tx, self.num_rx, self.num_relays, self.relay_antennas,
                           self.channel_mode, seed, self.constellation)


def make_config(num_tx, num_rx, num_relays, relay_antennas, channel_mode=ChannelMode.TIME_VARYING,
                seed=0, constellation=Constellation.GAUSSIAN):
    """Validate dimensions and build a :class:`NetworkConfig`."""
    for name, value in (("num_tx", num_tx), ("num_rx", num_rx), ("num_relays", num_relays)):
        if isinstance(value, bool) or int(value) != value:
            raise ValueError(f"{name} must be an integer, got {value!r}")
    if num_tx < 1 or num_rx < 1:
        raise ValueError("need at least one transmitter and one receiver")
    if num_relays < 0:
        raise ValueError("number of relays must be non-negative")
    relay_antennas = tuple(int(l) for l in relay_antennas)
    if len(relay_antennas) != num_relays:
        raise ValueError(f"got {len(relay_antennas)} antenna counts for {num_relays} relays")
    if any(l < 1 for l in relay_antennas):
        raise ValueError("every relay needs at least one antenna")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    return NetworkConfig(int(num_tx), int(num_rx), relay_antennas, ChannelMode(channel_mode),
                         seed, Constellation(constellation))


_CONFIG_KEYS = {"m", "n", "relay_antennas", "channel_mode", "seed", "constellation"}


def config_from_dict(doc):
    """Build a config from the JSON document layout.

    Keys are ``m``, ``n``, ``relay_antennas``, ``channel_mode``, ``seed`` and
    ``constellation``; only ``m`` and ``n`` are required.
    """
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    missing = {"m", "n"} - set(doc)
    if missing:
        raise ValueError(f"missing config keys: {', '.join(sorted(missing))}")
    antennas = list(doc.get("relay_antennas", []))
    return make_config(doc["m"], doc["n"], len(antennas), antennas,
                       doc.get("channel_mode", "varying"), doc.get("seed", 0),
                       doc.get("constellation", "gaussian"))


def config_to_dict(cfg):
    return {
        "m": cfg.num_tx,
        "n": cfg.num_rx,
        "relay_antennas": list(cfg.relay_antennas),
        "channel_mode": cfg.channel_mode.value,
        "seed": cfg.seed,
        "constellation": cfg.constellation.value,
    }


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    margin: int

    def __bool__(self):
        return self.feasible


def check_feasibility(cfg):
    """Compare relay precoder unknowns against alignment equations.

    The margin is ``sum(L_j**2) - (num_rx - 1) * (num_tx - 1)``; the scheme
    is feasible when it is non-negative.
    """
    margin = cfg.num_unknowns - cfg.num_equations
    return Feasibility(margin >= 0, margin)


def derive_seed(master, *path):
    """Deterministic 64-bit child seed for ``(master, *path)``."""
    ss = np.random.SeedSequence([int(master), *(int(p) for p in path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# sub-stream identifiers so that enabling noise never shifts the channel draw
_CHANNEL_STREAM = 0
_SYMBOL_STREAM = 1
_NOISE_STREAM = 2


def stream_rng(cfg, stream):
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, stream]))


def _crandn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ChannelSet:
    """All channel matrices over the symbol extension.

    Attributes
    ----------
    direct : ndarray, shape (T, num_rx, num_tx)
        Transmitter to receiver channels per slot.
    tx_to_relay : tuple of ndarray, each shape (T, L_j, num_tx)
        Transmitter to relay ``j`` channels; column ``m`` is the vector from
        transmitter ``m``.
    relay_to_rx : tuple of ndarray, each shape (T, num_rx, L_j)
        Relay ``j`` to receiver channels; row ``n`` is the vector to receiver
        ``n``.
    """

    direct: np.ndarray
    tx_to_relay: tuple = field(default=())
    relay_to_rx: tuple = field(default=())

    @property
    def num_slots(self):
        return self.direct.shape[0]

    def matrices(self):
        """Iterate over every (slot-level) channel matrix."""
        yield from self.direct
        for f in self.tx_to_relay:
            yield from f
        for g in self.relay_to_rx:
            yield from g

    def is_full_rank(self, tol=DEFAULT_RANK_TOL):
        return all(numerical_rank(a, tol) == min(a.shape) for a in self.matrices())


def draw_channels(cfg):
    """Draw i.i.d. unit-variance circularly-symmetric complex Gaussian channels.

    In constant mode a single realisation is repeated over all slots.
    The result depends only on ``cfg``.
    """
    rng = stream_rng(cfg, _CHANNEL_STREAM)
    T = cfg.num_slots
    draws = 1 if cfg.channel_mode is ChannelMode.CONSTANT else T

    def draw(rows, cols):
        a = _crandn(rng, (draws, rows, cols))
        return _frozen(np.broadcast_to(a, (T, rows, cols)))

    direct = draw(cfg.num_rx, cfg.num_tx)
    tx_to_relay = tuple(draw(l, cfg.num_tx) for l in cfg.relay_antennas)
    relay_to_rx = tuple(draw(cfg.num_rx, l) for l in cfg.relay_antennas)
    return ChannelSet(direct, tx_to_relay, relay_to_rx)


def draw_symbols(cfg):
    """Draw the ``num_rx x num_tx`` grid of unit-power data symbols.

    Entry ``[n, m]`` is the symbol transmitter ``m`` sends to receiver ``n``.
    """
    rng = stream_rng(cfg, _SYMBOL_STREAM)
    shape = (cfg.num_rx, cfg.num_tx)
    if cfg.constellation is Constellation.QPSK:
        bits = rng.integers(0, 4, size=shape)
        d = np.exp(1j * (np.pi / 4 + np.pi / 2 * bits))
    else:
        d = _crandn(rng, shape)
    return _frozen(d)


@dataclass(frozen=True)
class NoiseModel:
    """Additive white Gaussian noise at relays and receivers.

    The noise has `variance` per complex dimension; the transmit power is
    ``P = 10 ** (snr_db / 10)``, so with unit variance ``P`` equals the SNR.
    """

    enabled: bool = False
    variance: float = 1.0
    snr_db: float = 0.0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("noise variance must be non-negative")

    @property
    def power(self):
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def amplitude(self):
        return np.sqrt(self.power)

    def rng(self, cfg):
        return stream_rng(cfg, _NOISE_STREAM)

    def sample(self, rng, shape):
        if not self.enabled or self.variance == 0:
            return np.zeros(shape, dtype=complex)
        return np.sqrt(self.variance) * _crandn(rng, shape)


NOISELESS = NoiseModel()


def load_config(path):
    with open(path) as fh:
        return config_from_dict(json.load(fh))
