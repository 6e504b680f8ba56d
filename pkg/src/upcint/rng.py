"""Counter-based random streams keyed by (seed, event index, purpose).

Every random quantity of an event is drawn from its own Philox stream, so
an event depends only on the seed and its index, never on which worker
generated it or in what order.

Purpose tags (fixed; changing them changes every generated file):

    0  KINEMATICS   b, y, pT, phi, source choice and rejection uniforms
    1  DECAY_TIME   lab-frame decay time
    2  CHANNEL      decay channel choice
    3  DECAY        decay angles and phase-space sampling
    4  PROTOCOL     detector mode choices in the dual-detector protocol
"""

import threading

import numpy as np

KINEMATICS = 0
DECAY_TIME = 1
CHANNEL = 2
DECAY = 3
PROTOCOL = 4

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int, purpose: int) -> np.random.Generator:
    """Independent generator for one (seed, event, purpose) triple."""
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    # counter words 0-1 are left free for the stream's own increments
    bitgen = np.random.Philox(key=seed & _MASK64, counter=[0, 0, purpose, index])
    return np.random.Generator(bitgen)


class _Rekeyable:
    def __init__(self):
        self.bitgen = np.random.Philox(key=0)
        self.gen = np.random.Generator(self.bitgen)
        self._buffer = np.zeros(4, dtype=np.uint64)

    def __call__(self, seed, index, purpose):
        self.bitgen.state = {
            "bit_generator": "Philox",
            "state": {
                "counter": np.array([0, 0, purpose, index], dtype=np.uint64),
                "key": np.array([seed & _MASK64, 0], dtype=np.uint64),
            },
            "buffer": self._buffer,
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return self.gen


_local = threading.local()


def transient_stream(seed: int, index: int, purpose: int) -> np.random.Generator:
    """Same sequence as :func:`stream`, but re-keys a per-thread generator in place.

    Cheaper to obtain; the returned object is invalidated by the next call
    on the same thread.
    """
    rk = getattr(_local, "rekeyable", None)
    if rk is None:
        rk = _local.rekeyable = _Rekeyable()
    return rk(seed, index, purpose)
