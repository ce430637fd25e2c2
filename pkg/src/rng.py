"""
Named random number streams

Every stochastic layer draws from its own numpy Generator, derived from
(base_seed, replicate, stream name). Modules never share a stream, so the
number of draws one layer makes cannot shift another layer's results.
"""

from typing import Any, Dict, Iterable

import numpy as np

from .utils import stable_hash

CORE_STREAMS = ("space", "links", "demography", "epidemic", "intervention")


def design_stream(name: str) -> str:
    return f"design.{name}"


class RngStreams:
    """
    Lazily created, seeded PCG64 generators keyed by stream name

    ``epoch`` separates stream families that share (base_seed, replicate),
    e.g. the draws after a snapshot reload from those of the burn-in.
    """

    def __init__(self, base_seed: int, replicate: int = 0, epoch: int = 0):
        self.base_seed = int(base_seed)
        self.replicate = int(replicate)
        self.epoch = int(epoch)
        self._streams: Dict[str, np.random.Generator] = {}

    def _spawn(self, name: str) -> np.random.Generator:
        entropy = [self.base_seed, self.replicate, stable_hash(name)]
        if self.epoch:
            entropy.append(self.epoch)
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def get(self, name: str) -> np.random.Generator:
        if name not in self._streams:
            self._streams[name] = self._spawn(name)
        return self._streams[name]

    __getitem__ = get

    def reseed(self, base_seed: int, replicate: int, names: Iterable[str] = (), epoch: int = 0):
        """Restart every known stream (and any extra names) from a new seed triple"""
        self.base_seed = int(base_seed)
        self.replicate = int(replicate)
        self.epoch = int(epoch)
        known = set(self._streams) | set(names)
        self._streams = {name: self._spawn(name) for name in sorted(known)}

    def get_state(self) -> Dict[str, Any]:
        return {
            "base_seed": self.base_seed,
            "replicate": self.replicate,
            "epoch": self.epoch,
            "streams": {name: gen.bit_generator.state for name, gen in sorted(self._streams.items())},
        }

    def set_state(self, state: Dict[str, Any]):
        self.base_seed = int(state["base_seed"])
        self.replicate = int(state["replicate"])
        self.epoch = int(state["epoch"])
        self._streams = {}
        for name, bit_state in state["streams"].items():
            self.get(name).bit_generator.state = bit_state
