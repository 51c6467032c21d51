import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Tuple

from .errors import ConfigurationError, EnumerationLimitError
from .models import ChannelSpec

logger = logging.getLogger(__name__)

MAX_ENUMERATION_HOPS = 24


@dataclass(frozen=True)
class OddSubsetFamily:
    """Odd-cardinality subsets of the hop indices {1..M}, each with its complement.

    Members are produced lazily, ordered by cardinality and then lexicographically,
    so M=3 yields {1}, {2}, {3}, {1,2,3}.
    """
    hops: int

    def __len__(self) -> int:
        return 2 ** (self.hops - 1)

    def __iter__(self) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        universe = range(1, self.hops + 1)
        for size in range(1, self.hops + 1, 2):
            for subset in combinations(universe, size):
                chosen = set(subset)
                yield subset, tuple(j for j in universe if j not in chosen)

    @property
    def subsets(self) -> list:
        return [subset for subset, _ in self]

    @property
    def complements(self) -> list:
        return [complement for _, complement in self]


def enumerate_odd_subsets(hops: int) -> OddSubsetFamily:
    if hops < 1:
        raise ConfigurationError(f"Hop count must be at least 1 (got {hops})")
    if hops > MAX_ENUMERATION_HOPS:
        raise EnumerationLimitError(hops, MAX_ENUMERATION_HOPS)
    return OddSubsetFamily(hops=hops)


def _warn_noisy_hops(spec: ChannelSpec) -> None:
    noisy = [j for j, p in enumerate(spec.hop_probs, start=1) if p > 0.5]
    if noisy:
        logger.warning(f"Hops {noisy} flip with probability above 1/2; the cascade result still holds")


def flip_probability_by_enumeration(spec: ChannelSpec) -> float:
    """End-to-end flip probability as the sum over odd error subsets"""
    _warn_noisy_hops(spec)
    p = spec.hop_probs
    family = enumerate_odd_subsets(spec.hops)
    return math.fsum(
        math.prod(p[i - 1] for i in subset) * math.prod(1.0 - p[j - 1] for j in complement)
        for subset, complement in family
    )


def flip_probability(spec: ChannelSpec) -> float:
    """P(s_i[n] != y_i[n]) after M hops, (1 - prod(1 - 2 p_j)) / 2.

    Algebraically equal to the odd-subset sum; O(M) and valid for heterogeneous hops.
    """
    _warn_noisy_hops(spec)
    return 0.5 * (1.0 - math.prod(1.0 - 2.0 * p for p in spec.hop_probs))


def flip_probability_equal(p: float, hops: int) -> float:
    """Cascade of M identical hops, (1 - (1 - 2p)^M) / 2"""
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"Flip probability {p} is outside [0, 1]")
    if hops < 1:
        raise ConfigurationError(f"Hop count must be at least 1 (got {hops})")
    return 0.5 * (1.0 - (1.0 - 2.0 * p) ** hops)


def equivalent_channel(spec: ChannelSpec) -> ChannelSpec:
    """Single hop with the same end-to-end flip probability as the cascade"""
    return ChannelSpec(hop_probs=(flip_probability(spec),))
