"""Core vocabulary: resources, slices, admission plans and their quantities.

Unit conventions (decimal, networking style): bandwidth in bits/s, storage
and file sizes in bytes, delays in seconds.  1 MB = 10^6 bytes, 1 GB =
10^9 bytes, 1 Mbps = 10^6 bits/s.  Display conversions belong to the CLI.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

MB = 10**6
GB = 10**9
MBPS = 10**6

BITS_PER_BYTE = 8


class ResourceKind(enum.Enum):
    PROCESSING = "processing"
    STORAGE = "storage"
    COMMUNICATION = "communication"


class LinkClass(enum.Enum):
    """Sky link classes: inter-aerial, inter-satellite, direct air-to-ground
    and satellite-to-gateway."""

    IAL = "IAL"
    ISL = "ISL"
    DA2G = "DA2G"
    SA2G = "SA2G"


@dataclass(frozen=True)
class LinkProfile:
    link_class: LinkClass
    one_way_propagation_delay_s: float

    def __post_init__(self):
        if not isinstance(self.link_class, LinkClass):
            raise ValueError("link_class must be a LinkClass")
        if self.one_way_propagation_delay_s < 0:
            raise ValueError("one_way_propagation_delay_s must be >= 0")


@dataclass(frozen=True)
class ResourceDescriptor:
    """A unit of capacity owned by a provider.

    ``capacity`` is compute units for processing, bytes for storage and
    bits/s for communication resources.  ``link_profile`` is present
    exactly when the resource is a communication link.
    """

    resource_id: str
    provider_id: str
    kind: ResourceKind
    capacity: float
    link_profile: LinkProfile | None = None

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError("capacity must be >= 0")
        if self.kind is ResourceKind.COMMUNICATION:
            if self.link_profile is None:
                raise ValueError("communication resources require a link_profile")
        elif self.link_profile is not None:
            raise ValueError("link_profile is only valid for communication resources")


@dataclass(frozen=True)
class NetworkSlice:
    """A group of UEs with identical traffic and one delay requirement.

    ``file_size_bytes`` should be integral bytes; fractional sizes are not
    rejected but make whole-file cache accounting lossy.
    """

    slice_id: str
    ue_count: int
    per_ue_request_rate: float
    file_size_bytes: float
    catalog_size: int
    zipf_exponent: float
    delay_requirement_s: float

    def __post_init__(self):
        if self.ue_count < 0:
            raise ValueError("ue_count must be >= 0")
        if self.per_ue_request_rate < 0:
            raise ValueError("per_ue_request_rate must be >= 0")
        if self.file_size_bytes <= 0:
            raise ValueError("file_size_bytes must be > 0")
        if self.catalog_size < 1:
            raise ValueError("catalog_size must be a positive file count")
        if self.zipf_exponent < 0:
            raise ValueError("zipf_exponent must be >= 0")
        if self.delay_requirement_s <= 0:
            raise ValueError("delay_requirement_s must be > 0")

    @property
    def catalog_bytes(self) -> float:
        """Total bytes needed to cache the whole catalog."""
        return self.catalog_size * self.file_size_bytes


def aggregate_demand(slice_: NetworkSlice) -> float:
    """Offered traffic of a slice in bits/s: ue_count * rate * size * 8."""
    return slice_.ue_count * slice_.per_ue_request_rate * slice_.file_size_bytes * BITS_PER_BYTE


@dataclass(frozen=True)
class SatelliteProfile:
    """Shared backhaul link: round-trip delay to the core and bandwidth."""

    round_trip_delay_s: float
    bandwidth_bps: float

    def __post_init__(self):
        if self.round_trip_delay_s < 0:
            raise ValueError("round_trip_delay_s must be >= 0")
        if self.bandwidth_bps < 0:
            raise ValueError("bandwidth_bps must be >= 0")


@dataclass(frozen=True)
class AdmissionPlan:
    """Solver output: which slices are served and with what resources.

    ``served`` is sorted by slice id; ``cache_alloc`` maps served slice ids
    to cache bytes and ``rate_alloc`` to satellite bits/s.  Budget- and
    serving-predicate invariants are problem-dependent and re-checked by
    :func:`aerofed.optimizer.verify_plan`.
    """

    served: tuple[str, ...]
    cache_alloc: dict[str, float] = field(default_factory=dict)
    rate_alloc: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if tuple(sorted(self.served)) != self.served:
            raise ValueError("served must be sorted by slice id")
        if len(set(self.served)) != len(self.served):
            raise ValueError("served slice ids must be unique")
        served = set(self.served)
        if not set(self.cache_alloc) <= served:
            raise ValueError("cache_alloc keys must be served slice ids")
        if not set(self.rate_alloc) <= served:
            raise ValueError("rate_alloc keys must be served slice ids")
        if any(v < 0 for v in self.cache_alloc.values()):
            raise ValueError("cache allocations must be >= 0")
        if any(v < 0 for v in self.rate_alloc.values()):
            raise ValueError("rate allocations must be >= 0")

    @property
    def objective(self) -> int:
        """Number of served slices."""
        return len(self.served)

    @property
    def total_cache_bytes(self) -> float:
        return sum(self.cache_alloc.values())

    @property
    def total_rate_bps(self) -> float:
        return sum(self.rate_alloc.values())


EMPTY_PLAN = AdmissionPlan(served=())


@dataclass(frozen=True)
class ProviderOffer:
    """Southbound offer: resources a provider is willing to federate."""

    offer_id: str
    provider_id: str
    resources: tuple[ResourceDescriptor, ...]
    price: float = 0.0

    def __post_init__(self):
        if not self.resources:
            raise ValueError("an offer must carry at least one resource")
        if self.price < 0:
            raise ValueError("price must be >= 0")
        ids = [r.resource_id for r in self.resources]
        if len(set(ids)) != len(ids):
            raise ValueError("resource ids within an offer must be unique")
