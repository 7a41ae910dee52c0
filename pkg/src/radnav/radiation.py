"""Simulated radiation environment and detector statistics.

The ground truth is a set of unshielded point sources over a uniform
background: expected rate at a point is

    background + sum_i S_i / (4*pi * max(r_i, eps)^2)

with r_i the distance to source i and eps a clamp that removes the
singularity on overflight (default 0.3 m, roughly airframe-to-detector
standoff). Source strength S is defined so that a source contributes
S / (4*pi*r^2) counts/s at range r. Counts over an integration period
are Poisson with mean rate*dt.

``expected_rate`` is pure and thread-safe. A random stream passed to
``sample_counts`` must have a single owner: one consumer advances it.
"""
from dataclasses import dataclass, field

from radnav._core import kernels
from radnav.geodesy import LocalEnu


class NegativeRate(ValueError):
    """Expected count rate must be non-negative."""


@dataclass(frozen=True)
class PointSource:
    """Isotropic point source; strength in counts*m^2/s (see module doc)."""

    position: LocalEnu
    strength: float

    def __post_init__(self):
        if not self.strength > 0.0:
            raise ValueError(f"source strength must be positive, got {self.strength}")


@dataclass(frozen=True)
class RadiationScenario:
    """Point sources plus background and the overflight clamp radius."""

    sources: tuple = ()
    background: float = 0.0
    clamp_epsilon_m: float = 0.3
    _flat: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.background < 0.0:
            raise ValueError(f"background must be >= 0, got {self.background}")
        if not self.clamp_epsilon_m > 0.0:
            raise ValueError(f"clamp epsilon must be positive, got {self.clamp_epsilon_m}")
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(
            self,
            "_flat",
            tuple(
                (s.position.east_m, s.position.north_m, s.position.up_m, s.strength)
                for s in self.sources
            ),
        )


@dataclass(frozen=True)
class RadiationMeasurement:
    """One geolocated detector reading: counts over an integration period."""

    timestamp_s: float
    position: LocalEnu
    counts: int
    integration_dt_s: float

    def __post_init__(self):
        if self.counts < 0:
            raise ValueError(f"counts must be >= 0, got {self.counts}")
        if not self.integration_dt_s > 0.0:
            raise ValueError(f"integration period must be positive, got {self.integration_dt_s}")


def expected_rate(scenario: RadiationScenario, p: LocalEnu) -> float:
    """Ground-truth expected count rate at an ENU point, counts/s."""
    return kernels.point_rate(
        p.east_m, p.north_m, p.up_m, scenario._flat, scenario.background, scenario.clamp_epsilon_m
    )


def sample_counts(rate: float, dt: float, rng) -> int:
    """Poisson-distributed counts for one integration period.

    Deterministic given the rng state and call order; the caller owns
    the stream.
    """
    if rate < 0.0:
        raise NegativeRate(f"rate must be >= 0, got {rate}")
    if not dt > 0.0:
        raise ValueError(f"integration period must be positive, got {dt}")
    return int(rng.poisson(rate * dt))
