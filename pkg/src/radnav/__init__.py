"""radnav: ground-station server for simulated sUAS radiation-mapping missions.

Runs a deterministic simulated drone with an onboard radiation detector,
executes geolocated waypoint missions, fuses measurements into a voxel
map and streams telemetry plus colorized map updates to operator
consoles over a JSON wire protocol.
"""
from radnav._core import KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
