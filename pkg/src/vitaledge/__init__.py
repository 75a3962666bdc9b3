"""vitaledge: deterministic discrete-event simulation of a home
health-monitoring edge pipeline with two-stage sensor-data filtration."""

__version__ = "0.1.0"

from .channels import Channel, SensorReading
from .config import RunConfig, load_config
from .pipeline import run_mode, run_modes

__all__ = [
    "Channel",
    "SensorReading",
    "RunConfig",
    "load_config",
    "run_mode",
    "run_modes",
    "__version__",
]
