"""Call center simulation and staffing-model validation toolkit.

Subpackages cover the full pipeline: log ingestion into per-day scenarios
(`ingest`), statistical estimation (`estimators`), discrete-event simulation
of a day under a model configuration (`sim`), the nine standard model
presets (`models`), and model-vs-actual validation with error decomposition
(`validate`). The `ccsim` command line ties them together.
"""

__version__ = "0.1.0"

from ccsim.errors import ConfigError, DataError
from ccsim.metrics import DayMetrics

__all__ = ["ConfigError", "DataError", "DayMetrics", "__version__"]
