"""License plate reading for parking gates.

Localization on the plate's blue strip, component segmentation, chain-code
features with k-nearest-neighbor recognition, plate-color typing, plus a
simulated gate with a parking journal.
"""
from .classifier import KnnModel, build_model, classify, load_model, save_model
from .config import Config, load_config
from .pipeline import PlateReading, batch_evaluate, read_plate
from .platetype import PlateType, classify_plate_type

__version__ = "0.1.0"

__all__ = [
    "Config", "KnnModel", "PlateReading", "PlateType", "batch_evaluate", "build_model",
    "classify", "classify_plate_type", "load_config", "load_model", "read_plate", "save_model",
]
