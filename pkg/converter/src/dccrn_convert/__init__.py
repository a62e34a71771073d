"""Reference-checkpoint converter and golden-vector exporter."""

from .convert import ConversionError, convert_checkpoint, map_names
from .dcw import config_hash, expected_canonical_names, read_dcw_config, write_dcw
from .golden import GoldenError, export_golden, make_probe, read_golden
from .reference import ReferenceDccrn, load_checkpoint, make_synthetic_checkpoint

__version__ = "0.1.0"
