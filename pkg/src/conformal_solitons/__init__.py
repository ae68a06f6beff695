"""Numerical verification of Ricci almost solitons induced by conformal fields on hypersurfaces."""
from .catalog import ENTRY_NAMES, CatalogEntry, canonical_field, expected_lambda, gamma_field, get_entry, list_catalog
from .conformal import ConformalField, conformality_residual, eval_field, sigma_at, split_at
from .errors import GeometryError, ValidationError
from .hypersurface import Chart, FramePoint, LocalGeometry, frame_at, ricci_at
from .jets import Jet, SmoothMap, fd_check, jet_eval
from .runner import Scenario, run_scenario, validate_config
from .semiriem import AmbientSpace, ConformalMatrix, Signature, inner
from .soliton_lab import TashiroCase, concircular_fit, extract_lambda_at, tashiro_classify

__all__ = [
    "ENTRY_NAMES",
    "CatalogEntry",
    "canonical_field",
    "expected_lambda",
    "gamma_field",
    "get_entry",
    "list_catalog",
    "ConformalField",
    "conformality_residual",
    "eval_field",
    "sigma_at",
    "split_at",
    "GeometryError",
    "ValidationError",
    "Chart",
    "FramePoint",
    "LocalGeometry",
    "frame_at",
    "ricci_at",
    "Jet",
    "SmoothMap",
    "fd_check",
    "jet_eval",
    "Scenario",
    "run_scenario",
    "validate_config",
    "AmbientSpace",
    "ConformalMatrix",
    "Signature",
    "inner",
    "TashiroCase",
    "concircular_fit",
    "extract_lambda_at",
    "tashiro_classify",
]

__version__ = "0.1.0"
