"""Attribution (Baseline Shapley, Integrated Gradients) and risk-axiom audits for asset-pricing models."""

from ._backend import BACKEND
from .attribution import QuadratureConfig, attribute, bshap, ig_bond_closed_form, integrated_gradients
from .core import AttributionResult, Coalition, Curvature, FeatureVector, Method, ShapeProfile
from .errors import (
    CapabilityError,
    ContractViolation,
    DivergenceError,
    InsufficientChainError,
    InsufficientDataError,
    ModelEvaluationError,
    ParseError,
    RiskAttrError,
    SizeLimitError,
    ValidationError,
)
from .io import load_option_records, write_option_records
from .pricing import (
    OptionRecord,
    PricingModel,
    VixInput,
    bond_model,
    bond_price,
    bsm_greeks,
    bsm_model,
    bsm_price,
    vix_from_chain,
)
from .surrogate import MlpSurrogate, TrainConfig, train_surrogate

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AttributionResult", "CapabilityError", "Coalition", "ContractViolation", "Curvature",
    "DivergenceError", "FeatureVector", "InsufficientChainError", "InsufficientDataError", "Method",
    "MlpSurrogate", "ModelEvaluationError", "OptionRecord", "ParseError", "PricingModel", "QuadratureConfig",
    "RiskAttrError", "ShapeProfile", "SizeLimitError", "TrainConfig", "ValidationError", "VixInput",
    "attribute", "bond_model", "bond_price", "bsm_greeks", "bsm_model", "bsm_price", "bshap",
    "ig_bond_closed_form", "integrated_gradients", "load_option_records", "train_surrogate",
    "vix_from_chain", "write_option_records",
]
