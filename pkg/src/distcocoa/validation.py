"""Small argument checks shared by the estimators and the CLI."""

import numbers

import numpy as np
from sklearn.utils.multiclass import check_classification_targets

from .exceptions import ConfigError


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ConfigError(f"{name} must be a finite real number, got {value!r}")
    if value < 0 or (strict and value == 0):
        raise ConfigError(f"{name} must be {'>' if strict else '>='} 0, got {value!r}")
    return float(value)


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_choice(value, name, choices):
    if value not in choices:
        raise ConfigError(f"{name} must be one of {tuple(choices)}, got {value!r}")
    return value


def check_beta(beta, upper, name="beta"):
    beta = check_positive(beta, name)
    if not 1.0 <= beta <= upper:
        raise ConfigError(f"{name} must lie in [1, {upper:g}], got {beta:g}")
    return beta


def binary_targets(y):
    """Map a two-class label vector to {-1, +1}; returns (classes, signed)."""
    check_classification_targets(y)
    classes = np.unique(y)
    if len(classes) != 2:
        raise ValueError(f"Only binary classification is supported; got {len(classes)} classes")
    return classes, np.where(y == classes[1], 1.0, -1.0)
