"""Numerical and exact verification toolkit for an elliptic quantum
integrable hierarchy: theta-function calculus, dynamical difference
operators, ladder modules, q-characters, transfer/Q-operator identities,
Bethe root solvers and a rational (Yangian-type) exact cross-check."""

from .theta import (
    EllipticParams,
    SamplePlan,
    ThetaExpression,
    ThetaSum,
    lattice_reduce,
    theta_eval,
)
from .polyring import Poly, RatFn

__all__ = [
    "EllipticParams",
    "Poly",
    "RatFn",
    "SamplePlan",
    "ThetaExpression",
    "ThetaSum",
    "lattice_reduce",
    "theta_eval",
]

__version__ = "0.1.0"
