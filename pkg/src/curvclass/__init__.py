"""Classification and verification of curvature tensors built from R, S and r.

Modules:

* :mod:`curvclass.tensor`    pointwise tensor algebra and curvature operators
* :mod:`curvclass.engine`    curvature of a metric field via Taylor jets
* :mod:`curvclass.btensor`   coefficient sets, classifier, GCT data, combinations
* :mod:`curvclass.structure` pointwise checks of curvature restrictions
* :mod:`curvclass.catalog`   fixture metrics with known curvature
* :mod:`curvclass.theorems`  the verification suite behind ``verify-theorems``
"""
from .btensor import BCoefficients, build_tensor, classify, combine, generic
from .engine import MetricField, curvature_package
from .tensor import Metric, Tensor

__version__ = "0.1.0"

__all__ = [
    "BCoefficients",
    "Metric",
    "MetricField",
    "Tensor",
    "build_tensor",
    "classify",
    "combine",
    "curvature_package",
    "generic",
]
