"""Numerical laboratory for the quadratic gamma channel.

Special functions, input laws, Stein residuals and Fisher functionals, the
additive Gaussian baseline channel, the gamma channel itself, and identity
checks that tie mutual information and relative entropy to estimation errors.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from .distributions import (  # noqa: E402
    Affine,
    Exponential,
    Gamma,
    GammaMixture,
    LogNormal,
    Normal,
    Pareto,
    PointMass,
    from_spec,
)
from .gamma_channel import ChannelParams  # noqa: E402

__all__ = [
    "__version__",
    "Affine",
    "ChannelParams",
    "Exponential",
    "Gamma",
    "GammaMixture",
    "LogNormal",
    "Normal",
    "Pareto",
    "PointMass",
    "from_spec",
]
