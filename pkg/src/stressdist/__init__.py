"""Measurement statistics of time-smeared stress tensors and Wick squares.

Modules:

* :mod:`stressdist.func`: sampling functions, Hilbert transform, star product, QI functional
* :mod:`stressdist.cft2d`: Ward-identity recursion, flow and cumulant generating function in 2D CFT
* :mod:`stressdist.dist`: shifted Gamma laws, moment fitting, sampling, characteristic-function inversion
* :mod:`stressdist.wick4d`: exact moments of the smeared Wick square of a 4D massless scalar
* :mod:`stressdist.cli`: command-line front end
"""

from .cft2d import (CftParams, cgf, cgf_curve, chiral_distribution,
                    energy_density_distribution, flow_numeric, gamma2,
                    moments_recursion_gaussian)
from .dist import (MomentSequence, ShiftedGamma, cdf, fit_from_moments, hamburger_check,
                   pdf, prob_negative, quantile, sample, verify_fit)
from .errors import (DegenerateMoments, EdgeLeak, FlowPole, GridTooCoarse, Intractable,
                     MismatchAgainstGolden, NegativeWindow, NotGammaLike, OutOfRadius,
                     StressDistError, TailTruncation)
from .exact import PiMonomial
from .func import SamplingFunction, hilbert, qi_functional, star
from .wick4d import WindowSpectrum, conjectured_qi, cycle_integral, reproduce_table1

__version__ = "0.1.0"

__all__ = [
    "CftParams", "cgf", "cgf_curve", "chiral_distribution", "energy_density_distribution",
    "flow_numeric", "gamma2", "moments_recursion_gaussian",
    "MomentSequence", "ShiftedGamma", "cdf", "fit_from_moments", "hamburger_check", "pdf",
    "prob_negative", "quantile", "sample", "verify_fit",
    "DegenerateMoments", "EdgeLeak", "FlowPole", "GridTooCoarse", "Intractable",
    "MismatchAgainstGolden", "NegativeWindow", "NotGammaLike", "OutOfRadius",
    "StressDistError", "TailTruncation",
    "PiMonomial", "SamplingFunction", "hilbert", "qi_functional", "star",
    "WindowSpectrum", "conjectured_qi", "cycle_integral", "reproduce_table1",
]
