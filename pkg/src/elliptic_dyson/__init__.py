"""Elliptic Bessel and elliptic Dyson processes on the circle.

Library layout:

- ``special``       Jacobi theta functions, Weierstrass zeta/p, Dedekind eta,
                    Villat's function.
- ``kernels``       Brownian and wrapped circle transition densities,
                    Karlin-McGregor and alcove determinants.
- ``potentials``    Time-dependent elliptic potentials, ground energy,
                    the h-weight in product and determinant form, and the
                    theta-determinant identities they rest on.
- ``simulate``      Euler-Maruyama simulation of both processes, Girsanov
                    weight tracking, pinned-process quadrature.
- ``determinantal`` The beta = 2 integrable structure: martingale functions,
                    determinantal martingales, correlation kernels, truncated
                    Fredholm determinants.
- ``cli``           ``elliptic`` command-line front end.
"""

from . import errors
from .special import (
    HalfPeriods,
    ModularParam,
    SeriesPolicy,
    dedekind_eta,
    eta1,
    jacobi_imaginary,
    theta,
    theta1_deriv,
    villat,
    weierstrass_p,
    weierstrass_zeta,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "SeriesPolicy",
    "ModularParam",
    "HalfPeriods",
    "theta",
    "theta1_deriv",
    "jacobi_imaginary",
    "dedekind_eta",
    "eta1",
    "weierstrass_zeta",
    "weierstrass_p",
    "villat",
    "__version__",
]
