"""Numerical laboratory for the free entropy of projections.

Submodules
----------
linalg_core
    Haar unitaries, Hermitian spectra, Grassmannian geodesics.
grassmann_sim
    Random projections, Jacobi eigenvalue sampling, Gibbs ensembles, microstates.
two_projection_model
    Canonical model of a projection pair, moments, functional calculus.
entropy_functionals
    Closed-form pair entropy and the change-of-variable formula.
free_moments
    Mixed moments of free products and the asymptotic freeness harness.
transport
    One-dimensional Wasserstein distance, transport and Hessian checks.
pressure
    Free pressure by Monte Carlo and by an equilibrium-measure solver.
cli
    Seeded batch runs with JSON/CSV output.
goldens
    Golden-value regression corpus.
"""
from .kernels import BACKEND

__version__ = "0.1.0"
SCHEMA = "projlab/1"

__all__ = ["BACKEND", "SCHEMA", "__version__"]
