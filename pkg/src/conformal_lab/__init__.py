"""Numerical laboratory for conformally covariant operators.

The package builds a catalog of compact manifolds (round spheres and
circle-sphere products) with closed-form curvature, applies the
conformal Laplacian and the Paneitz operator spectrally, constructs
their Green's functions, and verifies the covariance laws, integral
identities, and sign/spectral statements that tie them together.
"""

__version__ = "0.1.0"
