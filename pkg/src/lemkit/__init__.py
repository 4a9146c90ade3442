"""Rational lemniscate toolkit.

Numerics for level sets of rational maps on the Riemann sphere: tracing
|r(z)| = c as planar polylines, extracting the face/edge/vertex graph,
estimating harmonic measure by walk-on-spheres, sampling conformal
weldings, constructing matching pairs, generating Koch-type fractal
curves, and certifying the structural identities that tie these
together.
"""

__version__ = "0.1.0"
