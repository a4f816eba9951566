"""
Periodic Distortion Resonances - Python Package
Resonances of 1D Schroedinger operators with oscillating, decaying potentials,
computed by a periodic complex distortion in Fourier space, and the viscosity
limit of the quadratic complex absorbing potential.
"""
