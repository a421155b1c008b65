"""High-energy bounds on D-dimensional elastic scattering amplitudes."""
__version__ = "0.1.0"
