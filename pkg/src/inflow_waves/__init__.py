"""Wave patterns of the inflow problem for 1-D compressible Navier-Stokes."""

__version__ = "0.1.0"
