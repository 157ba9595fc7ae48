"""Free additive convolution of Jacobi-type measures via analytic subordination."""

__version__ = "0.1.0"
