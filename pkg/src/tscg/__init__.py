"""Learning time series Gaussian chain graphs from multivariate stationary series."""
__version__ = "0.1.0"
