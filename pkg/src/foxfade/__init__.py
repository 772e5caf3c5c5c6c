"""Exact, series, asymptotic and Monte-Carlo statistics of the alpha-eta-kappa-mu fading channel."""

__version__ = "0.1.0"
