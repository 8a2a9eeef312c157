"""Phenotyping cohorts of physiological time series.

Two routes: fuzzy c-medoids on ACF/PACF or Welch spectral features with a
Dirichlet regression on the memberships, and per-frame periodicity scores
from sliding-window embeddings and Rips persistence, clustered through
super-level persistence and bottleneck distances.
"""

__version__ = "0.1.0"
