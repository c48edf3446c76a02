"""Spatially-dependent Bayesian multiple testing for extreme event
attribution: hierarchical binomial models over climate-model ensembles,
posterior risk-ratio hypotheses, and false-discovery-controlling decision
rules."""

__version__ = "0.1.0"
