"""Predictors for time-variant flat-fading channels and a benchmark harness.

The package implements four families of one-step-family channel predictors
(classic Wiener/LMMSE filters, a softmax-weighted filter bank, its
DFT-compressed form, and a trainable feed-forward network initialized from
the compressed form), channel/noise simulation to evaluate them, and an
experiment harness that sweeps velocity and SNR and emits CSV results.
A FastAPI service wraps the library; the CLI is a thin client of it.
"""

__version__ = "0.1.0"
