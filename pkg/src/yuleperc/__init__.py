"""Largest clusters of Yule processes with neutral mutations.

Equivalently, Bernoulli bond percolation on random recursive trees.  The
package offers exact and asymptotic predictions (:mod:`analytics`), samplers
(:mod:`process`), exact small-n laws (:mod:`oracle`), Monte Carlo and
distribution distances (:mod:`stats`) and a CLI (:mod:`cli`).
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
