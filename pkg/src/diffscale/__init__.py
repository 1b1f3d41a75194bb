"""Small-k scaling of integrated diffraction intensities on the line.

Submodules are imported explicitly: algebra, substitution, cutproject,
renorm, riesz, numbertheory, stochastic, scaling, plots, cli.
"""

__version__ = "0.1.0"
