"""Non-local Dirichlet forms on weighted sequence spaces: finite-scale numerics.

Modules: ``spaces`` (weighted spaces, spectral isometry, nests), ``measures``
(product, Gaussian and lattice measures), ``forms`` (jump forms on cylinder
functions), ``generators`` (finite-state generators and semigroups), ``qr``
(summability checks), ``process`` (jump-process simulation) and ``cli``.
"""

__version__ = "0.1.0"
