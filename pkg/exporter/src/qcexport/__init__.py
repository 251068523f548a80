"""Self-contained integral exporter for the simulation pipeline.

Gaussian-basis integrals (McMurchie-Davidson), restricted Hartree-Fock,
MP2 path relaxation, and bundle/geometry writers for the fixture
formats.
"""

__version__ = "0.1.0"
