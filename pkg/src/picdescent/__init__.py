"""Picard groups of ring spectra by descent spectral sequences.

Exact integer linear algebra (``exactalg``), finite group cohomology
(``groupcoh``), cosimplicial models (``cosimp``), graded Cech cohomology
(``cech``), a spectral sequence engine (``ssengine``), the Picard pipeline
(``picard``) and chart drawing (``chartviz``).
"""

__version__ = "0.1.0"
