"""Calibration toolkit for low-cost NDIR CO2 sensors co-located with a reference.

Submodules: ``ingestion`` (CSV streams), ``matching`` (window pairing),
``gaussianity`` (normality tests), ``metrics``, ``models``, ``synth``
(synthetic streams) and ``harness``/``cli`` (experiment runs).
"""
__version__ = "0.1.0"
