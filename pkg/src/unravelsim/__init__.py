"""Synthetic-unraveling trajectory simulation toolkit.

Two discrete intervention schemes (projective measurement vs. random
phase-flip kicks) share an identical ensemble-averaged evolution while
differing in trajectory-level statistics; the package also covers the
continuous resonance-fluorescence unravelings that motivate them, a
simulated readout-error/mitigation layer, and bootstrap uncertainty
quantification.
"""

__version__ = "0.1.0"
