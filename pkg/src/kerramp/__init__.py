"""Kerr nonlinearity and parametric-amplifier analysis for generalized
Josephson-junction microwave circuits."""

__version__ = "0.1.0"

from . import bbq, config, duffing, fitres, hb, junction, netlist, pipeline
from . import touchstone, transient
