"""
Quantum pulses scattering on local quantum systems, with input and output pulses as virtual
cavities cascaded around the scatterer.
"""

__version__ = "0.1.0"
