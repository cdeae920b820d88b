"""
linsynth
Depth-oriented synthesis of CNOT circuits over GF(2)
"""

__version__ = "1.0.0"
