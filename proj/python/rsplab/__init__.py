"""Remote state preparation toolkit.

Thin Python layer over the C++ core: protocol simulation, the RSP equation
solver and the qubit (Bloch-sphere) reduction.
"""

from ._rsplab import *  # noqa: F401,F403
from ._rsplab import RspError, FormatError, run_cli  # noqa: F401

__version__ = "0.1.0"
