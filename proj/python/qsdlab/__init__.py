"""Quasi-stationary distributions of absorbed diffusions.

Simulates the self-interacting process that diffuses in a bounded domain and,
at each boundary hit, restarts from a draw of its own occupation measure. The
occupation measure and the restart points both converge to the QSD of the
absorbed diffusion; the finite-chain lab provides exact counterparts for the
operator identities behind that convergence.
"""

from qsdlab._core import *  # noqa: F401,F403
from qsdlab._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
