"""satauth: lattice-based authentication toolkit for satellite-ground networks.

Layers, bottom up:

* ``params`` / ``ring``   -- parameter sets and arithmetic in Z_q[x]/(x^n+1)
  (numba-accelerated transform kernels with a pure-numpy fallback,
  selected by the ``SATAUTH_BACKEND`` environment variable);
* ``recon`` / ``kex``     -- signal/parity error reconciliation and the
  randomised key agreement built on it;
* ``fuzzy``               -- code-offset biometric fuzzy extractor;
* ``wire``                -- bit-exact message codec and size accounting;
* ``protocol``            -- party state machines for every phase;
* ``simnet`` / ``scenarios`` -- deterministic virtual-time network with an
  adversary interposer, canned attack scenarios, delay reports;
* ``cli``                 -- the ``satauth`` command.
"""

from ._kernels import active_backend
from .params import PROFILES, ParamError, RingParams, get_profile, load_profiles
from .ring import Ring, RingElement, get_ring

__version__ = "0.1.0"

__all__ = [
    "PROFILES",
    "ParamError",
    "Ring",
    "RingElement",
    "RingParams",
    "active_backend",
    "get_profile",
    "get_ring",
    "load_profiles",
    "__version__",
]
