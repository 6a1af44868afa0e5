"""Hot-kernel dispatch: numba-compiled by default, pure numpy on request.

Set RISEE_DISABLE_NUMBA=1 to force the numpy path (also used automatically
when numba is not importable).
"""

import os

USE_NUMBA = os.environ.get("RISEE_DISABLE_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from ._numba import pair_gains, score_candidates, sr_mmse_from_F
    except ImportError:
        USE_NUMBA = False

if not USE_NUMBA:
    from ._numpy import pair_gains, score_candidates, sr_mmse_from_F

__all__ = ["USE_NUMBA", "pair_gains", "score_candidates", "sr_mmse_from_F"]
