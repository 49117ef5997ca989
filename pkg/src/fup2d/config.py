"""Shared numerical tolerances and resource caps."""

import os

#: Relative threshold for reading off the support of a grid function.
SUPPORT_TOL = 1e-9
#: Relative threshold (against the largest singular value) for numerical rank.
RANK_TOL = 1e-9
#: Relative threshold (against the coefficient 1-norm) for grid vanishing.
ZERO_TOL = 1e-9

DEFAULT_MATRIX_ENTRY_CAP = 262144


def matrix_entry_cap(cap=None):
    """Resolve the matrix-entry cap: explicit argument, then ``FUP_CAP``, then default."""
    if cap is not None:
        cap = int(cap)
    elif os.environ.get("FUP_CAP"):
        cap = int(os.environ["FUP_CAP"])
    else:
        cap = DEFAULT_MATRIX_ENTRY_CAP
    if cap <= 0:
        raise ValueError(f"matrix-entry cap must be positive, got {cap}")
    return cap


def check_cap(entries, cap=None):
    from .errors import ResourceCapError

    cap = matrix_entry_cap(cap)
    if entries > cap:
        raise ResourceCapError(entries, cap)
    return cap
