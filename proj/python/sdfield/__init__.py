"""Single-view implicit surface toolkit (C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import SdfieldError, __doc__  # noqa: F401
