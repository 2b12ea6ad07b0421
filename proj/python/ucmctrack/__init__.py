"""Ground-plane multi-object tracking with mapped Mahalanobis association."""

from ._ucmctrack import *  # noqa: F401,F403
from ._ucmctrack import __doc__ as _doc

__doc__ = _doc
