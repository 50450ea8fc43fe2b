"""Integration and multiplication operational matrices (alias of :mod:`zernike_iom.operational`)."""

import sys as _sys

from . import operational as _impl

_sys.modules[__name__] = _impl
