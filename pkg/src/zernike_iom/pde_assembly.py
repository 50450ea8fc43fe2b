"""Kronecker/vec assembly of first- and second-order disk problems (alias of :mod:`zernike_iom.assembly`)."""

import sys as _sys

from . import assembly as _impl

_sys.modules[__name__] = _impl
