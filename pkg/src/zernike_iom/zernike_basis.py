"""Zernike radial polynomials, basis vectors and expansions (alias of :mod:`zernike_iom.basis`)."""

import sys as _sys

from . import basis as _impl

_sys.modules[__name__] = _impl
