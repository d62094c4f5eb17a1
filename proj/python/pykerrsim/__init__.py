"""Python interface to the kerrsim core.

When installed as a wheel the compiled module sits next to this file. For
in-tree development builds (plain CMake, no pip install) the extension is
picked up from a build directory: set KERRSIM_BUILD_DIR, or rely on the
default ``<repo>/build`` location.
"""

import os
import sys

try:
    from ._pykerrsim import *  # noqa: F401,F403
    from ._pykerrsim import __doc__ as _core_doc
except ImportError:  # development layout: extension lives in the CMake build dir
    _here = os.path.dirname(os.path.abspath(__file__))
    _candidates = [
        os.environ.get("KERRSIM_BUILD_DIR", ""),
        os.path.join(_here, "..", "..", "build"),
    ]
    for _c in _candidates:
        if _c and os.path.isdir(_c) and _c not in sys.path:
            sys.path.insert(0, _c)
    from _pykerrsim import *  # noqa: F401,F403
    from _pykerrsim import __doc__ as _core_doc

__doc__ = (__doc__ or "") + "\n\n" + (_core_doc or "")
__version__ = "0.1.0"
