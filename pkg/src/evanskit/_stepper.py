"""Stepper backend selection.

The compiled stepper is preferred when present; EVANSKIT_KERNEL=python or
=compiled forces a choice (the latter raises if the extension is absent,
so benchmarks cannot silently compare python with python).
"""

import os

from . import _stepper_py

_choice = os.environ.get("EVANSKIT_KERNEL", "auto").strip().lower() or "auto"
_impl = None
if _choice in ("auto", "compiled", "c"):
    try:
        from . import _stepper_c as _impl
    except ImportError:
        _impl = None
        if _choice != "auto":
            raise ImportError(
                "EVANSKIT_KERNEL requested the compiled stepper but the "
                "extension is not built; reinstall the package or unset "
                "EVANSKIT_KERNEL"
            )
elif _choice in ("python", "py", "pure"):
    _impl = None
else:
    raise ValueError(f"unrecognized EVANSKIT_KERNEL value {_choice!r}")

if _impl is None:
    _impl = _stepper_py

USING_COMPILED = _impl is not _stepper_py
integrate = _impl.integrate
