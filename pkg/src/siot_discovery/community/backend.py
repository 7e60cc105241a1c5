"""Kernel selection: compiled extension when built, pure Python otherwise.

Set ``SIOT_DISCOVERY_FORCE_PURE=1`` to force the fallback (used by the
benchmark and the backend-parity tests).
"""

from __future__ import annotations

import os

from . import _core_py

try:
    from . import _core  # type: ignore[attr-defined]
except ImportError:  # extension not built on this install
    _core = None


def available_kernels() -> dict[str, object]:
    kernels: dict[str, object] = {"pure-python": _core_py}
    if _core is not None:
        kernels["compiled"] = _core
    return kernels


def active_kernel():
    if _core is not None and not os.environ.get("SIOT_DISCOVERY_FORCE_PURE"):
        return _core
    return _core_py


def kernel_name() -> str:
    return active_kernel().KERNEL_NAME
