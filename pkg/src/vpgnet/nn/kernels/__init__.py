"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
always available. Set VPG_KERNELS=python or VPG_KERNELS=compiled to force a
backend (forcing "compiled" raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _npkernels


def load_backend(name: str):
    """Return the kernel module for an explicit backend name."""
    if name == "python":
        return _npkernels
    if name == "compiled":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    forced = os.environ.get("VPG_KERNELS", "auto").strip().lower()
    if forced in ("python", "compiled"):
        return load_backend(forced)
    if forced != "auto":
        raise ValueError(f"VPG_KERNELS must be auto, python, or compiled, got {forced!r}")
    try:
        return load_backend("compiled")
    except ImportError:
        return _npkernels


_backend = _select()

BACKEND = _backend.NAME
conv_forward = _backend.conv_forward
conv_backward = _backend.conv_backward
maxpool_forward = _backend.maxpool_forward
maxpool_backward = _backend.maxpool_backward
