"""Convolution kernels: compiled fast path with a numpy fallback.

The compiled extension is picked at import when available. Force a backend
with the EEGATTR_BACKEND environment variable ("compiled" or "numpy") or at
runtime with set_backend(); active_backend() reports what is in use.
"""

import os

from . import reference

_IMPL = reference
_BACKEND = "numpy"
_COMPILED = None

try:
    from . import _fastconv as _COMPILED
except ImportError:
    _COMPILED = None

_env = os.environ.get("EEGATTR_BACKEND", "auto")
if _env in ("auto", "compiled") and _COMPILED is not None:
    _IMPL = _COMPILED
    _BACKEND = "compiled"
elif _env == "compiled" and _COMPILED is None:
    raise ImportError("EEGATTR_BACKEND=compiled but the extension is not built")


def active_backend():
    return _BACKEND


def compiled_available():
    return _COMPILED is not None


def set_backend(name):
    """Switch kernel implementation: "numpy", "compiled" or "auto"."""
    global _IMPL, _BACKEND
    if name == "numpy":
        _IMPL, _BACKEND = reference, "numpy"
    elif name == "compiled":
        if _COMPILED is None:
            raise ValueError("compiled kernels are not available in this install")
        _IMPL, _BACKEND = _COMPILED, "compiled"
    elif name == "auto":
        if _COMPILED is not None:
            _IMPL, _BACKEND = _COMPILED, "compiled"
        else:
            _IMPL, _BACKEND = reference, "numpy"
    else:
        raise ValueError(f"unknown kernel backend {name!r}")


def conv2d_forward(x, w):
    return _IMPL.conv2d_forward(x, w)


def conv2d_input_grad(g, w):
    return _IMPL.conv2d_input_grad(g, w)


def conv2d_weight_grad(x, g):
    return _IMPL.conv2d_weight_grad(x, g)


def depthwise_forward(x, w):
    return _IMPL.depthwise_forward(x, w)


def depthwise_input_grad(g, w):
    return _IMPL.depthwise_input_grad(g, w)


def depthwise_weight_grad(x, g, depth_multiplier):
    return _IMPL.depthwise_weight_grad(x, g, depth_multiplier)
