"""Hot numeric kernels with a numba path and a pure-numpy fallback.

numba is used when importable unless ``RADSENSE_NO_NUMBA`` is set to a
non-empty value other than ``0``.  Both backends expose the same functions:
``trace_sequences``, ``occluded_segments``, ``sinc_sample``,
``ellipse_accumulate``.
"""
import importlib
import os

BACKENDS = ("numba", "numpy")


def _default_backend() -> str:
    if os.environ.get("RADSENSE_NO_NUMBA", "") not in ("", "0"):
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


def get_backend(name: str):
    if name not in BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(f"radsense._kernels.{name}_impl")


BACKEND = _default_backend()
_impl = get_backend(BACKEND)

trace_sequences = _impl.trace_sequences
occluded_segments = _impl.occluded_segments
sinc_sample = _impl.sinc_sample
ellipse_accumulate = _impl.ellipse_accumulate
