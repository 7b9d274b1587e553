"""Kernel backends: compiled Cython core with a numpy reference fallback.

Both backends implement the same two entry points with identical
floating-point semantics (same operation order on IEEE-754 doubles, no fused
multiply-add), so results are bitwise identical whichever one is active:

``bilinear_grid(are, aim, bre, bim, p1re, p1im, p2re, p2im, out_re, out_im)``
    fills ``out[i, j] = p1[i] * a[j] + p2[i] * b[j]`` (complex, split into
    real/imaginary float64 arrays; ``out`` has shape ``(len(p1), len(a))``).

``fft_butterflies(re, im, tw_re, tw_im)``
    in-place radix-2 Cooley-Tukey butterflies on bit-reversal-permuted data;
    ``tw`` holds exp(-2*pi*i*k/n) for k < n/2.

Selection happens once at import: the compiled core if importable, else the
reference.  Override with the environment variable WEAKLIGHT_BACKEND set to
``auto``, ``compiled`` or ``reference``.
"""

import os

__all__ = ["bilinear_grid", "fft_butterflies", "active_backend", "ACTIVE_BACKEND"]


def _select():
    choice = os.environ.get("WEAKLIGHT_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "compiled", "reference"):
        raise RuntimeError(
            f"WEAKLIGHT_BACKEND must be auto, compiled or reference; got {choice!r}")
    if choice in ("auto", "compiled"):
        try:
            from . import _core
            return _core, "compiled"
        except ImportError:
            if choice == "compiled":
                raise RuntimeError(
                    "WEAKLIGHT_BACKEND=compiled but the extension is not built")
    from . import reference
    return reference, "reference"


_impl, ACTIVE_BACKEND = _select()

bilinear_grid = _impl.bilinear_grid
fft_butterflies = _impl.fft_butterflies


def active_backend():
    """Name of the kernel backend selected at import time."""
    return ACTIVE_BACKEND
