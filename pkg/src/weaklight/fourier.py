"""Deterministic radix-2 discrete Fourier transform.

The transform is implemented in-artifact (iterative Cooley-Tukey on
power-of-two sizes) so pulse outputs are bit-reproducible across platforms
and kernel backends.  Twiddle factors come from the C library's cos/sin via
the math module in both backends.

Conventions match the usual DFT pair: forward is
``X[k] = sum_j x[j] exp(-2*pi*i*j*k/n)`` and the inverse carries the ``1/n``.
"""

import math
from functools import lru_cache

import numpy as np

from . import backends

__all__ = ["dft_forward", "dft_inverse"]


@lru_cache(maxsize=None)
def _tables(n):
    bits = n.bit_length() - 1
    perm = np.zeros(n, dtype=np.intp)
    for i in range(n):
        r = 0
        v = i
        for _ in range(bits):
            r = (r << 1) | (v & 1)
            v >>= 1
        perm[i] = r
    tw_re = np.empty(n // 2)
    tw_im = np.empty(n // 2)
    for k in range(n // 2):
        ang = -2.0 * math.pi * k / n
        tw_re[k] = math.cos(ang)
        tw_im[k] = math.sin(ang)
    for arr in (perm, tw_re, tw_im):
        arr.setflags(write=False)
    return perm, tw_re, tw_im


def _check_size(n):
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"transform size must be a power of two >= 2, got {n}")


def dft_forward(z):
    """Forward DFT of a complex vector whose length is a power of two."""
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim != 1:
        raise ValueError("expected a one-dimensional array")
    n = z.shape[0]
    _check_size(n)
    perm, tw_re, tw_im = _tables(n)
    re = np.ascontiguousarray(z.real[perm])
    im = np.ascontiguousarray(z.imag[perm])
    backends.fft_butterflies(re, im, tw_re, tw_im)
    out = np.empty(n, dtype=np.complex128)
    out.real = re
    out.imag = im
    return out


def dft_inverse(z):
    """Inverse DFT (with the 1/n factor) via conjugation of the forward pass."""
    z = np.asarray(z, dtype=np.complex128)
    out = dft_forward(np.conjugate(z))
    np.conjugate(out, out=out)
    out /= z.shape[0]
    return out
