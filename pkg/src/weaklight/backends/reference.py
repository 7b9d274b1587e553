"""Numpy implementations of the hot kernels (fallback when the extension is absent).

The arithmetic mirrors the compiled core operation for operation: identical
association order, no fused multiply-add, so the two backends produce
bitwise-identical arrays.
"""

import numpy as np


def bilinear_grid(are, aim, bre, bim, p1re, p1im, p2re, p2im, out_re, out_im):
    q1re = p1re[:, None]
    q1im = p1im[:, None]
    q2re = p2re[:, None]
    q2im = p2im[:, None]
    out_re[:, :] = q1re * are - q1im * aim + q2re * bre - q2im * bim
    out_im[:, :] = q1re * aim + q1im * are + q2re * bim + q2im * bre


def fft_butterflies(re, im, tw_re, tw_im):
    n = re.shape[0]
    m = 2
    while m <= n:
        half = m // 2
        stride = n // m
        wr = tw_re[::stride][:half]
        wi = tw_im[::stride][:half]
        blocks_re = re.reshape(-1, m)
        blocks_im = im.reshape(-1, m)
        a_re = blocks_re[:, :half]
        b_re = blocks_re[:, half:]
        a_im = blocks_im[:, :half]
        b_im = blocks_im[:, half:]
        t_re = b_re * wr - b_im * wi
        t_im = b_re * wi + b_im * wr
        b_re[:, :] = a_re - t_re
        b_im[:, :] = a_im - t_im
        a_re[:, :] = a_re + t_re
        a_im[:, :] = a_im + t_im
        m *= 2
