# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; the contract lives in weaklight.backends.

The loops are written so every floating-point operation happens in the same
order as in the numpy reference backend, keeping the two bitwise identical.
"""


def bilinear_grid(const double[::1] are, const double[::1] aim,
                  const double[::1] bre, const double[::1] bim,
                  const double[::1] p1re, const double[::1] p1im,
                  const double[::1] p2re, const double[::1] p2im,
                  double[:, ::1] out_re, double[:, ::1] out_im):
    cdef Py_ssize_t nb = p1re.shape[0]
    cdef Py_ssize_t nw = are.shape[0]
    cdef Py_ssize_t i, j
    cdef double q1r, q1i, q2r, q2i
    with nogil:
        for i in range(nb):
            q1r = p1re[i]
            q1i = p1im[i]
            q2r = p2re[i]
            q2i = p2im[i]
            for j in range(nw):
                out_re[i, j] = q1r * are[j] - q1i * aim[j] + q2r * bre[j] - q2i * bim[j]
                out_im[i, j] = q1r * aim[j] + q1i * are[j] + q2r * bim[j] + q2i * bre[j]


def fft_butterflies(double[::1] re, double[::1] im,
                    const double[::1] tw_re, const double[::1] tw_im):
    cdef Py_ssize_t n = re.shape[0]
    cdef Py_ssize_t m = 2
    cdef Py_ssize_t half, stride, start, k, j1, j2
    cdef double wr, wi, tr, ti
    with nogil:
        while m <= n:
            half = m >> 1
            stride = n // m
            start = 0
            while start < n:
                for k in range(half):
                    wr = tw_re[k * stride]
                    wi = tw_im[k * stride]
                    j1 = start + k
                    j2 = j1 + half
                    tr = re[j2] * wr - im[j2] * wi
                    ti = re[j2] * wi + im[j2] * wr
                    re[j2] = re[j1] - tr
                    im[j2] = im[j1] - ti
                    re[j1] = re[j1] + tr
                    im[j1] = im[j1] + ti
                start += m
            m <<= 1
