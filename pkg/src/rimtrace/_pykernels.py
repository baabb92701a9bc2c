"""Pure numpy implementations of the hot kernels (fallback backend)."""

import numpy as np

# targets x nodes elements materialised per block
_BLOCK = 1 << 21


def kernel_values(l, coef, r, x):
    """d^l/dx^l P_r(x), elementwise over broadcast r, x (see ``rimtrace.kernel``)."""
    r, x = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(x, dtype=float))
    half = np.sin(0.5 * x)
    re = (1.0 - r) + 2.0 * r * half * half  # Re(1 - w)
    if l == 0:
        out = (1.0 - r * r) / ((1.0 - r) ** 2 + 4.0 * r * half * half)
    else:
        q = 1.0 / (re - 1j * r * np.sin(x))
        v = r * np.exp(1j * x) * q
        acc = np.zeros(x.shape, dtype=np.complex128)
        for a in coef[:0:-1]:
            acc = (acc + a) * v
        acc = 2.0 * q * acc * 1j**l
        out = acc.real
    return np.where(r == 1.0, 0.0, out)


def kernel_sum(l, coef, r, theta, nodes, weights):
    out = np.empty(r.shape[0], dtype=np.complex128)
    nq = max(nodes.shape[0], 1)
    step = max(1, _BLOCK // nq)
    for lo in range(0, r.shape[0], step):
        x = theta[lo:lo + step, None] - nodes[None, :]
        vals = kernel_values(l, coef, r[lo:lo + step, None], x)
        out[lo:lo + step] = vals @ weights
    return out


def horner(coeffs, z):
    acc = np.zeros(z.shape, dtype=np.complex128)
    for a in coeffs[::-1]:
        acc = acc * z + a
    return acc
