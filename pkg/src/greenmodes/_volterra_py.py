"""Pure-numpy Volterra marcher, used when the compiled extension is not
built.  Same algorithm as _volterra.pyx; the history dot product sums in a
different order, so the two backends agree to rounding, not bitwise."""

import numpy as np


def march(kernel, h, y0, blowup):
    k = kernel
    n = k.size - 1
    y = np.empty(n + 1, dtype=complex)
    y[0] = y0
    if n == 0:
        return y
    krev = k[::-1].copy()

    # memory integral at the current node, maintained incrementally
    hist = 0.0 + 0.0j  # H_0 = 0, empty integral
    half_k0 = 0.5 * k[0]
    for i in range(n):
        ypred = y[i] + h * hist
        # trapezoid sum for t_{i+1}: endpoints get half weight
        s = 0.5 * k[i + 1] * y[0]
        if i >= 1:
            s += np.dot(krev[n - i:n], y[1:i + 1])
        hstar = h * (s + half_k0 * ypred)
        y[i + 1] = y[i] + 0.5 * h * (hist + hstar)
        if abs(y[i + 1]) > blowup:
            raise RuntimeError(
                "volterra march diverged at step %d (|y| = %.3g); "
                "reduce the time step" % (i + 1, abs(y[i + 1]))
            )
        hist = hstar + h * half_k0 * (y[i + 1] - ypred)
    return y
