"""Slow reference implementations the tests compare against."""
from collections import Counter
from fractions import Fraction

import numpy as np


def otsu_bruteforce(gray):
    """Try every split of a 256-bin histogram; return (k, mask) with the lowest best k.

    The histogram is counted in pure Python and each candidate's
    between-class variance w0 * w1 * (mu0 - mu1)**2 is evaluated in exact
    fractions. ``k`` is None when no split leaves both sides populated.
    """
    flat = [float(v) for v in np.asarray(gray).ravel()]
    counts = Counter(min(int(v * 256), 255) for v in flat)
    n = len(flat)
    best_k, best = None, None
    for k in range(255):
        low = {b: c for b, c in counts.items() if b <= k}
        high = {b: c for b, c in counts.items() if b > k}
        n0, n1 = sum(low.values()), sum(high.values())
        if n0 == 0 or n1 == 0:
            continue
        mu0 = Fraction(sum(b * c for b, c in low.items()), n0)
        mu1 = Fraction(sum(b * c for b, c in high.items()), n1)
        var = Fraction(n0, n) * Fraction(n1, n) * (mu0 - mu1) ** 2
        if best is None or var > best:
            best_k, best = k, var
    if best_k is None:
        return None, np.zeros(np.shape(gray), dtype=bool)
    mask = np.array([min(int(v * 256), 255) > best_k for v in flat]).reshape(np.shape(gray))
    return best_k, mask


def dilate_erode(mask, radius):
    """Closing by explicit neighbourhood loops; outside the frame counts as background
    for dilation and as foreground for erosion."""
    m = np.asarray(mask, dtype=bool)
    h, w = m.shape

    def window(a, y, x, outside):
        vals = []
        for dy in range(-radius, radius + 1):
            for dx in range(-radius, radius + 1):
                yy, xx = y + dy, x + dx
                vals.append(a[yy, xx] if 0 <= yy < h and 0 <= xx < w else outside)
        return vals

    grown = np.array([[any(window(m, y, x, False)) for x in range(w)] for y in range(h)])
    return np.array([[all(window(grown, y, x, True)) for x in range(w)] for y in range(h)])
