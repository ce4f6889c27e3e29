"""Independent Gaussian-moment oracle used by the tests.

Evaluates arbitrary products of intensities of zero-mean jointly Gaussian
complex fields by brute-force enumeration of all pairings (Isserlis'
theorem), given a table of second moments.  This is deliberately a
different combinatorial route from the production nine-term formula: it
enumerates every perfect matching of the 2n field factors rather than the
derangement subset, and builds centered moments by inclusion-exclusion.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

# A field symbol is (label, conj) with conj in {False, True}.


def _pairings(items):
    """All perfect matchings of an even-length list."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        remaining = rest[:k] + rest[k + 1:]
        for tail in _pairings(remaining):
            yield [(first, partner)] + tail


def product_moment(symbols, moment):
    """<z_1 ... z_2n> for zero-mean joint Gaussians via all pairings.

    ``moment(a, b)`` must return the second moment of the (ordered) pair
    of symbols; order must not matter for the supplied table.
    """
    if len(symbols) % 2:
        return 0.0
    total = 0.0 + 0.0j
    for pairing in _pairings(list(symbols)):
        term = 1.0 + 0.0j
        for a, b in pairing:
            term *= moment(a, b)
            if term == 0:
                break
        total += term
    return total


def intensity_product(labels, moment):
    """<prod_k I_k> with I_k = E_k E_k^* via Isserlis enumeration."""
    symbols = []
    for lab in labels:
        symbols.append((lab, False))
        symbols.append((lab, True))
    return product_moment(symbols, moment)


def centered_intensity_product(labels, moment):
    """<prod_k (I_k - <I_k>)> by inclusion-exclusion over subsets."""
    n = len(labels)
    means = {lab: intensity_product([lab], moment) for lab in labels}
    total = 0.0 + 0.0j
    for r in range(n + 1):
        for subset in combinations(range(n), r):
            inside = [labels[i] for i in subset]
            outside = [labels[i] for i in range(n) if i not in subset]
            term = intensity_product(inside, moment)
            for lab in outside:
                term *= -means[lab]
            total += term
    return total


def twin_beam_moment_table(gl: float):
    """Second-moment table of a single-mode twin beam (signal s, idler i)."""
    C = np.cosh(gl)
    S = np.sinh(gl)
    sym = S * S + 0.5
    pair = -1j * C * S

    def moment(a, b):
        (la, ca), (lb, cb) = a, b
        if ca and not cb:
            return moment(b, a)
        if la == lb:
            if ca != cb:
                return sym            # <E E*>
            return 0.0                # <E E> and <E* E*>
        if not ca and not cb:
            return pair               # <E_s E_i>
        if ca and cb:
            return np.conj(pair)      # <E_s* E_i*>
        return 0.0                    # <E_s E_i*>

    return moment
