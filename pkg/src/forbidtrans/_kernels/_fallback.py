"""Pure numpy implementation of the reservoir overlap kernel."""
import numpy as np


def bath_spectrum(energies, sigma, r2, offsets, gaussian, width, cutoff):
    """Reservoir absorption profile at each energy offset.

    Returns, for every ``x`` in ``offsets``::

        sum_ij sigma_i * r2[j, i] * delta_width(x + E_i - E_j)

    restricted to pairs with ``|E_j - E_i| <= cutoff``.
    """
    energies = np.asarray(energies, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    occupied = sigma != 0.0
    e_from = energies[occupied]
    weight = r2[:, occupied] * sigma[occupied]
    d_e = energies[:, None] - e_from[None, :]
    weight = np.where(np.abs(d_e) <= cutoff, weight, 0.0)
    keep = weight != 0.0
    d_e, weight = d_e[keep], weight[keep]
    out = np.empty(len(offsets))
    for m, x0 in enumerate(offsets):
        x = x0 - d_e
        if gaussian:
            vals = np.exp(-x * x / (2.0 * width * width)) / (width * np.sqrt(2.0 * np.pi))
        else:
            vals = (width / np.pi) / (x * x + width * width)
        out[m] = float(np.sum(weight * vals))
    return out
