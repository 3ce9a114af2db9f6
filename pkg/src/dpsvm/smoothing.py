"""Quintic smoothing of the hinge loss.

``smooth_H`` is the CDF-like transition used to mollify the positive part:
zero below -1, one above +1, and the quintic
``1/2 + (15/16)(v - (2/3)v^3 + (1/5)v^5)`` in between, which matches value
and derivative at both endpoints.  The smoothed hinge is
``uH(u/h)``, which agrees with ``max(u, 0)`` whenever ``|u| >= h``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["smooth_H", "smooth_H_prime", "smoothed_hinge"]


def smooth_H(v):
    """Quintic transition function; scalar in gives scalar out."""
    v = np.asarray(v, dtype=float)
    u = np.clip(v, -1.0, 1.0)
    core = 0.5 + 0.9375 * (u - (2.0 / 3.0) * u**3 + 0.2 * u**5)
    out = np.where(v <= -1.0, 0.0, np.where(v >= 1.0, 1.0, core))
    return float(out) if out.ndim == 0 else out


def smooth_H_prime(v):
    """Derivative of :func:`smooth_H`: (15/16)(1 - v^2)^2 on [-1, 1], else 0."""
    v = np.asarray(v, dtype=float)
    inside = np.abs(v) < 1.0
    out = np.where(inside, 0.9375 * (1.0 - v**2) ** 2, 0.0)
    return float(out) if out.ndim == 0 else out


def smoothed_hinge(u, h):
    """Smoothed positive part ``u * H(u / h)``; equals ``max(u, 0)`` for |u| >= h."""
    if h <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    u = np.asarray(u, dtype=float)
    out = u * smooth_H(u / h)
    return float(out) if out.ndim == 0 else out
