"""Proxy-modified intelligence.

A proxy of strength ``P`` (tools, collectives, culture) lowers difficulty
by ``h * P`` in the ability denominator and boosts performance linearly,
``I{P} = I * (1 + gamma * P)``.  Whether the net effect raises or lowers
measured intelligence depends on the sign of ``gamma * Q - h``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class ProxyModel:
    strength_p: float = 0.0
    h_coeff: float = 0.0
    boost_gamma: float = 0.0

    def __post_init__(self):
        for name in ("strength_p", "h_coeff", "boost_gamma"):
            if not getattr(self, name) >= 0:
                raise ParameterError(name, "must be >= 0")

    def with_strength(self, p):
        return ProxyModel(p, self.h_coeff, self.boost_gamma)


def proxy_boosted_intelligence(i_raw, proxy):
    return i_raw * (1.0 + proxy.boost_gamma * proxy.strength_p)


def proxy_intelligence(c, q, i_raw, proxy):
    """[C / (h*P + Q)] * [I{P} / Q]."""
    if not q > 0:
        raise ParameterError("q", f"ability must be > 0, got {q}")
    support = proxy.h_coeff * proxy.strength_p + q
    if not support > 0:
        raise ParameterError("h_coeff", "h * P + Q must be > 0")
    return (c / support) * (proxy_boosted_intelligence(i_raw, proxy) / q)


def net_effect_ratio(q, proxy):
    """Ratio of proxy-modified to unmodified intelligence: (1 + gamma*P) * Q / (h*P + Q)."""
    return (1.0 + proxy.boost_gamma * proxy.strength_p) * q / (proxy.h_coeff * proxy.strength_p + q)


def break_even_points(q, h_coeff, boost_gamma, tol=1e-12):
    """Proxy strengths where the net effect ratio equals one.

    The ratio minus one factors as ``P * (gamma*Q - h) / (h*P + Q)``, so the
    only root is ``P = 0`` unless ``gamma * Q == h``, when every ``P`` breaks
    even (returned as ``None``).
    """
    if abs(boost_gamma * q - h_coeff) <= tol * max(1.0, h_coeff):
        return None
    return (0.0,)


def break_even_h(q, boost_gamma):
    """Difficulty-reduction coefficient at which any proxy strength breaks even."""
    return boost_gamma * q


def sweep(c, q, i_raw, h_coeff, boost_gamma, strengths):
    """Rows of (P, I{P}, I_hat, I_hat_P, I_hat_P - I_hat) over ``strengths``."""
    from .metrics import difficulty, intelligence_difficulty

    i_hat = intelligence_difficulty(difficulty(c, q), i_raw, q)
    rows = []
    for p in np.asarray(strengths, dtype=float).tolist():
        m = ProxyModel(p, h_coeff, boost_gamma)
        ip = proxy_intelligence(c, q, i_raw, m)
        rows.append((p, proxy_boosted_intelligence(i_raw, m), i_hat, ip, ip - i_hat))
    return rows
