"""Random in-region parameter draws for the eight disc families."""


import numpy as np

from lempert_lab.discs import f7_critical_constant, f7_design_constant, paper_disc
from lempert_lab.domains import GMinus, GPlain, GTilde
from lempert_lab.errors import RangeError


def _log_uniform(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def _g(rng, mu):
    return (GPlain if rng.uniform() < 0.5 else GTilde)(mu, 2)


def draw(family, rng):
    """(disc, domain) with parameters inside the family's validity region."""
    while True:
        try:
            return _draw(family, rng)
        except RangeError:
            continue


def _draw(family, rng):
    if family == "F1":
        mu = rng.uniform(0.1, 2.0)
        c = -rng.uniform(1e-4, 0.9) + 1j * rng.uniform(-0.3, 0.3)
        a = 0.9 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
        b = np.exp(2j * np.pi * rng.uniform())
        return paper_disc("F1", c=c, centers=(a,), multipliers=(b,)), _g(rng, mu)
    if family == "F2":
        return paper_disc("F2", eps=_log_uniform(rng, 1e-6, 0.3)), _g(rng, 2.0)
    if family == "F3":
        mu = rng.uniform(0.51, 2.0)
        eps = _log_uniform(rng, 1e-6, 0.1)
        lo = (1 - 1 / (2 * mu)) * eps if mu > 1 else 0.0
        delta = rng.uniform(lo, eps) if lo else eps * rng.uniform(0.01, 1.0)
        return paper_disc("F3", mu=mu, eps=eps, delta=max(delta, 1e-300)), _g(rng, mu)
    if family == "F4":
        mu = rng.uniform(1.01, 2.0)
        eps = _log_uniform(rng, 1e-6, 0.05)
        delta = rng.uniform(0.01, 1.0) * (1 - 1 / (2 * mu)) * eps
        return paper_disc("F4", mu=mu, eps=eps, delta=delta), _g(rng, mu)
    if family == "F5":
        mu = rng.uniform(0.05, 0.5)
        eps, delta = rng.uniform(1e-4, 0.5, size=2)
        return paper_disc("F5", eps=float(eps), delta=float(delta)), _g(rng, mu)
    if family == "F6":
        mu = rng.uniform(0.51, 1.0)
        return paper_disc("F6", eps=_log_uniform(rng, 1e-6, 0.5)), _g(rng, mu)
    if family == "F7":
        mu = rng.uniform(1.05, 2.0)
        eps = _log_uniform(rng, 1e-6, 0.05)
        C = rng.uniform(0.05, 0.999) * f7_critical_constant(mu)
        if rng.uniform() < 0.3:
            C = f7_design_constant(mu)
        return paper_disc("F7", mu=mu, eps=eps, C=C), _g(rng, mu)
    if family == "F8":
        mu = rng.uniform(1.0, 2.0)
        eps = _log_uniform(rng, 1e-6, 0.05)
        C = 1.0 if rng.uniform() < 0.3 else rng.uniform(0.05, 0.999) * f7_critical_constant(mu)
        if mu == 1.0:
            C = 1.0
        return paper_disc("F8", mu=mu, eps=eps, C=C), GMinus(mu, 2)
    raise ValueError(family)
