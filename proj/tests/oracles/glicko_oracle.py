"""Independent Glicko-2 reference.

Solves the volatility equation with scipy's brentq on a bracketing interval
instead of the Illinois iteration, then freezes results for a worked example
and for random multi-model rating periods.
"""
import json
import math
import sys

import numpy as np
from scipy.optimize import brentq

SCALE = 173.7178


def period(player, games, tau):
    r, rd, vol = player
    mu, phi = (r - 1500) / SCALE, rd / SCALE
    if not games:
        return (r, SCALE * math.sqrt(phi**2 + vol**2), vol)
    inv_v, delta_sum = 0.0, 0.0
    for (orr, ord_, _), s in games:
        mu_j, phi_j = (orr - 1500) / SCALE, ord_ / SCALE
        g = 1 / math.sqrt(1 + 3 * phi_j**2 / math.pi**2)
        e = 1 / (1 + math.exp(-g * (mu - mu_j)))
        inv_v += g * g * e * (1 - e)
        delta_sum += g * (s - e)
    v = 1 / inv_v
    delta = v * delta_sum
    a = math.log(vol**2)

    def f(x):
        ex = math.exp(x)
        return ex * (delta**2 - phi**2 - v - ex) / (2 * (phi**2 + v + ex) ** 2) - (x - a) / tau**2

    lo, hi = a, a
    if f(a) > 0:
        while f(hi) > 0:
            hi += 1.0
    else:
        while f(lo) < 0:
            lo -= 1.0
    x = a if f(a) == 0 else brentq(f, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    new_vol = math.exp(x / 2)
    phi_star = math.sqrt(phi**2 + new_vol**2)
    new_phi = 1 / math.sqrt(1 / phi_star**2 + 1 / v)
    new_mu = mu + new_phi**2 * delta_sum
    return (SCALE * new_mu + 1500, SCALE * new_phi, new_vol)


def worked_example():
    player = (1500.0, 200.0, 0.06)
    games = [((1400.0, 30.0, 0.06), 1.0), ((1550.0, 100.0, 0.06), 0.0), ((1700.0, 300.0, 0.06), 0.0)]
    return period(player, games, 0.5)


def random_periods():
    rng = np.random.default_rng(7)
    models = ["m0", "m1", "m2", "m3", "m4"]
    ratings = {m: (1500.0, 350.0, 0.06) for m in models}
    periods = []
    for _ in range(12):
        results = []
        for _ in range(int(rng.integers(0, 9))):
            a, b = rng.choice(len(models), size=2, replace=False)
            score = float(rng.choice([0.0, 0.5, 1.0]))
            results.append([models[a], models[b], score])
        games = {m: [] for m in models}
        for a, b, s in results:
            games[a].append((ratings[b], s))
            games[b].append((ratings[a], 1.0 - s))
        ratings = {m: period(ratings[m], games[m], 0.5) for m in models}
        periods.append({"results": results,
                        "after": {m: list(ratings[m]) for m in models}})
    return {"models": models, "tau": 0.5, "periods": periods}


json.dump({"source": "independent Glicko-2 with brentq volatility solve",
           "worked_example": list(worked_example()),
           "random": random_periods()}, sys.stdout, indent=1)
print()
