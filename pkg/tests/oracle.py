"""Brute-force reference computations by exhaustive enumeration (small n only)."""
import itertools
import math
from collections import defaultdict


def partitions(n, max_part=None):
    """Integer partitions of n as multiplicity dicts {j: r_j}."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield {}
        return
    for j in range(min(n, max_part), 0, -1):
        for rest in partitions(n - j, j):
            d = dict(rest)
            d[j] = d.get(j, 0) + 1
            yield d


def cycle_type_weight(ct, theta):
    """n!/(prod j^r_j r_j!) * prod theta_j^r_j / n!, i.e. prod (theta_j/j)^r_j / r_j!."""
    w = 1.0
    for j, r in ct.items():
        w *= (theta(j) / j) ** r / math.factorial(r)
    return w


def enumerate_law(n, theta):
    """List of (cycle_type, probability) and the normalization h_n."""
    cts = list(partitions(n))
    ws = [cycle_type_weight(ct, theta) for ct in cts]
    h = math.fsum(ws)
    return [(ct, w / h) for ct, w in zip(cts, ws)], h


def law_of(n, theta, stat):
    law, _ = enumerate_law(n, theta)
    out = defaultdict(float)
    for ct, p in law:
        out[stat(ct)] += p
    return dict(out)


def law_L1(n, theta):
    # P(index 1 lies in a j-cycle) = j r_j / n
    law, _ = enumerate_law(n, theta)
    out = defaultdict(float)
    for ct, p in law:
        for j, r in ct.items():
            out[j] += p * j * r / n
    return dict(out)


def falling(r, k):
    out = 1
    for i in range(k):
        out *= r - i
    return out


def factorial_moment(n, theta, k):
    law, _ = enumerate_law(n, theta)
    return math.fsum(p * math.prod(falling(ct.get(j, 0), kj) for j, kj in k.items()) for ct, p in law)


def permutation_cycle_lengths(perm):
    seen = [False] * len(perm)
    lengths = []
    first = None
    for start in range(len(perm)):
        if seen[start]:
            continue
        length, i = 0, start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if start == 0:
            first = length
        lengths.append(length)
    return lengths, first


def symmetric_group_h(n, theta):
    """h_n = (1/n!) sum over all of S_n of prod theta over cycles."""
    total = math.fsum(math.prod(theta(l) for l in permutation_cycle_lengths(p)[0])
                      for p in itertools.permutations(range(n)))
    return total / math.factorial(n)
