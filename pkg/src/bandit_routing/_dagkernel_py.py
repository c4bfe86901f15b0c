"""Pure-Python twin of the compiled backward dynamic program."""

import math

import numpy as np


def backward_dp(rev_order, out_ptr, out_links, heads, weights, dest):
    ptr = out_ptr.tolist()
    links = out_links.tolist()
    head = heads.tolist()
    w = weights.tolist()
    n = len(ptr) - 1
    dist = [math.inf] * n
    choice = [-1] * n
    dist[dest] = 0.0
    for v in rev_order.tolist():
        if v == dest:
            continue
        best = math.inf
        best_link = -1
        for e in range(ptr[v], ptr[v + 1]):
            link = links[e]
            tail_dist = dist[head[link]]
            if tail_dist == math.inf:
                continue
            cand = w[link] + tail_dist
            if cand < best:
                best = cand
                best_link = link
        dist[v] = best
        choice[v] = best_link
    return np.array(dist), np.array(choice, dtype=np.int64)
