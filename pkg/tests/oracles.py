"""Brute-force reference computations, independent of the package internals."""
import itertools


def enumerate_effective_loss(p_by_index, k):
    """Exact (pi_star, block_failure) by summing over all 2^n erasure patterns."""
    n = len(p_by_index)
    pi_star = fail = 0.0
    for pattern in itertools.product((False, True), repeat=n):  # True = erased
        prob = 1.0
        for erased, p in zip(pattern, p_by_index):
            prob *= p if erased else 1.0 - p
        received = n - sum(pattern)
        if received < k:
            src_rx = sum(1 for i in range(k) if not pattern[i])
            fail += prob
            pi_star += prob * (k - src_rx) / k
    return pi_star, fail
