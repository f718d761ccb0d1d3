"""Tally of operations whose cost grows with the data length n.

The projected solver promises that its inner iterations never touch
length-n arrays.  Every routine that does so calls :func:`record`, and tests
compare snapshots of :data:`COUNTS` around the code under inspection.
"""
from collections import Counter
from contextlib import contextmanager

COUNTS = Counter()


def record(kind, amount=1):
    COUNTS[kind] += amount


def total():
    return sum(COUNTS.values())


@contextmanager
def tally():
    """Yield a Counter holding the O(n) operations recorded inside the block."""
    before = Counter(COUNTS)
    delta = Counter()
    try:
        yield delta
    finally:
        after = Counter(COUNTS)
        after.subtract(before)
        delta.update({k: v for k, v in after.items() if v})
