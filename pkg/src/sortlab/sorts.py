"""Shell sort and heap sort over 64-bit integer arrays.

The inner loops are compiled with numba so that inputs of a million keys
sort in well under a second. Each public function copies its input and
returns the sorted copy; the caller's array is never modified.

Both sorts expose an optional debug hook so tests can inspect the
intermediate state (h-sortedness after each shell pass, the max-heap after
buildheap).
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit

KEY_DTYPE = np.int64


def as_keys(arr) -> np.ndarray:
    """Return `arr` as a fresh contiguous int64 array."""
    return np.array(arr, dtype=KEY_DTYPE, copy=True, order="C").reshape(-1)


# --------------------------------------------------------------------------
# shell sort
# --------------------------------------------------------------------------


def halving_gaps(n: int) -> list[int]:
    """Shell's original sequence: n//2, n//4, ..., 1."""
    gaps = []
    h = n // 2
    while h > 0:
        gaps.append(h)
        h //= 2
    if not gaps:
        gaps.append(1)
    return gaps


def validate_gaps(gaps: Sequence[int]) -> list[int]:
    gaps = [int(h) for h in gaps]
    if not gaps or gaps[-1] != 1:
        raise ValueError(f"gap sequence must end in 1, got {gaps}")
    for a, b in zip(gaps, gaps[1:]):
        if a <= b:
            raise ValueError(f"gap sequence must be strictly decreasing, got {gaps}")
    return gaps


@njit(cache=True)
def _h_sort(a, h):
    # gapped insertion sort; h == 1 is plain insertion sort
    n = a.shape[0]
    for i in range(h, n):
        v = a[i]
        j = i
        while j >= h and a[j - h] > v:
            a[j] = a[j - h]
            j -= h
        a[j] = v


@njit(cache=True)
def _shell_all(a, gaps):
    for g in range(gaps.shape[0]):
        _h_sort(a, gaps[g])


def shell_sort(
    arr,
    gaps: Optional[Sequence[int]] = None,
    on_pass: Optional[Callable[[int, np.ndarray], None]] = None,
) -> np.ndarray:
    """Sort with Shell's diminishing-increment method.

    `gaps` defaults to the halving sequence for ``len(arr)``. When `on_pass`
    is given it is called as ``on_pass(h, a)`` after each h-sorting pass;
    `a` is the working array and must not be modified by the hook.
    """
    a = as_keys(arr)
    seq = halving_gaps(a.shape[0]) if gaps is None else validate_gaps(gaps)
    if on_pass is None:
        _shell_all(a, np.asarray(seq, dtype=np.int64))
    else:
        for h in seq:
            _h_sort(a, h)
            on_pass(h, a)
    return a


# --------------------------------------------------------------------------
# heap sort
# --------------------------------------------------------------------------


@njit(cache=True)
def _downheap(a, i, n):
    v = a[i]
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and a[c + 1] > a[c]:
            c += 1
        if a[c] <= v:
            break
        a[i] = a[c]
        i = c
    a[i] = v


@njit(cache=True)
def _buildheap(a):
    n = a.shape[0]
    for i in range(n // 2 - 1, -1, -1):
        _downheap(a, i, n)


@njit(cache=True)
def _sortdown(a):
    for end in range(a.shape[0] - 1, 0, -1):
        t = a[0]
        a[0] = a[end]
        a[end] = t
        _downheap(a, 0, end)


def heap_sort(arr, on_heapified: Optional[Callable[[np.ndarray], None]] = None) -> np.ndarray:
    """In-place heapsort (Williams) on a copy of `arr`.

    The array is turned into a max-heap by calling downheap on every internal
    node from the last one back to the root, then the root is repeatedly
    swapped with the last active slot and the heap shrinks by one.
    """
    a = as_keys(arr)
    _buildheap(a)
    if on_heapified is not None:
        on_heapified(a)
    _sortdown(a)
    return a


def is_max_heap(a, heap_len: Optional[int] = None) -> bool:
    a = np.asarray(a)
    n = a.shape[0] if heap_len is None else heap_len
    child = np.arange(1, n)
    return bool(np.all(a[(child - 1) // 2] >= a[child]))


def is_h_sorted(a, h: int) -> bool:
    a = np.asarray(a)
    return bool(np.all(a[:-h] <= a[h:])) if a.shape[0] > h else True


# --------------------------------------------------------------------------
# correctness checks
# --------------------------------------------------------------------------


def verify_sorted_permutation(inp, out) -> bool:
    """True iff `out` is non-decreasing and holds the same multiset as `inp`."""
    inp = np.asarray(inp, dtype=KEY_DTYPE).reshape(-1)
    out = np.asarray(out, dtype=KEY_DTYPE).reshape(-1)
    if inp.shape != out.shape:
        return False
    if out.shape[0] > 1 and not bool(np.all(out[:-1] <= out[1:])):
        return False
    return bool(np.array_equal(np.sort(inp), out))
