"""Array-backed treap and treap sort.

Nodes are rows of one int64 table so the insertion and traversal loops can
be compiled and each visit touches a single cache line. Child and parent
links are row indices, with -1 meaning "none".

Ordering rule: keys equal to a node's key go to its left subtree, so every
node satisfies ``left keys <= key < right keys``. Priorities form a max-heap.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .sorts import KEY_DTYPE, as_keys

NIL = -1
# node table columns
KEY, LEFT, RIGHT, PARENT, PRIO = 0, 1, 2, 3, 4
NODE_FIELDS = 5
NODE_BYTES = NODE_FIELDS * 8
# uint64 priorities are stored shifted into int64 so signed comparison
# keeps their order
_PRIO_SHIFT = np.uint64(1 << 63)


def _encode_prio(p) -> np.ndarray:
    return (np.asarray(p, dtype=np.uint64) ^ _PRIO_SHIFT).view(np.int64)


def _decode_prio(s) -> np.ndarray:
    return np.asarray(s, dtype=np.int64).view(np.uint64) ^ _PRIO_SHIFT


@njit(cache=True)
def _rotate_up(nd, x):
    # lift x above its parent p, preserving the in-order sequence
    p = nd[x, PARENT]
    g = nd[p, PARENT]
    if nd[p, LEFT] == x:
        b = nd[x, RIGHT]
        nd[p, LEFT] = b
        nd[x, RIGHT] = p
    else:
        b = nd[x, LEFT]
        nd[p, RIGHT] = b
        nd[x, LEFT] = p
    if b != -1:
        nd[b, PARENT] = p
    nd[p, PARENT] = x
    nd[x, PARENT] = g
    if g != -1:
        if nd[g, LEFT] == p:
            nd[g, LEFT] = x
        else:
            nd[g, RIGHT] = x


@njit(cache=True)
def _insert(nd, root, x):
    nd[x, LEFT] = -1
    nd[x, RIGHT] = -1
    if root == -1:
        nd[x, PARENT] = -1
        return x
    k = nd[x, KEY]
    cur = root
    while True:
        if k <= nd[cur, KEY]:
            c = nd[cur, LEFT]
            if c == -1:
                nd[cur, LEFT] = x
                break
        else:
            c = nd[cur, RIGHT]
            if c == -1:
                nd[cur, RIGHT] = x
                break
        cur = c
    nd[x, PARENT] = cur
    while nd[x, PARENT] != -1 and nd[nd[x, PARENT], PRIO] < nd[x, PRIO]:
        p = nd[x, PARENT]
        if nd[p, KEY] == k:
            # equal keys are interchangeable: trade priorities instead of
            # rotating, which would put an equal key in a right subtree
            t = nd[p, PRIO]
            nd[p, PRIO] = nd[x, PRIO]
            nd[x, PRIO] = t
            x = p
        else:
            _rotate_up(nd, x)
    if nd[x, PARENT] == -1:
        return x
    return root


@njit(cache=True)
def _insert_range(nd, root, start, stop):
    for x in range(start, stop):
        root = _insert(nd, root, x)
    return root


@njit(cache=True)
def _inorder(nd, root, out):
    i = 0
    cur = root
    if cur == -1:
        return 0
    while nd[cur, LEFT] != -1:
        cur = nd[cur, LEFT]
    while cur != -1:
        out[i] = nd[cur, KEY]
        i += 1
        if nd[cur, RIGHT] != -1:
            cur = nd[cur, RIGHT]
            while nd[cur, LEFT] != -1:
                cur = nd[cur, LEFT]
        else:
            while nd[cur, PARENT] != -1 and nd[nd[cur, PARENT], RIGHT] == cur:
                cur = nd[cur, PARENT]
            cur = nd[cur, PARENT]
    return i


@njit(cache=True)
def _find(nd, root, k):
    cur = root
    while cur != -1:
        if k == nd[cur, KEY]:
            return cur
        if k < nd[cur, KEY]:
            cur = nd[cur, LEFT]
        else:
            cur = nd[cur, RIGHT]
    return -1


@njit(cache=True)
def _delete(nd, root, x):
    # rotate x down below its higher-priority child until it is a leaf
    while nd[x, LEFT] != -1 or nd[x, RIGHT] != -1:
        lc = nd[x, LEFT]
        rc = nd[x, RIGHT]
        if rc == -1 or (lc != -1 and nd[lc, PRIO] >= nd[rc, PRIO]):
            c = lc
        else:
            c = rc
        _rotate_up(nd, c)
        if nd[c, PARENT] == -1:
            root = c
    p = nd[x, PARENT]
    if p == -1:
        root = -1
    elif nd[p, LEFT] == x:
        nd[p, LEFT] = -1
    else:
        nd[p, RIGHT] = -1
    nd[x, PARENT] = -1
    return root


class Treap:
    """Randomized BST holding int64 keys with uint64 priorities.

    Each node is one row of an ``(capacity, 5)`` int64 table holding key,
    left, right, parent and the shifted priority.
    """

    def __init__(self, capacity: int = 16):
        self.nodes = np.empty((max(int(capacity), 1), NODE_FIELDS), dtype=np.int64)
        self.root = NIL
        self.size = 0
        self._used = 0

    @property
    def capacity(self) -> int:
        return self.nodes.shape[0]

    def _reserve(self, extra: int) -> None:
        need = self._used + extra
        if need <= self.capacity:
            return
        grown = np.empty((max(need, 2 * self.capacity), NODE_FIELDS), dtype=np.int64)
        grown[: self._used] = self.nodes[: self._used]
        self.nodes = grown

    def insert(self, key: int, priority: int) -> "Treap":
        self._reserve(1)
        x = self._used
        self.nodes[x, KEY] = key
        self.nodes[x, PRIO] = _encode_prio(priority)
        self._used += 1
        self.root = _insert(self.nodes, self.root, x)
        self.size += 1
        return self

    def extend(self, keys, priorities) -> "Treap":
        """Insert many keys at once; same result as repeated `insert`."""
        keys = np.asarray(keys, dtype=KEY_DTYPE)
        priorities = np.asarray(priorities, dtype=np.uint64)
        if keys.shape != priorities.shape:
            raise ValueError("keys and priorities differ in length")
        m = keys.shape[0]
        self._reserve(m)
        start = self._used
        self.nodes[start : start + m, KEY] = keys
        self.nodes[start : start + m, PRIO] = _encode_prio(priorities)
        self._used += m
        self.root = _insert_range(self.nodes, self.root, start, start + m)
        self.size += m
        return self

    def delete(self, key: int) -> bool:
        """Remove one node holding `key` by rotating it down to a leaf.

        Returns False when the key is absent. The freed slot is not reused.
        """
        x = _find(self.nodes, self.root, key)
        if x == NIL:
            return False
        self.root = _delete(self.nodes, self.root, x)
        self.size -= 1
        return True

    def __contains__(self, key) -> bool:
        return _find(self.nodes, self.root, int(key)) != NIL

    def __len__(self) -> int:
        return self.size

    def key(self, slot: int) -> int:
        return int(self.nodes[slot, KEY])

    def priority(self, slot: int) -> int:
        return int(_decode_prio(self.nodes[slot, PRIO]))

    def left(self, slot: int) -> int:
        return int(self.nodes[slot, LEFT])

    def right(self, slot: int) -> int:
        return int(self.nodes[slot, RIGHT])

    def inorder(self, out=None) -> np.ndarray:
        if out is None:
            out = np.empty(self.size, dtype=KEY_DTYPE)
        n = _inorder(self.nodes, self.root, out)
        return out[:n]

    # -- structural checks used by the tests ---------------------------------

    def walk(self):
        """Yield (slot, depth) for every reachable node, preorder."""
        if self.root == NIL:
            return
        nd = self.nodes
        stack = [(self.root, 0)]
        while stack:
            x, d = stack.pop()
            yield x, d
            for c in (nd[x, RIGHT], nd[x, LEFT]):
                if c != NIL:
                    stack.append((int(c), d + 1))

    def node_depths(self) -> np.ndarray:
        return np.array([d for _, d in self.walk()], dtype=np.int64)

    def check_invariants(self) -> None:
        """Raise AssertionError unless the BST, heap and size invariants hold."""
        nd = self.nodes
        count = 0
        # (slot, exclusive lower bound, inclusive upper bound)
        stack = [(self.root, None, None)] if self.root != NIL else []
        if self.root != NIL and nd[self.root, PARENT] != NIL:
            raise AssertionError("root has a parent link")
        while stack:
            x, lo, hi = stack.pop()
            count += 1
            k = int(nd[x, KEY])
            if lo is not None and not k > lo:
                raise AssertionError(f"slot {x}: key {k} not > {lo}")
            if hi is not None and not k <= hi:
                raise AssertionError(f"slot {x}: key {k} not <= {hi}")
            for c, clo, chi in ((nd[x, LEFT], lo, k), (nd[x, RIGHT], k, hi)):
                if c == NIL:
                    continue
                if nd[c, PRIO] > nd[x, PRIO]:
                    raise AssertionError(f"heap order broken between slots {x} and {c}")
                if nd[c, PARENT] != x:
                    raise AssertionError(f"slot {c} has wrong parent link")
                stack.append((int(c), clo, chi))
        if count != self.size:
            raise AssertionError(f"size {self.size} but {count} reachable nodes")


def treap_insert(t: Treap, key: int, priority: int) -> Treap:
    return t.insert(key, priority)


# keeps the priority stream independent of datasets drawn from the same seed
_PRIORITY_SALT = 0x7472656170


def random_priorities(n: int, seed) -> np.ndarray:
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, _PRIORITY_SALT])
    return rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)


def treap_sort(arr, rng_seed=0) -> np.ndarray:
    """Insert every key with a seeded uniform priority, then read in order."""
    keys = as_keys(arr)
    n = keys.shape[0]
    t = Treap(capacity=n)
    t.extend(keys, random_priorities(n, rng_seed))
    return t.inorder(out=keys)
