"""Brute-force reference implementations, written separately from the package.

They use plain sets and strings instead of the package's bitmasks and
simulators, so agreement between the two is meaningful.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations


def river_unsafe(group: set) -> bool:
    actors = {p for p in group if p.startswith("a")}
    agents = {p for p in group if p.startswith("A")}
    if not agents:
        return False
    return any("A" + a[1:] not in agents for a in actors)


def river_people(n: int) -> list:
    return [f"a{i}" for i in range(1, n + 1)] + [f"A{i}" for i in range(1, n + 1)]


def river_moves(n: int, k: int, left: frozenset, boat_left: bool) -> list:
    everyone = set(river_people(n))
    here = left if boat_left else everyone - left
    out = []
    for size in range(1, k + 1):
        for group in combinations(sorted(here), size):
            g = set(group)
            new_left = set(left) - g if boat_left else set(left) | g
            new_right = everyone - new_left
            if river_unsafe(g) or river_unsafe(new_left) or river_unsafe(new_right):
                continue
            out.append((frozenset(g), frozenset(new_left)))
    return out


def river_shortest(n: int, k: int):
    """Shortest crossing count, or None when no crossing schedule exists."""
    start = (frozenset(river_people(n)), True)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        left, boat_left = queue.popleft()
        if not left:
            return dist[(left, boat_left)]
        for _, new_left in river_moves(n, k, left, boat_left):
            nxt = (new_left, not boat_left)
            if nxt not in dist:
                dist[nxt] = dist[(left, boat_left)] + 1
                queue.append(nxt)
    return None


def hanoi_shortest(n: int) -> int:
    start = (tuple(range(n, 0, -1)), (), ())
    goal = ((), (), tuple(range(n, 0, -1)))
    dist = {start: 0}
    queue = deque([start])
    while queue:
        pegs = queue.popleft()
        if pegs == goal:
            return dist[pegs]
        for s in range(3):
            if not pegs[s]:
                continue
            for d in range(3):
                if d == s or (pegs[d] and pegs[d][-1] < pegs[s][-1]):
                    continue
                nxt = list(pegs)
                nxt[d] = pegs[d] + (pegs[s][-1],)
                nxt[s] = pegs[s][:-1]
                nxt = tuple(nxt)
                if nxt not in dist:
                    dist[nxt] = dist[pegs] + 1
                    queue.append(nxt)
    raise AssertionError("unreachable")


def checker_shortest(n: int) -> int:
    start = "R" * n + "_" + "B" * n
    goal = "B" * n + "_" + "R" * n
    dist = {start: 0}
    queue = deque([start])
    while queue:
        cells = queue.popleft()
        if cells == goal:
            return dist[cells]
        gap = cells.index("_")
        for src in range(len(cells)):
            c = cells[src]
            step = 1 if c == "R" else -1 if c == "B" else 0
            if not step:
                continue
            for hop in (1, 2):
                dst = src + step * hop
                if dst != gap:
                    continue
                if hop == 2 and cells[src + step] in ("_", c):
                    continue
                nxt = list(cells)
                nxt[src], nxt[dst] = "_", c
                nxt = "".join(nxt)
                if nxt not in dist:
                    dist[nxt] = dist[cells] + 1
                    queue.append(nxt)
    raise AssertionError("unreachable")


def blocks_shortest(initial, goal):
    """Order-insensitive goal: the multiset of non-empty stacks must match."""
    def key(stacks):
        return tuple(sorted(tuple(s) for s in stacks if s))
    target = key(goal)
    start = tuple(tuple(s) for s in initial)
    dist = {key(start): 0}
    queue = deque([start])
    while queue:
        stacks = queue.popleft()
        d0 = dist[key(stacks)]
        if key(stacks) == target:
            return d0
        for s in range(len(stacks)):
            if not stacks[s]:
                continue
            for d in range(len(stacks)):
                if d == s:
                    continue
                nxt = list(stacks)
                nxt[d] = stacks[d] + (stacks[s][-1],)
                nxt[s] = stacks[s][:-1]
                nxt = tuple(nxt)
                if key(nxt) not in dist:
                    dist[key(nxt)] = d0 + 1
                    queue.append(nxt)
    return None
