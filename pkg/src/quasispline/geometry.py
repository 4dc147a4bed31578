"""Dyadic cells of a domain, cube chains and the e-type probe.

Index sets are returned as int64 arrays of shape (n, d), sorted
lexicographically and read-only.  Cell ``(k, nu)`` is the cube
``2^-k nu + 2^-k [0, 1]^d``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .domains import Domain


class NoInteriorCellsError(ValueError):
    """Raised when a level has no closed cell inside the domain."""


class ChainNotFoundError(RuntimeError):
    pass


def lex_sort(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return rows.reshape(0, rows.shape[1] if rows.ndim == 2 else 0)
    order = np.lexsort(rows.T[::-1])
    return rows[order]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


def _index_grid(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


@lru_cache(maxsize=256)
def active_cells(D: Domain, k: int, m: int) -> np.ndarray:
    """``N_k^{d,m,D}``: shifts whose basis support ``2^-k (nu + [0, m+1]^d)`` meets D."""
    if k < 0:
        raise ValueError("level must be nonnegative")
    lo, hi = D.bbox
    scale = 2.0**k
    cand = _index_grid(np.floor(lo * scale).astype(np.int64) - m - 1, np.ceil(hi * scale).astype(np.int64))
    keep = D.boxes_meet(cand / scale, (cand + m + 1) / scale)
    out = lex_sort(cand[keep])
    if out.shape[0] == 0:
        raise ValueError(f"no active cells at level {k}: domain and bounding box disagree")
    return _frozen(out)


@lru_cache(maxsize=256)
def interior_cells(D: Domain, k: int) -> np.ndarray:
    """``N_k(D)``: shifts whose closed cell lies in D (possibly empty)."""
    lo, hi = D.bbox
    scale = 2.0**k
    cand = _index_grid(np.floor(lo * scale).astype(np.int64), np.ceil(hi * scale).astype(np.int64) - 1)
    keep = D.boxes_inside(cand / scale, (cand + 1) / scale)
    return _frozen(lex_sort(cand[keep]))


@lru_cache(maxsize=256)
def meeting_cells(D: Domain, k: int) -> np.ndarray:
    """Shifts whose (open) cell meets D."""
    lo, hi = D.bbox
    scale = 2.0**k
    cand = _index_grid(np.floor(lo * scale).astype(np.int64) - 1, np.ceil(hi * scale).astype(np.int64))
    keep = D.boxes_meet(cand / scale, (cand + 1) / scale)
    return _frozen(lex_sort(cand[keep]))


@lru_cache(maxsize=64)
def _interior_tree(D: Domain, k: int):
    cells = interior_cells(D, k)
    if cells.shape[0] == 0:
        raise NoInteriorCellsError(f"no closed level-{k} cell lies inside the domain")
    return cells, cKDTree(cells.astype(float))


def nearest_interior(D: Domain, k: int, nu) -> np.ndarray:
    """``nu_k^D(nu)``: an l-infinity nearest interior cell, lexicographically smallest on ties.

    Accepts one shift (shape (d,)) or many (shape (n, d)).
    """
    cells, tree = _interior_tree(D, k)
    q = np.asarray(nu, dtype=np.int64)
    single = q.ndim == 1
    q = np.atleast_2d(q)
    dist, _ = tree.query(q.astype(float), p=np.inf)
    out = np.empty_like(q)
    # distances are integers, so a half-unit margin captures exactly the tied shell
    groups = tree.query_ball_point(q.astype(float), r=dist + 0.5, p=np.inf)
    for i, idx in enumerate(groups):
        cand = cells[np.sort(np.asarray(idx, dtype=np.int64))]
        dd = np.max(np.abs(cand - q[i]), axis=1)
        best = cand[dd == dd.min()]
        out[i] = best[0]  # cells are lex-sorted, so is any subset taken in index order
    return out[0] if single else out


def color_classes(cells: np.ndarray, m: int) -> dict[tuple[int, ...], np.ndarray]:
    """Split shifts by residue mod ``m + 1``; keys run over ``N_{0,m}^d``."""
    cells = np.atleast_2d(np.asarray(cells, dtype=np.int64))
    d = cells.shape[1]
    res = np.mod(cells, m + 1)
    out = {}
    for sigma in product(range(m + 1), repeat=d):
        sel = np.all(res == np.asarray(sigma), axis=1)
        out[sigma] = _frozen(cells[sel])
    return out


# ---------------------------------------------------------------------------
# cube chains


@dataclass(frozen=True)
class CubeChain:
    """Cells ``nu^0..nu^J`` at ``level`` with unit moves ``(axis, sign)``; axes are 0-based."""

    level: int
    cells: np.ndarray
    moves: tuple[tuple[int, int], ...]

    @property
    def length(self) -> int:
        return len(self.moves)

    def is_unit_walk(self) -> bool:
        if self.cells.shape[0] != len(self.moves) + 1:
            return False
        for i, (axis, sign) in enumerate(self.moves):
            step = np.zeros(self.cells.shape[1], dtype=np.int64)
            step[axis] = sign
            if not np.array_equal(self.cells[i + 1], self.cells[i] + step):
                return False
        return True


def _entry_cell(z: Sequence[Fraction], w: Sequence[Fraction]) -> list[int]:
    """Cell containing ``z`` that the ray ``z + t w`` stays in for some ``t > 0``."""
    n = []
    for zj, wj in zip(z, w):
        if zj.denominator == 1:
            v = zj.numerator
            n.append(v if wj >= 0 else v - 1)
        else:
            n.append(zj.numerator // zj.denominator)
    return n


def _exit_time(z0, w, cell) -> Fraction | None:
    best = None
    for zj, wj, nj in zip(z0, w, cell):
        if wj > 0:
            t = (nj + 1 - zj) / wj
        elif wj < 0:
            t = (nj - zj) / wj
        else:
            continue
        best = t if best is None or t < best else best
    return best


def segment_chain(k: int, x0: Sequence[float], xi: Sequence[float]) -> CubeChain:
    """Unit-step chain of level-k cells following the segment ``x0 + t xi``, t in [0, 1].

    Walks the closed cells met by the segment in order of exit parameter and
    splits each cell transition into single-axis moves.  All arithmetic is
    exact (inputs are converted to rationals).
    """
    d = len(x0)
    if len(xi) != d:
        raise ValueError("x0 and xi must have the same dimension")
    scale = Fraction(2) ** k
    z0 = [Fraction(v) * scale for v in x0]
    w = [Fraction(v) * scale for v in xi]
    cur = _entry_cell(z0, w)
    walk = [cur]
    while True:
        t = _exit_time(z0, w, cur)
        if t is None or t > 1:
            break
        zt = [a + t * b for a, b in zip(z0, w)]
        nxt = _entry_cell(zt, w)
        if max(abs(a - b) for a, b in zip(nxt, cur)) != 1:
            raise AssertionError("consecutive cells sharing a point must be l-inf neighbours")
        walk.append(nxt)
        cur = nxt
    cells = [tuple(walk[0])]
    moves = []
    for a, b in zip(walk, walk[1:]):
        pos = list(a)
        for j in range(d):
            if b[j] != a[j]:
                sign = 1 if b[j] > a[j] else -1
                pos[j] += sign
                moves.append((j, sign))
                cells.append(tuple(pos))
    return CubeChain(k, np.array(cells, dtype=np.int64).reshape(-1, d), tuple(moves))


def _segment_meets_box(z0, w, lo, hi) -> bool:
    """Exact slab test: does ``z0 + t w`` for t in [0, 1] meet the closed box ``[lo, hi]``."""
    t_lo, t_hi = Fraction(0), Fraction(1)
    for zj, wj, a, b in zip(z0, w, lo, hi):
        if wj == 0:
            if zj < a or zj > b:
                return False
            continue
        t1, t2 = (a - zj) / wj, (b - zj) / wj
        if t1 > t2:
            t1, t2 = t2, t1
        t_lo, t_hi = max(t_lo, t1), min(t_hi, t2)
        if t_lo > t_hi:
            return False
    return True


def check_segment_chain(chain: CubeChain, x0: Sequence[float], xi: Sequence[float]) -> list[str]:
    """Exact validation of a segment chain; returns the list of violated properties."""
    problems = []
    scale = Fraction(2) ** chain.level
    z0 = [Fraction(v) * scale for v in x0]
    w = [Fraction(v) * scale for v in xi]
    z1 = [a + b for a, b in zip(z0, w)]
    first, last = chain.cells[0], chain.cells[-1]
    if not all(int(n) <= z <= int(n) + 1 for n, z in zip(first, z0)):
        problems.append("start point not in first cell")
    if not all(int(n) <= z <= int(n) + 1 for n, z in zip(last, z1)):
        problems.append("end point not in last cell")
    if not chain.is_unit_walk():
        problems.append("moves are not unit coordinate steps")
    for nu in chain.cells:
        # cells within l-inf distance 1 of nu cover the closed box [nu - 1, nu + 2]
        if not _segment_meets_box(z0, w, [int(v) - 1 for v in nu], [int(v) + 2 for v in nu]):
            problems.append(f"cell {tuple(int(v) for v in nu)} is farther than 1 from the segment")
            break
    return problems


def _cells_inside(D: Domain, level: int, cells: np.ndarray) -> np.ndarray:
    scale = 2.0**level
    return D.boxes_inside(cells / scale, (cells + 1) / scale)


def _bfs_chain(D: Domain, level: int, starts: np.ndarray, targets: np.ndarray) -> CubeChain | None:
    interior = interior_cells(D, level)
    if interior.shape[0] == 0:
        return None
    d = interior.shape[1]
    lo = interior.min(axis=0)
    shape = interior.max(axis=0) - lo + 1
    mask = np.zeros(tuple(shape), dtype=bool)
    mask[tuple((interior - lo).T)] = True
    target_set = {tuple(int(v) for v in t - lo) for t in targets}
    parent: dict[tuple[int, ...], tuple[int, ...] | None] = {}
    queue = deque()
    for s in starts:
        key = tuple(int(v) for v in s - lo)
        if all(0 <= key[j] < shape[j] for j in range(d)) and mask[key] and key not in parent:
            parent[key] = None
            queue.append(key)
    hit = None
    while queue:
        cur = queue.popleft()
        if cur in target_set:
            hit = cur
            break
        for j in range(d):
            for sign in (1, -1):
                nb = list(cur)
                nb[j] += sign
                nb = tuple(nb)
                if 0 <= nb[j] < shape[j] and nb not in parent and mask[nb]:
                    parent[nb] = cur
                    queue.append(nb)
    if hit is None:
        return None
    path = [hit]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path = np.array(path[::-1], dtype=np.int64) + lo
    moves = []
    for a, b in zip(path, path[1:]):
        j = int(np.flatnonzero(b != a)[0])
        moves.append((j, int(b[j] - a[j])))
    return CubeChain(level, path, tuple(moves))


def _subcells(nu: np.ndarray, kappa: int) -> np.ndarray:
    base = np.asarray(nu, dtype=np.int64) * (2**kappa)
    offs = _index_grid(np.zeros(len(nu), dtype=np.int64), np.full(len(nu), 2**kappa - 1))
    return base + offs


def interior_chain(
    D: Domain,
    k: int,
    nu: Sequence[int],
    nu2: Sequence[int],
    kappa: int = 0,
    kappa_max: int = 3,
) -> CubeChain:
    """Chain of level-``(k + kappa')`` cells inside D joining cells ``nu`` and ``nu2`` of level k.

    Tries the straight walk between the two cell centres first and falls back
    to a breadth-first search over interior cells; ``kappa'`` is raised from
    ``kappa`` to ``kappa_max`` until one of them succeeds.
    """
    nu = np.asarray(nu, dtype=np.int64)
    nu2 = np.asarray(nu2, dtype=np.int64)
    scale = 2.0**k
    if not (D.boxes_inside(nu / scale, (nu + 1) / scale)[0] and D.boxes_inside(nu2 / scale, (nu2 + 1) / scale)[0]):
        raise ValueError("both end cells must be interior cells of D")
    for kap in range(kappa, kappa_max + 1):
        level = k + kap
        c0 = (nu + 0.5) / scale
        c1 = (nu2 + 0.5) / scale
        chain = segment_chain(level, c0, c1 - c0)
        if np.all(_cells_inside(D, level, chain.cells)):
            return chain
        chain = _bfs_chain(D, level, _subcells(nu, kap), _subcells(nu2, kap))
        if chain is not None:
            return chain
    raise ChainNotFoundError(f"no interior chain between {tuple(nu)} and {tuple(nu2)} at level {k} up to kappa={kappa_max}")


def chain_endpoints_ok(chain: CubeChain, k: int, nu, nu2) -> bool:
    kap = chain.level - k
    first = chain.cells[0] >> kap if kap else chain.cells[0]
    last = chain.cells[-1] >> kap if kap else chain.cells[-1]
    return bool(np.array_equal(first, nu) and np.array_equal(last, nu2))


# ---------------------------------------------------------------------------
# e-type probe


@dataclass
class ETypeReport:
    domain: dict
    levels: list[int]
    K0: int | None
    Gamma0: float
    c0: float
    kappa0: int
    failures: list[dict] = field(default_factory=list)
    per_level: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.K0 is not None

    def as_dict(self) -> dict:
        return {
            "domain": self.domain,
            "levels": self.levels,
            "K0": self.K0,
            "Gamma0": self.Gamma0,
            "c0": self.c0,
            "kappa0": self.kappa0,
            "failures": self.failures,
            "per_level": self.per_level,
        }


def gamma_needed(D: Domain, k: int) -> float:
    """Smallest Gamma with an interior cell inside ``2^-k nu + Gamma 2^-k B`` for every meeting cell."""
    cells, tree = _interior_tree(D, k)
    meet = meeting_cells(D, k)
    dist, _ = tree.query(meet - 0.5, p=np.inf)
    return float(dist.max() + 0.5)


def etype_probe(
    D: Domain,
    k_range: Sequence[int],
    kappa_max: int = 3,
    pairs: int = 20,
    seed: int = 0,
) -> ETypeReport:
    """Empirical check of both e-type conditions over the given levels."""
    rng = np.random.default_rng(seed)
    levels = sorted(int(k) for k in k_range)
    gamma, c0, kappa0 = 0.0, 0.0, 0
    failures = []
    per_level = []
    good = {}
    for k in levels:
        inner = interior_cells(D, k)
        if inner.shape[0] == 0:
            good[k] = False
            per_level.append({"k": k, "interior": 0, "admissible": False})
            continue
        g = gamma_needed(D, k)
        level_c0 = 0.0
        level_ok = True
        n = inner.shape[0]
        for _ in range(pairs):
            i, j = rng.integers(0, n, size=2)
            a, b = inner[i], inner[j]
            dist = int(np.max(np.abs(a - b)))
            try:
                chain = interior_chain(D, k, a, b, 0, kappa_max)
            except ChainNotFoundError:
                failures.append({"k": k, "nu": a.tolist(), "nu2": b.tolist()})
                level_ok = False
                level_c0 = float("inf")
                continue
            kappa0 = max(kappa0, chain.level - k)
            if dist > 0:
                level_c0 = max(level_c0, chain.length / dist)
        gamma = max(gamma, g)
        c0 = max(c0, level_c0)
        good[k] = level_ok
        per_level.append({"k": k, "interior": int(n), "admissible": True, "Gamma": g, "c0": level_c0})
    K0 = None
    for k in reversed(levels):
        if not good[k]:
            break
        K0 = k
    return ETypeReport(D.describe(), levels, K0, gamma, c0, kappa0, failures, per_level)
