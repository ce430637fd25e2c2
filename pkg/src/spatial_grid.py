"""
Uniform grid for close-pair search in the 2-D social space.

Points are hashed into square cells of side ``cell_size``; a pair within
``cell_size`` of each other always sits in the same or an adjacent cell.
Scanning each cell against itself and four of its eight neighbours visits
every adjacent cell pair exactly once.
"""

from collections import defaultdict
from typing import Dict, List, Tuple

import numpy as np

# Half of the 3x3 neighbourhood (plus the cell itself)
_HALF_NEIGHBOURHOOD = ((0, 0), (1, -1), (1, 0), (1, 1), (0, 1))


class SpatialGrid:
    """
    Grid of point indices for near-linear close-pair enumeration

    Args:
        points: (n, 2) array of coordinates
        cell_size: Side of each square cell, normally the search radius
    """

    def __init__(self, points: np.ndarray, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell_size must be > 0")
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        self.cell_size = float(cell_size)

        cells: Dict[Tuple[int, int], List[int]] = defaultdict(list)
        keys = np.floor(self.points / self.cell_size).astype(np.int64)
        for row, (cx, cy) in enumerate(keys.tolist()):
            cells[(cx, cy)].append(row)
        self.cells = {key: np.asarray(rows, dtype=np.int64) for key, rows in cells.items()}

    def close_pairs(self, radius: float) -> np.ndarray:
        """Row-index pairs (a < b) whose distance is <= radius (radius <= cell_size)"""
        if radius > self.cell_size:
            raise ValueError("radius may not exceed the grid cell size")
        r2 = radius * radius
        found_a, found_b = [], []

        for (cx, cy), rows in self.cells.items():
            for dx, dy in _HALF_NEIGHBOURHOOD:
                other = self.cells.get((cx + dx, cy + dy))
                if other is None:
                    continue
                if dx == 0 and dy == 0:
                    if len(rows) < 2:
                        continue
                    ia, ib = np.triu_indices(len(rows), k=1)
                    a, b = rows[ia], rows[ib]
                else:
                    a = np.repeat(rows, len(other))
                    b = np.tile(other, len(rows))
                diff = self.points[a] - self.points[b]
                keep = np.einsum("ij,ij->i", diff, diff) <= r2
                if keep.any():
                    found_a.append(a[keep])
                    found_b.append(b[keep])

        if not found_a:
            return np.zeros((0, 2), dtype=np.int64)
        a = np.concatenate(found_a)
        b = np.concatenate(found_b)
        return np.column_stack([np.minimum(a, b), np.maximum(a, b)])


def brute_force_pairs(points: np.ndarray, radius: float) -> np.ndarray:
    """All-pairs O(n^2) reference for the grid search"""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(points)
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    ia, ib = np.triu_indices(n, k=1)
    diff = points[ia] - points[ib]
    keep = np.einsum("ij,ij->i", diff, diff) <= radius * radius
    return np.column_stack([ia[keep], ib[keep]]).astype(np.int64)
