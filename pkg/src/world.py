"""
Population and link store shared by every model layer

The world is a networkx graph whose nodes carry group, sex, position and
birth step, and whose edges carry formation and expiry steps. One world is
owned by one replicate; nothing in it is shared between threads.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from .social_space import GroupState, NodePosition, Point

logger = logging.getLogger(__name__)

SEXES = ("F", "M")
LINK_KEY_SHIFT = 1 << 32


class ContractViolation(RuntimeError):
    """A module pre/post-condition or world invariant was broken"""


@dataclass
class NodeLifeRecord:
    id: int
    born_at: int
    removed_at: Optional[int] = None
    removal_cause: Optional[str] = None


RemovalHook = Callable[[int, int], None]


def link_key(i: int, j: int) -> int:
    a, b = (i, j) if i < j else (j, i)
    return a * LINK_KEY_SHIFT + b


class World:
    """Nodes, groups and undirected links of one replicate"""

    def __init__(self, groups: List[GroupState], region_side: float = 1.0, strict: bool = False):
        self.step = 0
        self.region_side = float(region_side)
        self.groups: List[GroupState] = list(groups)
        self.graph = nx.Graph()
        self.life_records: Dict[int, NodeLifeRecord] = {}
        self.next_id = 0
        self.strict = strict
        self._removal_hooks: List[RemovalHook] = []

    # Nodes

    def add_node(self, group: int, sex: str, position: Point, born_at: Optional[int] = None) -> int:
        if sex not in SEXES:
            raise ValueError(f"Unknown sex label: {sex}")
        node_id = self.next_id
        self.next_id += 1
        born = self.step if born_at is None else born_at
        self.graph.add_node(node_id, group=int(group), sex=sex,
                            pos=(float(position[0]), float(position[1])), born_at=int(born))
        self.life_records[node_id] = NodeLifeRecord(id=node_id, born_at=int(born))
        return node_id

    def prune_life_records(self) -> int:
        """Drop closed life records (removed nodes); returns how many were dropped"""
        closed = [i for i, r in self.life_records.items() if r.removed_at is not None]
        for i in closed:
            del self.life_records[i]
        return len(closed)

    def has_node(self, node_id: int) -> bool:
        return self.graph.has_node(node_id)

    def node_ids(self) -> List[int]:
        return sorted(self.graph.nodes)

    @property
    def size(self) -> int:
        return self.graph.number_of_nodes()

    def sex(self, node_id: int) -> str:
        return self.graph.nodes[node_id]["sex"]

    def group(self, node_id: int) -> int:
        return self.graph.nodes[node_id]["group"]

    def position(self, node_id: int) -> Point:
        return self.graph.nodes[node_id]["pos"]

    def node_positions(self) -> List[NodePosition]:
        nodes = self.graph.nodes
        return [NodePosition(id=i, position=nodes[i]["pos"], group=nodes[i]["group"]) for i in self.node_ids()]

    def set_positions(self, positions: List[NodePosition]):
        nodes = self.graph.nodes
        for p in positions:
            nodes[p.id]["pos"] = p.position

    def positions_array(self, ids: List[int]) -> np.ndarray:
        nodes = self.graph.nodes
        if not ids:
            return np.zeros((0, 2))
        return np.array([nodes[i]["pos"] for i in ids], dtype=float)

    def group_sizes(self) -> Dict[int, int]:
        sizes = {g.id: 0 for g in self.groups}
        for _, group in self.graph.nodes(data="group"):
            sizes[group] = sizes.get(group, 0) + 1
        return sizes

    def detach_node(self, node_id: int) -> List[int]:
        """Delete a node and its links; returns the former neighbors"""
        neighbors = sorted(self.graph.neighbors(node_id))
        self.graph.remove_node(node_id)
        return neighbors

    # Links

    def degree(self, node_id: int) -> int:
        return self.graph.degree(node_id)

    def degrees(self, ids: List[int]) -> np.ndarray:
        return np.fromiter((self.graph.degree(i) for i in ids), dtype=np.int64, count=len(ids))

    def mean_degree(self) -> float:
        n = self.size
        return 2.0 * self.graph.number_of_edges() / n if n else 0.0

    def neighbors(self, node_id: int) -> List[int]:
        return sorted(self.graph.neighbors(node_id))

    def has_link(self, i: int, j: int) -> bool:
        return self.graph.has_edge(i, j)

    def add_link(self, i: int, j: int, formed_at: int, expires_at: int):
        if i == j:
            raise ContractViolation(f"Self-link requested for node {i}")
        if self.graph.has_edge(i, j):
            raise ContractViolation(f"Duplicate link ({i}, {j})")
        if expires_at <= formed_at:
            raise ContractViolation(f"Link ({i}, {j}) expires at {expires_at} <= formed {formed_at}")
        self.graph.add_edge(i, j, formed_at=int(formed_at), expires_at=int(expires_at))

    def remove_link(self, i: int, j: int):
        self.graph.remove_edge(i, j)

    def links(self) -> List[Tuple[int, int]]:
        """Every link once as (low id, high id), sorted"""
        return sorted((i, j) if i < j else (j, i) for i, j in self.graph.edges)

    @property
    def n_links(self) -> int:
        return self.graph.number_of_edges()

    def link_keys(self) -> np.ndarray:
        keys = [link_key(i, j) for i, j in self.graph.edges]
        return np.array(sorted(keys), dtype=np.int64)

    # Removal notification

    def add_removal_hook(self, hook: RemovalHook):
        self._removal_hooks.append(hook)

    def notify_removal(self, node_id: int):
        for hook in self._removal_hooks:
            hook(node_id, self.step)

    def violation(self, message: str):
        """Raise in strict mode, warn otherwise"""
        if self.strict:
            raise ContractViolation(message)
        logger.warning(message)

    # Audit

    def check_invariants(self, check_expiry: bool = True):
        """Per-tick consistency checks; raises ContractViolation on the first failure"""
        side = self.region_side
        for g in self.groups:
            x, y = g.center
            if not (0.0 <= x <= side and 0.0 <= y <= side):
                raise ContractViolation(f"Group {g.id} center {g.center} left the region")
        group_ids = {g.id for g in self.groups}
        for node_id, data in self.graph.nodes(data=True):
            x, y = data["pos"]
            if not (0.0 <= x <= side and 0.0 <= y <= side):
                raise ContractViolation(f"Node {node_id} position {data['pos']} left the region")
            if data["group"] not in group_ids:
                raise ContractViolation(f"Node {node_id} references unknown group {data['group']}")
        for i, j, data in self.graph.edges(data=True):
            if i == j:
                raise ContractViolation(f"Self-link on node {i}")
            if data["expires_at"] <= data["formed_at"]:
                raise ContractViolation(f"Link ({i}, {j}) has non-positive duration")
            if check_expiry and data["expires_at"] <= self.step:
                raise ContractViolation(f"Link ({i}, {j}) outlived its expiry")
        degree_total = sum(d for _, d in self.graph.degree())
        if degree_total != 2 * self.graph.number_of_edges():
            raise ContractViolation("Degree recount does not match link count")

    # Persistence

    def to_dict(self) -> dict:
        nodes = self.graph.nodes
        return {
            "step": self.step,
            "region_side": self.region_side,
            "next_id": self.next_id,
            "groups": [
                {"id": g.id, "center": list(g.center), "target_size": g.target_size} for g in self.groups
            ],
            "nodes": [
                {
                    "id": i,
                    "group": nodes[i]["group"],
                    "sex": nodes[i]["sex"],
                    "pos": list(nodes[i]["pos"]),
                    "born_at": nodes[i]["born_at"],
                }
                for i in self.node_ids()
            ],
            "links": [
                [i, j, self.graph.edges[i, j]["formed_at"], self.graph.edges[i, j]["expires_at"]]
                for i, j in self.links()
            ],
            "life_records": [asdict(r) for _, r in sorted(self.life_records.items())],
        }

    @classmethod
    def from_dict(cls, data: dict, strict: bool = False) -> "World":
        groups = [
            GroupState(id=g["id"], center=(g["center"][0], g["center"][1]), target_size=g["target_size"])
            for g in data["groups"]
        ]
        world = cls(groups, region_side=data["region_side"], strict=strict)
        world.step = data["step"]
        world.next_id = data["next_id"]
        for n in data["nodes"]:
            world.graph.add_node(n["id"], group=n["group"], sex=n["sex"],
                                 pos=(n["pos"][0], n["pos"][1]), born_at=n["born_at"])
        for i, j, formed_at, expires_at in data["links"]:
            world.graph.add_edge(i, j, formed_at=formed_at, expires_at=expires_at)
        world.life_records = {r["id"]: NodeLifeRecord(**r) for r in data["life_records"]}
        return world
