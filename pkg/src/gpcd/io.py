"""File formats: community trees, binary trees, partitions, ground truth and needs."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .evaluation import GroundTruth
from .genetic import Partition
from .hierarchy import CommunityTree
from .representation import UserNeed
from .tree import BinaryCommunityTree, BinaryNode, assign_codes


class TreeFormatError(ValueError):
    """Raised when a tree file cannot be parsed or fails validation."""


def community_tree_to_json(tc: CommunityTree, names: Sequence[str]) -> dict:
    def build(i: int) -> dict:
        nd = tc.nodes[i]
        return {"vertices": [names[v] for v in nd.vertices], "children": [build(c) for c in nd.children]}
    return build(tc.root)


def community_tree_from_json(data: dict, names: Sequence[str]) -> CommunityTree:
    """Parse nested ``{vertices, children}`` objects; vertex entries are names."""
    index = {name: i for i, name in enumerate(names)}

    def ids(node) -> list[int]:
        try:
            return [index[str(v)] for v in node["vertices"]]
        except KeyError as exc:
            raise TreeFormatError(f"unknown vertex or missing key {exc.args[0]!r} in tree") from None

    tree = CommunityTree.single(ids(data))
    stack = [(data, tree.root)]
    while stack:
        node, idx = stack.pop()
        for child in node.get("children", []):
            stack.append((child, tree.add_child(idx, ids(child))))
    try:
        tree.validate()
    except ValueError as exc:
        raise TreeFormatError(str(exc)) from None
    if set(tree.nodes[tree.root].vertices) != set(range(len(names))):
        raise TreeFormatError("tree root must contain every graph vertex")
    return tree


def save_community_tree(path: str | Path, tc: CommunityTree, names: Sequence[str]) -> None:
    Path(path).write_text(json.dumps(community_tree_to_json(tc, names)) + "\n", encoding="utf-8")


def load_community_tree(path: str | Path, names: Sequence[str]) -> CommunityTree:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"{path}: {exc}") from None
    return community_tree_from_json(data, names)


def binary_tree_to_json(tb: BinaryCommunityTree, with_embeddings: bool = True) -> dict:
    nodes = []
    for nd in tb.nodes:
        entry = {"code": nd.code, "vertices": nd.vertices.tolist(), "left": nd.left, "right": nd.right}
        if with_embeddings and nd.embedding is not None:
            entry["embedding"] = [float(x) for x in nd.embedding]
        nodes.append(entry)
    return {"vertex_names": list(tb.vertex_names), "depth_bound": tb.depth_bound, "nodes": nodes}


def binary_tree_from_json(data: dict) -> BinaryCommunityTree:
    try:
        names = [str(x) for x in data["vertex_names"]]
        nodes = []
        for entry in data["nodes"]:
            emb = entry.get("embedding")
            nodes.append(BinaryNode(np.array(sorted(entry["vertices"]), dtype=int), entry["left"], entry["right"],
                                    code=entry["code"],
                                    embedding=None if emb is None else np.array(emb, dtype=float)))
        depth_bound = int(data.get("depth_bound", 10))
    except (KeyError, TypeError, ValueError) as exc:
        raise TreeFormatError(f"malformed binary tree: {exc}") from None
    for i, nd in enumerate(nodes):
        for child in (nd.left, nd.right):
            if child is not None:
                if not 0 <= child < len(nodes):
                    raise TreeFormatError(f"node {i} points at missing child {child}")
                nodes[child].parent = i
    roots = [i for i, nd in enumerate(nodes) if nd.parent is None]
    if len(roots) != 1:
        raise TreeFormatError("binary tree must have exactly one root")
    tb = BinaryCommunityTree(nodes, roots[0], len(names), depth_bound, names)
    if roots[0] != 0:
        tb = assign_codes(tb)
    try:
        tb.validate()
    except ValueError as exc:
        raise TreeFormatError(str(exc)) from None
    return tb


def save_binary_tree(path: str | Path, tb: BinaryCommunityTree) -> None:
    Path(path).write_text(json.dumps(binary_tree_to_json(tb)) + "\n", encoding="utf-8")


def load_binary_tree(path: str | Path) -> BinaryCommunityTree:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"{path}: {exc}") from None
    return binary_tree_from_json(data)


def save_partition(path: str | Path, partition: Partition, names: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name, label in zip(names, partition.labels):
            fh.write(f"{name}\t{label}\n")


def load_partition(path: str | Path) -> dict[str, str]:
    """Read ``vertex<TAB>community`` lines into a name -> label map."""
    labels: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'vertex<TAB>community'")
            labels[fields[0]] = fields[1]
    return labels


def save_ground_truth(path: str | Path, gt: GroundTruth, names: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for comm in gt.communities:
            fh.write(" ".join(names[v] for v in comm) + "\n")


def load_ground_truth(path: str | Path) -> list[list[str]]:
    """One community per line, whitespace-separated vertex names."""
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh if line.strip() and not line.startswith("#")]


def save_need(path: str | Path, need: UserNeed, names: Sequence[str]) -> None:
    data = {"vertices": {names[v]: w for v, w in need.vertex_weights}, "vector": [float(x) for x in need.vector]}
    if need.text is not None:
        data["text"] = need.text
    Path(path).write_text(json.dumps(data) + "\n", encoding="utf-8")
