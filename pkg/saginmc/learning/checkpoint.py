"""
On-disk checkpoints for trained networks.

A checkpoint is a directory holding `metadata.json` plus one `<name>.mlp`
text file per network. Each network file starts with a header line, the
format version, the head and the layer sizes, followed by every parameter
in `parameters()` order written with 17 significant digits so reloads are
exact.
"""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from saginmc import __version__
from saginmc.errors import CheckpointError
from saginmc.learning.baselines import ArgmaxPolicy, PolicyKind
from saginmc.learning.nn import Head, Mlp

logger = logging.getLogger(__name__)

MLP_HEADER = "saginmc-mlp"
MLP_FORMAT_VERSION = 1
METADATA_FILE = "metadata.json"

# network used for greedy evaluation of each learning policy
EVALUATION_NETWORK = {
    PolicyKind.PROPOSED: "actor",
    PolicyKind.DQN: "q",
    PolicyKind.PPO: "actor",
}


def save_mlp(net: Mlp, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        MLP_HEADER,
        str(MLP_FORMAT_VERSION),
        net.head.value,
        " ".join(str(size) for size in net.layer_sizes),
    ]
    lines.extend("%.17g" % value for value in net.get_flat())
    path.write_text("\n".join(lines) + "\n")
    return path


def load_mlp(path: Union[str, Path]) -> Mlp:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise CheckpointError(f"Cannot read network file {path}: {e}")

    if len(lines) < 4 or lines[0] != MLP_HEADER:
        raise CheckpointError(f"{path} is not a network file")
    if lines[1] != str(MLP_FORMAT_VERSION):
        raise CheckpointError(f"{path} has format version {lines[1]}, expected {MLP_FORMAT_VERSION}")
    try:
        head = Head(lines[2])
        sizes = [int(token) for token in lines[3].split()]
        values = np.array([float(line) for line in lines[4:]], dtype=np.float64)
        net = Mlp(sizes, head=head, seed=0)
        net.set_flat(values)
    except ValueError as e:
        raise CheckpointError(f"Malformed network file {path}: {e}")
    return net


def save_checkpoint(
    directory: Union[str, Path],
    policy_kind: PolicyKind,
    networks: Mapping[str, Mlp],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write every network plus metadata.json into `directory`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    policy_kind = PolicyKind(policy_kind)

    for name, net in networks.items():
        save_mlp(net, directory / f"{name}.mlp")

    record = {
        "policy": policy_kind.value,
        "networks": sorted(networks),
        "saginmc_version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        **(metadata or {}),
    }
    with open(directory / METADATA_FILE, "w") as f:
        json.dump(record, f, indent=2)
    logger.info(f"Saved {policy_kind.value} checkpoint with {len(networks)} networks to {directory}")
    return directory


def load_checkpoint(directory: Union[str, Path]) -> Tuple[Dict[str, Any], Dict[str, Mlp]]:
    """Read back metadata and networks written by `save_checkpoint`."""
    directory = Path(directory)
    metadata_file = directory / METADATA_FILE
    if not metadata_file.exists():
        raise CheckpointError(f"No {METADATA_FILE} in {directory}")

    try:
        with open(metadata_file, "r") as f:
            metadata = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Failed to read checkpoint metadata in {directory}: {e}")

    if "policy" not in metadata or "networks" not in metadata:
        raise CheckpointError(f"Checkpoint metadata in {directory} lacks 'policy' or 'networks'")

    networks = {name: load_mlp(directory / f"{name}.mlp") for name in metadata["networks"]}
    logger.info(f"Loaded {metadata['policy']} checkpoint from {directory}")
    return metadata, networks


def policy_from_checkpoint(directory: Union[str, Path]) -> Tuple[PolicyKind, ArgmaxPolicy]:
    """Greedy evaluation policy for a saved learner."""
    metadata, networks = load_checkpoint(directory)
    try:
        kind = PolicyKind(metadata["policy"])
        name = EVALUATION_NETWORK[kind]
    except (ValueError, KeyError):
        raise CheckpointError(f"Checkpoint in {directory} holds no evaluable policy ('{metadata['policy']}')")
    if name not in networks:
        raise CheckpointError(f"Checkpoint in {directory} is missing its '{name}' network")
    return kind, ArgmaxPolicy(networks[name])
