from __future__ import annotations

from dataclasses import dataclass
import hashlib
import json
import logging
import os
from pathlib import Path
import struct
from typing import Any
import numpy as np

from npi_workbench import constants
from npi_workbench.errors import CheckpointError, ConfigurationError
from npi_workbench.model.config import ModelConfig
from npi_workbench.model.core import NpiModel
from npi_workbench.nn.adam import AdamState
from npi_workbench.nn.params import ParamStore
from npi_workbench.programs import ProgramSpec

"""Binary checkpoint container.

    magic "NPIW-CKPT" | version (uint32 BE) | header length (uint64 BE) | JSON header | payload

The header (sorted keys, compact separators) records the model kind and
config, a table of blocks with shape and byte offset, the optimizer schedule
and the SHA-256 of the payload; NPI checkpoints add the program registry. The
payload is every parameter block followed by the ADAM moments, as
little-endian float64 in table order. The same model and optimizer always
serialize to the same bytes.
"""

logger = logging.getLogger(__name__)

MAGIC = b"NPIW-CKPT"
NPI_KIND = "npi"
_PREFIX = struct.Struct(">IQ")
_FLOAT = np.dtype("<f8")


@dataclass
class Checkpoint:
    model: NpiModel
    optimizer: AdamState | None = None


@dataclass
class Container:
    """A decoded, verified checkpoint before any model is built from it."""
    header: dict[str, Any]
    params: ParamStore
    optimizer: AdamState | None


def _sections(params: ParamStore, optimizer: AdamState | None) -> list[tuple[str, ParamStore]]:
    sections = [("params", params)]
    if optimizer is not None:
        optimizer.match_shapes(params)
        sections += [("adam.m", optimizer.m), ("adam.v", optimizer.v)]
    return sections


def _schedule(optimizer: AdamState | None) -> dict[str, Any] | None:
    if optimizer is None:
        return None
    return {
        "step": optimizer.step,
        "learning_rate": optimizer.learning_rate,
        "decay": optimizer.decay,
        "decay_interval": optimizer.decay_interval,
        "beta1": optimizer.beta1,
        "beta2": optimizer.beta2,
        "epsilon": optimizer.epsilon,
    }


def container_bytes(meta: dict[str, Any], params: ParamStore, optimizer: AdamState | None = None) -> bytes:
    """Serialize parameter blocks and ADAM moments under a JSON header extended with `meta`."""
    table: list[dict[str, Any]] = []
    chunks: list[bytes] = []
    offset = 0
    for section, store in _sections(params, optimizer):
        for name, value in store.items():
            data = value.astype(_FLOAT).tobytes()
            table.append({"section": section, "name": name, "shape": list(value.shape), "offset": offset})
            chunks.append(data)
            offset += len(data)
    payload = b"".join(chunks)

    header = dict(meta)
    header.update({
        "blocks": table,
        "optimizer": _schedule(optimizer),
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    })
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + _PREFIX.pack(constants.CHECKPOINT_VERSION, len(header_bytes)) + header_bytes + payload


def write_atomically(path: str | Path, blob: bytes) -> None:
    """An interrupted write leaves the previous file in place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


def _parse_header(blob: bytes, source: str) -> tuple[dict[str, Any], bytes]:
    if not blob.startswith(MAGIC):
        raise CheckpointError(f"{source}: not a checkpoint (bad magic)")
    start = len(MAGIC)
    if len(blob) < start + _PREFIX.size:
        raise CheckpointError(f"{source}: truncated before header")
    version, header_length = _PREFIX.unpack_from(blob, start)
    if version != constants.CHECKPOINT_VERSION:
        raise CheckpointError(f"{source}: checkpoint version {version}, "
                              f"this build reads version {constants.CHECKPOINT_VERSION}")
    header_start = start + _PREFIX.size
    if len(blob) < header_start + header_length:
        raise CheckpointError(f"{source}: truncated header")
    try:
        header = json.loads(blob[header_start:header_start + header_length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{source}: corrupt header: {e}") from None
    if not isinstance(header, dict):
        raise CheckpointError(f"{source}: corrupt header")
    payload = blob[header_start + header_length:]
    if hashlib.sha256(payload).hexdigest() != header.get("payload_sha256"):
        raise CheckpointError(f"{source}: payload checksum mismatch (truncated or corrupt)")
    return header, payload


def decode_container(blob: bytes, kind: str, source: str = "<bytes>") -> Container:
    header, payload = _parse_header(blob, source)
    if header.get("kind") != kind:
        raise CheckpointError(f"{source}: holds a {header.get('kind')!r} model, expected {kind!r}")
    try:
        stores: dict[str, ParamStore] = {"params": ParamStore(), "adam.m": ParamStore(), "adam.v": ParamStore()}
        for entry in header["blocks"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            if entry["offset"] + count * _FLOAT.itemsize > len(payload):
                raise CheckpointError(f"{source}: block {entry['name']} runs past the payload")
            value = np.frombuffer(payload, dtype=_FLOAT, count=count, offset=entry["offset"])
            stores[entry["section"]][entry["name"]] = value.reshape(shape).astype(np.float64)
        optimizer = None
        schedule = header["optimizer"]
        if schedule is not None:
            optimizer = AdamState(stores["adam.m"], stores["adam.v"], schedule["step"], schedule["learning_rate"],
                                  schedule["decay"], schedule["decay_interval"], schedule["beta1"],
                                  schedule["beta2"], schedule["epsilon"])
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"{source}: inconsistent checkpoint: {e}") from None
    return Container(header, stores["params"], optimizer)


def read_file(path: str | Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from None


def checkpoint_bytes(model: NpiModel, optimizer: AdamState | None = None) -> bytes:
    meta = {
        "kind": NPI_KIND,
        "config": model.config.to_dict(),
        "registry": [[spec.env, spec.name] for spec in model.memory.registry],
    }
    return container_bytes(meta, model.params, optimizer)


def save_checkpoint(model: NpiModel, path: str | Path, optimizer: AdamState | None = None) -> None:
    write_atomically(path, checkpoint_bytes(model, optimizer))
    logger.debug("Saved checkpoint %s", path)


def checkpoint_from_bytes(blob: bytes, source: str = "<bytes>") -> Checkpoint:
    """Everything is verified before a model is constructed; a bad file never yields a partial model."""
    container = decode_container(blob, NPI_KIND, source)
    try:
        config = ModelConfig.from_dict(container.header["config"])
        registry = [ProgramSpec(env, name) for env, name in container.header["registry"]]
        model = NpiModel(config, container.params, registry)
    except (KeyError, TypeError, ValueError, ConfigurationError) as e:
        raise CheckpointError(f"{source}: inconsistent checkpoint: {e}") from None
    return Checkpoint(model, container.optimizer)


def load_checkpoint(path: str | Path) -> Checkpoint:
    checkpoint = checkpoint_from_bytes(read_file(path), str(path))
    logger.debug("Loaded checkpoint %s (%d programs)", path, len(checkpoint.model.memory))
    return checkpoint
