"""Versioned binary checkpoints bundling parameters, config, and vocabularies.

Layout, all little-endian:

    bytes 0..3   magic ``WSFT``
    uint32       format version (currently 1)
    uint32       header length in bytes
    header       UTF-8 JSON: format tag, config dict, the three
                 vocabularies as token lists, and a tensor manifest of
                 (name, shape) in storage order
    payload      each tensor's float64 data, concatenated in manifest
                 order

The header JSON is serialized with sorted keys and no timestamps, so
saving identical state twice produces byte-identical files.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from warnsift.config import ModelConfig
from warnsift.encoding import Vocabulary

MAGIC = b"WSFT"
VERSION = 1
_FORMAT_TAG = "warnsift-checkpoint"


class CheckpointError(Exception):
    """Raised for malformed, truncated, or unsupported checkpoint files."""


@dataclass
class Checkpoint:
    params: dict
    config: ModelConfig
    vocab: Vocabulary
    rule_vocab: Vocabulary
    category_vocab: Vocabulary


def _tokens(vocab: Vocabulary) -> list[str]:
    return [vocab.token_of(i) for i in range(len(vocab))]


def save_checkpoint(
    path,
    params: dict,
    config: ModelConfig,
    vocab: Vocabulary,
    rule_vocab: Vocabulary,
    category_vocab: Vocabulary,
) -> None:
    manifest = [
        {"name": name, "shape": list(params[name].shape)} for name in sorted(params)
    ]
    header = {
        "format": _FORMAT_TAG,
        "config": config.to_dict(),
        "vocab": _tokens(vocab),
        "rule_vocab": _tokens(rule_vocab),
        "category_vocab": _tokens(category_vocab),
        "tensors": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for entry in manifest:
            tensor = np.ascontiguousarray(params[entry["name"]], dtype="<f8")
            fh.write(tensor.tobytes())


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != MAGIC:
        raise CheckpointError("not a checkpoint file")
    version, header_len = struct.unpack("<II", data[4:12])
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if len(data) < 12 + header_len:
        raise CheckpointError("truncated header")
    try:
        header = json.loads(data[12 : 12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"malformed header: {exc}") from None
    if header.get("format") != _FORMAT_TAG:
        raise CheckpointError("unrecognized format tag")

    offset = 12 + header_len
    params: dict = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(data):
            raise CheckpointError(f"truncated tensor data for {entry['name']!r}")
        flat = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        params[entry["name"]] = flat.reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(data):
        raise CheckpointError("trailing bytes after tensor data")

    try:
        config = ModelConfig.from_dict(header["config"])
        vocab = Vocabulary(header["vocab"])
        rule_vocab = Vocabulary(header["rule_vocab"])
        category_vocab = Vocabulary(header["category_vocab"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"invalid header contents: {exc}") from None
    return Checkpoint(
        params=params,
        config=config,
        vocab=vocab,
        rule_vocab=rule_vocab,
        category_vocab=category_vocab,
    )


__all__ = ["Checkpoint", "CheckpointError", "load_checkpoint", "save_checkpoint"]
