"""Standalone writer for the DCW1 weight container.

Layout (little-endian): magic "DCW1", uint32 manifest length, JSON manifest
{"format_version": 1, "model_config": {...}, "tensors": {name: {dtype, shape,
offset, nbytes, crc32}}}, then contiguous float32 payload. Written here from
the documented byte layout, independently of the engine's own reader.
"""

import hashlib
import json
import zlib

import numpy as np

MAGIC = b"DCW1"
FORMAT_VERSION = 1

NUM_BLOCKS = 6


def config_hash(config):
    """Stable identity of a model config dict, shared with golden sets."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def write_dcw(path, config, tensors):
    """tensors: {canonical_name: float32 ndarray}."""
    names = sorted(tensors)
    table = {}
    chunks = []
    offset = 0
    for name in names:
        arr = np.ascontiguousarray(np.asarray(tensors[name], dtype="<f4"))
        raw = arr.tobytes()
        table[name] = {
            "dtype": "float32",
            "shape": list(arr.shape),
            "offset": offset,
            "nbytes": len(raw),
            "crc32": zlib.crc32(raw),
        }
        chunks.append(raw)
        offset += len(raw)
    manifest = {
        "format_version": FORMAT_VERSION,
        "model_config": config,
        "tensors": table,
    }
    blob = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(blob).to_bytes(4, "little"))
        fh.write(blob)
        for raw in chunks:
            fh.write(raw)


def read_dcw_config(path):
    """Just the embedded model config of a DCW1 file (for hash pairing)."""
    with open(path, "rb") as fh:
        head = fh.read(8)
        if head[:4] != MAGIC:
            raise ValueError(f"{path}: not a DCW1 weight file")
        mlen = int.from_bytes(head[4:8], "little")
        manifest = json.loads(fh.read(mlen).decode("utf-8"))
    return manifest["model_config"]


def expected_canonical_names(config):
    """Canonical tensor paths required by a config, per the documented naming
    grammar (encoder.<i>.conv.<part>.<t>, lstm.<j>.<part>.<t>, ...)."""
    names = []

    def bn_prelu(prefix):
        for part in ("real", "imag"):
            for t in ("gamma", "beta", "running_mean", "running_var"):
                names.append(f"{prefix}.bn.{part}.{t}")
            names.append(f"{prefix}.prelu.{part}.slope")

    for i in range(NUM_BLOCKS):
        for part in ("real", "imag"):
            names.append(f"encoder.{i}.conv.{part}.weight")
            names.append(f"encoder.{i}.conv.{part}.bias")
        bn_prelu(f"encoder.{i}")
    for j in range(int(config["lstm_layers"])):
        for part in ("real", "imag"):
            for t in ("weight_ih", "weight_hh", "bias_ih", "bias_hh"):
                names.append(f"lstm.{j}.{part}.{t}")
    for part in ("real", "imag"):
        names.append(f"dense.{part}.weight")
        names.append(f"dense.{part}.bias")
    for i in range(NUM_BLOCKS):
        for part in ("real", "imag"):
            names.append(f"decoder.{i}.deconv.{part}.weight")
            names.append(f"decoder.{i}.deconv.{part}.bias")
        if i < NUM_BLOCKS - 1:
            bn_prelu(f"decoder.{i}")
    if config.get("pathways"):
        for i in range(NUM_BLOCKS):
            for part in ("real", "imag"):
                names.append(f"pathway.{i}.conv.{part}.weight")
                names.append(f"pathway.{i}.conv.{part}.bias")
    if config["head"] == "signal":
        for part in ("real", "imag"):
            names.append(f"head.linear.{part}.weight")
            names.append(f"head.linear.{part}.bias")
    return names
