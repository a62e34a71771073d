"""Golden test-vector export (DCG1).

A golden set pairs a converted DCW1 file with activations recorded from the
torch reference on a fixed probe signal. Layout mirrors DCW1: magic "DCG1",
uint32 manifest length, JSON manifest {"format_version": 1, "config_sha256",
"tolerance", "probe": {...}, "tensors": {...}}, float32 payload. Recorded
tensors: "probe" (raw samples) plus every trace entry stacked [real, imag].
"""

import json
import math
import zlib

import numpy as np

from . import dcw
from .reference import ReferenceDccrn, load_checkpoint

MAGIC = b"DCG1"
FORMAT_VERSION = 1
TOLERANCE = 1e-4

PROBE_SEED = 2026
PROBE_SECONDS = 1.0


class GoldenError(ValueError):
    pass


def make_probe(sample_rate, seconds=PROBE_SECONDS, seed=PROBE_SEED):
    """Deterministic probe: seeded noise plus a speech-band chirp."""
    n = int(round(seconds * sample_rate))
    t = np.arange(n) / sample_rate
    f0, f1 = 100.0, 7000.0
    # linear chirp, written out so the probe has no scipy dependency
    phase = 2.0 * math.pi * (f0 * t + 0.5 * (f1 - f0) / seconds * t**2)
    chirp = 0.5 * np.sin(phase)
    rng = np.random.default_rng(seed)
    noise = 0.05 * rng.standard_normal(n)
    return (chirp + noise).astype(np.float64)


def _record(checkpoint_path, probe):
    config, state_dict = load_checkpoint(checkpoint_path)
    model = ReferenceDccrn(config)
    model.load_state_dict(state_dict)
    spectrum = model.stft(probe)
    trace = model.forward_trace(spectrum)
    return config, trace


def export_golden(checkpoint_path, out_path, probe=None):
    """Run the reference twice on the probe; refuse nondeterministic output,
    then write the DCG1 file."""
    config = load_checkpoint(checkpoint_path)[0]
    if probe is None:
        probe = make_probe(int(config["frame"]["sample_rate"]))
    _, trace_a = _record(checkpoint_path, probe)
    _, trace_b = _record(checkpoint_path, probe)
    for name in trace_a:
        if not np.array_equal(trace_a[name], trace_b[name]):
            raise GoldenError(
                f"nondeterministic reference output for {name}; refusing export"
            )
        if not np.all(np.isfinite(trace_a[name])):
            raise GoldenError(f"non-finite values recorded for {name}")

    tensors = {"probe": probe.astype(np.float32), **trace_a}
    names = sorted(tensors)
    table = {}
    chunks = []
    offset = 0
    for name in names:
        raw = np.ascontiguousarray(tensors[name].astype("<f4")).tobytes()
        table[name] = {
            "dtype": "float32",
            "shape": list(tensors[name].shape),
            "offset": offset,
            "nbytes": len(raw),
            "crc32": zlib.crc32(raw),
        }
        chunks.append(raw)
        offset += len(raw)
    manifest = {
        "format_version": FORMAT_VERSION,
        "config_sha256": dcw.config_hash(config),
        "tolerance": TOLERANCE,
        "probe": {
            "seed": PROBE_SEED,
            "seconds": PROBE_SECONDS,
            "sample_rate": int(config["frame"]["sample_rate"]),
            "description": "seeded noise + 100-7000 Hz linear chirp",
        },
        "tensors": table,
    }
    blob = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(out_path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(blob).to_bytes(4, "little"))
        fh.write(blob)
        for raw in chunks:
            fh.write(raw)
    return out_path


def read_golden(path):
    """Returns (manifest dict, {name: float32 ndarray}), checksum-verified."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise GoldenError(f"{path}: not a DCG1 golden file")
    mlen = int.from_bytes(data[4:8], "little")
    manifest = json.loads(data[8 : 8 + mlen].decode("utf-8"))
    if manifest.get("format_version") != FORMAT_VERSION:
        raise GoldenError(f"{path}: unknown format version")
    payload = data[8 + mlen :]
    tensors = {}
    for name, meta in manifest["tensors"].items():
        raw = payload[meta["offset"] : meta["offset"] + meta["nbytes"]]
        if zlib.crc32(raw) != int(meta["crc32"]):
            raise GoldenError(f"{path}: checksum mismatch for {name}")
        tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(meta["shape"])
    return manifest, tensors
