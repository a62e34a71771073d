"""Checkpoint-name mapping and DCW1 conversion.

The "reference" mapping profile covers the torch reference module names
(`encoder.0.conv_r.weight`, `lstm.1.lstm_i.bias_hh_l0`, ...). Every source
tensor must either map to a canonical path or be on the explicit discard list
(batch-norm step counters); anything left over is a hard error, as is a
canonical name the checkpoint fails to provide.
"""

import re

from . import dcw
from .reference import load_checkpoint

_PART = {"r": "real", "i": "imag"}

# (source regex, canonical template); applied in order, first match wins
_REFERENCE_RULES = [
    (re.compile(r"^encoder\.(\d+)\.conv_([ri])\.(weight|bias)$"),
     lambda m: f"encoder.{m[1]}.conv.{_PART[m[2]]}.{m[3]}"),
    (re.compile(r"^encoder\.(\d+)\.bn_([ri])\.(weight|bias|running_mean|running_var)$"),
     lambda m: f"encoder.{m[1]}.bn.{_PART[m[2]]}."
               f"{ {'weight': 'gamma', 'bias': 'beta'}.get(m[3], m[3]) }"),
    (re.compile(r"^encoder\.(\d+)\.act_([ri])\.weight$"),
     lambda m: f"encoder.{m[1]}.prelu.{_PART[m[2]]}.slope"),
    (re.compile(r"^lstm\.(\d+)\.lstm_([ri])\.(weight_ih|weight_hh|bias_ih|bias_hh)_l0$"),
     lambda m: f"lstm.{m[1]}.{_PART[m[2]]}.{m[3]}"),
    (re.compile(r"^dense\.lin_([ri])\.(weight|bias)$"),
     lambda m: f"dense.{_PART[m[1]]}.{m[2]}"),
    (re.compile(r"^decoder\.(\d+)\.deconv_([ri])\.(weight|bias)$"),
     lambda m: f"decoder.{m[1]}.deconv.{_PART[m[2]]}.{m[3]}"),
    (re.compile(r"^decoder\.(\d+)\.bn_([ri])\.(weight|bias|running_mean|running_var)$"),
     lambda m: f"decoder.{m[1]}.bn.{_PART[m[2]]}."
               f"{ {'weight': 'gamma', 'bias': 'beta'}.get(m[3], m[3]) }"),
    (re.compile(r"^decoder\.(\d+)\.act_([ri])\.weight$"),
     lambda m: f"decoder.{m[1]}.prelu.{_PART[m[2]]}.slope"),
    (re.compile(r"^head_linear\.lin_([ri])\.(weight|bias)$"),
     lambda m: f"head.linear.{_PART[m[1]]}.{m[2]}"),
]

_REFERENCE_DISCARD = re.compile(r"\.num_batches_tracked$")

MAPPING_PROFILES = {
    "reference": (_REFERENCE_RULES, _REFERENCE_DISCARD),
}


class ConversionError(ValueError):
    pass


def map_names(state_dict_keys, mapping_profile="reference"):
    """Returns ({source: canonical}, [discarded sources]). Unmapped sources
    raise with the full leftover list."""
    try:
        rules, discard = MAPPING_PROFILES[mapping_profile]
    except KeyError:
        raise ConversionError(f"unknown mapping profile {mapping_profile!r}")
    mapping = {}
    discarded = []
    unmapped = []
    for src in state_dict_keys:
        if discard.search(src):
            discarded.append(src)
            continue
        for pattern, render in rules:
            m = pattern.match(src)
            if m:
                mapping[src] = render(m)
                break
        else:
            unmapped.append(src)
    if unmapped:
        raise ConversionError(
            f"unmapped tensors ({len(unmapped)}): {sorted(unmapped)}"
        )
    return mapping, discarded


def convert_checkpoint(checkpoint_path, out_path, mapping_profile="reference",
                       audit=print):
    """Convert a torch reference checkpoint to a DCW1 file. Prints an audit
    table (source -> canonical -> shape) and refuses any silent drop."""
    config, state_dict = load_checkpoint(checkpoint_path)
    if not state_dict:
        raise ConversionError("no tensors in checkpoint")
    mapping, discarded = map_names(state_dict.keys(), mapping_profile)
    tensors = {}
    widest = max(len(s) for s in mapping) if mapping else 0
    for src in sorted(mapping):
        canon = mapping[src]
        arr = state_dict[src].detach().cpu().numpy()
        if canon in tensors:
            raise ConversionError(f"duplicate canonical path {canon}")
        tensors[canon] = arr
        audit(f"{src:<{widest}}  ->  {canon:<42}  {tuple(arr.shape)}")
    for src in discarded:
        audit(f"{src:<{widest}}  ->  (discarded: bookkeeping buffer)")

    expected = set(dcw.expected_canonical_names(config))
    missing = sorted(expected - set(tensors))
    if missing:
        raise ConversionError(f"checkpoint incomplete, missing: {missing}")
    extra = sorted(set(tensors) - expected)
    if extra:
        raise ConversionError(f"unexpected canonical tensors: {extra}")
    dcw.write_dcw(out_path, config, tensors)
    return out_path
