"""Torch reference implementation of the complex encoder/LSTM/decoder network.

This mirrors the engine's documented semantics so converted checkpoints and
recorded activations can be compared against the numpy implementation:

- complex layers are pairs of real layers combined as (a+bi)(c+di),
- encoder convs stride 2 in frequency, pad the frequency axis symmetrically
  and the time axis on the left only (causal),
- decoder transposed convs upsample frequency; with a time kernel of 2 the
  leading output frame is trimmed (one frame of look-ahead), with 1 they are
  time-pointwise (causal),
- batch norm is split per part and runs on running statistics (eval mode),
- the LSTM follows the four-recurrence construction
  F_r = L_r(x_r) - L_i(x_i), F_i = L_r(x_i) + L_i(x_r),
- the mask head bounds the mask magnitude with tanh and multiplies with the
  (buffered) input spectrum; the signal head applies a trailing complex
  linear layer per frame,
- the Nyquist bin is stripped at the input and re-inserted as zero.
"""

import math

import numpy as np
import torch
from torch import nn

NUM_BLOCKS = 6


def periodic_hann(length):
    n = torch.arange(length, dtype=torch.float64)
    return 0.5 - 0.5 * torch.cos(2.0 * math.pi * n / length)


class ComplexConvBlock(nn.Module):
    def __init__(self, in_ch, out_ch, kernel, stride_f):
        super().__init__()
        kf, kt = kernel
        self.kt = kt
        self.conv_r = nn.Conv2d(in_ch, out_ch, (kf, kt), stride=(stride_f, 1),
                                padding=(kf // 2, 0))
        self.conv_i = nn.Conv2d(in_ch, out_ch, (kf, kt), stride=(stride_f, 1),
                                padding=(kf // 2, 0))
        self.bn_r = nn.BatchNorm2d(out_ch)
        self.bn_i = nn.BatchNorm2d(out_ch)
        self.act_r = nn.PReLU(out_ch)
        self.act_i = nn.PReLU(out_ch)

    def forward(self, xr, xi):
        # causal: pad the time axis on the left only. The real bias belongs to
        # the real part and the imaginary bias to the imaginary part, so the
        # cross terms are computed bias-free.
        xr = nn.functional.pad(xr, (self.kt - 1, 0))
        xi = nn.functional.pad(xi, (self.kt - 1, 0))
        F = nn.functional
        stride = self.conv_r.stride
        pad = self.conv_r.padding
        yr = self.conv_r(xr) - F.conv2d(xi, self.conv_i.weight, None,
                                        stride=stride, padding=pad)
        yi = self.conv_i(xr) + F.conv2d(xi, self.conv_r.weight, None,
                                        stride=stride, padding=pad)
        yr = self.act_r(self.bn_r(yr))
        yi = self.act_i(self.bn_i(yi))
        return yr, yi


class ComplexDeconvBlock(nn.Module):
    def __init__(self, in_ch, out_ch, kernel, stride_f, last):
        super().__init__()
        kf, kt = kernel
        self.kt = kt
        self.deconv_r = nn.ConvTranspose2d(
            in_ch, out_ch, (kf, kt), stride=(stride_f, 1),
            padding=(kf // 2, 0), output_padding=(1, 0))
        self.deconv_i = nn.ConvTranspose2d(
            in_ch, out_ch, (kf, kt), stride=(stride_f, 1),
            padding=(kf // 2, 0), output_padding=(1, 0))
        if not last:
            self.bn_r = nn.BatchNorm2d(out_ch)
            self.bn_i = nn.BatchNorm2d(out_ch)
            self.act_r = nn.PReLU(out_ch)
            self.act_i = nn.PReLU(out_ch)
        self.last = last

    def forward(self, xr, xi):
        F = nn.functional
        kw = dict(stride=self.deconv_r.stride, padding=self.deconv_r.padding,
                  output_padding=self.deconv_r.output_padding)
        yr = self.deconv_r(xr) - F.conv_transpose2d(
            xi, self.deconv_i.weight, None, **kw)
        yi = self.deconv_i(xr) + F.conv_transpose2d(
            xi, self.deconv_r.weight, None, **kw)
        if self.kt == 2:  # drop the leading look-ahead frame
            yr, yi = yr[..., 1:], yi[..., 1:]
        if not self.last:
            yr = self.act_r(self.bn_r(yr))
            yi = self.act_i(self.bn_i(yi))
        return yr, yi


class ComplexLSTMLayer(nn.Module):
    def __init__(self, in_size, hidden):
        super().__init__()
        self.lstm_r = nn.LSTM(in_size, hidden, 1, batch_first=False)
        self.lstm_i = nn.LSTM(in_size, hidden, 1, batch_first=False)

    def forward(self, xr, xi):
        rr, _ = self.lstm_r(xr)
        ri, _ = self.lstm_r(xi)
        ir, _ = self.lstm_i(xr)
        ii, _ = self.lstm_i(xi)
        return rr - ii, ri + ir


class ComplexLinear(nn.Module):
    def __init__(self, in_size, out_size):
        super().__init__()
        self.lin_r = nn.Linear(in_size, out_size)
        self.lin_i = nn.Linear(in_size, out_size)

    def forward(self, xr, xi):
        F = nn.functional
        return (self.lin_r(xr) - F.linear(xi, self.lin_i.weight),
                self.lin_i(xr) + F.linear(xi, self.lin_r.weight))


class ReferenceDccrn(nn.Module):
    """Reference network built from the engine's config JSON dict."""

    def __init__(self, config):
        super().__init__()
        if config.get("pathways"):
            raise ValueError(
                "the reference implementation does not cover pathway variants"
            )
        self.config = dict(config)
        frame = config["frame"]
        self.frame_len = int(frame["frame_len"])
        self.hop = int(frame["hop"])
        if frame.get("window", "hann") != "hann":
            raise ValueError("reference supports the Hann analysis window only")
        self.head = config["head"]
        self.causal = bool(config["causal"])
        channels = [int(c) for c in config["channels"]]
        kf, kt = (int(k) for k in config["kernel"])
        stride = int(config["freq_stride"])
        self.n_freq = self.frame_len // 2
        self.K = (self.frame_len // self.hop
                  if config["prediction"] == "overlapped" else 1)
        dkt = 1 if self.causal else kt

        enc_in = [1] + channels[:-1]
        self.encoder = nn.ModuleList([
            ComplexConvBlock(enc_in[i], channels[i], (kf, kt), stride)
            for i in range(NUM_BLOCKS)
        ])
        bottleneck_freq = self.n_freq // stride**NUM_BLOCKS
        feat = channels[-1] * bottleneck_freq
        hidden = int(config["lstm_hidden"])
        self.lstm = nn.ModuleList()
        in_size = feat
        for _ in range(int(config["lstm_layers"])):
            self.lstm.append(ComplexLSTMLayer(in_size, hidden))
            in_size = hidden
        self.dense = ComplexLinear(hidden, int(config["dense_units"]))
        self.bottleneck_freq = bottleneck_freq
        self.bottleneck_ch = channels[-1]

        dec = []
        prev = channels[-1]
        for i in range(NUM_BLOCKS):
            skip_ch = channels[NUM_BLOCKS - 1 - i]
            out_ch = self.K if i == NUM_BLOCKS - 1 else channels[NUM_BLOCKS - 2 - i]
            dec.append(ComplexDeconvBlock(prev + skip_ch, out_ch, (kf, dkt),
                                          stride, last=i == NUM_BLOCKS - 1))
            prev = out_ch
        self.decoder = nn.ModuleList(dec)
        if self.head == "signal":
            self.head_linear = ComplexLinear(self.n_freq, self.n_freq)

    # -- forward ------------------------------------------------------------

    def stft(self, signal):
        """(n_bins, T) complex spectra of a 1-D signal, periodic Hann."""
        x = torch.as_tensor(signal, dtype=torch.float64)
        W, P = self.frame_len, self.hop
        T = (len(x) - W) // P + 1
        win = periodic_hann(W)
        frames = torch.stack([x[t * P : t * P + W] * win for t in range(T)])
        return torch.fft.rfft(frames, dim=1).T.contiguous()

    def forward_trace(self, spectrum):
        """spectrum: (n_bins, T) complex tensor. Returns a dict of recorded
        activations keyed like the engine's trace: input, encoder.<i>, dense,
        decoder.<i>, output. Values are float32 arrays stacked [real, imag]."""
        self.eval()
        with torch.no_grad():
            spec = spectrum[: self.n_freq].to(torch.complex64)
            xr = spec.real[None, None].to(torch.float32)  # (1, 1, F, T)
            xi = spec.imag[None, None].to(torch.float32)
            trace = {"input": _stack(xr, xi)}
            skips = []
            for i, block in enumerate(self.encoder):
                xr, xi = block(xr, xi)
                skips.append((xr, xi))
                trace[f"encoder.{i}"] = _stack(xr, xi)
            B, C, Fb, T = xr.shape
            seq_r = xr.reshape(C * Fb, T).T[:, None, :]  # (T, 1, feat)
            seq_i = xi.reshape(C * Fb, T).T[:, None, :]
            for layer in self.lstm:
                seq_r, seq_i = layer(seq_r, seq_i)
            den_r, den_i = self.dense(seq_r[:, 0], seq_i[:, 0])  # (T, units)
            xr = den_r.T.reshape(1, C, Fb, T)
            xi = den_i.T.reshape(1, C, Fb, T)
            trace["dense"] = _stack(xr, xi)
            for i, block in enumerate(self.decoder):
                sr, si = skips[NUM_BLOCKS - 1 - i]
                xr = torch.cat([xr, sr], dim=1)
                xi = torch.cat([xi, si], dim=1)
                xr, xi = block(xr, xi)
                trace[f"decoder.{i}"] = _stack(xr, xi)
            out = self._apply_head(xr[0], xi[0], spec)
            trace["output"] = np.stack([out.real, out.imag]).astype(np.float32)
            return trace

    def _apply_head(self, xr, xi, spec):
        """(K, F, T) raw decoder parts + (F, T) input spectrum ->
        (K, n_bins, T) complex numpy frames, Nyquist re-inserted as zero."""
        z = (xr + 1j * xi).numpy().astype(np.complex64)
        K = z.shape[0]
        T = z.shape[2]
        inp = spec.numpy()
        past = np.stack([np.pad(inp, ((0, 0), (k, 0)))[:, :T] for k in range(K)])
        if self.head == "signal":
            out = np.empty_like(z)
            for k in range(K):
                r, i = self.head_linear(
                    torch.from_numpy(z[k].real.T.copy()),
                    torch.from_numpy(z[k].imag.T.copy()))
                out[k] = (r + 1j * i).numpy().T
        else:
            mag = np.abs(z)
            bounded = np.tanh(mag)
            phase = np.where(mag > 0, z / np.where(mag > 0, mag, 1.0), 0.0)
            out = bounded * phase * past
        nyq = np.zeros((K, 1, T), out.dtype)
        return np.concatenate([out, nyq], axis=1)


def _stack(xr, xi):
    return np.stack([xr[0].numpy(), xi[0].numpy()]).astype(np.float32)


def make_synthetic_checkpoint(path, config, seed=0):
    """Build a reference model with seeded random parameters and save it as a
    regular torch checkpoint {"config": ..., "state_dict": ...}."""
    torch.manual_seed(seed)
    model = ReferenceDccrn(config)
    sd = model.state_dict()
    gen = torch.Generator().manual_seed(seed)
    for name, tensor in sd.items():
        if name.endswith("num_batches_tracked"):
            continue
        if name.endswith("running_var"):
            tensor.uniform_(0.5, 1.5, generator=gen)
        elif name.endswith("running_mean"):
            tensor.uniform_(-0.1, 0.1, generator=gen)
        else:
            tensor.uniform_(-0.1, 0.1, generator=gen)
    model.load_state_dict(sd)
    torch.save({"config": dict(config), "state_dict": model.state_dict()}, path)
    return path


def load_checkpoint(path):
    ckpt = torch.load(path, map_location="cpu", weights_only=False)
    if not isinstance(ckpt, dict) or "state_dict" not in ckpt or "config" not in ckpt:
        raise ValueError(f"{path}: expected a dict with 'config' and 'state_dict'")
    return ckpt["config"], ckpt["state_dict"]
