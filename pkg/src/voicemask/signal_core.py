"""Audio container, WAV file I/O, and STFT analysis/resynthesis.

Spectral frames are 1-D complex arrays holding the non-negative-frequency
half spectrum; bin k of an ``n``-bin frame sits at normalized angular
frequency ``pi * k / (n - 1)``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidConfig, IoFailure, MalformedWav, UnsupportedEncoding

__all__ = [
    "AudioBuffer",
    "StftConfig",
    "Spectrogram",
    "bin_frequencies",
    "cola_deviation",
    "read_wav",
    "write_wav",
    "stft",
    "istft",
]


@dataclass(frozen=True)
class AudioBuffer:
    """Mono sampled signal.

    Samples are float64 with nominal range [-1, 1]; the array is made
    read-only so buffers can be shared across threads without copying.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64).copy()
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        rate = int(self.sample_rate)
        if rate <= 0:
            raise ValueError("sample_rate must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", rate)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.samples.size / self.sample_rate


def _window_samples(kind: str, n: int) -> np.ndarray:
    # Periodic windows: the COLA property holds for hop = n / 2^k.
    t = np.arange(n)
    if kind == "hann":
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * t / n)
    if kind == "hamming":
        return 0.54 - 0.46 * np.cos(2.0 * np.pi * t / n)
    if kind == "rect":
        return np.ones(n)
    raise InvalidConfig(f"unknown window kind {kind!r}")


@dataclass(frozen=True)
class StftConfig:
    """Frame length (power of two), hop, and analysis window kind."""

    frame_len: int = 1024
    hop: int = 256
    window: str = "hann"

    def __post_init__(self):
        if self.frame_len < 2 or self.frame_len & (self.frame_len - 1):
            raise InvalidConfig(f"frame_len must be a power of two, got {self.frame_len}")
        if not 0 < self.hop <= self.frame_len:
            raise InvalidConfig(f"hop must satisfy 0 < hop <= frame_len, got {self.hop}")
        _window_samples(self.window, self.frame_len)

    @property
    def n_bins(self) -> int:
        return self.frame_len // 2 + 1

    def window_samples(self) -> np.ndarray:
        return _window_samples(self.window, self.frame_len)


@dataclass(frozen=True)
class Spectrogram:
    """Time-ordered spectral frames: complex array of shape (n_frames, n_bins)."""

    frames: np.ndarray
    config: StftConfig
    sample_rate: int

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.complex128)
        if frames.ndim != 2:
            raise ValueError("frames must be a 2-D array")
        if frames.shape[1] != self.config.n_bins:
            raise InvalidConfig(
                f"frames have {frames.shape[1]} bins, config implies {self.config.n_bins}"
            )
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_bins(self) -> int:
        return self.frames.shape[1]

    def __len__(self):
        return self.n_frames

    def __getitem__(self, t) -> np.ndarray:
        return self.frames[t]


def bin_frequencies(n_bins: int) -> np.ndarray:
    """Normalized angular frequency of every bin: pi * k / (n_bins - 1)."""
    return np.pi * np.arange(n_bins) / (n_bins - 1)


def cola_deviation(cfg: StftConfig) -> float:
    """Max relative deviation of the overlapped window sum in steady state."""
    w = cfg.window_samples()
    n_shifts = 4 * (cfg.frame_len // cfg.hop) + 4
    total = np.zeros((n_shifts - 1) * cfg.hop + cfg.frame_len)
    for t in range(n_shifts):
        start = t * cfg.hop
        total[start : start + cfg.frame_len] += w
    steady = total[cfg.frame_len : -cfg.frame_len]
    mean = steady.mean()
    return float(np.max(np.abs(steady - mean)) / mean)


# --- WAV I/O ---------------------------------------------------------------

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3


def read_wav(path) -> AudioBuffer:
    """Read a PCM WAV file (8/16/24-bit integer or 32-bit float, any channel count).

    Multi-channel audio is averaged to mono; integer samples are scaled to
    [-1, 1).
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise MalformedWav(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise MalformedWav(f"{path}: data chunk truncated")
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)

    if fmt is None or payload is None:
        raise MalformedWav(f"{path}: missing fmt or data chunk")
    format_tag, channels, rate, _, _, bits = fmt
    if channels < 1 or rate < 1:
        raise MalformedWav(f"{path}: invalid channel count or sample rate")

    if format_tag == _FMT_PCM and bits == 8:
        samples = (np.frombuffer(payload, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif format_tag == _FMT_PCM and bits == 16:
        samples = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2")
        samples = samples.astype(np.float64) / 32768.0
    elif format_tag == _FMT_PCM and bits == 24:
        raw = np.frombuffer(payload[: len(payload) // 3 * 3], dtype=np.uint8)
        raw = raw.reshape(-1, 3).astype(np.int32)
        value = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        value -= (value & 0x800000) << 1  # sign extension
        samples = value.astype(np.float64) / 8388608.0
    elif format_tag == _FMT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedEncoding(f"{path}: format tag {format_tag} with {bits} bits")

    if channels > 1:
        samples = samples[: samples.size // channels * channels]
        samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioBuffer(samples, rate)


def write_wav(path, buf: AudioBuffer) -> None:
    """Write a 16-bit PCM mono WAV; samples are clipped to [-1, 1) first."""
    clipped = np.clip(buf.samples, -1.0, 32767.0 / 32768.0)
    pcm = np.round(clipped * 32768.0).astype("<i2")
    body = pcm.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(body)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, _FMT_PCM, 1, buf.sample_rate, buf.sample_rate * 2, 2, 16
    )
    header += b"data" + struct.pack("<I", len(body))
    try:
        Path(path).write_bytes(header + body)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# --- STFT / inverse STFT ---------------------------------------------------


def stft(buf: AudioBuffer, cfg: StftConfig = StftConfig()) -> Spectrogram:
    """Analyze a buffer into windowed half-spectrum frames.

    Frame t covers samples [t*hop, t*hop + frame_len); a buffer shorter than
    one frame is zero-padded to a single frame.
    """
    x = buf.samples
    n, hop = cfg.frame_len, cfg.hop
    if x.size < n:
        x = np.concatenate([x, np.zeros(n - x.size)])
    n_frames = (x.size - n) // hop + 1
    offsets = hop * np.arange(n_frames)
    frames = x[offsets[:, None] + np.arange(n)[None, :]] * cfg.window_samples()
    return Spectrogram(np.fft.rfft(frames, axis=1), cfg, buf.sample_rate)


def istft(spec: Spectrogram) -> AudioBuffer:
    """Weighted overlap-add resynthesis with window-sum normalization.

    Output length is (n_frames - 1) * hop + frame_len; reconstruction is
    reliable on the interior, away from frame_len samples at each edge.
    """
    cfg = spec.config
    w = cfg.window_samples()
    frames = np.fft.irfft(spec.frames, n=cfg.frame_len, axis=1) * w
    out_len = (spec.n_frames - 1) * cfg.hop + cfg.frame_len
    acc = np.zeros(out_len)
    norm = np.zeros(out_len)
    w_sq = w * w
    for t in range(spec.n_frames):
        start = t * cfg.hop
        acc[start : start + cfg.frame_len] += frames[t]
        norm[start : start + cfg.frame_len] += w_sq
    # Floor the normalizer at 1% of its peak: keeps division exact wherever
    # the window sum is well conditioned and stops modified (non-COLA) frame
    # content from being amplified at the outermost samples.
    peak = norm.max()
    if peak <= 0.0:
        return AudioBuffer(np.zeros(out_len), spec.sample_rate)
    out = acc / np.maximum(norm, 1e-2 * peak)
    return AudioBuffer(out, spec.sample_rate)
