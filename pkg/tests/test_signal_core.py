import struct

import numpy as np
import pytest

from voicemask import AudioBuffer, Spectrogram, StftConfig, istft, read_wav, stft, write_wav
from voicemask.errors import InvalidConfig, MalformedWav, UnsupportedEncoding
from voicemask.signal_core import cola_deviation

from helpers import SR, interior_snr_db, make_tone


def wav_bytes(fmt_tag, channels, rate, bits, payload):
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, fmt_tag, channels, rate, rate * channels * bits // 8, channels * bits // 8, bits
    )
    return header + b"data" + struct.pack("<I", len(payload)) + payload


class TestAudioBuffer:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            AudioBuffer(np.array([0.0, np.nan]), SR)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            AudioBuffer(np.zeros(4), 0)

    def test_samples_are_read_only(self):
        buf = AudioBuffer(np.zeros(4), SR)
        with pytest.raises(ValueError):
            buf.samples[0] = 1.0

    def test_empty_allowed(self):
        assert len(AudioBuffer(np.zeros(0), SR)) == 0


class TestStftConfig:
    def test_defaults_satisfy_cola(self):
        assert cola_deviation(StftConfig()) < 1e-6

    @pytest.mark.parametrize("frame_len,hop", [(1000, 256), (1024, 0), (1024, 2048)])
    def test_invalid_geometry(self, frame_len, hop):
        with pytest.raises(InvalidConfig):
            StftConfig(frame_len=frame_len, hop=hop)

    def test_unknown_window(self):
        with pytest.raises(InvalidConfig):
            StftConfig(window="kaiser")


class TestReadWav:
    def test_16bit_scaling(self, tmp_path):
        payload = struct.pack("<3h", 0, 16384, -16384)
        path = tmp_path / "a.wav"
        path.write_bytes(wav_bytes(1, 1, SR, 16, payload))
        buf = read_wav(path)
        assert buf.sample_rate == SR
        np.testing.assert_array_equal(buf.samples, [0.0, 0.5, -0.5])

    def test_stereo_average(self, tmp_path):
        payload = struct.pack("<2f", 1.0, 0.0)
        path = tmp_path / "st.wav"
        path.write_bytes(wav_bytes(3, 2, SR, 32, payload))
        np.testing.assert_allclose(read_wav(path).samples, [0.5])

    def test_empty_data_chunk(self, tmp_path):
        path = tmp_path / "empty.wav"
        path.write_bytes(wav_bytes(1, 1, SR, 16, b""))
        assert len(read_wav(path)) == 0

    def test_24bit(self, tmp_path):
        payload = bytes([0x00, 0x00, 0x80, 0xFF, 0xFF, 0x7F])  # min, max codes
        path = tmp_path / "b.wav"
        path.write_bytes(wav_bytes(1, 1, SR, 24, payload))
        np.testing.assert_allclose(read_wav(path).samples, [-1.0, 8388607 / 8388608])

    def test_8bit(self, tmp_path):
        path = tmp_path / "c.wav"
        path.write_bytes(wav_bytes(1, 1, 8000, 8, bytes([0, 128, 255])))
        np.testing.assert_allclose(read_wav(path).samples, [-1.0, 0.0, 127 / 128])

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.wav"
        path.write_bytes(b"RIFX" + b"\x00" * 40)
        with pytest.raises(MalformedWav):
            read_wav(path)

    def test_truncated_data(self, tmp_path):
        good = wav_bytes(1, 1, SR, 16, struct.pack("<4h", 1, 2, 3, 4))
        path = tmp_path / "trunc.wav"
        path.write_bytes(good[:-5])
        with pytest.raises(MalformedWav):
            read_wav(path)

    def test_compressed_rejected(self, tmp_path):
        path = tmp_path / "ulaw.wav"
        path.write_bytes(wav_bytes(7, 1, 8000, 8, bytes(8)))
        with pytest.raises(UnsupportedEncoding):
            read_wav(path)


class TestWriteWav:
    def test_round_trip_quantization(self, tmp_path):
        path = tmp_path / "rt.wav"
        original = np.array([0.25, -0.25, 0.1234567, -0.9999])
        write_wav(path, AudioBuffer(original, SR))
        back = read_wav(path)
        assert np.max(np.abs(back.samples - original)) <= 2.0**-15

    def test_clipping(self, tmp_path):
        path = tmp_path / "clip.wav"
        write_wav(path, AudioBuffer(np.array([1.7]), SR))
        assert read_wav(path).samples[0] == 32767 / 32768

    def test_empty(self, tmp_path):
        path = tmp_path / "empty.wav"
        write_wav(path, AudioBuffer(np.zeros(0), SR))
        assert len(read_wav(path)) == 0

    def test_deterministic_bytes(self, tmp_path):
        buf = make_tone(440, seconds=0.1)
        write_wav(tmp_path / "a.wav", buf)
        write_wav(tmp_path / "b.wav", buf)
        assert (tmp_path / "a.wav").read_bytes() == (tmp_path / "b.wav").read_bytes()


class TestStft:
    def test_zero_signal_frame_count(self):
        sg = stft(AudioBuffer(np.zeros(4096), SR))
        assert sg.n_frames == 13
        assert sg.n_bins == 513
        assert np.all(sg.frames == 0)

    @pytest.mark.parametrize("length", [1024, 1025, 2048, 5000])
    def test_frame_count_formula(self, length):
        sg = stft(AudioBuffer(np.zeros(length), SR))
        assert sg.n_frames == (length - 1024) // 256 + 1

    def test_short_signal_zero_padded(self):
        sg = stft(AudioBuffer(np.ones(100), SR))
        assert sg.n_frames == 1

    def test_impulse_matches_analytic_dft(self):
        # Windowed impulse at sample n0: bin k must equal w[n0] * exp(-2i pi k n0 / N).
        n0 = 37
        x = np.zeros(1024)
        x[n0] = 1.0
        cfg = StftConfig()
        sg = stft(AudioBuffer(x, SR), cfg)
        w = cfg.window_samples()
        k = np.arange(cfg.n_bins)
        expected = w[n0] * np.exp(-2j * np.pi * k * n0 / cfg.frame_len)
        np.testing.assert_allclose(sg.frames[0], expected, atol=1e-12)

    def test_bin_exact_sine_peaks_at_its_bin(self):
        k = 32
        freq = k * SR / 1024
        sg = stft(make_tone(freq, seconds=0.5))
        assert np.argmax(np.abs(sg.frames[2])) == k

    def test_real_signal_edge_bins_are_real(self):
        rng = np.random.default_rng(3)
        sg = stft(AudioBuffer(rng.standard_normal(4096), SR))
        assert np.max(np.abs(sg.frames[:, 0].imag)) < 1e-9
        assert np.max(np.abs(sg.frames[:, -1].imag)) < 1e-9

    def test_linearity(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(4096)
        y = rng.standard_normal(4096)
        a, b = 0.7, -1.3
        combined = stft(AudioBuffer(a * x + b * y, SR)).frames
        separate = a * stft(AudioBuffer(x, SR)).frames + b * stft(AudioBuffer(y, SR)).frames
        np.testing.assert_allclose(combined, separate, atol=1e-9 * np.abs(separate).max())

    def test_windowed_frame_parseval(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(1024)
        cfg = StftConfig()
        frame = cfg.window_samples() * x
        spectrum = stft(AudioBuffer(x, SR), cfg).frames[0]
        time_energy = np.sum(frame**2)
        mags = np.abs(spectrum) ** 2
        spec_energy = (mags[0] + 2.0 * np.sum(mags[1:-1]) + mags[-1]) / cfg.frame_len
        assert abs(time_energy - spec_energy) / time_energy < 1e-6


class TestIstft:
    def test_round_trip_snr(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal(3 * SR)
        buf = AudioBuffer(x, SR)
        back = istft(stft(buf))
        assert interior_snr_db(x, back.samples) >= 60.0

    def test_zero_spectrogram(self):
        sg = Spectrogram(np.zeros((5, 513), dtype=complex), StftConfig(), SR)
        assert np.all(istft(sg).samples == 0)

    def test_single_frame_windowed_sine(self):
        # One frame resynthesizes to the sine wherever the squared window is
        # well conditioned (the normalizer floors near the frame edges).
        tone = make_tone(500.0, seconds=1024 / SR)
        sg = stft(tone)
        single = Spectrogram(sg.frames[:1], sg.config, SR)
        out = istft(single).samples
        w_sq = StftConfig().window_samples() ** 2
        usable = w_sq > 0.01 * w_sq.max()
        np.testing.assert_allclose(out[usable], tone.samples[usable], atol=1e-9)

    def test_preserves_sample_rate(self):
        buf = make_tone(440, seconds=0.5, sr=8000)
        assert istft(stft(buf)).sample_rate == 8000
