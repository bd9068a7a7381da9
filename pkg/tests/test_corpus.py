import numpy as np
import pytest

from conftest import write_wav
from vowelkit.corpus import (
    VOWELS,
    find_utterances,
    load_audio,
    load_corpus_tokens,
    load_phn,
)
from vowelkit.errors import FormatError, InvalidInput


class TestLoadWav:
    def test_header_echo(self, tmp_path):
        path = tmp_path / "a.wav"
        write_wav(path, np.zeros(1024), rate=16000)
        signal = load_audio(path)
        assert signal.sample_rate == 16000
        assert signal.samples.size == 1024

    def test_pcm16_normalization(self, tmp_path):
        import wave

        path = tmp_path / "b.wav"
        with wave.open(str(path), "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(2)
            wf.setframerate(16000)
            wf.writeframes(np.array([32767, -32768, 0], dtype="<i2").tobytes())
        signal = load_audio(path)
        assert signal.samples[0] == pytest.approx(32767 / 32768)
        assert signal.samples[1] == pytest.approx(-1.0)
        assert signal.samples[2] == 0.0

    def test_stereo_rejected(self, tmp_path):
        import wave

        path = tmp_path / "stereo.wav"
        with wave.open(str(path), "wb") as wf:
            wf.setnchannels(2)
            wf.setsampwidth(2)
            wf.setframerate(16000)
            wf.writeframes(np.zeros(64, dtype="<i2").tobytes())
        with pytest.raises(FormatError):
            load_audio(path)


def sphere_bytes(samples, rate=16000, byte_format="01", coding="pcm", extra=""):
    header = (
        "NIST_1A\n   1024\n"
        f"sample_rate -i {rate}\n"
        "channel_count -i 1\n"
        "sample_n_bytes -i 2\n"
        f"sample_byte_format -s2 {byte_format}\n"
        f"sample_count -i {len(samples)}\n"
        f"sample_coding -s{len(coding)} {coding}\n"
        f"{extra}end_head\n"
    )
    dtype = "<i2" if byte_format == "01" else ">i2"
    return header.encode().ljust(1024, b" ") + np.asarray(samples, dtype=dtype).tobytes()


class TestLoadSphere:
    def test_header_echo(self, tmp_path):
        path = tmp_path / "a.sph"
        path.write_bytes(sphere_bytes([0, 100, -100], rate=16000))
        signal = load_audio(path)
        assert signal.sample_rate == 16000
        assert signal.samples.size == 3
        assert signal.samples[1] == pytest.approx(100 / 32768)

    def test_big_endian_data(self, tmp_path):
        path = tmp_path / "b.sph"
        path.write_bytes(sphere_bytes([1000, -1000], byte_format="10"))
        signal = load_audio(path)
        assert signal.samples[0] == pytest.approx(1000 / 32768)

    def test_shorten_coding_rejected(self, tmp_path):
        path = tmp_path / "c.sph"
        path.write_bytes(sphere_bytes([0, 0], coding="pcm,embedded-shorten-v2.00"))
        with pytest.raises(FormatError):
            load_audio(path)


class TestRawPcm:
    def test_requires_explicit_rate(self, tmp_path):
        path = tmp_path / "raw.pcm"
        path.write_bytes(np.array([0, 16384], dtype="<i2").tobytes())
        with pytest.raises(FormatError):
            load_audio(path)
        signal = load_audio(path, sample_rate=8000)
        assert signal.sample_rate == 8000
        assert signal.samples[1] == pytest.approx(0.5)


class TestLoadPhn:
    def test_whitelist_filtering(self, tmp_path):
        path = tmp_path / "a.phn"
        path.write_text("0 2260 h#\n2260 4070 iy\n4070 5000 t\n")
        tokens = load_phn(path)
        assert len(tokens) == 1
        assert tokens[0].label == "iy"
        assert (tokens[0].begin, tokens[0].end) == (2260, 4070)

    def test_vowel_inventory_size(self):
        assert len(VOWELS) == 20

    def test_bad_span_rejected(self, tmp_path):
        path = tmp_path / "b.phn"
        path.write_text("100 50 iy\n")
        with pytest.raises(FormatError) as err:
            load_phn(path)
        assert ":1:" in str(err.value)

    def test_unparsable_line_has_line_number(self, tmp_path):
        path = tmp_path / "c.phn"
        path.write_text("0 100 iy\nnot a span here\n")
        with pytest.raises(FormatError) as err:
            load_phn(path)
        assert ":2:" in str(err.value)

    def test_span_checked_against_signal_length(self, tmp_path):
        path = tmp_path / "d.phn"
        path.write_text("0 5000 iy\n")
        with pytest.raises(FormatError):
            load_phn(path, n_samples=4000)

    def test_non_integer_span(self, tmp_path):
        path = tmp_path / "e.phn"
        path.write_text("0 12.5 iy\n")
        with pytest.raises(FormatError):
            load_phn(path)


class TestCorpusWalk:
    def test_small_corpus_structure(self, small_corpus):
        train = find_utterances(small_corpus, "train")
        test = find_utterances(small_corpus, "test")
        assert len(train) == 3 * 18
        assert len(test) == 3 * 6
        tokens = load_corpus_tokens(small_corpus)
        assert len(tokens) == 3 * 24
        assert {t.split for t in tokens} == {"train", "test"}
        assert {t.label for t in tokens} == {"aa", "iy", "uw"}

    def test_missing_split_rejected(self, tmp_path):
        with pytest.raises(InvalidInput):
            find_utterances(tmp_path, "train")
