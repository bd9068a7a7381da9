"""TIMIT-style corpus ingestion: audio files, .phn transcriptions, tokens."""

import os
import wave
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import FormatError, InvalidInput
from .frontend import RawSignal

# The vowel phoneme inventory used throughout the toolkit.
VOWELS = (
    "aa", "ae", "ah", "ao", "aw", "ax", "ax-h", "axr", "ay", "eh",
    "er", "ey", "ih", "ix", "iy", "ow", "oy", "uh", "uw", "ux",
)

SPHERE_HEADER_SIZE = 1024


@dataclass(frozen=True)
class PhonemeToken:
    label: str
    begin: int
    end: int
    utterance_id: str
    split: str  # "train" or "test"
    audio_path: str = ""


def _pcm16_to_float(raw: bytes) -> np.ndarray:
    return np.frombuffer(raw, dtype="<i2").astype(float) / 32768.0


def _load_wav(path) -> RawSignal:
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getcomptype() not in ("NONE",):
                raise FormatError(f"{path}: compressed WAV not supported")
            if wf.getsampwidth() != 2:
                raise FormatError(f"{path}: only 16-bit PCM supported")
            if wf.getnchannels() != 1:
                raise FormatError(f"{path}: only mono audio supported")
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return RawSignal(_pcm16_to_float(raw), rate)


def _load_sphere(path) -> RawSignal:
    with open(path, "rb") as fh:
        header = fh.read(SPHERE_HEADER_SIZE)
        data = fh.read()
    try:
        text = header.decode("ascii", errors="replace")
    except Exception as exc:  # pragma: no cover - decode with replace cannot fail
        raise FormatError(f"{path}: undecodable SPHERE header") from exc
    fields = {}
    for line in text.splitlines():
        parts = line.split()
        if len(parts) == 3 and parts[1].startswith("-"):
            fields[parts[0]] = parts[2]
    try:
        rate = int(fields["sample_rate"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: SPHERE header lacks sample_rate") from exc
    if int(fields.get("channel_count", "1")) != 1:
        raise FormatError(f"{path}: only mono SPHERE supported")
    if int(fields.get("sample_n_bytes", "2")) != 2:
        raise FormatError(f"{path}: only 16-bit SPHERE supported")
    coding = fields.get("sample_coding", "pcm")
    if "pcm" not in coding or "shorten" in coding:
        raise FormatError(f"{path}: unsupported SPHERE coding {coding!r}")
    samples = np.frombuffer(data, dtype="<i2")
    if fields.get("sample_byte_format") == "10":
        samples = np.frombuffer(data, dtype=">i2")
    count = fields.get("sample_count")
    if count is not None:
        samples = samples[: int(count)]
    return RawSignal(samples.astype(float) / 32768.0, rate)


def load_audio(path, sample_rate: Optional[int] = None) -> RawSignal:
    """Read RIFF WAV, NIST SPHERE, or (with explicit rate) raw PCM16."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
    if magic[:4] == b"RIFF":
        return _load_wav(path)
    if magic.startswith(b"NIST_1A"):
        return _load_sphere(path)
    if sample_rate is not None:
        with open(path, "rb") as fh:
            return RawSignal(_pcm16_to_float(fh.read()), sample_rate)
    raise FormatError(f"{path}: unknown audio format (magic {magic[:4]!r})")


def load_phn(path, whitelist: Sequence[str] = VOWELS,
             n_samples: Optional[int] = None, split: str = "train",
             utterance_id: Optional[str] = None,
             audio_path: str = "") -> List[PhonemeToken]:
    """Parse "begin end label" lines, keeping only whitelisted phonemes."""
    allowed = set(whitelist)
    if utterance_id is None:
        utterance_id = os.path.splitext(os.path.basename(str(path)))[0]
    tokens = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"{path}:{lineno}: expected 'begin end label'")
            try:
                begin, end = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-integer span") from exc
            if end <= begin or begin < 0:
                raise FormatError(f"{path}:{lineno}: invalid span [{begin}, {end})")
            if n_samples is not None and end > n_samples:
                raise FormatError(f"{path}:{lineno}: span exceeds signal length {n_samples}")
            if parts[2] in allowed:
                tokens.append(PhonemeToken(parts[2], begin, end, utterance_id, split, audio_path))
    return tokens


def find_utterances(corpus_root, split: str) -> List[str]:
    """Audio files under <root>/<split>/ that have a sibling .phn file."""
    base = os.path.join(str(corpus_root), split)
    if not os.path.isdir(base):
        raise InvalidInput(f"missing corpus split directory: {base}")
    found = []
    for dirpath, _dirnames, filenames in os.walk(base):
        for name in sorted(filenames):
            stem, ext = os.path.splitext(name)
            if ext.lower() == ".wav":
                for phn in (stem + ".phn", stem + ".PHN"):
                    if phn in filenames or phn.lower() in [f.lower() for f in filenames]:
                        found.append(os.path.join(dirpath, name))
                        break
    return sorted(found)


def phn_path_for(audio_path: str) -> str:
    stem = os.path.splitext(audio_path)[0]
    for candidate in (stem + ".phn", stem + ".PHN"):
        if os.path.exists(candidate):
            return candidate
    raise InvalidInput(f"no .phn transcription next to {audio_path}")


def load_corpus_tokens(corpus_root, whitelist: Sequence[str] = VOWELS) -> List[PhonemeToken]:
    """All whitelisted tokens from the train/ and test/ trees."""
    tokens = []
    for split in ("train", "test"):
        for audio_path in find_utterances(corpus_root, split):
            rel = os.path.relpath(audio_path, str(corpus_root))
            utt = os.path.splitext(rel)[0].replace(os.sep, "/")
            tokens.extend(
                load_phn(phn_path_for(audio_path), whitelist=whitelist, split=split,
                         utterance_id=utt, audio_path=audio_path)
            )
    return tokens
