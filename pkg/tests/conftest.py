import os
import wave

import numpy as np
import pytest

# Formant pairs (F1, F2) in Hz for five synthetic vowel-like classes.
SYNTH_FORMANTS = {
    "aa": (730.0, 1090.0),
    "ao": (570.0, 840.0),
    "eh": (530.0, 1840.0),
    "iy": (270.0, 2290.0),
    "uw": (300.0, 870.0),
}


def write_wav(path, samples, rate=16000):
    pcm = np.clip(np.asarray(samples) * 32767, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(pcm.tobytes())


def synth_token(rng, f1, f2, n_samples=1024, noise=0.9, jitter=0.25):
    t = np.arange(n_samples) / 16000.0
    jf1 = f1 * (1 + rng.uniform(-jitter, jitter))
    jf2 = f2 * (1 + rng.uniform(-jitter, jitter))
    amp = rng.uniform(0.3, 0.8)
    sig = amp * (
        np.sin(2 * np.pi * jf1 * t + rng.uniform(0, 2 * np.pi))
        + 0.7 * np.sin(2 * np.pi * jf2 * t + rng.uniform(0, 2 * np.pi))
    )
    sig += rng.normal(0, noise, n_samples)
    return np.clip(sig / 2.0, -1.0, 1.0)


def make_corpus(root, formants=SYNTH_FORMANTS, tokens_per_class=200, train_frac=0.75,
                seed=7, n_samples=1024, noise=0.9, jitter=0.25):
    """TIMIT-style train/ and test/ trees of synthetic vowel tokens."""
    rng = np.random.default_rng(seed)
    root = str(root)
    for label, (f1, f2) in sorted(formants.items()):
        n_train = int(tokens_per_class * train_frac)
        for i in range(tokens_per_class):
            split = "train" if i < n_train else "test"
            d = os.path.join(root, split, label)
            os.makedirs(d, exist_ok=True)
            sig = synth_token(rng, f1, f2, n_samples=n_samples, noise=noise, jitter=jitter)
            base = os.path.join(d, f"utt{i:03d}")
            write_wav(base + ".wav", sig)
            with open(base + ".phn", "w") as fh:
                fh.write(f"0 {n_samples} {label}\n")
    return root


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Three easy classes, 24 tokens each; fast enough for CLI/grid tests."""
    root = tmp_path_factory.mktemp("smallcorpus")
    formants = {k: SYNTH_FORMANTS[k] for k in ("aa", "iy", "uw")}
    return make_corpus(root, formants=formants, tokens_per_class=24,
                       train_frac=0.75, noise=0.1, jitter=0.05, seed=3)


@pytest.fixture(scope="session")
def vowel_corpus(tmp_path_factory):
    """Five hard classes, 200 tokens each; the Table-2 trend corpus."""
    root = tmp_path_factory.mktemp("vowelcorpus")
    return make_corpus(root, tokens_per_class=200, train_frac=0.75,
                       noise=0.9, jitter=0.25, seed=7)
