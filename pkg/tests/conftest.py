import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prosenet.corpus import Document


@pytest.fixture
def lemma_dictionary():
    from prosenet.corpus import load_lemma_dictionary

    return load_lemma_dictionary()


def make_doc(tokens, doc_id="t", label="informative", stop_mask=None):
    return Document(
        doc_id, label, list(tokens), len(tokens),
        stop_mask if stop_mask is not None else [False] * len(tokens),
    )


def write_toy_corpus(base: Path, n_per_class: int = 8, tokens: int = 500, seed: int = 7):
    """Two synthetic styles that differ in function-word usage patterns."""
    rng = np.random.default_rng(seed)
    content = [f"w{chr(97 + i // 26)}{chr(97 + i % 26)}x" for i in range(120)]
    stops = ["the", "of", "and", "to", "in", "that", "is", "was", "he", "for",
             "it", "with", "as", "his", "on", "be", "at", "by", "an"]
    base.mkdir(parents=True, exist_ok=True)
    lines = []
    for i in range(n_per_class):
        for label in ("informative", "imaginative"):
            toks = []
            while len(toks) < tokens:
                if label == "informative":
                    toks.append(str(rng.choice(stops[:10])))
                    toks.append(str(rng.choice(content[:60])))
                    if rng.random() < 0.6:
                        toks.append(str(rng.choice(stops)))
                else:
                    toks.append(str(rng.choice(content[40:])))
                    if rng.random() < 0.35:
                        toks.append(str(rng.choice(stops[5:])))
                    toks.append(str(rng.choice(content)))
            doc_id = f"{label[:3]}{i:02d}"
            path = base / f"{doc_id}.txt"
            path.write_text(" ".join(toks[:tokens]) + ".", encoding="utf-8")
            lines.append(f"{doc_id}\t{label}\t{path.name}")
    manifest = base / "manifest.tsv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


@pytest.fixture(scope="session")
def toy_manifest(tmp_path_factory):
    base = tmp_path_factory.mktemp("toy_corpus")
    return write_toy_corpus(base)
