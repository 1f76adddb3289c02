import json
import random

import pytest

from corpuskit.corpus import Document

# A small Hebrew word bank for realistic fixtures.
HEBREW_WORDS = [
    "שלום", "עולם", "ספר", "בית", "ילד", "אור", "מים", "עיר", "דרך", "יום",
    "לילה", "אבן", "עץ", "פרח", "שיר", "חלון", "שמש", "ירח", "כוכב", "הר",
    "ים", "רוח", "אש", "לב", "יד", "עין", "ראש", "קול", "מלה", "זמן",
]


def make_doc(doc_id: str, text: str, source: str = "src") -> Document:
    return Document.create(id=doc_id, source=source, text=text)


def word_doc(doc_id: str, words, source: str = "src") -> Document:
    return make_doc(doc_id, " ".join(words), source=source)


def hebrew_text(n_words: int, seed: int) -> str:
    rng = random.Random(seed)
    return " ".join(rng.choice(HEBREW_WORDS) for _ in range(n_words))


def write_corpus(path, rows) -> None:
    """Write a list of dicts (or raw strings) as JSONL."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            if isinstance(row, str):
                fh.write(row + "\n")
            else:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")


@pytest.fixture
def tiny_params():
    from corpuskit.minhash import MinHashParams

    return MinHashParams(k=16, b=4, r=4, seed=1)
