"""Writes the small example corpus and configuration under data/example."""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data" / "example"

STOPWORDS = {
    "en": "the and of to in is that it for on with as was at by".split(),
    "sl": "in je da se na ki za so z po iz pa ne kot".split(),
    "hr": "i je u da se na za su s od iz a ne kao".split(),
}

TOPIC_WORDS = (
    "propaganda propagandist propagated narrative coordinated campaign flood "
    "botnet disinformation troll amplify infiltrate falsehood manipulate"
).split()

ONSETS = ["b", "d", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "kl", "dr", "gr"]
VOWELS = ["a", "e", "i", "o", "u"]


def lexicon(rng, n):
    words = set()
    while len(words) < n:
        words.add("".join(rng.choice(ONSETS) + rng.choice(VOWELS) for _ in range(rng.randint(1, 3))))
    return sorted(words)


def sentence(rng, lang, lex, extra=None):
    n = rng.randint(8, 16)
    out = []
    for i in range(n):
        r = rng.random()
        if r < 0.3:
            w = rng.choice(STOPWORDS[lang])
        elif extra and r < 0.75:
            w = rng.choice(extra)
        else:
            w = rng.choice(lex)
        out.append(w)
    out[0] = out[0].capitalize()
    if n > 10:
        out[n // 2] += ","
    return " ".join(out) + "."


def paragraph(rng, lang, lex, extra=None):
    return "\n".join(sentence(rng, lang, lex, extra) for _ in range(rng.randint(3, 5)))


def document(rng, lang, lex, extra=None):
    return "\n\n".join(paragraph(rng, lang, lex, extra) for _ in range(rng.randint(2, 4)))


def main():
    rng = random.Random(20240611)
    (ROOT / "corpus").mkdir(parents=True, exist_ok=True)
    (ROOT / "stopwords").mkdir(parents=True, exist_ok=True)

    for lang, words in STOPWORDS.items():
        (ROOT / "stopwords" / f"{lang}.txt").write_text("\n".join(words) + "\n")
    (ROOT / "blacklist.txt").write_text("# blocked domains\nspam-farm.example\nclickbait.example\n")
    (ROOT / "url_keywords.txt").write_text("# blocked URL keywords\ncasino\nbetting\n")
    (ROOT / "topic_keywords.txt").write_text("# cluster keywords\npropag\ndisinform\n")
    (ROOT / "national_ids.tsv").write_text("# name\tregex\tchecksum\treserved_prefix\nemso\t\\b[0-9]{13}\\b\tnone\t000\n")

    for lang in ["en", "sl", "hr"]:
        lex = lexicon(rng, 400)
        docs = []
        for i in range(90):
            doc_id = f"{lang}-{i:03d}"
            url = f"https://www.site{rng.randint(1, 40)}.example/{lang}/{i}"
            extra = TOPIC_WORDS if i % 15 == 7 else None
            text = document(rng, lang, lex, extra)
            if i % 30 == 3:
                url = f"https://news.spam-farm.example/{i}"
            elif i % 30 == 4:
                url = f"https://a.b.c.d.e.site.example/{i}"
            elif i % 30 == 5:
                url = f"https://www.site1.example/best-casino-{i}"
            elif i % 30 == 6:
                text = text.upper()
            elif i % 30 == 8:
                text = " ".join(str(rng.randint(1000, 99999)) + " x" for _ in range(60))
            elif i % 30 == 9:
                text = "Too short to keep."
            elif i % 30 == 10:
                text += f"\n\nContact info@firma{i}.example or +386 41 555 {i:03d}, IBAN GB82 WEST 1234 5698 7654 32."
            docs.append({"id": doc_id, "url": url, "lang": lang, "source": "crawl", "text": text})
        for k in range(4):
            src = docs[11 + k]
            docs.append(dict(src, id=f"{lang}-dup{k}", url=f"https://mirror.example/{lang}/{k}"))
        (ROOT / "corpus" / f"{lang}.jsonl").write_text(
            "".join(json.dumps(d, ensure_ascii=False) + "\n" for d in docs)
        )

    (ROOT / "pipeline.ini").write_text(
        """[pipeline]
inputs = corpus/en.jsonl, corpus/sl.jsonl, corpus/hr.jsonl
output = out
seed = 7

[url]
blacklist = blacklist.txt
keywords = url_keywords.txt
max_subdomains = 4

[dedup]
mode = corpus
ngram = 5
paragraph_threshold = 0.5
document_threshold = 0.5

[heuristics]
stopwords = stopwords
require_stopwords = true

[pii]
national_ids = national_ids.tsv

[topic]
languages = en
topics = 4
iterations = 150
min_df = 3
max_df = 0.3
keywords = topic_keywords.txt
top_m = 15
min_hits = 2

[sample]
cap = 2.5
total_budget = 40000
shard_size = 2048
phase_fractions = 0.075, 0.675, 0.25
"""
    )


if __name__ == "__main__":
    main()
