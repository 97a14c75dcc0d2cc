#!/usr/bin/env python3
"""Builds sotu_paragraphs.txt.gz from the @stdlib/datasets-sotu npm package.

The speeches ship as one line each, so paragraphs are rebuilt by grouping
consecutive sentences (4 to 6, chosen by a seeded RNG). Bracketed stage
directions such as [Laughter] are dropped and common abbreviations lose their
periods so they do not read as sentence ends.

    npm pack @stdlib/datasets-sotu && tar xzf stdlib-datasets-sotu-*.tgz
    python3 build_sotu.py package/data sotu_paragraphs.txt.gz
"""
import gzip
import random
import re
import sys
from pathlib import Path

ABBREV = r"\b(Mr|Mrs|Ms|Dr|St|Jr|Sr|Gen|Gov|Sen|Rep|Hon|Messrs|Lt|Col|Capt|Adm|No|Nos|vs|viz|etc|Co|Inc|Ltd|Jan|Feb|Mar|Apr|Aug|Sept|Sep|Oct|Nov|Dec|Mt|Ft)\."
SENT_END = re.compile(r"(?<=[.?!])[\"')\]]*\s+(?=[\"'(]?[A-Z0-9])")


def clean(text):
    text = re.sub(r"\[[^\]]*\]", " ", text)
    text = re.sub(ABBREV, r"\1", text)
    # Dotted initialisms: U.S. -> US, A.D. -> AD.
    text = re.sub(r"\b((?:[A-Z]\.){2,})", lambda m: m.group(1).replace(".", ""), text)
    # Single initials in names: John F. Kennedy -> John F Kennedy.
    text = re.sub(r"\b([A-Z])\.(?=\s+[A-Z])", r"\1", text)
    return re.sub(r"\s+", " ", text).strip()


def main(src, dst):
    rng = random.Random(1790)
    out = []
    for path in sorted(Path(src).glob("*.txt")):
        sentences = [s for s in SENT_END.split(clean(path.read_text())) if s.strip()]
        i = 0
        while i < len(sentences):
            k = rng.randint(4, 6)
            out.append(" ".join(sentences[i : i + k]))
            i += k
    with gzip.open(dst, "wt", encoding="utf-8") as f:
        for p in out:
            f.write(p + "\n")
    print(f"{len(out)} paragraphs", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
