"""TF-IDF retrieval over the pool's detailed descriptions."""

from __future__ import annotations

import math
import re
from collections import Counter

_TOKEN = re.compile(r"[a-z0-9]+")


def _tokens(text: str):
    return _TOKEN.findall(text.lower())


def retrieve_neighbors(pool, detailed: str, m: int = 3):
    """Top-m pool ids by cosine similarity of TF-IDF vectors; ties break
    toward lower ids. Returns all ids when m exceeds the pool size."""
    ids = pool.ids()
    if not ids:
        return []
    docs = {tid: Counter(_tokens(pool.tuples[tid].detailed)) for tid in ids}
    n = len(ids)
    df = Counter()
    for counts in docs.values():
        df.update(counts.keys())
    idf = {tok: math.log(n / (1 + d)) + 1.0 for tok, d in df.items()}

    def vectorize(counts):
        vec = {tok: tf * idf.get(tok, math.log(n) + 1.0) for tok, tf in counts.items()}
        norm = math.sqrt(sum(v * v for v in vec.values()))
        return vec, norm

    qvec, qnorm = vectorize(Counter(_tokens(detailed)))
    scored = []
    for tid in ids:
        dvec, dnorm = vectorize(docs[tid])
        if qnorm == 0.0 or dnorm == 0.0:
            sim = 0.0
        else:
            common = set(qvec) & set(dvec)
            sim = sum(qvec[t] * dvec[t] for t in common) / (qnorm * dnorm)
        scored.append((-sim, tid))
    scored.sort()
    return [tid for _, tid in scored[:m]]
