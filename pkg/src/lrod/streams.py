"""Seeded random substreams keyed by (master seed, account, trial, purpose).

Keying by account id rather than position keeps every draw independent of
iteration order, sample membership and worker count.
"""
from __future__ import annotations

import hashlib

import numpy as np

FORECAST = 1
GENERATE = 2
FOLDS = 3
VALIDATE = 4


def _id_words(account_id: str) -> list:
    digest = hashlib.blake2b(str(account_id).encode("utf-8"), digest_size=8).digest()
    return [int.from_bytes(digest[:4], "little"), int.from_bytes(digest[4:], "little")]


def substream(seed: int, account_id: str = "", trial: int = 0, purpose: int = FORECAST) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF, *_id_words(account_id),
               int(trial), int(purpose)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
