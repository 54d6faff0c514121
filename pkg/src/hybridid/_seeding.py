"""Master-seed fan-out: every stage gets ``sha256(f"{stage}:{master}")``."""
import hashlib

import numpy as np


def stage_seed(master_seed, stage):
    digest = hashlib.sha256(f"{stage}:{int(master_seed)}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def stage_rng(master_seed, stage):
    return np.random.default_rng(np.random.SeedSequence(stage_seed(master_seed, stage)))
