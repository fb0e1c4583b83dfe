"""Small shared helpers: seed derivation, rounding, canonical JSON."""

import json
import hashlib

MASK64 = (1 << 64) - 1


def mix_seed(master_seed, task_index):
    """Derive a per-task seed from a master seed and a task index.

    Uses the splitmix64 finalizer so that nearby (seed, index) pairs give
    uncorrelated streams. Result is a 63-bit nonnegative int, safe for
    numpy generators.
    """
    z = ((master_seed & MASK64) * 0x9E3779B97F4A7C15 + (task_index & MASK64)) & MASK64
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    z = z ^ (z >> 31)
    return z >> 1


def round_half_up(x):
    """Round to nearest integer with .5 going up (not banker's rounding)."""
    return int(x + 0.5) if x >= 0 else -int(-x + 0.5)


def dump_json(obj, path):
    """Write JSON with sorted keys and full float precision (repr round-trip)."""
    text = json.dumps(obj, sort_keys=True, indent=2)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def config_digest(obj):
    """Stable sha256 hex digest of a JSON-serializable config."""
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
