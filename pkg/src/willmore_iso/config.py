"""Flat key = value config files shared by the CLI drivers.

One key per line, ``#`` starts a comment, values are bare tokens. The
canonical serialization (sorted keys, single spaces) feeds a short
sha256 digest so runs can be traced back to the exact configuration
that produced them.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .flow import FlowConfig

FLOW_KEYS = frozenset(
    {
        "max_iterations",
        "gradient_tolerance",
        "constraint_tolerance",
        "initial_step",
        "backtracking_factor",
        "sufficient_decrease",
        "restoration_max_iters",
        "remesh_every",
        "random_seed",
    }
)
_INT_KEYS = frozenset(
    {"max_iterations", "restoration_max_iters", "remesh_every", "random_seed"}
)

SWEEP_KEYS = frozenset(
    {
        "seeds_per_r",
        "perturb_amplitude",
        "workers",
        "sphere_subdivisions",
        "torus_resolution",
        "torus_grading",
        "plateau_tolerance",
    }
)


def parse_config(text: str) -> dict[str, str]:
    """Parse flat key = value text into a string mapping."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ValueError(f"line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    return parse_config(Path(path).read_text(encoding="ascii"))


def dump_config(cfg: dict[str, str]) -> str:
    """Canonical text form: sorted keys, one 'key = value' per line."""
    return "".join(f"{k} = {cfg[k]}\n" for k in sorted(cfg))


def config_hash(cfg: dict[str, str]) -> str:
    """Short content digest of the canonical serialization."""
    return hashlib.sha256(dump_config(cfg).encode("ascii")).hexdigest()[:12]


def flow_config_from(cfg: dict[str, str], extra_allowed=frozenset()) -> FlowConfig:
    """Build a FlowConfig from a parsed mapping, rejecting unknown keys.

    extra_allowed names keys some other consumer owns (the sweep driver
    layers its own vocabulary on the same file); anything else is a typo
    the user should hear about rather than a silently applied default.
    """
    unknown = set(cfg) - FLOW_KEYS - set(extra_allowed)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key in FLOW_KEYS & set(cfg):
        value = cfg[key]
        kwargs[key] = int(value) if key in _INT_KEYS else float(value)
    return FlowConfig(**kwargs)
