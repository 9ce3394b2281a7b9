"""Run configuration: flat ``key = value`` text with dotted namespaces.

Lines starting with ``#`` are comments.  Lists are comma separated.  Every
key has a declared type and default; unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

REQUIRED = object()


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError(f"{s!r} is not an integer")
    return int(v)


def _floats(s):
    return tuple(float(t) for t in str(s).split(",") if t.strip())


def _ints(s):
    return tuple(_int(t) for t in str(s).split(",") if t.strip())


def _bool(s):
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _choice(*options):
    def conv(s):
        t = str(s).strip()
        if t not in options:
            raise ValueError(f"{t!r} not in {options}")
        return t
    return conv


def _j_mode(s):
    t = str(s).strip()
    return "row" if t == "row" else float(t)


SCHEMA: dict[str, tuple] = {
    # van der Waals
    "eos.a": (_float, REQUIRED),
    "eos.b": (_float, REQUIRED),
    "eos.R": (_float, REQUIRED),
    "eos.T": (_floats, (0.85, 0.9, 0.95)),
    "eos.v_max_factor": (_float, 50.0),
    "eos.points": (_int, 400),
    # envelope of G
    "envelope.kT": (_floats, (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)),
    "envelope.n_u": (_int, 4001),
    "envelope.delta_box": (_float, 1e-6),
    # grid, kernels, well
    "grid.n": (_int, 2048),
    "kernel.family": (_choice("box", "gaussian", "exponential", "constant"), "gaussian"),
    "kernel.scale": (_float, 1.0),
    "kernel.mass": (_float, 1.0),
    "kernel.eps": (_floats, (0.2, 0.1, 0.05)),
    "kernel.long": (_choice("green", "constant", "none"), "green"),
    "well.kT": (_float, 0.25),
    "well.j": (_j_mode, "row"),
    # initial field for minimize
    "field.m": (_float, 0.0),
    "field.init": (_choice("cosine", "constant", "random"), "cosine"),
    "field.amplitude": (_float, 0.5),
    "field.periods": (_int, 1),
    # minimizer
    "minimize.step": (_float, 1e-2),
    "minimize.backtrack": (_float, 0.5),
    "minimize.tol": (_float, 1e-8),
    "minimize.max_iter": (_int, 50000),
    "minimize.delta_box": (_float, 1e-6),
    "minimize.restarts": (_int, 0),
    "minimize.level": (_float, 0.5),
    "minimize.plot": (_bool, True),
    # sharp-interface limit
    "gamma.k": (_ints, (1, 2, 3, 4)),
    "gamma.m": (_float, 0.0),
    "gamma.continuation_k": (_int, 2),
    "gamma.eps": (_floats, (0.2, 0.1, 0.05)),
    "gamma.continuation": (_bool, True),
    # elastic check
    "elastic.n": (_ints, (256, 512, 1024)),
    "elastic.eps": (_float, 0.05),
    "elastic.fields": (_int, 10),
    "elastic.m": (_float, 0.0),
    "elastic.j": (_float, 1.0),
    "elastic.modes": (_int, 4),
    "elastic.max_slope": (_float, 0.5),
    # critical exponent
    "exponent.lo": (_float, 0.9),
    "exponent.hi": (_float, 0.99),
    "exponent.points": (_int, 8),
    "exponent.j": (_float, 0.0),
    "exponent.convention": (_choice("quarter", "display"), "quarter"),
    # interface-cost profile problem
    "profile.half_width": (_float, 0.0),
}

# keys echoed (and validated) per subcommand
SECTIONS = {
    "eos": ("eos.",),
    "envelope": ("envelope.",),
    "minimize": ("grid.", "kernel.", "well.", "field.", "minimize."),
    "gamma": ("grid.", "kernel.", "well.kT", "gamma.", "minimize.", "profile."),
    "elastic-check": ("well.kT", "elastic."),
    "exponent": ("kernel.family", "kernel.scale", "kernel.mass", "exponent.", "profile.half_width"),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    seed: int = 0

    def __getitem__(self, key):
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        v = self.values.get(key, SCHEMA[key][1])
        if v is REQUIRED:
            raise ConfigError(f"missing required key {key!r}")
        return v

    def resolved(self, command: str) -> dict:
        """All keys used by ``command`` with defaults filled in; validates required keys."""
        prefixes = SECTIONS[command]
        out = {k: self[k] for k in SCHEMA if k.startswith(prefixes)}
        out["seed"] = self.seed
        return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}


def parse_pairs(pairs, source="--set") -> dict:
    out = {}
    for lineno, raw in pairs:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = SCHEMA[key][0](val)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    return out


def load_config(path: str | Path | None = None, overrides=(), seed: int = 0) -> RunConfig:
    values = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        values.update(parse_pairs(enumerate(text.splitlines(), 1), str(p)))
    values.update(parse_pairs(enumerate(overrides, 1)))
    return RunConfig(values, seed)
