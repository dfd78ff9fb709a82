"""Run configuration: flat ``key = value`` files and the resolved record.

Configuration sources merge with increasing precedence: case-preset
defaults, then the config file, then command-line flags.  The fully
resolved configuration is echoed next to the run outputs so every run
directory is self-describing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .errors import ConfigError

__all__ = ["parse_config_file", "ResolvedRun", "CONFIG_KEYS"]


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: '{text}'")


def _parse_float_list(text: str):
    return tuple(float(t) for t in text.replace(",", " ").split())


def _choice(*options):
    def convert(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {options}, got '{text}'")
        return text

    return convert


CONFIG_KEYS = {
    "case": _choice("sod", "expansion", "wedge", "step"),
    "limiter": _choice("none", "bj", "venkat", "mlp", "mlp-pw"),
    "smooth_fn": _choice("f_bj", "f_v"),
    "K": float,
    "cfl": float,
    "flux": _choice("hllc", "rusanov"),
    "gamma": float,
    "t_end": float,
    "max_iters": int,
    "residual_drop": float,
    "nx": int,
    "ny": int,
    "jitter": float,
    "seed": int,
    "mesh": str,
    "out": str,
    "plots": _parse_bool,
    "snapshot_times": _parse_float_list,
}


def parse_config_file(path) -> dict:
    """Parse a flat ``key = value`` file into typed values.

    Lines are ``key = value`` (or ``key value``); ``#`` starts a comment.
    Unknown keys and unparsable values raise :class:`ConfigError` naming
    the key and line.
    """
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" in text:
                key, _, val = text.partition("=")
            else:
                parts = text.split(None, 1)
                if len(parts) != 2:
                    raise ConfigError("expected 'key = value'", line=lineno)
                key, val = parts
            key = key.strip()
            val = val.strip()
            if key not in CONFIG_KEYS:
                raise ConfigError(f"unknown configuration key '{key}'", key=key, line=lineno)
            try:
                values[key] = CONFIG_KEYS[key](val)
            except ValueError as exc:
                raise ConfigError(str(exc), key=key, line=lineno) from exc
    return values


@dataclass
class ResolvedRun:
    """Fully resolved configuration of one case run."""

    case: str
    limiter: str
    smooth_fn: str
    K: float
    cfl: float
    flux: str
    gamma: float
    mode: str  # "unsteady" | "steady"
    t_end: float | None = None
    max_iters: int | None = None
    residual_drop: float | None = None
    nx: int | None = None
    ny: int | None = None
    jitter: float = 0.0
    seed: int = 0
    mesh: str | None = None
    out: str = "out"
    plots: bool = True
    snapshot_times: tuple = ()

    def echo(self) -> str:
        """The resolved configuration as a reloadable key = value listing."""
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if val is None or f.name == "mode":
                continue
            if isinstance(val, bool):
                val = "true" if val else "false"
            elif isinstance(val, tuple):
                if not val:
                    continue
                val = " ".join(f"{v:g}" for v in val)
            lines.append(f"{f.name} = {val}")
        return "\n".join(lines) + "\n"

    def apply(self, overrides: dict) -> "ResolvedRun":
        known = {f.name for f in fields(self)}
        clean = {}
        for key, val in overrides.items():
            if val is None:
                continue
            if key not in known:
                raise ConfigError(f"unknown configuration key '{key}'", key=key)
            clean[key] = val
        return ResolvedRun(**{**self.__dict__, **clean})
