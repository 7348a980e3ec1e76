"""Helpers shared by the CLI command modules."""

import json
from typing import Any, Dict, Optional, Tuple

import click

from src.config import ConfigError


def echo_json(data: Any) -> None:
    """Print a machine-readable JSON document on stdout."""
    click.echo(json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True))


def fail(category: str, error: Exception) -> None:
    """Report an error on stderr and exit with status 1."""
    click.echo(f"✗ {category}: {str(error)}", err=True)
    raise SystemExit(1)


def settings(ctx: click.Context) -> Dict[str, Any]:
    """Global options collected by the ``cli`` group."""
    ctx.ensure_object(dict)
    return ctx.obj


def require_seed(ctx: click.Context) -> int:
    """The seed from ``--seed`` or the config file."""
    values = settings(ctx)
    seed = values.get("seed")
    if seed is None:
        seed = values.get("config", {}).get("seed")
    if seed is None:
        raise ConfigError("A seed is mandatory: pass --seed or set 'seed' in the config file")
    return int(seed)


def parse_param(item: str) -> Tuple[str, Any]:
    """Parse one ``key=value`` pair; the value is read as JSON when possible."""
    if "=" not in item:
        raise ConfigError(f"Parameter must look like key=value, got '{item}'")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def merge_params(base: Optional[Dict[str, Any]], items: Tuple[str, ...]) -> Dict[str, Any]:
    params = dict(base or {})
    params.update(parse_param(item) for item in items)
    return params
