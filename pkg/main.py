import argparse
import logging
import re
import sys
from pathlib import Path

from dotenv import dotenv_values
from pydantic import ValidationError

from src.app.commands import COMMANDS
from src.app.config import get_settings
from src.app.schemas.core import ErrorResponse
from src.app.schemas.run import RunConfig
from src.app.utils.errors import ConfigError, ScalimError

# --- LOGGING ---
settings = get_settings()
logging.basicConfig(level=settings.LOG_LEVEL, stream=sys.stderr)
logger = logging.getLogger(__name__)


# --- PARSER ---
# flags whose values may start with a minus sign
NUMERIC_FLAGS = ("--y-grid", "--lambda-list", "--lam", "--m", "--seed")
_NEGATIVE = re.compile(r"^-(\d|\.\d)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value run config file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key; repeatable")
    common.add_argument("--output", help="artifact path; stdout when omitted")
    common.add_argument("--seed", type=int, help="seed for sampled Hölder pairs")

    parser = argparse.ArgumentParser(
        prog="scalim",
        description="Singular integral operators on weighted Schauder spaces and their λ → ∞ limit.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers, [common])
    return parser


# --- CONFIG ---
def load_config(args: argparse.Namespace) -> RunConfig:
    """
    Config file first, then --set overrides, then explicit command flags.
    """
    values: dict[str, str] = {}
    if args.config is not None:
        if not args.config.is_file():
            raise ConfigError(f"Config file not found: {args.config}")
        values.update({k.strip(): v for k, v in dotenv_values(args.config).items() if v is not None})

    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects KEY=VALUE, got '{item}'")
        values[key.strip()] = value.strip()

    for key in args.config_keys:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    values["command"] = args.command
    return RunConfig(**values)


# --- EXCEPTION HANDLER ---
def _fail(detail: str, exit_code: int) -> int:
    sys.stderr.write(ErrorResponse(detail=detail, exit_code=exit_code).model_dump_json() + "\n")
    return exit_code


def attach_negative_values(argv: list[str]) -> list[str]:
    """
    Rewrites `--y-grid -1,0.3,2` as `--y-grid=-1,0.3,2`; argparse would
    otherwise read a leading minus as the next option.
    """
    out: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in NUMERIC_FLAGS:
            value = next(tokens, None)
            if value is None:
                out.append(token)
            elif _NEGATIVE.match(value):
                out.append(f"{token}={value}")
            else:
                out.extend([token, value])
        else:
            out.append(token)
    return out


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(attach_negative_values(argv))
    except SystemExit as exc:
        # --help exits 0; usage errors have already printed argparse's message
        code = exc.code if isinstance(exc.code, int) else 2
        return code if code == 0 else _fail("Invalid command line", code)
    try:
        config = load_config(args)
        logger.info(f"Running {config.command.value}")
        return args.handler(config)
    except ScalimError as exc:
        logger.error(f"{type(exc).__name__}: {exc.detail}")
        return _fail(exc.detail, exc.exit_code)
    except ValidationError as exc:
        logger.error(f"Invalid run config: {exc}")
        return _fail(f"Invalid run config: {exc}", 2)
    except Exception as exc:
        logger.error(f"Unhandled exception: {exc}", exc_info=True)
        return _fail(f"Internal error: {exc}", 3)


if __name__ == "__main__":
    sys.exit(run())
