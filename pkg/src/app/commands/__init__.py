# src.app.commands package: one module per CLI command
from . import apply, catalog, certify, limit_study

COMMANDS = (apply, certify, limit_study, catalog)
