#!/usr/bin/env python3
"""
main.py: entry point for the idlab command-line driver.

Loads IDLAB_* settings from a local .env file, then hands over to the click
command group. Run `python main.py --help` for the list of subcommands.
"""
from dotenv import load_dotenv

from src.Services.cli.commands import cli

# Load environment variables from .env
load_dotenv()


if __name__ == "__main__":
    cli(prog_name="idlab")
