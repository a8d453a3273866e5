# app.py — command-line entry point; every command family lives in routes/

import click

from routes.build_routes import build_commands
from routes.torelli_routes import torelli_commands
from routes.tropical_routes import tropical_commands
from routes.verify_routes import verify_commands


@click.group()
def cli():
    """Quasistable pseudo-divisor posets of graphs and their Torelli theorems."""


for command in (*build_commands, *torelli_commands, *tropical_commands, *verify_commands):
    cli.add_command(command)

if __name__ == "__main__":
    cli()
