"""Command-line entry point: batch scripts or an interactive toplevel."""

from __future__ import annotations

import sys

import click

from .evaluate import FUEL_ENV_VAR, default_fuel
from .session import Session, join_continuations, run_script


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--fuel", type=click.IntRange(min=1), default=None,
              help=f"Evaluation step budget (default: ${FUEL_ENV_VAR} or {default_fuel()}).")
@click.option("--script", "script", type=click.Path(dir_okay=False, allow_dash=True), default=None,
              help="Run commands from FILE ('-' for stdin) and print the transcript.")
@click.option("--keep-going", is_flag=True, help="Continue after an error instead of stopping.")
@click.option("--format", "fmt", type=click.Choice(["pretty", "canonical"]), default="pretty",
              show_default=True, help="How traces and slices are printed.")
def main(fuel: int | None, script: str | None, keep_going: bool, fmt: str) -> None:
    """Run TML commands with tracing, provenance extraction and slicing."""
    session = Session(fuel=fuel, output_format=fmt)
    if script is not None:
        try:
            with click.open_file(script, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise click.FileError(script, hint=exc.strerror) from None
        transcript, ok = run_script(session, join_continuations(lines), keep_going=keep_going)
        for line in transcript.lines:
            click.echo(line)
        sys.exit(0 if ok else 1)
    _interactive(session)


def _interactive(session: Session) -> None:
    buf = ""
    while True:
        try:
            line = input("- " if not buf else "= ")
        except EOFError:
            click.echo()
            return
        except KeyboardInterrupt:
            click.echo()
            buf = ""
            continue
        if line.rstrip().endswith("\\"):
            buf += line.rstrip()[:-1] + " "
            continue
        command, buf = buf + line, ""
        if command.strip() in (":quit", ":q"):
            return
        transcript, _ = run_script(session, [command], keep_going=True, echo=False)
        for out in transcript.lines:
            click.echo(out)


if __name__ == "__main__":  # pragma: no cover
    main()
