#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r"""rhosum - Recurrences for nested definite sums.

Finds a linear recurrence in the distinguished parameter for a nested definite sum, given in
the Mathematica-like input grammar, e.g.

    Sum[Binomial[n,k],{k,0,n}]
    Sum[Sum[Binomial[k,j]*S[1,j]^2,{j,0,k}]*Binomial[n,k],{k,0,n}]

Commands:
    find       Find and verify a recurrence, print it and optionally store it as JSON.
    telescope  Print the telescoping certificate (c1, ..., cd, G) of the outermost sum.
    verify     Check a stored recurrence against exact values of the sum.

Exit codes: 0 ok, 1 verification failed, 2 no solution, 3 invalid input, 4 time budget exhausted.

Usage:
  rhosum find [options] [--output=FILE] (<expression> | --file=FILE)
  rhosum telescope [options] [--summands=D] (<expression> | --file=FILE)
  rhosum verify [options] <store> [<expression> | --file=FILE]
  rhosum -h | --help
  rhosum --version

Arguments:
  <expression>          The nested sum, e.g. "Sum[1,{k,0,n}]".
  <store>               A JSON file written by "find --output".

Options:
  -f --file=FILE        Read the sum from a UTF-8 text file.
  --param=NAME          The distinguished parameter (default: from the outermost upper bound).
  --tactic=T            Telescoping tactic: rpt1, rpt2, rpt3, rpt4 or ladder [default: ladder]
  --max-order=D         Largest number of shifted summands [default: 6]
  --delta-limit=N       Largest number of summands for cross-shift rules.
  --time-budget=S       Time budget in seconds, 0 for none [default: 600]
  --verify-window=W     Verification window as START:LENGTH or LENGTH [default: 0:21]
  --strict              Fail instead of keeping definite sums on the right-hand side.
  --format=F            Output format: human or sexp [default: human]
  --no-reduce           Skip the order reduction of inner sums.
  --kernel-radius=R     Largest exponent of Pi monomials tried as homogeneous solutions [default: 3]
  -d --summands=D       Number of shifted summands to telescope [default: 1]
  -o --output=FILE      Store the found recurrence in a JSON file.
  -v --verbose          Be verbose.
  -h --help             Show this screen.
  --version             Show version.
"""
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from docopt import docopt

from rhosum.config import RunConfig
from rhosum.errors import EXIT_OK, EXIT_PARSE_ERROR, EXIT_VERIFY_FAILED, NoSolution, RhosumError
from rhosum.multisum import find_recurrence, telescope
from rhosum.parser import parse
from rhosum.recurrencestore import RecurrenceStore, from_record, to_record
from rhosum.serialize import render_recurrence
from rhosum.utils.mylogging import setup_logging
from rhosum.verify import verify_recurrence

__version__ = "1.0.0"
__date__ = "2024-12-02"
__updated__ = "2025-03-14"
__author__ = "Ixtalo"
__license__ = "AGPL-3.0+"
__email__ = "ixtalo@gmail.com"
__status__ = "Development"

"""Tactics tried in turn by "telescope" when the ladder is selected."""
TELESCOPE_LADDER = ("rpt1", "rpt3", "rpt4")
# debug switch
DEBUG = bool(os.environ.get("DEBUG", "").lower() in ("1", "true", "yes"))


def read_input(arguments) -> str:
    """The sum from the command line or from --file."""
    if arguments.get("--file"):
        return Path(arguments["--file"]).read_text(encoding="utf8").strip()
    return str(arguments["<expression>"]).strip()


def cmd_find_recurrence(text: str, config: RunConfig, param: Optional[str] = None,
                        output: Optional[Path] = None) -> int:
    """Find, verify and print a recurrence for the sum ``text``."""
    spec = parse(text, distinguished=param)
    recurrence, report = find_recurrence(spec, config)
    for line in report.lines():
        logging.info(line)
    print(render_recurrence(recurrence, config.output_format))
    if output is not None:
        RecurrenceStore(output).update(to_record(text, recurrence))
    return EXIT_OK


def cmd_telescope(text: str, d: int, config: RunConfig, param: Optional[str] = None) -> int:
    """Print c_1, ..., c_d and the certificate G for the outermost sum of ``text``."""
    spec = parse(text, distinguished=param)
    tactics = TELESCOPE_LADDER if config.escalate else config.ladder
    failure = None
    for tactic in tactics:
        try:
            certificate = telescope(spec, d, tactic, config)
        except NoSolution as ex:
            logging.info("%s: %s", tactic, ex)
            failure = ex
            continue
        print(f"tactic: {certificate.tactic}")
        for line in certificate.lines():
            print(line)
        print(f"certificate checked at {certificate.checked} points")
        return EXIT_OK
    raise failure


def cmd_verify(store: Path, text: Optional[str], config: RunConfig, param: Optional[str] = None) -> int:
    """Check the recurrence stored in ``store`` against the sum, by default the one it was found for."""
    record = RecurrenceStore(store).load()
    if record is None:
        raise ValueError(f"no recurrence store at {store}")
    recurrence = from_record(record)
    spec = parse(text or record.expression, distinguished=param or record.variable)
    config.check_window(recurrence.order)
    report = verify_recurrence(spec, recurrence, config)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_VERIFY_FAILED


def run(arguments) -> int:
    """Dispatch a parsed command line."""
    config = RunConfig.from_arguments(arguments)
    param = arguments.get("--param")
    if arguments["find"]:
        output = Path(arguments["--output"]) if arguments.get("--output") else None
        return cmd_find_recurrence(read_input(arguments), config, param, output)
    if arguments["telescope"]:
        return cmd_telescope(read_input(arguments), int(arguments["--summands"]), config, param)
    text = read_input(arguments) if arguments.get("<expression>") or arguments.get("--file") else None
    return cmd_verify(Path(arguments["<store>"]), text, config, param)


def main():
    """Run the program's main method."""
    arguments = docopt(__doc__, version=f"rhosum {__version__}")

    # setup logging
    setup_logging(level=logging.DEBUG if arguments["--verbose"] or DEBUG else logging.INFO)
    logging.debug("arguments: %s", arguments)

    try:
        return run(arguments)
    except RhosumError as ex:
        logging.error("%s: %s", type(ex).__name__, ex)
        return ex.exit_code
    except (ValueError, RuntimeError, OSError) as ex:
        logging.error("Invalid input: %s", ex)
        return EXIT_PARSE_ERROR


if __name__ == '__main__':
    if DEBUG:
        sys.argv.append('--verbose')
    if os.environ.get("PROFILE", "").lower() in ("true", "1", "yes"):
        import cProfile
        import pstats
        profile_filename = f"{__file__}.profile"    # pylint: disable=invalid-name
        cProfile.run("main()", profile_filename)
        with open(f"{profile_filename}.txt", "w", encoding="utf8") as statsfp:
            profile_stats = pstats.Stats(profile_filename, stream=statsfp)
            stats = profile_stats.strip_dirs().sort_stats("cumulative")
            stats.print_stats()
        sys.exit(0)
    sys.exit(main())
