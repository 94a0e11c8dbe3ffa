# -*- coding: utf-8 -*-
"""File-based store for found recurrences."""
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List

from rhosum.exact_arith import ground_field
from rhosum.hol_core import Recurrence
from rhosum.hyperterm import to_rational
from rhosum.parser import parse_expr
from rhosum.sum_expr import render

STORE_VERSION = 1


@dataclass
class RecurrenceRecord:
    """Stored recurrence / data model.

    Coefficients and right-hand side are kept in the input grammar, so that a record can be read
    back with the parser.
    """

    expression: str
    variable: str
    coefficients: List[str]
    rhs: str
    start: int = 0
    parameters: List[str] = field(default_factory=list)
    store_version: int = STORE_VERSION


def to_record(expression: str, recurrence: Recurrence) -> RecurrenceRecord:
    """Record of ``recurrence`` found for the input ``expression``."""
    coefficients = [render(recurrence.coefficient_expr(i)) for i in range(len(recurrence.coeffs))]
    return RecurrenceRecord(expression, recurrence.variable, coefficients, render(recurrence.rhs),
                            recurrence.start, list(recurrence.ground.params))


def from_record(record: RecurrenceRecord) -> Recurrence:
    """The recurrence of a record; RuntimeError if a coefficient is not rational in the variable."""
    gf = ground_field(tuple(record.parameters))
    coeffs = []
    for text in record.coefficients:
        c = to_rational(gf, parse_expr(text), record.variable)
        if c is None:
            raise RuntimeError(f"Invalid recurrence store - coefficient is not rational: {text}")
        coeffs.append(c)
    if not coeffs:
        raise RuntimeError("Invalid recurrence store - no coefficients!")
    return Recurrence(record.variable, gf, coeffs, parse_expr(record.rhs), record.start)


class RecurrenceStore:
    """File-based store (JSON) for one recurrence."""

    # default file name of the store file.
    STORE_FILE = "recurrence.json"

    def __init__(self, store_file: Path = Path(STORE_FILE)):
        """Initialize store."""
        self.store_filepath = Path(store_file)
        logging.debug("store_file: %s", self.store_filepath.resolve())

    def update(self, data: RecurrenceRecord):
        """Write a record to the store."""
        logging.info("Updating recurrence store %s ...", self.store_filepath)
        self.__write(data)

    def load(self) -> RecurrenceRecord | None:
        """Load the stored record."""
        if self.store_filepath.is_file():
            data = self.__read()
            self.__check_version(data)
            return data
        # else
        return None

    def invalidate(self):
        """Remove the stored record."""
        if self.store_filepath.is_file():
            logging.info("Invalidating recurrence store by removing the file.")
            os.unlink(self.store_filepath)

    def __write(self, data: RecurrenceRecord):
        with self.store_filepath.open("w", encoding="utf8") as fout:
            json.dump(asdict(data), fout, indent=4)

    def __read(self) -> RecurrenceRecord:
        with self.store_filepath.open("r", encoding="utf8") as fin:
            try:
                data_dict = json.load(fin)
            except json.JSONDecodeError as ex:
                raise RuntimeError("Invalid recurrence store - not JSON!", ex) from ex
        try:
            data = RecurrenceRecord(
                expression=data_dict["expression"],
                variable=data_dict["variable"],
                coefficients=list(data_dict["coefficients"]),
                rhs=data_dict["rhs"],
                start=int(data_dict.get("start", 0)),
                parameters=list(data_dict.get("parameters", [])),
                store_version=data_dict.get("store_version"),
            )
        except (KeyError, TypeError, ValueError) as ex:
            raise RuntimeError("Invalid recurrence store - missing field!", ex) from ex
        return data

    @staticmethod
    def __check_version(data):
        try:
            version = int(data.store_version)
            logging.debug("Store version: %d", version)
        except Exception as ex:
            raise RuntimeError("Invalid recurrence store - could not read version field!", ex) from ex
        if version != STORE_VERSION:
            raise RuntimeError(f"Invalid recurrence store version! expected:{STORE_VERSION}, actual:{version}")
