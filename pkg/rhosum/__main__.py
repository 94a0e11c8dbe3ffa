#!/usr/bin/python3
# -*- coding: utf-8 -*-
"""Calls main() method."""
# noqa: D100,D104

import sys
from rhosum.cli import main

if __name__ == "__main__":
    sys.exit(main())
