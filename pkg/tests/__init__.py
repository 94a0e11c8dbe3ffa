# -*- coding: utf-8 -*-
"""Unit Tests."""
