# -*- coding: utf-8 -*-
# noqa: D104
