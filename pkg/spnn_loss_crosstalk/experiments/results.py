# coding=utf-8
# Copyright 2026 The spnn_loss_crosstalk Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Tabular result emission."""

from __future__ import absolute_import
from __future__ import division

import collections
import csv
import os

from absl import logging
import numpy as np
import pandas as pd


BOXPLOT_COLUMNS = ('min', 'q1', 'median', 'q3', 'max', 'mean')

# 17 significant digits round-trip every float64.
FLOAT_FORMAT = '%.17g'


def as_frame(table, columns=None):
  """Converts a DataFrame, a list of row dicts or a list of rows."""
  if isinstance(table, pd.DataFrame):
    return table
  if columns is None and table and isinstance(table[0], dict):
    columns = list(table[0])
  return pd.DataFrame(list(table), columns=columns)


def emit_csv(table, path, columns=None):
  """Writes a rectangular table as UTF-8 CSV.

  Fields containing separators or quotes are quoted; floats are written with
  17 significant digits and every line, the last included, ends in '\\n'.

  Args:
    table: `pd.DataFrame` or list of rows (dicts, or sequences with
      `columns`).
    path: str, destination file; missing parent directories are created.
    columns: optional header for list input; an empty list with columns
      yields a header-only file.

  Returns:
    `path`.

  Raises:
    OSError: if the path is not writable.
  """
  frame = as_frame(table, columns)
  parent = os.path.dirname(path)
  if parent and not os.path.isdir(parent):
    os.makedirs(parent)
  frame.to_csv(path, index=False, float_format=FLOAT_FORMAT,
               encoding='utf-8', lineterminator='\n',
               quoting=csv.QUOTE_MINIMAL)
  logging.info('Wrote %d rows to %s', len(frame), path)
  return path


def read_csv(path):
  """Reads back a file written by `emit_csv` with exact float values."""
  return pd.read_csv(path, float_precision='round_trip')


def boxplot_stats(values):
  """min / q1 / median / q3 / max / mean of a non-empty sample."""
  values = np.asarray(values, dtype=np.float64).reshape(-1)
  if values.size == 0:
    raise ValueError('Expected a non-empty sample.')
  q = np.percentile(values, [0.0, 25.0, 50.0, 75.0, 100.0])
  return collections.OrderedDict(zip(BOXPLOT_COLUMNS,
                                     list(q) + [float(np.mean(values))]))


def result_name(cfg, table=None):
  """File name of a result table, keyed by experiment, config digest and seed."""
  stem = '{}_{}_seed{}'.format(cfg.experiment, cfg.digest, cfg.seed)
  if table:
    stem = '{}_{}'.format(stem, table)
  return stem + '.csv'
