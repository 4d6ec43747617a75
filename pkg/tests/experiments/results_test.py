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
"""Tests for spnn_loss_crosstalk.experiments.results."""

from __future__ import absolute_import
from __future__ import division

import collections
import os

from absl.testing import absltest
import pandas as pd

from spnn_loss_crosstalk.experiments import config
from spnn_loss_crosstalk.experiments import results


class EmitCsvTest(absltest.TestCase):

  def setUp(self):
    super(EmitCsvTest, self).setUp()
    self.out = self.create_tempdir().full_path

  def _read_text(self, path):
    with open(path, 'rb') as f:
      return f.read().decode('utf-8')

  def test_header_only(self):
    path = results.emit_csv([], os.path.join(self.out, 'empty.csv'),
                            columns=['a', 'b'])
    self.assertEqual(self._read_text(path), 'a,b\n')

  def test_quoting(self):
    rows = [collections.OrderedDict([('name', 'a,b'), ('value', 1.5)]),
            collections.OrderedDict([('name', 'say "hi"'), ('value', 2.0)])]
    path = results.emit_csv(rows, os.path.join(self.out, 'quoted.csv'))
    self.assertEqual(self._read_text(path),
                     'name,value\n"a,b",1.5\n"say ""hi""",2\n')

  def test_floats_round_trip(self):
    values = [0.1, 1.0 / 3.0, -25.123456789012345, 1e-300]
    path = results.emit_csv(pd.DataFrame({'x': values}),
                            os.path.join(self.out, 'floats.csv'))
    self.assertEqual(list(results.read_csv(path)['x']), values)

  def test_creates_parent_directories(self):
    path = os.path.join(self.out, 'a', 'b', 't.csv')
    results.emit_csv([(1, 2)], path, columns=['x', 'y'])
    self.assertTrue(os.path.exists(path))


class BoxplotTest(absltest.TestCase):

  def test_stats(self):
    stats = results.boxplot_stats([5.0, 1.0, 3.0, 2.0, 4.0])
    self.assertEqual(list(stats), list(results.BOXPLOT_COLUMNS))
    self.assertEqual(list(stats.values()), [1.0, 2.0, 3.0, 4.0, 5.0, 3.0])

  def test_empty(self):
    with self.assertRaises(ValueError):
      results.boxplot_stats([])


class ResultNameTest(absltest.TestCase):

  def test_name(self):
    cfg = config.default_config()._replace(experiment='layer-stats', seed=4)
    self.assertEqual(results.result_name(cfg),
                     'layer-stats_{}_seed4.csv'.format(cfg.digest))
    self.assertEqual(results.result_name(cfg, 'ports'),
                     'layer-stats_{}_seed4_ports.csv'.format(cfg.digest))


if __name__ == '__main__':
  absltest.main()
