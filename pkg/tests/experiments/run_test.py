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
"""Tests for the spnn-experiment entry point."""

from __future__ import absolute_import
from __future__ import division

import os

from absl import app
from absl import flags
from absl.testing import absltest
from absl.testing import flagsaver
import gin

from spnn_loss_crosstalk.experiments import config
from spnn_loss_crosstalk.experiments import run

FLAGS = flags.FLAGS


class LaunchExperimentTest(absltest.TestCase):

  def setUp(self):
    super(LaunchExperimentTest, self).setUp()
    if not FLAGS.is_parsed():
      FLAGS.mark_as_parsed()
    self.out = self.create_tempdir().full_path

  def tearDown(self):
    gin.clear_config()
    super(LaunchExperimentTest, self).tearDown()

  @flagsaver.flagsaver
  def test_success(self):
    FLAGS.out = self.out
    FLAGS.seed = 3
    FLAGS.set = ['trials=20', 'sweep_points=3']
    self.assertEqual(run.launch_experiment('device-sweep'), 0)
    names = os.listdir(self.out)
    self.assertIn(config.RESOLVED_CONFIG_FILE, names)
    self.assertTrue(any(n.startswith('device-sweep_') and
                        n.endswith('_seed3.csv') for n in names))

  @flagsaver.flagsaver
  def test_document_and_overrides(self):
    path = self.create_tempfile('exp.json', content='{"sweep_points": 4, '
                                '"trials": 5, "seed": 8}').full_path
    FLAGS.config = path
    FLAGS.out = self.out
    FLAGS.set = ['sweep_points=2']
    self.assertEqual(run.launch_experiment('device-sweep'), 0)
    with open(os.path.join(self.out, config.RESOLVED_CONFIG_FILE)) as f:
      cfg = config.parse_config(f.read())
    self.assertEqual((cfg.sweep_points, cfg.trials, cfg.seed), (2, 5, 8))

  @flagsaver.flagsaver
  def test_invalid_config(self):
    FLAGS.out = self.out
    FLAGS.set = ['xb_db=-10']
    self.assertEqual(run.launch_experiment('device-sweep'), 2)
    self.assertEmpty(os.listdir(self.out))

  @flagsaver.flagsaver
  def test_run_error(self):
    FLAGS.out = self.out
    FLAGS.set = ['weights=/nonexistent/weights.npz']
    self.assertEqual(run.launch_experiment('compile'), 1)

  def test_main_needs_one_command(self):
    with self.assertRaises(app.UsageError):
      run.main(['spnn-experiment'])
    with self.assertRaises(app.UsageError):
      run.main(['spnn-experiment', 'train', 'accuracy'])


if __name__ == '__main__':
  absltest.main()
