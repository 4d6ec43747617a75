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
"""The entry point for running loss and crosstalk experiments.

Usage:
  spnn-experiment <command> [--config=exp.json] [--seed=N] [--out=DIR]
      [--set key=value ...] [--gin_files=...] [--gin_bindings=...]

where <command> is one of device-sweep, layer-stats, network-stats,
power-penalty, compile, train, accuracy, loss-sweep, joint-sample, tolerance,
xtalk-grid.
"""

from __future__ import absolute_import
from __future__ import division

import sys

from absl import app
from absl import flags
from absl import logging

from spnn_loss_crosstalk import numerics
from spnn_loss_crosstalk.analysis import trainer
from spnn_loss_crosstalk.experiments import config
from spnn_loss_crosstalk.experiments import dataset
from spnn_loss_crosstalk.experiments import run_experiment

FLAGS = flags.FLAGS

flags.DEFINE_string('config', None,
                    'Path to a JSON experiment document. Missing keys take '
                    'the reference-table defaults.')
flags.DEFINE_integer('seed', None, 'Master seed; overrides the document.')
flags.DEFINE_string('out', None,
                    'Output directory; overrides the document. Defaults to '
                    '${} or ./{}.'.format(config.OUTPUT_DIR_ENV,
                                          config.DEFAULT_OUTPUT_DIR))
flags.DEFINE_multi_string('set', [],
                          'Per-key overrides of the document, e.g. '
                          '"n=16" or "xb_grid=[-30,-25]".')
flags.DEFINE_multi_string(
    'gin_files', [],
    'List of paths to gin configuration files (e.g.'
    '"configs/spnn_reference.gin").')
flags.DEFINE_multi_string(
    'gin_bindings', [],
    'Gin bindings to override the values set in the config files '
    '(e.g. "make_crosstalk_model.leak_reference=\'launch\'").')

# Errors reported with the resolved config and a non-zero exit status.
_RUN_ERRORS = (config.ConfigError, dataset.IdxFormatError,
               numerics.ConvergenceError, trainer.TrainingError, ValueError,
               IOError, OSError)


def launch_experiment(command):
  """Launches the experiment.

  Specifically:
  - Load the gin configs and bindings.
  - Resolve the experiment document, overrides, seed and output directory.
  - Run the experiment and write its tables.

  Args:
    command: str, the experiment to run.

  Returns:
    int, the process exit status.
  """
  run_experiment.load_gin_configs(FLAGS.gin_files, FLAGS.gin_bindings)
  overrides = list(FLAGS.set) + ['experiment={}'.format(command)]
  try:
    cfg = config.resolve_config(FLAGS.config, overrides, FLAGS.seed, FLAGS.out)
  except config.ConfigError as e:
    logging.error('Invalid configuration: %s', e)
    return 2
  try:
    run_experiment.run_experiment(cfg)
  except _RUN_ERRORS as e:
    logging.error('Experiment %s failed: %s\nResolved config:\n%s',
                  command, e, cfg.to_json())
    return 1
  return 0


def main(argv):
  """Runs the command named by the single positional argument.

  Args:
    argv: Arguments left after flag parsing.
  """
  if len(argv) != 2:
    raise app.UsageError('Expected one command in {}, got {}'.format(
        list(config.EXPERIMENTS), argv[1:]))
  sys.exit(launch_experiment(argv[1]))


def run_main():
  app.run(main)


if __name__ == '__main__':
  run_main()
