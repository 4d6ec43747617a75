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
"""Experiment documents: defaults, validation, overrides and echo.

An experiment document is a flat JSON object. Every key is optional and
defaults to the reference device table (G = 17 dB, L_NAU = 1 dB, P = 0 dBm,
S_PD = -11.7 dBm, X_B = -25 dB, X_C = -18 dB, ...). Values resolve in the
order defaults < document < `--set key=value` < `--seed` / `--out`.
"""

from __future__ import absolute_import
from __future__ import division

import collections
import hashlib
import json
import os

from absl import logging
import numpy as np

from spnn_loss_crosstalk import device


OUTPUT_DIR_ENV = 'SPNN_OUTPUT_DIR'
DEFAULT_OUTPUT_DIR = 'spnn_output'
RESOLVED_CONFIG_FILE = 'resolved_config.json'
SEED_FILE = 'seed.txt'

EXPERIMENTS = ('device-sweep', 'layer-stats', 'network-stats', 'power-penalty',
               'compile', 'train', 'accuracy', 'loss-sweep', 'joint-sample',
               'tolerance', 'xtalk-grid')


class ConfigError(ValueError):
  """Raised on a malformed or invalid experiment document."""


class _Field(collections.namedtuple(
    '_Field', ['name', 'kind', 'default', 'check', 'choices'])):
  __slots__ = ()


def _nonneg(v):
  return v >= 0


def _positive(v):
  return v > 0


def _non_positive(v):
  return v <= 0


def _fraction(v):
  return 0.0 <= v <= 1.0


def _open_fraction(v):
  return 0.0 < v < 1.0


_FIELDS = [
    _Field('experiment', 'str', 'device-sweep', None, EXPERIMENTS),
    # Device table.
    _Field('kappa1', 'float', 0.5, _fraction, None),
    _Field('kappa2', 'float', 0.5, _fraction, None),
    _Field('alpha_l_db', 'float', 0.1, _nonneg, None),
    _Field('alpha_m_db', 'float', 0.2, _nonneg, None),
    _Field('alpha_p_db_per_cm', 'float', 2.0, _nonneg, None),
    _Field('l_mzi_um', 'float', 300.0, _nonneg, None),
    _Field('xb_db', 'float', -25.0, _non_positive, None),
    _Field('xc_db', 'float', -18.0, _non_positive, None),
    _Field('xtalk_sigma_frac', 'float', 0.05, _nonneg, None),
    # Layer and network.
    _Field('n', 'int', 8, lambda v: v >= 2, None),
    _Field('m', 'int', 1, lambda v: v >= 1, None),
    _Field('gain_db', 'float', 17.0, None, None),
    _Field('nau_loss_db', 'float', 1.0, _nonneg, None),
    _Field('launch_power_dbm', 'float', 0.0, None, None),
    _Field('sensitivity_dbm', 'float', -11.7, None, None),
    _Field('weights', 'str', 'random', None, None),
    _Field('matrix_kind', 'str', 'real_gaussian', None,
           ('real_gaussian', 'complex_gaussian')),
    _Field('svd_method', 'str', 'lapack', None, ('lapack', 'jacobi')),
    _Field('n_matrices', 'int', 100, _positive, None),
    _Field('n_grid', 'int_list', (8, 16, 32, 64), lambda v: v >= 2, None),
    _Field('m_grid', 'int_list', (1, 2, 3), _positive, None),
    _Field('trials', 'int', 10000, _positive, None),
    _Field('sweep_points', 'int', 101, lambda v: v >= 2, None),
    _Field('penalty_mode', 'str', 'both', None, ('average', 'worst', 'both')),
    # Dataset and training.
    _Field('dataset', 'str', 'synthetic', None, ('synthetic', 'idx')),
    _Field('images_path', 'str', '', None, None),
    _Field('labels_path', 'str', '', None, None),
    _Field('n_samples', 'int', 2000, _positive, None),
    _Field('test_fraction', 'float', 0.25, _open_fraction, None),
    _Field('pixel_noise', 'float', 0.1, _nonneg, None),
    _Field('epochs', 'int', 100, _nonneg, None),
    # Accuracy.
    _Field('crosstalk', 'bool', False, None, None),
    _Field('resample', 'str', 'frozen', None, ('frozen', 'per_call')),
    _Field('sweep_axis', 'str', 'alpha_L', None,
           ('alpha_L', 'alpha_m', 'alpha_prop')),
    _Field('sweep_grid', 'float_list', (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3,
                                        0.35, 0.4), _nonneg, None),
    _Field('joint_instances', 'int', 1000, _positive, None),
    _Field('loc_mode', 'str', 'minimum', None, ('minimum', 'zero')),
    _Field('max_drop_pct', 'float', 5.0, _nonneg, None),
    _Field('tolerance_iterations', 'int', 12, _positive, None),
    _Field('xb_grid', 'float_list', (-40.0, -35.0, -30.0, -25.0, -20.0),
           _non_positive, None),
    _Field('xc_grid', 'float_list', (-35.0, -30.0, -25.0, -20.0, -18.0),
           _non_positive, None),
    _Field('alpha_mode', 'str', 'minimum', None,
           ('zero', 'minimum', 'average', 'worst')),
    # Run.
    _Field('seed', 'int', 0, lambda v: 0 <= v < 2**64, None),
    _Field('output_dir', 'str', '', None, None),
]

_FIELD_MAP = collections.OrderedDict((f.name, f) for f in _FIELDS)

# Accepted spellings that map onto the canonical keys.
_ALIASES = {'xB_db': 'xb_db', 'xC_db': 'xc_db', 'N': 'n', 'M': 'm'}

_MZI_KEYS = ('kappa1', 'kappa2', 'alpha_l_db', 'alpha_m_db',
             'alpha_p_db_per_cm', 'l_mzi_um', 'xb_db', 'xc_db',
             'xtalk_sigma_frac')


class ExperimentConfig(collections.namedtuple(
    'ExperimentConfig', list(_FIELD_MAP))):
  """Immutable, fully resolved experiment configuration."""

  __slots__ = ()

  def mzi_params(self):
    """The `device.MziParams` described by this config."""
    return device.MziParams(
        *[float(getattr(self, key)) for key in _MZI_KEYS]).validate()

  def to_json(self):
    """Canonical JSON text, sorted keys and a trailing newline."""
    return json.dumps(self._asdict(), sort_keys=True, indent=2) + '\n'

  @property
  def digest(self):
    """Short hash of the canonical JSON without the output directory."""
    text = self._replace(output_dir='').to_json()
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:12]


def default_config():
  """Field defaults.

  The device table comes from `device.make_mzi_params`, so gin bindings of
  that factory change the defaults of every document.
  """
  defaults = {f.name: f.default for f in _FIELDS}
  defaults.update(device.make_mzi_params()._asdict())
  return ExperimentConfig(**defaults)


def _coerce(field, value):
  """Converts a JSON value for `field`; raises ConfigError on a bad type."""
  def bad(expected):
    return ConfigError('Field {!r}: expected {}, got {!r}'.format(
        field.name, expected, value))

  if field.kind == 'str':
    if not isinstance(value, str):
      raise bad('a string')
    return value
  if field.kind == 'bool':
    if not isinstance(value, bool):
      raise bad('true or false')
    return value
  if field.kind == 'int':
    if isinstance(value, bool) or not isinstance(value, int):
      raise bad('an integer')
    return value
  if field.kind == 'float':
    if isinstance(value, bool) or not isinstance(value, (int, float)):
      raise bad('a number')
    return float(value)
  if field.kind in ('int_list', 'float_list'):
    if not isinstance(value, (list, tuple)) or not value:
      raise bad('a non-empty list')
    element = _Field(field.name, field.kind[:-len('_list')], None, None, None)
    return tuple(_coerce(element, v) for v in value)
  raise AssertionError('Unknown field kind {}'.format(field.kind))


def _check(field, value):
  values = value if isinstance(value, tuple) else (value,)
  if field.choices is not None and value not in field.choices:
    raise ConfigError('Field {!r}: expected one of {}, got {!r}'.format(
        field.name, list(field.choices), value))
  if field.check is not None:
    for v in values:
      if np.isnan(v) or not field.check(v):
        raise ConfigError('Field {!r}: value {!r} is out of range'.format(
            field.name, v))


def _merge(base, updates, origin):
  """Applies a dict of raw updates to an `ExperimentConfig`."""
  resolved = base._asdict()
  for key, value in updates.items():
    key = _ALIASES.get(key, key)
    if key not in _FIELD_MAP:
      raise ConfigError('{}: unknown key {!r}'.format(origin, key))
    field = _FIELD_MAP[key]
    value = _coerce(field, value)
    _check(field, value)
    resolved[key] = value
  return validate(ExperimentConfig(**resolved))


def validate(cfg):
  """Cross-field checks.

  Returns:
    `cfg`.

  Raises:
    ConfigError: if X_B > X_C or an experiment needs a missing path.
  """
  if not cfg.xb_db <= cfg.xc_db:
    raise ConfigError(
        'Fields xb_db/xc_db: expected xb_db <= xc_db, got {} > {}'.format(
            cfg.xb_db, cfg.xc_db))
  if cfg.dataset == 'idx' and not (cfg.images_path and cfg.labels_path):
    raise ConfigError('Field dataset: idx needs images_path and labels_path')
  try:
    cfg.mzi_params()
  except ValueError as e:
    raise ConfigError(str(e))
  return cfg


def parse_config(text, origin='<string>'):
  """Parses a JSON document into an `ExperimentConfig`.

  Args:
    text: str, the document; empty or whitespace means all defaults.
    origin: str, used in error messages.

  Returns:
    A validated `ExperimentConfig`.

  Raises:
    ConfigError: with the line and column of a syntax error, or naming the
      offending field.
  """
  if not text.strip():
    return default_config()
  try:
    data = json.loads(text)
  except ValueError as e:
    raise ConfigError('{}: malformed JSON at line {} column {}: {}'.format(
        origin, getattr(e, 'lineno', '?'), getattr(e, 'colno', '?'),
        getattr(e, 'msg', str(e))))
  if not isinstance(data, dict):
    raise ConfigError('{}: expected a JSON object at the top level'.format(
        origin))
  return _merge(default_config(), data, origin)


def load_config(path):
  """Reads and validates an experiment document from `path`."""
  try:
    with open(path, 'r', encoding='utf-8') as f:
      text = f.read()
  except (IOError, OSError) as e:
    raise ConfigError('Cannot read config {}: {}'.format(path, e))
  cfg = parse_config(text, origin=path)
  logging.info('Loaded config %s (digest %s)', path, cfg.digest)
  return cfg


def parse_override(assignment):
  """Splits `key=value`; the value is JSON if it parses, else a string."""
  if '=' not in assignment:
    raise ConfigError('Expected key=value, got {!r}'.format(assignment))
  key, raw = assignment.split('=', 1)
  try:
    value = json.loads(raw)
  except ValueError:
    value = raw
  return key.strip(), value


def resolve_config(path=None, overrides=(), seed=None, output_dir=None):
  """Resolves the configuration of a run.

  Args:
    path: optional str, JSON document.
    overrides: iterable of 'key=value' strings.
    seed: optional int, wins over the document and overrides.
    output_dir: optional str, wins over the document and overrides.

  Returns:
    A validated `ExperimentConfig` whose `output_dir` is never empty.
  """
  cfg = load_config(path) if path else default_config()
  updates = collections.OrderedDict(parse_override(o) for o in overrides)
  if updates:
    cfg = _merge(cfg, updates, '--set')
  final = {}
  if seed is not None:
    final['seed'] = int(seed)
  if output_dir:
    final['output_dir'] = output_dir
  if final:
    cfg = _merge(cfg, final, 'flags')
  if not cfg.output_dir:
    cfg = cfg._replace(
        output_dir=os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))
  return cfg


def write_resolved(cfg, output_dir=None):
  """Writes resolved_config.json and seed.txt; returns the config path."""
  output_dir = output_dir or cfg.output_dir
  if not os.path.isdir(output_dir):
    os.makedirs(output_dir)
  path = os.path.join(output_dir, RESOLVED_CONFIG_FILE)
  with open(path, 'w', encoding='utf-8', newline='\n') as f:
    f.write(cfg.to_json())
  with open(os.path.join(output_dir, SEED_FILE), 'w', encoding='utf-8',
            newline='\n') as f:
    f.write('{}\n'.format(cfg.seed))
  return path
