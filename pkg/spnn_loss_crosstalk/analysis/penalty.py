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
"""Laser power penalty and per-port aggregation.

The launch power needed on a port satisfies

  P_lsr = S_PD + IL + XPEN,  XPEN = -20·log10(1 - sqrt(P_xt / P_sig)),

where XPEN is the eye closure caused by crosstalk that interferes with the
signal. Both P_xt and P_sig scale one-for-one with the launch power, so the
ratio, and hence the penalty, is solved in closed form from a single
reference propagation.
"""

from __future__ import absolute_import
from __future__ import division

import collections

from absl import logging
import numpy as np

from spnn_loss_crosstalk import numerics
from spnn_loss_crosstalk import propagation


PENALTY_MODES = ('average', 'worst')
STATISTIC_MODES = ('loss', 'power', 'margin')

PenaltyBreakdown = collections.namedtuple(
    'PenaltyBreakdown', ['il_db', 'xp_dbm', 'xpen_db', 'sigma_deficit_db',
                         'sensitivity_dbm'])

PenaltyReport = collections.namedtuple(
    'PenaltyReport', ['per_port_penalty_dbm', 'avg_dbm', 'worst_dbm',
                      'components', 'feasible', 'mode'])


def port_statistics(values, mode='loss'):
  """Average and worst value over output ports.

  Args:
    values: non-empty sequence of per-port values.
    mode: 'loss' (dB, averaged in dB, worst is the max), 'power' (dBm,
      averaged in mW, worst is the max) or 'margin' (dB, worst is the min).

  Returns:
    (avg, worst) as floats.

  Raises:
    ValueError: on an empty input or an unknown mode.
  """
  values = np.asarray(values, dtype=np.float64).reshape(-1)
  if values.size == 0:
    raise ValueError('Expected at least one port value.')
  if mode == 'loss':
    return float(np.mean(values)), float(np.max(values))
  elif mode == 'power':
    avg = numerics.mw_to_dbm(np.mean(numerics.dbm_to_mw(values)))
    return float(avg), float(np.max(values))
  elif mode == 'margin':
    return float(np.mean(values)), float(np.min(values))
  else:
    raise ValueError('Expected mode in {}, got {}'.format(STATISTIC_MODES,
                                                          mode))


def crosstalk_eye_penalty_db(ratio):
  """−20·log10(1 − sqrt(ratio)); +inf when crosstalk reaches the signal."""
  ratio = np.asarray(ratio, dtype=np.float64)
  with np.errstate(divide='ignore', invalid='ignore'):
    opening = 1.0 - np.sqrt(ratio)
    penalty = -20.0 * np.log10(opening)
  return np.where(opening > 0.0, penalty, np.inf)


def power_penalty(spec, result, mode='worst', interference=None,
                  include_sigma_deficit=False, b=0):
  """Minimal laser power per output port of a network.

  Args:
    spec: `propagation.NetworkSpec` the result was computed with.
    result: `propagation.PropagationResult` from `network_cascade`, at the
      reference launch power `spec.input_power_dbm`.
    mode: 'worst' aligns every crosstalk phase against the signal and reports
      the worst port; 'average' uses the mean interference power.
    interference: optional `propagation.InterferenceStats` whose Monte-Carlo
      mean crosstalk replaces the analytic mean in 'average' mode.
    include_sigma_deficit: bool, add the Σ normalization deficit to every
      port.
    b: int, batch entry of `result` to use.

  Returns:
    A `PenaltyReport`; infeasible ports carry +inf.
  """
  if mode not in PENALTY_MODES:
    raise ValueError('Expected mode in {}, got {}'.format(PENALTY_MODES, mode))
  signal = np.asarray(result.signal, dtype=np.complex128)
  if signal.ndim == 2:
    signal = signal[:, b]
  p_sig = np.abs(signal)**2
  bounds = propagation.interference_bounds(result.crosstalk.sample(b), signal)
  if mode == 'worst':
    p_xt = bounds.constructive_crosstalk_mw
  elif interference is not None:
    p_xt = np.asarray(interference.mean_crosstalk_mw, dtype=np.float64)
  else:
    p_xt = bounds.mean_crosstalk_mw

  with np.errstate(divide='ignore', invalid='ignore'):
    ratio = np.where(p_sig > 0.0, p_xt / p_sig, np.inf)
  xpen = crosstalk_eye_penalty_db(ratio)
  il = np.asarray(result.per_port_il_db, dtype=np.float64)
  deficit = float(result.sigma_deficit_db)
  penalty = spec.photodetector_sensitivity_dbm + il + xpen
  if include_sigma_deficit:
    penalty = penalty + deficit
  feasible = np.isfinite(penalty)
  if not np.all(feasible):
    logging.warning('%d of %d ports have no feasible launch power',
                    int(np.sum(~feasible)), feasible.size)
  xp_dbm = numerics.mw_to_dbm(p_xt) + (penalty - spec.input_power_dbm)

  avg, worst = port_statistics(penalty, 'power')
  return PenaltyReport(
      penalty, avg, worst,
      PenaltyBreakdown(il, xp_dbm, xpen, deficit,
                       spec.photodetector_sensitivity_dbm),
      feasible, mode)


def received_eye_dbm(launch_dbm, il_db, ratio):
  """Eye opening power at a photodetector for a given launch power.

  Inverse of the penalty relation: launch − IL − XPEN.
  """
  return launch_dbm - il_db - crosstalk_eye_penalty_db(ratio)
