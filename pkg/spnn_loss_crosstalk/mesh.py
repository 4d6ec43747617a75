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
"""Compilation of weight matrices into Clements MZI layer layouts.

A layer realizes W = U·Σ·V^H. Light flows through the V^H mesh, then the
diagonal attenuator stage, then the U mesh, then a lossless output phase
screen. Column indices inside a layout are global: the V^H mesh occupies
columns 0..N-1, the attenuators column N and the U mesh columns N+1..2N.

The lossless MZI used for nulling is

  T(theta, phi) = j·e^{j·theta/2} · [[s·e^{j·phi}, c], [c·e^{j·phi}, -s]]

with s = sin(theta/2), c = cos(theta/2), i.e. `device.mzi_transfer` with
zero losses and 50:50 couplers.
"""

from __future__ import absolute_import
from __future__ import division

import collections
import json

from absl import logging
import gin
import numpy as np

from spnn_loss_crosstalk import device
from spnn_loss_crosstalk import numerics


ROLE_U = 'unitary_u'
ROLE_V = 'unitary_v'
ROLE_DIAGONAL = 'diagonal'
ROLES = (ROLE_U, ROLE_V, ROLE_DIAGONAL)

_TWO_PI = 2.0 * np.pi


class NonUnitaryError(ValueError):
  """Raised when a matrix handed to the Clements compiler is not unitary."""

  def __init__(self, residual):
    super(NonUnitaryError, self).__init__(
        'Expected a unitary matrix, got residual max|UU^H - I| = {:.3e}'.format(
            residual))
    self.residual = residual


class MziPlacement(collections.namedtuple(
    'MziPlacement', ['column', 'top_row', 'phases', 'role'])):
  """One MZI on the mesh grid.

  Attributes:
    column: int, depth position inside the layer.
    top_row: int, upper waveguide index; diagonal placements touch only this
      waveguide.
    phases: `device.PhasePair`.
    role: one of `ROLES`.
  """

  __slots__ = ()

  @property
  def rows(self):
    if self.role == ROLE_DIAGONAL:
      return (self.top_row,)
    return (self.top_row, self.top_row + 1)


def _wrap_phase(phi):
  phi = float(np.mod(phi, _TWO_PI))
  return 0.0 if phi >= _TWO_PI else phi


def ideal_mzi(theta, phi):
  """Lossless 50:50 MZI transfer matrix."""
  s = np.sin(theta / 2.0)
  c = np.cos(theta / 2.0)
  g = 1j * np.exp(0.5j * theta)
  e = np.exp(1j * phi)
  return g * np.array([[s * e, c], [c * e, -s]], dtype=np.complex128)


#-------------------------------------------------------------------------------
# Clements decomposition
#-------------------------------------------------------------------------------


def _null_from_right(u, row, m):
  """Zeroes u[row, m] by right-multiplying columns (m, m+1) with T^H."""
  a, b = u[row, m], u[row, m + 1]
  theta = 2.0 * np.arctan2(np.abs(b), np.abs(a))
  phi = np.angle(a) - np.angle(b) + np.pi
  t = ideal_mzi(theta, phi)
  u[:, [m, m + 1]] = u[:, [m, m + 1]] @ t.conj().T
  return theta, phi


def _null_from_left(u, m, col):
  """Zeroes u[m+1, col] by left-multiplying rows (m, m+1) with T."""
  a, b = u[m, col], u[m + 1, col]
  theta = 2.0 * np.arctan2(np.abs(a), np.abs(b))
  phi = np.angle(b) - np.angle(a)
  t = ideal_mzi(theta, phi)
  u[[m, m + 1], :] = t @ u[[m, m + 1], :]
  return theta, phi


def clements_decompose(u, role=ROLE_U, column_offset=0):
  """Decomposes a unitary into a rectangular Clements mesh.

  Args:
    u: array-like, N x N unitary matrix.
    role: str, role stamped on every placement.
    column_offset: int, added to every placement column.

  Returns:
    placements: list of N(N-1)/2 `MziPlacement` in light-propagation order.
    phase_screen: float64 vector of N output phases; u equals
      diag(exp(j·phase_screen)) times the product of the placements.

  Raises:
    NonUnitaryError: if `u` is not unitary to 1e-8.
  """
  u = numerics.as_complex_matrix(u, 'u')
  n = u.shape[0]
  if u.shape != (n, n):
    raise ValueError('Expected a square matrix, got {}'.format(u.shape))
  residual = numerics.unitarity_residual(u)
  if residual >= 1e-8:
    raise NonUnitaryError(residual)

  work = u.copy()
  slots = (n + 1) // 2
  front = np.zeros(max(n - 1, 0), dtype=int)
  back = np.full(max(n - 1, 0), slots - 1, dtype=int)
  if n % 2 == 1:
    back[1::2] = slots - 2

  right = []  # (pair, slot, theta, phi) in application order.
  left = []   # in nulling order; applied in reverse.
  for p in range(n - 1):
    for q in range(p + 1):
      if p % 2 == 0:
        m = p - q
        theta, phi = _null_from_right(work, n - 1 - q, m)
        right.append((m, front[m], theta, phi))
        front[m] += 1
      else:
        m = n - 2 - p + q
        theta, phi = _null_from_left(work, m, q)
        left.append((m, back[m], theta, phi))
        back[m] -= 1

  # Move every left-hand T^H through the diagonal, innermost first:
  # T^H(theta, phi)·D = D'·T(theta, phi').
  d = np.diag(work).copy()
  moved = []
  for m, slot, theta, phi in reversed(left):
    d1, d2 = d[m], d[m + 1]
    factor = -np.exp(-1j * theta)
    d[m] = factor * np.exp(-1j * phi) * d2
    d[m + 1] = factor * d2
    moved.append((m, slot, theta, np.angle(d1) - np.angle(d2)))

  placements = []
  for m, slot, theta, phi in right + moved:
    placements.append(MziPlacement(
        column_offset + 2 * slot + (m % 2), m,
        device.PhasePair(float(np.clip(theta, 0.0, np.pi)), _wrap_phase(phi)),
        role))
  phase_screen = np.mod(np.angle(d), _TWO_PI)
  return placements, phase_screen


def group_by_column(placements):
  """Returns {column: [placements]} sorted by column.

  Raises:
    ValueError: if two placements in one column share a waveguide.
  """
  columns = collections.OrderedDict()
  for placement in sorted(placements, key=lambda pl: pl.column):
    columns.setdefault(placement.column, []).append(placement)
  for column, members in columns.items():
    used = set()
    for placement in members:
      for row in placement.rows:
        if row in used:
          raise ValueError('Overlapping placements on waveguide {} in column '
                           '{}'.format(row, column))
        used.add(row)
  return columns


def clements_reconstruct(placements, n, phase_screen=None):
  """Ideal (lossless) transfer matrix of a placement list.

  Args:
    placements: iterable of two-port `MziPlacement`.
    n: int, port count.
    phase_screen: optional output phase vector.

  Returns:
    complex128 N x N unitary.

  Raises:
    ValueError: on overlapping placements or rows outside the grid.
  """
  total = np.eye(n, dtype=np.complex128)
  for _, members in group_by_column(placements).items():
    column = np.eye(n, dtype=np.complex128)
    for placement in members:
      if placement.top_row < 0 or placement.top_row + 1 >= n:
        raise ValueError('Placement rows {} outside a {}-port grid'.format(
            placement.rows, n))
      r = placement.top_row
      column[r:r + 2, r:r + 2] = ideal_mzi(placement.phases.theta,
                                           placement.phases.phi)
    total = column @ total
  if phase_screen is not None:
    total = np.exp(1j * np.asarray(phase_screen))[:, None] * total
  return total


#-------------------------------------------------------------------------------
# Diagonal stage
#-------------------------------------------------------------------------------


def attenuator_phases(ratio):
  """Phases of a single-pass attenuator whose lossless I1->O1 gain is `ratio`.

  phi is chosen so that the through amplitude is real and positive.
  """
  ratio = float(np.clip(ratio, 0.0, 1.0))
  theta = 2.0 * np.arcsin(ratio)
  phi = _wrap_phase(-np.pi / 2.0 - theta / 2.0)
  return device.PhasePair(theta, phi)


def diagonal_to_attenuators(s, column=0):
  """Realizes a nonnegative diagonal with one attenuating MZI per port.

  Args:
    s: array-like of nonnegative singular values.
    column: int, column index of the stage.

  Returns:
    placements: list of N diagonal `MziPlacement`.
    s_max: float, the normalization max(s).

  Raises:
    ValueError: on negative entries or an all-zero diagonal.
  """
  s = np.asarray(s, dtype=np.float64)
  if s.ndim != 1 or s.size == 0:
    raise ValueError('Expected a non-empty vector, got shape {}'.format(
        s.shape))
  if np.any(s < 0):
    raise ValueError('Expected nonnegative diagonal values, got {}'.format(s))
  s_max = float(np.max(s))
  if s_max == 0.0:
    raise ValueError('Degenerate layer: all diagonal values are zero.')
  placements = [MziPlacement(column, k, attenuator_phases(v / s_max),
                             ROLE_DIAGONAL) for k, v in enumerate(s)]
  return placements, s_max


#-------------------------------------------------------------------------------
# Layer layout
#-------------------------------------------------------------------------------


class LayerLayout(collections.namedtuple(
    'LayerLayout', ['n', 'v_mesh', 'sigma_stage', 'u_mesh', 'phase_screen',
                    's_max', 'gain_db', 'nau_loss_db'])):
  """Physical layout of one layer, immutable once compiled."""

  __slots__ = ()

  @property
  def placements(self):
    """All placements in light-propagation order."""
    return list(self.v_mesh) + list(self.sigma_stage) + list(self.u_mesh)

  @property
  def mzi_count(self):
    return len(self.v_mesh) + len(self.sigma_stage) + len(self.u_mesh)

  @property
  def columns(self):
    return group_by_column(self.placements)

  @property
  def sigma_deficit_db(self):
    """Gain the Σ normalization leaves to the power budget, 20·log10 s_max."""
    return 20.0 * np.log10(self.s_max)

  def to_dict(self):
    columns = []
    for column, members in self.columns.items():
      columns.append({
          'column': int(column),
          'placements': [{
              'rows': [int(r) for r in pl.rows],
              'theta': float(pl.phases.theta),
              'phi': float(pl.phases.phi),
              'role': pl.role,
          } for pl in members],
      })
    return {
        'n': int(self.n),
        'columns': columns,
        'phase_screen': [float(v) for v in self.phase_screen],
        's_max': float(self.s_max),
        'gain_db': float(self.gain_db),
        'nau_loss_db': float(self.nau_loss_db),
    }

  @classmethod
  def from_dict(cls, data):
    """Inverse of `to_dict`.

    Raises:
      ValueError: on a malformed document.
    """
    try:
      n = int(data['n'])
      meshes = {ROLE_V: [], ROLE_DIAGONAL: [], ROLE_U: []}
      for column in data['columns']:
        for item in column['placements']:
          role = item['role']
          if role not in meshes:
            raise ValueError('Unknown placement role {!r}'.format(role))
          meshes[role].append(MziPlacement(
              int(column['column']), int(item['rows'][0]),
              device.PhasePair(float(item['theta']), float(item['phi'])),
              role))
      layout = cls(n, meshes[ROLE_V], meshes[ROLE_DIAGONAL], meshes[ROLE_U],
                   np.asarray(data['phase_screen'], dtype=np.float64),
                   float(data['s_max']), float(data['gain_db']),
                   float(data['nau_loss_db']))
    except (KeyError, TypeError, IndexError) as e:
      raise ValueError('Malformed layout document: {!r}'.format(e))
    group_by_column(layout.placements)
    return layout


def save_layout(layout, path):
  """Writes a layout as JSON; floats round-trip exactly."""
  with open(path, 'w', encoding='utf-8') as f:
    json.dump(layout.to_dict(), f, indent=1)
    f.write('\n')


def load_layout(path):
  with open(path, 'r', encoding='utf-8') as f:
    return LayerLayout.from_dict(json.load(f))


def compile_layer(w, gain_db=17.0, nau_loss_db=1.0, svd_method='lapack'):
  """Compiles a square weight matrix into a `LayerLayout`.

  The V^H mesh leaves an output phase screen D_v; it commutes with Σ and is
  folded into U before U is decomposed, so a single output screen remains and
  the ideal transfer equals w / s_max.

  Args:
    w: array-like, N x N complex weight matrix.
    gain_db: float, OGU gain of the layer.
    nau_loss_db: float, NAU loss of the layer.
    svd_method: str, see `numerics.svd`.

  Returns:
    A `LayerLayout`.
  """
  w = numerics.as_complex_matrix(w, 'w')
  n = w.shape[0]
  u, s, vh = numerics.svd(w, method=svd_method)
  v_mesh, v_screen = clements_decompose(vh, ROLE_V, column_offset=0)
  sigma_stage, s_max = diagonal_to_attenuators(s, column=n)
  u_folded = u * np.exp(1j * v_screen)[None, :]
  u_mesh, phase_screen = clements_decompose(u_folded, ROLE_U,
                                            column_offset=n + 1)
  logging.debug('Compiled %dx%d layer: s_max=%.4g, %d MZIs', n, n, s_max,
                len(v_mesh) + len(sigma_stage) + len(u_mesh))
  return LayerLayout(n, v_mesh, sigma_stage, u_mesh, phase_screen, s_max,
                     float(gain_db), float(nau_loss_db))


@gin.configurable
def random_weight_matrix(n, rng, kind='real_gaussian'):
  """Random weight matrix used for the layer and network statistics.

  Args:
    n: int, port count.
    rng: `np.random.Generator`.
    kind: 'real_gaussian' (i.i.d. N(0, 1)) or 'complex_gaussian'.

  Returns:
    complex128 N x N matrix.
  """
  if kind == 'real_gaussian':
    return rng.standard_normal((n, n)).astype(np.complex128)
  elif kind == 'complex_gaussian':
    return (rng.standard_normal((n, n)) +
            1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
  else:
    raise ValueError('Expected valid kind, got {}'.format(kind))


def count_network_mzis(n, m):
  """MZIs in an M-layer network of N x N layers, MN(N-1) + MN."""
  return m * n * (n - 1) + m * n


def count_tunable_phases(n, m):
  """Two phase shifters (theta, phi) per MZI."""
  return 2 * count_network_mzis(n, m)
