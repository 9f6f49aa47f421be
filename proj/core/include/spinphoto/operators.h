// Copyright 2026 The spinphoto Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPINPHOTO_OPERATORS_H_
#define SPINPHOTO_OPERATORS_H_

#include <complex>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "spinphoto/spin_system.h"

namespace spinphoto {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using SparseOp = Eigen::SparseMatrix<Complex>;

// Basis convention: computational index bit (n - 1 - k) holds spin k, so spin 0
// is the leftmost Kronecker factor. A clear bit is spin-up (m = +1/2).
inline int SpinMask(int n, int k) { return 1 << (n - 1 - k); }

/// Single-spin and collective spin-1/2 operators for an n-spin cluster.
struct SpinOperators {
  int n = 0;
  std::vector<SparseOp> ix, iy, iz;
  SparseOp fx, fy, fz;

  int dim() const { return 1 << n; }
  /// F+ = Fx + i Fy.
  SparseOp Raising() const;
};

/// Throws ValidationError unless 1 <= n <= kMaxSpins.
SpinOperators build_operators(int n);

/// Secular dipolar Hamiltonian in Hz:
///   sum_{i<j} d_ij (2 Iz_i Iz_j - Ix_i Ix_j - Iy_i Iy_j) + sum_i offset_i Iz_i.
/// It is real and commutes with Fz; the commutator norm is checked before
/// returning.
SparseOp build_hamiltonian(const SpinSystem& sys);

/// Deviation density matrix of a cluster.
struct DensityState {
  int n = 0;
  CMatrix matrix;

  int dim() const { return 1 << n; }
  Complex Trace() const { return matrix.trace(); }
  /// max |rho - rho^dagger| elementwise.
  double HermiticityError() const;
};

/// High-temperature deviation state Fz / 2^n.
DensityState thermal_state(const SpinSystem& sys);

/// Largest elementwise magnitude of A*B - B*A.
double CommutatorNorm(const SparseOp& a, const SparseOp& b);

}  // namespace spinphoto

#endif  // SPINPHOTO_OPERATORS_H_
