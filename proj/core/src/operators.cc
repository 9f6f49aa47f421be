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

#include "spinphoto/operators.h"

#include <algorithm>
#include <cmath>

#include "spinphoto/error.h"

namespace spinphoto {
namespace {

using Triplet = Eigen::Triplet<Complex>;

SparseOp FromTriplets(int dim, const std::vector<Triplet>& t) {
  SparseOp m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SparseOp SpinOperators::Raising() const {
  return fx + Complex(0.0, 1.0) * fy;
}

SpinOperators build_operators(int n) {
  if (n < 1 || n > kMaxSpins) {
    throw ValidationError("operator set size " + std::to_string(n) +
                          " outside [1, " + std::to_string(kMaxSpins) + "]");
  }
  const int dim = 1 << n;
  SpinOperators ops;
  ops.n = n;
  const Complex half(0.5, 0.0);
  const Complex mhalf_i(0.0, -0.5);
  const Complex phalf_i(0.0, 0.5);
  std::vector<Triplet> fx, fy, fz;
  for (int k = 0; k < n; ++k) {
    const int mask = SpinMask(n, k);
    std::vector<Triplet> x, y, z;
    x.reserve(dim);
    y.reserve(dim);
    z.reserve(dim);
    for (int i = 0; i < dim; ++i) {
      const int j = i ^ mask;
      const bool up = (i & mask) == 0;
      x.emplace_back(i, j, half);
      // <up|Iy|down> = -i/2, <down|Iy|up> = +i/2
      y.emplace_back(i, j, up ? mhalf_i : phalf_i);
      z.emplace_back(i, i, up ? half : -half);
    }
    fx.insert(fx.end(), x.begin(), x.end());
    fy.insert(fy.end(), y.begin(), y.end());
    fz.insert(fz.end(), z.begin(), z.end());
    ops.ix.push_back(FromTriplets(dim, x));
    ops.iy.push_back(FromTriplets(dim, y));
    ops.iz.push_back(FromTriplets(dim, z));
  }
  ops.fx = FromTriplets(dim, fx);
  ops.fy = FromTriplets(dim, fy);
  ops.fz = FromTriplets(dim, fz);
  return ops;
}

SparseOp build_hamiltonian(const SpinSystem& sys) {
  sys.Validate();
  const int n = sys.n;
  const int dim = 1 << n;
  // Diagonal: 2 d Iz Iz + offset Iz. Off-diagonal: -d (IxIx + IyIy) is the
  // flip-flop -d/2 (I+I- + I-I+), which swaps antiparallel pairs.
  std::vector<Triplet> t;
  for (int s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      const double mi = (s & SpinMask(n, i)) ? -0.5 : 0.5;
      diag += sys.offsets(i) * mi;
      for (int j = i + 1; j < n; ++j) {
        const double d = sys.couplings(i, j);
        if (d == 0.0) continue;
        const double mj = (s & SpinMask(n, j)) ? -0.5 : 0.5;
        diag += 2.0 * d * mi * mj;
        if (mi != mj) {
          t.emplace_back(s ^ SpinMask(n, i) ^ SpinMask(n, j), s,
                         Complex(-0.5 * d, 0.0));
        }
      }
    }
    if (diag != 0.0) t.emplace_back(s, s, Complex(diag, 0.0));
  }
  SparseOp h = FromTriplets(dim, t);
  const SpinOperators ops = build_operators(n);
  const double scale = std::max(1.0, sys.couplings.cwiseAbs().maxCoeff() +
                                         sys.offsets.cwiseAbs().maxCoeff());
  if (CommutatorNorm(h, ops.fz) > 1e-10 * scale) {
    throw NumericalError("Hamiltonian does not commute with Fz");
  }
  return h;
}

double DensityState::HermiticityError() const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

DensityState thermal_state(const SpinSystem& sys) {
  sys.Validate();
  const int dim = 1 << sys.n;
  DensityState rho{sys.n, CMatrix::Zero(dim, dim)};
  const double norm = 1.0 / dim;
  for (int s = 0; s < dim; ++s) {
    double m = 0.0;
    for (int k = 0; k < sys.n; ++k) m += (s & SpinMask(sys.n, k)) ? -0.5 : 0.5;
    rho.matrix(s, s) = m * norm;
  }
  return rho;
}

double CommutatorNorm(const SparseOp& a, const SparseOp& b) {
  const SparseOp c = SparseOp(a * b) - SparseOp(b * a);
  double worst = 0.0;
  for (int k = 0; k < c.outerSize(); ++k) {
    for (SparseOp::InnerIterator it(c, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

}  // namespace spinphoto
