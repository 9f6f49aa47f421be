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

#ifndef SPINPHOTO_ENGINE_H_
#define SPINPHOTO_ENGINE_H_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spinphoto/operators.h"
#include "spinphoto/spin_system.h"
#include "spinphoto/waveform.h"

namespace spinphoto {

enum class PropagationMode { kExact, kSplit };

std::string_view ToString(PropagationMode mode);
PropagationMode ParsePropagationMode(std::string_view text);

/// Ordering of the 2^n basis by number of down spins, so that every operator
/// commuting with Fz is block diagonal. Sector c holds the C(n, c) states with
/// c down spins, in increasing computational index.
class SectorBasis {
 public:
  explicit SectorBasis(int n);

  int n() const { return n_; }
  int dim() const { return 1 << n_; }
  int sectors() const { return n_ + 1; }
  int offset(int c) const { return offsets_[c]; }
  int size(int c) const { return offsets_[c + 1] - offsets_[c]; }
  /// Position in sector order -> computational index.
  const std::vector<int>& order() const { return order_; }
  /// Computational index -> position in sector order.
  const std::vector<int>& position() const { return position_; }
  /// Fz eigenvalue of each position.
  double Magnetization(int pos) const { return 0.5 * n_ - sector_of_[pos]; }
  int sector_of(int pos) const { return sector_of_[pos]; }

  CMatrix ToSectorOrder(const CMatrix& m) const;
  CMatrix FromSectorOrder(const CMatrix& m) const;

 private:
  int n_;
  std::vector<int> offsets_;
  std::vector<int> order_;
  std::vector<int> position_;
  std::vector<int> sector_of_;
};

/// Eigensystem of the static Hamiltonian, computed block by block in the
/// sector basis. Immutable after construction; share freely across threads.
class StaticEigensystem {
 public:
  explicit StaticEigensystem(const SpinSystem& sys);

  const SpinSystem& system() const { return sys_; }
  const SectorBasis& basis() const { return basis_; }
  int n() const { return sys_.n; }
  int dim() const { return basis_.dim(); }

  /// Eigenvalues in Hz, indexed by sector-order position.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// Real orthonormal eigenvectors of sector c (columns).
  const Eigen::MatrixXd& vectors(int c) const { return vectors_[c]; }
  /// Largest |eigenvalue| in Hz.
  double SpectralRadius() const;

  /// Blocks of exp(-i 2 pi H0 tau), one per sector.
  std::vector<CMatrix> FreeBlocks(double tau_s) const;
  /// Dense exp(-i 2 pi H0 tau) in the computational basis.
  CMatrix FreePropagator(double tau_s) const;
  /// Dense H0 in the computational basis.
  CMatrix Hamiltonian() const;

 private:
  SpinSystem sys_;
  SectorBasis basis_;
  Eigen::VectorXd eigenvalues_;
  std::vector<Eigen::MatrixXd> vectors_;
};

/// exp(-i 2 pi H dt) for Hermitian H (Hz) by eigendecomposition.
CMatrix step_propagator_exact(const CMatrix& h_hz, double dt_s);

/// 2x2 rotation generated by bx Ix + by Iy over dt.
Eigen::Matrix2cd RfRotation(double bx_hz, double by_hz, double dt_s);

/// Strang step exp(-i 2 pi H0 dt/2) Rrf exp(-i 2 pi H0 dt/2), with Rrf the
/// n-fold Kronecker power of RfRotation. Computational basis.
CMatrix step_propagator_split(const StaticEigensystem& h0, double bx_hz,
                              double by_hz, double dt_s);

/// Product of all step propagators of a waveform, computational basis.
/// Runs of identical steps are collapsed: an exact run is one
/// diagonalization, a split run is a matrix power, and a zero-field run is an
/// exact free propagator.
CMatrix PulsePropagator(const StaticEigensystem& h0, const Waveform& wf,
                        PropagationMode mode);

/// rho <- U rho U^dagger. Throws NumericalError when Hermiticity or trace
/// drift exceeds 1e-9 or the pulse propagator is not unitary to 1e-9.
DensityState evolve(const DensityState& state, const StaticEigensystem& h0,
                    const Waveform& wf, PropagationMode mode);
DensityState evolve(const DensityState& state, const SpinSystem& sys,
                    const Waveform& wf, PropagationMode mode);

/// Applies a fixed propagator with the same health checks as evolve.
DensityState ApplyPropagator(const DensityState& state, const CMatrix& u);

/// exp(-i psi Fz) rho exp(i psi Fz).
DensityState RotateAboutZ(const DensityState& state, double psi_rad);

/// True when dt <= 1 / (20 * frequency scale), the scale being the larger of
/// the H0 spectral radius and the peak rf amplitude times n/2.
bool StepSizeAdequate(const StaticEigensystem& h0, const Waveform& wf);

/// max |U^dagger U - 1|.
double UnitarityError(const CMatrix& u);

}  // namespace spinphoto

#endif  // SPINPHOTO_ENGINE_H_
