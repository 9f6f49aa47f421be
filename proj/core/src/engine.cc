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

#include "spinphoto/engine.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "spinphoto/error.h"

namespace spinphoto {
namespace {

using RowMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHealthTolerance = 1e-9;
// Runs at least this long are raised to a power instead of stepped through.
constexpr int kPowerRunThreshold = 48;

std::string FormatSci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

bool IsZeroField(const RfStep& s) { return s.bx_hz == 0.0 && s.by_hz == 0.0; }

// bx Fx + by Fy in sector order.
CMatrix DenseRfHamiltonian(const SectorBasis& basis, double bx, double by) {
  const int n = basis.n();
  const int dim = basis.dim();
  CMatrix h = CMatrix::Zero(dim, dim);
  // <up|(bx Ix + by Iy)|down> = (bx - i by) / 2
  const Complex lower(0.5 * bx, -0.5 * by);
  for (int i = 0; i < dim; ++i) {
    for (int k = 0; k < n; ++k) {
      const int mask = SpinMask(n, k);
      if (i & mask) continue;
      const int p_up = basis.position()[i];
      const int p_down = basis.position()[i | mask];
      h(p_up, p_down) += lower;
      h(p_down, p_up) += std::conj(lower);
    }
  }
  return h;
}

CMatrix DenseStaticHamiltonian(const StaticEigensystem& h0) {
  const SectorBasis& basis = h0.basis();
  CMatrix h = CMatrix::Zero(basis.dim(), basis.dim());
  for (int c = 0; c < basis.sectors(); ++c) {
    const int off = basis.offset(c);
    const int b = basis.size(c);
    const Eigen::MatrixXd& v = h0.vectors(c);
    const Eigen::MatrixXd blk =
        v * h0.eigenvalues().segment(off, b).asDiagonal() * v.transpose();
    h.block(off, off, b, b) = blk.cast<Complex>();
  }
  return h;
}

// Newton-Schulz polish toward the nearest unitary. Each pass squares the
// deviation from unitarity, so two passes take 1e-13 to roundoff.
void Unitarize(CMatrix& u) {
  const CMatrix eye = CMatrix::Identity(u.rows(), u.cols());
  for (int pass = 0; pass < 2; ++pass) {
    const CMatrix gram = u.adjoint() * u;
    u = (u * (1.5 * eye - 0.5 * gram)).eval();
  }
}

CMatrix ExpFromEigen(const Eigen::SelfAdjointEigenSolver<CMatrix>& es,
                     double t) {
  const Eigen::VectorXcd phases =
      (es.eigenvalues() * (-kTwoPi * t))
          .unaryExpr([](double a) { return std::polar(1.0, a); });
  CMatrix u = es.eigenvectors() * phases.asDiagonal() *
              es.eigenvectors().adjoint();
  Unitarize(u);
  return u;
}

CMatrix MatrixPower(CMatrix base, int count) {
  CMatrix result = CMatrix::Identity(base.rows(), base.cols());
  bool first = true;
  while (count > 0) {
    if (count & 1) {
      if (first) {
        result = base;
        first = false;
      } else {
        result = (base * result).eval();
        Unitarize(result);
      }
    }
    count >>= 1;
    if (count > 0) {
      base = (base * base).eval();
      Unitarize(base);
    }
  }
  return result;
}

// Accumulates the split-operator product on a row-major matrix whose columns
// evolve independently. Consecutive half steps of free evolution are merged.
class SplitAccumulator {
 public:
  SplitAccumulator(const StaticEigensystem& h0, double dt)
      : h0_(h0),
        basis_(h0.basis()),
        dt_(dt),
        full_(h0.FreeBlocks(dt)),
        half_(h0.FreeBlocks(0.5 * dt)),
        w_(RowMatrix::Identity(h0.dim(), h0.dim())),
        scratch_(h0.dim(), h0.dim()) {
    const int n = basis_.n();
    pairs_.resize(n);
    for (int k = 0; k < n; ++k) {
      const int mask = SpinMask(n, k);
      for (int i = 0; i < basis_.dim(); ++i) {
        if (i & mask) continue;
        pairs_[k].emplace_back(basis_.position()[i],
                               basis_.position()[i | mask]);
      }
    }
  }

  void Step(const RfStep& s) {
    ApplyBlocks(w_, pending_half_ ? full_ : half_);
    if (!IsZeroField(s)) ApplyRotation(w_, RfRotation(s.bx_hz, s.by_hz, dt_));
    pending_half_ = true;
  }

  void Free(double tau) {
    Flush();
    ApplyBlocks(w_, h0_.FreeBlocks(tau));
  }

  void Power(const RfStep& s, int count) {
    Flush();
    RowMatrix single = RowMatrix::Identity(basis_.dim(), basis_.dim());
    ApplyBlocks(single, half_);
    ApplyRotation(single, RfRotation(s.bx_hz, s.by_hz, dt_));
    ApplyBlocks(single, half_);
    CMatrix base(single);
    Unitarize(base);
    const CMatrix p = MatrixPower(std::move(base), count);
    scratch_.noalias() = p * w_;
    w_.swap(scratch_);
  }

  CMatrix Finish() {
    Flush();
    return CMatrix(w_);
  }

  // One dense step, used by step_propagator_split.
  CMatrix SingleStep(const RfStep& s) {
    RowMatrix single = RowMatrix::Identity(basis_.dim(), basis_.dim());
    ApplyBlocks(single, half_);
    ApplyRotation(single, RfRotation(s.bx_hz, s.by_hz, dt_));
    ApplyBlocks(single, half_);
    return CMatrix(single);
  }

 private:
  void Flush() {
    if (pending_half_) ApplyBlocks(w_, half_);
    pending_half_ = false;
  }

  void ApplyBlocks(RowMatrix& w, const std::vector<CMatrix>& blocks) {
    for (int c = 0; c < basis_.sectors(); ++c) {
      const int off = basis_.offset(c);
      const int b = basis_.size(c);
      if (b == 1) {
        w.row(off) *= blocks[c](0, 0);
        continue;
      }
      scratch_.topRows(b).noalias() = blocks[c] * w.middleRows(off, b);
      w.middleRows(off, b) = scratch_.topRows(b);
    }
  }

  // Explicit real arithmetic: std::complex products otherwise fall back to
  // the NaN-aware library multiply in optimized builds.
  void ApplyRotation(RowMatrix& w, const Eigen::Matrix2cd& u) {
    const double ar = u(0, 0).real(), ai = u(0, 0).imag();
    const double br = u(0, 1).real(), bi = u(0, 1).imag();
    const double cr = u(1, 0).real(), ci = u(1, 0).imag();
    const double dr = u(1, 1).real(), di = u(1, 1).imag();
    const Eigen::Index cols = w.cols();
    for (const auto& spin_pairs : pairs_) {
      for (const auto& [p0, p1] : spin_pairs) {
        double* r0 = reinterpret_cast<double*>(w.row(p0).data());
        double* r1 = reinterpret_cast<double*>(w.row(p1).data());
        for (Eigen::Index j = 0; j < cols; ++j) {
          const double xr = r0[2 * j], xi = r0[2 * j + 1];
          const double yr = r1[2 * j], yi = r1[2 * j + 1];
          r0[2 * j] = ar * xr - ai * xi + br * yr - bi * yi;
          r0[2 * j + 1] = ar * xi + ai * xr + br * yi + bi * yr;
          r1[2 * j] = cr * xr - ci * xi + dr * yr - di * yi;
          r1[2 * j + 1] = cr * xi + ci * xr + dr * yi + di * yr;
        }
      }
    }
  }

  const StaticEigensystem& h0_;
  const SectorBasis& basis_;
  double dt_;
  std::vector<CMatrix> full_;
  std::vector<CMatrix> half_;
  std::vector<std::vector<std::pair<int, int>>> pairs_;
  RowMatrix w_;
  RowMatrix scratch_;
  bool pending_half_ = false;
};

CMatrix ExactProduct(const StaticEigensystem& h0, const Waveform& wf) {
  const SectorBasis& basis = h0.basis();
  const double dt = wf.dt();
  CMatrix w = CMatrix::Identity(basis.dim(), basis.dim());
  const CMatrix h_static = DenseStaticHamiltonian(h0);
  int s = 0;
  while (s < wf.n_steps()) {
    int e = s + 1;
    while (e < wf.n_steps() && wf.steps[e] == wf.steps[s]) ++e;
    const int run = e - s;
    const RfStep& step = wf.steps[s];
    CMatrix u;
    if (IsZeroField(step)) {
      u = basis.ToSectorOrder(h0.FreePropagator(run * dt));
    } else {
      const CMatrix h =
          h_static + DenseRfHamiltonian(basis, step.bx_hz, step.by_hz);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
      u = ExpFromEigen(es, run * dt);
    }
    w = (u * w).eval();
    s = e;
  }
  return w;
}

CMatrix SplitProduct(const StaticEigensystem& h0, const Waveform& wf) {
  const double dt = wf.dt();
  SplitAccumulator acc(h0, dt);
  int s = 0;
  while (s < wf.n_steps()) {
    int e = s + 1;
    while (e < wf.n_steps() && wf.steps[e] == wf.steps[s]) ++e;
    const int run = e - s;
    const RfStep& step = wf.steps[s];
    if (IsZeroField(step)) {
      acc.Free(run * dt);
    } else if (run >= kPowerRunThreshold) {
      acc.Power(step, run);
    } else {
      for (int k = 0; k < run; ++k) acc.Step(step);
    }
    s = e;
  }
  return acc.Finish();
}

CMatrix SectorProduct(const StaticEigensystem& h0, const Waveform& wf,
                      PropagationMode mode) {
  wf.Validate();
  if (wf.empty()) return CMatrix::Identity(h0.dim(), h0.dim());
  return mode == PropagationMode::kExact ? ExactProduct(h0, wf)
                                         : SplitProduct(h0, wf);
}

void CheckHealth(const DensityState& before, const DensityState& after) {
  const double herm = after.HermiticityError();
  if (herm > before.HermiticityError() + kHealthTolerance) {
    throw NumericalError("Hermiticity drift " + FormatSci(herm) +
                         " exceeds 1e-9");
  }
  const double drift = std::abs(after.Trace() - before.Trace());
  if (drift > kHealthTolerance) {
    throw NumericalError("trace drift " + FormatSci(drift) +
                         " exceeds 1e-9");
  }
}

}  // namespace

std::string_view ToString(PropagationMode mode) {
  return mode == PropagationMode::kExact ? "exact" : "split";
}

PropagationMode ParsePropagationMode(std::string_view text) {
  if (text == "exact") return PropagationMode::kExact;
  if (text == "split") return PropagationMode::kSplit;
  throw ValidationError("unknown propagation mode '" + std::string(text) +
                        "' (expected exact|split)");
}

SectorBasis::SectorBasis(int n) : n_(n) {
  if (n < 1 || n > kMaxSpins) throw ValidationError("spin count out of range");
  const int dim = 1 << n;
  offsets_.assign(n + 2, 0);
  position_.assign(dim, 0);
  for (int c = 0; c <= n; ++c) {
    offsets_[c] = static_cast<int>(order_.size());
    for (int i = 0; i < dim; ++i) {
      if (std::popcount(static_cast<unsigned>(i)) == c) {
        position_[i] = static_cast<int>(order_.size());
        order_.push_back(i);
        sector_of_.push_back(c);
      }
    }
  }
  offsets_[n + 1] = dim;
}

CMatrix SectorBasis::ToSectorOrder(const CMatrix& m) const {
  const int dim = this->dim();
  CMatrix out(dim, dim);
  for (int q = 0; q < dim; ++q) {
    for (int p = 0; p < dim; ++p) out(p, q) = m(order_[p], order_[q]);
  }
  return out;
}

CMatrix SectorBasis::FromSectorOrder(const CMatrix& m) const {
  const int dim = this->dim();
  CMatrix out(dim, dim);
  for (int q = 0; q < dim; ++q) {
    for (int p = 0; p < dim; ++p) out(order_[p], order_[q]) = m(p, q);
  }
  return out;
}

StaticEigensystem::StaticEigensystem(const SpinSystem& sys)
    : sys_(sys), basis_(sys.n) {
  sys_.Validate();
  const int n = sys.n;
  eigenvalues_.resize(basis_.dim());
  for (int c = 0; c < basis_.sectors(); ++c) {
    const int b = basis_.size(c);
    const int off = basis_.offset(c);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(b, b);
    for (int a = 0; a < b; ++a) {
      const int s = basis_.order()[off + a];
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
            const int t = s ^ SpinMask(n, i) ^ SpinMask(n, j);
            h(basis_.position()[t] - off, a) += -0.5 * d;
          }
        }
      }
      h(a, a) += diag;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) {
      throw NumericalError("static Hamiltonian diagonalization failed");
    }
    eigenvalues_.segment(off, b) = es.eigenvalues();
    vectors_.push_back(es.eigenvectors());
  }
}

double StaticEigensystem::SpectralRadius() const {
  return eigenvalues_.cwiseAbs().maxCoeff();
}

std::vector<CMatrix> StaticEigensystem::FreeBlocks(double tau_s) const {
  std::vector<CMatrix> blocks;
  blocks.reserve(basis_.sectors());
  for (int c = 0; c < basis_.sectors(); ++c) {
    const int off = basis_.offset(c);
    const int b = basis_.size(c);
    const Eigen::VectorXcd phases =
        (eigenvalues_.segment(off, b) * (-kTwoPi * tau_s))
            .unaryExpr([](double a) { return std::polar(1.0, a); });
    const CMatrix v = vectors_[c].cast<Complex>();
    CMatrix u = v * phases.asDiagonal() * v.transpose();
    Unitarize(u);
    blocks.push_back(std::move(u));
  }
  return blocks;
}

CMatrix StaticEigensystem::FreePropagator(double tau_s) const {
  const std::vector<CMatrix> blocks = FreeBlocks(tau_s);
  CMatrix u = CMatrix::Zero(dim(), dim());
  for (int c = 0; c < basis_.sectors(); ++c) {
    const int off = basis_.offset(c);
    const int b = basis_.size(c);
    u.block(off, off, b, b) = blocks[c];
  }
  return basis_.FromSectorOrder(u);
}

CMatrix StaticEigensystem::Hamiltonian() const {
  return basis_.FromSectorOrder(DenseStaticHamiltonian(*this));
}

CMatrix step_propagator_exact(const CMatrix& h_hz, double dt_s) {
  if (h_hz.rows() != h_hz.cols()) {
    throw ValidationError("Hamiltonian must be square");
  }
  const double scale = std::max(1.0, h_hz.cwiseAbs().maxCoeff());
  if ((h_hz - h_hz.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ValidationError("Hamiltonian is not Hermitian within 1e-10");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h_hz);
  if (es.info() != Eigen::Success) {
    throw NumericalError("Hamiltonian diagonalization failed");
  }
  return ExpFromEigen(es, dt_s);
}

Eigen::Matrix2cd RfRotation(double bx_hz, double by_hz, double dt_s) {
  const double amp = std::hypot(bx_hz, by_hz);
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  if (amp == 0.0) return u;
  const double half_angle = 0.5 * kTwoPi * amp * dt_s;
  const double c = std::cos(half_angle);
  const double s = std::sin(half_angle);
  // exp(-i theta (cos(phi) sx + sin(phi) sy) / 2), cos(phi) = bx/amp.
  const Complex axis_minus(bx_hz / amp, -by_hz / amp);  // e^{-i phi}
  u(0, 0) = c;
  u(1, 1) = c;
  u(0, 1) = Complex(0.0, -s) * axis_minus;
  u(1, 0) = Complex(0.0, -s) * std::conj(axis_minus);
  return u;
}

CMatrix step_propagator_split(const StaticEigensystem& h0, double bx_hz,
                              double by_hz, double dt_s) {
  SplitAccumulator acc(h0, dt_s);
  return h0.basis().FromSectorOrder(acc.SingleStep({bx_hz, by_hz}));
}

CMatrix PulsePropagator(const StaticEigensystem& h0, const Waveform& wf,
                        PropagationMode mode) {
  return h0.basis().FromSectorOrder(SectorProduct(h0, wf, mode));
}

DensityState evolve(const DensityState& state, const StaticEigensystem& h0,
                    const Waveform& wf, PropagationMode mode) {
  if (state.n != h0.n() || state.matrix.rows() != h0.dim() ||
      state.matrix.cols() != h0.dim()) {
    throw ValidationError("state dimension does not match the spin system");
  }
  if (wf.empty()) {
    wf.Validate();
    return state;
  }
  const SectorBasis& basis = h0.basis();
  const CMatrix u = SectorProduct(h0, wf, mode);
  const double unitarity = UnitarityError(u);
  if (unitarity > kHealthTolerance) {
    throw NumericalError("pulse propagator unitarity error " +
                         FormatSci(unitarity) + " exceeds 1e-9");
  }
  const CMatrix rho = basis.ToSectorOrder(state.matrix);
  CMatrix tmp = u * rho;
  CMatrix out = tmp * u.adjoint();
  DensityState next{state.n, basis.FromSectorOrder(out)};
  CheckHealth(state, next);
  return next;
}

DensityState evolve(const DensityState& state, const SpinSystem& sys,
                    const Waveform& wf, PropagationMode mode) {
  return evolve(state, StaticEigensystem(sys), wf, mode);
}

DensityState ApplyPropagator(const DensityState& state, const CMatrix& u) {
  if (u.rows() != state.matrix.rows() || u.cols() != state.matrix.cols()) {
    throw ValidationError("propagator dimension does not match the state");
  }
  const double unitarity = UnitarityError(u);
  if (unitarity > kHealthTolerance) {
    throw NumericalError("propagator unitarity error exceeds 1e-9");
  }
  CMatrix tmp = u * state.matrix;
  DensityState next{state.n, tmp * u.adjoint()};
  CheckHealth(state, next);
  return next;
}

DensityState RotateAboutZ(const DensityState& state, double psi_rad) {
  const int dim = state.dim();
  Eigen::VectorXcd phase(dim);
  for (int i = 0; i < dim; ++i) {
    double m = 0.0;
    for (int k = 0; k < state.n; ++k) {
      m += (i & SpinMask(state.n, k)) ? -0.5 : 0.5;
    }
    phase(i) = std::polar(1.0, -psi_rad * m);
  }
  DensityState out = state;
  out.matrix = phase.asDiagonal() * state.matrix * phase.conjugate().asDiagonal();
  return out;
}

bool StepSizeAdequate(const StaticEigensystem& h0, const Waveform& wf) {
  if (wf.empty()) return true;
  double peak = 0.0;
  for (const RfStep& s : wf.steps) peak = std::max(peak, std::hypot(s.bx_hz, s.by_hz));
  const double scale = std::max(h0.SpectralRadius(), 0.5 * h0.n() * peak);
  return scale == 0.0 || wf.dt() <= 1.0 / (20.0 * scale);
}

double UnitarityError(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols()))
      .cwiseAbs()
      .maxCoeff();
}

}  // namespace spinphoto
