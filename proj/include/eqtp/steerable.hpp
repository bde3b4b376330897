// Copyright 2026 The eqtp Authors
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

// G-steerable kernels: projection of free weights onto the steerable subspace
// by group averaging, the steerability residual, and an analytic basis of
// radial-profile x angular-harmonic kernels.

#ifndef EQTP_STEERABLE_HPP_
#define EQTP_STEERABLE_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eqtp/correlate.hpp"
#include "eqtp/feature_field.hpp"
#include "eqtp/group.hpp"
#include "eqtp/tensor_io.hpp"

namespace eqtp {

// y = A x for a sparse A given row by row.
class SparseLinearMap {
 public:
  struct Entry {
    int col;
    double coef;
  };

  SparseLinearMap() = default;
  SparseLinearMap(int rows, int cols) : cols_(cols), rows_(rows) {}

  int rows() const { return static_cast<int>(rows_.size()); }
  int cols() const { return cols_; }
  std::vector<Entry>& row(int r) { return rows_[r]; }
  const std::vector<Entry>& row(int r) const { return rows_[r]; }

  template <typename T>
  void Apply(std::span<const T> x, std::span<T> y) const {
    for (int r = 0; r < rows(); ++r) {
      T acc = 0;
      for (const Entry& e : rows_[r]) acc += static_cast<T>(e.coef) * x[e.col];
      y[r] = acc;
    }
  }

  template <typename T>
  void ApplyTranspose(std::span<const T> y, std::span<T> x) const {
    for (int r = 0; r < rows(); ++r) {
      for (const Entry& e : rows_[r]) x[e.col] += static_cast<T>(e.coef) * y[r];
    }
  }

  std::vector<double> Apply(const std::vector<double>& x) const {
    std::vector<double> y(rows());
    Apply<double>(std::span<const double>(x), std::span<double>(y));
    return y;
  }

 private:
  int cols_ = 0;
  std::vector<std::vector<Entry>> rows_;
};

namespace internal {

// Sums duplicate columns and drops exact zeros.
inline void Compact(std::vector<SparseLinearMap::Entry>& row) {
  std::sort(row.begin(), row.end(), [](auto& a, auto& b) { return a.col < b.col; });
  std::vector<SparseLinearMap::Entry> merged;
  for (const auto& e : row) {
    if (!merged.empty() && merged.back().col == e.col) {
      merged.back().coef += e.coef;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const auto& e) { return std::abs(e.coef) < 1e-15; });
  row = std::move(merged);
}

inline Interp ExactOr(const GroupElement& g, Interp fallback) {
  return g.QuarterTurns() >= 0 ? Interp::kNearest : fallback;
}

}  // namespace internal

inline int RepFrequency(const Representation& rep) {
  switch (rep.kind()) {
    case RepKind::kStandard: return 1;
    case RepKind::kIrrep: return rep.param();
    default: return 0;
  }
}

// rho applied independently to `copies` consecutive fibers.
inline Matrix BlockRepMatrix(const Representation& rep, int copies, const GroupElement& g) {
  const Matrix m = RepMatrix(rep, g);
  const int d = rep.dim();
  Matrix out = Matrix::Zero(d * copies, d * copies);
  for (int c = 0; c < copies; ++c) out.block(c * d, c * d, d, d) = m;
  return out;
}

// Group elements averaged over by projections: C_n itself, or for SO(2)
// (n == 0) a C_N fine enough to integrate harmonics up to `max_frequency`.
inline std::vector<GroupElement> AveragingElements(int group_order, int max_frequency) {
  if (group_order > 0) return Elements(group_order);
  const int n = 2 * std::max(1, max_frequency) + 2;
  return Elements(n);
}

inline void CheckCompatible(const Representation& rep, int group_order, const char* what) {
  if (group_order == 0) {
    if (!(rep.kind() == RepKind::kTrivial || rep.kind() == RepKind::kStandard ||
          rep.kind() == RepKind::kIrrep)) {
      throw std::invalid_argument(std::string(what) + ": " + rep.ToString() +
                                  " is undefined on SO(2)");
    }
    return;
  }
  if (rep.is_permutation() && rep.kind() != RepKind::kTrivial && rep.dim() > 1 &&
      rep.group_order() % group_order != 0) {
    throw std::invalid_argument(std::string(what) + ": " + rep.ToString() +
                                " is not defined on C_" + std::to_string(group_order));
  }
}

// Linear map raw -> (1/n) sum_g rho_out(g)^-1 raw(g . x) rho_in(g) on a
// flattened [out_channels, in_channels, k, k] weight array.
inline SparseLinearMap BuildKernelProjector(const Representation& rep_in, int copies_in,
                                            const Representation& rep_out, int copies_out,
                                            int kernel_size, int group_order,
                                            Interp interp = Interp::kBilinear) {
  if (kernel_size <= 0 || kernel_size % 2 == 0) {
    throw std::invalid_argument("steerable kernels need an odd size, got " +
                                std::to_string(kernel_size));
  }
  if (group_order <= 0) throw std::invalid_argument("kernel projection needs a finite C_n");
  CheckCompatible(rep_in, group_order, "project_kernel");
  CheckCompatible(rep_out, group_order, "project_kernel");
  const int cin = rep_in.dim() * copies_in;
  const int cout = rep_out.dim() * copies_out;
  const int kk = kernel_size * kernel_size;
  const double c = (kernel_size - 1) / 2.0;
  SparseLinearMap map(cout * cin * kk, cout * cin * kk);
  const double inv_n = 1.0 / group_order;
  for (const GroupElement& g : Elements(group_order)) {
    const Matrix out_inv = BlockRepMatrix(rep_out, copies_out, g.Inverse());
    const Matrix in = BlockRepMatrix(rep_in, copies_in, g);
    // raw(g . x) is T_{g^-1} raw.
    const ResampleOperator rot = ResampleOperator::Rotation(
        kernel_size, kernel_size, c, c, g.Inverse(), internal::ExactOr(g, interp));
    for (int o = 0; o < cout; ++o) {
      for (int a = 0; a < cout; ++a) {
        const double oa = out_inv(o, a);
        if (oa == 0.0) continue;
        for (int b = 0; b < cin; ++b) {
          for (int i = 0; i < cin; ++i) {
            const double bi = in(b, i);
            if (bi == 0.0) continue;
            for (int p = 0; p < kk; ++p) {
              auto& row = map.row((o * cin + i) * kk + p);
              const auto src = rot.sources(p);
              const auto wts = rot.weights(p);
              for (int t = 0; t < ResampleOperator::kTaps; ++t) {
                if (src[t] < 0) continue;
                row.push_back({(a * cin + b) * kk + src[t], inv_n * oa * bi * wts[t]});
              }
            }
          }
        }
      }
    }
  }
  for (int r = 0; r < map.rows(); ++r) internal::Compact(map.row(r));
  return map;
}

// Projects a bias vector onto the rho_out-invariant subspace.
inline SparseLinearMap BuildBiasProjector(const Representation& rep_out, int copies_out,
                                          int group_order) {
  const int cout = rep_out.dim() * copies_out;
  SparseLinearMap map(cout, cout);
  const std::vector<GroupElement> group = AveragingElements(group_order, RepFrequency(rep_out));
  const double inv_n = 1.0 / static_cast<double>(group.size());
  for (const GroupElement& g : group) {
    const Matrix m = BlockRepMatrix(rep_out, copies_out, g);
    for (int o = 0; o < cout; ++o) {
      for (int a = 0; a < cout; ++a) {
        if (m(o, a) != 0.0) map.row(o).push_back({a, inv_n * m(o, a)});
      }
    }
  }
  for (int r = 0; r < map.rows(); ++r) internal::Compact(map.row(r));
  return map;
}

struct SteerableKernel {
  KernelTensor weights;
  Representation rep_in = Representation::Trivial(1);
  Representation rep_out = Representation::Trivial(1);
  int copies_in = 1;
  int copies_out = 1;
  int group_order = 1;  // 0 for SO(2)
  // Continuous kernel K(x, y) (full out x in matrix) when the kernel was
  // built from analytic functions; grid values are samples of it.
  std::function<Matrix(double, double)> analytic;

  int size() const { return weights.size; }
};

inline SteerableKernel ProjectKernel(const KernelTensor& raw, const Representation& rep_in,
                                     const Representation& rep_out, int group_order,
                                     Interp interp = Interp::kBilinear) {
  if (raw.in_channels % rep_in.dim() != 0 || raw.out_channels % rep_out.dim() != 0) {
    throw std::invalid_argument("project_kernel: kernel " + std::to_string(raw.out_channels) +
                                "x" + std::to_string(raw.in_channels) + " does not match " +
                                rep_out.ToString() + " <- " + rep_in.ToString());
  }
  SteerableKernel k;
  k.rep_in = rep_in;
  k.rep_out = rep_out;
  k.copies_in = raw.in_channels / rep_in.dim();
  k.copies_out = raw.out_channels / rep_out.dim();
  k.group_order = group_order;
  const SparseLinearMap p = BuildKernelProjector(rep_in, k.copies_in, rep_out, k.copies_out,
                                                 raw.size, group_order, interp);
  k.weights = KernelTensor(raw.out_channels, raw.in_channels, raw.size);
  k.weights.w = p.Apply(raw.w);
  return k;
}

namespace internal {

inline Matrix KernelAt(const KernelTensor& k, int r, int c) {
  Matrix m(k.out_channels, k.in_channels);
  for (int o = 0; o < k.out_channels; ++o) {
    for (int i = 0; i < k.in_channels; ++i) m(o, i) = k.at(o, i, r, c);
  }
  return m;
}

// Kernel values at R(h) x for every grid point x, i.e. the planes of T_{h^-1} K.
inline std::vector<Matrix> KernelAtRotatedGrid(const SteerableKernel& k, const GroupElement& h,
                                               Interp interp) {
  const int s = k.size();
  const double ctr = (s - 1) / 2.0;
  std::vector<Matrix> out;
  out.reserve(s * s);
  if (k.analytic) {
    double c = 1, sn = 0;
    h.CosSin(1, &c, &sn);
    for (int r = 0; r < s; ++r) {
      for (int col = 0; col < s; ++col) {
        const double x = col - ctr, y = ctr - r;
        out.push_back(k.analytic(c * x - sn * y, sn * x + c * y));
      }
    }
    return out;
  }
  const ResampleOperator rot =
      ResampleOperator::Rotation(s, s, ctr, ctr, h.Inverse(), ExactOr(h, interp));
  const KernelTensor& w = k.weights;
  std::vector<double> plane(s * s), rotated(s * s);
  std::vector<Matrix> mats(s * s, Matrix::Zero(w.out_channels, w.in_channels));
  for (int o = 0; o < w.out_channels; ++o) {
    for (int i = 0; i < w.in_channels; ++i) {
      for (int p = 0; p < s * s; ++p) plane[p] = w.at(o, i, p / s, p % s);
      rot.Apply<double>(plane, rotated);
      for (int p = 0; p < s * s; ++p) mats[p](o, i) = rotated[p];
    }
  }
  return mats;
}

}  // namespace internal

// max_x |K(g . x) - rho_out(g) K(x) rho_in(g)^-1| over the kernel grid.
inline double CheckSteerability(const SteerableKernel& k, const GroupElement& g,
                                Interp interp = Interp::kBilinear) {
  const std::vector<Matrix> lhs = internal::KernelAtRotatedGrid(k, g, interp);
  const Matrix out = BlockRepMatrix(k.rep_out, k.copies_out, g);
  const Matrix in_inv = BlockRepMatrix(k.rep_in, k.copies_in, g.Inverse());
  double worst = 0.0;
  const int s = k.size();
  for (int p = 0; p < s * s; ++p) {
    const Matrix rhs = out * internal::KernelAt(k.weights, p / s, p % s) * in_inv;
    worst = std::max(worst, (lhs[p] - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

// For trivial-input kernels: max_x |T_g K(x) - rho_out(g^-1) K(x)|.
inline double SpatialRotationResidual(const SteerableKernel& k, const GroupElement& g,
                             Interp interp = Interp::kBilinear) {
  if (k.rep_in.kind() != RepKind::kTrivial) {
    throw std::invalid_argument("trivial-input kernel required, got input type " +
                                k.rep_in.ToString());
  }
  const std::vector<Matrix> lhs = internal::KernelAtRotatedGrid(k, g.Inverse(), interp);
  const Matrix out_inv = BlockRepMatrix(k.rep_out, k.copies_out, g.Inverse());
  double worst = 0.0;
  const int s = k.size();
  for (int p = 0; p < s * s; ++p) {
    const Matrix rhs = out_inv * internal::KernelAt(k.weights, p / s, p % s);
    worst = std::max(worst, (lhs[p] - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

// Gaussian ring profile; harmonics of frequency > 0 vanish at the origin so
// the kernel is well defined there.
struct RadialRing {
  double radius = 0.0;
  double sigma = 0.6;

  double operator()(double r) const {
    const double d = r - radius;
    return std::exp(-0.5 * d * d / (sigma * sigma));
  }
};

// One unconstrained analytic kernel: ring(r) * trig(f phi) * E_{pq}.
struct HarmonicAtom {
  RadialRing ring;
  int frequency = 0;
  bool sine = false;
  int out_index = 0;
  int in_index = 0;

  double Scalar(double x, double y) const {
    const double r = std::hypot(x, y);
    if (frequency > 0 && r < 1e-12) return 0.0;
    const double phi = std::atan2(y, x);
    const double ang = sine ? std::sin(frequency * phi) : std::cos(frequency * phi);
    return ring(r) * ang;
  }
};

struct KernelBasis {
  std::vector<SteerableKernel> elements;

  // Gram matrix of the sampled elements.
  Matrix Gram() const {
    const int n = static_cast<int>(elements.size());
    Matrix g(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        double s = 0;
        const auto& wa = elements[a].weights.w;
        const auto& wb = elements[b].weights.w;
        for (size_t i = 0; i < wa.size(); ++i) s += wa[i] * wb[i];
        g(a, b) = s;
      }
    }
    return g;
  }

  int Rank(double tol = 1e-9) const {
    if (elements.empty()) return 0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(Gram());
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    int rank = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) rank += es.eigenvalues()(i) > tol * top;
    return rank;
  }

  // Kernel sum_b coeffs[b] * elements[b], keeping the analytic form.
  SteerableKernel Combine(std::span<const double> coeffs) const {
    if (coeffs.size() != elements.size()) throw std::invalid_argument("basis coefficient count");
    SteerableKernel k = elements.front();
    std::fill(k.weights.w.begin(), k.weights.w.end(), 0.0);
    std::vector<std::function<Matrix(double, double)>> fns;
    std::vector<double> cs(coeffs.begin(), coeffs.end());
    for (size_t b = 0; b < elements.size(); ++b) {
      for (size_t i = 0; i < k.weights.w.size(); ++i) {
        k.weights.w[i] += coeffs[b] * elements[b].weights.w[i];
      }
      fns.push_back(elements[b].analytic);
    }
    k.analytic = [fns, cs](double x, double y) {
      Matrix m = cs[0] * fns[0](x, y);
      for (size_t b = 1; b < fns.size(); ++b) m += cs[b] * fns[b](x, y);
      return m;
    };
    return k;
  }
};

// Analytic basis of the steerable kernel space for single-copy
// rep_in -> rep_out on C_n (group_order > 0) or SO(2) (group_order == 0).
// Each candidate atom is projected exactly (averaging the continuous
// function), then a linearly independent subset of the sampled kernels is
// kept and normalized.
inline KernelBasis BuildKernelBasis(const Representation& rep_in, const Representation& rep_out,
                                    int group_order, int kernel_size, int max_frequency = 4,
                                    double ring_sigma = 0.6) {
  if (kernel_size <= 0 || kernel_size % 2 == 0) {
    throw std::invalid_argument("kernel basis needs an odd size");
  }
  CheckCompatible(rep_in, group_order, "kernel_basis");
  CheckCompatible(rep_out, group_order, "kernel_basis");
  const int din = rep_in.dim(), dout = rep_out.dim();
  const int s = kernel_size;
  const double ctr = (s - 1) / 2.0;
  const std::vector<GroupElement> group = AveragingElements(
      group_order, max_frequency + RepFrequency(rep_in) + RepFrequency(rep_out));
  struct GroupMats {
    double c, s;
    Matrix out_inv, in;
  };
  auto mats = std::make_shared<std::vector<GroupMats>>();
  for (const GroupElement& g : group) {
    GroupMats m;
    g.CosSin(1, &m.c, &m.s);
    m.out_inv = RepMatrix(rep_out, g.Inverse());
    m.in = RepMatrix(rep_in, g);
    mats->push_back(std::move(m));
  }

  KernelBasis basis;
  std::vector<std::vector<double>> kept;  // orthonormalized samples
  const int max_ring = static_cast<int>(std::floor(ctr));
  for (int l = 0; l <= max_ring; ++l) {
    const int fmax = std::min(max_frequency, l);  // coarser rings alias higher harmonics
    for (int f = 0; f <= fmax; ++f) {
      for (int sine = 0; sine <= (f > 0 ? 1 : 0); ++sine) {
        for (int p = 0; p < dout; ++p) {
          for (int q = 0; q < din; ++q) {
            HarmonicAtom atom{RadialRing{static_cast<double>(l), ring_sigma}, f, sine == 1, p, q};
            auto fn = [atom, mats, dout, din](double x, double y) {
              Matrix acc = Matrix::Zero(dout, din);
              for (const GroupMats& m : *mats) {
                // F(g . x)
                const double gx = m.c * x - m.s * y, gy = m.s * x + m.c * y;
                const double v = atom.Scalar(gx, gy);
                if (v == 0.0) continue;
                acc += v * m.out_inv.col(atom.out_index) * m.in.row(atom.in_index);
              }
              return Matrix(acc / static_cast<double>(mats->size()));
            };
            std::vector<double> sample(static_cast<size_t>(dout) * din * s * s);
            for (int r = 0; r < s; ++r) {
              for (int c = 0; c < s; ++c) {
                const Matrix m = fn(c - ctr, ctr - r);
                for (int o = 0; o < dout; ++o) {
                  for (int i = 0; i < din; ++i) {
                    sample[((static_cast<size_t>(o) * din + i) * s + r) * s + c] = m(o, i);
                  }
                }
              }
            }
            double norm = 0;
            for (double v : sample) norm += v * v;
            norm = std::sqrt(norm);
            if (norm < 1e-8) continue;
            std::vector<double> resid = sample;
            for (const auto& e : kept) {
              double dot = 0;
              for (size_t i = 0; i < e.size(); ++i) dot += e[i] * resid[i];
              for (size_t i = 0; i < e.size(); ++i) resid[i] -= dot * e[i];
            }
            double rn = 0;
            for (double v : resid) rn += v * v;
            rn = std::sqrt(rn);
            if (rn < 1e-6 * norm) continue;
            for (double& v : resid) v /= rn;
            kept.push_back(std::move(resid));

            SteerableKernel k;
            k.weights = KernelTensor(dout, din, s);
            for (size_t i = 0; i < sample.size(); ++i) k.weights.w[i] = sample[i] / norm;
            k.rep_in = rep_in;
            k.rep_out = rep_out;
            k.group_order = group_order;
            const double scale = 1.0 / norm;
            k.analytic = [fn, scale](double x, double y) { return Matrix(scale * fn(x, y)); };
            basis.elements.push_back(std::move(k));
          }
        }
      }
    }
  }
  return basis;
}

// Crop -> kernel generator with trivial input and irrep(m) output on SO(2):
//   a_l(c) = sum_y c(y) h_l(|y|) e^{-i m phi_y},
//   K_c(x) = sum_l h_l(|x|) e^{i m phi_x} a_l(c)   (as (Re, Im) for m > 0).
// Rotating the crop by g rotates the generated kernel: K_{T_g c} = T_g K_c.
class HarmonicKernelGenerator {
 public:
  HarmonicKernelGenerator(int frequency, int kernel_size, std::vector<RadialRing> rings)
      : frequency_(frequency), kernel_size_(kernel_size), rings_(std::move(rings)) {
    if (frequency < 0) throw std::invalid_argument("frequency must be non-negative");
    if (kernel_size <= 0 || kernel_size % 2 == 0) throw std::invalid_argument("odd kernel size");
    if (rings_.empty()) throw std::invalid_argument("at least one radial ring");
  }

  int frequency() const { return frequency_; }
  int out_dim() const { return frequency_ == 0 ? 1 : 2; }

  std::vector<std::complex<double>> Coefficients(const FeatureField& crop) const {
    if (crop.channels() != 1) throw std::invalid_argument("generator expects a 1-channel crop");
    std::vector<std::complex<double>> a(rings_.size());
    for (int r = 0; r < crop.height(); ++r) {
      for (int c = 0; c < crop.width(); ++c) {
        const double x = c - crop.origin_col(), y = crop.origin_row() - r;
        const double rad = std::hypot(x, y);
        if (frequency_ > 0 && rad < 1e-12) continue;
        const double phi = std::atan2(y, x);
        const std::complex<double> e = std::polar(1.0, -frequency_ * phi);
        for (size_t l = 0; l < rings_.size(); ++l) a[l] += crop.at(0, r, c) * rings_[l](rad) * e;
      }
    }
    return a;
  }

  SteerableKernel Generate(const FeatureField& crop) const {
    const auto a = Coefficients(crop);
    const int m = frequency_;
    const auto rings = rings_;
    SteerableKernel k;
    k.rep_in = Representation::Trivial(0);
    k.rep_out = Representation::Irrep(0, m);
    k.group_order = 0;
    k.analytic = [a, rings, m](double x, double y) {
      const double rad = std::hypot(x, y);
      Matrix out = Matrix::Zero(m == 0 ? 1 : 2, 1);
      if (m > 0 && rad < 1e-12) return out;
      const std::complex<double> e = std::polar(1.0, m * std::atan2(y, x));
      std::complex<double> z = 0;
      for (size_t l = 0; l < rings.size(); ++l) z += rings[l](rad) * e * a[l];
      out(0, 0) = z.real();
      if (m > 0) out(1, 0) = z.imag();
      return out;
    };
    const int s = kernel_size_;
    const double ctr = (s - 1) / 2.0;
    k.weights = KernelTensor(out_dim(), 1, s);
    for (int r = 0; r < s; ++r) {
      for (int c = 0; c < s; ++c) {
        const Matrix v = k.analytic(c - ctr, ctr - r);
        for (int o = 0; o < out_dim(); ++o) k.weights.at(o, 0, r, c) = v(o, 0);
      }
    }
    return k;
  }

 private:
  int frequency_;
  int kernel_size_;
  std::vector<RadialRing> rings_;
};

// Kernel weights go to `path` as a raw tensor [out, in, k, k]; the types go to
// `path`.meta as key=value lines.
inline void SaveKernel(const std::string& path, const SteerableKernel& k) {
  RawTensor t;
  t.dims = {static_cast<uint32_t>(k.weights.out_channels),
            static_cast<uint32_t>(k.weights.in_channels), static_cast<uint32_t>(k.size()),
            static_cast<uint32_t>(k.size())};
  t.data.assign(k.weights.w.begin(), k.weights.w.end());
  SaveRawTensor(path, t);
  std::ofstream meta(path + ".meta");
  meta << "rep_in=" << k.rep_in.ToString() << "\n"
       << "rep_out=" << k.rep_out.ToString() << "\n"
       << "copies_in=" << k.copies_in << "\n"
       << "copies_out=" << k.copies_out << "\n"
       << "group_order=" << k.group_order << "\n"
       << "size=" << k.size() << "\n";
  if (!meta) throw std::runtime_error("cannot write " + path + ".meta");
}

inline SteerableKernel LoadKernel(const std::string& path) {
  std::ifstream meta(path + ".meta");
  if (!meta) throw std::runtime_error("cannot read " + path + ".meta");
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(meta, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ".meta:" + std::to_string(line_no) + ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"rep_in", "rep_out", "copies_in", "copies_out", "group_order", "size"}) {
    if (!kv.count(key)) throw std::runtime_error(path + ".meta: missing " + key);
  }
  SteerableKernel k;
  k.group_order = std::stoi(kv["group_order"]);
  k.rep_in = Representation::Parse(kv["rep_in"], k.group_order);
  k.rep_out = Representation::Parse(kv["rep_out"], k.group_order);
  k.copies_in = std::stoi(kv["copies_in"]);
  k.copies_out = std::stoi(kv["copies_out"]);
  const int size = std::stoi(kv["size"]);
  const RawTensor t = LoadRawTensor(path);
  const int out = k.rep_out.dim() * k.copies_out, in = k.rep_in.dim() * k.copies_in;
  if (t.dims != std::vector<uint32_t>{static_cast<uint32_t>(out), static_cast<uint32_t>(in),
                                      static_cast<uint32_t>(size), static_cast<uint32_t>(size)}) {
    throw std::runtime_error(path + ": tensor shape does not match metadata");
  }
  k.weights = KernelTensor(out, in, size);
  k.weights.w.assign(t.data.begin(), t.data.end());
  return k;
}

}  // namespace eqtp

#endif  // EQTP_STEERABLE_HPP_
