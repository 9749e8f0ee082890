#include "vgf/sampler.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "vgf/error.hpp"
#include "vgf/rng.hpp"

namespace vgf {

namespace {

void add_shift(std::vector<std::int64_t>& acc, std::span<const std::int64_t> u) {
  if (acc.empty()) acc.assign(u.size(), 0);
  for (std::size_t a = 0; a < u.size(); ++a) acc[a] += u[a];
}

double real_tolerance(double scale) { return kRealTol * std::max(1.0, scale); }

}  // namespace

SpectralSample::SpectralSample(SystemPtr system, int dim_field, std::vector<cplx> base,
                               std::vector<std::int64_t> shift)
    : system_(std::move(system)), d_(dim_field), base_(std::move(base)), shift_(std::move(shift)) {
  require(system_ != nullptr, ErrorCode::InvalidArgument, "sample needs a regular system");
  require(base_.size() == static_cast<std::size_t>(system_->slot_count()) * d_,
          ErrorCode::InvalidArgument, "sample has wrong number of values");
  bool zero_shift = true;
  for (auto v : shift_) zero_shift = zero_shift && v == 0;
  if (shift_.empty() || zero_shift) {
    values_ = base_;
    return;
  }
  require(shift_.size() == system_->dim(), ErrorCode::InvalidArgument, "shift dimension mismatch");
  values_.resize(base_.size());
  for (int s = 0; s < system_->slot_count(); ++s) {
    const cplx w = system_->phase(shift_, s);
    for (int j = 0; j < d_; ++j) {
      const std::size_t i = static_cast<std::size_t>(s) * d_ + j;
      values_[i] = w * base_[i];
    }
  }
}

SpectralSample SampleBlock::replica(int r) const {
  const int S = system->slot_count();
  std::vector<cplx> v(static_cast<std::size_t>(S) * dim_field);
  for (int s = 0; s < S; ++s)
    for (int j = 0; j < dim_field; ++j) {
      const std::size_t o = offset(j, s) + r;
      v[static_cast<std::size_t>(s) * dim_field + j] = {re[o], im[o]};
    }
  return {system, dim_field, std::move(v)};
}

SampleBlock SampleBlock::from(std::span<const SpectralSample> samples) {
  require(!samples.empty(), ErrorCode::InvalidArgument, "empty sample list");
  SampleBlock b{samples[0].system_ptr(), samples[0].dim_field(), static_cast<int>(samples.size()),
                {}, {}};
  const int S = b.system->slot_count();
  b.re.resize(static_cast<std::size_t>(S) * b.dim_field * b.replicas);
  b.im.resize(b.re.size());
  for (int r = 0; r < b.replicas; ++r) {
    const auto& smp = samples[static_cast<std::size_t>(r)];
    require(smp.system() == *b.system, ErrorCode::MismatchedSystems, "samples on different systems");
    for (int j = 0; j < b.dim_field; ++j)
      for (int s = 0; s < S; ++s) {
        const cplx z = smp.value(s, j);
        b.re[b.offset(j, s) + r] = z.real();
        b.im[b.offset(j, s) + r] = z.imag();
      }
  }
  return b;
}

CMatrix covariance_factor(const CMatrix& g) {
  const CMatrix herm = 0.5 * (g + g.adjoint());
  Eigen::LLT<CMatrix> llt(herm);
  if (llt.info() == Eigen::Success) {
    CMatrix l = llt.matrixL();
    if (l.allFinite()) return l;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -kPsdTol)
      fail(ErrorCode::NotPsd, "covariance has eigenvalue " + std::to_string(lambda(i)));
    lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
  }
  return eig.eigenvectors() * lambda.asDiagonal();
}

Sampler::Sampler(const MatrixSpectralMeasure& g) : g_(g) {
  const auto& sys = g_.system();
  const int n = sys.pair_count();
  factors_.reserve(static_cast<std::size_t>(n));
  keys_.reserve(static_cast<std::size_t>(n));
  for (int s = n; s < sys.slot_count(); ++s) {
    factors_.push_back(covariance_factor(g_.mass_at(s)));
    keys_.push_back(sys.cell_key(s));
  }
}

void Sampler::draw_cell(std::uint64_t seed, std::uint64_t replica, int slot, cplx* out) const {
  const int d = g_.dim_field();
  const std::size_t pos = static_cast<std::size_t>(slot - g_.system().pair_count());
  CounterRng rng(stream_key(seed, replica, keys_[pos]));
  std::normal_distribution<double> normal;
  Eigen::VectorXcd w(d);
  for (int j = 0; j < d; ++j) {
    const double xi = normal(rng);
    const double eta = normal(rng);
    w(j) = cplx(xi, eta) * std::numbers::sqrt2 * 0.5;
  }
  const Eigen::VectorXcd z = factors_[pos] * w;
  for (int j = 0; j < d; ++j) out[j] = z(j);
}

SpectralSample Sampler::draw(std::uint64_t seed, std::uint64_t replica) const {
  const auto& sys = g_.system();
  const int d = g_.dim_field();
  std::vector<cplx> v(static_cast<std::size_t>(sys.slot_count()) * d);
  for (int s = sys.pair_count(); s < sys.slot_count(); ++s) {
    cplx* out = v.data() + static_cast<std::size_t>(s) * d;
    draw_cell(seed, replica, s, out);
    cplx* mirror = v.data() + static_cast<std::size_t>(sys.mirror(s)) * d;
    for (int j = 0; j < d; ++j) mirror[j] = std::conj(out[j]);
  }
  return {g_.system_ptr(), d, std::move(v)};
}

SampleBlock Sampler::draw_block(std::uint64_t seed, std::uint64_t first_replica, int count) const {
  const auto& sys = g_.system();
  const int d = g_.dim_field();
  SampleBlock b{g_.system_ptr(), d, count, {}, {}};
  b.re.resize(static_cast<std::size_t>(sys.slot_count()) * d * count);
  b.im.resize(b.re.size());
  std::vector<cplx> cell(static_cast<std::size_t>(d));
  for (int s = sys.pair_count(); s < sys.slot_count(); ++s) {
    const int m = sys.mirror(s);
    for (int r = 0; r < count; ++r) {
      draw_cell(seed, first_replica + static_cast<std::uint64_t>(r), s, cell.data());
      for (int j = 0; j < d; ++j) {
        b.re[b.offset(j, s) + r] = cell[j].real();
        b.im[b.offset(j, s) + r] = cell[j].imag();
        b.re[b.offset(j, m) + r] = cell[j].real();
        b.im[b.offset(j, m) + r] = -cell[j].imag();
      }
    }
  }
  return b;
}

SpectralSample sample(const MatrixSpectralMeasure& g, std::uint64_t seed, std::uint64_t replica) {
  return Sampler(g).draw(seed, replica);
}

SpectralSample aggregate(const SpectralSample& fine, SystemPtr coarse) {
  const auto parents = fine.system().parent_slots(*coarse);
  const int d = fine.dim_field();
  std::vector<cplx> v(static_cast<std::size_t>(coarse->slot_count()) * d);
  for (int s = 0; s < fine.system().slot_count(); ++s)
    for (int j = 0; j < d; ++j)
      v[static_cast<std::size_t>(parents[static_cast<std::size_t>(s)]) * d + j] += fine.value(s, j);
  return {std::move(coarse), d, std::move(v)};
}

SampleBlock aggregate(const SampleBlock& fine, SystemPtr coarse) {
  const auto parents = fine.system->parent_slots(*coarse);
  SampleBlock b{std::move(coarse), fine.dim_field, fine.replicas, {}, {}};
  b.re.assign(static_cast<std::size_t>(b.system->slot_count()) * b.dim_field * b.replicas, 0.0);
  b.im.assign(b.re.size(), 0.0);
  for (int j = 0; j < b.dim_field; ++j)
    for (int s = 0; s < fine.system->slot_count(); ++s) {
      const std::size_t src = fine.offset(j, s);
      const std::size_t dst = b.offset(j, parents[static_cast<std::size_t>(s)]);
      for (int r = 0; r < b.replicas; ++r) {
        b.re[dst + r] += fine.re[src + r];
        b.im[dst + r] += fine.im[src + r];
      }
    }
  return b;
}

Eigen::MatrixXd synthesize_field(const SpectralSample& s,
                                 std::span<const std::vector<std::int64_t>> lags) {
  const auto& sys = s.system();
  require(sys.is_unit_torus(), ErrorCode::InvalidArgument,
          "field synthesis requires the unit torus");
  const int d = s.dim_field();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(lags.size()), d);
  std::vector<std::int64_t> total(sys.dim());
  for (std::size_t i = 0; i < lags.size(); ++i) {
    require(lags[i].size() == sys.dim(), ErrorCode::InvalidArgument, "lag dimension mismatch");
    for (std::size_t a = 0; a < sys.dim(); ++a)
      total[a] = lags[i][a] + (s.shift().empty() ? 0 : s.shift()[a]);
    for (int j = 0; j < d; ++j) {
      cplx acc{};
      double scale = 0.0;
      for (int slot = 0; slot < sys.slot_count(); ++slot) {
        const cplx z = s.base_value(slot, j);
        acc += sys.phase(total, slot) * z;
        scale += std::abs(z);
      }
      if (std::abs(acc.imag()) > real_tolerance(scale))
        fail(ErrorCode::InternalConsistency,
             "synthesized field has imaginary residue " + std::to_string(acc.imag()));
      out(static_cast<Eigen::Index>(i), j) = acc.real();
    }
  }
  return out;
}

void require_hermitian_function(const RegularSystem& sys, std::span<const cplx> phi) {
  require(static_cast<int>(phi.size()) == sys.slot_count(), ErrorCode::InvalidArgument,
          "function must have one value per cell");
  double scale = 0.0;
  for (auto v : phi) scale = std::max(scale, std::abs(v));
  for (int s = 0; s < sys.slot_count(); ++s) {
    const cplx a = phi[static_cast<std::size_t>(s)];
    const cplx b = phi[static_cast<std::size_t>(sys.mirror(s))];
    if (std::abs(b - std::conj(a)) > 1e-12 * std::max(1.0, scale))
      fail(ErrorCode::NotRealKernel,
           "function is not Hermitian at cell " + std::to_string(sys.index_of(s)));
  }
}

double integrate_one_fold(const SpectralSample& s, std::span<const cplx> phi, int j) {
  const auto& sys = s.system();
  require(j >= 0 && j < s.dim_field(), ErrorCode::InvalidArgument, "colour out of range");
  require_hermitian_function(sys, phi);
  cplx acc{};
  double scale = 0.0;
  for (int slot = 0; slot < sys.slot_count(); ++slot) {
    const cplx t = phi[static_cast<std::size_t>(slot)] * s.value(slot, j);
    acc += t;
    scale += std::abs(t);
  }
  if (std::abs(acc.imag()) > real_tolerance(scale))
    fail(ErrorCode::InternalConsistency,
         "one-fold integral has imaginary residue " + std::to_string(acc.imag()));
  return acc.real();
}

SpectralSample shift_sample(const SpectralSample& s, std::span<const std::int64_t> u) {
  require(u.size() == s.system().dim(), ErrorCode::InvalidArgument, "shift dimension mismatch");
  std::vector<std::int64_t> total = s.shift();
  add_shift(total, u);
  return {s.system_ptr(), s.dim_field(), {s.base().begin(), s.base().end()}, std::move(total)};
}

}  // namespace vgf
