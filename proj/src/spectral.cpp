#include "vgf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "vgf/error.hpp"

namespace vgf {

MatrixSpectralMeasure::MatrixSpectralMeasure(SystemPtr system, int dim_field)
    : system_(std::move(system)), d_(dim_field) {
  require(system_ != nullptr, ErrorCode::InvalidArgument, "measure needs a regular system");
  require(d_ >= 1, ErrorCode::InvalidArgument, "dim_field must be >= 1");
  pos_.assign(static_cast<std::size_t>(system_->pair_count()) * d_ * d_, cplx{});
}

CMatrix MatrixSpectralMeasure::mass_at(int slot) const {
  CMatrix m(d_, d_);
  for (int j = 0; j < d_; ++j)
    for (int jp = 0; jp < d_; ++jp) m(j, jp) = entry(slot, j, jp);
  return m;
}

CMatrix MatrixSpectralMeasure::mass(int k) const { return mass_at(system_->slot_of(k)); }

void MatrixSpectralMeasure::set_mass(int k, const CMatrix& m) {
  require(m.rows() == d_ && m.cols() == d_, ErrorCode::InvalidArgument,
          "mass matrix has wrong shape");
  const int slot = system_->slot_of(k);
  const bool positive = k > 0;
  const int pos = system_->positive_slot(slot) - system_->pair_count();
  for (int j = 0; j < d_; ++j)
    for (int jp = 0; jp < d_; ++jp)
      pos_[index(pos, j, jp)] = positive ? m(j, jp) : std::conj(m(j, jp));
}

double MatrixSpectralMeasure::trace_at(int slot) const {
  double t = 0.0;
  for (int j = 0; j < d_; ++j) t += diag(slot, j);
  return t;
}

double MatrixSpectralMeasure::max_cell_trace() const {
  double m = 0.0;
  for (int s = system_->pair_count(); s < system_->slot_count(); ++s) m = std::max(m, trace_at(s));
  return m;
}

double MatrixSpectralMeasure::total_trace() const {
  double t = 0.0;
  for (int s = 0; s < system_->slot_count(); ++s) t += trace_at(s);
  return t;
}

RawMeasure RawMeasure::from(const MatrixSpectralMeasure& g) {
  RawMeasure raw{g.system_ptr(), g.dim_field(), {}};
  raw.masses.reserve(static_cast<std::size_t>(g.system().slot_count()));
  for (int s = 0; s < g.system().slot_count(); ++s) raw.masses.push_back(g.mass_at(s));
  return raw;
}

std::string ValidationReport::first_failure() const {
  for (const auto& c : cells) {
    if (c.hermitian_defect > kHermitianTol)
      return "hermitian (cell " + std::to_string(c.index) + ")";
    if (c.min_eigenvalue < -kPsdTol) return "psd (cell " + std::to_string(c.index) + ")";
    if (c.evenness_defect > kEvennessTol) return "evenness (cell " + std::to_string(c.index) + ")";
  }
  return {};
}

ValidationReport validate(const RawMeasure& raw) {
  require(raw.system != nullptr, ErrorCode::InvalidArgument, "measure needs a regular system");
  const auto& sys = *raw.system;
  require(static_cast<int>(raw.masses.size()) == sys.slot_count(), ErrorCode::InvalidArgument,
          "raw measure has wrong cell count");
  ValidationReport rep;
  rep.cells.resize(raw.masses.size());
  for (int s = 0; s < sys.slot_count(); ++s) {
    const CMatrix& m = raw.masses[static_cast<std::size_t>(s)];
    const CMatrix& partner = raw.masses[static_cast<std::size_t>(sys.mirror(s))];
    CellReport& c = rep.cells[static_cast<std::size_t>(s)];
    c.index = sys.index_of(s);
    c.hermitian_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
    const CMatrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = eig.eigenvalues().minCoeff();
    c.evenness_defect = (partner - m.conjugate()).cwiseAbs().maxCoeff();
    rep.hermitian_ok = rep.hermitian_ok && c.hermitian_defect <= kHermitianTol;
    rep.psd_ok = rep.psd_ok && c.min_eigenvalue >= -kPsdTol;
    rep.evenness_ok = rep.evenness_ok && c.evenness_defect <= kEvennessTol;
  }
  return rep;
}

ValidationReport validate(const MatrixSpectralMeasure& g) { return validate(RawMeasure::from(g)); }

MatrixSpectralMeasure to_measure(const RawMeasure& raw) {
  const auto rep = validate(raw);
  if (!rep.hermitian_ok) fail(ErrorCode::NotHermitian, "measure invalid: " + rep.first_failure());
  if (!rep.evenness_ok) fail(ErrorCode::NonEvenMeasure, "measure invalid: " + rep.first_failure());
  if (!rep.psd_ok) fail(ErrorCode::NotPsd, "measure invalid: " + rep.first_failure());
  MatrixSpectralMeasure g(raw.system, raw.dim_field);
  for (int k = 1; k <= raw.system->pair_count(); ++k)
    g.set_mass(k, raw.masses[static_cast<std::size_t>(raw.system->slot_of(k))]);
  return g;
}

namespace {

Eigen::MatrixXd correlation_sum(const RegularSystem& sys, int d,
                                const std::function<cplx(int, int, int)>& entry,
                                std::span<const std::int64_t> p) {
  require(sys.is_unit_torus(), ErrorCode::InvalidArgument,
          "correlation requires the unit torus [-pi, pi)^nu");
  require(p.size() == sys.dim(), ErrorCode::InvalidArgument, "lag dimension mismatch");
  CMatrix acc = CMatrix::Zero(d, d);
  double scale = 0.0;
  for (int s = 0; s < sys.slot_count(); ++s) {
    const cplx w = sys.phase(p, s);
    for (int j = 0; j < d; ++j)
      for (int jp = 0; jp < d; ++jp) {
        const cplx e = entry(s, j, jp);
        acc(j, jp) += w * e;
        scale = std::max(scale, std::abs(e));
      }
  }
  const double residue = acc.imag().cwiseAbs().maxCoeff();
  if (residue > kRealTol * std::max(1.0, scale * sys.slot_count()))
    fail(ErrorCode::NonEvenMeasure,
         "correlation has imaginary residue " + std::to_string(residue));
  return acc.real();
}

}  // namespace

Eigen::MatrixXd correlation(const MatrixSpectralMeasure& g, std::span<const std::int64_t> p) {
  return correlation_sum(
      g.system(), g.dim_field(),
      [&g](int s, int j, int jp) { return g.entry(s, j, jp); }, p);
}

Eigen::MatrixXd correlation(const RawMeasure& raw, std::span<const std::int64_t> p) {
  return correlation_sum(
      *raw.system, raw.dim_field,
      [&raw](int s, int j, int jp) { return raw.masses[static_cast<std::size_t>(s)](j, jp); }, p);
}

std::vector<double> trace_measure(const MatrixSpectralMeasure& g) {
  std::vector<double> t(static_cast<std::size_t>(g.system().slot_count()));
  for (int s = 0; s < g.system().slot_count(); ++s) t[static_cast<std::size_t>(s)] = g.trace_at(s);
  return t;
}

MatrixSpectralMeasure rescale(const MatrixSpectralMeasure& g, int N, double a_n, int n) {
  require(N >= 1, ErrorCode::InvalidArgument, "rescale: N must be positive");
  require(a_n > 0.0 && std::isfinite(a_n), ErrorCode::InvalidArgument,
          "rescale: A_N must be positive");
  require(n >= 1, ErrorCode::InvalidArgument, "rescale: chaos order must be positive");
  const auto& sys = g.system();
  require(sys.is_unit_torus(), ErrorCode::InvalidArgument,
          "rescale expects a measure on the unit torus");
  std::vector<double> extent(sys.dim());
  for (double& h : extent) h = N * std::numbers::pi;
  const auto cells = sys.cells_per_axis();
  auto out_sys = share(RegularSystem::build(extent, {cells.begin(), cells.end()}));
  const double nu = static_cast<double>(sys.dim());
  const double factor = std::pow(static_cast<double>(N), 2.0 * nu / n) * std::pow(a_n, -2.0 / n);
  MatrixSpectralMeasure out(out_sys, g.dim_field());
  for (int k = 1; k <= sys.pair_count(); ++k) out.set_mass(k, factor * g.mass(k));
  return out;
}

cplx test_integral(const MatrixSpectralMeasure& g, std::span<const double> f, int j, int jp) {
  const auto& sys = g.system();
  require(static_cast<int>(f.size()) == sys.slot_count(), ErrorCode::InvalidArgument,
          "test function must have one value per cell");
  require(j >= 0 && j < g.dim_field() && jp >= 0 && jp < g.dim_field(),
          ErrorCode::InvalidArgument, "colour out of range");
  cplx acc{};
  for (int s = 0; s < sys.slot_count(); ++s) acc += f[static_cast<std::size_t>(s)] * g.entry(s, j, jp);
  return acc;
}

double moderate_increase_check(const MatrixSpectralMeasure& g, double r) {
  require(r > 0.0, ErrorCode::InvalidArgument, "moderate increase exponent must be positive");
  const auto& sys = g.system();
  double best = 0.0;
  for (int j = 0; j < g.dim_field(); ++j) {
    double acc = 0.0;
    for (int s = 0; s < sys.slot_count(); ++s)
      acc += std::pow(1.0 + sys.representative_norm(s), -r) * g.diag(s, j);
    best = std::max(best, acc);
  }
  return best;
}

MatrixSpectralMeasure refine(const MatrixSpectralMeasure& g, int factor) {
  const auto& coarse = g.system();
  auto fine = share(coarse.refine(factor));
  const auto parents = fine->parent_slots(coarse);
  const double share_of_parent = 1.0 / std::pow(static_cast<double>(factor), coarse.dim());
  MatrixSpectralMeasure out(fine, g.dim_field());
  for (int k = 1; k <= fine->pair_count(); ++k) {
    const int parent = parents[static_cast<std::size_t>(fine->slot_of(k))];
    out.set_mass(k, share_of_parent * g.mass_at(parent));
  }
  return out;
}

MatrixSpectralMeasure from_density(SystemPtr system, int dim_field,
                                   const std::function<CMatrix(std::span<const double>)>& density) {
  using Rule = boost::math::quadrature::gauss<double, 15>;
  // Symmetric rule: abscissa()[0] is the centre, the rest come in +-pairs.
  std::vector<double> nodes, weights;
  const auto& a = Rule::abscissa();
  const auto& w = Rule::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    nodes.push_back(a[i]);
    weights.push_back(w[i]);
    if (a[i] != 0.0) {
      nodes.push_back(-a[i]);
      weights.push_back(w[i]);
    }
  }
  const std::size_t q = nodes.size();
  const auto& sys = *system;
  const std::size_t nu = sys.dim();
  const auto half = sys.cell_width();
  MatrixSpectralMeasure out(system, dim_field);
  std::vector<std::size_t> idx(nu);
  std::vector<double> x(nu);
  for (int k = 1; k <= sys.pair_count(); ++k) {
    const auto centre = sys.representative(k);
    CMatrix acc = CMatrix::Zero(dim_field, dim_field);
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double wt = 1.0;
      for (std::size_t ax = 0; ax < nu; ++ax) {
        x[ax] = centre[ax] + 0.5 * half[ax] * nodes[idx[ax]];
        wt *= 0.5 * half[ax] * weights[idx[ax]];
      }
      acc += wt * density(x);
      std::size_t ax = 0;
      while (ax < nu && ++idx[ax] == q) idx[ax++] = 0;
      if (ax == nu) break;
    }
    out.set_mass(k, 0.5 * (acc + acc.adjoint()));
  }
  return out;
}

MatrixSpectralMeasure from_cell_masses(
    SystemPtr system, int dim_field,
    const std::function<CMatrix(std::span<const double>, std::span<const double>)>& mass) {
  MatrixSpectralMeasure out(system, dim_field);
  for (int k = 1; k <= system->pair_count(); ++k) {
    const Cell c = system->cell(k);
    const CMatrix m = mass(c.lower, c.upper);
    out.set_mass(k, 0.5 * (m + m.adjoint()));
  }
  return out;
}

MatrixSpectralMeasure restrict_measure(const MatrixSpectralMeasure& g, double half_extent) {
  const auto& sys = g.system();
  const auto width = sys.cell_width();
  std::vector<int> cells(sys.dim()), offset(sys.dim());
  for (std::size_t a = 0; a < sys.dim(); ++a) {
    const double count = 2.0 * half_extent / width[a];
    const int rounded = static_cast<int>(std::lround(count));
    require(std::abs(count - rounded) <= 1e-9 * count && rounded >= 2 &&
                rounded <= sys.cells_per_axis()[a],
            ErrorCode::InvalidArgument, "restriction box is not a whole number of cells");
    cells[a] = rounded;
    offset[a] = (sys.cells_per_axis()[a] - rounded) / 2;
  }
  auto sub = share(RegularSystem::build(std::vector<double>(sys.dim(), half_extent), cells));
  MatrixSpectralMeasure out(sub, g.dim_field());
  std::vector<int> pos(sys.dim());
  for (int s = sub->pair_count(); s < sub->slot_count(); ++s) {
    const auto p = sub->axis_position(s);
    for (std::size_t a = 0; a < sys.dim(); ++a) pos[a] = p[a] + offset[a];
    out.set_mass(sub->index_of(s), g.mass_at(sys.slot_at(pos)));
  }
  return out;
}

MatrixSpectralMeasure random_measure(SystemPtr system, int dim_field, std::uint64_t seed,
                                     int rank) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  const int r = rank < 0 ? dim_field : rank;
  MatrixSpectralMeasure g(system, dim_field);
  const int pairs = system->pair_count();
  for (int k = 1; k <= pairs; ++k) {
    CMatrix b(dim_field, r);
    for (int i = 0; i < dim_field; ++i)
      for (int c = 0; c < r; ++c) b(i, c) = cplx(normal(rng), normal(rng));
    CMatrix m = b * b.adjoint();
    const double tr = m.trace().real();
    if (tr > 0.0) m *= unif(rng) / (tr * pairs);
    g.set_mass(k, 0.5 * (m + m.adjoint()));
  }
  return g;
}

}  // namespace vgf
