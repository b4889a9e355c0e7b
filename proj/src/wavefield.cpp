#include "qedbohm/wavefield.hpp"

#include <cmath>

#include "qedbohm/units.hpp"

namespace qedbohm {

namespace {

using RowMajorBlock = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct BlockIndex {
  std::size_t n, m, k;
};

BlockIndex decode_block(const MultiIndexSpace& space, std::size_t b) {
  const std::size_t nk = space.n_photon();
  const std::size_t ne = space.n_electron();
  return {b / (ne * nk), (b / nk) % ne, b % nk};
}

Eigen::Map<const RowMajorBlock> block_matrix(const Eigen::VectorXcd& c, const MultiIndexSpace& space,
                                             std::size_t b) {
  const auto ny = static_cast<Eigen::Index>(space.n_y());
  const auto nz = static_cast<Eigen::Index>(space.n_z());
  return Eigen::Map<const RowMajorBlock>(c.data() + static_cast<Eigen::Index>(b) * ny * nz, ny, nz);
}

}  // namespace

bool in_domain(const Bases& bases, const ConfigPoint& p) {
  const double l = bases.well.length();
  auto finite = [](double v) { return std::isfinite(v); };
  return finite(p.x1) && finite(p.x2) && finite(p.q) && finite(p.y) && finite(p.z) && p.x1 >= 0.0 &&
         p.x1 <= l && p.x2 >= 0.0 && p.x2 <= l && p.y >= bases.pointer.domain_min() &&
         p.y < bases.pointer.domain_max() && p.z >= bases.pointer.domain_min() && p.z < bases.pointer.domain_max();
}

FieldEvaluator::FieldEvaluator(const MultiIndexSpace& space, const Bases& bases) : space_(&space), bases_(&bases) {
  if (bases.pointer.size() != space.n_y() || bases.well.size() != space.n_electron() ||
      bases.photon.size() != space.n_photon()) {
    throw std::invalid_argument("FieldEvaluator: basis and index-space dimensions disagree");
  }
}

void FieldEvaluator::update_well(RealFactor& w, double x) {
  if (w.key == x) return;
  const auto& well = bases_->well;
  const auto n = static_cast<Eigen::Index>(well.size());
  w.f.resize(n);
  w.d1.resize(n);
  w.d2.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto level = static_cast<std::size_t>(i);
    w.f(i) = well.value(level, x);
    w.d1(i) = well.derivative(level, x);
    w.d2(i) = well.second_derivative(level, x);
  }
  w.key = x;
}

void FieldEvaluator::update_photon(double q) {
  if (q_.key == q) return;
  const auto count = bases_->photon.size();
  const auto n = static_cast<Eigen::Index>(count);
  const Eigen::ArrayXd psi = bases_->photon.values(q, count + 1);
  q_.f = psi.head(n);
  q_.d1.resize(n);
  q_.d2.resize(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double md = static_cast<double>(m);
    q_.d1(m) = -std::sqrt((md + 1.0) / 2.0) * psi(m + 1) + (m > 0 ? std::sqrt(md / 2.0) * psi(m - 1) : 0.0);
    q_.d2(m) = (q * q - (2.0 * md + 1.0)) * psi(m);
  }
  q_.key = q;
}

void FieldEvaluator::update_pointer(PointerFactor& p, double y) {
  if (p.key == y) return;
  const auto& ptr = bases_->pointer;
  p.f = ptr.values(y);
  const auto n = p.f.size();
  p.d1.resize(n);
  p.d2.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double k = ptr.wavenumber(static_cast<std::size_t>(i));
    p.d1(i) = cplx(0.0, k) * p.f(i);
    p.d2(i) = -k * k * p.f(i);
  }
  p.stack.resize(n, 3);
  p.stack << p.f, p.d1, p.d2;
  p.key = y;
}

FieldEval FieldEvaluator::operator()(const Eigen::VectorXcd& c, const ConfigPoint& p) {
  if (c.size() != static_cast<Eigen::Index>(space_->size())) {
    throw std::invalid_argument("evaluate: coefficient vector has the wrong size");
  }
  if (!in_domain(*bases_, p)) throw DomainError("evaluation point outside the configuration domain");
  update_well(x1_, p.x1);
  update_well(x2_, p.x2);
  update_photon(p.q);
  update_pointer(y_, p.y);
  update_pointer(z_, p.z);

  FieldEval f{};
  const std::size_t blocks = space_->matter_size();
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto [n, m, k] = decode_block(*space_, b);
    const auto cb = block_matrix(c, *space_, b);
    // blocks outside the occupied parity sector are exactly zero
    if (cb.isZero(0.0)) continue;
    w_.noalias() = cb * z_.stack;
    const Eigen::RowVector3cd fw = y_.f.transpose() * w_;
    const cplx s0 = fw(0);
    const cplx sz = fw(1);
    const cplx szz = fw(2);
    const cplx sy = y_.d1.cwiseProduct(w_.col(0)).sum();
    const cplx syy = y_.d2.cwiseProduct(w_.col(0)).sum();

    const auto ni = static_cast<Eigen::Index>(n);
    const auto mi = static_cast<Eigen::Index>(m);
    const auto ki = static_cast<Eigen::Index>(k);
    const double a = x1_.f(ni), a1 = x1_.d1(ni), a2 = x1_.d2(ni);
    const double e = x2_.f(mi), e1 = x2_.d1(mi), e2 = x2_.d2(mi);
    const double g = q_.f(ki), g1 = q_.d1(ki), g2 = q_.d2(ki);

    const double aeg = a * e * g;
    f.value += aeg * s0;
    f.d_x1 += a1 * e * g * s0;
    f.d_x2 += a * e1 * g * s0;
    f.d_q += a * e * g1 * s0;
    f.d_y += aeg * sy;
    f.d_z += aeg * sz;
    f.d2_x1x1 += a2 * e * g * s0;
    f.d2_x2x2 += a * e2 * g * s0;
    f.d2_qq += a * e * g2 * s0;
    f.d2_yy += aeg * syy;
    f.d2_zz += aeg * szz;
    f.d2_y_x1 += a1 * e * g * sy;
    f.d2_z_x2 += a * e1 * g * sz;
    f.d3_y_x1x1 += a2 * e * g * sy;
    f.d3_z_x2x2 += a * e2 * g * sz;
  }
  return f;
}

FieldEval evaluate(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases,
                   const ConfigPoint& p) {
  FieldEvaluator eval(space, bases);
  return eval(c, p);
}

cplx hamiltonian_action(const FieldEval& f, const ConfigPoint& p, const ScenarioConfig& cfg, const Bases& bases,
                        double mu) {
  const double hbar = units::hbar;
  const double me = bases.well.mass();
  const double my = bases.pointer.mass();
  const double kin = hbar * hbar / (2.0 * me);
  const double half_l = 0.5 * bases.well.length();
  const double e0 = bases.well.energy(0);
  const double hw = hbar * bases.photon.omega();
  const cplx ih(0.0, hbar);

  cplx h = -kin * (f.d2_x1x1 + f.d2_x2x2);
  h += 0.5 * hw * (p.q * p.q * f.value - f.d2_qq);
  h += cfg.coupling_alpha * p.q * ((p.x1 - half_l) + (p.x2 - half_l)) * f.value;
  h += -hbar * hbar / (2.0 * my) * (f.d2_yy + f.d2_zz);
  h += mu * ih * (kin * (f.d3_y_x1x1 + f.d3_z_x2x2) + e0 * (f.d_y + f.d_z));
  return h;
}

ConditionalState conditional_coefficients(const Eigen::VectorXcd& c, const MultiIndexSpace& space,
                                          const Bases& bases, double y, double z) {
  const double lo = bases.pointer.domain_min();
  const double hi = bases.pointer.domain_max();
  if (!(y >= lo && y < hi && z >= lo && z < hi)) throw DomainError("pointer slice outside the domain");
  const Eigen::VectorXcd fy = bases.pointer.values(y).head(static_cast<Eigen::Index>(space.n_y()));
  const Eigen::VectorXcd fz = bases.pointer.values(z).head(static_cast<Eigen::Index>(space.n_z()));
  ConditionalState out;
  const auto blocks = static_cast<Eigen::Index>(space.matter_size());
  out.coefficients.resize(blocks);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    out.coefficients(b) = fy.transpose() * block_matrix(c, space, static_cast<std::size_t>(b)) * fz;
  }
  out.raw_norm = out.coefficients.norm();
  if (!(out.raw_norm * out.raw_norm >= 1e-30)) {
    throw DegenerateSliceError("conditional wave function vanishes at the pointer slice");
  }
  out.coefficients /= out.raw_norm;
  return out;
}

Eigen::VectorXd conditional_populations(const ConditionalState& cond) { return cond.coefficients.cwiseAbs2(); }

double conditional_energy(const ConditionalState& cond, const MultiIndexSpace& space, const Bases& bases,
                          Subsystem which) {
  const Eigen::VectorXd p = conditional_populations(cond);
  double e = 0.0;
  for (std::size_t b = 0; b < space.matter_size(); ++b) {
    const auto [n, m, k] = decode_block(space, b);
    double level = 0.0;
    switch (which) {
      case Subsystem::x1: level = bases.well.energy(n); break;
      case Subsystem::x2: level = bases.well.energy(m); break;
      case Subsystem::field: level = bases.photon.energy(k); break;
    }
    e += level * p(static_cast<Eigen::Index>(b));
  }
  return e;
}

}  // namespace qedbohm
