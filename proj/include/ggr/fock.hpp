#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ggr/constants.hpp"
#include "ggr/diagram_tables.hpp"
#include "ggr/errors.hpp"
#include "ggr/expansion.hpp"
#include "ggr/free_lattice.hpp"
#include "ggr/torus_grid.hpp"

namespace ggr {

// Exact Fock-space reference for a small lattice Fermi gas.  The Hilbert
// space is the fermionic Fock space over the torus sites; the one-particle
// Hamiltonian is the discrete (tight-binding) Laplacian.  Because particle
// number is conserved, everything decomposes into occupation sectors whose
// dense eigendecompositions give the free Gibbs weight, the pair-correlated
// (Jastrow) state F Gamma F / Z_J, its entropy, reduced densities, and the
// pressure functional -- all without any expansion, so the results serve as
// ground truth for the linked-diagram machinery.
struct LatticeModel {
  TorusGrid grid;
  double beta = 1.0;
  double mu = 0.0;
  std::vector<double> f; // pair factor per displacement site, values in [0, 1]
  std::vector<double> v; // pair potential per displacement site, >= 0
  std::function<double(double)> f_of_r; // generating profile (minimum-image distance)
  std::function<double(double)> v_of_r;

  void validate() const {
    grid.validate();
    if (!(beta > 0.0)) throw input_error("inverse temperature must be positive");
    if (!std::isfinite(mu)) throw input_error("chemical potential must be finite");
    if (grid.sites() > 14) throw resource_error("Fock dimension bounded to 2^14");
    if (static_cast<long long>(f.size()) != grid.sites() ||
        static_cast<long long>(v.size()) != grid.sites())
      throw input_error("pair tables must cover every displacement site");
    for (double x : f)
      if (!(x >= 0.0 && x <= 1.0)) throw input_error("pair factor must lie in [0, 1]");
    for (double x : v)
      if (!(x >= 0.0)) throw input_error("pair potential must be repulsive");
  }
};

inline LatticeModel make_lattice_model(const TorusGrid& grid, double beta, double mu,
                                       std::function<double(double)> f_of_r,
                                       std::function<double(double)> v_of_r = nullptr) {
  LatticeModel model;
  model.grid = grid;
  model.beta = beta;
  model.mu = mu;
  model.f_of_r = std::move(f_of_r);
  model.v_of_r = v_of_r ? std::move(v_of_r) : [](double) { return 0.0; };
  const long long s = grid.sites();
  model.f.resize(static_cast<std::size_t>(s));
  model.v.resize(static_cast<std::size_t>(s));
  std::array<int, 3> x = {0, 0, 0};
  for (long long i = 0; i < s; ++i) {
    grid.decode(i, x);
    const double r = std::sqrt(grid.min_image_norm2(x));
    model.f[static_cast<std::size_t>(i)] = model.f_of_r(r);
    model.v[static_cast<std::size_t>(i)] = model.v_of_r(r);
  }
  model.validate();
  return model;
}

namespace fock_detail {

inline int jw_parity(std::uint32_t mask, int k) {
  return __builtin_popcount(mask & ((1u << k) - 1u)) & 1 ? -1 : 1;
}

struct Sector {
  int n = 0;
  std::vector<std::uint32_t> configs;          // ascending bitmasks
  Eigen::VectorXd fdiag;                       // prod_{i<j in c} f(x_i - x_j)
  Eigen::VectorXd vdiag;                       // sum_{i<j in c} v(x_i - x_j)
  Eigen::VectorXd evals;                       // eigenvalues of the hopping Hamiltonian
  Eigen::MatrixXd evecs;
};

} // namespace fock_detail

class ExactState {
public:
  explicit ExactState(const LatticeModel& model) : model_(model) {
    model_.validate();
    const int M = static_cast<int>(model_.grid.sites());
    sites_ = M;
    volume_ = std::pow(model_.grid.length(), model_.grid.d);

    build_one_particle();
    build_sectors();
    build_free();
    build_jastrow();
  }

  const LatticeModel& model() const { return model_; }
  int sites() const { return sites_; }
  double volume() const { return volume_; }

  // ---- free Gibbs state -------------------------------------------------
  double Z() const { return Z_; }
  double Z_determinant() const { return Z_det_; } // det(1 + e^{-beta (h - mu)})
  double gamma1(long long i, long long j) const {
    return gamma1_(static_cast<int>(i), static_cast<int>(j));
  }
  // diagonal-weighted reduced density of the free state at distinct sites
  double rho_free(const std::vector<long long>& pts) const {
    return reduced_density(pts, false);
  }

  // ---- pair-correlated (Jastrow) state -----------------------------------
  double ZJ() const { return ZJ_; }
  double log_ZJ() const { return std::log(ZJ_); }
  double entropy_J() const { return SJ_; }
  double mean_N_J() const { return NJ_; }
  double mean_hop_J() const { return HJ_; }
  double mean_pair_J() const { return VJ_; }
  double min_eigenvalue_J() const { return min_eig_J_; }
  double trace_J() const { return trace_J_; }
  double rho_J(const std::vector<long long>& pts) const { return reduced_density(pts, true); }

  // <c1| e^{-beta dGamma(h)} |c2> from the sector eigendecomposition
  double propagator(std::uint32_t c1, std::uint32_t c2) const {
    if (__builtin_popcount(c1) != __builtin_popcount(c2)) return 0.0;
    const auto& sec = sectors_[static_cast<std::size_t>(__builtin_popcount(c1))];
    const Eigen::ArrayXd w = (-model_.beta * sec.evals.array()).exp();
    const long long i1 = index_[c1], i2 = index_[c2];
    return (sec.evecs.row(i1).array() * sec.evecs.row(i2).array() * w.transpose()).sum();
  }

  // log Z_J recomputed at another inverse temperature from the stored sector
  // eigendecompositions (the one-particle Hamiltonian does not depend on beta)
  double log_ZJ_at(double beta) const {
    double z = 0.0;
    for (const auto& sec : sectors_) {
      const Eigen::ArrayXd w = (-beta * sec.evals.array()).exp();
      const long long dim = sec.configs.size();
      double tr = 0.0;
      for (long long c = 0; c < dim; ++c) {
        const double f2 = sec.fdiag(c) * sec.fdiag(c);
        if (f2 == 0.0) continue;
        // (U e^{-beta Lambda} U^T)(c, c)
        tr += f2 * (sec.evecs.row(c).array().square() * w.transpose()).sum();
      }
      z += std::exp(beta * model_.mu * sec.n) * tr;
    }
    return std::log(z);
  }

  // d/d beta of log Z_J: symmetric difference with one Richardson refinement
  double d_beta_log_ZJ() const {
    const double delta = 1e-4 * model_.beta;
    auto central = [&](double dlt) {
      return (log_ZJ_at(model_.beta + dlt) - log_ZJ_at(model_.beta - dlt)) / (2.0 * dlt);
    };
    const double d1 = central(delta), d2 = central(delta / 2.0);
    return (4.0 * d2 - d1) / 3.0;
  }

  // Exact spectral form of the same derivative.  Expanding each sector trace
  // in the eigenbasis of the hopping Hamiltonian,
  //   Tr[F e^{-beta H} F] = sum_k e^{-beta E_k} <psi_k|F^2|psi_k>,
  // so d/d beta log Z_J = sum over sectors and levels of
  // (mu n - E_k) e^{beta mu n - beta E_k} <psi_k|F^2|psi_k>, divided by Z_J.
  // Note this is NOT -(<H>_J - mu <N>_J): the Jastrow state weighs H as
  // Tr[H F e^{-beta H} F] while the derivative produces Tr[H e^{-beta H} F^2],
  // and F does not commute with H.
  double d_beta_log_ZJ_spectral() const {
    double num = 0.0, den = 0.0;
    for (const auto& sec : sectors_) {
      const long long dim = sec.configs.size();
      const Eigen::ArrayXd f2 = sec.fdiag.array().square();
      // w(k) = <psi_k|F^2|psi_k>
      const Eigen::ArrayXd w =
          (sec.evecs.array().square().colwise() * f2).colwise().sum().transpose();
      (void)dim;
      const Eigen::ArrayXd boltz =
          (model_.beta * model_.mu * sec.n - model_.beta * sec.evals.array()).exp();
      num += (boltz * w * (model_.mu * sec.n - sec.evals.array())).sum();
      den += (boltz * w).sum();
    }
    return num / den;
  }

  // ---- pressure functionals ----------------------------------------------
  // P[Gamma] = (S(Gamma)/beta - Tr[(H + V - mu N) Gamma]) / L^d
  double pressure_J() const {
    return (SJ_ / model_.beta - (HJ_ + VJ_ - model_.mu * NJ_)) / volume_;
  }
  double pressure_free_gibbs() const { return std::log(Z_) / (model_.beta * volume_); }
  // Gibbs state of the interacting Hamiltonian maximizes the functional
  double pressure_interacting_gibbs() const {
    if (sites_ > 10) throw resource_error("interacting Gibbs bounded to 10 sites");
    double z = 0.0;
    for (const auto& sec : sectors_) {
      const long long dim = sec.configs.size();
      Eigen::MatrixXd H = hopping_matrix(sec);
      H.diagonal() += sec.vdiag;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
      z += (model_.beta * model_.mu * sec.n - model_.beta * es.eigenvalues().array())
               .exp()
               .sum();
    }
    return std::log(z) / (model_.beta * volume_);
  }

private:
  LatticeModel model_;
  int sites_ = 0;
  double volume_ = 0.0;
  Eigen::MatrixXd h1_;     // one-particle hopping matrix
  Eigen::MatrixXd gamma1_; // (1 + e^{beta (h - mu)})^{-1}
  std::vector<fock_detail::Sector> sectors_;
  double Z_ = 0.0, Z_det_ = 0.0, ZJ_ = 0.0;
  double SJ_ = 0.0, NJ_ = 0.0, HJ_ = 0.0, VJ_ = 0.0;
  double min_eig_J_ = 0.0, trace_J_ = 0.0;

  void build_one_particle() {
    const int M = sites_;
    const double w = 1.0 / (model_.grid.h * model_.grid.h);
    h1_ = Eigen::MatrixXd::Zero(M, M);
    std::array<int, 3> x = {0, 0, 0};
    for (long long s = 0; s < M; ++s) {
      model_.grid.decode(s, x);
      for (int ax = 0; ax < model_.grid.d; ++ax) {
        for (int dir : {-1, 1}) {
          auto y = x;
          y[static_cast<std::size_t>(ax)] += dir;
          h1_(s, model_.grid.encode(y)) -= w;
        }
        h1_(s, s) += 2.0 * w;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h1_);
    const Eigen::ArrayXd occ =
        1.0 / (1.0 + (model_.beta * (es.eigenvalues().array() - model_.mu)).exp());
    gamma1_ = es.eigenvectors() * occ.matrix().asDiagonal() * es.eigenvectors().transpose();
    Z_det_ = (1.0 + (-model_.beta * (es.eigenvalues().array() - model_.mu)).exp()).prod();
  }

  Eigen::MatrixXd hopping_matrix(const fock_detail::Sector& sec) const {
    const long long dim = sec.configs.size();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (long long c = 0; c < dim; ++c) {
      const std::uint32_t mask = sec.configs[static_cast<std::size_t>(c)];
      for (int j = 0; j < sites_; ++j) {
        if (!(mask & (1u << j))) continue;
        for (int i = 0; i < sites_; ++i) {
          if (h1_(i, j) == 0.0) continue;
          if (i == j) {
            H(c, c) += h1_(j, j);
            continue;
          }
          if (mask & (1u << i)) continue;
          const std::uint32_t removed = mask & ~(1u << j);
          const std::uint32_t moved = removed | (1u << i);
          const int sign = fock_detail::jw_parity(mask, j) * fock_detail::jw_parity(removed, i);
          H(index_of(moved), c) += sign * h1_(i, j);
        }
      }
    }
    return H;
  }

  void build_sectors() {
    const int M = sites_;
    index_.assign(1u << M, -1);
    sectors_.resize(static_cast<std::size_t>(M) + 1);
    for (int n = 0; n <= M; ++n) sectors_[static_cast<std::size_t>(n)].n = n;
    for (std::uint32_t mask = 0; mask < (1u << M); ++mask) {
      auto& sec = sectors_[static_cast<std::size_t>(__builtin_popcount(mask))];
      index_[mask] = static_cast<long long>(sec.configs.size());
      sec.configs.push_back(mask);
    }
    std::array<int, 3> xi = {0, 0, 0}, xj = {0, 0, 0}, dx = {0, 0, 0};
    for (auto& sec : sectors_) {
      const long long dim = sec.configs.size();
      sec.fdiag.resize(dim);
      sec.vdiag.resize(dim);
      for (long long c = 0; c < dim; ++c) {
        const std::uint32_t mask = sec.configs[static_cast<std::size_t>(c)];
        double fp = 1.0, vp = 0.0;
        for (int i = 0; i < sites_; ++i) {
          if (!(mask & (1u << i))) continue;
          model_.grid.decode(i, xi);
          for (int j = i + 1; j < sites_; ++j) {
            if (!(mask & (1u << j))) continue;
            model_.grid.decode(j, xj);
            for (int ax = 0; ax < model_.grid.d; ++ax)
              dx[static_cast<std::size_t>(ax)] =
                  xi[static_cast<std::size_t>(ax)] - xj[static_cast<std::size_t>(ax)];
            const long long disp = model_.grid.encode(dx);
            fp *= model_.f[static_cast<std::size_t>(disp)];
            vp += model_.v[static_cast<std::size_t>(disp)];
          }
        }
        sec.fdiag(c) = fp;
        sec.vdiag(c) = vp;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hopping_matrix(sec));
      sec.evals = es.eigenvalues();
      sec.evecs = es.eigenvectors();
    }
  }

  void build_free() {
    Z_ = 0.0;
    for (const auto& sec : sectors_)
      Z_ += std::exp(model_.beta * model_.mu * sec.n) *
            (-model_.beta * sec.evals.array()).exp().sum();
  }

  void build_jastrow() {
    ZJ_ = 0.0;
    SJ_ = NJ_ = HJ_ = VJ_ = 0.0;
    min_eig_J_ = 1.0;
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(sectors_.size());
    for (const auto& sec : sectors_) {
      const long long dim = sec.configs.size();
      const Eigen::MatrixXd W =
          sec.evecs * (-model_.beta * sec.evals.array()).exp().matrix().asDiagonal() *
          sec.evecs.transpose();
      const double fug = std::exp(model_.beta * model_.mu * sec.n);
      Eigen::MatrixXd B =
          fug * (sec.fdiag.asDiagonal() * W * sec.fdiag.asDiagonal());
      ZJ_ += B.trace();
      blocks.push_back(std::move(B));
    }
    if (!(ZJ_ > 0.0)) throw verify_error("pair-correlated partition function must be positive");
    trace_J_ = 0.0;
    for (std::size_t s = 0; s < sectors_.size(); ++s) {
      const auto& sec = sectors_[s];
      Eigen::MatrixXd& B = blocks[s];
      B /= ZJ_;
      trace_J_ += B.trace();
      NJ_ += sec.n * B.trace();
      VJ_ += (B.diagonal().array() * sec.vdiag.array()).sum();
      HJ_ += (hopping_matrix(sec).transpose().array() * B.array()).sum();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
      for (long long i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()(i);
        min_eig_J_ = std::min(min_eig_J_, lam);
        if (lam > 0.0) SJ_ -= lam * std::log(lam);
      }
    }
  }

  // sum over configurations containing all `pts` of the state's diagonal
  double reduced_density(const std::vector<long long>& pts, bool jastrow) const {
    std::uint32_t need = 0;
    for (long long p : pts) {
      const std::uint32_t bit = 1u << static_cast<int>(p);
      if (need & bit) return 0.0; // repeated creation operator annihilates
      need |= bit;
    }
    double acc = 0.0;
    const double norm = jastrow ? ZJ_ : Z_;
    for (const auto& sec : sectors_) {
      const long long dim = sec.configs.size();
      const Eigen::ArrayXd w = (-model_.beta * sec.evals.array()).exp();
      const double fug = std::exp(model_.beta * model_.mu * sec.n);
      for (long long c = 0; c < dim; ++c) {
        const std::uint32_t mask = sec.configs[static_cast<std::size_t>(c)];
        if ((mask & need) != need) continue;
        const double f2 = jastrow ? sec.fdiag(c) * sec.fdiag(c) : 1.0;
        if (f2 == 0.0) continue;
        const double Wcc = (sec.evecs.row(c).array().square() * w.transpose()).sum();
        acc += fug * f2 * Wcc;
      }
    }
    return acc / norm;
  }

  long long index_of(std::uint32_t mask) const { return index_[mask]; }
  std::vector<long long> index_;
};

// Slater-determinant form of the n-particle propagator: for a quadratic
// Hamiltonian, <c| e^{-beta dGamma(h)} |c'> equals the determinant of the
// e^{-beta h} submatrix on the occupied sites (rows from c, columns from c',
// both ascending).  Used as an independent cross-check of the sector route.
inline double slater_propagator(const LatticeModel& model, std::uint32_t c1, std::uint32_t c2) {
  const int M = static_cast<int>(model.grid.sites());
  // build the one-particle matrix locally to stay independent of ExactState
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(M, M);
  const double w = 1.0 / (model.grid.h * model.grid.h);
  std::array<int, 3> x = {0, 0, 0};
  for (long long s = 0; s < M; ++s) {
    model.grid.decode(s, x);
    for (int ax = 0; ax < model.grid.d; ++ax) {
      for (int dir : {-1, 1}) {
        auto y = x;
        y[static_cast<std::size_t>(ax)] += dir;
        h(s, model.grid.encode(y)) -= w;
      }
      h(s, s) += 2.0 * w;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::MatrixXd expo = es.eigenvectors() *
                               (-model.beta * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                               es.eigenvectors().transpose();
  std::vector<int> rows, cols;
  for (int i = 0; i < M; ++i) {
    if (c1 & (1u << i)) rows.push_back(i);
    if (c2 & (1u << i)) cols.push_back(i);
  }
  if (rows.size() != cols.size()) return 0.0;
  const int n = static_cast<int>(rows.size());
  if (n == 0) return 1.0;
  Eigen::MatrixXd sub(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sub(i, j) = expo(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  return sub.determinant();
}

// ---------------------------------------------------------------------------
// Oracle vs expansion
// ---------------------------------------------------------------------------

struct CompareReport {
  double exact_log_ratio = 0.0; // log(Z_J / Z) from the Fock oracle
  double truncated = 0.0;       // linked-diagram series through p_max
  double residual = 0.0;
  double tail = 0.0; // class-tail estimate for the dropped orders
  bool in_regime = true;
  ExpansionNorms norms;
};

inline DiagramTables oracle_tables(const LatticeModel& model) {
  DiscreteTorusModel torus;
  torus.grid = model.grid;
  torus.beta = model.beta;
  torus.mu = model.mu;
  torus.dispersion = DispersionKind::TightBinding;
  auto f = model.f_of_r;
  if (!f) throw input_error("lattice model lacks its pair-factor profile");
  return build_diagram_tables(torus, [f](double r) {
    const double fr = f(r);
    return fr * fr - 1.0;
  });
}

// Variant taking a pre-built oracle and tables, so callers sweeping p_max or
// combining several checks on one instance pay for the eigensolves only once.
inline CompareReport compare_ggr(const ExactState& exact, const DiagramTables& tables,
                                 int p_max, const ConstantRegistry& reg) {
  CompareReport rep;
  rep.norms = expansion_norms(tables);
  rep.in_regime = rep.norms.rho0 * rep.norms.I_g * std::max(1.0, rep.norms.I_gamma) < 0.2;
  rep.exact_log_ratio = exact.log_ZJ() - std::log(exact.Z());
  const auto series = zj_expansion(tables, p_max, reg);
  rep.truncated = series.total;
  rep.residual = std::abs(rep.exact_log_ratio - rep.truncated);
  rep.tail = series.tail;
  return rep;
}

inline CompareReport compare_ggr(const LatticeModel& model, int p_max,
                                 const ConstantRegistry& reg) {
  const ExactState exact(model);
  return compare_ggr(exact, oracle_tables(model), p_max, reg);
}

} // namespace ggr
