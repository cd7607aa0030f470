#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bijmap/error.hpp"

namespace bijmap {

/// Affine expression sum_i coef_i * x_i + constant over program variables.
struct AffineExpr {
  std::map<int, double> terms;
  double constant = 0.0;

  AffineExpr() = default;
  AffineExpr(double c) : constant(c) {}  // NOLINT: implicit on purpose
  static AffineExpr var(int index, double coef = 1.0) {
    AffineExpr e;
    e.terms[index] = coef;
    return e;
  }

  AffineExpr& operator+=(const AffineExpr& o) {
    for (const auto& [k, v] : o.terms) terms[k] += v;
    constant += o.constant;
    return *this;
  }
  AffineExpr& operator-=(const AffineExpr& o) { return *this += o * -1.0; }
  AffineExpr& operator*=(double s) {
    for (auto& [k, v] : terms) v *= s;
    constant *= s;
    return *this;
  }
  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(AffineExpr a, double s) { return a *= s; }
  friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }

  double eval(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& [k, c] : terms) v += c * x[k];
    return v;
  }
};

/// ||vec||_2 <= scalar.
struct SocConstraint {
  std::vector<AffineExpr> vec;
  AffineExpr scalar;
  std::string label;
};

struct LinearEquality {
  AffineExpr expr;  ///< expr == 0
  std::string label;
};

/// minimize objective subject to linear equalities and second-order cones.
/// A cone with an empty vector part is the half-line scalar >= 0.
class ConeProgram {
 public:
  int add_variable(std::string name) {
    if (index_.count(name)) throw InputError("variable '" + name + "' declared twice");
    const int id = static_cast<int>(names_.size());
    index_.emplace(name, id);
    names_.push_back(std::move(name));
    return id;
  }
  /// Adds `count` variables named prefix[0], prefix[1], ...; returns the first index.
  int add_variables(const std::string& prefix, int count) {
    const int first = num_variables();
    for (int i = 0; i < count; ++i) add_variable(prefix + "[" + std::to_string(i) + "]");
    return first;
  }
  int variable(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InputError("unknown variable '" + name + "'");
    return it->second;
  }
  const std::string& variable_name(int i) const { return names_.at(i); }
  int num_variables() const { return static_cast<int>(names_.size()); }

  void set_objective(AffineExpr e) { objective_ = std::move(e); }
  void add_equality(AffineExpr e, std::string label = {}) { equalities_.push_back({std::move(e), std::move(label)}); }
  void add_cone(std::vector<AffineExpr> vec, AffineExpr scalar, std::string label = {}) {
    cones_.push_back({std::move(vec), std::move(scalar), std::move(label)});
  }
  void add_nonnegative(AffineExpr e, std::string label = {}) { add_cone({}, std::move(e), std::move(label)); }

  const AffineExpr& objective() const { return objective_; }
  const std::vector<LinearEquality>& equalities() const { return equalities_; }
  const std::vector<SocConstraint>& cones() const { return cones_; }

  /// Every expression must reference declared variables only.
  void validate() const {
    auto check = [&](const AffineExpr& e, const std::string& where) {
      for (const auto& [k, c] : e.terms) {
        if (k < 0 || k >= num_variables()) throw InputError(where + " references undeclared variable " + std::to_string(k));
        if (!std::isfinite(c)) throw InputError(where + " has a non-finite coefficient");
      }
      if (!std::isfinite(e.constant)) throw InputError(where + " has a non-finite constant");
    };
    check(objective_, "objective");
    for (std::size_t i = 0; i < equalities_.size(); ++i) check(equalities_[i].expr, "equality " + std::to_string(i));
    for (std::size_t i = 0; i < cones_.size(); ++i) {
      check(cones_[i].scalar, "cone " + std::to_string(i));
      for (const auto& e : cones_[i].vec) check(e, "cone " + std::to_string(i));
    }
  }

  /// Largest violation of the constraints at x (equality residual or cone excess).
  double max_violation(const Eigen::VectorXd& x) const {
    double v = 0.0;
    for (const auto& eq : equalities_) v = std::max(v, std::abs(eq.expr.eval(x)));
    for (const auto& c : cones_) {
      double n2 = 0.0;
      for (const auto& e : c.vec) n2 += std::pow(e.eval(x), 2);
      v = std::max(v, std::sqrt(n2) - c.scalar.eval(x));
    }
    return v;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  AffineExpr objective_;
  std::vector<LinearEquality> equalities_;
  std::vector<SocConstraint> cones_;
};

struct SolverSettings {
  int max_iterations = 100;
  double feastol = 1e-8;  ///< relative primal and dual residual
  double abstol = 1e-10;  ///< absolute duality gap
  double reltol = 1e-8;   ///< relative duality gap
  double step_fraction = 0.99;
  bool verbose = false;
};

/// near_optimal: the solver stalled, but its best iterate meets the
/// tolerances relaxed by a factor of 100.
enum class SolveStatus { optimal, near_optimal, max_iterations, numerical_error };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::near_optimal: return "near_optimal";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_error;
  Eigen::VectorXd x;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

namespace socp {

/// One cone in standard form: s = h - G x, with G stored densely over the
/// columns the cone actually touches.
struct Block {
  int offset = 0;  ///< first row in the stacked s / z vectors
  int dim = 0;
  std::vector<int> cols;
  Eigen::MatrixXd G;  ///< dim x cols.size()
  Eigen::VectorXd h;
  Eigen::MatrixXd P;  ///< G^T J G over cols, used for large cones
};

/// Nesterov-Todd scaling of one cone: W = eta * Wbar, Wbar from the unit-J-norm point w.
struct Scaling {
  double eta = 1.0;
  Eigen::VectorXd w;
};

inline double jnorm2(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v(0) * v(0) - v.tail(v.size() - 1).squaredNorm();
}

inline Scaling nt_scaling(const Eigen::Ref<const Eigen::VectorXd>& s, const Eigen::Ref<const Eigen::VectorXd>& z) {
  Scaling sc;
  const int m = static_cast<int>(s.size());
  if (m == 1) {
    sc.eta = std::sqrt(s(0) / z(0));
    sc.w = Eigen::VectorXd::Ones(1);
    return sc;
  }
  const double sn = std::sqrt(std::max(jnorm2(s), 1e-300));
  const double zn = std::sqrt(std::max(jnorm2(z), 1e-300));
  sc.eta = std::sqrt(sn / zn);
  const Eigen::VectorXd sb = s / sn, zb = z / zn;
  const double gamma = std::sqrt(std::max((1.0 + sb.dot(zb)) / 2.0, 1e-300));
  Eigen::VectorXd jz = zb;
  jz.tail(m - 1) *= -1.0;
  sc.w = (sb + jz) / (2.0 * gamma);
  return sc;
}

/// W v
inline Eigen::VectorXd apply_w(const Scaling& sc, const Eigen::Ref<const Eigen::VectorXd>& v) {
  const int m = static_cast<int>(v.size());
  if (m == 1) return sc.eta * v;
  const double w0 = sc.w(0);
  const auto w1 = sc.w.tail(m - 1);
  const double d = w1.dot(v.tail(m - 1));
  Eigen::VectorXd out(m);
  out(0) = w0 * v(0) + d;
  out.tail(m - 1) = v.tail(m - 1) + (v(0) + d / (1.0 + w0)) * w1;
  return sc.eta * out;
}

/// W^{-1} v
inline Eigen::VectorXd apply_winv(const Scaling& sc, const Eigen::Ref<const Eigen::VectorXd>& v) {
  const int m = static_cast<int>(v.size());
  if (m == 1) return v / sc.eta;
  const double w0 = sc.w(0);
  const auto w1 = sc.w.tail(m - 1);
  const double d = w1.dot(v.tail(m - 1));
  Eigen::VectorXd out(m);
  out(0) = w0 * v(0) - d;
  out.tail(m - 1) = v.tail(m - 1) + (-v(0) + d / (1.0 + w0)) * w1;
  return out / sc.eta;
}

/// Jordan product x o y.
inline Eigen::VectorXd jprod(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const int m = static_cast<int>(x.size());
  Eigen::VectorXd out(m);
  out(0) = x.dot(y);
  if (m > 1) out.tail(m - 1) = x(0) * y.tail(m - 1) + y(0) * x.tail(m - 1);
  return out;
}

/// v with l o v = u.
inline Eigen::VectorXd jdiv(const Eigen::Ref<const Eigen::VectorXd>& l, const Eigen::Ref<const Eigen::VectorXd>& u) {
  const int m = static_cast<int>(l.size());
  Eigen::VectorXd v(m);
  if (m == 1) {
    v(0) = u(0) / l(0);
    return v;
  }
  const auto l1 = l.tail(m - 1);
  const double det = jnorm2(l);
  v(0) = (l(0) * u(0) - l1.dot(u.tail(m - 1))) / det;
  v.tail(m - 1) = (u.tail(m - 1) - v(0) * l1) / l(0);
  return v;
}

/// Largest a with x + a d in the cone, for x in its interior (infinity if unbounded).
inline double max_step(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& d) {
  const double inf = std::numeric_limits<double>::infinity();
  const int m = static_cast<int>(x.size());
  if (m == 1) return d(0) < 0 ? -x(0) / d(0) : inf;
  const double a = jnorm2(d);
  const double b = x(0) * d(0) - x.tail(m - 1).dot(d.tail(m - 1));
  const double c = std::max(jnorm2(x), 0.0);
  const double disc = b * b - a * c;
  double alpha = inf;
  if (disc >= 0) {
    const double den = -b + std::sqrt(disc);
    if (den > 0 && !(a > 0 && b >= 0)) alpha = c / den;
  }
  if (d(0) < 0) alpha = std::min(alpha, -x(0) / d(0));
  return alpha;
}

/// Smallest a with v + a e in the cone (e the identity element).
inline double shift_to_cone(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const int m = static_cast<int>(v.size());
  if (m == 1) return -v(0);
  return v.tail(m - 1).norm() - v(0);
}

class Solver {
 public:
  Solver(const ConeProgram& prog, SolverSettings settings) : settings_(settings) {
    prog.validate();
    n_ = prog.num_variables();
    c_ = Eigen::VectorXd::Zero(n_);
    for (const auto& [k, v] : prog.objective().terms) c_(k) += v;
    c0_ = prog.objective().constant;
    p_ = static_cast<int>(prog.equalities().size());
    A_ = Eigen::MatrixXd::Zero(p_, n_);
    b_ = Eigen::VectorXd::Zero(p_);
    for (int i = 0; i < p_; ++i) {
      for (const auto& [k, v] : prog.equalities()[i].expr.terms) A_(i, k) += v;
      b_(i) = -prog.equalities()[i].expr.constant;
    }
    int offset = 0;
    for (const auto& cone : prog.cones()) {
      Block blk;
      blk.offset = offset;
      blk.dim = 1 + static_cast<int>(cone.vec.size());
      std::map<int, int> local;
      auto collect = [&](const AffineExpr& e) {
        for (const auto& [k, v] : e.terms) local.emplace(k, 0);
      };
      collect(cone.scalar);
      for (const auto& e : cone.vec) collect(e);
      int idx = 0;
      for (auto& [k, slot] : local) {
        slot = idx++;
        blk.cols.push_back(k);
      }
      blk.G = Eigen::MatrixXd::Zero(blk.dim, blk.cols.size());
      blk.h = Eigen::VectorXd::Zero(blk.dim);
      auto fill = [&](int row, const AffineExpr& e) {
        for (const auto& [k, v] : e.terms) blk.G(row, local[k]) -= v;
        blk.h(row) = e.constant;
      };
      fill(0, cone.scalar);
      for (std::size_t r = 0; r < cone.vec.size(); ++r) fill(static_cast<int>(r) + 1, cone.vec[r]);
      if (blk.dim > kLargeCone) {
        Eigen::MatrixXd jg = blk.G;
        jg.bottomRows(blk.dim - 1) *= -1.0;
        blk.P = blk.G.transpose() * jg;
      }
      offset += blk.dim;
      blocks_.push_back(std::move(blk));
    }
    m_ = offset;
  }

  SolveResult solve() {
    SolveResult res;
    const int K = static_cast<int>(blocks_.size());
    if (K == 0) throw InputError("cone program without cone constraints");
    const double hnorm = std::max(1.0, std::sqrt(stacked_h().squaredNorm() + b_.squaredNorm()));
    const double cnorm = std::max(1.0, c_.norm());

    // initial point from two least-squares problems with W = I
    std::vector<Scaling> scal(K);
    for (int k = 0; k < K; ++k) {
      scal[k].eta = 1.0;
      scal[k].w = Eigen::VectorXd::Zero(blocks_[k].dim);
      scal[k].w(0) = 1.0;
    }
    if (!factor(scal)) {
      res.status = SolveStatus::numerical_error;
      return res;
    }
    Eigen::VectorXd x, y, s, z;
    {
      // primal: min ||G x - h|| s.t. A x = b
      Eigen::VectorXd rx = gt_mul(stacked_h());
      auto [dx, dy] = solve_reduced(rx, b_);
      x = dx;
      s = stacked_h() - g_mul(x);
      // dual: min ||z|| s.t. G^T z + A^T y + c = 0
      auto [ux, uy] = solve_reduced(-c_, Eigen::VectorXd::Zero(p_));
      z = g_mul(ux);
      y = uy;
    }
    double ap = -std::numeric_limits<double>::infinity(), ad = ap;
    for (const auto& blk : blocks_) {
      ap = std::max(ap, shift_to_cone(s.segment(blk.offset, blk.dim)));
      ad = std::max(ad, shift_to_cone(z.segment(blk.offset, blk.dim)));
    }
    if (ap >= -1e-8 * std::max(1.0, s.norm())) add_identity(s, 1.0 + std::max(ap, 0.0));
    if (ad >= -1e-8 * std::max(1.0, z.norm())) add_identity(z, 1.0 + std::max(ad, 0.0));

    SolveResult best;
    double best_score = std::numeric_limits<double>::infinity();
    auto finish = [&](SolveStatus failure) {
      const double loose = 100.0;
      if (best_score <= loose) {
        best.status = SolveStatus::near_optimal;
        return best;
      }
      res.status = failure;
      return res;
    };

    for (int it = 0; it <= settings_.max_iterations; ++it) {
      const Eigen::VectorXd rx = gt_mul(z) + A_.transpose() * y + c_;
      const Eigen::VectorXd ry = A_ * x - b_;
      const Eigen::VectorXd rz = g_mul(x) + s - stacked_h();
      const double gap = s.dot(z);
      const double pcost = c_.dot(x);
      const double dcost = -stacked_h().dot(z) - b_.dot(y);
      const double pres = std::sqrt(ry.squaredNorm() + rz.squaredNorm()) / hnorm;
      const double dres = rx.norm() / cnorm;
      double relgap = std::numeric_limits<double>::infinity();
      if (pcost < 0) relgap = gap / -pcost;
      if (dcost > 0) relgap = gap / dcost;
      res.x = x;
      res.primal_objective = pcost + c0_;
      res.dual_objective = dcost + c0_;
      res.gap = gap;
      res.primal_residual = pres;
      res.dual_residual = dres;
      res.iterations = it;
      if (pres <= settings_.feastol && dres <= settings_.feastol &&
          (gap <= settings_.abstol || relgap <= settings_.reltol)) {
        res.status = SolveStatus::optimal;
        return res;
      }
      // progress measured against the tolerances, 1 meaning all met
      const double score = std::max({pres / settings_.feastol, dres / settings_.feastol,
                                     std::min(gap / settings_.abstol, relgap / settings_.reltol)});
      if (score < best_score) {
        best_score = score;
        best = res;
      }
      if (it == settings_.max_iterations) break;

      for (int k = 0; k < K; ++k) {
        const auto& blk = blocks_[k];
        scal[k] = nt_scaling(s.segment(blk.offset, blk.dim), z.segment(blk.offset, blk.dim));
      }
      std::vector<Eigen::VectorXd> lambda(K);
      for (int k = 0; k < K; ++k) lambda[k] = apply_w(scal[k], z.segment(blocks_[k].offset, blocks_[k].dim));
      if (!factor(scal)) return finish(SolveStatus::numerical_error);
      const double mu = gap / K;

      // affine scaling direction, then Mehrotra corrector
      std::vector<Eigen::VectorXd> bs(K);
      for (int k = 0; k < K; ++k) bs[k] = -jprod(lambda[k], lambda[k]);
      Direction aff = newton(scal, lambda, bs, rx, ry, rz);
      double alpha = std::min(1.0, step_length(lambda, aff));
      double sigma = 0.0;
      {
        const Eigen::VectorXd s2 = s + alpha * aff.ds, z2 = z + alpha * aff.dz;
        sigma = std::pow(std::max(0.0, std::min(1.0, s2.dot(z2) / gap)), 3);
      }
      for (int k = 0; k < K; ++k) {
        bs[k] = -jprod(lambda[k], lambda[k]) - jprod(aff.ds_scaled[k], aff.dz_scaled[k]);
        bs[k](0) += sigma * mu;
      }
      Direction dir = newton(scal, lambda, bs, (1.0 - sigma) * rx, (1.0 - sigma) * ry, (1.0 - sigma) * rz);
      alpha = std::min(1.0, settings_.step_fraction * step_length(lambda, dir));
      if (settings_.verbose) std::fprintf(stderr, "it %d pres %.3e dres %.3e gap %.3e pcost %.6e dcost %.6e alpha %.3e sigma %.3e\n", it, pres, dres, gap, pcost, dcost, alpha, sigma);
      if (!(alpha > 0) || !dir.dx.allFinite()) return finish(SolveStatus::numerical_error);
      x += alpha * dir.dx;
      y += alpha * dir.dy;
      s += alpha * dir.ds;
      z += alpha * dir.dz;
    }
    return finish(SolveStatus::max_iterations);
  }

 private:
  static constexpr int kLargeCone = 16;

  struct Direction {
    Eigen::VectorXd dx, dy, ds, dz;
    std::vector<Eigen::VectorXd> ds_scaled, dz_scaled;  ///< W^{-1} ds and W dz per cone
  };

  Eigen::VectorXd stacked_h() const {
    Eigen::VectorXd h(m_);
    for (const auto& blk : blocks_) h.segment(blk.offset, blk.dim) = blk.h;
    return h;
  }

  Eigen::VectorXd g_mul(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(m_);
    for (const auto& blk : blocks_) {
      Eigen::VectorXd xl(blk.cols.size());
      for (std::size_t i = 0; i < blk.cols.size(); ++i) xl(i) = x(blk.cols[i]);
      out.segment(blk.offset, blk.dim) = blk.G * xl;
    }
    return out;
  }

  Eigen::VectorXd gt_mul(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (const auto& blk : blocks_) {
      const Eigen::VectorXd loc = blk.G.transpose() * v.segment(blk.offset, blk.dim);
      for (std::size_t i = 0; i < blk.cols.size(); ++i) out(blk.cols[i]) += loc(i);
    }
    return out;
  }

  void add_identity(Eigen::VectorXd& v, double a) const {
    for (const auto& blk : blocks_) v(blk.offset) += a;
  }

  /// Assembles H = sum_k G_k^T W_k^{-2} G_k and factors the (regularized) system.
  bool factor(const std::vector<Scaling>& scal) {
    H_ = Eigen::MatrixXd::Zero(n_, n_);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const auto& blk = blocks_[k];
      const int nc = static_cast<int>(blk.cols.size());
      Eigen::MatrixXd local;
      if (blk.dim > kLargeCone) {
        // W^{-2} = eta^{-2} (2 J w w^T J - J)
        Eigen::VectorXd jw = scal[k].w;
        jw.tail(blk.dim - 1) *= -1.0;
        const Eigen::VectorXd g = blk.G.transpose() * jw;
        local = (2.0 * g * g.transpose() - blk.P) / (scal[k].eta * scal[k].eta);
      } else {
        Eigen::MatrixXd wg(blk.dim, nc);
        for (int c = 0; c < nc; ++c) wg.col(c) = apply_winv(scal[k], blk.G.col(c));
        local = wg.transpose() * wg;
      }
      for (int a = 0; a < nc; ++a) {
        for (int b = 0; b < nc; ++b) H_(blk.cols[a], blk.cols[b]) += local(a, b);
      }
    }
    const double scale = std::max(1.0, H_.diagonal().cwiseAbs().maxCoeff());
    reg_ = 1e-13 * scale;
    if (p_ == 0) {
      Eigen::MatrixXd Hr = H_;
      Hr.diagonal().array() += reg_;
      llt_.compute(Hr);
      return llt_.info() == Eigen::Success;
    }
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n_ + p_, n_ + p_);
    kkt.topLeftCorner(n_, n_) = H_;
    kkt.topLeftCorner(n_, n_).diagonal().array() += reg_;
    kkt.topRightCorner(n_, p_) = A_.transpose();
    kkt.bottomLeftCorner(p_, n_) = A_;
    kkt.bottomRightCorner(p_, p_).diagonal().array() -= reg_;
    lu_.compute(kkt);
    return true;
  }

  /// Solves [H A^T; A 0] [dx; dy] = [r1; r2] with two refinement steps.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_reduced(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2) const {
    Eigen::VectorXd rhs(n_ + p_);
    rhs << r1, r2;
    auto raw = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
      if (p_ == 0) return llt_.solve(r);
      return lu_.solve(r);
    };
    auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      Eigen::VectorXd out(n_ + p_);
      out.head(n_) = H_ * v.head(n_) + A_.transpose() * v.tail(p_);
      out.tail(p_) = A_ * v.head(n_);
      return out;
    };
    Eigen::VectorXd sol = raw(rhs);
    for (int i = 0; i < 2; ++i) sol += raw(rhs - apply(sol));
    return {sol.head(n_), sol.tail(p_)};
  }

  Eigen::VectorXd apply_blocks(const std::vector<Scaling>& scal, const Eigen::VectorXd& v, bool inverse) const {
    Eigen::VectorXd out(m_);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const auto& blk = blocks_[k];
      const Eigen::VectorXd seg = v.segment(blk.offset, blk.dim);
      out.segment(blk.offset, blk.dim) =
          inverse ? apply_winv(scal[k], apply_winv(scal[k], seg)) : apply_w(scal[k], apply_w(scal[k], seg));
    }
    return out;
  }

  /// Solves [0 A^T G^T; A 0 0; G 0 -W^2] [dx; dy; dz] = [r1; r2; r3] through the
  /// reduced system, then refines against the full system. The refinement keeps
  /// the dual residual accurate once W becomes badly scaled near the optimum.
  void solve_full(const std::vector<Scaling>& scal, const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                  const Eigen::VectorXd& r3, Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
    auto once = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c, Eigen::VectorXd& x,
                    Eigen::VectorXd& y, Eigen::VectorXd& z) {
      auto [sx, sy] = solve_reduced(a + gt_mul(apply_blocks(scal, c, true)), b);
      z = apply_blocks(scal, g_mul(sx) - c, true);
      x = std::move(sx);
      y = std::move(sy);
    };
    once(r1, r2, r3, dx, dy, dz);
    const double scale = std::max({1.0, r1.norm(), r2.norm(), r3.norm()});
    for (int i = 0; i < 3; ++i) {
      const Eigen::VectorXd e1 = r1 - gt_mul(dz) - A_.transpose() * dy;
      const Eigen::VectorXd e2 = r2 - A_ * dx;
      const Eigen::VectorXd e3 = r3 - g_mul(dx) + apply_blocks(scal, dz, false);
      if (std::sqrt(e1.squaredNorm() + e2.squaredNorm() + e3.squaredNorm()) <= 1e-15 * scale) break;
      Eigen::VectorXd cx, cy, cz;
      once(e1, e2, e3, cx, cy, cz);
      dx += cx;
      dy += cy;
      dz += cz;
    }
  }

  Direction newton(const std::vector<Scaling>& scal, const std::vector<Eigen::VectorXd>& lambda,
                   const std::vector<Eigen::VectorXd>& bs, const Eigen::VectorXd& rx, const Eigen::VectorXd& ry,
                   const Eigen::VectorXd& rz) const {
    const int K = static_cast<int>(blocks_.size());
    // u_k = lambda_k \ bs_k; ds~ + dz~ = u, with ds~ = W^{-1} ds and dz~ = W dz
    std::vector<Eigen::VectorXd> u(K);
    Eigen::VectorXd wu(m_);
    for (int k = 0; k < K; ++k) {
      const auto& blk = blocks_[k];
      u[k] = jdiv(lambda[k], bs[k]);
      wu.segment(blk.offset, blk.dim) = apply_w(scal[k], u[k]);
    }
    Direction d;
    solve_full(scal, -rx, -ry, -rz - wu, d.dx, d.dy, d.dz);
    d.ds.resize(m_);
    d.ds_scaled.resize(K);
    d.dz_scaled.resize(K);
    for (int k = 0; k < K; ++k) {
      const auto& blk = blocks_[k];
      d.dz_scaled[k] = apply_w(scal[k], d.dz.segment(blk.offset, blk.dim));
      d.ds_scaled[k] = u[k] - d.dz_scaled[k];
      d.ds.segment(blk.offset, blk.dim) = apply_w(scal[k], d.ds_scaled[k]);
    }
    return d;
  }

  double step_length(const std::vector<Eigen::VectorXd>& lambda, const Direction& d) const {
    double a = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      a = std::min(a, max_step(lambda[k], d.ds_scaled[k]));
      a = std::min(a, max_step(lambda[k], d.dz_scaled[k]));
    }
    return a;
  }

  SolverSettings settings_;
  int n_ = 0, p_ = 0, m_ = 0;
  Eigen::VectorXd c_;
  double c0_ = 0.0;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  std::vector<Block> blocks_;
  Eigen::MatrixXd H_;
  double reg_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace socp

/// Primal-dual interior-point method with Nesterov-Todd scaling and a
/// Mehrotra predictor-corrector step.
inline SolveResult solve(const ConeProgram& program, const SolverSettings& settings = {}) {
  socp::Solver solver(program, settings);
  return solver.solve();
}

}  // namespace bijmap
