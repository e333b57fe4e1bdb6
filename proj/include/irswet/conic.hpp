// SPDX-License-Identifier: Apache-2.0
//
// irswet: IRS-assisted multiuser wireless energy transfer optimization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Convex conic programs and a log-barrier interior-point solver.
//
// Programs are written in inequality ("LMI") form over real scalar variables:
//
//     maximize    c'x + c0
//     subject to  A x = b
//                 G_i x + h_i in K_i
//
// where each K_i is a nonnegative ray, a second-order cone, a rotated
// second-order cone, an exponential cone or a real symmetric PSD cone.
// Hermitian PSD constraints are lowered to the real symmetric embedding
//
//     emb(R + jI) = [ R  -I ]
//                   [ I   R ]
//
// which is PSD exactly when the Hermitian matrix is.  Multipliers of a lowered
// constraint are lifted back with J^H Z J, J = [I; -jI].

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace irswet::conic {

using cplx = std::complex<double>;

struct Var {
  int index = -1;
};

/// Sparse affine expression sum_i a_i x_i + c over scalar variables.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT
  LinExpr(Var v, double coef = 1.0) : terms_{{v.index, coef}} {}  // NOLINT

  LinExpr& operator+=(const LinExpr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) {
    for (const auto& [i, a] : o.terms_) terms_.emplace_back(i, -a);
    constant_ -= o.constant_;
    return *this;
  }
  LinExpr& operator*=(double s) {
    for (auto& t : terms_) t.second *= s;
    constant_ *= s;
    return *this;
  }
  void add_term(Var v, double coef) { terms_.emplace_back(v.index, coef); }

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }

  double evaluate(const Eigen::VectorXd& x) const {
    double v = constant_;
    for (const auto& [i, a] : terms_) v += a * x[i];
    return v;
  }

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

inline LinExpr operator+(Var a, Var b) { return LinExpr(a) + LinExpr(b); }
inline LinExpr operator-(Var a, Var b) { return LinExpr(a) - LinExpr(b); }
inline LinExpr operator*(double s, Var v) { return LinExpr(v, s); }

using SparseC = Eigen::SparseMatrix<cplx>;
using SparseR = Eigen::SparseMatrix<double>;

/// Hermitian matrix affine in the variables: H(x) = constant + sum_v x_v H_v.
struct HermitianAffine {
  Eigen::MatrixXcd constant;
  std::vector<std::pair<int, SparseC>> terms;
};

/// Real symmetric matrix affine in the variables.
struct SymmetricAffine {
  Eigen::MatrixXd constant;
  std::vector<std::pair<int, SparseR>> terms;
};

/// Handle to a Hermitian matrix variable, stored as n*n real scalars:
/// n diagonal entries, then (Re, Im) of each strictly upper entry.
class HermitianVar {
 public:
  HermitianVar() = default;
  HermitianVar(int n, int first) : n_(n), first_(first) {}

  int order() const { return n_; }
  int first() const { return first_; }
  int scalar_count() const { return n_ * n_; }

  Var diag(int i) const { return {first_ + i}; }
  Var re(int i, int j) const { return {first_ + n_ + 2 * upper_index(i, j)}; }
  Var im(int i, int j) const { return {first_ + n_ + 2 * upper_index(i, j) + 1}; }

  /// Re tr(C X) for Hermitian C, as a linear expression.
  LinExpr trace_with(const Eigen::MatrixXcd& c) const {
    LinExpr e;
    for (int i = 0; i < n_; ++i) e.add_term(diag(i), c(i, i).real());
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        // C_ji X_ij + C_ij X_ji = 2 Re(C_ji X_ij)
        const cplx cji = c(j, i);
        e.add_term(re(i, j), 2.0 * cji.real());
        e.add_term(im(i, j), -2.0 * cji.imag());
      }
    }
    return e;
  }

  HermitianAffine as_affine() const {
    HermitianAffine a;
    a.constant = Eigen::MatrixXcd::Zero(n_, n_);
    for (int i = 0; i < n_; ++i) {
      SparseC m(n_, n_);
      m.insert(i, i) = 1.0;
      a.terms.emplace_back(diag(i).index, std::move(m));
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        SparseC mr(n_, n_);
        mr.insert(i, j) = 1.0;
        mr.insert(j, i) = 1.0;
        a.terms.emplace_back(re(i, j).index, std::move(mr));
        SparseC mi(n_, n_);
        mi.insert(i, j) = cplx(0.0, 1.0);
        mi.insert(j, i) = cplx(0.0, -1.0);
        a.terms.emplace_back(im(i, j).index, std::move(mi));
      }
    }
    return a;
  }

  Eigen::MatrixXcd value(const Eigen::VectorXd& x) const {
    Eigen::MatrixXcd m(n_, n_);
    for (int i = 0; i < n_; ++i) m(i, i) = x[diag(i).index];
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        m(i, j) = cplx(x[re(i, j).index], x[im(i, j).index]);
        m(j, i) = std::conj(m(i, j));
      }
    }
    return m;
  }

 private:
  int upper_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i == j) throw std::invalid_argument("HermitianVar: diagonal has no (re, im) pair");
    // row-major enumeration of strictly upper entries
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

  int n_ = 0;
  int first_ = 0;
};

enum class ConeType { equality, nonneg, soc, rotated_soc, exp, psd, hermitian_psd };

inline const char* to_string(ConeType t) {
  switch (t) {
    case ConeType::equality: return "equality";
    case ConeType::nonneg: return "nonneg";
    case ConeType::soc: return "soc";
    case ConeType::rotated_soc: return "rotated_soc";
    case ConeType::exp: return "exp";
    case ConeType::psd: return "psd";
    case ConeType::hermitian_psd: return "hermitian_psd";
  }
  return "?";
}

class ConicProgram {
 public:
  struct Constraint {
    ConeType type;
    std::vector<LinExpr> rows;  // vector cones and scalar constraints
    SymmetricAffine sym;        // psd
    HermitianAffine herm;       // hermitian_psd
  };

  struct VariableInfo {
    std::string name;
    int first;
    int count;
    std::string kind;  // scalar, vector, hermitian
  };

  Var add_scalar(std::string name) {
    const int idx = n_;
    ++n_;
    vars_.push_back({std::move(name), idx, 1, "scalar"});
    return {idx};
  }

  std::vector<Var> add_vector(std::string name, int count) {
    if (count < 0) throw std::invalid_argument("add_vector: negative size");
    std::vector<Var> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = {n_ + i};
    vars_.push_back({std::move(name), n_, count, "vector"});
    n_ += count;
    return v;
  }

  HermitianVar add_hermitian(std::string name, int order) {
    if (order <= 0) throw std::invalid_argument("add_hermitian: order must be positive");
    HermitianVar h(order, n_);
    vars_.push_back({std::move(name), n_, order * order, "hermitian"});
    n_ += order * order;
    return h;
  }

  void maximize(LinExpr objective) {
    check(objective);
    objective_ = std::move(objective);
  }

  int add_equality(LinExpr expr) { return push(ConeType::equality, {std::move(expr)}); }
  int add_nonneg(LinExpr expr) { return push(ConeType::nonneg, {std::move(expr)}); }

  /// ||x|| <= t
  int add_soc(LinExpr t, std::vector<LinExpr> x) {
    x.insert(x.begin(), std::move(t));
    return push(ConeType::soc, std::move(x));
  }

  /// 2 u v >= ||x||^2, u >= 0, v >= 0
  int add_rotated_soc(LinExpr u, LinExpr v, std::vector<LinExpr> x) {
    x.insert(x.begin(), std::move(v));
    x.insert(x.begin(), std::move(u));
    return push(ConeType::rotated_soc, std::move(x));
  }

  /// y exp(x / y) <= z, y > 0 (closure of)
  int add_exp(LinExpr x, LinExpr y, LinExpr z) {
    return push(ConeType::exp, {std::move(x), std::move(y), std::move(z)});
  }

  int add_psd(SymmetricAffine m) {
    check_matrix(m.constant.rows(), m.constant.cols(), m.terms);
    Constraint c{ConeType::psd, {}, std::move(m), {}};
    constraints_.push_back(std::move(c));
    return static_cast<int>(constraints_.size()) - 1;
  }

  int add_hermitian_psd(HermitianAffine m) {
    check_matrix(m.constant.rows(), m.constant.cols(), m.terms);
    Constraint c{ConeType::hermitian_psd, {}, {}, std::move(m)};
    constraints_.push_back(std::move(c));
    return static_cast<int>(constraints_.size()) - 1;
  }

  int variable_count() const { return n_; }
  const LinExpr& objective() const { return objective_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<VariableInfo>& variables() const { return vars_; }

  /// Writes the program to a JSON file for offline inspection.
  void dump_json(const std::string& path) const {
    using nlohmann::json;
    auto lin = [](const LinExpr& e) {
      json t = json::array();
      for (const auto& [i, a] : e.terms()) t.push_back({i, a});
      return json{{"terms", t}, {"constant", e.constant()}};
    };
    json j;
    j["variables"] = json::array();
    for (const auto& v : vars_) {
      j["variables"].push_back({{"name", v.name}, {"first", v.first}, {"count", v.count}, {"kind", v.kind}});
    }
    j["objective"] = lin(objective_);
    j["constraints"] = json::array();
    for (const auto& c : constraints_) {
      json jc;
      jc["type"] = to_string(c.type);
      if (c.type == ConeType::psd) {
        jc["order"] = c.sym.constant.rows();
        jc["terms"] = c.sym.terms.size();
      } else if (c.type == ConeType::hermitian_psd) {
        jc["order"] = c.herm.constant.rows();
        jc["terms"] = c.herm.terms.size();
      } else {
        jc["rows"] = json::array();
        for (const auto& r : c.rows) jc["rows"].push_back(lin(r));
      }
      j["constraints"].push_back(jc);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_json: cannot open " + path);
    out << j.dump(2) << '\n';
  }

 private:
  int push(ConeType t, std::vector<LinExpr> rows) {
    for (const auto& r : rows) check(r);
    constraints_.push_back({t, std::move(rows), {}, {}});
    return static_cast<int>(constraints_.size()) - 1;
  }

  void check(const LinExpr& e) const {
    for (const auto& [i, a] : e.terms()) {
      if (i < 0 || i >= n_) throw std::invalid_argument("expression references an undeclared variable");
      if (!std::isfinite(a)) throw std::invalid_argument("expression has a non-finite coefficient");
    }
    if (!std::isfinite(e.constant())) throw std::invalid_argument("expression has a non-finite constant");
  }

  template <typename Terms>
  void check_matrix(Eigen::Index rows, Eigen::Index cols, const Terms& terms) const {
    if (rows != cols || rows == 0) throw std::invalid_argument("PSD constraint needs a square nonempty matrix");
    for (const auto& [i, m] : terms) {
      if (i < 0 || i >= n_) throw std::invalid_argument("PSD term references an undeclared variable");
      if (m.rows() != rows || m.cols() != cols) throw std::invalid_argument("PSD term dimension mismatch");
    }
  }

  int n_ = 0;
  std::vector<VariableInfo> vars_;
  LinExpr objective_;
  std::vector<Constraint> constraints_;
};

enum class Status { optimal, infeasible, numerical_failure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::numerical_failure: return "numerical-failure";
  }
  return "?";
}

struct ConicSolution {
  Status status = Status::numerical_failure;
  double objective_value = 0.0;
  Eigen::VectorXd x;
  /// Max primal infeasibility (equality residual and cone violation).
  double residual = std::numeric_limits<double>::infinity();
  /// Duality gap bound nu / t at the returned point.
  double gap = std::numeric_limits<double>::infinity();
  int newton_steps = 0;
  /// One multiplier per constraint, in the constraint's own coordinates.
  /// PSD duals are stored column-major; Hermitian duals live in hermitian_duals.
  std::vector<Eigen::VectorXd> duals;
  std::vector<Eigen::MatrixXcd> hermitian_duals;
  std::string message;

  double value(Var v) const { return x[v.index]; }
  double value(const LinExpr& e) const { return e.evaluate(x); }
  Eigen::MatrixXcd value(const HermitianVar& h) const { return h.value(x); }
};

struct SolveOptions {
  double tol = 1e-8;
  double mu = 20.0;
  int max_newton = 2000;
  /// When centering breaks down, the last centered point is still reported as
  /// optimal if its gap meets this looser relative tolerance.
  double fallback_tol = 1e-6;
  /// Optional starting point. Need not be strictly feasible.
  std::optional<Eigen::VectorXd> start;
  /// Called after every centering phase with the current primal-dual point.
  /// Returning true stops the solve and reports status optimal with the
  /// current (strictly feasible, not yet converged) point.
  std::function<bool(const ConicSolution&)> early_stop;
};

namespace detail {

enum class BlockKind { nonneg, soc, exp, psd };

struct Block {
  BlockKind kind = BlockKind::nonneg;
  int dim = 0;  // rows for vector cones, order for psd
  int owner = -1;
  std::vector<int> cols;
  Eigen::MatrixXd g;  // dim x cols
  Eigen::VectorXd h;
  Eigen::MatrixXd f0;
  std::vector<SparseR> f;
  Eigen::Vector3d shift = Eigen::Vector3d::Zero();  // exp-cone interior direction
  // exp cones also carry z - y as its own affine row so that log(z / y) is
  // evaluated as log1p((z - y) / y) without cancellation when z ~ y
  Eigen::RowVectorXd g_diff;
  double h_diff = 0.0;

  int nu() const {
    switch (kind) {
      case BlockKind::nonneg: return 1;
      case BlockKind::soc: return 2;
      case BlockKind::exp: return 3;
      case BlockKind::psd: return dim;
    }
    return 0;
  }
};

struct Compiled {
  int n = 0;
  Eigen::VectorXd c;
  double c0 = 0.0;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::vector<Block> blocks;
  int nu = 0;
};

inline void gather(const LinExpr& e, std::vector<std::pair<int, double>>& out) {
  for (const auto& t : e.terms()) out.push_back(t);
}

inline Block vector_block(BlockKind kind, const std::vector<LinExpr>& rows, int owner) {
  Block blk;
  blk.kind = kind;
  blk.dim = static_cast<int>(rows.size());
  blk.owner = owner;
  std::vector<int> cols;
  for (const auto& r : rows)
    for (const auto& [i, a] : r.terms()) cols.push_back(i);
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  blk.cols = cols;
  blk.g = Eigen::MatrixXd::Zero(blk.dim, static_cast<Eigen::Index>(cols.size()));
  blk.h.resize(blk.dim);
  for (int r = 0; r < blk.dim; ++r) {
    blk.h[r] = rows[static_cast<std::size_t>(r)].constant();
    for (const auto& [i, a] : rows[static_cast<std::size_t>(r)].terms()) {
      const auto pos = std::lower_bound(cols.begin(), cols.end(), i) - cols.begin();
      blk.g(r, pos) += a;
    }
  }
  return blk;
}

inline SparseR embed(const SparseC& m) {
  const auto n = m.rows();
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseC::InnerIterator it(m, k); it; ++it) {
      const auto i = it.row();
      const auto j = it.col();
      const double re = it.value().real();
      const double im = it.value().imag();
      if (re != 0.0) {
        trips.emplace_back(i, j, re);
        trips.emplace_back(i + n, j + n, re);
      }
      if (im != 0.0) {
        trips.emplace_back(i, j + n, -im);
        trips.emplace_back(i + n, j, im);
      }
    }
  }
  SparseR out(2 * n, 2 * n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

inline Eigen::MatrixXd embed(const Eigen::MatrixXcd& m) {
  const auto n = m.rows();
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = m.real();
  out.bottomRightCorner(n, n) = m.real();
  out.topRightCorner(n, n) = -m.imag();
  out.bottomLeftCorner(n, n) = m.imag();
  return out;
}

inline Block psd_block(const Eigen::MatrixXd& f0, const std::vector<std::pair<int, SparseR>>& terms, int owner) {
  Block blk;
  blk.kind = BlockKind::psd;
  blk.dim = static_cast<int>(f0.rows());
  blk.owner = owner;
  blk.f0 = 0.5 * (f0 + f0.transpose());
  std::vector<std::pair<int, SparseR>> sorted = terms;
  std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  for (auto& [i, m] : sorted) {
    SparseR sym = 0.5 * (m + SparseR(m.transpose()));
    sym.prune(0.0);
    if (sym.nonZeros() == 0) continue;
    if (!blk.cols.empty() && blk.cols.back() == i) {
      blk.f.back() += sym;
    } else {
      blk.cols.push_back(i);
      blk.f.push_back(std::move(sym));
    }
  }
  return blk;
}

inline Compiled compile(const ConicProgram& prog) {
  Compiled cp;
  cp.n = prog.variable_count();
  cp.c = Eigen::VectorXd::Zero(cp.n);
  for (const auto& [i, a] : prog.objective().terms()) cp.c[i] += a;
  cp.c0 = prog.objective().constant();

  std::vector<const LinExpr*> eqs;
  const auto& cons = prog.constraints();
  for (int id = 0; id < static_cast<int>(cons.size()); ++id) {
    const auto& con = cons[static_cast<std::size_t>(id)];
    switch (con.type) {
      case ConeType::equality:
        eqs.push_back(&con.rows[0]);
        break;
      case ConeType::nonneg:
        cp.blocks.push_back(vector_block(BlockKind::nonneg, con.rows, id));
        break;
      case ConeType::soc:
        cp.blocks.push_back(vector_block(BlockKind::soc, con.rows, id));
        break;
      case ConeType::rotated_soc: {
        // 2uv - ||x||^2 = t^2 - s^2 - ||x||^2 with t = (u+v)/sqrt2, s = (u-v)/sqrt2
        const double r = std::sqrt(0.5);
        std::vector<LinExpr> rows;
        rows.push_back(r * (con.rows[0] + con.rows[1]));
        rows.push_back(r * (con.rows[0] - con.rows[1]));
        for (std::size_t k = 2; k < con.rows.size(); ++k) rows.push_back(con.rows[k]);
        cp.blocks.push_back(vector_block(BlockKind::soc, rows, id));
        break;
      }
      case ConeType::exp: {
        auto rows = con.rows;
        rows.push_back(con.rows[2] - con.rows[1]);
        auto blk = vector_block(BlockKind::exp, rows, id);
        blk.g_diff = blk.g.row(3);
        blk.h_diff = blk.h[3];
        blk.g = blk.g.topRows(3).eval();
        blk.h = blk.h.head(3).eval();
        blk.dim = 3;
        blk.shift = Eigen::Vector3d(-1.0, 1.0, 1.0);
        cp.blocks.push_back(std::move(blk));
        break;
      }
      case ConeType::psd:
        cp.blocks.push_back(psd_block(con.sym.constant, con.sym.terms, id));
        break;
      case ConeType::hermitian_psd: {
        std::vector<std::pair<int, SparseR>> terms;
        terms.reserve(con.herm.terms.size());
        for (const auto& [i, m] : con.herm.terms) terms.emplace_back(i, embed(m));
        cp.blocks.push_back(psd_block(embed(con.herm.constant), terms, id));
        break;
      }
    }
  }
  cp.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eqs.size()), cp.n);
  cp.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(eqs.size()));
  for (std::size_t r = 0; r < eqs.size(); ++r) {
    for (const auto& [i, a] : eqs[r]->terms()) cp.a(static_cast<Eigen::Index>(r), i) += a;
    cp.b[static_cast<Eigen::Index>(r)] = -eqs[r]->constant();
  }
  for (const auto& blk : cp.blocks) cp.nu += blk.nu();
  return cp;
}

/// Per-block barrier evaluation at the current x.
struct BlockEval {
  bool interior = false;
  double value = 0.0;      // barrier value
  Eigen::VectorXd slack;   // vector cones
  Eigen::VectorXd grad;    // barrier gradient in slack coordinates (vector cones)
  Eigen::MatrixXd hess;    // barrier Hessian in slack coordinates
  Eigen::MatrixXd s_inv;   // psd
};

inline Eigen::VectorXd block_slack(const Block& blk, const Eigen::VectorXd& x) {
  Eigen::VectorXd s = blk.h;
  for (std::size_t k = 0; k < blk.cols.size(); ++k) s += blk.g.col(static_cast<Eigen::Index>(k)) * x[blk.cols[k]];
  return s;
}

inline Eigen::MatrixXd psd_slack(const Block& blk, const Eigen::VectorXd& x) {
  Eigen::MatrixXd s = blk.f0;
  for (std::size_t k = 0; k < blk.cols.size(); ++k) s += x[blk.cols[k]] * blk.f[k];
  return s;
}

inline double exp_diff(const Block& blk, const Eigen::VectorXd& x) {
  double d = blk.h_diff;
  for (std::size_t k = 0; k < blk.cols.size(); ++k) d += blk.g_diff[static_cast<Eigen::Index>(k)] * x[blk.cols[k]];
  return d;
}

/// d = z - y.
inline bool exp_interior(double x, double y, double z, double d, double* psi) {
  if (!(y > 0.0) || !(z > 0.0)) return false;
  const double p = y * std::log1p(d / y) - x;
  if (psi) *psi = p;
  return p > 0.0 && std::isfinite(p);
}

inline bool soc_interior(const Eigen::VectorXd& s, double* d) {
  const double t = s[0];
  const double u = s.tail(s.size() - 1).norm();
  if (!(t > u)) return false;
  const double det = (t - u) * (t + u);
  if (d) *d = det;
  return det > 0.0;
}

/// Interior test and barrier value only (line search).
inline bool block_value(const Block& blk, const Eigen::VectorXd& x, double& value) {
  switch (blk.kind) {
    case BlockKind::nonneg: {
      const double s = block_slack(blk, x)[0];
      if (!(s > 0.0)) return false;
      value += -std::log(s);
      return true;
    }
    case BlockKind::soc: {
      double d = 0.0;
      if (!soc_interior(block_slack(blk, x), &d)) return false;
      value += -std::log(d);
      return true;
    }
    case BlockKind::exp: {
      const auto s = block_slack(blk, x);
      double psi = 0.0;
      if (!exp_interior(s[0], s[1], s[2], exp_diff(blk, x), &psi)) return false;
      value += -std::log(psi) - std::log(s[1]) - std::log(s[2]);
      return true;
    }
    case BlockKind::psd: {
      Eigen::LLT<Eigen::MatrixXd> llt(psd_slack(blk, x));
      if (llt.info() != Eigen::Success) return false;
      const Eigen::VectorXd d = llt.matrixLLT().diagonal();
      if ((d.array() <= 0.0).any()) return false;
      value += -2.0 * d.array().log().sum();
      return std::isfinite(value);
    }
  }
  return false;
}

inline BlockEval evaluate(const Block& blk, const Eigen::VectorXd& x) {
  BlockEval ev;
  switch (blk.kind) {
    case BlockKind::nonneg: {
      ev.slack = block_slack(blk, x);
      const double s = ev.slack[0];
      if (!(s > 0.0)) return ev;
      ev.interior = true;
      ev.value = -std::log(s);
      ev.grad = Eigen::VectorXd::Constant(1, -1.0 / s);
      ev.hess = Eigen::MatrixXd::Constant(1, 1, 1.0 / (s * s));
      return ev;
    }
    case BlockKind::soc: {
      ev.slack = block_slack(blk, x);
      double d = 0.0;
      if (!soc_interior(ev.slack, &d)) return ev;
      ev.interior = true;
      ev.value = -std::log(d);
      const auto m = ev.slack.size();
      ev.grad = 2.0 * ev.slack / d;
      ev.grad[0] = -ev.grad[0];
      Eigen::VectorXd jd = Eigen::VectorXd::Constant(m, 2.0 / d);
      jd[0] = -jd[0];
      ev.hess = ev.grad * ev.grad.transpose();
      ev.hess.diagonal() += jd;
      return ev;
    }
    case BlockKind::exp: {
      ev.slack = block_slack(blk, x);
      const double xs = ev.slack[0], y = ev.slack[1], z = ev.slack[2];
      double psi = 0.0;
      const double dzy = exp_diff(blk, x);
      if (!exp_interior(xs, y, z, dzy, &psi)) return ev;
      ev.interior = true;
      ev.value = -std::log(psi) - std::log(y) - std::log(z);
      const Eigen::Vector3d dpsi(-1.0, std::log1p(dzy / y) - 1.0, y / z);
      Eigen::Matrix3d d2psi;
      d2psi << 0.0, 0.0, 0.0, 0.0, -1.0 / y, 1.0 / z, 0.0, 1.0 / z, -y / (z * z);
      ev.grad = -dpsi / psi - Eigen::Vector3d(0.0, 1.0 / y, 1.0 / z);
      ev.hess = -d2psi / psi + dpsi * dpsi.transpose() / (psi * psi);
      ev.hess(1, 1) += 1.0 / (y * y);
      ev.hess(2, 2) += 1.0 / (z * z);
      return ev;
    }
    case BlockKind::psd: {
      const Eigen::MatrixXd s = psd_slack(blk, x);
      Eigen::LLT<Eigen::MatrixXd> llt(s);
      if (llt.info() != Eigen::Success) return ev;
      const Eigen::VectorXd d = llt.matrixLLT().diagonal();
      if ((d.array() <= 0.0).any()) return ev;
      ev.interior = true;
      ev.value = -2.0 * d.array().log().sum();
      ev.s_inv = llt.solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
      ev.s_inv = 0.5 * (ev.s_inv + ev.s_inv.transpose()).eval();
      return ev;
    }
  }
  return ev;
}

/// Accumulates the barrier gradient and Hessian of one block into (grad, hess).
inline void accumulate(const Block& blk, const BlockEval& ev, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  const auto nc = static_cast<Eigen::Index>(blk.cols.size());
  if (blk.kind == BlockKind::psd) {
    std::vector<Eigen::MatrixXd> w(blk.cols.size());
    for (Eigen::Index k = 0; k < nc; ++k) {
      w[static_cast<std::size_t>(k)] = ev.s_inv * blk.f[static_cast<std::size_t>(k)];
      grad[blk.cols[static_cast<std::size_t>(k)]] -= w[static_cast<std::size_t>(k)].trace();
    }
    for (Eigen::Index k = 0; k < nc; ++k) {
      const auto& wk = w[static_cast<std::size_t>(k)];
      for (Eigen::Index l = k; l < nc; ++l) {
        const double v = (wk.cwiseProduct(w[static_cast<std::size_t>(l)].transpose())).sum();
        const int ck = blk.cols[static_cast<std::size_t>(k)];
        const int cl = blk.cols[static_cast<std::size_t>(l)];
        hess(ck, cl) += v;
        if (k != l) hess(cl, ck) += v;
      }
    }
    return;
  }
  const Eigen::VectorXd gl = blk.g.transpose() * ev.grad;
  const Eigen::MatrixXd hl = blk.g.transpose() * ev.hess * blk.g;
  for (Eigen::Index k = 0; k < nc; ++k) {
    const int ck = blk.cols[static_cast<std::size_t>(k)];
    grad[ck] += gl[k];
    for (Eigen::Index l = 0; l < nc; ++l) hess(ck, blk.cols[static_cast<std::size_t>(l)]) += hl(k, l);
  }
}

/// Minimal shift sigma >= 0 such that the block slack plus sigma times the
/// cone's interior direction is strictly inside the cone.
inline double required_shift(const Block& blk, const Eigen::VectorXd& x) {
  switch (blk.kind) {
    case BlockKind::nonneg:
      return std::max(0.0, -block_slack(blk, x)[0]);
    case BlockKind::soc: {
      const auto s = block_slack(blk, x);
      return std::max(0.0, s.tail(s.size() - 1).norm() - s[0]);
    }
    case BlockKind::psd: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(psd_slack(blk, x), Eigen::EigenvaluesOnly);
      return std::max(0.0, -es.eigenvalues()[0]);
    }
    case BlockKind::exp: {
      const auto s = block_slack(blk, x);
      const double dzy = exp_diff(blk, x);
      if (exp_interior(s[0], s[1], s[2], dzy, nullptr)) return 0.0;
      double sigma = 1e-8 * (1.0 + s.cwiseAbs().maxCoeff());
      for (int it = 0; it < 200; ++it) {
        const Eigen::Vector3d v = s + sigma * blk.shift;
        if (exp_interior(v[0], v[1], v[2], dzy + sigma * (blk.shift[2] - blk.shift[1]), nullptr)) return sigma;
        sigma *= 2.0;
      }
      return sigma;
    }
  }
  return 0.0;
}

/// Adds a column for the phase-one variable sigma to every block.
/// Phase-one program: minimize sigma with every cone shifted by sigma.  The
/// box |x_i - x0_i| <= radius keeps the barrier bounded along directions the
/// original constraints leave free.
inline Compiled with_phase_one(const Compiled& base, const Eigen::VectorXd& x0, double radius) {
  Compiled cp = base;
  const int sigma = base.n;
  cp.n = base.n + 1;
  cp.c = Eigen::VectorXd::Zero(cp.n);
  cp.c[sigma] = -1.0;
  cp.c0 = 0.0;
  cp.a.conservativeResize(base.a.rows(), cp.n);
  cp.a.col(sigma).setZero();
  for (auto& blk : cp.blocks) {
    if (blk.kind == BlockKind::psd) {
      SparseR eye(blk.dim, blk.dim);
      eye.setIdentity();
      blk.cols.push_back(sigma);
      blk.f.push_back(eye);
      continue;
    }
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(blk.dim);
    if (blk.kind == BlockKind::nonneg) dir[0] = 1.0;
    if (blk.kind == BlockKind::soc) dir[0] = 1.0;
    if (blk.kind == BlockKind::exp) {
      dir = blk.shift;
      blk.g_diff.conservativeResize(blk.g_diff.size() + 1);
      blk.g_diff[blk.g_diff.size() - 1] = blk.shift[2] - blk.shift[1];
    }
    blk.cols.push_back(sigma);
    blk.g.conservativeResize(blk.dim, static_cast<Eigen::Index>(blk.cols.size()));
    blk.g.col(blk.g.cols() - 1) = dir;
  }
  // sigma >= -1 keeps phase one bounded below
  Block lb;
  lb.kind = BlockKind::nonneg;
  lb.dim = 1;
  lb.cols = {sigma};
  lb.g = Eigen::MatrixXd::Ones(1, 1);
  lb.h = Eigen::VectorXd::Ones(1);
  cp.blocks.push_back(lb);
  cp.nu += 1;
  for (int i = 0; i < base.n; ++i)
    for (double sgn : {1.0, -1.0}) {
      Block box;
      box.kind = BlockKind::nonneg;
      box.dim = 1;
      box.cols = {i};
      box.g = Eigen::MatrixXd::Constant(1, 1, sgn);
      box.h = Eigen::VectorXd::Constant(1, radius - sgn * x0[i]);
      cp.blocks.push_back(box);
      cp.nu += 1;
    }
  return cp;
}

struct BarrierResult {
  Status status = Status::numerical_failure;
  Eigen::VectorXd x;
  double t = 1.0;
  int newton = 0;
  bool stopped_early = false;
  std::string message;
};

/// Path-following log-barrier method from a strictly feasible x satisfying Ax = b.
/// `stop` is consulted after each centering with (x, t).
class BarrierMethod {
 public:
  BarrierMethod(const Compiled& cp, const SolveOptions& opt) : cp_(cp), opt_(opt) {}

  /// Checked after every Newton step; true ends the current centering.
  std::function<bool(const Eigen::VectorXd&)> exit_when;

  BarrierResult run(Eigen::VectorXd x, const std::function<bool(const Eigen::VectorXd&, double)>& stop) {
    BarrierResult res;
    const int n = cp_.n;
    if (!strictly_feasible(x)) {
      res.message = "start point not strictly feasible";
      return res;
    }
    double t = initial_t(x);
    Eigen::VectorXd last_x;
    double last_t = 0.0;
    auto fall_back = [&](const char* why) {
      res.x = x;
      res.t = t;
      res.message = why;
      if (last_x.size() == n && !stop) {
        const double scale = 1.0 + std::abs(cp_.c.dot(last_x) + cp_.c0);
        if (cp_.nu / last_t <= opt_.fallback_tol * scale) {
          res.status = Status::optimal;
          res.x = last_x;
          res.t = last_t;
          res.message = std::string("reduced accuracy (") + why + ")";
        }
      }
      return res;
    };
    for (int outer = 0; outer < 200; ++outer) {
      if (!center(x, t, res.newton)) return fall_back("centering failed");
      last_x = x;
      last_t = t;
      if (stop && stop(x, t)) {
        res.status = Status::optimal;
        res.x = x;
        res.t = t;
        res.stopped_early = true;
        return res;
      }
      const double gap = cp_.nu / t;
      const double scale = 1.0 + std::abs(cp_.c.dot(x) + cp_.c0);
      if (gap <= opt_.tol * scale || n == 0) {
        res.status = Status::optimal;
        res.x = x;
        res.t = t;
        return res;
      }
      if (res.newton >= opt_.max_newton) break;
      t *= opt_.mu;
    }
    return fall_back("iteration limit");
  }

  bool strictly_feasible(const Eigen::VectorXd& x) const {
    double v = 0.0;
    for (const auto& blk : cp_.blocks)
      if (!block_value(blk, x, v)) return false;
    return true;
  }

  /// Multipliers -grad F_i / t for each block.
  std::vector<Eigen::VectorXd> block_duals(const Eigen::VectorXd& x, double t) const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(cp_.blocks.size());
    for (const auto& blk : cp_.blocks) {
      const auto ev = evaluate(blk, x);
      if (blk.kind == BlockKind::psd) {
        const Eigen::MatrixXd z = ev.s_inv / t;
        out.emplace_back(Eigen::Map<const Eigen::VectorXd>(z.data(), z.size()));
      } else {
        out.emplace_back(-ev.grad / t);
      }
    }
    return out;
  }

 private:
  double phi(const Eigen::VectorXd& x, double t, bool& ok) const {
    double v = 0.0;
    for (const auto& blk : cp_.blocks) {
      if (!block_value(blk, x, v)) {
        ok = false;
        return std::numeric_limits<double>::infinity();
      }
    }
    ok = true;
    return -t * cp_.c.dot(x) + v;
  }

  void derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    grad = Eigen::VectorXd::Zero(cp_.n);
    hess = Eigen::MatrixXd::Zero(cp_.n, cp_.n);
    for (const auto& blk : cp_.blocks) accumulate(blk, evaluate(blk, x), grad, hess);
  }

  double initial_t(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    derivatives(x, g, h);
    const double cn = cp_.c.norm();
    if (cn == 0.0) return 1.0;
    // least-squares fit of t c ~ grad F in the H^{-1} norm
    Eigen::MatrixXd hr = h;
    hr.diagonal().array() += 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hr);
    const Eigen::VectorXd hc = ldlt.solve(cp_.c);
    const double num = hc.dot(g);
    const double den = hc.dot(cp_.c);
    double t = (den > 0.0 && num > 0.0) ? num / den : 0.0;
    const double fallback = cp_.nu / (1.0 + std::abs(cp_.c.dot(x)));
    if (!(t > 0.0) || !std::isfinite(t)) t = fallback;
    return std::clamp(t, 1e-3 * fallback, fallback);
  }

  bool newton_direction(const Eigen::VectorXd& x, double t, Eigen::VectorXd& dx, double& lambda2) const {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    derivatives(x, g, h);
    g -= t * cp_.c;
    const auto p = cp_.a.rows();
    double reg = 0.0;
    const double hscale = std::max(1e-300, h.diagonal().cwiseAbs().maxCoeff());
    if (p > 0) {
      const double ascale = std::max(1e-300, cp_.a.squaredNorm());
      h.noalias() += (hscale / ascale) * cp_.a.transpose() * cp_.a;
    }
    // symmetric Jacobi scaling: slacks near the boundary spread the diagonal over
    // many decades late in the path, which Cholesky tolerates only after scaling
    Eigen::VectorXd d = h.diagonal().cwiseAbs().cwiseMax(1e-30 * hscale).cwiseSqrt().cwiseInverse();
    h = d.asDiagonal() * h * d.asDiagonal();
    const Eigen::VectorXd gs = d.cwiseProduct(g);
    const Eigen::MatrixXd as = p > 0 ? Eigen::MatrixXd(cp_.a * d.asDiagonal()) : Eigen::MatrixXd();
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd hr = h;
      if (reg > 0.0) hr.diagonal().array() += reg;
      Eigen::LLT<Eigen::MatrixXd> llt(hr);
      if (llt.info() == Eigen::Success) {
        if (p == 0) {
          dx = -llt.solve(gs);
        } else {
          const Eigen::MatrixXd hiat = llt.solve(as.transpose());
          const Eigen::VectorXd hig = llt.solve(gs);
          const Eigen::MatrixXd schur = as * hiat;
          const Eigen::VectorXd w = schur.ldlt().solve(-as * hig);
          dx = -(hig + hiat * w);
        }
        dx = d.cwiseProduct(dx);
        if (dx.allFinite()) {
          lambda2 = -g.dot(dx);
          return true;
        }
      }
      reg = (reg == 0.0) ? 1e-14 : reg * 100.0;
    }
    return false;
  }

  bool center(Eigen::VectorXd& x, double t, int& newton) const {
    double prev_small = std::numeric_limits<double>::infinity();
    int stalled = 0, tiny = 0;
    for (int it = 0; it < 400; ++it) {
      if (it > 0 && exit_when && exit_when(x)) return true;
      if (newton >= opt_.max_newton) return false;
      Eigen::VectorXd dx;
      double lambda2 = 0.0;
      if (!newton_direction(x, t, dx, lambda2)) return false;
      ++newton;
      if (lambda2 <= 1e-11) return true;
      if (lambda2 < 1e-3) {
        // inside the quadratic convergence region a full step stays feasible;
        // phi is not consulted here because at large t its rounding error can
        // exceed the decrease being tested
        const Eigen::VectorXd xn = x + dx;
        if (strictly_feasible(xn)) {
          x = xn;
          stalled = (lambda2 > 0.25 * prev_small) ? stalled + 1 : 0;
          prev_small = std::min(prev_small, lambda2);
          if (stalled >= 3) return true;  // decrement is at its rounding floor
          continue;
        }
      }
      bool ok = false;
      const double f0 = phi(x, t, ok);
      double step = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd xn = x + step * dx;
        const double f1 = phi(xn, t, ok);
        if (ok && f1 <= f0 - 0.25 * step * lambda2) {
          x = xn;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      // near-centered and only tiny steps pass: the derivatives are at their noise floor
      if (lambda2 < 0.05 && step < 1e-3) return true;
      tiny = (accepted && step < 1e-3 && lambda2 < 10.0) ? tiny + 1 : 0;
      if (tiny >= 5) return false;
      if (!accepted) {
        // damped Newton step 1 / (1 + lambda) of self-concordant barriers
        const Eigen::VectorXd xn = x + dx / (1.0 + std::sqrt(lambda2));
        if (!strictly_feasible(xn)) return lambda2 < 1e-6;
        x = xn;
      }
    }
    return false;
  }

  const Compiled& cp_;
  const SolveOptions& opt_;
};

inline double equality_residual(const Compiled& cp, const Eigen::VectorXd& x) {
  if (cp.a.rows() == 0) return 0.0;
  return (cp.a * x - cp.b).cwiseAbs().maxCoeff();
}

inline double cone_violation(const Compiled& cp, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (const auto& blk : cp.blocks) v = std::max(v, required_shift(blk, x));
  return v;
}

/// Finds x with Ax = b closest (least squares) to the hint.
inline std::optional<Eigen::VectorXd> equality_point(const Compiled& cp, const Eigen::VectorXd& hint, double tol) {
  if (cp.a.rows() == 0) return hint;
  const Eigen::VectorXd r = cp.b - cp.a * hint;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(cp.a);
  Eigen::VectorXd x = hint + cod.solve(r);
  const double res = (cp.a * x - cp.b).cwiseAbs().maxCoeff();
  if (res > tol * (1.0 + cp.b.cwiseAbs().maxCoeff())) return std::nullopt;
  return x;
}

enum class PhaseOne { strictly_feasible, boundary_feasible, infeasible, failure };

struct PhaseOneResult {
  PhaseOne outcome = PhaseOne::failure;
  Eigen::VectorXd x;  // original variables
  double sigma = 0.0;
  int newton = 0;
};

/// Searches for a strictly feasible point by minimizing the uniform cone shift sigma.
inline PhaseOneResult phase_one(const Compiled& cp, const Eigen::VectorXd& hint, const SolveOptions& opt) {
  PhaseOneResult out;
  const auto x0 = equality_point(cp, hint, 1e-9);
  if (!x0) {
    out.outcome = PhaseOne::infeasible;
    out.x = hint;
    return out;
  }
  double need = 0.0;
  for (const auto& blk : cp.blocks) need = std::max(need, required_shift(blk, *x0));
  if (need == 0.0) {
    BarrierMethod probe(cp, opt);
    if (probe.strictly_feasible(*x0)) {
      out.outcome = PhaseOne::strictly_feasible;
      out.x = *x0;
      return out;
    }
  }
  const Compiled aug = with_phase_one(cp, *x0, 1e3 * (1.0 + x0->cwiseAbs().maxCoeff()));
  Eigen::VectorXd xa(aug.n);
  xa.head(cp.n) = *x0;
  double sigma = need + std::max(1e-3, 0.1 * need);
  xa[cp.n] = sigma;
  BarrierMethod bm(aug, opt);
  for (int k = 0; k < 60 && !bm.strictly_feasible(xa); ++k) {
    sigma = 2.0 * sigma + 1e-3;
    xa[cp.n] = sigma;
  }
  if (!bm.strictly_feasible(xa)) {
    out.x = *x0;
    return out;
  }
  const double ftol = std::max(opt.tol, 1e-12);
  SolveOptions o1 = opt;
  o1.tol = 0.1 * ftol;
  BarrierMethod runner(aug, o1);
  runner.exit_when = [&](const Eigen::VectorXd& x) { return x[cp.n] < 0.0; };
  auto res = runner.run(xa, [&](const Eigen::VectorXd& x, double t) {
    if (x[cp.n] < 0.0) return true;
    // lower bound on optimal sigma
    return x[cp.n] - aug.nu / t > ftol;
  });
  out.newton = res.newton;
  if (res.x.size() != aug.n) {
    out.x = *x0;
    return out;
  }
  out.x = res.x.head(cp.n);
  out.sigma = res.x[cp.n];
  if (out.sigma < 0.0) {
    out.outcome = PhaseOne::strictly_feasible;
  } else if (res.status == Status::optimal && out.sigma - aug.nu / res.t > ftol) {
    out.outcome = PhaseOne::infeasible;
  } else if (out.sigma <= ftol * 10.0) {
    out.outcome = PhaseOne::boundary_feasible;
  } else if (res.status == Status::optimal) {
    out.outcome = PhaseOne::infeasible;
  }
  return out;
}

inline Eigen::MatrixXcd lift_hermitian(const Eigen::VectorXd& zvec, int order) {
  const int n2 = 2 * order;
  Eigen::Map<const Eigen::MatrixXd> z(zvec.data(), n2, n2);
  const auto a = z.topLeftCorner(order, order);
  const auto b = z.topRightCorner(order, order);
  const auto c = z.bottomLeftCorner(order, order);
  const auto d = z.bottomRightCorner(order, order);
  Eigen::MatrixXcd out(order, order);
  out.real() = a + d;
  out.imag() = c - b;
  return out;
}

inline ConicSolution assemble(const ConicProgram& prog, const Compiled& cp, const BarrierMethod& bm,
                              const Eigen::VectorXd& x, double t) {
  ConicSolution sol;
  sol.x = x;
  sol.objective_value = cp.c.dot(x) + cp.c0;
  sol.gap = cp.nu / t;
  sol.residual = std::max(equality_residual(cp, x), cone_violation(cp, x));
  const auto& cons = prog.constraints();
  sol.duals.assign(cons.size(), Eigen::VectorXd());
  sol.hermitian_duals.assign(cons.size(), Eigen::MatrixXcd());
  const auto bd = bm.block_duals(x, t);
  for (std::size_t k = 0; k < cp.blocks.size(); ++k) {
    const auto& blk = cp.blocks[k];
    const auto owner = static_cast<std::size_t>(blk.owner);
    const auto type = cons[owner].type;
    if (type == ConeType::rotated_soc) {
      // back through the lowering map (which is its own transpose)
      const double r = std::sqrt(0.5);
      Eigen::VectorXd d = bd[k];
      const double a = d[0], b = d[1];
      d[0] = r * (a + b);
      d[1] = r * (a - b);
      sol.duals[owner] = d;
    } else if (type == ConeType::hermitian_psd) {
      sol.duals[owner] = bd[k];
      sol.hermitian_duals[owner] = lift_hermitian(bd[k], blk.dim / 2);
    } else {
      sol.duals[owner] = bd[k];
    }
  }
  return sol;
}

}  // namespace detail

/// Maximizes the program objective.  Status optimal means the returned point
/// is strictly feasible with duality gap below tol (relative to 1 + |objective|).
inline ConicSolution solve(const ConicProgram& prog, const SolveOptions& opt = {}) {
  const auto cp = detail::compile(prog);
  Eigen::VectorXd hint = opt.start.value_or(Eigen::VectorXd::Zero(cp.n));
  if (hint.size() != cp.n) throw std::invalid_argument("solve: start point has wrong dimension");

  int newton = 0;
  Eigen::VectorXd x0;
  detail::BarrierMethod probe(cp, opt);
  const auto xe = detail::equality_point(cp, hint, 1e-9);
  if (xe && probe.strictly_feasible(*xe)) {
    x0 = *xe;
  } else {
    const auto p1 = detail::phase_one(cp, hint, opt);
    newton += p1.newton;
    if (p1.outcome != detail::PhaseOne::strictly_feasible) {
      ConicSolution sol;
      sol.x = p1.x.size() == cp.n ? p1.x : hint;
      sol.newton_steps = newton;
      sol.status = p1.outcome == detail::PhaseOne::infeasible ? Status::infeasible : Status::numerical_failure;
      sol.message = p1.outcome == detail::PhaseOne::boundary_feasible
                        ? "feasible set has empty interior"
                        : (p1.outcome == detail::PhaseOne::infeasible ? "infeasible" : "phase one failed");
      sol.residual = std::max(detail::equality_residual(cp, sol.x), detail::cone_violation(cp, sol.x));
      return sol;
    }
    x0 = p1.x;
  }

  detail::BarrierMethod bm(cp, opt);
  std::function<bool(const Eigen::VectorXd&, double)> stop;
  if (opt.early_stop) {
    stop = [&](const Eigen::VectorXd& x, double t) {
      auto snap = detail::assemble(prog, cp, bm, x, t);
      snap.status = Status::optimal;
      return opt.early_stop(snap);
    };
  }
  auto res = bm.run(x0, stop);
  newton += res.newton;
  const Eigen::VectorXd& xr = res.x.size() == cp.n ? res.x : x0;
  auto sol = detail::assemble(prog, cp, bm, xr, res.t);
  sol.status = res.status;
  sol.newton_steps = newton;
  sol.message = res.stopped_early ? "stopped early" : res.message;
  if (sol.status == Status::optimal && sol.residual > std::max(opt.tol, 1e-9) * 1e3) {
    sol.status = Status::numerical_failure;
    sol.message = "residual above tolerance";
  }
  return sol;
}

struct FeasibilityResult {
  bool feasible = false;
  Status status = Status::numerical_failure;
  Eigen::VectorXd witness;
  /// Max constraint violation of the witness (0 for strictly feasible witnesses).
  double residual = std::numeric_limits<double>::infinity();
};

/// Feasibility phase of solve: the objective is ignored.
inline FeasibilityResult check_feasibility(const ConicProgram& prog, double tol = 1e-8,
                                           std::optional<Eigen::VectorXd> start = std::nullopt) {
  const auto cp = detail::compile(prog);
  SolveOptions opt;
  opt.tol = tol;
  const Eigen::VectorXd hint = start.value_or(Eigen::VectorXd::Zero(cp.n));
  const auto p1 = detail::phase_one(cp, hint, opt);
  FeasibilityResult out;
  out.witness = p1.x;
  if (p1.x.size() == cp.n) {
    out.residual = std::max(detail::equality_residual(cp, p1.x), detail::cone_violation(cp, p1.x));
  }
  switch (p1.outcome) {
    case detail::PhaseOne::strictly_feasible:
    case detail::PhaseOne::boundary_feasible:
      out.feasible = out.residual <= std::max(tol, 1e-12) * 10.0;
      out.status = out.feasible ? Status::optimal : Status::numerical_failure;
      break;
    case detail::PhaseOne::infeasible:
      out.status = Status::infeasible;
      break;
    case detail::PhaseOne::failure:
      out.status = Status::numerical_failure;
      break;
  }
  return out;
}

}  // namespace irswet::conic
