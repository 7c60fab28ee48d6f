#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcmesh/types.hpp"

namespace dcmesh {

/// Per-agent convex cost f_i. Every variant has a closed-form proximal map.
class CostFn {
 public:
  enum class Kind { L1, SquaredL2, L2Norm, Zero };

  static CostFn l1(double weight);
  static CostFn squared_l2() { return CostFn(Kind::SquaredL2, 0.0); }
  static CostFn l2_norm() { return CostFn(Kind::L2Norm, 0.0); }
  static CostFn zero() { return CostFn(Kind::Zero, 0.0); }

  Kind kind() const { return kind_; }
  /// The l1 weight; 0 for the other variants.
  double weight() const { return weight_; }

  double value(const Vector& x) const;

  /// argmin_x f(x) + (beta/2)||x - v||^2, beta > 0.
  Vector prox(const Vector& v, double beta) const;

  /// True when f is separable across coordinates.
  bool separable() const { return kind_ != Kind::L2Norm; }

  std::string name() const;
  friend bool operator==(const CostFn&, const CostFn&) = default;

 private:
  CostFn(Kind k, double w) : kind_(k), weight_(w) {}
  Kind kind_;
  double weight_;
};

/// Local constraint set S_i with a cheap Euclidean projection.
class SimpleSet {
 public:
  enum class Kind { FullSpace, NonnegativeOrthant, Box };

  static SimpleSet full_space() { return SimpleSet(Kind::FullSpace, {}, {}); }
  static SimpleSet nonnegative() {
    return SimpleSet(Kind::NonnegativeOrthant, {}, {});
  }
  /// Element-wise bounds lo <= x <= hi; infinities are allowed.
  static SimpleSet box(Vector lo, Vector hi);

  Kind kind() const { return kind_; }
  const Vector& lower() const { return lo_; }
  const Vector& upper() const { return hi_; }

  Vector project(const Vector& v) const;
  bool contains(const Vector& v, double tol = 0.0) const;

  /// Coordinate bounds for coordinate j (possibly infinite).
  double lower_bound(Index j) const;
  double upper_bound(Index j) const;

  std::string name() const;
  friend bool operator==(const SimpleSet& a, const SimpleSet& b);

 private:
  SimpleSet(Kind k, Vector lo, Vector hi)
      : kind_(k), lo_(std::move(lo)), hi_(std::move(hi)) {}
  Kind kind_;
  Vector lo_, hi_;
};

/// argmin_{x in S} f(x) + (beta/2)||x - v||^2. Exact for separable costs and
/// for the l2 norm over the full space or the nonnegative orthant.
Vector prox_on_set(const CostFn& f, const SimpleSet& s, const Vector& v,
                   double beta);

/// One agent's private data: coupling block E (L x K), polyhedra block
/// C x <= d (P x K; P may be 0), cost and simple set.
struct AgentData {
  Matrix E;
  Matrix C;
  Vector d;
  CostFn cost = CostFn::zero();
  SimpleSet set = SimpleSet::full_space();

  Index K() const { return E.cols(); }
  Index P() const { return C.rows(); }
};

/// min sum_i f_i(x_i)  s.t.  sum_i E_i x_i = q,  C_i x_i <= d_i,  x_i in S_i.
struct CoupledProblem {
  Index L = 0;
  Vector q;
  std::vector<AgentData> agents;

  std::size_t num_agents() const { return agents.size(); }
  Index total_K() const;
  Index total_P() const;

  /// Throws dcmesh::Error on any dimensional inconsistency.
  void validate() const;
};

/// Primal iterate (x_i, r_i) for every agent; r_i are the polyhedra slacks.
struct PrimalPoint {
  std::vector<Vector> x;
  std::vector<Vector> r;

  static PrimalPoint zeros(const CoupledProblem& p);
};

double objective(const CoupledProblem& p, const PrimalPoint& pt);

/// sum_i E_i x_i - q.
Vector coupling_residual(const CoupledProblem& p, const PrimalPoint& pt);

/// Mean positive part of C_i x_i - d_i over all polyhedra rows
/// (divisor sum_i P_i). Zero when no agent carries polyhedra rows.
double feas_metric(const CoupledProblem& p, const PrimalPoint& pt);

/// Largest single-row violation max_{i,j} (C_i x_i - d_i)_j, floored at 0.
double max_row_violation(const CoupledProblem& p, const PrimalPoint& pt);

/// Signed relative gap (obj_k - obj_star) / obj_star. Throws if obj_star == 0.
double acc_metric(double obj_k, double obj_star);

struct LassoSpec {
  std::size_t n_agents = 10;
  Index K = 50;
  Index L = 20;
  Index P = 25;
  double lambda = 1.0;
};

struct LoadControlSpec {
  std::size_t n_agents = 10;
  Index K = 8;
  Index L = 6;
  Index P = 8;
};

/// Column-partitioned constrained LASSO recast with a slack agent:
/// agent 0 holds x_0 = sum_i A_i x_i - b (cost ||x_0||^2, E_0 = -I, no
/// polyhedra rows); agents 1..N hold lambda ||x_i||_1 with E_i = A_i.
/// When `witness` is non-null it receives a point that satisfies every
/// constraint, with strictly positive polyhedra slack.
CoupledProblem make_constrained_lasso(const LassoSpec& spec, std::uint64_t seed,
                                      PrimalPoint* witness = nullptr);

/// Load-control instance: slack agent with squared-norm imbalance cost,
/// zero-cost loads with box-like polyhedra limits, and a supply vector that
/// the witness point balances exactly.
CoupledProblem make_load_control(const LoadControlSpec& spec,
                                 std::uint64_t seed,
                                 PrimalPoint* witness = nullptr);

}  // namespace dcmesh
