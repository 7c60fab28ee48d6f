#include "dcmesh/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace dcmesh {

// ---------------------------------------------------------------- CostFn

CostFn CostFn::l1(double weight) {
  require(weight >= 0.0 && std::isfinite(weight), "l1 weight must be >= 0");
  return CostFn(Kind::L1, weight);
}

double CostFn::value(const Vector& x) const {
  switch (kind_) {
    case Kind::L1: return weight_ * x.lpNorm<1>();
    case Kind::SquaredL2: return x.squaredNorm();
    case Kind::L2Norm: return x.norm();
    case Kind::Zero: return 0.0;
  }
  return 0.0;
}

Vector CostFn::prox(const Vector& v, double beta) const {
  require(beta > 0.0, "prox parameter must be positive");
  switch (kind_) {
    case Kind::L1: {
      const double t = weight_ / beta;
      return v.unaryExpr([t](double a) {
        return std::copysign(std::max(std::abs(a) - t, 0.0), a);
      });
    }
    case Kind::SquaredL2:
      // stationarity: 2x + beta (x - v) = 0
      return (beta / (beta + 2.0)) * v;
    case Kind::L2Norm: {
      const double nv = v.norm();
      const double shrink = 1.0 / beta;
      if (nv <= shrink) return Vector::Zero(v.size());
      return (1.0 - shrink / nv) * v;
    }
    case Kind::Zero: return v;
  }
  return v;
}

std::string CostFn::name() const {
  switch (kind_) {
    case Kind::L1: return "l1";
    case Kind::SquaredL2: return "sq_l2";
    case Kind::L2Norm: return "l2";
    case Kind::Zero: return "zero";
  }
  return "?";
}

// ------------------------------------------------------------- SimpleSet

SimpleSet SimpleSet::box(Vector lo, Vector hi) {
  require(lo.size() == hi.size(), "box bounds must have equal length");
  require((lo.array() <= hi.array()).all(), "box requires lo <= hi");
  return SimpleSet(Kind::Box, std::move(lo), std::move(hi));
}

Vector SimpleSet::project(const Vector& v) const {
  switch (kind_) {
    case Kind::FullSpace: return v;
    case Kind::NonnegativeOrthant: return v.cwiseMax(0.0);
    case Kind::Box:
      require(v.size() == lo_.size(), "box dimension mismatch");
      return v.cwiseMax(lo_).cwiseMin(hi_);
  }
  return v;
}

bool SimpleSet::contains(const Vector& v, double tol) const {
  switch (kind_) {
    case Kind::FullSpace: return true;
    case Kind::NonnegativeOrthant: return (v.array() >= -tol).all();
    case Kind::Box:
      return v.size() == lo_.size() && (v.array() >= lo_.array() - tol).all() &&
             (v.array() <= hi_.array() + tol).all();
  }
  return false;
}

double SimpleSet::lower_bound(Index j) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind_) {
    case Kind::FullSpace: return -inf;
    case Kind::NonnegativeOrthant: return 0.0;
    case Kind::Box: return lo_(j);
  }
  return -inf;
}

double SimpleSet::upper_bound(Index j) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return kind_ == Kind::Box ? hi_(j) : inf;
}

std::string SimpleSet::name() const {
  switch (kind_) {
    case Kind::FullSpace: return "full";
    case Kind::NonnegativeOrthant: return "nonneg";
    case Kind::Box: return "box";
  }
  return "?";
}

bool operator==(const SimpleSet& a, const SimpleSet& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ != SimpleSet::Kind::Box) return true;
  return a.lo_.size() == b.lo_.size() && a.lo_ == b.lo_ && a.hi_ == b.hi_;
}

Vector prox_on_set(const CostFn& f, const SimpleSet& s, const Vector& v,
                   double beta) {
  if (s.kind() == SimpleSet::Kind::FullSpace) return f.prox(v, beta);
  // For the norm restricted to the orthant the order is reversed.
  if (f.kind() == CostFn::Kind::L2Norm &&
      s.kind() == SimpleSet::Kind::NonnegativeOrthant)
    return f.prox(s.project(v), beta);
  return s.project(f.prox(v, beta));
}

// -------------------------------------------------------- CoupledProblem

Index CoupledProblem::total_K() const {
  Index k = 0;
  for (const auto& a : agents) k += a.K();
  return k;
}

Index CoupledProblem::total_P() const {
  Index p = 0;
  for (const auto& a : agents) p += a.P();
  return p;
}

void CoupledProblem::validate() const {
  require(L >= 1, "coupling dimension L must be >= 1");
  require(q.size() == L, "q must have length L");
  require(!agents.empty(), "problem needs at least one agent");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    const std::string tag = "agent " + std::to_string(i) + ": ";
    require(a.E.rows() == L, tag + "E must have L rows");
    require(a.K() >= 1, tag + "K must be >= 1");
    require(a.C.cols() == a.K() || a.P() == 0, tag + "C must have K columns");
    require(a.d.size() == a.P(), tag + "d must have P entries");
    if (a.set.kind() == SimpleSet::Kind::Box)
      require(a.set.lower().size() == a.K(), tag + "box bounds must have K entries");
    require(a.E.allFinite() && a.C.allFinite() && a.d.allFinite(),
            tag + "non-finite data");
  }
}

PrimalPoint PrimalPoint::zeros(const CoupledProblem& p) {
  PrimalPoint pt;
  for (const auto& a : p.agents) {
    pt.x.push_back(Vector::Zero(a.K()));
    pt.r.push_back(Vector::Zero(a.P()));
  }
  return pt;
}

namespace {
void check_point(const CoupledProblem& p, const PrimalPoint& pt) {
  require(pt.x.size() == p.agents.size(), "point has wrong number of agents");
  for (std::size_t i = 0; i < p.agents.size(); ++i)
    require(pt.x[i].size() == p.agents[i].K(),
            "x_" + std::to_string(i) + " has wrong dimension");
}
}  // namespace

double objective(const CoupledProblem& p, const PrimalPoint& pt) {
  check_point(p, pt);
  double total = 0.0;
  for (std::size_t i = 0; i < p.agents.size(); ++i)
    total += p.agents[i].cost.value(pt.x[i]);
  return total;
}

Vector coupling_residual(const CoupledProblem& p, const PrimalPoint& pt) {
  check_point(p, pt);
  Vector acc = Vector::Zero(p.L);
  for (std::size_t i = 0; i < p.agents.size(); ++i)
    acc.noalias() += p.agents[i].E * pt.x[i];
  return acc - p.q;
}

double feas_metric(const CoupledProblem& p, const PrimalPoint& pt) {
  check_point(p, pt);
  const Index rows = p.total_P();
  if (rows == 0) return 0.0;
  double hinge = 0.0;
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    const auto& a = p.agents[i];
    if (a.P() == 0) continue;
    hinge += (a.C * pt.x[i] - a.d).cwiseMax(0.0).sum();
  }
  return hinge / static_cast<double>(rows);
}

double max_row_violation(const CoupledProblem& p, const PrimalPoint& pt) {
  check_point(p, pt);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    const auto& a = p.agents[i];
    if (a.P() == 0) continue;
    worst = std::max(worst, (a.C * pt.x[i] - a.d).maxCoeff());
  }
  return worst;
}

double acc_metric(double obj_k, double obj_star) {
  require(obj_star != 0.0, "Acc is undefined for obj_star == 0");
  return (obj_k - obj_star) / obj_star;
}

// ------------------------------------------------------------ generators

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  Matrix gaussian(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = normal_(rng_);
    return m;
  }
  Vector gaussian(Index n) { return gaussian(n, 1).col(0); }
  Vector abs_gaussian(Index n) { return gaussian(n).cwiseAbs(); }
  Vector sparse(Index n, double fraction) {
    const Index nnz = std::max<Index>(1, std::lround(fraction * n));
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng_);
    Vector v = Vector::Zero(n);
    for (Index k = 0; k < nnz; ++k) v(idx[k]) = normal_(rng_);
    return v;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

AgentData slack_agent(Index L) {
  AgentData a;
  a.E = -Matrix::Identity(L, L);
  a.C = Matrix(0, L);
  a.d = Vector(0);
  a.cost = CostFn::squared_l2();
  a.set = SimpleSet::full_space();
  return a;
}

}  // namespace

CoupledProblem make_constrained_lasso(const LassoSpec& spec, std::uint64_t seed,
                                      PrimalPoint* witness) {
  require(spec.n_agents >= 1 && spec.K >= 1 && spec.L >= 1 && spec.P >= 1,
          "lasso dimensions must be >= 1");
  require(spec.lambda > 0.0, "lasso lambda must be > 0");
  constexpr double kSupport = 0.1;
  constexpr double kNoise = 0.01;

  Draw draw(seed);
  CoupledProblem prob;
  prob.L = spec.L;
  prob.agents.push_back(slack_agent(spec.L));

  std::vector<Vector> x_true;
  Vector signal = Vector::Zero(spec.L);
  for (std::size_t i = 0; i < spec.n_agents; ++i) {
    AgentData a;
    a.E = draw.gaussian(spec.L, spec.K);
    a.C = draw.gaussian(spec.P, spec.K);
    Vector xt = draw.sparse(spec.K, kSupport);
    a.d = a.C * xt + draw.abs_gaussian(spec.P);
    a.cost = CostFn::l1(spec.lambda);
    a.set = SimpleSet::full_space();
    signal.noalias() += a.E * xt;
    x_true.push_back(std::move(xt));
    prob.agents.push_back(std::move(a));
  }
  prob.q = signal + kNoise * draw.gaussian(spec.L);

  if (witness) {
    witness->x.assign(1, Vector());
    witness->r.assign(1, Vector(0));
    for (std::size_t i = 0; i < spec.n_agents; ++i) {
      const auto& a = prob.agents[i + 1];
      witness->x.push_back(x_true[i]);
      witness->r.push_back(a.d - a.C * x_true[i]);
    }
    witness->x[0] = signal - prob.q;
  }
  prob.validate();
  return prob;
}

CoupledProblem make_load_control(const LoadControlSpec& spec,
                                 std::uint64_t seed, PrimalPoint* witness) {
  require(spec.n_agents >= 1 && spec.K >= 1 && spec.L >= 1 && spec.P >= 1,
          "load-control dimensions must be >= 1");
  Draw draw(seed);
  CoupledProblem prob;
  prob.L = spec.L;
  prob.agents.push_back(slack_agent(spec.L));

  std::vector<Vector> x_feas;
  for (std::size_t i = 0; i < spec.n_agents; ++i) {
    AgentData a;
    a.E = draw.gaussian(spec.L, spec.K);
    // rows alternate upper/lower limits: +e_0, -e_0, +e_1, -e_1, ...
    a.C = Matrix::Zero(spec.P, spec.K);
    for (Index row = 0; row < spec.P; ++row)
      a.C(row, (row / 2) % spec.K) = (row % 2 == 0) ? 1.0 : -1.0;
    Vector xf = draw.gaussian(spec.K);
    a.d = a.C * xf + draw.abs_gaussian(spec.P);
    a.cost = CostFn::zero();
    a.set = SimpleSet::full_space();
    x_feas.push_back(std::move(xf));
    prob.agents.push_back(std::move(a));
  }

  // Supply accumulated in the same order as coupling_residual, so the
  // witness balances exactly.
  Vector supply = Vector::Zero(spec.L);
  supply.noalias() += prob.agents[0].E * Vector::Zero(spec.L);
  for (std::size_t i = 0; i < spec.n_agents; ++i)
    supply.noalias() += prob.agents[i + 1].E * x_feas[i];
  prob.q = supply;

  if (witness) {
    witness->x.assign(1, Vector::Zero(spec.L));
    witness->r.assign(1, Vector(0));
    for (std::size_t i = 0; i < spec.n_agents; ++i) {
      const auto& a = prob.agents[i + 1];
      witness->x.push_back(x_feas[i]);
      witness->r.push_back(a.d - a.C * x_feas[i]);
    }
  }
  prob.validate();
  return prob;
}

}  // namespace dcmesh
