#include "poq/qsim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace poq::qsim {

// --- AffineState ------------------------------------------------------------

AffineState::AffineState(std::size_t dim) : dim_(dim) {}

AffineState::AffineState(const BitMat& m, const BitVec& y) : dim_(m.cols()) {
  if (m.rows() != y.size()) throw std::invalid_argument("AffineState: rhs length mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto known = evaluate(m.row(r));
    if (known.has_value()) {
      if (*known != y.get(r)) throw std::invalid_argument("AffineState: empty solution set");
      continue;
    }
    restrict(m.row(r), y.get(r));
  }
}

std::optional<bool> AffineState::evaluate(const BitVec& a) const {
  if (a.size() != dim_) throw std::invalid_argument("AffineState::evaluate: length mismatch");
  BitVec rem = a;
  bool value = false;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rem.get(pivots_[i])) {
      rem ^= rows_[i];
      value = value != targets_[i];
    }
  }
  if (!rem.is_zero()) return std::nullopt;
  return value;
}

void AffineState::restrict(const BitVec& a, bool value) {
  BitVec rem = a;
  bool target = value;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rem.get(pivots_[i])) {
      rem ^= rows_[i];
      target = target != targets_[i];
    }
  }
  if (rem.is_zero()) throw std::logic_error("AffineState::restrict: dependent constraint");
  const std::size_t pivot = rem.lowest_set();
  // Clear the new pivot from older rows to keep every pivot column unique.
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].get(pivot)) {
      rows_[i] ^= rem;
      targets_[i] = targets_[i] != target;
    }
  }
  rows_.push_back(std::move(rem));
  pivots_.push_back(pivot);
  targets_.push_back(target);
}

BitMat AffineState::constraints() const {
  BitMat m(0, dim_);
  for (const auto& r : rows_) m.append_row(r);
  return m;
}

BitVec AffineState::targets() const {
  BitVec y(targets_.size());
  for (std::size_t i = 0; i < targets_.size(); ++i) y.set(i, targets_[i]);
  return y;
}

BitVec AffineState::base_point() const {
  BitVec x(dim_);
  for (std::size_t i = 0; i < rows_.size(); ++i) x.set(pivots_[i], targets_[i]);
  return x;
}

std::vector<BitVec> AffineState::directions() const { return f2::kernel(constraints()); }

std::vector<BitVec> AffineState::solutions() const {
  return f2::solve_preimages(constraints(), targets());
}

// --- claws and qubits ---------------------------------------------------------

ClawPair ClawPair::from_values(BitVec x0, BitVec x1) {
  if (x0.size() != x1.size()) throw std::invalid_argument("ClawPair: length mismatch");
  const BitVec diff = x0 ^ x1;
  if (diff.is_zero()) throw std::invalid_argument("ClawPair: x0 == x1");
  const std::size_t p = diff.lowest_set();
  Dictator g{p, x0.get(p)};
  return ClawPair{std::move(x0), std::move(x1), g};
}

bool ClawPair::valid() const {
  return x0.size() == x1.size() && x0 != x1 && g.position < x0.size() && !g(x0) && g(x1);
}

std::array<double, 2> QubitDesc::amplitudes() const {
  if (basis == Basis::kZ) return bit ? std::array{0.0, 1.0} : std::array{1.0, 0.0};
  const double h = std::numbers::sqrt2 / 2.0;
  return {h, bit ? -h : h};
}

std::string QubitDesc::to_string() const {
  return std::string(basis == Basis::kZ ? "Z(" : "X(") + (bit ? "1)" : "0)");
}

double radians(Theta theta) {
  return theta == Theta::kPlus ? std::numbers::pi / 8.0 : -std::numbers::pi / 8.0;
}

// --- measurements -------------------------------------------------------------

LinearOutcome linear_bit_measure(const AffineState& st, const BitVec& a, RandomSource& rng) {
  if (const auto known = st.evaluate(a)) return {*known, st};
  const bool bit = rng.bit();
  AffineState next = st;
  next.restrict(a, bit);
  return {bit, std::move(next)};
}

std::vector<LinearBranch> linear_bit_branches(const AffineState& st, const BitVec& a) {
  if (const auto known = st.evaluate(a)) return {{1.0, *known, st}};
  std::vector<LinearBranch> out;
  for (bool bit : {false, true}) {
    AffineState next = st;
    next.restrict(a, bit);
    out.push_back({0.5, bit, std::move(next)});
  }
  return out;
}

QubitDesc commit_qubit(const ClawPair& claw, const BitVec& r0, const BitVec& r1,
                       const BitVec& d) {
  const bool delta0 = f2::dot(r0, claw.x0);
  const bool delta1 = f2::dot(r1, claw.x1);
  if (delta0 == delta1) return QubitDesc::z(delta0);
  return QubitDesc::x(f2::dot(d, claw.x0 ^ claw.x1));
}

CommitOutcome hadamard_commit_measure(const ClawPair& claw, const BitVec& r0, const BitVec& r1,
                                      RandomSource& rng) {
  if (r0.size() != claw.dim() || r1.size() != claw.dim()) {
    throw std::invalid_argument("hadamard_commit_measure: length mismatch");
  }
  // With equal committed bits the amplitudes of d with d.(x0 ^ x1) = 1 cancel.
  const bool split = f2::dot(r0, claw.x0) != f2::dot(r1, claw.x1);
  BitVec d = split ? f2::sample_uniform(claw.dim(), rng)
                   : f2::sample_conditioned(claw.dim(), claw.x0 ^ claw.x1, false, rng);
  QubitDesc q = commit_qubit(claw, r0, r1, d);
  return {std::move(d), q};
}

namespace {

// Direction space split by r: d ranges uniformly over `constraint`^perp and
// the qubit is X(d.w) when r is not constant on the state, Z(r.x) otherwise.
struct AffineCommitShape {
  BitMat constraint;
  std::optional<BitVec> w;
  bool constant_value = false;
};

AffineCommitShape commit_shape(const AffineState& st, const BitVec& r) {
  if (r.size() != st.dim()) throw std::invalid_argument("affine_commit: length mismatch");
  const auto dirs = st.directions();
  AffineCommitShape shape{BitMat(0, st.dim()), std::nullopt, false};
  for (const auto& k : dirs) {
    if (f2::dot(r, k)) {
      shape.w = k;
      break;
    }
  }
  if (!shape.w) {
    for (const auto& k : dirs) shape.constraint.append_row(k);
    shape.constant_value = f2::dot(r, st.base_point());
    return shape;
  }
  for (const auto& k : dirs) {
    if (k == *shape.w) continue;
    shape.constraint.append_row(f2::dot(r, k) ? (k ^ *shape.w) : k);
  }
  return shape;
}

QubitDesc shape_qubit(const AffineCommitShape& shape, const BitVec& d) {
  if (!shape.w) return QubitDesc::z(shape.constant_value);
  return QubitDesc::x(f2::dot(d, *shape.w));
}

}  // namespace

CommitOutcome affine_commit_measure(const AffineState& st, const BitVec& r, RandomSource& rng) {
  const AffineCommitShape shape = commit_shape(st, r);
  BitVec d = *f2::sample_solution(shape.constraint, BitVec(shape.constraint.rows()), rng);
  const QubitDesc q = shape_qubit(shape, d);
  return {std::move(d), q};
}

std::vector<CommitBranch> affine_commit_branches(const AffineState& st, const BitVec& r) {
  const AffineCommitShape shape = commit_shape(st, r);
  auto ds = f2::solve_preimages(shape.constraint, BitVec(shape.constraint.rows()));
  const double p = 1.0 / static_cast<double>(ds.size());
  std::vector<CommitBranch> out;
  out.reserve(ds.size());
  for (auto& d : ds) {
    const QubitDesc q = shape_qubit(shape, d);
    out.push_back({p, std::move(d), q});
  }
  return out;
}

double chsh_prob_zero(const QubitDesc& q, Theta theta) {
  const double t = radians(theta);
  if (q.basis == Basis::kZ) {
    const double c = std::cos(t);
    const double s = std::sin(t);
    return q.bit ? s * s : c * c;
  }
  const double s2 = std::sin(2.0 * t);
  return q.bit ? (1.0 - s2) / 2.0 : (1.0 + s2) / 2.0;
}

bool chsh_measure(const QubitDesc& q, Theta theta, RandomSource& rng) {
  return !(rng.uniform01() < chsh_prob_zero(q, theta));
}

// --- StateVector --------------------------------------------------------------

StateVector::StateVector(std::size_t qubits) : qubits_(qubits) {
  if (qubits > kMaxQubits) throw std::invalid_argument("StateVector: too many qubits");
  amp_.assign(std::size_t{1} << qubits, {0.0, 0.0});
  amp_[0] = 1.0;
}

void StateVector::track_norm() {
  max_norm_error_ = std::max(max_norm_error_, std::abs(norm() - 1.0));
}

void StateVector::h(std::size_t q) {
  const std::size_t bit = std::size_t{1} << q;
  const double f = std::numbers::sqrt2 / 2.0;
  for (std::size_t i = 0; i < amp_.size(); ++i) {
    if (i & bit) continue;
    const auto a = amp_[i];
    const auto b = amp_[i | bit];
    amp_[i] = f * (a + b);
    amp_[i | bit] = f * (a - b);
  }
  track_norm();
}

void StateVector::x(std::size_t q) {
  const std::size_t bit = std::size_t{1} << q;
  for (std::size_t i = 0; i < amp_.size(); ++i) {
    if (!(i & bit)) std::swap(amp_[i], amp_[i | bit]);
  }
  track_norm();
}

void StateVector::cnot(std::size_t control, std::size_t target) {
  const std::size_t cbit = std::size_t{1} << control;
  const std::size_t tbit = std::size_t{1} << target;
  for (std::size_t i = 0; i < amp_.size(); ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(amp_[i], amp_[i | tbit]);
  }
  track_norm();
}

void StateVector::ry(std::size_t q, double angle) {
  const std::size_t bit = std::size_t{1} << q;
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  for (std::size_t i = 0; i < amp_.size(); ++i) {
    if (i & bit) continue;
    const auto a = amp_[i];
    const auto b = amp_[i | bit];
    amp_[i] = c * a - s * b;
    amp_[i | bit] = s * a + c * b;
  }
  track_norm();
}

double StateVector::prob_one(std::size_t q) const {
  const std::size_t bit = std::size_t{1} << q;
  double p = 0.0;
  for (std::size_t i = 0; i < amp_.size(); ++i) {
    if (i & bit) p += std::norm(amp_[i]);
  }
  return p;
}

double StateVector::project(std::size_t q, bool value) {
  const std::size_t bit = std::size_t{1} << q;
  const double p = value ? prob_one(q) : 1.0 - prob_one(q);
  if (p <= 0.0) throw std::domain_error("StateVector::project: zero-probability branch");
  const double scale = 1.0 / std::sqrt(p);
  for (std::size_t i = 0; i < amp_.size(); ++i) {
    if (((i & bit) != 0) == value) {
      amp_[i] *= scale;
    } else {
      amp_[i] = 0.0;
    }
  }
  track_norm();
  return p;
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amp_) s += std::norm(a);
  return std::sqrt(s);
}

// --- distributions --------------------------------------------------------------

std::string outcome_key(const BitVec& y, const BitVec& d, bool b) {
  return y.to_string() + "|" + d.to_string() + "|" + (b ? "1" : "0");
}

double total_variation(const Distribution& p, const Distribution& q) {
  double acc = 0.0;
  for (const auto& [k, v] : p) {
    const auto it = q.find(k);
    acc += std::abs(v - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q) {
    if (!p.contains(k)) acc += std::abs(v);
  }
  return acc / 2.0;
}

namespace {

constexpr double kBranchFloor = 1e-14;

void check_messages(std::size_t n, const Protocol1Messages& msgs) {
  if (msgs.a_rows.size() != 2 * n) throw std::invalid_argument("protocol1: need 2n rows");
  for (const auto& a : msgs.a_rows) {
    if (a.size() != n + 1) throw std::invalid_argument("protocol1: row length != n+1");
  }
  if (msgs.r.size() != n + 1) throw std::invalid_argument("protocol1: r length != n+1");
}

struct OracleWalk {
  std::size_t n;
  const Protocol1Messages& msgs;
  OracleResult& result;

  std::size_t ancilla() const { return n + 1; }

  void claw_round(StateVector sv, std::size_t round, BitVec y, double weight) {
    if (round == msgs.a_rows.size()) {
      finish(std::move(sv), y, weight);
      return;
    }
    const BitVec& a = msgs.a_rows[round];
    for (std::size_t j = 0; j <= n; ++j) {
      if (a.get(j)) sv.cnot(j, ancilla());
    }
    const double p1 = sv.prob_one(ancilla());
    for (bool bit : {false, true}) {
      const double p = bit ? p1 : 1.0 - p1;
      if (p < kBranchFloor) continue;
      StateVector branch = sv;
      branch.project(ancilla(), bit);
      if (bit) branch.x(ancilla());  // reset the ancilla for the next round
      BitVec y_next = y;
      y_next.push_back(bit);
      claw_round(std::move(branch), round + 1, std::move(y_next), weight * p);
    }
  }

  void finish(StateVector sv, const BitVec& y, double weight) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (msgs.r.get(j)) sv.cnot(j, ancilla());
    }
    for (std::size_t j = 0; j <= n; ++j) sv.h(j);
    // R_theta maps the first CHSH basis vector to |0>; it acts on the ancilla
    // only, so it commutes with the register measurement.
    sv.ry(ancilla(), -2.0 * radians(msgs.theta));
    result.max_norm_error = std::max(result.max_norm_error, sv.max_norm_error());
    const std::size_t reg = std::size_t{1} << (n + 1);
    for (std::size_t d = 0; d < reg; ++d) {
      for (bool b : {false, true}) {
        const double p = std::norm(sv.amplitudes()[d | (b ? reg : 0)]);
        if (p < kBranchFloor) continue;
        result.dist[outcome_key(y, BitVec::from_uint(d, n + 1), b)] += weight * p;
      }
    }
  }
};

void claw_walk(const Protocol1Messages& msgs, std::size_t round, const AffineState& st,
               const BitVec& y, double weight, Distribution& dist) {
  if (round == msgs.a_rows.size()) {
    for (const auto& br : affine_commit_branches(st, msgs.r)) {
      const double p0 = chsh_prob_zero(br.qubit, msgs.theta);
      if (p0 >= kBranchFloor) dist[outcome_key(y, br.d, false)] += weight * br.prob * p0;
      if (1.0 - p0 >= kBranchFloor) dist[outcome_key(y, br.d, true)] += weight * br.prob * (1.0 - p0);
    }
    return;
  }
  for (const auto& br : linear_bit_branches(st, msgs.a_rows[round])) {
    BitVec y_next = y;
    y_next.push_back(br.bit);
    claw_walk(msgs, round + 1, br.state, y_next, weight * br.prob, dist);
  }
}

}  // namespace

OracleResult statevector_protocol1_oracle(std::size_t n, const Protocol1Messages& msgs) {
  if (n > 6) throw std::invalid_argument("statevector oracle: n > 6");
  check_messages(n, msgs);
  OracleResult result;
  result.qubits = n + 2;
  StateVector sv(n + 2);
  for (std::size_t j = 0; j <= n; ++j) sv.h(j);
  OracleWalk walk{n, msgs, result};
  walk.claw_round(std::move(sv), 0, BitVec(), 1.0);
  return result;
}

Distribution claw_protocol1_distribution(std::size_t n, const Protocol1Messages& msgs) {
  check_messages(n, msgs);
  Distribution dist;
  claw_walk(msgs, 0, AffineState(n + 1), BitVec(), 1.0, dist);
  return dist;
}

std::vector<DenseCommitBranch> statevector_commit_oracle(const BitVec& x0, const BitVec& x1,
                                                         const BitVec& r0, const BitVec& r1) {
  const std::size_t dim = x0.size();
  if (dim > 12) throw std::invalid_argument("statevector_commit_oracle: dim > 12");
  if (x1.size() != dim || r0.size() != dim || r1.size() != dim || x0 == x1) {
    throw std::invalid_argument("statevector_commit_oracle: bad claw");
  }
  StateVector sv(dim + 1);
  auto& amp = sv.amplitudes();
  const std::size_t anc = std::size_t{1} << dim;
  amp[0] = 0.0;
  const double h = std::numbers::sqrt2 / 2.0;
  amp[x0.to_uint() | (f2::dot(r0, x0) ? anc : 0)] = h;
  amp[x1.to_uint() | (f2::dot(r1, x1) ? anc : 0)] = h;
  for (std::size_t j = 0; j < dim; ++j) sv.h(j);
  std::vector<DenseCommitBranch> out;
  for (std::size_t d = 0; d < anc; ++d) {
    const auto a0 = sv.amplitudes()[d];
    const auto a1 = sv.amplitudes()[d | anc];
    const double p = std::norm(a0) + std::norm(a1);
    if (p < kBranchFloor) continue;
    const double s = 1.0 / std::sqrt(p);
    out.push_back({p, BitVec::from_uint(d, dim), {a0 * s, a1 * s}});
  }
  return out;
}

}  // namespace poq::qsim
