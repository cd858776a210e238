#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "poq/f2.hpp"
#include "poq/rng.hpp"

/// Exact simulation of the honest prover.
///
/// Every state the honest prover holds is a uniform superposition over an
/// affine subspace of GF(2)^l, optionally entangled with one qubit, so the
/// simulation tracks linear constraints instead of amplitudes. A dense
/// statevector simulator of the prover circuit is kept alongside as an
/// oracle for small sizes. Global phases are dropped throughout.
namespace poq::qsim {

using f2::BitMat;
using f2::BitVec;

/// Uniform superposition over {x in GF(2)^dim : M x = y}.
///
/// Constraints are held in echelon form (each row has a pivot column that is
/// zero in every other row), so membership of a vector in the row space is a
/// single pass.
class AffineState {
 public:
  explicit AffineState(std::size_t dim);
  AffineState(const BitMat& m, const BitVec& y);

  std::size_t dim() const { return dim_; }
  std::size_t rank() const { return rows_.size(); }
  /// log2 of the number of basis states in the superposition.
  std::size_t log2_size() const { return dim_ - rows_.size(); }

  /// a.x when it is constant on the solution set.
  std::optional<bool> evaluate(const BitVec& a) const;
  /// Adds a.x = value. Requires evaluate(a) to be empty.
  void restrict(const BitVec& a, bool value);

  BitMat constraints() const;
  BitVec targets() const;
  /// Any one solution.
  BitVec base_point() const;
  /// Basis of the direction space {k : M k = 0}.
  std::vector<BitVec> directions() const;
  std::vector<BitVec> solutions() const;

 private:
  std::size_t dim_;
  std::vector<BitVec> rows_;
  std::vector<std::size_t> pivots_;
  std::vector<bool> targets_;
};

/// Dictator predicate on one coordinate: g(x) = x[position] xor inverted.
struct Dictator {
  std::size_t position = 0;
  bool inverted = false;

  bool operator()(const BitVec& x) const { return x.get(position) != inverted; }
  bool operator==(const Dictator&) const = default;
};

/// The two claw values with the branch predicate; g(x0) = 0, g(x1) = 1.
struct ClawPair {
  BitVec x0;
  BitVec x1;
  Dictator g;

  /// Builds the pair with g on the lowest coordinate where x0, x1 differ.
  /// Throws std::invalid_argument when x0 == x1 or lengths differ.
  static ClawPair from_values(BitVec x0, BitVec x1);
  std::size_t dim() const { return x0.size(); }
  bool valid() const;
};

enum class Basis : std::uint8_t { kZ, kX };

/// Z(b) = |b>, X(s) = (|0> + (-1)^s |1>) / sqrt 2.
struct QubitDesc {
  Basis basis = Basis::kZ;
  bool bit = false;

  static QubitDesc z(bool b) { return {Basis::kZ, b}; }
  static QubitDesc x(bool s) { return {Basis::kX, s}; }
  std::array<double, 2> amplitudes() const;
  bool operator==(const QubitDesc&) const = default;
  std::string to_string() const;
};

/// CHSH measurement angle; wire byte 0 = +pi/8, 1 = -pi/8.
enum class Theta : std::uint8_t { kPlus = 0, kMinus = 1 };

double radians(Theta theta);
inline Theta theta_from_bit(bool b) { return b ? Theta::kMinus : Theta::kPlus; }

struct LinearOutcome {
  bool bit;
  AffineState state;
};

struct LinearBranch {
  double prob;
  bool bit;
  AffineState state;
};

/// Computes a.x into a fresh ancilla and measures it.
LinearOutcome linear_bit_measure(const AffineState& st, const BitVec& a, RandomSource& rng);
/// Every outcome of linear_bit_measure with its probability.
std::vector<LinearBranch> linear_bit_branches(const AffineState& st, const BitVec& a);

struct CommitOutcome {
  BitVec d;
  QubitDesc qubit;
};

/// Maps (|x0> + |x1>) to (|x0, r0.x0> + |x1, r1.x1>), measures X in the
/// Hadamard basis. d is uniform when r0.x0 != r1.x1 and uniform on
/// (x0 ^ x1)^perp otherwise; the qubit follows from the case split.
CommitOutcome hadamard_commit_measure(const ClawPair& claw, const BitVec& r0, const BitVec& r1,
                                      RandomSource& rng);
/// Residual qubit of hadamard_commit_measure for a given d.
QubitDesc commit_qubit(const ClawPair& claw, const BitVec& r0, const BitVec& r1, const BitVec& d);

struct CommitBranch {
  double prob;
  BitVec d;
  QubitDesc qubit;
};

/// Commitment over an arbitrary affine superposition with a single r, the
/// shape of the parity protocol when the claw map is not 2-to-1. Reduces to
/// hadamard_commit_measure when the state has exactly two elements.
CommitOutcome affine_commit_measure(const AffineState& st, const BitVec& r, RandomSource& rng);
std::vector<CommitBranch> affine_commit_branches(const AffineState& st, const BitVec& r);

/// Probability of outcome 0 when q is measured in the basis
/// {cos t|0> + sin t|1>, sin t|0> - cos t|1>}.
double chsh_prob_zero(const QubitDesc& q, Theta theta);
bool chsh_measure(const QubitDesc& q, Theta theta, RandomSource& rng);

// --- dense oracle ---------------------------------------------------------

/// Dense state over at most 22 qubits; qubit j is bit j of the index.
class StateVector {
 public:
  static constexpr std::size_t kMaxQubits = 22;

  explicit StateVector(std::size_t qubits);

  std::size_t qubits() const { return qubits_; }
  const std::vector<std::complex<double>>& amplitudes() const { return amp_; }
  std::vector<std::complex<double>>& amplitudes() { return amp_; }

  void h(std::size_t q);
  void x(std::size_t q);
  void cnot(std::size_t control, std::size_t target);
  /// Ry(angle) = [[cos(a/2), -sin(a/2)], [sin(a/2), cos(a/2)]].
  void ry(std::size_t q, double angle);

  double prob_one(std::size_t q) const;
  /// Projects qubit q on `bit` and renormalises; returns the branch
  /// probability. Throws std::domain_error on a zero-probability branch.
  double project(std::size_t q, bool bit);
  double norm() const;

  /// Largest |norm - 1| seen after any gate since construction.
  double max_norm_error() const { return max_norm_error_; }

 private:
  void track_norm();

  std::size_t qubits_;
  std::vector<std::complex<double>> amp_;
  double max_norm_error_ = 0.0;
};

/// Exact distribution keyed by "y|d|b" with bit strings in index order.
using Distribution = std::map<std::string, double>;

std::string outcome_key(const BitVec& y, const BitVec& d, bool b);
double total_variation(const Distribution& p, const Distribution& q);

struct OracleResult {
  Distribution dist;
  double max_norm_error = 0.0;
  std::size_t qubits = 0;
};

/// Verifier messages of one parity-protocol run.
struct Protocol1Messages {
  std::vector<BitVec> a_rows;  // 2n rows of length n+1
  BitVec r;
  Theta theta = Theta::kPlus;
};

/// Gate-level run of the parity-protocol prover circuit on n+2 qubits
/// (n+1 register qubits, one ancilla reused for every y_i and for B).
/// Throws std::invalid_argument for n > 6.
OracleResult statevector_protocol1_oracle(std::size_t n, const Protocol1Messages& msgs);
/// Same distribution from the claw calculus.
Distribution claw_protocol1_distribution(std::size_t n, const Protocol1Messages& msgs);

struct DenseCommitBranch {
  double prob;
  BitVec d;
  std::array<std::complex<double>, 2> qubit;
};

/// Dense Hadamard-basis measurement of (|x0, r0.x0> + |x1, r1.x1>)/sqrt 2
/// for dim <= 12. Returns every d with nonzero probability.
std::vector<DenseCommitBranch> statevector_commit_oracle(const BitVec& x0, const BitVec& x1,
                                                         const BitVec& r0, const BitVec& r1);

}  // namespace poq::qsim
