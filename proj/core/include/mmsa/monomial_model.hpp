#pragma once

// Monomial models: atomic probabilities that are monomials in a parameter
// vector whose coordinates are grouped into simplex blocks.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mmsa {

using Index = std::size_t;

/// Tolerance on per-block sums and on total probability.
inline constexpr double kSimplexTolerance = 1e-9;
/// Parameters must lie in (kPositivityMargin, 1 - kPositivityMargin).
inline constexpr double kPositivityMargin = 1e-12;

struct ExponentEntry {
  Index atom;
  Index param;
  unsigned exponent = 1;
};

/// Sparse q x k matrix of non-negative integer exponents, stored row-major.
/// Zero exponents are implicit.
class ExponentMatrix {
 public:
  struct Term {
    Index param;
    unsigned exponent;
  };

  ExponentMatrix() = default;
  /// Rejects out-of-range indices, zero exponents, duplicate cells, all-zero
  /// rows and rows whose every column carries exponent one.
  ExponentMatrix(std::size_t n_atoms, std::size_t n_params,
                 std::vector<ExponentEntry> entries);

  std::size_t n_atoms() const noexcept { return n_atoms_; }
  std::size_t n_params() const noexcept { return n_params_; }
  std::size_t nonzeros() const noexcept { return terms_.size(); }

  /// Terms of one row, sorted by parameter index.
  std::span<const Term> row(Index atom) const;
  unsigned exponent(Index atom, Index param) const;
  std::vector<ExponentEntry> entries() const;

 private:
  std::size_t n_atoms_ = 0;
  std::size_t n_params_ = 0;
  std::vector<std::size_t> row_start_;
  std::vector<Term> terms_;
};

/// Ordered partition of [k] into blocks S_1..S_n, each of size >= 2.
class SimplexPartition {
 public:
  explicit SimplexPartition(std::vector<std::vector<Index>> blocks);

  std::size_t n_blocks() const noexcept { return blocks_.size(); }
  std::size_t n_params() const noexcept { return block_of_.size(); }
  std::span<const Index> block(Index b) const;
  Index block_of(Index param) const;
  const std::vector<std::vector<Index>>& blocks() const noexcept { return blocks_; }

 private:
  std::vector<std::vector<Index>> blocks_;
  std::vector<Index> block_of_;
};

using PartitionPtr = std::shared_ptr<const SimplexPartition>;

/// Parameter vector theta partitioned by a SimplexPartition. Construction
/// only checks shapes; simplex membership is evaluated once and exposed via
/// is_valid() / violations() so that invalid vectors can still be inspected.
class ParameterVector {
 public:
  ParameterVector(PartitionPtr partition, std::vector<double> values,
                  std::vector<std::string> labels = {});

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(Index i) const { return labels_.at(i); }
  const SimplexPartition& partition() const noexcept { return *partition_; }
  const PartitionPtr& partition_ptr() const noexcept { return partition_; }

  bool is_valid() const noexcept { return violations_.empty(); }
  /// Human-readable positivity / sum-to-one violations.
  const std::vector<std::string>& violations() const noexcept { return violations_; }
  /// Throws SimplexViolation when the vector is not on the product of simplices.
  void require_valid() const;

  std::vector<double> block_values(Index b) const;
  /// Same partition and labels, new values.
  ParameterVector with_values(std::vector<double> values) const;

 private:
  PartitionPtr partition_;
  std::vector<double> values_;
  std::vector<std::string> labels_;
  std::vector<std::string> violations_;
};

class MonomialModel {
 public:
  MonomialModel(ExponentMatrix matrix, PartitionPtr partition,
                std::vector<std::string> atom_labels = {});

  const ExponentMatrix& matrix() const noexcept { return matrix_; }
  const SimplexPartition& partition() const noexcept { return *partition_; }
  const PartitionPtr& partition_ptr() const noexcept { return partition_; }
  const std::vector<std::string>& atom_labels() const noexcept { return atom_labels_; }
  std::size_t n_atoms() const noexcept { return matrix_.n_atoms(); }
  std::size_t n_params() const noexcept { return matrix_.n_params(); }
  bool is_multilinear() const noexcept { return multilinear_; }

 private:
  ExponentMatrix matrix_;
  PartitionPtr partition_;
  std::vector<std::string> atom_labels_;
  bool multilinear_ = true;
};

/// Non-empty set of distinct atom indices, stored sorted.
class AtomEvent {
 public:
  AtomEvent(std::vector<Index> atoms, std::size_t n_atoms);
  static AtomEvent all(std::size_t n_atoms);

  std::span<const Index> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool contains(Index atom) const;

 private:
  std::vector<Index> atoms_;
};

double atomic_probability(const MonomialModel& model, const ParameterVector& theta,
                          Index atom);
double event_probability(const MonomialModel& model, const ParameterVector& theta,
                         const AtomEvent& event);
/// All q atomic probabilities in atom order.
std::vector<double> atomic_probabilities(const MonomialModel& model,
                                         const ParameterVector& theta);

bool check_multilinear(const MonomialModel& model);

enum class Regularity { Strict, Weak };

/// Weak: no row carries two parameters of one block. Strict additionally
/// requires every row to carry exactly one parameter of every block family.
/// `block_family[b]` groups blocks that describe one distribution under
/// mutually exclusive contexts (the CPT columns of one BN variable); by
/// default every block is its own family. Throws NonMultilinear on a
/// non-multilinear model.
bool check_regular(const MonomialModel& model, Regularity mode,
                   std::span<const Index> block_family = {});

struct Violation {
  enum class Kind { ShapeMismatch, Positivity, SumToOne, Normalization };
  Kind kind;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

std::string_view violation_kind_name(Violation::Kind kind) noexcept;

/// Empty report means the pair is a valid point of the model.
ValidationReport validate(const MonomialModel& model, const ParameterVector& theta);

namespace detail {

/// theta^{A_y} without any checks.
double monomial(const ExponentMatrix& matrix, Index atom, std::span<const double> values);

}  // namespace detail

}  // namespace mmsa
