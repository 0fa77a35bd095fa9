#include "mmsa/monomial_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mmsa/error.hpp"

namespace mmsa {

namespace {

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// ExponentMatrix

ExponentMatrix::ExponentMatrix(std::size_t n_atoms, std::size_t n_params,
                               std::vector<ExponentEntry> entries)
    : n_atoms_(n_atoms), n_params_(n_params) {
  if (n_atoms == 0 || n_params == 0) {
    throw Error(ErrorCode::InvalidExponentMatrix, "exponent matrix must be non-empty");
  }
  for (const auto& e : entries) {
    if (e.atom >= n_atoms || e.param >= n_params) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "exponent entry (" + std::to_string(e.atom) + ", " +
                      std::to_string(e.param) + ") outside " + std::to_string(n_atoms) +
                      "x" + std::to_string(n_params) + " matrix");
    }
    if (e.exponent == 0) {
      throw Error(ErrorCode::InvalidExponentMatrix,
                  "stored exponents must be >= 1 (atom " + std::to_string(e.atom) + ")");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.atom != b.atom ? a.atom < b.atom : a.param < b.param;
  });
  row_start_.assign(n_atoms + 1, 0);
  terms_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0 && entries[i].atom == entries[i - 1].atom &&
        entries[i].param == entries[i - 1].param) {
      throw Error(ErrorCode::InvalidExponentMatrix,
                  "duplicate exponent entry at (" + std::to_string(entries[i].atom) + ", " +
                      std::to_string(entries[i].param) + ")");
    }
    ++row_start_[entries[i].atom + 1];
    terms_.push_back({entries[i].param, entries[i].exponent});
  }
  std::partial_sum(row_start_.begin(), row_start_.end(), row_start_.begin());

  for (Index y = 0; y < n_atoms; ++y) {
    auto r = row(y);
    if (r.empty()) {
      throw Error(ErrorCode::InvalidExponentMatrix,
                  "row " + std::to_string(y) + " has all exponents zero");
    }
    if (n_params > 1 && r.size() == n_params &&
        std::all_of(r.begin(), r.end(), [](const Term& t) { return t.exponent == 1; })) {
      throw Error(ErrorCode::InvalidExponentMatrix,
                  "row " + std::to_string(y) + " has all exponents equal to one");
    }
  }
}

std::span<const ExponentMatrix::Term> ExponentMatrix::row(Index atom) const {
  if (atom >= n_atoms_) {
    throw Error(ErrorCode::IndexOutOfRange, "atom index " + std::to_string(atom) +
                                                " out of range (q = " +
                                                std::to_string(n_atoms_) + ")");
  }
  return {terms_.data() + row_start_[atom], row_start_[atom + 1] - row_start_[atom]};
}

unsigned ExponentMatrix::exponent(Index atom, Index param) const {
  auto r = row(atom);
  auto it = std::lower_bound(r.begin(), r.end(), param,
                             [](const Term& t, Index p) { return t.param < p; });
  return (it != r.end() && it->param == param) ? it->exponent : 0U;
}

std::vector<ExponentEntry> ExponentMatrix::entries() const {
  std::vector<ExponentEntry> out;
  out.reserve(terms_.size());
  for (Index y = 0; y < n_atoms_; ++y) {
    for (const auto& t : row(y)) out.push_back({y, t.param, t.exponent});
  }
  return out;
}

// ---------------------------------------------------------------------------
// SimplexPartition

SimplexPartition::SimplexPartition(std::vector<std::vector<Index>> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) {
    throw Error(ErrorCode::InvalidPartition, "partition has no blocks");
  }
  std::size_t k = 0;
  for (const auto& b : blocks_) k += b.size();
  constexpr Index kUnassigned = static_cast<Index>(-1);
  block_of_.assign(k, kUnassigned);
  for (Index b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].size() < 2) {
      throw Error(ErrorCode::InvalidPartition,
                  "block " + std::to_string(b) + " has fewer than two parameters");
    }
    for (Index j : blocks_[b]) {
      if (j >= k) {
        throw Error(ErrorCode::InvalidPartition,
                    "parameter index " + std::to_string(j) + " outside [0, " +
                        std::to_string(k) + ")");
      }
      if (block_of_[j] != kUnassigned) {
        throw Error(ErrorCode::InvalidPartition,
                    "parameter " + std::to_string(j) + " appears in more than one block");
      }
      block_of_[j] = b;
    }
  }
}

std::span<const Index> SimplexPartition::block(Index b) const {
  if (b >= blocks_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "block index " + std::to_string(b) +
                                                " out of range");
  }
  return blocks_[b];
}

Index SimplexPartition::block_of(Index param) const {
  if (param >= block_of_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "parameter index " + std::to_string(param) +
                                                " out of range (k = " +
                                                std::to_string(block_of_.size()) + ")");
  }
  return block_of_[param];
}

// ---------------------------------------------------------------------------
// ParameterVector

ParameterVector::ParameterVector(PartitionPtr partition, std::vector<double> values,
                                 std::vector<std::string> labels)
    : partition_(std::move(partition)), values_(std::move(values)), labels_(std::move(labels)) {
  if (!partition_) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector needs a partition");
  }
  if (values_.size() != partition_->n_params()) {
    throw Error(ErrorCode::ShapeMismatch,
                "parameter vector has " + std::to_string(values_.size()) +
                    " values but the partition covers " +
                    std::to_string(partition_->n_params()));
  }
  if (labels_.empty()) {
    labels_.reserve(values_.size());
    for (Index i = 0; i < values_.size(); ++i) labels_.push_back("theta" + std::to_string(i + 1));
  } else if (labels_.size() != values_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "label count does not match parameter count");
  }

  for (Index i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!(v > kPositivityMargin && v < 1.0 - kPositivityMargin)) {
      violations_.push_back("parameter " + labels_[i] + " = " + fmt_double(v) +
                            " is not in (0, 1)");
    }
  }
  for (Index b = 0; b < partition_->n_blocks(); ++b) {
    double s = 0.0;
    for (Index j : partition_->block(b)) s += values_[j];
    if (!(std::abs(s - 1.0) <= kSimplexTolerance)) {
      violations_.push_back("block " + std::to_string(b + 1) + " sums to " + fmt_double(s));
    }
  }
}

void ParameterVector::require_valid() const {
  if (!violations_.empty()) {
    throw Error(ErrorCode::SimplexViolation, "invalid parameter vector: " + violations_.front());
  }
}

std::vector<double> ParameterVector::block_values(Index b) const {
  std::vector<double> out;
  for (Index j : partition_->block(b)) out.push_back(values_[j]);
  return out;
}

ParameterVector ParameterVector::with_values(std::vector<double> values) const {
  return ParameterVector(partition_, std::move(values), labels_);
}

// ---------------------------------------------------------------------------
// MonomialModel / AtomEvent

MonomialModel::MonomialModel(ExponentMatrix matrix, PartitionPtr partition,
                             std::vector<std::string> atom_labels)
    : matrix_(std::move(matrix)), partition_(std::move(partition)),
      atom_labels_(std::move(atom_labels)) {
  if (!partition_) throw Error(ErrorCode::ShapeMismatch, "model needs a partition");
  if (matrix_.n_params() != partition_->n_params()) {
    throw Error(ErrorCode::ShapeMismatch,
                "exponent matrix has " + std::to_string(matrix_.n_params()) +
                    " columns but the partition covers " +
                    std::to_string(partition_->n_params()) + " parameters");
  }
  if (atom_labels_.empty()) {
    for (Index y = 0; y < matrix_.n_atoms(); ++y) atom_labels_.push_back("y" + std::to_string(y + 1));
  } else if (atom_labels_.size() != matrix_.n_atoms()) {
    throw Error(ErrorCode::ShapeMismatch, "atom label count does not match atom count");
  }
  for (Index y = 0; y < matrix_.n_atoms() && multilinear_; ++y) {
    for (const auto& t : matrix_.row(y)) {
      if (t.exponent != 1) {
        multilinear_ = false;
        break;
      }
    }
  }
}

AtomEvent::AtomEvent(std::vector<Index> atoms, std::size_t n_atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw Error(ErrorCode::EmptyEvent, "event has no atoms");
  std::sort(atoms_.begin(), atoms_.end());
  if (std::adjacent_find(atoms_.begin(), atoms_.end()) != atoms_.end()) {
    throw Error(ErrorCode::EmptyEvent, "event lists an atom more than once");
  }
  if (atoms_.back() >= n_atoms) {
    throw Error(ErrorCode::IndexOutOfRange, "event atom " + std::to_string(atoms_.back()) +
                                                " out of range (q = " +
                                                std::to_string(n_atoms) + ")");
  }
}

AtomEvent AtomEvent::all(std::size_t n_atoms) {
  std::vector<Index> atoms(n_atoms);
  std::iota(atoms.begin(), atoms.end(), Index{0});
  return AtomEvent(std::move(atoms), n_atoms);
}

bool AtomEvent::contains(Index atom) const {
  return std::binary_search(atoms_.begin(), atoms_.end(), atom);
}

// ---------------------------------------------------------------------------
// Evaluation

double detail::monomial(const ExponentMatrix& matrix, Index atom,
                        std::span<const double> values) {
  double p = 1.0;
  for (const auto& t : matrix.row(atom)) {
    const double v = values[t.param];
    p *= t.exponent == 1 ? v : std::pow(v, static_cast<double>(t.exponent));
  }
  return p;
}

namespace {

void require_compatible(const MonomialModel& model, const ParameterVector& theta) {
  if (theta.size() != model.n_params()) {
    throw Error(ErrorCode::ShapeMismatch,
                "parameter vector has " + std::to_string(theta.size()) +
                    " entries, model has " + std::to_string(model.n_params()));
  }
  theta.require_valid();
}

}  // namespace

double atomic_probability(const MonomialModel& model, const ParameterVector& theta, Index atom) {
  require_compatible(model, theta);
  return detail::monomial(model.matrix(), atom, theta.values());
}

double event_probability(const MonomialModel& model, const ParameterVector& theta,
                         const AtomEvent& event) {
  require_compatible(model, theta);
  if (event.atoms().back() >= model.n_atoms()) {
    throw Error(ErrorCode::IndexOutOfRange, "event refers to atoms outside the model");
  }
  double s = 0.0;
  for (Index y : event.atoms()) s += detail::monomial(model.matrix(), y, theta.values());
  return s;
}

std::vector<double> atomic_probabilities(const MonomialModel& model,
                                         const ParameterVector& theta) {
  require_compatible(model, theta);
  std::vector<double> out(model.n_atoms());
  for (Index y = 0; y < out.size(); ++y) out[y] = detail::monomial(model.matrix(), y, theta.values());
  return out;
}

bool check_multilinear(const MonomialModel& model) { return model.is_multilinear(); }

bool check_regular(const MonomialModel& model, Regularity mode,
                   std::span<const Index> block_family) {
  if (!model.is_multilinear()) {
    throw Error(ErrorCode::NonMultilinear, "regularity is defined for multilinear models only");
  }
  const auto& part = model.partition();
  std::vector<Index> family(part.n_blocks());
  if (block_family.empty()) {
    for (Index b = 0; b < family.size(); ++b) family[b] = b;
  } else {
    if (block_family.size() != part.n_blocks()) {
      throw Error(ErrorCode::ShapeMismatch, "block family list does not match the partition");
    }
    family.assign(block_family.begin(), block_family.end());
  }
  const Index n_families = *std::max_element(family.begin(), family.end()) + 1;
  std::vector<unsigned> hits(part.n_blocks());
  std::vector<unsigned> family_hits(n_families);
  std::vector<bool> family_used(n_families, false);
  for (Index f : family) family_used[f] = true;
  for (Index y = 0; y < model.n_atoms(); ++y) {
    std::fill(hits.begin(), hits.end(), 0U);
    std::fill(family_hits.begin(), family_hits.end(), 0U);
    for (const auto& t : model.matrix().row(y)) {
      const Index b = part.block_of(t.param);
      ++hits[b];
      ++family_hits[family[b]];
    }
    for (unsigned h : hits) {
      if (h > 1) return false;
    }
    if (mode == Regularity::Strict) {
      for (Index f = 0; f < n_families; ++f) {
        if (family_used[f] && family_hits[f] != 1) return false;
      }
    }
  }
  return true;
}

std::string_view violation_kind_name(Violation::Kind kind) noexcept {
  switch (kind) {
    case Violation::Kind::ShapeMismatch: return "shape_mismatch";
    case Violation::Kind::Positivity: return "positivity";
    case Violation::Kind::SumToOne: return "sum_to_one";
    case Violation::Kind::Normalization: return "normalization";
  }
  return "unknown";
}

ValidationReport validate(const MonomialModel& model, const ParameterVector& theta) {
  ValidationReport report;
  if (theta.size() != model.n_params()) {
    report.push_back({Violation::Kind::ShapeMismatch,
                      "parameter vector has " + std::to_string(theta.size()) +
                          " entries, model has " + std::to_string(model.n_params())});
    return report;
  }
  if (&theta.partition() != &model.partition() &&
      theta.partition().blocks() != model.partition().blocks()) {
    report.push_back({Violation::Kind::ShapeMismatch,
                      "parameter vector and model use different partitions"});
    return report;
  }

  const auto& v = theta.values();
  for (Index i = 0; i < v.size(); ++i) {
    if (!(v[i] > kPositivityMargin && v[i] < 1.0 - kPositivityMargin)) {
      report.push_back({Violation::Kind::Positivity,
                        "parameter " + theta.label(i) + " = " + fmt_double(v[i]) +
                            " is not strictly inside (0, 1)"});
    }
  }
  const auto& part = model.partition();
  for (Index b = 0; b < part.n_blocks(); ++b) {
    double s = 0.0;
    for (Index j : part.block(b)) s += v[j];
    if (!(std::abs(s - 1.0) <= kSimplexTolerance)) {
      report.push_back({Violation::Kind::SumToOne,
                        "block " + std::to_string(b + 1) + " sums to " + fmt_double(s)});
    }
  }
  double total = 0.0;
  for (Index y = 0; y < model.n_atoms(); ++y) total += detail::monomial(model.matrix(), y, v);
  if (!(std::abs(total - 1.0) <= kSimplexTolerance)) {
    report.push_back({Violation::Kind::Normalization,
                      "atomic probabilities sum to " + fmt_double(total)});
  }
  return report;
}

}  // namespace mmsa
