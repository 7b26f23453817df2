#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "prophet/core.hpp"

namespace prophet {

// Value written into the mask column of every row. It is finite, so row
// reductions need no special case, and it can never win an argmax against
// a finite logit.
inline constexpr double kMaskLogit = std::numeric_limits<double>::lowest();

// Row-major N x |V| scores for one denoiser call.
class LogitMatrix {
 public:
  LogitMatrix() = default;
  LogitMatrix(std::size_t n_positions, std::size_t vocab_size, TokenId mask_id, double fill = 0.0);

  std::size_t n_positions() const noexcept { return n_positions_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  TokenId mask_id() const noexcept { return mask_id_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * vocab_size_, vocab_size_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * vocab_size_, vocab_size_}; }

  double at(std::size_t i, TokenId v) const { return values_[i * vocab_size_ + static_cast<std::size_t>(v)]; }
  // Writes to the mask column are ignored.
  void set(std::size_t i, TokenId v, double value);

  const std::vector<double>& values() const noexcept { return values_; }

  // Restores the sentinel in the mask column of every row.
  void apply_mask_sentinel();
  // Throws InvalidInput when a non-mask entry is not finite or the sentinel is missing.
  void check_invariants() const;

  friend bool operator==(const LogitMatrix&, const LogitMatrix&) = default;

 private:
  std::size_t n_positions_ = 0;
  std::size_t vocab_size_ = 0;
  TokenId mask_id_ = 0;
  std::vector<double> values_;
};

}  // namespace prophet
