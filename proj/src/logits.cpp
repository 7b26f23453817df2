#include "prophet/logits.hpp"

#include <cmath>
#include <string>

#include "prophet/error.hpp"

namespace prophet {

LogitMatrix::LogitMatrix(std::size_t n_positions, std::size_t vocab_size, TokenId mask_id, double fill)
    : n_positions_(n_positions),
      vocab_size_(vocab_size),
      mask_id_(mask_id),
      values_(n_positions * vocab_size, fill) {
  if (mask_id < 0 || static_cast<std::size_t>(mask_id) >= vocab_size) {
    throw Error(ErrorKind::InvalidInput, "mask_id outside logit columns");
  }
  apply_mask_sentinel();
}

void LogitMatrix::set(std::size_t i, TokenId v, double value) {
  if (v == mask_id_) return;
  values_[i * vocab_size_ + static_cast<std::size_t>(v)] = value;
}

void LogitMatrix::apply_mask_sentinel() {
  const auto col = static_cast<std::size_t>(mask_id_);
  for (std::size_t i = 0; i < n_positions_; ++i) values_[i * vocab_size_ + col] = kMaskLogit;
}

void LogitMatrix::check_invariants() const {
  const auto col = static_cast<std::size_t>(mask_id_);
  for (std::size_t i = 0; i < n_positions_; ++i) {
    for (std::size_t v = 0; v < vocab_size_; ++v) {
      const double x = values_[i * vocab_size_ + v];
      if (v == col) {
        if (x != kMaskLogit) throw Error(ErrorKind::InvalidInput, "mask column is not the sentinel");
      } else if (!std::isfinite(x)) {
        throw Error(ErrorKind::InvalidInput,
                    "non-finite logit at (" + std::to_string(i) + ", " + std::to_string(v) + ")");
      }
    }
  }
}

}  // namespace prophet
