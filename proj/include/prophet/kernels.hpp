#pragma once

// Row-wise reductions over a LogitMatrix.
//
// `serial::` is the reference implementation and is what the tests compare
// against. `omp::` parallelizes over rows with OpenMP; each row is reduced
// by the same scalar routine, so both produce bit-identical results. The
// unqualified entry points pick one by problem size.

#include <cstddef>
#include <span>
#include <vector>

#include "prophet/core.hpp"
#include "prophet/logits.hpp"

namespace prophet::kernels {

// Rows with fewer cells than this stay serial.
inline constexpr std::size_t kParallelCells = 1u << 15;

// Lowest id among the maxima.
TokenId argmax_row(std::span<const double> row);
// Largest minus second-largest entry. Requires row.size() >= 2.
double top2_gap_row(std::span<const double> row);
// Softmax probability of the argmax entry.
double top_prob_row(std::span<const double> row);

namespace serial {
std::vector<TokenId> argmax_rows(const LogitMatrix& m);
std::vector<double> gap_rows(const LogitMatrix& m);
std::vector<double> top_prob_rows(const LogitMatrix& m);
}  // namespace serial

namespace omp {
std::vector<TokenId> argmax_rows(const LogitMatrix& m);
std::vector<double> gap_rows(const LogitMatrix& m);
std::vector<double> top_prob_rows(const LogitMatrix& m);
}  // namespace omp

std::vector<TokenId> argmax_rows(const LogitMatrix& m);
std::vector<double> gap_rows(const LogitMatrix& m);
std::vector<double> top_prob_rows(const LogitMatrix& m);

}  // namespace prophet::kernels
