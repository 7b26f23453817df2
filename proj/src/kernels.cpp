#include "prophet/kernels.hpp"

#include <cmath>

#include "prophet/error.hpp"

namespace prophet::kernels {

TokenId argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t v = 1; v < row.size(); ++v) {
    if (row[v] > row[best]) best = v;
  }
  return static_cast<TokenId>(best);
}

double top2_gap_row(std::span<const double> row) {
  if (row.size() < 2) throw Error(ErrorKind::DegenerateVocabulary, "need at least two logits");
  double first = row[0] >= row[1] ? row[0] : row[1];
  double second = row[0] >= row[1] ? row[1] : row[0];
  for (std::size_t v = 2; v < row.size(); ++v) {
    const double x = row[v];
    if (x > first) {
      second = first;
      first = x;
    } else if (x > second) {
      second = x;
    }
  }
  return first - second;
}

double top_prob_row(std::span<const double> row) {
  const double top = row[static_cast<std::size_t>(argmax_row(row))];
  double denom = 0.0;
  for (double x : row) denom += std::exp(x - top);
  return 1.0 / denom;
}

namespace serial {

std::vector<TokenId> argmax_rows(const LogitMatrix& m) {
  std::vector<TokenId> out(m.n_positions());
  for (std::size_t i = 0; i < m.n_positions(); ++i) out[i] = argmax_row(m.row(i));
  return out;
}

std::vector<double> gap_rows(const LogitMatrix& m) {
  std::vector<double> out(m.n_positions());
  for (std::size_t i = 0; i < m.n_positions(); ++i) out[i] = top2_gap_row(m.row(i));
  return out;
}

std::vector<double> top_prob_rows(const LogitMatrix& m) {
  std::vector<double> out(m.n_positions());
  for (std::size_t i = 0; i < m.n_positions(); ++i) out[i] = top_prob_row(m.row(i));
  return out;
}

}  // namespace serial

namespace omp {

std::vector<TokenId> argmax_rows(const LogitMatrix& m) {
  const auto n = static_cast<long long>(m.n_positions());
  std::vector<TokenId> out(m.n_positions());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = argmax_row(m.row(static_cast<std::size_t>(i)));
  }
  return out;
}

std::vector<double> gap_rows(const LogitMatrix& m) {
  if (m.vocab_size() < 2) throw Error(ErrorKind::DegenerateVocabulary, "need at least two logits");
  const auto n = static_cast<long long>(m.n_positions());
  std::vector<double> out(m.n_positions());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = top2_gap_row(m.row(static_cast<std::size_t>(i)));
  }
  return out;
}

std::vector<double> top_prob_rows(const LogitMatrix& m) {
  const auto n = static_cast<long long>(m.n_positions());
  std::vector<double> out(m.n_positions());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = top_prob_row(m.row(static_cast<std::size_t>(i)));
  }
  return out;
}

}  // namespace omp

namespace {
bool large(const LogitMatrix& m) { return m.n_positions() * m.vocab_size() >= kParallelCells; }
}  // namespace

std::vector<TokenId> argmax_rows(const LogitMatrix& m) {
  return large(m) ? omp::argmax_rows(m) : serial::argmax_rows(m);
}

std::vector<double> gap_rows(const LogitMatrix& m) {
  return large(m) ? omp::gap_rows(m) : serial::gap_rows(m);
}

std::vector<double> top_prob_rows(const LogitMatrix& m) {
  return large(m) ? omp::top_prob_rows(m) : serial::top_prob_rows(m);
}

}  // namespace prophet::kernels
