#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailray/errors.hpp"

namespace tailray {

/// Named real-valued columns of equal length; two or three of them.
class RawSample {
 public:
  RawSample(std::vector<std::string> names, std::vector<std::vector<double>> columns)
      : names_(std::move(names)), columns_(std::move(columns)) {
    if (columns_.size() < 2 || columns_.size() > 3)
      throw DomainError("RawSample: dimension must be 2 or 3, got " + std::to_string(columns_.size()));
    if (names_.size() != columns_.size())
      throw DomainError("RawSample: column name count does not match column count");
    const std::size_t n = columns_.front().size();
    if (n == 0) throw DomainError("RawSample: at least one observation required");
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (columns_[j].size() != n) throw DomainError("RawSample: columns have unequal lengths");
      for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(columns_[j][i]))
          throw DomainError("RawSample: non-finite value at row " + std::to_string(i) + ", column " +
                            names_[j]);
    }
  }

  std::size_t dim() const noexcept { return columns_.size(); }
  std::size_t size() const noexcept { return columns_.front().size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::span<const double> column(std::size_t j) const { return columns_.at(j); }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

enum class Provenance { exact_transform, rank_transform, simulated };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::exact_transform: return "exact-transform";
    case Provenance::rank_transform: return "rank-transform";
    case Provenance::simulated: return "simulated";
  }
  return "unknown";
}

/// Observations on standard exponential margins, stored column-wise.
class ExponentialSample {
 public:
  ExponentialSample() = default;

  ExponentialSample(std::vector<std::vector<double>> columns, Provenance provenance)
      : columns_(std::move(columns)), provenance_(provenance) {
    if (columns_.size() < 2 || columns_.size() > 3)
      throw DomainError("ExponentialSample: dimension must be 2 or 3");
    const std::size_t n = columns_.front().size();
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (columns_[j].size() != n) throw DomainError("ExponentialSample: columns have unequal lengths");
      for (std::size_t i = 0; i < n; ++i) {
        const double v = columns_[j][i];
        if (!(v >= 0.0) || !std::isfinite(v))
          throw DomainError("ExponentialSample: coordinate must be finite and >= 0 (row " +
                            std::to_string(i) + ", column " + std::to_string(j) + ")");
      }
    }
  }

  std::size_t dim() const noexcept { return columns_.size(); }
  std::size_t size() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
  Provenance provenance() const noexcept { return provenance_; }

  std::span<const double> column(std::size_t j) const { return columns_.at(j); }
  std::span<const double> x() const { return column(0); }
  std::span<const double> y() const { return column(1); }

  friend bool operator==(const ExponentialSample&, const ExponentialSample&) = default;

 private:
  std::vector<std::vector<double>> columns_;
  Provenance provenance_ = Provenance::simulated;
};

/// Componentwise log of Pareto-margin points given as columns.
inline ExponentialSample pareto_to_exponential(const std::vector<std::vector<double>>& pareto_columns) {
  std::vector<std::vector<double>> out(pareto_columns.size());
  for (std::size_t j = 0; j < pareto_columns.size(); ++j) {
    out[j].reserve(pareto_columns[j].size());
    for (std::size_t i = 0; i < pareto_columns[j].size(); ++i) {
      const double v = pareto_columns[j][i];
      if (!(v >= 1.0))
        throw DomainError("pareto_to_exponential: coordinate < 1 at row " + std::to_string(i) +
                          ", column " + std::to_string(j));
      out[j].push_back(std::log(v));
    }
  }
  return {std::move(out), Provenance::exact_transform};
}

inline std::vector<std::vector<double>> exponential_to_pareto(const ExponentialSample& sample) {
  std::vector<std::vector<double>> out(sample.dim());
  for (std::size_t j = 0; j < sample.dim(); ++j) {
    const auto col = sample.column(j);
    out[j].reserve(col.size());
    for (double v : col) out[j].push_back(std::exp(v));
  }
  return out;
}

/// Rank-i largest value of a margin becomes -log(i / (n + 1)). Ties are
/// ranked by ascending input index (earlier rows count as larger).
inline std::vector<double> rank_to_exponential(std::span<const double> values) {
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i)
    if (std::isnan(values[i])) throw DomainError("rank_transform: NaN at row " + std::to_string(i));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> out(n);
  const double denom = static_cast<double>(n + 1);
  for (std::size_t rank = 0; rank < n; ++rank)
    out[order[rank]] = -std::log(static_cast<double>(rank + 1) / denom);
  return out;
}

inline ExponentialSample rank_transform(const RawSample& raw) {
  std::vector<std::vector<double>> cols;
  cols.reserve(raw.dim());
  for (std::size_t j = 0; j < raw.dim(); ++j) cols.push_back(rank_to_exponential(raw.column(j)));
  return {std::move(cols), Provenance::rank_transform};
}

/// Re-ranks an existing exponential sample margin by margin.
inline ExponentialSample rank_transform(const ExponentialSample& sample) {
  std::vector<std::vector<double>> cols;
  cols.reserve(sample.dim());
  for (std::size_t j = 0; j < sample.dim(); ++j) cols.push_back(rank_to_exponential(sample.column(j)));
  return {std::move(cols), Provenance::rank_transform};
}

using MarginalCdf = std::function<double(double)>;

/// Probability integral transform to exponential margins: -log(1 - F(x)).
inline ExponentialSample cdf_transform(const RawSample& raw, std::span<const MarginalCdf> cdfs) {
  if (cdfs.size() != raw.dim()) throw DomainError("cdf_transform: need one CDF per column");
  std::vector<std::vector<double>> cols(raw.dim());
  for (std::size_t j = 0; j < raw.dim(); ++j) {
    const auto col = raw.column(j);
    cols[j].reserve(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) {
      const double f = cdfs[j](col[i]);
      if (!(f > 0.0 && f < 1.0))
        throw DomainError("cdf_transform: F(x) outside (0,1) at row " + std::to_string(i) + ", column " +
                          raw.names()[j]);
      cols[j].push_back(-std::log1p(-f));
    }
  }
  return {std::move(cols), Provenance::exact_transform};
}

}  // namespace tailray
