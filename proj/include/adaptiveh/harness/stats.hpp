#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adaptiveh::harness {

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> v);
double median(std::span<const double> v);

/// Ranks starting at 1, ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> v);

/// Spearman rank correlation with tie correction (Pearson on average ranks).
/// Returns 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// One-sided sign test: P(X >= positives) for X ~ Binomial(positives +
/// negatives, 1/2). Ties are excluded by the caller.
double sign_test_p(std::size_t positives, std::size_t negatives);

}  // namespace adaptiveh::harness
