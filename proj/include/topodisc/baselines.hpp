#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace topodisc {

/// Drops positions where either series is NaN. Lengths must match.
std::pair<std::vector<double>, std::vector<double>> paired_values(std::span<const double> x, std::span<const double> y);

/// Pearson correlation; nullopt for fewer than two points or zero variance.
std::optional<double> pcc(std::span<const double> x, std::span<const double> y);

/// I(X;Y) / sqrt(H(X) H(Y)) over equal-width histograms, log base 2;
/// nullopt when either entropy is zero.
std::optional<double> nmi(std::span<const double> x, std::span<const double> y, unsigned bins = 16);

/// Classic full-window DTW with |a - b| local cost.
double dtw(std::span<const double> x, std::span<const double> y);

/// 1 - DTW(X, Y) / (DTW(X, 0) + DTW(0, Y)) on z-normalized series; each zero
/// series has the length of its partner. nullopt for zero variance.
std::optional<double> ndtw(std::span<const double> x, std::span<const double> y);

}  // namespace topodisc
