#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topodisc/bitset.hpp"
#include "topodisc/merge_tree.hpp"
#include "topodisc/scalar_function.hpp"
#include "topodisc/stgraph.hpp"

namespace topodisc {

enum class FeatureMode : std::uint8_t { salient, extreme, user };

std::string_view to_string(FeatureMode m);
FeatureMode parse_mode(std::string_view s);

/// Half-open range of time steps [z0, z1).
struct StepInterval {
    std::uint64_t z0 = 0;
    std::uint64_t z1 = 0;

    bool contains(std::uint64_t z) const { return z >= z0 && z < z1; }
    friend bool operator==(const StepInterval&, const StepInterval&) = default;
};

/// Calendar months for hourly data, calendar quarters for daily data, the
/// whole range otherwise.
std::vector<StepInterval> seasonal_intervals(const TemporalDomain& time);

/// Exact 1-D two-means: index of the first element of the high cluster in an
/// ascending list. Splits fall only between distinct values; returns 0 (all
/// high) for fewer than two values or a constant list.
std::size_t two_means_split(std::span<const double> sorted);

/// Quantile by linear interpolation at h = (n - 1) p over an ascending list.
double quantile_linear(std::span<const double> sorted, double p);

struct Extremum {
    Vertex vertex;
    double value;
    double persistence;
};

/// Extrema of a tree (its pair creators) whose time step lies in `window`.
std::vector<Extremum> extrema_in(const MergeTree& tree, std::span<const double> values, std::uint64_t n_regions,
                                 StepInterval window);

/// Extrema in the high-persistence cluster.
std::vector<Extremum> salient_extrema(std::vector<Extremum> extrema);

struct Thresholds {
    StepInterval interval;
    std::optional<double> theta_plus;
    std::optional<double> theta_minus;
};

/// theta+ = lowest value among salient maxima, theta- = highest value among
/// salient minima; absent when the interval holds no extrema of that kind.
Thresholds salient_thresholds(const MergeTree& join, const MergeTree& split, std::span<const double> values,
                              std::uint64_t n_regions, StepInterval interval);

enum class Polarity : std::uint8_t { maxima, minima };

/// Box-plot fence Q3 + 1.5 IQR (maxima) or Q1 - 1.5 IQR (minima); absent for
/// fewer than four values.
std::optional<double> extreme_threshold(std::vector<double> values, Polarity side);

/// {v in window : f(v) >= theta}, by descending traversal from the join
/// tree's maxima. With a restricted window the window's boundary steps are
/// seeded too, since a component can peak where the window cuts it.
Bitset query_superlevel(const STGraph& g, const MergeTree& join, std::span<const double> values, double theta,
                        std::optional<StepInterval> window = std::nullopt);
/// {v in window : f(v) <= theta}, mirrored on the split tree.
Bitset query_sublevel(const STGraph& g, const MergeTree& split, std::span<const double> values, double theta,
                      std::optional<StepInterval> window = std::nullopt);

/// plus and minus are disjoint: a point that passes both thresholds (possible
/// when theta- >= theta+) is in neither.
struct FeatureSet {
    std::string dataset;
    std::string function;
    Resolution resolution;
    FeatureMode mode = FeatureMode::salient;
    std::uint64_t n_regions = 1;
    std::uint64_t steps = 1;
    TemporalDomain time;
    std::vector<Thresholds> thresholds;
    Bitset plus;
    Bitset minus;

    std::uint64_t vertex_count() const { return n_regions * steps; }
};

/// Per seasonal interval, the interval's salient thresholds applied to its slice.
FeatureSet salient_features(const STGraph& g, const ScalarFunction& f, const MergeTree& join, const MergeTree& split);
/// Values strictly beyond the box-plot fences of the salient extrema.
FeatureSet extreme_features(const STGraph& g, const ScalarFunction& f, const MergeTree& join, const MergeTree& split);
/// Fixed thresholds: f >= theta_plus and f <= theta_minus.
FeatureSet user_features(const STGraph& g, const ScalarFunction& f, const MergeTree& join, const MergeTree& split,
                         std::optional<double> theta_plus, std::optional<double> theta_minus);

void save_features(const FeatureSet& fs, const std::filesystem::path& path);
FeatureSet load_features(const std::filesystem::path& path);

}  // namespace topodisc
