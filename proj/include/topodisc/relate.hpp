#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topodisc/features.hpp"
#include "topodisc/rng.hpp"
#include "topodisc/spatial.hpp"

namespace topodisc {

struct Relatedness {
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
    std::uint64_t n_sigma = 0;  // |Sigma|, points that are features of both functions
    std::uint64_t size1 = 0;    // |Sigma_1|
    std::uint64_t size2 = 0;    // |Sigma_2|
};

/// Throws resolution_mismatch unless both sets live on the same domain.
Relatedness relatedness(const FeatureSet& fs1, const FeatureSet& fs2);

/// (n_pos - n_neg) / |Sigma|; nullopt when Sigma is empty.
std::optional<double> score(const Relatedness& r);

/// Harmonic mean of precision |Sigma| / |Sigma_1| and recall |Sigma| / |Sigma_2|;
/// nullopt when both feature sets are empty.
std::optional<double> strength(const Relatedness& r);

/// Region permutation m with m(x) the image of region x.
struct ToroidalMap {
    std::vector<std::uint32_t> image;
};

/// Breadth-first propagation from a random start pair: each unassigned
/// neighbor of u takes a random unassigned neighbor of m(u), or a random
/// unassigned region if none is left.
ToroidalMap toroidal_map(const SpatialDomain& space, CounterRng& rng);
/// Same, from a fixed start pair m(start) = target.
ToroidalMap toroidal_map(const SpatialDomain& space, std::uint32_t start, std::uint32_t target, CounterRng& rng);

/// Fraction of adjacencies (x, y) with m(x), m(y) adjacent; 1 without adjacency.
double adjacency_preservation(const SpatialDomain& space, const ToroidalMap& map);

/// Moves every feature at (x, z) to (m(x), z).
FeatureSet apply_map(const FeatureSet& fs, const ToroidalMap& map);
/// Moves every feature at (x, z) to (x, (z + k) mod m).
FeatureSet temporal_shift(const FeatureSet& fs, std::uint64_t k);

struct SignificanceConfig {
    std::uint32_t shifts = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
};

struct Significance {
    double tau_star = 0;
    double p_value = 1;
    std::uint32_t exceedances = 0;  // shifts with |tau_k| >= |tau*|
    bool significant = false;
};

/// Two-sided Monte Carlo test with fs1 fixed: toroidal maps of fs2 when the
/// domain has more than one region, circular time shifts otherwise.
/// Requires a defined tau*.
Significance significance(const FeatureSet& fs1, const FeatureSet& fs2, const SpatialDomain& space,
                          const SignificanceConfig& cfg);

struct Clause {
    double min_score = 0.0;     // on |tau|
    double min_strength = 0.0;  // on rho
};

struct RelationshipResult {
    std::string dataset1, function1, dataset2, function2;
    Resolution resolution;
    FeatureMode mode = FeatureMode::salient;
    double tau = 0;
    double rho = 0;
    double p_value = 1;
    bool significant = false;
    std::uint64_t n_sigma = 0, n_pos = 0, n_neg = 0;
    std::uint64_t seed = 0;  // evaluate_pair: the evaluation seed; corpus queries: the query seed
    std::uint32_t shifts = 0;

    friend bool operator==(const RelationshipResult&, const RelationshipResult&) = default;
};

enum class EvalOutcome : std::uint8_t { no_overlap, filtered, not_significant, significant };

struct Evaluation {
    EvalOutcome outcome = EvalOutcome::no_overlap;
    RelationshipResult result;  // filled unless no_overlap
};

/// tau and rho, the clause filters, then (only if they pass) the significance test.
Evaluation evaluate_pair(const FeatureSet& fs1, const FeatureSet& fs2, const SpatialDomain& space,
                         const Clause& clause, const SignificanceConfig& cfg);

/// Per-evaluation seed derived from the global seed and the evaluation's identity.
std::uint64_t evaluation_seed(std::uint64_t global_seed, const std::string& pair_id, Resolution res, FeatureMode mode);

/// |tau| desc, rho desc, then names and resolution.
void sort_results(std::vector<RelationshipResult>& results);

}  // namespace topodisc
