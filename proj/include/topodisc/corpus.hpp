#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "topodisc/descriptor.hpp"
#include "topodisc/features.hpp"
#include "topodisc/ingest.hpp"
#include "topodisc/relate.hpp"

namespace topodisc {

// Layout under the corpus root:
//   catalog.json
//   regions/<zip|neighborhood>.{poly,ids,adj}
//   datasets/<name>/{descriptor.txt,data.csv}
//   artifacts/<name>/manifest.json and <function>@<resolution>.{sf,jt,st,salient.fs,extreme.fs}
//   cache/<key>.jsonl, cache/<key>.report.json

inline constexpr std::uint32_t kArtifactVersion = 1;

struct FeatureSummary {
    std::uint64_t plus = 0;
    std::uint64_t minus = 0;
    std::uint64_t hash = 0;  // of the .fs file
};

struct FunctionEntry {
    std::string function;
    Resolution resolution;
    std::uint64_t n_regions = 0;
    std::uint64_t steps = 0;
    std::int64_t t0 = 0;
    std::uint64_t active = 0;
    std::uint64_t maxima = 0;
    std::uint64_t minima = 0;
    FeatureSummary salient;
    FeatureSummary extreme;

    std::string stem() const;  // "<function>@<resolution>"
};

struct Manifest {
    std::string dataset;
    std::uint32_t version = kArtifactVersion;
    std::uint64_t input_hash = 0;
    Resolution native;
    std::uint64_t rows = 0;
    std::uint64_t skipped = 0;
    std::vector<FunctionEntry> functions;
    std::vector<std::string> notes;  // resolutions or functions that were skipped, and why

    std::uint64_t content_hash() const;
};

struct DatasetBuildReport {
    enum class Status { built, up_to_date, failed };
    std::string dataset;
    Status status = Status::failed;
    std::string message;
    std::size_t functions = 0;
    double seconds = 0;
    std::vector<std::string> notes;
};

struct BuildReport {
    std::vector<DatasetBuildReport> datasets;
    double function_seconds = 0;
    double feature_seconds = 0;
    bool ok() const;
};

struct UserThreshold {
    std::string dataset;
    std::string function;
    std::optional<Resolution> resolution;  // all resolutions when absent
    std::optional<double> theta_plus;
    std::optional<double> theta_minus;
};

/// "dataset/function[@resolution]=pos,neg"; either bound may be empty.
UserThreshold parse_user_threshold(const std::string& text);

struct QueryClause {
    std::vector<std::string> d1;  // empty = whole corpus
    std::vector<std::string> d2;  // empty = whole corpus
    Clause filter;
    std::vector<FeatureMode> modes{FeatureMode::salient, FeatureMode::extreme};
    double alpha = 0.05;
    std::uint32_t shifts = 1000;
    std::uint64_t seed = 0;
    std::vector<UserThreshold> thresholds;
};

struct QueryStats {
    std::uint64_t evaluations = 0;
    std::uint64_t no_overlap = 0;
    std::uint64_t filtered = 0;
    std::uint64_t not_significant = 0;
    std::uint64_t significant = 0;
};

struct QueryOutput {
    std::vector<RelationshipResult> results;
    std::vector<std::string> skipped;
    QueryStats stats;
    bool from_cache = false;
    std::string cache_key;
};

struct QueryOptions {
    unsigned jobs = 0;
    bool use_cache = true;
};

struct BaselineResult {
    std::string method;
    std::string dataset1, function1, dataset2, function2;
    Resolution resolution;
    std::optional<double> value;
    std::uint64_t length = 0;
};

class Corpus {
public:
    /// Opens (creating the directory layout if needed) a corpus rooted at `root`.
    explicit Corpus(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::vector<std::string> datasets() const;
    bool contains(const std::string& name) const;
    DatasetDescriptor descriptor(const std::string& name) const;

    /// Validates and copies a dataset into the corpus, replacing one of the same name.
    std::string ingest(const std::filesystem::path& descriptor, const std::filesystem::path& csv,
                       ParseReport* report = nullptr);

    /// Materializes functions, trees and features; unchanged datasets are skipped.
    BuildReport build(const std::vector<std::string>& names = {}, unsigned jobs = 0);

    /// Hash of everything a dataset's artifacts derive from.
    std::uint64_t input_hash(const std::string& name) const;
    /// Throws not_built if the dataset has no current artifacts.
    Manifest manifest(const std::string& name) const;
    bool fresh(const std::string& name) const;

    std::filesystem::path artifact_path(const std::string& dataset, const FunctionEntry& fn,
                                        std::string_view suffix) const;
    FeatureSet load_feature_set(const std::string& dataset, const FunctionEntry& fn, FeatureMode mode) const;

    /// Regions of one spatial resolution (City is implicit).
    std::shared_ptr<const SpatialDomain> domain(SpatialRes res) const;
    SpatialLayer layer(SpatialRes res) const;

    QueryOutput query(const QueryClause& clause, const QueryOptions& options = {});

    /// City-resolution baseline scores for every function pair of two datasets
    /// at their finest common City resolution.
    std::vector<BaselineResult> baseline(const std::string& method, const std::string& d1, const std::string& d2,
                                         unsigned bins = 16) const;

private:
    void save_catalog(const std::vector<std::string>& names) const;
    std::filesystem::path dataset_dir(const std::string& name) const;
    std::filesystem::path artifact_dir(const std::string& name) const;

    std::filesystem::path root_;
    mutable std::map<SpatialRes, std::shared_ptr<const SpatialDomain>> domains_;
};

/// Restricts two feature sets on the same spatial domain and temporal
/// resolution to their common absolute time window; nullopt if disjoint.
std::optional<std::pair<FeatureSet, FeatureSet>> align_in_time(const FeatureSet& a, const FeatureSet& b);

std::string result_to_json(const RelationshipResult& r);
RelationshipResult result_from_json(const std::string& line);
std::string results_to_jsonl(const std::vector<RelationshipResult>& results);
std::string results_to_csv(const std::vector<RelationshipResult>& results);
std::string baseline_to_json(const BaselineResult& r);

std::string hex64(std::uint64_t v);

}  // namespace topodisc
