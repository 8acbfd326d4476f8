// topodisc: command-line front end for the corpus.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "topodisc/corpus.hpp"
#include "topodisc/error.hpp"

using namespace topodisc;

namespace {

void print_error(std::string_view code, std::string_view message) {
    std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << "\n";
}

std::vector<std::string> split_names(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        std::string name;
        while (std::getline(ss, name, ','))
            if (!name.empty()) out.push_back(name);
    }
    return out;
}

std::string range_text(const std::vector<Thresholds>& ts, bool plus) {
    std::optional<double> lo, hi;
    std::size_t defined = 0;
    for (const auto& t : ts) {
        const auto& v = plus ? t.theta_plus : t.theta_minus;
        if (!v) continue;
        ++defined;
        lo = lo ? std::min(*lo, *v) : *v;
        hi = hi ? std::max(*hi, *v) : *v;
    }
    if (!defined) return "-";
    std::ostringstream s;
    s << *lo;
    if (*hi != *lo) s << ".." << *hi;
    if (ts.size() > 1) s << " (" << defined << "/" << ts.size() << " intervals)";
    return s.str();
}

int run_inspect(Corpus& corpus, const std::string& name) {
    const DatasetDescriptor desc = corpus.descriptor(name);
    std::cout << "dataset " << desc.name << "  native " << to_string(desc.native) << "\n";
    if (!corpus.fresh(name)) {
        std::cout << "  not built (or stale); run `topodisc build " << name << "`\n";
        return 0;
    }
    const Manifest m = corpus.manifest(name);
    std::cout << "  records " << m.rows << ", skipped " << m.skipped << ", functions " << m.functions.size() << "\n";
    for (const auto& note : m.notes) std::cout << "  note: " << note << "\n";
    for (const auto& e : m.functions) {
        std::cout << "  " << e.stem() << "  " << e.n_regions << "x" << e.steps << "  active " << e.active << "  maxima "
                  << e.maxima << "  minima " << e.minima << "\n";
        for (FeatureMode mode : {FeatureMode::salient, FeatureMode::extreme}) {
            const FeatureSet fs = corpus.load_feature_set(name, e, mode);
            std::cout << "    " << to_string(mode) << ": theta+ " << range_text(fs.thresholds, true) << ", theta- "
                      << range_text(fs.thresholds, false) << ", |S+| " << fs.plus.count() << ", |S-| "
                      << fs.minus.count() << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topology-based relationship discovery over spatio-temporal datasets"};
    app.require_subcommand(1);
    std::string root = "corpus";
    app.add_option("--corpus", root, "Corpus directory")->capture_default_str();

    auto* ingest = app.add_subcommand("ingest", "Add a dataset (descriptor + CSV) to the corpus");
    std::string descriptor_path, csv_path;
    ingest->add_option("descriptor", descriptor_path, "Dataset descriptor file")->required()->check(CLI::ExistingFile);
    ingest->add_option("csv", csv_path, "Record CSV")->required()->check(CLI::ExistingFile);

    auto* build = app.add_subcommand("build", "Compute functions, merge trees and features");
    std::vector<std::string> build_names;
    unsigned jobs = 0;
    build->add_option("datasets", build_names, "Datasets to build (default: all)");
    build->add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)");

    auto* query = app.add_subcommand(
        "query", "Find significant relationships; results sorted by |tau| desc, then rho desc");
    std::vector<std::string> d1, d2, thresholds;
    QueryClause clause;
    std::string mode = "both", format = "json";
    bool no_cache = false, stats = false;
    query->add_option("--d1", d1, "Datasets on one side (comma separated; default: all)");
    query->add_option("--d2", d2, "Datasets on the other side (default: all)");
    query->add_option("--min-score", clause.filter.min_score, "Minimum |tau|")->check(CLI::Range(0.0, 1.0));
    query->add_option("--min-strength", clause.filter.min_strength, "Minimum rho")->check(CLI::Range(0.0, 1.0));
    query->add_option("--mode", mode, "salient, extreme or both")
        ->check(CLI::IsMember({"salient", "extreme", "both"}))
        ->capture_default_str();
    query->add_option("--alpha", clause.alpha, "Significance level")->capture_default_str();
    query->add_option("--shifts", clause.shifts, "Monte Carlo randomizations")->capture_default_str();
    query->add_option("--seed", clause.seed, "Random seed")->capture_default_str();
    query->add_option("--threshold", thresholds, "Fixed thresholds: dataset/function[@resolution]=pos,neg");
    query->add_option("--format", format, "json (lines) or csv")->check(CLI::IsMember({"json", "csv"}));
    query->add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)");
    query->add_flag("--no-cache", no_cache, "Neither read nor write the result cache");
    query->add_flag("--stats", stats, "Print evaluation counts to stderr");

    auto* baseline = app.add_subcommand("baseline", "Global correlation baselines on city-resolution functions");
    std::string method, bd1, bd2;
    unsigned bins = 16;
    baseline->add_option("--method", method, "pcc, mi or dtw")->required()->check(CLI::IsMember({"pcc", "mi", "dtw"}));
    baseline->add_option("--d1", bd1, "First dataset")->required();
    baseline->add_option("--d2", bd2, "Second dataset")->required();
    baseline->add_option("--bins", bins, "Histogram bins for mi")->capture_default_str();

    auto* inspect = app.add_subcommand("inspect", "Show a dataset's functions, thresholds and feature counts");
    std::string inspect_name;
    inspect->add_option("dataset", inspect_name, "Dataset name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 2;
    }

    try {
        Corpus corpus(root);
        if (*ingest) {
            ParseReport report;
            const std::string name = corpus.ingest(descriptor_path, csv_path, &report);
            std::cout << "ingested " << name << ": " << report.rows << " rows, "
                      << report.skipped_spatial + report.skipped_temporal << " skipped\n";
            for (const auto& m : report.messages) std::cout << "  " << m << "\n";
            return 0;
        }
        if (*build) {
            const BuildReport report = corpus.build(split_names(build_names), jobs);
            const DatasetBuildReport* failure = nullptr;
            for (const auto& d : report.datasets) {
                const char* status = d.status == DatasetBuildReport::Status::built        ? "built"
                                     : d.status == DatasetBuildReport::Status::up_to_date ? "up to date"
                                                                                          : "FAILED";
                std::printf("%s: %s, %zu functions, %.2f s\n", d.dataset.c_str(), status, d.functions, d.seconds);
                for (const auto& n : d.notes) std::printf("  note: %s\n", n.c_str());
                if (d.status == DatasetBuildReport::Status::failed) {
                    std::printf("  error: %s\n", d.message.c_str());
                    if (!failure) failure = &d;
                }
            }
            std::printf("stages: functions %.2f s, features %.2f s\n", report.function_seconds, report.feature_seconds);
            if (failure) {
                print_error("build_failed", failure->dataset + ": " + failure->message);
                return 1;
            }
            return 0;
        }
        if (*query) {
            clause.d1 = split_names(d1);
            clause.d2 = split_names(d2);
            if (mode == "salient") clause.modes = {FeatureMode::salient};
            else if (mode == "extreme") clause.modes = {FeatureMode::extreme};
            for (const auto& t : thresholds) clause.thresholds.push_back(parse_user_threshold(t));
            const QueryOutput out = corpus.query(clause, {jobs, !no_cache});
            std::cout << (format == "csv" ? results_to_csv(out.results) : results_to_jsonl(out.results));
            if (stats) {
                const auto& s = out.stats;
                std::cerr << nlohmann::json{{"evaluations", s.evaluations}, {"no_overlap", s.no_overlap},
                                            {"filtered", s.filtered}, {"not_significant", s.not_significant},
                                            {"significant", s.significant}, {"cached", out.from_cache},
                                            {"skipped", out.skipped}}
                                 .dump()
                          << "\n";
            }
            return 0;
        }
        if (*baseline) {
            for (const auto& r : corpus.baseline(method, bd1, bd2, bins)) std::cout << baseline_to_json(r) << "\n";
            return 0;
        }
        if (*inspect) return run_inspect(corpus, inspect_name);
    } catch (const Error& e) {
        print_error(error_code_name(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
    return 0;
}
