#include "topodisc/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "topodisc/baselines.hpp"
#include "topodisc/binary_io.hpp"
#include "topodisc/csv.hpp"
#include "topodisc/error.hpp"
#include "topodisc/merge_tree.hpp"
#include "topodisc/parallel.hpp"
#include "topodisc/stgraph.hpp"

namespace topodisc {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::uint64_t parse_hex(const std::string& s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (ec != std::errc{} || p != s.data() + s.size()) throw Error(ErrorCode::malformed, "bad hash: " + s);
    return v;
}

std::string shortest(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

const char* kRegionSuffixes[] = {".poly", ".ids", ".adj"};

std::vector<RegionId> load_region_ids(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<RegionId> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        RegionId id;
        while (ls >> id) ids.push_back(id);
        if (!ls.eof()) throw Error(ErrorCode::malformed, "bad region id in " + path.string());
    }
    return ids;
}

json entry_to_json(const FunctionEntry& e) {
    auto summary = [](const FeatureSummary& s) { return json{{"plus", s.plus}, {"minus", s.minus}, {"hash", hex64(s.hash)}}; };
    return json{{"function", e.function}, {"resolution", to_string(e.resolution)},
                {"n_regions", e.n_regions}, {"steps", e.steps}, {"t0", e.t0}, {"active", e.active},
                {"maxima", e.maxima}, {"minima", e.minima},
                {"salient", summary(e.salient)}, {"extreme", summary(e.extreme)}};
}

FunctionEntry entry_from_json(const json& j) {
    auto summary = [](const json& s) {
        return FeatureSummary{s.at("plus").get<std::uint64_t>(), s.at("minus").get<std::uint64_t>(),
                              parse_hex(s.at("hash").get<std::string>())};
    };
    FunctionEntry e;
    e.function = j.at("function").get<std::string>();
    e.resolution = parse_resolution(j.at("resolution").get<std::string>());
    e.n_regions = j.at("n_regions").get<std::uint64_t>();
    e.steps = j.at("steps").get<std::uint64_t>();
    e.t0 = j.at("t0").get<std::int64_t>();
    e.active = j.at("active").get<std::uint64_t>();
    e.maxima = j.at("maxima").get<std::uint64_t>();
    e.minima = j.at("minima").get<std::uint64_t>();
    e.salient = summary(j.at("salient"));
    e.extreme = summary(j.at("extreme"));
    return e;
}

json manifest_to_json(const Manifest& m) {
    json fns = json::array();
    for (const auto& e : m.functions) fns.push_back(entry_to_json(e));
    return json{{"dataset", m.dataset}, {"version", m.version}, {"input_hash", hex64(m.input_hash)},
                {"native", to_string(m.native)}, {"rows", m.rows}, {"skipped", m.skipped},
                {"functions", fns}, {"notes", m.notes}};
}

Manifest manifest_from_json(const json& j) {
    Manifest m;
    m.dataset = j.at("dataset").get<std::string>();
    m.version = j.at("version").get<std::uint32_t>();
    m.input_hash = parse_hex(j.at("input_hash").get<std::string>());
    m.native = parse_resolution(j.at("native").get<std::string>());
    m.rows = j.at("rows").get<std::uint64_t>();
    m.skipped = j.at("skipped").get<std::uint64_t>();
    for (const auto& e : j.at("functions")) m.functions.push_back(entry_from_json(e));
    m.notes = j.at("notes").get<std::vector<std::string>>();
    return m;
}

std::string_view mode_suffix(FeatureMode mode) {
    return mode == FeatureMode::extreme ? ".extreme.fs" : ".salient.fs";
}

FeatureSet slice_steps(const FeatureSet& f, std::uint64_t z0, std::uint64_t len) {
    if (z0 == 0 && len == f.steps) return f;
    FeatureSet out = f;
    out.steps = len;
    out.time.steps = len;
    out.time.t0 = f.time.step_start(z0);
    const std::uint64_t n = f.n_regions, begin = z0 * n, end = (z0 + len) * n;
    auto cut = [&](const Bitset& src) {
        Bitset b(len * n);
        src.for_each([&](std::size_t v) {
            if (v >= begin && v < end) b.set(v - begin);
        });
        return b;
    };
    out.plus = cut(f.plus);
    out.minus = cut(f.minus);
    std::vector<Thresholds> kept;
    for (auto t : f.thresholds) {
        const auto a = std::max(t.interval.z0, z0), b = std::min(t.interval.z1, z0 + len);
        if (a >= b) continue;
        t.interval = {a - z0, b - z0};
        kept.push_back(t);
    }
    out.thresholds = std::move(kept);
    return out;
}

}  // namespace

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string FunctionEntry::stem() const { return function + "@" + to_string(resolution); }

std::uint64_t Manifest::content_hash() const {
    std::uint64_t h = fnv1a(dataset);
    h = fnv1a(hex64(input_hash), h);
    for (const auto& e : functions) {
        h = fnv1a(e.stem(), h);
        h = fnv1a(hex64(e.salient.hash) + hex64(e.extreme.hash), h);
    }
    return h;
}

bool BuildReport::ok() const {
    return std::none_of(datasets.begin(), datasets.end(),
                        [](const auto& d) { return d.status == DatasetBuildReport::Status::failed; });
}

UserThreshold parse_user_threshold(const std::string& text) {
    const auto eq = text.find('=');
    const auto slash = text.find('/');
    if (eq == std::string::npos || slash == std::string::npos || slash > eq)
        throw Error(ErrorCode::invalid_argument, "threshold must look like dataset/function[@resolution]=pos,neg: " + text);
    UserThreshold t;
    t.dataset = text.substr(0, slash);
    std::string fn = text.substr(slash + 1, eq - slash - 1);
    if (auto at = fn.find('@'); at != std::string::npos) {
        t.resolution = parse_resolution(fn.substr(at + 1));
        fn.resize(at);
    }
    t.function = fn;
    FunctionSpec::parse(fn);
    const std::string rhs = text.substr(eq + 1);
    const auto comma = rhs.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::invalid_argument, "threshold needs `pos,neg`: " + text);
    auto bound = [&](const std::string& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw Error(ErrorCode::invalid_argument, "bad threshold value `" + s + "`");
        return v;
    };
    t.theta_plus = bound(rhs.substr(0, comma));
    t.theta_minus = bound(rhs.substr(comma + 1));
    if (!t.theta_plus && !t.theta_minus) throw Error(ErrorCode::invalid_argument, "threshold sets no bound: " + text);
    return t;
}

Corpus::Corpus(fs::path root) : root_(std::move(root)) {
    for (const char* sub : {"regions", "datasets", "artifacts", "cache"}) fs::create_directories(root_ / sub);
    if (!fs::exists(root_ / "catalog.json")) save_catalog({});
}

fs::path Corpus::dataset_dir(const std::string& name) const { return root_ / "datasets" / name; }
fs::path Corpus::artifact_dir(const std::string& name) const { return root_ / "artifacts" / name; }

std::vector<std::string> Corpus::datasets() const {
    const json j = json::parse(read_text_file(root_ / "catalog.json"), nullptr, false);
    if (j.is_discarded() || !j.contains("datasets")) throw Error(ErrorCode::malformed, "corrupt catalog.json");
    std::vector<std::string> names;
    for (const auto& d : j.at("datasets")) names.push_back(d.at("name").get<std::string>());
    return names;
}

bool Corpus::contains(const std::string& name) const {
    const auto names = datasets();
    return std::find(names.begin(), names.end(), name) != names.end();
}

void Corpus::save_catalog(const std::vector<std::string>& names) const {
    json list = json::array();
    for (const auto& n : names) list.push_back({{"name", n}, {"path", "datasets/" + n}});
    write_text_file(root_ / "catalog.json", json{{"version", kArtifactVersion}, {"datasets", list}}.dump(2) + "\n");
}

DatasetDescriptor Corpus::descriptor(const std::string& name) const {
    if (!contains(name)) throw Error(ErrorCode::unknown_dataset, "no dataset named " + name);
    return parse_descriptor(read_text_file(dataset_dir(name) / "descriptor.txt"));
}

std::string Corpus::ingest(const fs::path& descriptor_path, const fs::path& csv, ParseReport* report) {
    const std::string text = read_text_file(descriptor_path);
    const DatasetDescriptor desc = parse_descriptor(text, read_csv_header(csv));
    ParseReport local;
    const RecordTable records = load_records(csv, desc, report ? report : &local);
    if (records.size() == 0) throw Error(ErrorCode::no_records, "no usable records in " + csv.string());

    const fs::path dir = dataset_dir(desc.name);
    fs::create_directories(dir);
    write_text_file(dir / "descriptor.txt", text);
    fs::copy_file(csv, dir / "data.csv", fs::copy_options::overwrite_existing);
    auto names = datasets();
    if (std::find(names.begin(), names.end(), desc.name) == names.end()) {
        names.push_back(desc.name);
        std::sort(names.begin(), names.end());
        save_catalog(names);
    }
    return desc.name;
}

std::uint64_t Corpus::input_hash(const std::string& name) const {
    std::uint64_t h = fnv1a("topodisc-artifacts-v" + std::to_string(kArtifactVersion));
    h = fnv1a(read_text_file(dataset_dir(name) / "descriptor.txt"), h);
    h = file_fingerprint(dataset_dir(name) / "data.csv", h);
    for (const char* res : {"zip", "neighborhood"})
        for (const char* suffix : kRegionSuffixes) {
            const fs::path p = root_ / "regions" / (std::string(res) + suffix);
            if (fs::exists(p)) h = file_fingerprint(p, fnv1a(p.filename().string(), h));
        }
    return h;
}

Manifest Corpus::manifest(const std::string& name) const {
    if (!contains(name)) throw Error(ErrorCode::unknown_dataset, "no dataset named " + name);
    const fs::path p = artifact_dir(name) / "manifest.json";
    if (!fs::exists(p)) throw Error(ErrorCode::not_built, "dataset " + name + " has not been built");
    const json j = json::parse(read_text_file(p), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::malformed, "corrupt manifest for " + name);
    Manifest m = manifest_from_json(j);
    if (m.version != kArtifactVersion || m.input_hash != input_hash(name))
        throw Error(ErrorCode::not_built, "artifacts of " + name + " are stale; rebuild the dataset");
    return m;
}

bool Corpus::fresh(const std::string& name) const {
    try {
        const Manifest m = manifest(name);
        for (const auto& e : m.functions)
            for (std::string_view s : {".sf", ".jt", ".st", ".salient.fs", ".extreme.fs"})
                if (!fs::exists(artifact_path(name, e, s))) return false;
        return true;
    } catch (const Error&) {
        return false;
    }
}

fs::path Corpus::artifact_path(const std::string& dataset, const FunctionEntry& fn, std::string_view suffix) const {
    return artifact_dir(dataset) / (fn.stem() + std::string(suffix));
}

FeatureSet Corpus::load_feature_set(const std::string& dataset, const FunctionEntry& fn, FeatureMode mode) const {
    return load_features(artifact_path(dataset, fn, mode_suffix(mode)));
}

std::shared_ptr<const SpatialDomain> Corpus::domain(SpatialRes res) const {
    if (res == SpatialRes::city) {
        static const auto city = std::make_shared<const SpatialDomain>(SpatialDomain::city());
        return city;
    }
    if (res == SpatialRes::gps) throw Error(ErrorCode::invalid_argument, "gps is not an evaluation resolution");
    if (auto it = domains_.find(res); it != domains_.end()) return it->second;
    const std::string base = std::string(to_string(res));
    const fs::path dir = root_ / "regions";
    std::vector<RegionId> ids;
    if (fs::exists(dir / (base + ".poly"))) {
        for (const auto& p : load_polygons(dir / (base + ".poly"))) ids.push_back(p.id);
    } else if (fs::exists(dir / (base + ".ids"))) {
        ids = load_region_ids(dir / (base + ".ids"));
    } else {
        throw Error(ErrorCode::io, "corpus has no " + base + " regions (regions/" + base + ".poly or .ids)");
    }
    std::vector<std::pair<RegionId, RegionId>> adj;
    if (fs::exists(dir / (base + ".adj"))) adj = load_adjacency(dir / (base + ".adj"));
    auto d = std::make_shared<const SpatialDomain>(std::move(ids), adj);
    domains_.emplace(res, d);
    return d;
}

SpatialLayer Corpus::layer(SpatialRes res) const {
    SpatialLayer l;
    l.resolution = res;
    l.domain = *domain(res);
    const fs::path poly = root_ / "regions" / (std::string(to_string(res)) + ".poly");
    if (res != SpatialRes::city && fs::exists(poly)) l.polygons.emplace(load_polygons(poly));
    return l;
}

BuildReport Corpus::build(const std::vector<std::string>& names, unsigned jobs) {
    const auto all = datasets();
    std::vector<std::string> targets = names.empty() ? all : names;
    BuildReport report;
    report.datasets.resize(targets.size());

    // Region domains are loaded up front so workers only read the shared map.
    for (SpatialRes r : {SpatialRes::zip, SpatialRes::neighborhood}) try {
            domain(r);
        } catch (const Error&) {
        }

    struct Pending {
        std::size_t dataset;  // index into targets
        FunctionEntry entry;
        ScalarFunction f;
    };
    std::vector<std::vector<Pending>> per_dataset(targets.size());
    std::vector<Manifest> manifests(targets.size());
    std::vector<std::chrono::steady_clock::time_point> started(targets.size());

    // Stage 1: scalar functions.
    auto stage1 = std::chrono::steady_clock::now();
    parallel_for(targets.size(), jobs, [&](std::size_t i) {
        auto& rep = report.datasets[i];
        rep.dataset = targets[i];
        started[i] = std::chrono::steady_clock::now();
        try {
            if (std::find(all.begin(), all.end(), targets[i]) == all.end())
                throw Error(ErrorCode::unknown_dataset, "no dataset named " + targets[i]);
            if (fresh(targets[i])) {
                rep.status = DatasetBuildReport::Status::up_to_date;
                rep.functions = manifest(targets[i]).functions.size();
                return;
            }
            const DatasetDescriptor desc = descriptor(targets[i]);
            ParseReport parse;
            const RecordTable records = load_records(dataset_dir(targets[i]) / "data.csv", desc, &parse);
            Manifest& m = manifests[i];
            m.dataset = desc.name;
            m.input_hash = input_hash(desc.name);
            m.native = desc.native;
            m.rows = parse.rows;
            m.skipped = parse.skipped_spatial + parse.skipped_temporal;

            fs::remove_all(artifact_dir(desc.name));
            fs::create_directories(artifact_dir(desc.name));
            for (const Resolution res : compatible_resolutions(desc.native)) {
                SpatialLayer l;
                try {
                    l = layer(res.spatial);
                    if (desc.native.spatial == SpatialRes::gps && res.spatial != SpatialRes::city && !l.polygons)
                        throw Error(ErrorCode::io, "no polygons for " + std::string(to_string(res.spatial)));
                } catch (const Error& e) {
                    m.notes.push_back(to_string(res) + ": skipped, " + e.what());
                    continue;
                }
                const PointAssignment points = assign_points(records, desc, res, l);
                if (points.assigned == 0) {
                    m.notes.push_back(to_string(res) + ": skipped, no record falls inside the domain");
                    continue;
                }
                for (const auto& spec : function_specs(desc)) {
                    Pending p;
                    p.dataset = i;
                    p.f = aggregate(records, desc, spec, points, res);
                    p.entry.function = spec.name();
                    p.entry.resolution = res;
                    p.entry.n_regions = p.f.n_regions;
                    p.entry.steps = p.f.time.steps;
                    p.entry.t0 = p.f.time.t0;
                    save_function(p.f, artifact_path(desc.name, p.entry, ".sf"));
                    per_dataset[i].push_back(std::move(p));
                }
            }
            if (per_dataset[i].empty())
                throw Error(ErrorCode::no_records, "no function could be built" +
                                                       (m.notes.empty() ? std::string() : ": " + m.notes.front()));
            rep.status = DatasetBuildReport::Status::built;
        } catch (const std::exception& e) {
            rep.status = DatasetBuildReport::Status::failed;
            rep.message = e.what();
            per_dataset[i].clear();
        }
    });
    report.function_seconds = seconds_since(stage1);

    // Stage 2: merge trees and feature sets, one task per function.
    std::vector<Pending*> tasks;
    for (auto& list : per_dataset)
        for (auto& p : list) tasks.push_back(&p);
    std::vector<std::string> task_error(tasks.size());
    auto stage2 = std::chrono::steady_clock::now();
    parallel_for(tasks.size(), jobs, [&](std::size_t t) {
        Pending& p = *tasks[t];
        const std::string& name = targets[p.dataset];
        try {
            const STGraph g = STGraph::for_function(domain(p.entry.resolution.spatial), p.f);
            const MergeTree join = join_tree(g, p.f.values);
            const MergeTree split = split_tree(g, p.f.values);
            save_tree(join, artifact_path(name, p.entry, ".jt"));
            save_tree(split, artifact_path(name, p.entry, ".st"));
            p.entry.active = g.active_count();
            p.entry.maxima = join.leaves.size();
            p.entry.minima = split.leaves.size();
            const FeatureSet sal = salient_features(g, p.f, join, split);
            const FeatureSet ext = extreme_features(g, p.f, join, split);
            for (const auto* fsp : {&sal, &ext}) {
                const auto path = artifact_path(name, p.entry, mode_suffix(fsp->mode));
                save_features(*fsp, path);
                auto& s = fsp->mode == FeatureMode::salient ? p.entry.salient : p.entry.extreme;
                s = {fsp->plus.count(), fsp->minus.count(), file_fingerprint(path)};
            }
            p.f.values = {};
            p.f.counts = {};
        } catch (const std::exception& e) {
            task_error[t] = p.entry.stem() + ": " + e.what();
        }
    });
    report.feature_seconds = seconds_since(stage2);

    for (std::size_t t = 0; t < tasks.size(); ++t)
        if (!task_error[t].empty()) {
            auto& rep = report.datasets[tasks[t]->dataset];
            rep.status = DatasetBuildReport::Status::failed;
            if (rep.message.empty()) rep.message = task_error[t];
        }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        auto& rep = report.datasets[i];
        if (rep.status != DatasetBuildReport::Status::built) {
            if (rep.status == DatasetBuildReport::Status::failed && contains(targets[i]))
                fs::remove(artifact_dir(targets[i]) / "manifest.json");
            rep.seconds = seconds_since(started[i]);
            continue;
        }
        Manifest& m = manifests[i];
        for (auto& p : per_dataset[i]) m.functions.push_back(p.entry);
        rep.functions = m.functions.size();
        rep.notes = m.notes;
        // The manifest goes last: its presence marks the artifacts complete.
        write_text_file(artifact_dir(targets[i]) / "manifest.json", manifest_to_json(m).dump(2) + "\n");
        rep.seconds = seconds_since(started[i]);
    }
    return report;
}

std::optional<std::pair<FeatureSet, FeatureSet>> align_in_time(const FeatureSet& a, const FeatureSet& b) {
    if (a.resolution != b.resolution || a.n_regions != b.n_regions)
        throw Error(ErrorCode::resolution_mismatch, "feature sets live on different domains");
    const std::int64_t fa = a.time.first_bucket(), fb = b.time.first_bucket();
    const std::int64_t lo = std::max(fa, fb);
    const std::int64_t hi = std::min(fa + static_cast<std::int64_t>(a.steps), fb + static_cast<std::int64_t>(b.steps));
    if (lo >= hi) return std::nullopt;
    const auto len = static_cast<std::uint64_t>(hi - lo);
    return std::pair{slice_steps(a, static_cast<std::uint64_t>(lo - fa), len),
                     slice_steps(b, static_cast<std::uint64_t>(lo - fb), len)};
}

namespace {

std::vector<std::string> resolve_names(const std::vector<std::string>& requested, const std::vector<std::string>& all) {
    if (requested.empty()) return all;
    std::vector<std::string> out;
    for (const auto& n : requested) {
        if (std::find(all.begin(), all.end(), n) == all.end())
            throw Error(ErrorCode::unknown_dataset, "no dataset named " + n);
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
    return out;
}

std::string clause_key(const QueryClause& c, const std::vector<std::string>& d1, const std::vector<std::string>& d2) {
    std::ostringstream k;
    k << "v" << kArtifactVersion << "|d1=";
    for (const auto& n : d1) k << n << ",";
    k << "|d2=";
    for (const auto& n : d2) k << n << ",";
    k << "|score=" << shortest(c.filter.min_score) << "|strength=" << shortest(c.filter.min_strength) << "|modes=";
    for (auto m : c.modes) k << to_string(m) << ",";
    k << "|alpha=" << shortest(c.alpha) << "|shifts=" << c.shifts << "|seed=" << c.seed << "|thresholds=";
    for (const auto& t : c.thresholds) {
        k << t.dataset << "/" << t.function << "@" << (t.resolution ? to_string(*t.resolution) : "*") << "="
          << (t.theta_plus ? shortest(*t.theta_plus) : "") << "," << (t.theta_minus ? shortest(*t.theta_minus) : "")
          << ";";
    }
    return k.str();
}

}  // namespace

QueryOutput Corpus::query(const QueryClause& clause, const QueryOptions& options) {
    if (clause.filter.min_score < 0 || clause.filter.min_score > 1 || clause.filter.min_strength < 0 ||
        clause.filter.min_strength > 1)
        throw Error(ErrorCode::invalid_argument, "min-score and min-strength must lie in [0, 1]");
    if (!(clause.alpha > 0 && clause.alpha < 1)) throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
    if (clause.shifts < 1) throw Error(ErrorCode::invalid_argument, "shifts must be at least 1");
    if (clause.modes.empty()) throw Error(ErrorCode::invalid_argument, "no feature mode selected");

    const auto all = datasets();
    const auto d1 = resolve_names(clause.d1, all);
    const auto d2 = resolve_names(clause.d2, all);
    for (const auto& t : clause.thresholds)
        if (std::find(all.begin(), all.end(), t.dataset) == all.end())
            throw Error(ErrorCode::unknown_dataset, "threshold names unknown dataset " + t.dataset);

    std::map<std::string, Manifest> manifests;
    std::set<std::string> involved(d1.begin(), d1.end());
    involved.insert(d2.begin(), d2.end());
    for (const auto& n : involved) manifests.emplace(n, manifest(n));

    // Cache lookup: the key covers the clause and the content of every input.
    std::string key_text = clause_key(clause, d1, d2);
    for (const auto& [n, m] : manifests) key_text += "|" + n + ":" + hex64(m.content_hash());
    QueryOutput out;
    out.cache_key = hex64(fnv1a(key_text));
    const fs::path cache_results = root_ / "cache" / (out.cache_key + ".jsonl");
    const fs::path cache_report = root_ / "cache" / (out.cache_key + ".report.json");
    if (options.use_cache && fs::exists(cache_results) && fs::exists(cache_report)) {
        std::istringstream in(read_text_file(cache_results));
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) out.results.push_back(result_from_json(line));
        const json rep = json::parse(read_text_file(cache_report));
        out.skipped = rep.at("skipped").get<std::vector<std::string>>();
        const auto& s = rep.at("stats");
        out.stats = {s.at("evaluations"), s.at("no_overlap"), s.at("filtered"), s.at("not_significant"),
                     s.at("significant")};
        out.from_cache = true;
        return out;
    }

    // Dataset pairs, each unordered pair once, never a dataset with itself.
    std::vector<std::pair<std::string, std::string>> pairs;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& a : d1)
        for (const auto& b : d2) {
            if (a == b || seen.count({b, a}) || seen.count({a, b})) continue;
            seen.insert({a, b});
            pairs.emplace_back(a, b);
        }

    // Feature sets are loaded once, before the parallel stage.
    std::map<std::string, std::shared_ptr<const FeatureSet>> loaded;
    auto user_threshold = [&](const std::string& ds, const FunctionEntry& e) -> const UserThreshold* {
        for (const auto& t : clause.thresholds)
            if (t.dataset == ds && t.function == e.function && (!t.resolution || *t.resolution == e.resolution))
                return &t;
        return nullptr;
    };
    auto features_of = [&](const std::string& ds, const FunctionEntry& e, FeatureMode mode) {
        const UserThreshold* ut = user_threshold(ds, e);
        const std::string key = ds + "|" + e.stem() + "|" + (ut ? "user" : std::string(to_string(mode)));
        auto it = loaded.find(key);
        if (it != loaded.end()) return it->second;
        std::shared_ptr<const FeatureSet> fsp;
        if (ut) {
            // Thresholds supplied at query time: extract features through the stored trees.
            const ScalarFunction f = load_function(artifact_path(ds, e, ".sf"));
            const STGraph g = STGraph::for_function(domain(e.resolution.spatial), f);
            const MergeTree join = load_tree(artifact_path(ds, e, ".jt"));
            const MergeTree split = load_tree(artifact_path(ds, e, ".st"));
            fsp = std::make_shared<const FeatureSet>(user_features(g, f, join, split, ut->theta_plus, ut->theta_minus));
        } else {
            fsp = std::make_shared<const FeatureSet>(load_feature_set(ds, e, mode));
        }
        loaded.emplace(key, fsp);
        return fsp;
    };

    struct Task {
        std::shared_ptr<const FeatureSet> a, b;
        Resolution res;
        FeatureMode mode;
        std::string pair_id;
    };
    std::vector<Task> tasks;
    for (const auto& [a, b] : pairs) {
        const Manifest& ma = manifests.at(a);
        const Manifest& mb = manifests.at(b);
        std::vector<Resolution> ra, rb;
        for (const auto& e : ma.functions) ra.push_back(e.resolution);
        for (const auto& e : mb.functions) rb.push_back(e.resolution);
        std::sort(ra.begin(), ra.end());
        ra.erase(std::unique(ra.begin(), ra.end()), ra.end());
        std::sort(rb.begin(), rb.end());
        rb.erase(std::unique(rb.begin(), rb.end()), rb.end());
        const auto common = common_resolutions(ra, rb);
        if (common.empty()) {
            out.skipped.push_back(a + " vs " + b + ": no common resolution");
            continue;
        }
        for (const Resolution res : common) {
            for (const auto& ea : ma.functions) {
                if (ea.resolution != res) continue;
                for (const auto& eb : mb.functions) {
                    if (eb.resolution != res) continue;
                    const std::int64_t fa = bucket_index(res.temporal, ea.t0), fb = bucket_index(res.temporal, eb.t0);
                    if (std::max(fa, fb) >= std::min(fa + static_cast<std::int64_t>(ea.steps),
                                                     fb + static_cast<std::int64_t>(eb.steps))) {
                        out.skipped.push_back(a + "/" + ea.function + " vs " + b + "/" + eb.function + " at " +
                                              to_string(res) + ": time ranges do not overlap");
                        continue;
                    }
                    for (const FeatureMode mode : clause.modes)
                        tasks.push_back({features_of(a, ea, mode), features_of(b, eb, mode), res, mode,
                                         a + "/" + ea.function + "|" + b + "/" + eb.function});
                }
            }
        }
    }

    // Workers only read the domain map.
    for (const auto& t : tasks) domain(t.res.spatial);
    std::vector<Evaluation> evals(tasks.size());
    parallel_for(tasks.size(), options.jobs, [&](std::size_t i) {
        const Task& t = tasks[i];
        auto aligned = align_in_time(*t.a, *t.b);
        SignificanceConfig cfg{clause.shifts, clause.alpha, evaluation_seed(clause.seed, t.pair_id, t.res, t.mode)};
        evals[i] = evaluate_pair(aligned->first, aligned->second, *domain(t.res.spatial), clause.filter, cfg);
        evals[i].result.mode = t.mode;
        // Report the query seed; the per-evaluation seed is re-derivable from it.
        evals[i].result.seed = clause.seed;
    });

    out.stats.evaluations = evals.size();
    for (auto& e : evals) {
        switch (e.outcome) {
            case EvalOutcome::no_overlap: ++out.stats.no_overlap; break;
            case EvalOutcome::filtered: ++out.stats.filtered; break;
            case EvalOutcome::not_significant: ++out.stats.not_significant; break;
            case EvalOutcome::significant:
                ++out.stats.significant;
                out.results.push_back(std::move(e.result));
                break;
        }
    }
    sort_results(out.results);

    if (options.use_cache) {
        write_text_file(cache_results, results_to_jsonl(out.results));
        const json rep{{"skipped", out.skipped},
                       {"stats",
                        {{"evaluations", out.stats.evaluations}, {"no_overlap", out.stats.no_overlap},
                         {"filtered", out.stats.filtered}, {"not_significant", out.stats.not_significant},
                         {"significant", out.stats.significant}}}};
        write_text_file(cache_report, rep.dump(2) + "\n");
    }
    return out;
}

std::vector<BaselineResult> Corpus::baseline(const std::string& method, const std::string& d1, const std::string& d2,
                                             unsigned bins) const {
    if (method != "pcc" && method != "mi" && method != "dtw")
        throw Error(ErrorCode::invalid_argument, "unknown baseline method: " + method);
    const Manifest ma = manifest(d1), mb = manifest(d2);
    std::optional<Resolution> res;
    for (const auto& ea : ma.functions)
        for (const auto& eb : mb.functions)
            if (ea.resolution == eb.resolution && ea.resolution.spatial == SpatialRes::city &&
                (!res || ea.resolution < *res))
                res = ea.resolution;
    if (!res) throw Error(ErrorCode::resolution_mismatch, d1 + " and " + d2 + " share no city resolution");

    std::vector<BaselineResult> out;
    for (const auto& ea : ma.functions) {
        if (ea.resolution != *res) continue;
        const ScalarFunction fa = load_function(artifact_path(d1, ea, ".sf"));
        for (const auto& eb : mb.functions) {
            if (eb.resolution != *res) continue;
            const ScalarFunction fb = load_function(artifact_path(d2, eb, ".sf"));
            BaselineResult r{method, d1, ea.function, d2, eb.function, *res, std::nullopt, 0};
            const std::int64_t ba = fa.time.first_bucket(), bb = fb.time.first_bucket();
            const std::int64_t lo = std::max(ba, bb);
            const std::int64_t hi = std::min(ba + static_cast<std::int64_t>(fa.time.steps),
                                             bb + static_cast<std::int64_t>(fb.time.steps));
            if (lo < hi) {
                const std::span<const double> xa(fa.values.data() + (lo - ba), static_cast<std::size_t>(hi - lo));
                const std::span<const double> xb(fb.values.data() + (lo - bb), static_cast<std::size_t>(hi - lo));
                const auto [x, y] = paired_values(xa, xb);
                r.length = x.size();
                if (method == "pcc") r.value = pcc(x, y);
                else if (method == "mi") r.value = nmi(x, y, bins);
                else r.value = ndtw(x, y);
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::string result_to_json(const RelationshipResult& r) {
    const json j{{"dataset1", r.dataset1},     {"function1", r.function1},
                 {"dataset2", r.dataset2},     {"function2", r.function2},
                 {"resolution", to_string(r.resolution)},
                 {"mode", to_string(r.mode)},  {"tau", r.tau},
                 {"rho", r.rho},               {"p_value", r.p_value},
                 {"significant", r.significant}, {"n_sigma", r.n_sigma},
                 {"n_pos", r.n_pos},           {"n_neg", r.n_neg},
                 {"seed", r.seed},             {"shifts", r.shifts}};
    return j.dump();
}

RelationshipResult result_from_json(const std::string& line) {
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::malformed, "bad result record");
    RelationshipResult r;
    r.dataset1 = j.at("dataset1");
    r.function1 = j.at("function1");
    r.dataset2 = j.at("dataset2");
    r.function2 = j.at("function2");
    r.resolution = parse_resolution(j.at("resolution").get<std::string>());
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.tau = j.at("tau");
    r.rho = j.at("rho");
    r.p_value = j.at("p_value");
    r.significant = j.at("significant");
    r.n_sigma = j.at("n_sigma");
    r.n_pos = j.at("n_pos");
    r.n_neg = j.at("n_neg");
    r.seed = j.at("seed");
    r.shifts = j.at("shifts");
    return r;
}

std::string results_to_jsonl(const std::vector<RelationshipResult>& results) {
    std::string s;
    for (const auto& r : results) s += result_to_json(r) + "\n";
    return s;
}

std::string results_to_csv(const std::vector<RelationshipResult>& results) {
    std::string s = "dataset1,function1,dataset2,function2,resolution,mode,tau,rho,p_value,significant,n_sigma,n_pos,"
                    "n_neg,seed,shifts\n";
    for (const auto& r : results) {
        s += r.dataset1 + "," + r.function1 + "," + r.dataset2 + "," + r.function2 + "," + to_string(r.resolution) +
             "," + std::string(to_string(r.mode)) + "," + shortest(r.tau) + "," + shortest(r.rho) + "," +
             shortest(r.p_value) + "," + (r.significant ? "true" : "false") + "," + std::to_string(r.n_sigma) + "," +
             std::to_string(r.n_pos) + "," + std::to_string(r.n_neg) + "," + std::to_string(r.seed) + "," +
             std::to_string(r.shifts) + "\n";
    }
    return s;
}

std::string baseline_to_json(const BaselineResult& r) {
    json j{{"method", r.method},     {"dataset1", r.dataset1},
           {"function1", r.function1}, {"dataset2", r.dataset2},
           {"function2", r.function2}, {"resolution", to_string(r.resolution)},
           {"length", r.length}};
    j["value"] = r.value ? json(*r.value) : json(nullptr);
    return j.dump();
}

}  // namespace topodisc
