#include "forgemask/pipeline/dataset.hpp"

#include "forgemask/error.hpp"
#include "forgemask/imagecore/codec.hpp"
#include "forgemask/semanticmask/feature_file.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace forgemask::pipeline {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Splits CSV text into records of fields (RFC 4180: quoted fields may contain
// commas, doubled quotes and line breaks).
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (field_started || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            field_started = false;
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw ParameterError("listing: unterminated quoted field");
    if (field_started || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

bool filename_safe(const std::string& id) {
    if (id.empty() || id == "." || id == "..") return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '.' || c == '_' || c == '-';
    });
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void fail(AnnotationRecord& r, std::string reason, std::string detail) {
    r.verdict = Verdict::failed;
    r.reason = std::move(reason);
    r.detail = std::move(detail);
}

}  // namespace

std::vector<ListingRow> read_listing(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read listing " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto rows = parse_csv(ss.str());
    if (rows.empty()) throw ParameterError("listing is empty: " + path.string());

    const std::vector<std::string> required = {"pair_id", "original_path", "edited_path",
                                               "editing_task"};
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < rows[0].size(); ++i) column[rows[0][i]] = i;
    for (const auto& name : required) {
        if (!column.count(name)) throw ParameterError("listing lacks column '" + name + "'");
    }

    std::vector<ListingRow> out;
    std::set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != rows[0].size()) {
            throw ParameterError("listing row " + std::to_string(r + 1) + " has " +
                                 std::to_string(row.size()) + " fields, expected " +
                                 std::to_string(rows[0].size()));
        }
        ListingRow lr{row[column["pair_id"]], row[column["original_path"]],
                      row[column["edited_path"]], row[column["editing_task"]]};
        if (!filename_safe(lr.pair_id)) {
            throw ParameterError("listing row " + std::to_string(r + 1) + ": pair_id '" +
                                 lr.pair_id + "' is not filename-safe");
        }
        if (!seen.insert(lr.pair_id).second) {
            throw ParameterError("duplicate pair_id '" + lr.pair_id + "'");
        }
        out.push_back(std::move(lr));
    }
    return out;
}

std::string FeatureSpec::describe() const {
    if (fmap_dir) return "fmap-dir:" + fmap_dir->string();
    return "builtin/p" + std::to_string(patch_size);
}

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["detector"] = {{"max_keypoints", cfg.align.detector.max_count},
                     {"fast_threshold", cfg.align.detector.fast_threshold}};
    j["ratio_test"] = cfg.align.ratio;
    j["ransac"] = {{"iterations", cfg.align.ransac.iterations},
                   {"reproj_threshold", cfg.align.ransac.reproj_threshold},
                   {"seed", cfg.align.ransac.seed}};
    j["gate"] = {{"min_keypoints", cfg.gate.min_keypoints},
                 {"min_matches", cfg.gate.min_matches},
                 {"min_inlier_ratio", cfg.gate.min_inlier_ratio}};
    j["features"] = cfg.features.describe();
    j["otsu_bins"] = cfg.annotate.otsu_bins;
    j["mask_size"] = {cfg.annotate.mask_width, cfg.annotate.mask_height};
    j["split_ratio"] = cfg.split_ratio;
    j["split_seed"] = cfg.split_seed;
    j["jpeg_chroma_subsampling"] = "4:2:0";
    j["tool_version"] = kToolVersion;
    return j;
}

AnnotationRecord annotate_pair(const ListingRow& row, const fs::path& base_dir,
                               const fs::path& out_dir, const PipelineConfig& cfg) {
    AnnotationRecord r;
    r.pair_id = row.pair_id;
    r.original_path = row.original_path;
    r.edited_path = row.edited_path;
    r.editing_task = row.editing_task;
    r.seeds = Seeds{cfg.align.ransac.seed, cfg.split_seed};
    r.timing.present = true;

    auto t0 = clock_type::now();
    ImageBuffer original, edited;
    try {
        original = load_image(resolve(base_dir, row.original_path));
        edited = load_image(resolve(base_dir, row.edited_path));
    } catch (const Error& e) {
        r.timing.io += seconds_since(t0);
        fail(r, "io", e.what());
        return r;
    }
    r.timing.io += seconds_since(t0);

    t0 = clock_type::now();
    alignment::AlignedPair aligned;
    try {
        aligned = alignment::align_pair(original, edited, cfg.align);
    } catch (const alignment::AlignmentFailure& e) {
        r.timing.alignment = seconds_since(t0);
        r.alignment = e.partial_stats();
        const bool no_keypoints = e.stage() == alignment::AlignStage::detection &&
                                  (e.partial_stats().keypoints_original == 0 ||
                                   e.partial_stats().keypoints_edited == 0);
        const GateDecision gate = quality_gate(e.partial_stats(), cfg.gate);
        if (!no_keypoints && gate.violated) {
            r.verdict = Verdict::rejected;
            r.reason = to_string(*gate.violated);
            r.detail = e.what();
        } else {
            fail(r, std::string("alignment:") + alignment::to_string(e.stage()), e.what());
        }
        return r;
    } catch (const Error& e) {
        r.timing.alignment = seconds_since(t0);
        fail(r, "alignment:error", e.what());
        return r;
    }
    r.timing.alignment = seconds_since(t0);
    r.alignment = aligned.stats;

    const GateDecision gate = quality_gate(aligned.stats, cfg.gate);
    if (gate.violated) {
        r.verdict = Verdict::rejected;
        r.reason = to_string(*gate.violated);
        return r;
    }

    semanticmask::FeatureSource source = semanticmask::BuiltinFeatures{cfg.features.patch_size};
    if (cfg.features.fmap_dir) {
        t0 = clock_type::now();
        try {
            const fs::path dir = *cfg.features.fmap_dir;
            source = semanticmask::PrecomputedFeatures{
                semanticmask::load_feature_file(dir / (row.pair_id + ".original.fmap")),
                semanticmask::load_feature_file(dir / (row.pair_id + ".edited.fmap")), "fmap"};
        } catch (const IoError& e) {
            r.timing.io += seconds_since(t0);
            fail(r, "io", e.what());
            return r;
        } catch (const Error& e) {
            r.timing.io += seconds_since(t0);
            fail(r, "annotation:features", e.what());
            return r;
        }
        r.timing.io += seconds_since(t0);
    }

    semanticmask::Annotation annotation;
    try {
        annotation = semanticmask::annotate_masks(aligned.original, aligned.edited, source,
                                                  cfg.annotate);
    } catch (const semanticmask::AnnotationFailure& e) {
        fail(r, "annotation:" + e.stage(), e.what());
        return r;
    }
    r.timing.features = annotation.stats.feature_seconds;
    r.timing.similarity = annotation.stats.similarity_seconds;
    r.mask = MaskSummary{annotation.stats.threshold, annotation.stats.edited_fraction,
                         annotation.stats.feature_source, annotation.stats.grid_h,
                         annotation.stats.grid_w};

    t0 = clock_type::now();
    const std::string rel = "masks/" + row.pair_id + ".png";
    try {
        fs::create_directories(out_dir / "masks");
        save_png(out_dir / rel, annotation.mask.to_image());
    } catch (const std::exception& e) {
        r.timing.io += seconds_since(t0);
        r.mask.reset();
        fail(r, "io", e.what());
        return r;
    }
    r.timing.io += seconds_since(t0);
    r.mask_path = rel;
    r.verdict = Verdict::accepted;
    return r;
}

void assign_splits(std::vector<AnnotationRecord>& records, double ratio, std::uint64_t seed) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw ParameterError("split ratio must lie in [0, 1]");
    std::vector<std::size_t> accepted;
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].split = Split::none;
        if (records[i].verdict == Verdict::accepted) accepted.push_back(i);
    }
    std::sort(accepted.begin(), accepted.end(), [&](std::size_t a, std::size_t b) {
        return records[a].pair_id < records[b].pair_id;
    });
    std::mt19937_64 rng(seed);
    for (std::size_t i = accepted.size(); i > 1; --i) {
        std::swap(accepted[i - 1], accepted[rng() % i]);
    }
    const auto n_train =
        static_cast<std::size_t>(std::llround(static_cast<double>(accepted.size()) * ratio));
    for (std::size_t k = 0; k < accepted.size(); ++k) {
        records[accepted[k]].split = k < n_train ? Split::train : Split::test;
    }
}

DatasetSummary summarize(const std::vector<AnnotationRecord>& records) {
    DatasetSummary s;
    s.total = records.size();
    for (const auto& r : records) {
        const std::string verdict = to_string(r.verdict);
        ++s.by_verdict[verdict];
        if (r.verdict != Verdict::accepted) ++s.by_reason[verdict + ":" + r.reason];
        ++s.by_task[r.editing_task][verdict];
        ++s.by_split[to_string(r.split)];
    }
    return s;
}

std::string manifest_text(const std::vector<AnnotationRecord>& records, bool include_timing) {
    std::vector<const AnnotationRecord*> sorted;
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->pair_id < b->pair_id; });
    std::string text;
    for (const auto* r : sorted) {
        text += record_to_json(*r, include_timing).dump();
        text += '\n';
    }
    return text;
}

std::vector<AnnotationRecord> read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read manifest " + path.string());
    std::vector<AnnotationRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

namespace {

// Records from an interrupted run; a torn final line is ignored.
std::unordered_map<std::string, AnnotationRecord> read_checkpoint(const fs::path& path) {
    std::unordered_map<std::string, AnnotationRecord> done;
    std::ifstream in(path, std::ios::binary);
    if (!in) return done;
    std::string line;
    while (std::getline(in, line)) {
        try {
            auto r = record_from_json(nlohmann::json::parse(line));
            done[r.pair_id] = std::move(r);
        } catch (const std::exception&) {
        }
    }
    return done;
}

nlohmann::ordered_json summary_json(const DatasetSummary& s) {
    nlohmann::ordered_json j;
    j["total"] = s.total;
    j["by_verdict"] = s.by_verdict;
    j["by_reason"] = s.by_reason;
    j["by_task"] = s.by_task;
    j["by_split"] = s.by_split;
    return j;
}

}  // namespace

DatasetManifest build_dataset(const fs::path& listing_path, const fs::path& out_dir,
                              const PipelineConfig& cfg) {
    cfg.gate.validate();
    if (cfg.workers < 1) throw ParameterError("workers must be >= 1");
    if (!(cfg.split_ratio >= 0.0 && cfg.split_ratio <= 1.0)) {
        throw ParameterError("split ratio must lie in [0, 1]");
    }
    const auto listing = read_listing(listing_path);
    const fs::path base_dir = listing_path.parent_path();

    std::error_code ec;
    fs::create_directories(out_dir / "masks", ec);
    if (ec) throw IoError("cannot create " + (out_dir / "masks").string() + ": " + ec.message());

    const fs::path checkpoint_path = out_dir / "checkpoint.jsonl";
    std::unordered_map<std::string, AnnotationRecord> done;
    if (cfg.resume) done = read_checkpoint(checkpoint_path);

    std::vector<std::optional<AnnotationRecord>> results(listing.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < listing.size(); ++i) {
        auto it = done.find(listing[i].pair_id);
        if (it != done.end()) {
            results[i] = std::move(it->second);
        } else {
            pending.push_back(i);
        }
    }

    std::ofstream checkpoint(checkpoint_path,
                             std::ios::binary | (cfg.resume ? std::ios::app : std::ios::trunc));
    if (!checkpoint) throw IoError("cannot write " + checkpoint_path.string());
    std::mutex writer;
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size()) return;
            const std::size_t i = pending[k];
            AnnotationRecord r;
            try {
                r = annotate_pair(listing[i], base_dir, out_dir, cfg);
            } catch (const std::exception& e) {
                r.pair_id = listing[i].pair_id;
                r.original_path = listing[i].original_path;
                r.edited_path = listing[i].edited_path;
                r.editing_task = listing[i].editing_task;
                r.seeds = Seeds{cfg.align.ransac.seed, cfg.split_seed};
                fail(r, "internal", e.what());
            }
            {
                std::lock_guard lock(writer);
                checkpoint << record_to_json(r).dump() << '\n';
                checkpoint.flush();
            }
            results[i] = std::move(r);
        }
    };

    const int n_threads =
        static_cast<int>(std::min<std::size_t>(cfg.workers, std::max<std::size_t>(1, pending.size())));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    checkpoint.close();

    DatasetManifest manifest;
    for (auto& r : results) manifest.records.push_back(std::move(*r));
    std::sort(manifest.records.begin(), manifest.records.end(),
              [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
    assign_splits(manifest.records, cfg.split_ratio, cfg.split_seed);
    manifest.config = config_to_json(cfg);
    manifest.summary = summarize(manifest.records);
    manifest.content_hash = fnv1a_hex(manifest_text(manifest.records, false));

    write_text(out_dir / "manifest.jsonl", manifest_text(manifest.records, true));
    nlohmann::ordered_json summary;
    summary["config"] = manifest.config;
    summary["summary"] = summary_json(manifest.summary);
    summary["content_hash"] = manifest.content_hash;
    write_text(out_dir / "summary.json", summary.dump(2) + "\n");
    fs::remove(checkpoint_path, ec);
    return manifest;
}

}  // namespace forgemask::pipeline
