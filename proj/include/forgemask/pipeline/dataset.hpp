#pragma once

#include "forgemask/alignment/align.hpp"
#include "forgemask/pipeline/quality_gate.hpp"
#include "forgemask/pipeline/record.hpp"
#include "forgemask/semanticmask/annotate.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace forgemask::pipeline {

/// One listing row. Relative image paths resolve against the listing's directory.
struct ListingRow {
    std::string pair_id;
    std::string original_path;
    std::string edited_path;
    std::string editing_task;
};

/// CSV with header pair_id,original_path,edited_path,editing_task (any column
/// order, RFC 4180 quoting). Throws IoError / ParameterError; pair ids must be
/// unique and filename-safe ([A-Za-z0-9._-]).
std::vector<ListingRow> read_listing(const std::filesystem::path& path);

struct FeatureSpec {
    /// Patch size for the built-in extractor; ignored when fmap_dir is set.
    int patch_size = 16;
    /// Directory of precomputed features named <pair_id>.original.fmap and
    /// <pair_id>.edited.fmap, computed on the aligned images.
    std::optional<std::filesystem::path> fmap_dir;

    std::string describe() const;
};

struct PipelineConfig {
    alignment::AlignConfig align;
    QualityGateConfig gate;
    FeatureSpec features;
    semanticmask::AnnotateConfig annotate;
    double split_ratio = 0.95;
    std::uint64_t split_seed = 0x5EED;
    int workers = 1;
    /// Skip pairs already recorded in <out>/checkpoint.jsonl.
    bool resume = false;
};

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);

/// Aligns, gates and annotates one pair, writing <out_dir>/masks/<pair_id>.png
/// when accepted. Never throws for per-pair problems; they end up in the record.
AnnotationRecord annotate_pair(const ListingRow& row, const std::filesystem::path& base_dir,
                               const std::filesystem::path& out_dir, const PipelineConfig& cfg);

struct DatasetSummary {
    std::size_t total = 0;
    std::map<std::string, std::size_t> by_verdict;
    std::map<std::string, std::size_t> by_reason;
    std::map<std::string, std::map<std::string, std::size_t>> by_task;
    std::map<std::string, std::size_t> by_split;
};

struct DatasetManifest {
    std::vector<AnnotationRecord> records;
    nlohmann::ordered_json config;
    DatasetSummary summary;
    /// FNV-1a 64 over the manifest lines without timing.
    std::string content_hash;
};

/// Shuffles accepted records (in pair_id order) with `seed` and assigns the
/// first round(n * ratio) to train, the rest to test. Others get Split::none.
void assign_splits(std::vector<AnnotationRecord>& records, double ratio, std::uint64_t seed);

DatasetSummary summarize(const std::vector<AnnotationRecord>& records);

/// Manifest text, one JSON record per line, records in pair_id order.
std::string manifest_text(const std::vector<AnnotationRecord>& records, bool include_timing);

/// Processes every listing row with cfg.workers threads and writes
/// masks/<pair_id>.png, manifest.jsonl and summary.json under out_dir.
DatasetManifest build_dataset(const std::filesystem::path& listing_path,
                              const std::filesystem::path& out_dir, const PipelineConfig& cfg);

/// Reads manifest.jsonl.
std::vector<AnnotationRecord> read_manifest(const std::filesystem::path& path);

}  // namespace forgemask::pipeline
