#pragma once

#include "forgemask/alignment/align.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace forgemask::pipeline {

inline constexpr const char* kToolVersion = "forgemask 0.1.0";

enum class Verdict { accepted, rejected, failed };
enum class Split { none, train, test };

const char* to_string(Verdict v) noexcept;
const char* to_string(Split s) noexcept;
Verdict parse_verdict(const std::string& s);
Split parse_split(const std::string& s);

/// Wall-clock seconds per stage. Not part of a record's deterministic content.
struct StageTimes {
    double io = 0.0;
    double alignment = 0.0;
    double features = 0.0;
    double similarity = 0.0;
    bool present = false;
};

struct MaskSummary {
    double threshold = 0.0;
    double edited_fraction = 0.0;
    std::string feature_source;
    int grid_h = 0;
    int grid_w = 0;
};

struct Seeds {
    std::uint64_t ransac = 0;
    std::uint64_t split = 0;
};

/// Provenance of one (original, edited) pair.
struct AnnotationRecord {
    std::string pair_id;
    std::string original_path;
    std::string edited_path;
    std::string editing_task;

    Verdict verdict = Verdict::failed;
    /// rejected: the gate criterion; failed: "<component>:<stage>", e.g. "alignment:detection".
    std::string reason;
    std::string detail;

    std::optional<alignment::AlignmentStats> alignment;
    std::optional<MaskSummary> mask;
    /// Relative to the dataset directory; set only for accepted records.
    std::optional<std::string> mask_path;

    Split split = Split::none;
    std::string tool_version = kToolVersion;
    Seeds seeds;
    StageTimes timing;
};

using ordered_json = nlohmann::ordered_json;

/// Key order is fixed. `timing` is emitted only when include_timing is set.
ordered_json record_to_json(const AnnotationRecord& r, bool include_timing = true);
AnnotationRecord record_from_json(const nlohmann::json& j);

ordered_json alignment_stats_to_json(const alignment::AlignmentStats& s);
alignment::AlignmentStats alignment_stats_from_json(const nlohmann::json& j);

}  // namespace forgemask::pipeline
