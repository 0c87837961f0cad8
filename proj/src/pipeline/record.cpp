#include "forgemask/pipeline/record.hpp"

#include "forgemask/error.hpp"

namespace forgemask::pipeline {

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::accepted: return "accepted";
        case Verdict::rejected: return "rejected";
        case Verdict::failed: return "failed";
    }
    return "failed";
}

const char* to_string(Split s) noexcept {
    switch (s) {
        case Split::none: return "none";
        case Split::train: return "train";
        case Split::test: return "test";
    }
    return "none";
}

Verdict parse_verdict(const std::string& s) {
    if (s == "accepted") return Verdict::accepted;
    if (s == "rejected") return Verdict::rejected;
    if (s == "failed") return Verdict::failed;
    throw ParameterError("unknown verdict '" + s + "'");
}

Split parse_split(const std::string& s) {
    if (s == "none") return Split::none;
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw ParameterError("unknown split '" + s + "'");
}

namespace {

ordered_json transform_json(const std::optional<alignment::AffineTransform>& t) {
    if (!t) return nullptr;
    return ordered_json(t->a);
}

std::optional<alignment::AffineTransform> transform_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    alignment::AffineTransform t;
    t.a = j.get<std::array<double, 6>>();
    return t;
}

template <typename T>
ordered_json opt(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

}  // namespace

ordered_json alignment_stats_to_json(const alignment::AlignmentStats& s) {
    ordered_json j;
    j["keypoints_original"] = s.keypoints_original;
    j["keypoints_edited"] = s.keypoints_edited;
    j["matches"] = opt(s.matches);
    j["inliers"] = opt(s.inliers);
    j["inlier_ratio"] = opt(s.inlier_ratio);
    j["coarse"] = transform_json(s.coarse);
    j["refined"] = transform_json(s.refined);
    j["refinement_applied"] = s.refinement_applied;
    if (s.crop) {
        j["crop"] = {{"x", s.crop->x}, {"y", s.crop->y}, {"w", s.crop->w}, {"h", s.crop->h}};
    } else {
        j["crop"] = nullptr;
    }
    return j;
}

alignment::AlignmentStats alignment_stats_from_json(const nlohmann::json& j) {
    alignment::AlignmentStats s;
    s.keypoints_original = j.at("keypoints_original").get<int>();
    s.keypoints_edited = j.at("keypoints_edited").get<int>();
    s.matches = opt_from<int>(j, "matches");
    s.inliers = opt_from<int>(j, "inliers");
    s.inlier_ratio = opt_from<double>(j, "inlier_ratio");
    s.coarse = transform_from(j.at("coarse"));
    s.refined = transform_from(j.at("refined"));
    s.refinement_applied = j.at("refinement_applied").get<bool>();
    if (!j.at("crop").is_null()) {
        const auto& c = j.at("crop");
        s.crop = Rect{c.at("x").get<int>(), c.at("y").get<int>(), c.at("w").get<int>(),
                      c.at("h").get<int>()};
    }
    return s;
}

ordered_json record_to_json(const AnnotationRecord& r, bool include_timing) {
    ordered_json j;
    j["pair_id"] = r.pair_id;
    j["original_path"] = r.original_path;
    j["edited_path"] = r.edited_path;
    j["editing_task"] = r.editing_task;
    j["verdict"] = to_string(r.verdict);
    j["reason"] = r.reason;
    j["detail"] = r.detail;
    j["alignment"] = r.alignment ? alignment_stats_to_json(*r.alignment) : ordered_json(nullptr);
    if (r.mask) {
        j["mask"] = {{"threshold", r.mask->threshold},
                     {"edited_fraction", r.mask->edited_fraction},
                     {"feature_source", r.mask->feature_source},
                     {"grid_h", r.mask->grid_h},
                     {"grid_w", r.mask->grid_w}};
    } else {
        j["mask"] = nullptr;
    }
    j["mask_path"] = opt(r.mask_path);
    j["split"] = to_string(r.split);
    j["tool_version"] = r.tool_version;
    j["seeds"] = {{"ransac", r.seeds.ransac}, {"split", r.seeds.split}};
    if (include_timing) {
        if (r.timing.present) {
            j["timing"] = {{"io", r.timing.io},
                           {"alignment", r.timing.alignment},
                           {"features", r.timing.features},
                           {"similarity", r.timing.similarity}};
        } else {
            j["timing"] = nullptr;
        }
    }
    return j;
}

AnnotationRecord record_from_json(const nlohmann::json& j) {
    AnnotationRecord r;
    r.pair_id = j.at("pair_id").get<std::string>();
    r.original_path = j.at("original_path").get<std::string>();
    r.edited_path = j.at("edited_path").get<std::string>();
    r.editing_task = j.at("editing_task").get<std::string>();
    r.verdict = parse_verdict(j.at("verdict").get<std::string>());
    r.reason = j.at("reason").get<std::string>();
    r.detail = j.at("detail").get<std::string>();
    if (!j.at("alignment").is_null()) r.alignment = alignment_stats_from_json(j.at("alignment"));
    if (!j.at("mask").is_null()) {
        const auto& m = j.at("mask");
        r.mask = MaskSummary{m.at("threshold").get<double>(), m.at("edited_fraction").get<double>(),
                             m.at("feature_source").get<std::string>(), m.at("grid_h").get<int>(),
                             m.at("grid_w").get<int>()};
    }
    r.mask_path = opt_from<std::string>(j, "mask_path");
    r.split = parse_split(j.at("split").get<std::string>());
    r.tool_version = j.at("tool_version").get<std::string>();
    r.seeds.ransac = j.at("seeds").at("ransac").get<std::uint64_t>();
    r.seeds.split = j.at("seeds").at("split").get<std::uint64_t>();
    if (j.contains("timing") && !j.at("timing").is_null()) {
        const auto& t = j.at("timing");
        r.timing = StageTimes{t.at("io").get<double>(), t.at("alignment").get<double>(),
                              t.at("features").get<double>(), t.at("similarity").get<double>(), true};
    }
    return r;
}

}  // namespace forgemask::pipeline
