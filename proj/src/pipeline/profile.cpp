#include "forgemask/pipeline/profile.hpp"

namespace forgemask::pipeline {

ProfileReport profile_times(std::span<const StageTimes> times) {
    ProfileReport report;
    double align = 0.0, features = 0.0, similarity = 0.0, io = 0.0;
    for (const auto& t : times) {
        if (!t.present) {
            ++report.records_without_timing;
            continue;
        }
        align += t.alignment;
        features += t.features;
        similarity += t.similarity;
        io += t.io;
    }
    report.total_seconds = align + features + similarity + io;
    report.partial = report.records_without_timing > 0 || !(report.total_seconds > 0.0);
    const auto share = [&](double s) {
        return report.total_seconds > 0.0 ? 100.0 * s / report.total_seconds : 0.0;
    };
    report.stages = {{"alignment", align, share(align)},
                     {"feature_extraction", features, share(features)},
                     {"similarity_threshold", similarity, share(similarity)},
                     {"io", io, share(io)}};
    return report;
}

ProfileReport profile_run(std::span<const AnnotationRecord> records) {
    std::vector<StageTimes> times;
    times.reserve(records.size());
    for (const auto& r : records) times.push_back(r.timing);
    return profile_times(times);
}

}  // namespace forgemask::pipeline
