#pragma once

#include "forgemask/pipeline/record.hpp"

#include <span>
#include <string>
#include <vector>

namespace forgemask::pipeline {

struct StageShare {
    std::string stage;
    double seconds = 0.0;
    double percent = 0.0;
};

struct ProfileReport {
    /// alignment, feature_extraction, similarity_threshold, io, in that order.
    std::vector<StageShare> stages;
    double total_seconds = 0.0;
    /// Set when some record lacks timings or the total is zero.
    bool partial = false;
    std::size_t records_without_timing = 0;
};

ProfileReport profile_times(std::span<const StageTimes> times);
ProfileReport profile_run(std::span<const AnnotationRecord> records);

}  // namespace forgemask::pipeline
