#pragma once

#include "forgemask/semanticmask/edit_mask.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace forgemask::evalmetrics {

/// Pixel counts with the forged class as positive.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

enum class Aggregation { none, macro, micro };

const char* to_string(Aggregation mode) noexcept;
/// Parses "macro" / "micro"; throws ParameterError otherwise.
Aggregation parse_aggregation(const std::string& s);

/// Forged-class metrics. A metric whose denominator is zero is reported as 0.
struct MetricReport {
    double f1 = 0.0;
    double iou = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    ConfusionCounts counts;
    Aggregation mode = Aggregation::none;
};

MetricReport metrics_from_counts(const ConfusionCounts& c);

/// Throws ParameterError when the masks differ in size.
ConfusionCounts confusion(const semanticmask::EditMask& pred, const semanticmask::EditMask& truth);

MetricReport score_masks(const semanticmask::EditMask& pred, const semanticmask::EditMask& truth);

/// macro: unweighted mean of each metric (counts are summed for reference).
/// micro: metrics recomputed from summed counts. Throws on an empty list.
MetricReport aggregate(std::span<const MetricReport> reports, Aggregation mode);

}  // namespace forgemask::evalmetrics
