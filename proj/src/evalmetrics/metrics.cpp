#include "forgemask/evalmetrics/metrics.hpp"

#include "forgemask/error.hpp"

namespace forgemask::evalmetrics {

const char* to_string(Aggregation mode) noexcept {
    switch (mode) {
        case Aggregation::none: return "none";
        case Aggregation::macro: return "macro";
        case Aggregation::micro: return "micro";
    }
    return "none";
}

Aggregation parse_aggregation(const std::string& s) {
    if (s == "macro") return Aggregation::macro;
    if (s == "micro") return Aggregation::micro;
    throw ParameterError("unknown aggregation mode '" + s + "' (expected macro or micro)");
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricReport metrics_from_counts(const ConfusionCounts& c) {
    MetricReport r;
    r.counts = c;
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    r.iou = ratio(c.tp, c.tp + c.fp + c.fn);
    // 2PR/(P+R) written over counts: 2tp / (2tp + fp + fn).
    r.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
    return r;
}

ConfusionCounts confusion(const semanticmask::EditMask& pred, const semanticmask::EditMask& truth) {
    if (pred.width() != truth.width() || pred.height() != truth.height()) {
        throw ParameterError("prediction and truth masks differ in size");
    }
    ConfusionCounts c;
    const auto p = pred.bits(), t = truth.bits();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i]) {
            t[i] ? ++c.tp : ++c.fp;
        } else {
            t[i] ? ++c.fn : ++c.tn;
        }
    }
    return c;
}

MetricReport score_masks(const semanticmask::EditMask& pred, const semanticmask::EditMask& truth) {
    return metrics_from_counts(confusion(pred, truth));
}

MetricReport aggregate(std::span<const MetricReport> reports, Aggregation mode) {
    if (reports.empty()) throw ParameterError("cannot aggregate an empty report list");
    if (mode == Aggregation::none) throw ParameterError("aggregation mode must be macro or micro");
    ConfusionCounts sum;
    for (const auto& r : reports) sum += r.counts;

    MetricReport out;
    if (mode == Aggregation::micro) {
        out = metrics_from_counts(sum);
    } else {
        const double n = static_cast<double>(reports.size());
        for (const auto& r : reports) {
            out.f1 += r.f1;
            out.iou += r.iou;
            out.precision += r.precision;
            out.recall += r.recall;
        }
        out.f1 /= n;
        out.iou /= n;
        out.precision /= n;
        out.recall /= n;
        out.counts = sum;
    }
    out.mode = mode;
    return out;
}

}  // namespace forgemask::evalmetrics
