#include "forgemask/evalmetrics/robustness.hpp"

#include "forgemask/imagecore/codec.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>

namespace forgemask::evalmetrics {

using semanticmask::EditMask;

ImageBuffer perturb_jpeg(const ImageBuffer& img, int quality) { return jpeg_reencode(img, quality); }

Rect crop_window_size(int width, int height, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ParameterError("crop fraction must lie in (0, 1)");
    }
    const double side = std::sqrt(1.0 - fraction);
    // The epsilon keeps exact products such as 0.9 * 100 from flooring to 89.
    const int w = std::max(1, static_cast<int>(std::floor(side * width + 1e-9)));
    const int h = std::max(1, static_cast<int>(std::floor(side * height + 1e-9)));
    return {0, 0, std::min(w, width), std::min(h, height)};
}

namespace {

// Mask pixel i of the cropped output samples the window centre of that pixel,
// mapped back into the source mask grid.
int window_source(int i, int out, int offset, int extent, int image_size, int mask_size) {
    const long long num = (2LL * offset * out + (2LL * i + 1) * extent) * mask_size;
    const long long s = num / (2LL * out * image_size);
    return static_cast<int>(std::clamp<long long>(s, 0, mask_size - 1));
}

EditMask crop_mask(const EditMask& mask, const Rect& window, int image_w, int image_h) {
    const int mw = mask.width(), mh = mask.height();
    EditMask out(mw, mh);
    for (int y = 0; y < mh; ++y) {
        const int sy = window_source(y, mh, window.y, window.h, image_h, mh);
        for (int x = 0; x < mw; ++x) {
            const int sx = window_source(x, mw, window.x, window.w, image_w, mw);
            out.set(x, y, mask.at(sx, sy) != 0);
        }
    }
    return out;
}

}  // namespace

CropResult perturb_crop(const ImageBuffer& img, const EditMask& mask, double fraction,
                        std::uint64_t seed) {
    Rect window = crop_window_size(img.width(), img.height(), fraction);
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < kCropAttempts; ++attempt) {
        window.x = static_cast<int>(rng() % static_cast<std::uint64_t>(img.width() - window.w + 1));
        window.y = static_cast<int>(rng() % static_cast<std::uint64_t>(img.height() - window.h + 1));
        EditMask cropped = crop_mask(mask, window, img.width(), img.height());
        const std::size_t edited = cropped.edited_count();
        if (edited == 0 || edited == cropped.size()) continue;
        return {crop(img, window), std::move(cropped), window};
    }
    throw PerturbationFailure("no crop window kept both forged and real pixels after " +
                              std::to_string(kCropAttempts) + " attempts");
}

std::vector<PerturbationSetting> default_robustness_grid() {
    std::vector<PerturbationSetting> grid;
    for (int q : {90, 80, 70, 60}) grid.push_back({"J" + std::to_string(q), q, std::nullopt});
    for (int pct : {10, 20, 30, 40}) {
        grid.push_back({"C" + std::to_string(pct) + "%", std::nullopt, pct / 100.0});
    }
    grid.push_back({"J80+C20%", 80, 0.20});
    return grid;
}

std::uint64_t sweep_item_seed(std::uint64_t base, std::size_t item_index) {
    // splitmix64 step so neighbouring items get unrelated streams.
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (item_index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

PerturbedItem apply_setting(const SweepItem& item, const PerturbationSetting& setting,
                            std::uint64_t seed) {
    PerturbedItem out{item.image, item.truth};
    if (setting.crop_fraction) {
        CropResult c = perturb_crop(out.image, out.truth, *setting.crop_fraction, seed);
        out.image = std::move(c.image);
        out.truth = std::move(c.mask);
    }
    if (setting.jpeg_quality) out.image = perturb_jpeg(out.image, *setting.jpeg_quality);
    return out;
}

std::vector<SweepRow> robustness_sweep(const std::vector<SweepItem>& items,
                                       const MaskPredictor& predictor,
                                       const std::vector<PerturbationSetting>& grid,
                                       const SweepConfig& cfg) {
    std::vector<SweepRow> rows;
    for (const auto& setting : grid) {
        SweepRow row;
        row.setting = setting.name;
        std::vector<MetricReport> reports;
        for (std::size_t i = 0; i < items.size(); ++i) {
            try {
                const PerturbedItem p = apply_setting(items[i], setting, sweep_item_seed(cfg.seed, i));
                auto pred = predictor(p.image, items[i].id, setting);
                if (!pred) {
                    row.complete = false;
                    continue;
                }
                if (pred->width() != p.truth.width() || pred->height() != p.truth.height()) {
                    *pred = semanticmask::resize_mask(*pred, p.truth.width(), p.truth.height());
                }
                reports.push_back(score_masks(*pred, p.truth));
            } catch (const std::exception&) {
                row.complete = false;
            }
        }
        row.n_items = reports.size();
        if (!reports.empty()) {
            row.report = aggregate(reports, cfg.mode);
        } else {
            row.report.mode = cfg.mode;
            row.complete = false;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "setting,f1,iou,precision,recall,tp,fp,fn,tn,n_items,complete\n";
    const auto old_flags = out.flags();
    const auto old_precision = out.precision();
    out << std::fixed << std::setprecision(6);
    for (const auto& r : rows) {
        const auto& m = r.report;
        out << r.setting << ',' << m.f1 << ',' << m.iou << ',' << m.precision << ',' << m.recall
            << ',' << m.counts.tp << ',' << m.counts.fp << ',' << m.counts.fn << ',' << m.counts.tn
            << ',' << r.n_items << ',' << (r.complete ? "true" : "false") << '\n';
    }
    out.flags(old_flags);
    out.precision(old_precision);
}

}  // namespace forgemask::evalmetrics
