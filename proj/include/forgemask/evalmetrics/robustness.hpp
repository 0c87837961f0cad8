#pragma once

#include "forgemask/error.hpp"
#include "forgemask/evalmetrics/metrics.hpp"
#include "forgemask/imagecore/image.hpp"
#include "forgemask/semanticmask/edit_mask.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace forgemask::evalmetrics {

class PerturbationFailure : public Error {
public:
    using Error::Error;
};

/// JPEG recompression at `quality` (delegates to jpeg_reencode).
ImageBuffer perturb_jpeg(const ImageBuffer& img, int quality);

struct CropResult {
    ImageBuffer image;
    semanticmask::EditMask mask;
    Rect window;
};

inline constexpr int kCropAttempts = 32;

/// Window side lengths for removing `fraction` of the area while keeping the
/// aspect ratio: floor(sqrt(1 - fraction) * side), at least 1.
Rect crop_window_size(int width, int height, double fraction);

/// Random crop removing `fraction` of the area. The mask (any resolution) is
/// cropped with the geometrically matching window and resampled to its
/// original resolution. Windows whose mask loses every forged or every real
/// pixel are redrawn up to kCropAttempts times, then PerturbationFailure.
CropResult perturb_crop(const ImageBuffer& img, const semanticmask::EditMask& mask, double fraction,
                        std::uint64_t seed);

/// One robustness setting. Crop (when set) is applied before JPEG.
struct PerturbationSetting {
    std::string name;
    std::optional<int> jpeg_quality;
    std::optional<double> crop_fraction;
};

/// J90/J80/J70/J60, C10%..C40%, and the combined J80 + C20%.
std::vector<PerturbationSetting> default_robustness_grid();

struct SweepItem {
    std::string id;
    ImageBuffer image;
    semanticmask::EditMask truth;
};

/// Predicts a mask for a perturbed image. nullopt or a thrown exception marks a failure.
using MaskPredictor = std::function<std::optional<semanticmask::EditMask>(
    const ImageBuffer& image, const std::string& item_id, const PerturbationSetting& setting)>;

/// Per-item seed derived from the sweep seed.
std::uint64_t sweep_item_seed(std::uint64_t base, std::size_t item_index);

struct PerturbedItem {
    ImageBuffer image;
    semanticmask::EditMask truth;
};

/// Applies one setting to one item; robustness_sweep uses
/// sweep_item_seed(cfg.seed, index) as `seed`.
PerturbedItem apply_setting(const SweepItem& item, const PerturbationSetting& setting,
                            std::uint64_t seed);

struct SweepRow {
    std::string setting;
    MetricReport report;
    std::size_t n_items = 0;
    /// False when at least one item failed to perturb or predict.
    bool complete = true;
};

struct SweepConfig {
    Aggregation mode = Aggregation::micro;
    std::uint64_t seed = 0x5EED;
};

/// Scores `predictor` on every item under every setting. Predictions are
/// compared at the truth resolution (nearest-neighbour resize when needed).
std::vector<SweepRow> robustness_sweep(const std::vector<SweepItem>& items,
                                       const MaskPredictor& predictor,
                                       const std::vector<PerturbationSetting>& grid,
                                       const SweepConfig& cfg = {});

/// CSV: setting,f1,iou,precision,recall,tp,fp,fn,tn,n_items,complete
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace forgemask::evalmetrics
