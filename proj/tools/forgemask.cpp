// forgemask command-line front end.

#include "forgemask/alignment/align.hpp"
#include "forgemask/evalmetrics/metrics.hpp"
#include "forgemask/evalmetrics/robustness.hpp"
#include "forgemask/imagecore/codec.hpp"
#include "forgemask/losses/losses.hpp"
#include "forgemask/pipeline/dataset.hpp"
#include "forgemask/pipeline/profile.hpp"
#include "forgemask/semanticmask/annotate.hpp"
#include "forgemask/semanticmask/feature_file.hpp"

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace forgemask;

namespace {

semanticmask::EditMask load_mask(const fs::path& p) {
    return semanticmask::EditMask::from_image(load_image(p));
}

ordered_json report_json(const evalmetrics::MetricReport& r) {
    return {{"f1", r.f1},
            {"iou", r.iou},
            {"precision", r.precision},
            {"recall", r.recall},
            {"tp", r.counts.tp},
            {"fp", r.counts.fp},
            {"fn", r.counts.fn},
            {"tn", r.counts.tn},
            {"aggregate", evalmetrics::to_string(r.mode)}};
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

std::string expand_template(std::string tmpl, const std::map<std::string, std::string>& vars) {
    for (const auto& [key, value] : vars) {
        const std::string token = "{" + key + "}";
        for (auto pos = tmpl.find(token); pos != std::string::npos;
             pos = tmpl.find(token, pos + value.size())) {
            tmpl.replace(pos, token.size(), value);
        }
    }
    return tmpl;
}

// Parses "builtin" or "fmap-dir:PATH".
pipeline::FeatureSpec parse_feature_spec(const std::string& s, int patch) {
    pipeline::FeatureSpec spec;
    spec.patch_size = patch;
    const std::string prefix = "fmap-dir:";
    if (s == "builtin") return spec;
    if (s.rfind(prefix, 0) == 0 && s.size() > prefix.size()) {
        spec.fmap_dir = fs::path(s.substr(prefix.size()));
        return spec;
    }
    throw ParameterError("--features must be 'builtin' or 'fmap-dir:PATH'");
}

struct AlignOptions {
    double ratio = alignment::kDefaultRatio;
    int iterations = 2000;
    double reproj = 3.0;
    std::uint64_t seed = 0x5EED;

    void add_to(CLI::App* app) {
        app->add_option("--ratio", ratio, "Lowe ratio-test threshold")->capture_default_str();
        app->add_option("--ransac-iters", iterations, "RANSAC iterations")->capture_default_str();
        app->add_option("--reproj-px", reproj, "RANSAC inlier threshold in pixels")
            ->capture_default_str();
        app->add_option("--seed", seed, "RANSAC seed")->capture_default_str();
    }

    alignment::AlignConfig config() const {
        alignment::AlignConfig cfg;
        cfg.ratio = ratio;
        cfg.ransac.iterations = iterations;
        cfg.ransac.reproj_threshold = reproj;
        cfg.ransac.seed = seed;
        return cfg;
    }
};

int run_align(const fs::path& original, const fs::path& edited, const fs::path& out_dir,
              const AlignOptions& opts) {
    const auto a = load_image(original);
    const auto b = load_image(edited);
    try {
        const auto aligned = alignment::align_pair(a, b, opts.config());
        fs::create_directories(out_dir);
        save_png(out_dir / "aligned_original.png", aligned.original);
        save_png(out_dir / "aligned_edited.png", aligned.edited);
        const auto j = pipeline::alignment_stats_to_json(aligned.stats);
        std::ofstream(out_dir / "alignment.json") << j.dump(2) << '\n';
        std::cout << j.dump(2) << '\n';
        return 0;
    } catch (const alignment::AlignmentFailure& e) {
        ordered_json j;
        j["error"] = e.what();
        j["stage"] = alignment::to_string(e.stage());
        j["partial"] = pipeline::alignment_stats_to_json(e.partial_stats());
        std::cout << j.dump(2) << '\n';
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edited-region mask annotation for image-editing pairs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pipeline::kToolVersion);

    // align
    auto* align = app.add_subcommand("align", "Align an edited image to its original");
    fs::path al_original, al_edited, al_out;
    AlignOptions al_opts;
    align->add_option("--original", al_original)->required()->check(CLI::ExistingFile);
    align->add_option("--edited", al_edited)->required()->check(CLI::ExistingFile);
    align->add_option("--out-dir", al_out)->required();
    al_opts.add_to(align);

    // annotate
    auto* annotate = app.add_subcommand("annotate", "Compute the edited-region mask of a pair");
    fs::path an_original, an_edited, an_fa, an_fb, an_mask;
    bool an_builtin = false, an_align = false;
    int an_patch = 16;
    AlignOptions an_opts;
    annotate->add_option("--original", an_original)->required()->check(CLI::ExistingFile);
    annotate->add_option("--edited", an_edited)->required()->check(CLI::ExistingFile);
    auto* opt_fa = annotate->add_option("--features-a", an_fa, "FMAP of the original")
                       ->check(CLI::ExistingFile);
    auto* opt_fb = annotate->add_option("--features-b", an_fb, "FMAP of the edited image")
                       ->check(CLI::ExistingFile);
    opt_fa->needs(opt_fb);
    opt_fb->needs(opt_fa);
    auto* opt_builtin = annotate->add_flag("--builtin-features", an_builtin);
    opt_builtin->excludes(opt_fa)->excludes(opt_fb);
    annotate->add_option("--patch", an_patch, "Builtin feature patch size")->capture_default_str();
    annotate->add_flag("--align", an_align, "Align the inputs first (otherwise they must already be aligned)");
    annotate->add_option("--mask-out", an_mask)->required();
    an_opts.add_to(annotate);

    // loss
    auto* loss = app.add_subcommand("loss", "Evaluate the training losses on one sample");
    fs::path lo_features, lo_mask, lo_pred;
    double lo_tau = 0.1;
    std::size_t lo_cap = losses::kDefaultSampleCap;
    std::uint64_t lo_seed = 0x5EED;
    loss->add_option("--features", lo_features, "FMAP pixel features")->required()->check(CLI::ExistingFile);
    loss->add_option("--mask", lo_mask, "Ground-truth mask PNG")->required()->check(CLI::ExistingFile);
    loss->add_option("--pred", lo_pred, "Predicted probability PNG (default: uniform 0.5)")
        ->check(CLI::ExistingFile);
    loss->add_option("--tau", lo_tau)->capture_default_str();
    loss->add_option("--cap", lo_cap, "Samples per class")->capture_default_str();
    loss->add_option("--seed", lo_seed)->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
    fs::path ev_pred, ev_truth;
    std::string ev_mode = "micro";
    eval->add_option("--pred-dir", ev_pred)->required()->check(CLI::ExistingDirectory);
    eval->add_option("--truth-dir", ev_truth)->required()->check(CLI::ExistingDirectory);
    eval->add_option("--aggregate", ev_mode)->check(CLI::IsMember({"macro", "micro"}))->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Robustness sweep over JPEG and crop perturbations");
    fs::path sw_manifest, sw_base, sw_out;
    std::string sw_cmd, sw_grid = "default", sw_mode = "micro";
    std::uint64_t sw_seed = 0x5EED;
    sweep->add_option("--manifest", sw_manifest)->required()->check(CLI::ExistingFile);
    sweep->add_option("--pred-cmd", sw_cmd,
                      "Command template; {image}, {out}, {id} and {setting} are substituted")
        ->required();
    sweep->add_option("--grid", sw_grid)->check(CLI::IsMember({"default"}))->capture_default_str();
    sweep->add_option("--base-dir", sw_base, "Directory the listing paths are relative to");
    sweep->add_option("--out", sw_out, "CSV output (default: stdout)");
    sweep->add_option("--aggregate", sw_mode)->check(CLI::IsMember({"macro", "micro"}))->capture_default_str();
    sweep->add_option("--seed", sw_seed)->capture_default_str();

    // build
    auto* build = app.add_subcommand("build", "Build an annotated dataset from a listing CSV");
    fs::path bu_listing, bu_out;
    pipeline::PipelineConfig bu_cfg;
    std::string bu_features = "builtin";
    int bu_patch = 16;
    AlignOptions bu_opts;
    build->add_option("--listing", bu_listing)->required()->check(CLI::ExistingFile);
    build->add_option("--out", bu_out)->required();
    build->add_option("--split", bu_cfg.split_ratio, "Train fraction")->capture_default_str();
    build->add_option("--split-seed", bu_cfg.split_seed)->capture_default_str();
    build->add_option("--gate-keypoints", bu_cfg.gate.min_keypoints)->capture_default_str();
    build->add_option("--gate-matches", bu_cfg.gate.min_matches)->capture_default_str();
    build->add_option("--gate-inliers", bu_cfg.gate.min_inlier_ratio)->capture_default_str();
    build->add_option("--workers", bu_cfg.workers)->capture_default_str();
    build->add_option("--features", bu_features, "builtin | fmap-dir:PATH")->capture_default_str();
    build->add_option("--patch", bu_patch, "Builtin feature patch size")->capture_default_str();
    build->add_flag("--resume", bu_cfg.resume, "Continue from the checkpoint of an interrupted run");
    bu_opts.add_to(build);

    // profile
    auto* profile = app.add_subcommand("profile", "Per-stage time breakdown of a build");
    fs::path pr_manifest;
    profile->add_option("--manifest", pr_manifest)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*align) return run_align(al_original, al_edited, al_out, al_opts);

        if (*annotate) {
            auto a = load_image(an_original);
            auto b = load_image(an_edited);
            if (an_align) {
                auto aligned = alignment::align_pair(a, b, an_opts.config());
                a = std::move(aligned.original);
                b = std::move(aligned.edited);
            } else if (a.channels() != b.channels()) {
                a = to_rgb(a);
                b = to_rgb(b);
            }
            semanticmask::FeatureSource source = semanticmask::BuiltinFeatures{an_patch};
            if (!an_fa.empty()) {
                source = semanticmask::PrecomputedFeatures{semanticmask::load_feature_file(an_fa),
                                                           semanticmask::load_feature_file(an_fb)};
            }
            const auto result = semanticmask::annotate_masks(a, b, source);
            save_png(an_mask, result.mask.to_image());
            ordered_json j{{"threshold", result.stats.threshold},
                           {"edited_fraction", result.stats.edited_fraction},
                           {"feature_source", result.stats.feature_source},
                           {"grid_h", result.stats.grid_h},
                           {"grid_w", result.stats.grid_w},
                           {"mask", an_mask.string()}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*loss) {
            const auto features = semanticmask::load_feature_file(lo_features);
            const auto truth = load_mask(lo_mask);
            const auto grid_mask = semanticmask::resize_mask(
                truth, static_cast<int>(features.grid_w()), static_cast<int>(features.grid_h()));
            const auto set = losses::sample_pixels(features, grid_mask, lo_cap, lo_seed, lo_tau);

            losses::MaskPair pair;
            pair.truth.assign(truth.bits().begin(), truth.bits().end());
            if (lo_pred.empty()) {
                pair.predicted.assign(truth.size(), 0.5);
            } else {
                const auto pred = to_grayscale(load_image(lo_pred));
                if (pred.width() != truth.width() || pred.height() != truth.height()) {
                    throw ParameterError("--pred and --mask differ in size");
                }
                for (auto v : pred.data()) pair.predicted.push_back(v / 255.0);
            }
            const double lc = losses::contrastive_loss(set);
            const double ld = losses::dice_loss(pair);
            const double lf = losses::focal_loss(pair);
            ordered_json j{{"contrastive", lc},
                           {"dice", ld},
                           {"focal", lf},
                           {"total", losses::total_loss(lc, ld, lf)},
                           {"n_forged", set.forged.size()},
                           {"n_real", set.real.size()},
                           {"tau", lo_tau},
                           {"prediction", lo_pred.empty() ? "uniform-0.5" : lo_pred.string()}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*eval) {
            std::vector<evalmetrics::MetricReport> reports;
            ordered_json per_item = ordered_json::object();
            std::vector<fs::path> truths;
            for (const auto& entry : fs::directory_iterator(ev_truth)) {
                if (entry.is_regular_file() && entry.path().extension() == ".png") {
                    truths.push_back(entry.path());
                }
            }
            std::sort(truths.begin(), truths.end());
            for (const auto& t : truths) {
                const fs::path p = ev_pred / t.filename();
                if (!fs::exists(p)) throw IoError("missing prediction " + p.string());
                auto truth = load_mask(t);
                auto pred = load_mask(p);
                if (pred.width() != truth.width() || pred.height() != truth.height()) {
                    pred = semanticmask::resize_mask(pred, truth.width(), truth.height());
                }
                reports.push_back(evalmetrics::score_masks(pred, truth));
                per_item[t.filename().string()] = report_json(reports.back());
            }
            const auto total =
                evalmetrics::aggregate(reports, evalmetrics::parse_aggregation(ev_mode));
            ordered_json j{{"n_items", reports.size()},
                           {"summary", report_json(total)},
                           {"items", per_item}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*sweep) {
            const auto records = pipeline::read_manifest(sw_manifest);
            const fs::path manifest_dir = sw_manifest.parent_path();
            const fs::path base = sw_base.empty() ? manifest_dir : sw_base;
            std::vector<evalmetrics::SweepItem> items;
            for (const auto& r : records) {
                if (r.verdict != pipeline::Verdict::accepted || !r.mask_path || !r.alignment ||
                    !r.alignment->crop) {
                    continue;
                }
                fs::path edited = r.edited_path;
                if (edited.is_relative()) edited = base / edited;
                items.push_back({r.pair_id, crop(load_image(edited), *r.alignment->crop),
                                 load_mask(manifest_dir / *r.mask_path)});
            }
            if (items.empty()) throw ParameterError("manifest has no accepted records");

            const fs::path work = fs::temp_directory_path() /
                                  ("forgemask-sweep-" + std::to_string(std::random_device{}()));
            fs::create_directories(work);
            evalmetrics::MaskPredictor predictor =
                [&](const ImageBuffer& img, const std::string& id,
                    const evalmetrics::PerturbationSetting& s) -> std::optional<semanticmask::EditMask> {
                const fs::path in = work / (id + ".png");
                const fs::path out = work / (id + ".mask.png");
                save_png(in, img);
                fs::remove(out);
                const auto cmd = expand_template(sw_cmd, {{"image", shell_quote(in.string())},
                                                          {"out", shell_quote(out.string())},
                                                          {"id", shell_quote(id)},
                                                          {"setting", shell_quote(s.name)}});
                if (std::system(cmd.c_str()) != 0 || !fs::exists(out)) return std::nullopt;
                return load_mask(out);
            };
            evalmetrics::SweepConfig cfg{evalmetrics::parse_aggregation(sw_mode), sw_seed};
            const auto rows = evalmetrics::robustness_sweep(
                items, predictor, evalmetrics::default_robustness_grid(), cfg);
            fs::remove_all(work);
            if (sw_out.empty()) {
                evalmetrics::write_sweep_csv(std::cout, rows);
            } else {
                std::ofstream out(sw_out);
                if (!out) throw IoError("cannot write " + sw_out.string());
                evalmetrics::write_sweep_csv(out, rows);
            }
            return 0;
        }

        if (*build) {
            bu_cfg.align = bu_opts.config();
            bu_cfg.features = parse_feature_spec(bu_features, bu_patch);
            const auto manifest = pipeline::build_dataset(bu_listing, bu_out, bu_cfg);
            const auto& s = manifest.summary;
            std::cout << "pairs: " << s.total << '\n';
            for (const auto& [k, v] : s.by_verdict) std::cout << "  " << k << ": " << v << '\n';
            for (const auto& [k, v] : s.by_reason) std::cout << "  " << k << ": " << v << '\n';
            std::cout << "by editing task:\n";
            for (const auto& [task, counts] : s.by_task) {
                std::cout << "  " << task << ':';
                for (const auto& [k, v] : counts) std::cout << ' ' << k << '=' << v;
                std::cout << '\n';
            }
            std::cout << "split:";
            for (const auto& [k, v] : s.by_split) std::cout << ' ' << k << '=' << v;
            std::cout << "\ncontent hash: " << manifest.content_hash << '\n';
            return 0;
        }

        if (*profile) {
            const auto records = pipeline::read_manifest(pr_manifest);
            const auto report = pipeline::profile_run(records);
            ordered_json stages = ordered_json::array();
            for (const auto& st : report.stages) {
                stages.push_back({{"stage", st.stage}, {"seconds", st.seconds}, {"percent", st.percent}});
            }
            ordered_json j{{"total_seconds", report.total_seconds},
                           {"partial", report.partial},
                           {"records_without_timing", report.records_without_timing},
                           {"stages", stages}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "forgemask: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
