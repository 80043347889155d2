// moseg: motion segmentation from pairwise matches.
//
// Subcommands: synth (synthetic benchmarks), pairwise (two-view segmentation
// of match files), segment (fuse partial segmentations into per-image
// labels), eval (score predictions against ground truth).

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include "moseg/baseline.hpp"
#include "moseg/fusion.hpp"
#include "moseg/io.hpp"
#include "moseg/metrics.hpp"
#include "moseg/parallel.hpp"
#include "moseg/synth.hpp"
#include "moseg/twoview.hpp"

namespace fs = std::filesystem;
using namespace moseg;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNumerical = 4;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64 over (seed, a, b); independent of enumeration order.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a * 0x100000001b3ULL + b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string format_eps(double eps) {
    std::string s = std::to_string(eps);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

struct SynthOptions {
    fs::path out;
    int n = 20;
    int d = 2;
    int points_per_body = 100;
    double noise = 0.5;
    double motion_scale = 1.0;
    std::uint64_t seed = 1;
    double eps = 0.0;
    std::vector<double> eps_sweep;
    int trials = 1;
};

void write_dataset_dir(const fs::path& dir, const SyntheticScene& scene, double eps,
                       std::uint64_t corrupt_seed) {
    fs::create_directories(dir);
    for (const auto& clean : scene.matches) {
        const MatchList matches =
            eps > 0.0
                ? corrupt_matches(clean, eps, mix_seed(corrupt_seed, clean.pair.i, clean.pair.j))
                : clean;
        const auto coords = scene.correspondences(matches);
        io::write_matches(dir / io::matches_name(matches.pair), matches, &coords);
    }
    for (int i = 0; i < scene.n; ++i)
        io::write_tseg(dir / io::tseg_name(i), {i, scene.gt_labels[i]}, scene.d);
    io::write_points(dir / "points.txt", scene.p);
}

int cmd_synth(const SynthOptions& opt) {
    SceneConfig config;
    config.n = opt.n;
    config.d = opt.d;
    config.points_per_body = opt.points_per_body;
    config.pixel_noise = opt.noise;
    config.motion_scale = opt.motion_scale;

    std::vector<double> sweep = opt.eps_sweep;
    const bool nested = !sweep.empty() || opt.trials > 1;
    if (sweep.empty()) sweep.push_back(opt.eps);

    for (int trial = 0; trial < opt.trials; ++trial) {
        // One scene per trial, shared across the corruption sweep.
        const auto scene = generate_scene(config, mix_seed(opt.seed, 0, trial));
        for (std::size_t e = 0; e < sweep.size(); ++e) {
            const fs::path dir = nested ? opt.out / ("eps_" + format_eps(sweep[e])) /
                                              ("trial_" + std::to_string(trial))
                                        : opt.out;
            write_dataset_dir(dir, scene, sweep[e], mix_seed(opt.seed, e + 1, trial));
            std::cout << "wrote " << dir.string() << "\n";
        }
    }
    return 0;
}

struct PairwiseOptions {
    fs::path in;
    fs::path out;
    int d = 0;
    RansacConfig ransac;
    std::uint64_t seed = 1;
    int threads = default_thread_count();
};

int cmd_pairwise(const PairwiseOptions& opt) {
    const auto files = io::list_matches_files(opt.in);
    if (files.empty()) {
        std::cerr << "error: no .matches files in " << opt.in.string() << "\n";
        return kExitFormat;
    }
    fs::create_directories(opt.out);

    std::mutex log_mutex;
    std::vector<std::string> failures;
    parallel_for(static_cast<int>(files.size()), opt.threads, [&](int t) {
        io::MatchesFile file;
        try {
            file = io::read_matches(files[t]);
        } catch (const io::ParseError& e) {
            std::lock_guard lock(log_mutex);
            failures.push_back(e.what());
            return;
        }
        if (file.matches.entries.empty()) {
            std::lock_guard lock(log_mutex);
            std::cerr << "warning: " << files[t].filename().string()
                      << " has no matches; pair omitted\n";
            return;
        }
        if (!file.coordinates) {
            std::lock_guard lock(log_mutex);
            failures.push_back(files[t].string() + ":1: coordinates required by pairwise");
            return;
        }
        const ImagePair pair = file.matches.pair;
        const auto partial = sequential_ransac_segment(pair, *file.coordinates, opt.d, opt.ransac,
                                                       mix_seed(opt.seed, pair.i, pair.j));
        io::write_pseg(opt.out / io::pseg_name(pair), partial, opt.d);
    });

    for (const auto& f : failures) std::cerr << "error: " << f << "\n";
    return failures.empty() ? 0 : kExitFormat;
}

struct SegmentOptions {
    fs::path in;
    fs::path out;
    std::string mode = "fusion";
    std::string report = "text";
    bool keep_zeros = false;
    int threads = default_thread_count();
};

double classified_pct(const TotalSegmentation& seg) {
    if (seg.labels.empty()) return 0.0;
    const auto classified = std::count_if(seg.labels.begin(), seg.labels.end(),
                                          [](Label l) { return is_motion(l); });
    return 100.0 * static_cast<double>(classified) / static_cast<double>(seg.labels.size());
}

int cmd_segment(const SegmentOptions& opt) {
    std::vector<std::string> warnings;
    const auto loaded = io::load_dataset(opt.in, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const Dataset& dataset = loaded.dataset;

    const auto validation = validate_dataset(dataset);
    if (!validation.ok()) {
        for (const auto& v : validation.violations) std::cerr << "error: " << v << "\n";
        return kExitFormat;
    }
    fs::create_directories(opt.out);

    std::ofstream report;
    const fs::path report_path = opt.out / (opt.report == "csv" ? "report.csv" : "report.txt");

    if (opt.mode == "baseline") {
        const auto tree = max_spanning_tree(dataset);
        const auto segmentations = propagate_baseline(dataset, tree);
        for (const auto& seg : segmentations)
            io::write_tseg(opt.out / io::tseg_name(seg.image), seg, dataset.d);

        report.open(report_path);
        if (opt.report == "csv") {
            report << "image,classified_pct\n";
            for (const auto& seg : segmentations)
                report << seg.image << ',' << classified_pct(seg) << '\n';
        } else {
            report << "mode: baseline\ntree weight: " << tree.total_weight << "\nedges:";
            for (const auto& e : tree.edges) report << " (" << e.i << ',' << e.j << ')';
            report << '\n';
            for (const auto& seg : segmentations)
                report << "image " << seg.image << ": classified " << classified_pct(seg)
                       << "%\n";
        }
        return 0;
    }

    const auto result =
        segment_all(dataset, opt.keep_zeros ? ZeroPolicy::keep_zeros : ZeroPolicy::ignore_zeros,
                    opt.threads);
    for (const auto& seg : result.segmentations)
        io::write_tseg(opt.out / io::tseg_name(seg.image), seg, dataset.d);

    report.open(report_path);
    if (opt.report == "csv") {
        report << "# sync_edges=" << result.report.sync_edges
               << " sync_residual=" << result.report.sync_residual
               << " omitted_edges=" << result.report.omitted_edges
               << " global_fallback=" << result.report.global_fallback
               << " dense_fallback=" << result.report.dense_fallback << "\n";
        report << "image,classified_pct,align_fallback\n";
        for (const auto& img : result.report.images)
            report << img.image << ',' << 100.0 * img.classified_fraction << ','
                   << img.align_fallback << '\n';
    } else {
        report << "mode: fusion\nsync edges: " << result.report.sync_edges
               << "\nsync residual: " << result.report.sync_residual
               << "\nomitted edges: " << result.report.omitted_edges
               << "\nglobal fallback: " << (result.report.global_fallback ? "yes" : "no")
               << "\ndense fallback: " << (result.report.dense_fallback ? "yes" : "no") << '\n';
        for (const auto& img : result.report.images)
            report << "image " << img.image << ": classified " << 100.0 * img.classified_fraction
                   << '%' << (img.align_fallback ? " (align fallback)" : "") << '\n';
    }
    std::cout << "segmented " << dataset.n << " images; report: " << report_path.string() << "\n";
    return 0;
}

struct EvalOptions {
    fs::path pred;
    fs::path gt;
    fs::path data;
    fs::path out;
    std::string report = "text";
    bool emit_histograms = false;
};

int cmd_eval(const EvalOptions& opt) {
    const auto gt_files = io::list_tseg_files(opt.gt);
    if (gt_files.empty()) {
        std::cerr << "error: no .tseg files in " << opt.gt.string() << "\n";
        return kExitFormat;
    }

    std::vector<TotalSegmentation> pred;
    std::vector<std::vector<Label>> gt;
    int d = 0;
    for (const auto& gt_path : gt_files) {
        const auto gt_file = io::read_tseg(gt_path);
        const fs::path pred_path = opt.pred / gt_path.filename();
        if (!fs::exists(pred_path)) {
            std::cerr << "error: missing prediction " << pred_path.string() << "\n";
            return kExitFormat;
        }
        const auto pred_file = io::read_tseg(pred_path);
        if (pred_file.segmentation.labels.size() != gt_file.segmentation.labels.size())
            throw io::ParseError(pred_path, 1, "point count differs from ground truth");
        d = std::max({d, gt_file.d, pred_file.d});
        pred.push_back(pred_file.segmentation);
        gt.push_back(gt_file.segmentation.labels);
    }

    std::vector<Label> pred_concat, gt_concat;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred_concat.insert(pred_concat.end(), pred[i].labels.begin(), pred[i].labels.end());
        gt_concat.insert(gt_concat.end(), gt[i].begin(), gt[i].end());
    }
    const auto mapping = best_label_mapping(pred_concat, gt_concat, d);
    const auto stats = misclassification_error_points(pred, gt, mapping);

    auto print_row = [&](std::ostream& out, const std::string& name,
                         const std::optional<double>& error, double classified) {
        if (opt.report == "csv") {
            out << name << ',' << (error ? std::to_string(*error) : "nan") << ',' << classified
                << '\n';
        } else {
            out << name << ": error ";
            if (error)
                out << *error << '%';
            else
                out << "n/a";
            out << ", classified " << classified << "%\n";
        }
    };
    if (opt.report == "csv") std::cout << "image,error_pct,classified_pct\n";
    for (const auto& img : stats.images)
        print_row(std::cout, opt.report == "csv" ? std::to_string(img.image)
                                                 : "image " + std::to_string(img.image),
                  img.error_pct, img.classified_pct);
    print_row(std::cout, "overall", stats.error_pct, stats.classified_pct);

    const fs::path out_dir = opt.out.empty() ? opt.pred : opt.out;
    fs::create_directories(out_dir);
    {
        std::ofstream csv(out_dir / "metrics.csv");
        csv << "image,error_pct,classified_pct\n";
        for (const auto& img : stats.images)
            csv << img.image << ',' << (img.error_pct ? std::to_string(*img.error_pct) : "nan")
                << ',' << img.classified_pct << '\n';
        csv << "overall," << (stats.error_pct ? std::to_string(*stats.error_pct) : "nan") << ','
            << stats.classified_pct << '\n';
    }

    if (opt.emit_histograms) {
        // Step-1 diagnostics need the matches + partial segmentations that
        // produced the predictions.
        const auto loaded = io::load_dataset(opt.data.empty() ? opt.pred : opt.data);

        std::vector<std::vector<Label>> gt_by_image(loaded.dataset.n);
        for (std::size_t t = 0; t < gt_files.size(); ++t) {
            const auto file = io::read_tseg(gt_files[t]);
            if (file.segmentation.image < loaded.dataset.n)
                gt_by_image[file.segmentation.image] = file.segmentation.labels;
        }
        write_pair_error_csv(out_dir / "pair_errors.csv",
                             per_pair_errors(loaded.dataset, gt_by_image));

        std::ofstream votes(out_dir / "votes.csv");
        votes << "image,point,correct,wrong,outlier,observations\n";
        for (int i = 0; i < loaded.dataset.n; ++i)
            for (const auto& row : vote_composition(loaded.dataset, i, gt_by_image))
                votes << i << ',' << row.point << ',' << row.correct << ',' << row.wrong << ','
                      << row.outlier << ',' << row.observations << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"motion segmentation from pairwise matches"};
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic benchmark");
    synth_cmd->add_option("--out", synth.out, "output directory")->required();
    synth_cmd->add_option("--n", synth.n, "number of images");
    synth_cmd->add_option("--d", synth.d, "number of motions");
    synth_cmd->add_option("--points-per-body", synth.points_per_body, "points per body");
    synth_cmd->add_option("--noise", synth.noise, "pixel noise sigma");
    synth_cmd->add_option("--motion-scale", synth.motion_scale, "body motion magnitude");
    synth_cmd->add_option("--seed", synth.seed, "master seed")->required();
    synth_cmd->add_option("--eps", synth.eps, "match corruption fraction");
    synth_cmd->add_option("--eps-sweep", synth.eps_sweep,
                          "corruption sweep (one dataset dir per value)");
    synth_cmd->add_option("--trials", synth.trials, "seeded replicas per eps");

    PairwiseOptions pairwise;
    auto* pairwise_cmd = app.add_subcommand("pairwise", "segment each pair by sequential RANSAC");
    pairwise_cmd->add_option("--in", pairwise.in, "directory with .matches files")->required();
    pairwise_cmd->add_option("--out", pairwise.out, "output directory for .pseg files")
        ->required();
    pairwise_cmd->add_option("--d", pairwise.d, "number of motions")->required();
    pairwise_cmd->add_option("--threshold", pairwise.ransac.inlier_threshold,
                             "Sampson inlier threshold [px]");
    pairwise_cmd->add_option("--confidence", pairwise.ransac.confidence, "RANSAC confidence");
    pairwise_cmd->add_option("--max-iters", pairwise.ransac.max_iters,
                             "RANSAC iteration cap per motion");
    pairwise_cmd->add_option("--seed", pairwise.seed, "master seed")->required();
    pairwise_cmd->add_option("--threads", pairwise.threads, "worker threads");

    SegmentOptions segment;
    auto* segment_cmd = app.add_subcommand("segment", "fuse pairwise segmentations");
    segment_cmd->add_option("--in", segment.in, "directory with .matches + .pseg files")
        ->required();
    segment_cmd->add_option("--out", segment.out, "output directory for .tseg files")->required();
    segment_cmd->add_option("--mode", segment.mode, "fusion | baseline")
        ->check(CLI::IsMember({"fusion", "baseline"}));
    segment_cmd->add_option("--report", segment.report, "report format: text | csv")
        ->check(CLI::IsMember({"text", "csv"}));
    segment_cmd->add_flag("--keep-zeros", segment.keep_zeros,
                          "count outlier votes instead of ignoring them (experimental)");
    segment_cmd->add_option("--threads", segment.threads, "worker threads");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
    eval_cmd->add_option("--pred", eval.pred, "directory with predicted .tseg files")->required();
    eval_cmd->add_option("--gt", eval.gt, "directory with ground-truth .tseg files")->required();
    eval_cmd->add_option("--data", eval.data,
                         "directory with the .matches/.pseg files behind the predictions "
                         "(default: --pred); used by --emit-histograms");
    eval_cmd->add_option("--out", eval.out, "directory for CSV outputs (default: --pred)");
    eval_cmd->add_option("--report", eval.report, "report format: text | csv")
        ->check(CLI::IsMember({"text", "csv"}));
    eval_cmd->add_flag("--emit-histograms", eval.emit_histograms,
                       "write per-pair error and vote-composition CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth);
        if (*pairwise_cmd) return cmd_pairwise(pairwise);
        if (*segment_cmd) return cmd_segment(segment);
        if (*eval_cmd) return cmd_eval(eval);
    } catch (const io::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
