#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <optional>

#include <CLI11.hpp>

#include "sspose/checkpoint.hpp"
#include "sspose/datagen.hpp"
#include "sspose/errors.hpp"
#include "sspose/trainer.hpp"

namespace fs = std::filesystem;
using namespace sspose;

namespace {

struct CliOverrides {
    std::vector<std::string> kv;  // key=value pairs from --set
};

RunConfig load_config(const std::string& config_path, const CliOverrides& ov) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    for (const auto& pair : ov.kv) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + pair + "'");
        cfg.apply_line(pair.substr(0, eq), pair.substr(eq + 1));
    }
    return cfg;
}

int cmd_generate(const std::string& config_path, const CliOverrides& ov, const std::string& out_dir,
                 int count, bool force) {
    if (count < 1) throw ConfigError("--count must be >= 1");
    RunConfig cfg = load_config(config_path, ov);
    if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force)
        throw DataError("output directory " + out_dir + " is not empty (use --force)");
    generate_dataset(cfg.scene_spec(), count, out_dir);
    std::cout << "generated " << count << " images in " << out_dir << "\n";
    return kExitOk;
}

int cmd_train(const std::string& config_path, const CliOverrides& ov, const std::string& data_dir,
              const std::string& out_ckpt, const std::string& log_path,
              const std::string& resume_path) {
    RunConfig cfg = load_config(config_path, ov);
    Dataset data = load_dataset(data_dir);

    std::optional<Checkpoint> resume;
    if (!resume_path.empty()) resume = load_checkpoint(resume_path);

    std::ofstream log;
    if (!log_path.empty()) {
        log.open(log_path);
        if (!log) throw DataError("cannot open metrics log: " + log_path);
    }
    auto log_line = [&](const std::string& line) {
        if (log) log << line << "\n";
        std::cout << line << "\n";
    };
    auto sink = [&](const Checkpoint& c) { save_checkpoint(c, out_ckpt); };

    try {
        train_model(cfg, data, log_line, sink, resume ? &*resume : nullptr);
    } catch (const NumericError&) {
        // keep whatever checkpoint was last written
        throw;
    }
    std::cout << "checkpoint written to " << out_ckpt << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& config_path, const CliOverrides& ov, const std::string& ckpt_path,
             const std::string& data_dir, std::vector<int> bins,
             const std::vector<int>& merge_from_fine, const std::string& detections_path,
             const std::string& report_path, const std::string& pr_csv_path) {
    RunConfig cfg = load_config(config_path, ov);
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    auto net = ckpt.restore_net();
    const int n_theta = ckpt.head.n_pose_bins;

    if (bins.empty() && merge_from_fine.empty()) bins = {n_theta};
    for (int b : bins)
        if (b != n_theta)
            throw ConfigError("binning " + std::to_string(b) + " does not match checkpoint pose bins " +
                              std::to_string(n_theta) + "; use --merge-from-fine for coarser binnings");
    for (int b : merge_from_fine) {
        if (b > n_theta)
            throw ConfigError("requested binning " + std::to_string(b) +
                              " exceeds checkpoint pose bins " + std::to_string(n_theta));
        if (std::find(bins.begin(), bins.end(), b) == bins.end()) bins.push_back(b);
    }

    DetectionsByImage dets;
    GroundTruthByImage gts;
    if (!detections_path.empty()) {
        dets = read_detections(detections_path);
        for (const auto& e : read_manifest(data_dir + "/manifest.txt")) gts[e.filename] = e.objects;
    } else {
        Dataset data = load_dataset(data_dir);
        dets = run_inference(*net, data, {cfg.score_thresh, cfg.nms_iou, cfg.top_k});
        gts = dataset_gts(data);
    }

    EvalReport report = evaluate(dets, gts, bins, n_theta);
    const std::string table = format_report(report, sprite_class_names());
    std::cout << table;
    if (!report_path.empty()) {
        std::ofstream f(report_path);
        if (!f) throw DataError("cannot write report: " + report_path);
        f << report_key_values(report);
    }
    if (!pr_csv_path.empty()) {
        std::ofstream f(pr_csv_path);
        if (!f) throw DataError("cannot write PR csv: " + pr_csv_path);
        f << "metric,class,recall,precision\n";
        f.precision(10);
        for (const auto& [c, cm] : report.per_class) {
            for (const auto& p : cm.pr_ap)
                f << "AP," << c << "," << p.recall << "," << p.precision << "\n";
            for (const auto& [nb, curve] : cm.pr_avp)
                for (const auto& p : curve)
                    f << "AVP" << nb << "," << c << "," << p.recall << "," << p.precision << "\n";
        }
    }
    return kExitOk;
}

void draw_overlay(Image& img, const Detection& d, int n_bins) {
    const int W = img.width, H = img.height;
    auto put = [&](int x, int y, double v) {
        if (x >= 0 && x < W && y >= 0 && y < H) img.at(x, y) = v;
    };
    const int x0 = int(std::lround(d.box.xmin() * W)), x1 = int(std::lround(d.box.xmax() * W)) - 1;
    const int y0 = int(std::lround(d.box.ymin() * H)), y1 = int(std::lround(d.box.ymax() * H)) - 1;
    for (int x = x0; x <= x1; ++x) {
        put(x, y0, 1.0);
        put(x, y1, 1.0);
    }
    for (int y = y0; y <= y1; ++y) {
        put(x0, y, 1.0);
        put(x1, y, 1.0);
    }
    // pose arrow from the box center at the bin-center angle
    const double ang = bin_center_deg(d.pose_bin, n_bins) * 3.14159265358979323846 / 180.0;
    const double cx = d.box.cx * W, cy = d.box.cy * H;
    const double len = 0.5 * std::min(d.box.w * W, d.box.h * H);
    for (double t = 0; t <= 1.0; t += 0.02)
        put(int(std::lround(cx + t * len * std::cos(ang))),
            int(std::lround(cy + t * len * std::sin(ang))), 1.0);
}

int cmd_predict(const std::string& config_path, const CliOverrides& ov, const std::string& ckpt_path,
                const std::vector<std::string>& images, const std::string& out_path,
                const std::string& overlay_dir) {
    RunConfig cfg = load_config(config_path, ov);
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    auto net = ckpt.restore_net();

    DetectionsByImage out;
    int failures = 0;
    for (const auto& path : images) {
        Image img;
        try {
            img = read_pgm(path);
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping unreadable image " << path << ": " << e.what() << "\n";
            ++failures;
            continue;
        }
        Tape tape;
        PredictionView preds = net->forward(tape, img);
        auto dets = detect(preds, {cfg.score_thresh, cfg.nms_iou, cfg.top_k});
        const std::string name = fs::path(path).filename().string();
        if (!overlay_dir.empty()) {
            fs::create_directories(overlay_dir);
            Image overlay = img;
            for (const auto& d : dets) draw_overlay(overlay, d, ckpt.head.n_pose_bins);
            write_pgm(overlay, overlay_dir + "/" + name);
        }
        out[name] = std::move(dets);
    }
    write_detections(out, out_path);
    if (!images.empty() && failures == static_cast<int>(images.size()))
        throw DataError("all input images were unreadable");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-shot joint object detection and discrete pose estimation"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_dir, ckpt_path, log_path, resume_path;
    std::string detections_path, report_path, pr_csv_path, out_path, overlay_dir;
    std::vector<std::string> images;
    std::vector<int> bins, merge_from_fine;
    CliOverrides ov;
    int count = 0;
    bool force = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (key = value lines)");
        cmd->add_option("--set", ov.kv, "override a config key, e.g. --set lr=0.01");
    };

    auto* gen = app.add_subcommand("generate", "render a synthetic dataset");
    add_common(gen);
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--count", count, "number of images")->required();
    gen->add_flag("--force", force, "allow writing into a non-empty directory");

    auto* train = app.add_subcommand("train", "train a detector");
    add_common(train);
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--out", ckpt_path, "output checkpoint")->required();
    train->add_option("--log", log_path, "metrics log file");
    train->add_option("--resume", resume_path, "resume from checkpoint");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint (AP / AVP)");
    add_common(eval);
    eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    eval->add_option("--data", data_dir, "dataset directory")->required();
    eval->add_option("--bins", bins, "pose binnings to evaluate at");
    eval->add_option("--merge-from-fine", merge_from_fine,
                     "coarse binnings evaluated by merging the checkpoint's fine bins");
    eval->add_option("--detections", detections_path, "evaluate a detections file instead of running inference");
    eval->add_option("--report", report_path, "write machine-readable report");
    eval->add_option("--pr-csv", pr_csv_path, "dump PR curves as CSV");

    auto* predict = app.add_subcommand("predict", "run detection on images");
    add_common(predict);
    predict->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    predict->add_option("--out", out_path, "detections output file")->required();
    predict->add_option("--overlay-dir", overlay_dir, "write overlay images here");
    predict->add_option("images", images, "input images")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }

    try {
        if (gen->parsed()) return cmd_generate(config_path, ov, out_dir, count, force);
        if (train->parsed())
            return cmd_train(config_path, ov, data_dir, ckpt_path, log_path, resume_path);
        if (eval->parsed())
            return cmd_eval(config_path, ov, ckpt_path, data_dir, bins, merge_from_fine,
                            detections_path, report_path, pr_csv_path);
        if (predict->parsed())
            return cmd_predict(config_path, ov, ckpt_path, images, out_path, overlay_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitOk;
}
