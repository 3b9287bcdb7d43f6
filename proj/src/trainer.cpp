#include "sspose/trainer.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sspose/errors.hpp"
#include "sspose/sampler.hpp"

namespace sspose {

namespace {
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace

Dataset load_dataset(const std::string& dir) {
    Dataset data;
    for (const auto& entry : read_manifest(dir + "/manifest.txt")) {
        data.names.push_back(entry.filename);
        data.images.push_back(read_pgm(dir + "/" + entry.filename));
        data.gts.push_back(entry.objects);
    }
    if (data.size() == 0) throw DataError("empty dataset in " + dir);
    return data;
}

GroundTruthByImage dataset_gts(const Dataset& data) {
    GroundTruthByImage out;
    for (std::size_t i = 0; i < data.size(); ++i) out[data.names[i]] = data.gts[i];
    return out;
}

std::string format_loss_record(int step, const LossBreakdown& br) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "step=%d l_cls=%.9g l_loc=%.9g l_pose=%.9g l_total=%.9g n=%d skipped=%d", step,
                  br.l_cls, br.l_loc, br.l_pose, br.l_total, br.n_matched, br.skip_step ? 1 : 0);
    return buf;
}

TrainResult train_model(const RunConfig& cfg, const Dataset& data,
                        const std::function<void(const std::string&)>& log_line,
                        const std::function<void(const Checkpoint&)>& checkpoint_sink,
                        const Checkpoint* resume_from) {
    std::unique_ptr<DetectorNet> net;
    SgdOptimizer opt(cfg.sgd_config());
    int start_step = 0;
    if (resume_from) {
        net = resume_from->restore_net();
        resume_from->restore_momentum(opt);
        start_step = resume_from->step;
    } else {
        net = std::make_unique<DetectorNet>(cfg.network_spec(), cfg.head_config(), cfg.seed);
    }
    const TrainOptions topt = cfg.train_options();
    const int res = cfg.input_res;

    for (int step = start_step; step < cfg.steps; ++step) {
        // All randomness at step t derives from (seed, t): resume-safe.
        std::mt19937_64 rng(mix64(cfg.seed) ^ mix64(0xB5ADF00D + std::uint64_t(step)));
        std::vector<TrainSample> batch;
        for (int i = 0; i < cfg.batch_size; ++i) {
            const std::size_t idx =
                std::uniform_int_distribution<std::size_t>(0, data.size() - 1)(rng);
            if (cfg.patch_sampling && !data.gts[idx].empty()) {
                PatchSample p = sample_patch(data.images[idx], data.gts[idx], rng, res, res);
                batch.push_back({std::move(p.image), std::move(p.gts)});
            } else {
                batch.push_back({data.images[idx], data.gts[idx]});
            }
        }
        const LossBreakdown br = train_step(*net, batch, opt, step, topt);
        if (cfg.log_interval > 0 && (step + 1) % cfg.log_interval == 0 && log_line)
            log_line(format_loss_record(step + 1, br));
        if (checkpoint_sink && cfg.checkpoint_interval > 0 &&
            (step + 1) % cfg.checkpoint_interval == 0 && step + 1 < cfg.steps)
            checkpoint_sink(Checkpoint::from_net(*net, opt, step + 1));
    }
    if (checkpoint_sink) checkpoint_sink(Checkpoint::from_net(*net, opt, cfg.steps));
    return {std::move(net), cfg.steps};
}

DetectionsByImage run_inference(const DetectorNet& net, const Dataset& data,
                                const DetectParams& params) {
    DetectionsByImage out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        Tape tape;
        PredictionView preds = net.forward(tape, data.images[i]);
        out[data.names[i]] = detect(preds, params);
    }
    return out;
}

void write_detections(const DetectionsByImage& dets, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write detections: " + path);
    f.precision(10);
    for (const auto& [img, ds] : dets)
        for (const auto& d : ds)
            f << img << " " << d.class_id << " " << d.score << " " << d.box.xmin() << " "
              << d.box.ymin() << " " << d.box.xmax() << " " << d.box.ymax() << " " << d.pose_bin
              << " " << d.pose_conf << "\n";
    if (!f) throw DataError("detections write failed: " + path);
}

DetectionsByImage read_detections(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open detections: " + path);
    DetectionsByImage out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string img;
        Detection d;
        double xmin, ymin, xmax, ymax;
        if (!(is >> img >> d.class_id >> d.score >> xmin >> ymin >> xmax >> ymax >> d.pose_bin >>
              d.pose_conf))
            throw DataError("malformed detections line " + std::to_string(lineno) + " in " + path);
        d.box = BoxGeom::from_corners(xmin, ymin, xmax, ymax);
        out[img].push_back(d);
    }
    return out;
}

}  // namespace sspose
