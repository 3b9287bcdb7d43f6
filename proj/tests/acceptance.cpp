// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Trained-model criteria share datasets and checkpoints through a
// scratch directory under the system temp path.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sspose/checkpoint.hpp"
#include "sspose/config.hpp"
#include "sspose/datagen.hpp"
#include "sspose/errors.hpp"
#include "sspose/eval.hpp"
#include "sspose/inference.hpp"
#include "sspose/loss.hpp"
#include "sspose/network.hpp"
#include "sspose/ops.hpp"
#include "sspose/trainer.hpp"

using namespace sspose;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// ---------------------------------------------------------------- harness --

int g_failures = 0;
std::string g_cli;  // path to the sspose CLI binary (criterion 9)
fs::path g_scratch;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
    void note(const std::string& what) {
        if (ok) detail = what;
    }
};

void report(int criterion, const std::string& title, const Check& c) {
    std::printf("CRITERION %2d: %s - %s%s%s\n", criterion, c.ok ? "PASS" : "FAIL", title.c_str(),
                c.detail.empty() ? "" : " | ", c.detail.c_str());
    std::fflush(stdout);
    if (!c.ok) ++g_failures;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void fill_random(Tensor& t, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    for (auto& v : t.data) v = u(rng);
}

// -------------------------------------------------- shared trained assets --

// Datasets are written to disk once so the CLI-level checks in criterion 9
// can reuse them byte-for-byte.
constexpr int kTrainImages = 2000, kEvalImages = 200;
constexpr std::uint64_t kTrainSeed = 101, kEvalSeed = 202;

// Frozen after the committed baseline calibration run (see ledger):
// anchors matched to the sprite size range, single lr with the stock decay.
RunConfig baseline_config() {
    RunConfig cfg;
    cfg.n_bins = 8;
    cfg.pose_sharing = "share";
    cfg.s_min = 0.26;
    cfg.s_max = 0.38;
    cfg.lr = 1e-2;
    cfg.patch_sampling = false;
    cfg.steps = 14000;  // <= 20k per criterion 6
    cfg.seed = 11;
    cfg.log_interval = 0;
    return cfg;
}

// Sprite sizes sit on the 8x8 anchor layer's resolution so IoU>0.5 matches
// exist at both scales; at most two objects per scene keeps the desk-scale
// run inside the wall-clock budget.
SceneSpec baseline_scene_spec() {
    SceneSpec spec;
    spec.max_objects = 2;
    spec.min_scale = 0.25;
    spec.max_scale = 0.4;
    spec.noise_level = 0.1;
    return spec;
}

Dataset g_train, g_eval;

void prepare_datasets() {
    SceneSpec spec = baseline_scene_spec();
    spec.seed = kTrainSeed;
    generate_dataset(spec, kTrainImages, (g_scratch / "train").string());
    spec.seed = kEvalSeed;
    generate_dataset(spec, kEvalImages, (g_scratch / "eval").string());
    g_train = load_dataset((g_scratch / "train").string());
    g_eval = load_dataset((g_scratch / "eval").string());
}

EvalReport eval_model(const DetectorNet& net, const RunConfig& cfg,
                      const std::vector<int>& bins_list, int det_bins,
                      DetectionsByImage* dets_out = nullptr) {
    DetectParams params;
    params.score_thresh = cfg.score_thresh;
    params.nms_iou = cfg.nms_iou;
    params.top_k = cfg.top_k;
    auto dets = run_inference(net, g_eval, params);
    if (dets_out) *dets_out = dets;
    return evaluate(dets, dataset_gts(g_eval), bins_list, det_bins);
}

// -------------------------------------------------------------- criteria --

// 1. Gradient fidelity: central differences at step 1e-3, rel err <= 1e-4,
//    >= 100 random cases per op, runtime <= 2 min.
Check criterion1() {
    Check c;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    const double kStep = 1e-3, kTol = 1e-4;

    // generic FD harness: build() assembles the graph from given leaf data
    auto check_op = [&](const char* name, int cases,
                        const std::function<std::vector<Tensor*>(Tape&)>& leaves,
                        const std::function<Tensor*(Tape&, const std::vector<Tensor*>&)>& build) {
        for (int t = 0; t < cases && c.ok; ++t) {
            Tape tape;
            auto xs = leaves(tape);
            Tensor* root = build(tape, xs);
            tape.backward(root);
            // snapshot leaf data for re-evaluation
            std::vector<std::vector<double>> data;
            for (auto* x : xs) data.push_back(x->data);
            auto eval_at = [&](std::size_t leaf, std::size_t idx, double delta) {
                Tape t2;
                std::vector<Tensor*> ys;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    Tensor* y = t2.make(xs[i]->shape, data[i]);
                    y->requires_grad = xs[i]->requires_grad;
                    ys.push_back(y);
                }
                ys[leaf]->data[idx] += delta;
                return build(t2, ys)->data[0];
            };
            for (std::size_t l = 0; l < xs.size() && c.ok; ++l) {
                if (!xs[l]->requires_grad) continue;
                // probe up to 6 coordinates per leaf per case
                for (int p = 0; p < 6 && c.ok; ++p) {
                    const std::size_t idx = rng() % xs[l]->data.size();
                    const double fd =
                        (eval_at(l, idx, kStep) - eval_at(l, idx, -kStep)) / (2 * kStep);
                    const double an = xs[l]->grad[idx];
                    c.require(rel_err(an, fd) <= kTol,
                              std::string(name) + ": rel err " + fmt(rel_err(an, fd)));
                }
            }
        }
    };

    auto leaf = [&](Tape& tape, std::vector<int> shape, bool grad = true) {
        Tensor* t = tape.make(std::move(shape));
        fill_random(*t, rng);
        t->requires_grad = grad;
        if (grad) t->ensure_grad();
        return t;
    };

    // FD at a fixed step is only valid where the function is smooth (the relu
    // spec itself says "away from 0"), so every case is generated kink-safe:
    // smooth-L1 targets are placed per-case so residuals sit deep inside the
    // quadratic region, relu inputs keep a margin from 0, and pool windows
    // hold well-separated values so the argmax cannot flip under +-step.
    // The per-case target is captured on the first build (the analytic pass)
    // and reused verbatim by the FD re-evaluations.
    std::vector<double> tgt;
    bool fresh = false;
    auto freshen = [&](const std::function<std::vector<Tensor*>(Tape&)>& leaves) {
        return [&, leaves](Tape& t) {
            fresh = true;
            return leaves(t);
        };
    };
    auto smooth_l1_of = [&](Tape& t, Tensor* y) {
        if (fresh) {
            std::uniform_real_distribution<double> u(-0.85, 0.85);
            tgt.assign(y->data.begin(), y->data.end());
            for (auto& v : tgt) v -= u(rng);
            fresh = false;
        }
        return ops::smooth_l1(t, y, tgt);
    };

    // conv2d
    check_op(
        "conv2d", 100,
        freshen([&](Tape& t) {
            return std::vector<Tensor*>{leaf(t, {2, 5, 5}), leaf(t, {3, 2, 3, 3}), leaf(t, {3})};
        }),
        [&](Tape& t, const std::vector<Tensor*>& x) {
            return smooth_l1_of(t, ops::conv2d(t, x[0], x[1], x[2], 1, 1));
        });
    // max-pool: distinct, well-spaced values so +-step never flips an argmax
    check_op(
        "max_pool2", 100,
        freshen([&](Tape& t) {
            Tensor* x = leaf(t, {2, 6, 6});
            for (std::size_t i = 0; i < x->data.size(); ++i)
                x->data[i] = -1.2 + 0.07 * static_cast<double>(i);
            std::shuffle(x->data.begin(), x->data.end(), rng);
            return std::vector<Tensor*>{x};
        }),
        [&](Tape& t, const std::vector<Tensor*>& x) {
            return smooth_l1_of(t, ops::max_pool2(t, x[0]));
        });
    // relu: inputs keep |x| >= 0.05 so +-step stays on one side of the kink
    check_op(
        "relu", 100,
        freshen([&](Tape& t) {
            Tensor* x = leaf(t, {3, 4, 4});
            for (auto& v : x->data) v = (v < 0 ? -1.0 : 1.0) * (0.05 + 0.95 * std::abs(v));
            return std::vector<Tensor*>{x};
        }),
        [&](Tape& t, const std::vector<Tensor*>& x) {
            return smooth_l1_of(t, ops::relu(t, x[0]));
        });
    // softmax cross-entropy (smooth everywhere)
    check_op(
        "softmax_xent", 100,
        [&](Tape& t) { return std::vector<Tensor*>{leaf(t, {7})}; },
        [&](Tape& t, const std::vector<Tensor*>& x) { return ops::softmax_xent(t, x[0], 3); });
    // smooth L1 directly
    check_op(
        "smooth_l1", 100,
        freshen([&](Tape& t) { return std::vector<Tensor*>{leaf(t, {12})}; }),
        [&](Tape& t, const std::vector<Tensor*>& x) { return smooth_l1_of(t, x[0]); });

    // full composite loss through a real network forward
    {
        NetworkSpec spec;
        spec.input_res = 32;
        spec.channels = {6, 8, 10, 12, 14};
        HeadConfig head{3, 8, PoseSharing::Share};
        DetectorNet net(spec, head, 77);
        Image img(32, 32);
        std::mt19937_64 irng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& p : img.pixels) p = u(irng);
        std::vector<GroundTruthObject> gts{{2, BoxGeom{0.5, 0.5, 0.45, 0.45}, 123.0}};

        auto eval_loss = [&]() {
            Tape tape;
            auto preds = net.forward(tape, img);
            auto a = match(net.defaults(), gts);
            auto mined = hard_negative_mining(background_cls_losses(preds), a, 3.0);
            return total_loss(tape, preds, a, gts, mined, 1.0, 1.5).l_total;
        };
        net.zero_grads();
        {
            Tape tape;
            auto preds = net.forward(tape, img);
            auto a = match(net.defaults(), gts);
            auto mined = hard_negative_mining(background_cls_losses(preds), a, 3.0);
            Tensor* total = nullptr;
            total_loss(tape, preds, a, gts, mined, 1.0, 1.5, &total);
            tape.backward(total);
        }
        auto params = net.parameters();
        // FD is only meaningful where the loss is smooth; a parameter probe can
        // push some relu pre-activation across 0 inside [-step, +step]. Detect
        // that by comparing central differences at step and step/2 (they agree
        // to O(step^2) on smooth stretches, disagree grossly across a kink)
        // and resample such probes, mirroring the "away from 0" relu check.
        int valid = 0, skipped = 0;
        for (int attempt = 0; valid < 30 && attempt < 300 && c.ok; ++attempt) {
            auto& [name, t] = params[rng() % params.size()];
            const std::size_t idx = rng() % t->data.size();
            const double keep = t->data[idx];
            auto central = [&](double h) {
                t->data[idx] = keep + h;
                const double up = eval_loss();
                t->data[idx] = keep - h;
                const double dn = eval_loss();
                t->data[idx] = keep;
                return (up - dn) / (2 * h);
            };
            const double fd = central(kStep), fd_half = central(kStep / 2);
            if (rel_err(fd, fd_half) > 10 * kTol) {
                ++skipped;
                continue;
            }
            ++valid;
            c.require(rel_err(t->grad[idx], fd) <= kTol,
                      "composite loss @" + name + ": rel err " + fmt(rel_err(t->grad[idx], fd)));
        }
        c.require(valid == 30, "only " + std::to_string(valid) + " smooth composite probes (" +
                                   std::to_string(skipped) + " kink-adjacent skipped)");
    }

    const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    c.require(sec <= 120.0, "gradient suite took " + fmt(sec) + "s (> 120s)");
    c.note("500+ op cases + composite loss, " + fmt(sec) + "s");
    return c;
}

// 2. Geometry oracles: encode/decode, IoU case, NMS brute force.
Check criterion2() {
    Check c;
    std::mt19937_64 rng(2002);

    // encode/decode roundtrip <= 1e-9 on 1e4 in-bounds boxes
    std::uniform_real_distribution<double> dc(0.1, 0.9), ds(0.05, 0.4), gc(0.25, 0.75),
        gs(0.05, 0.45);
    double worst = 0;
    for (int t = 0; t < 10000; ++t) {
        BoxGeom d{dc(rng), dc(rng), ds(rng), ds(rng)};
        BoxGeom g{gc(rng), gc(rng), gs(rng), gs(rng)};
        BoxGeom back = decode_offsets(encode_offsets(g, d), d);
        worst = std::max({worst, std::abs(back.cx - g.cx), std::abs(back.cy - g.cy),
                          std::abs(back.w - g.w), std::abs(back.h - g.h)});
    }
    c.require(worst <= 1e-9, "encode/decode worst err " + fmt(worst));

    // constructed 1/3-overlap case, symmetric
    BoxGeom a = BoxGeom::from_corners(0.0, 0.0, 0.5, 0.5);
    BoxGeom b = BoxGeom::from_corners(0.25, 0.0, 0.75, 0.5);
    c.require(std::abs(iou(a, b) - 1.0 / 3.0) <= 1e-12, "IoU 1/3 case");
    c.require(iou(a, b) == iou(b, a), "IoU symmetry");

    // NMS == O(n^2) brute force on 1000 instances of <= 200 boxes
    std::uniform_real_distribution<double> c01(0.1, 0.9), s01(0.05, 0.45), sc(0.0, 1.0),
        th(0.2, 0.7);
    for (int t = 0; t < 1000 && c.ok; ++t) {
        const int n = 1 + static_cast<int>(rng() % 200);
        std::vector<BoxGeom> boxes;
        std::vector<double> scores;
        for (int i = 0; i < n; ++i) {
            boxes.push_back(BoxGeom{c01(rng), c01(rng), s01(rng), s01(rng)});
            scores.push_back(sc(rng));
        }
        const double thresh = th(rng);
        auto kept = nms(boxes, scores, thresh);
        // brute force
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int x, int y) { return scores[x] > scores[y]; });
        std::vector<bool> dead(n, false);
        std::vector<int> expect;
        for (int i : order) {
            if (dead[i]) continue;
            expect.push_back(i);
            for (int j : order)
                if (!dead[j] && j != i && iou(boxes[i], boxes[j]) > thresh) dead[j] = true;
        }
        c.require(kept == expect, "NMS mismatch at instance " + std::to_string(t));
    }
    c.note("roundtrip worst " + fmt(worst) + ", 1000 NMS instances exact");
    return c;
}

// 3. Matching semantics on randomized scenes.
Check criterion3() {
    Check c;
    NetworkSpec spec;  // stock 240-box layout
    auto defaults = generate_default_boxes(spec.layer_specs());
    std::mt19937_64 rng(3003);
    std::uniform_real_distribution<double> pc(0.15, 0.85), ps(0.1, 0.45);
    for (int scene = 0; scene < 200 && c.ok; ++scene) {
        std::vector<GroundTruthObject> gts;
        const int n_gt = 1 + static_cast<int>(rng() % 4);
        for (int g = 0; g < n_gt; ++g)
            gts.push_back({1 + static_cast<int>(rng() % 3), BoxGeom{pc(rng), pc(rng), ps(rng), ps(rng)}, 0.0});
        auto assign = match(defaults, gts, true);
        for (std::size_t b = 0; b < defaults.size() && c.ok; ++b) {
            double best = 0;
            for (const auto& g : gts) best = std::max(best, iou(defaults.boxes[b], g.box));
            if (best > 0.5)
                c.require(assign.is_positive(b),
                          "box with max-IoU " + fmt(best) + " left background");
        }
        for (int g = 0; g < n_gt && c.ok; ++g) {
            double any = 0;
            for (const auto& d : defaults.boxes) any = std::max(any, iou(d, gts[g].box));
            if (any <= 0) continue;
            bool owned = false;
            for (const auto& m : assign.per_box) owned = owned || m.gt_index == g;
            c.require(owned, "overlapping gt owns no positive");
        }
    }
    c.note("200 randomized scenes");
    return c;
}

// 4. Loss structure (Eq. 1).
Check criterion4() {
    Check c;

    // hand-built single-layer view helper
    struct MiniScene {
        DefaultBoxSet defaults;
        PredictionView preds;
        MiniScene(Tape& tape, const LayerSpec& spec, const HeadConfig& head,
                  std::mt19937_64* rng) {
            defaults = generate_default_boxes({spec});
            const int na = static_cast<int>(spec.aspect_ratios.size());
            auto make_map = [&](int per_box) {
                Tensor* t = tape.make({na * per_box, spec.grid_h, spec.grid_w});
                t->requires_grad = true;
                t->ensure_grad();
                if (rng) fill_random(*t, *rng);
                return t;
            };
            PredictionView::Layer layer;
            layer.cls = make_map(head.cls_channels());
            layer.loc = make_map(4);
            layer.pose = make_map(head.pose_channels());
            layer.grid_h = spec.grid_h;
            layer.grid_w = spec.grid_w;
            layer.n_aspects = na;
            preds.layers.push_back(layer);
            preds.defaults = &defaults;
            preds.head = head;
        }
    };

    // uniform logits, one positive, zero mined negatives, N_c+1 = 4, N_theta = 4
    {
        Tape tape;
        HeadConfig head{3, 4, PoseSharing::Share};
        MiniScene sc(tape, {1, 1, 0.5, {1.0}}, head, nullptr);
        // gt offset from the default box so l_loc is nonzero
        BoxGeom gt{0.55, 0.48, 0.4, 0.45};
        std::vector<GroundTruthObject> gts{{2, gt, 0.0}};
        auto a = match(sc.defaults, gts);
        c.require(a.n_matched == 1, "single-box scene must match");
        auto lb = total_loss(tape, sc.preds, a, gts, {}, 1.0, 1.5);
        // l_loc oracle on the zero prediction
        double l_loc = 0;
        auto target = encode_offsets(gt, sc.defaults.boxes[0]);
        for (double t : target) l_loc += std::abs(t) < 1 ? 0.5 * t * t : std::abs(t) - 0.5;
        const double ln4 = std::log(4.0);
        const double expect = (ln4 + 1.0 * l_loc + 1.5 * ln4) / 1.0;
        c.require(std::abs(lb.l_total - expect) <= 1e-9,
                  "Eq.1 closed form: " + fmt(lb.l_total) + " vs " + fmt(expect));

        // doubling alpha2 changes exactly the pose contribution
        Tape tape2;
        auto lb2 = total_loss(tape2, sc.preds, a, gts, {}, 1.0, 3.0);
        c.require(std::abs((lb2.l_total - lb.l_total) - 1.5 * lb.l_pose) <= 1e-12,
                  "alpha2 doubling");
    }

    // enumerating oracle on 50 random scenes
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> pc(0.2, 0.8), ps(0.1, 0.4), az(-400, 800);
    auto xent = [](const std::vector<double>& logits, int target) {
        double mx = *std::max_element(logits.begin(), logits.end()), z = 0;
        for (double v : logits) z += std::exp(v - mx);
        return std::log(z) - (logits[target] - mx);
    };
    for (int scene = 0; scene < 50 && c.ok; ++scene) {
        Tape tape;
        HeadConfig head{3, 8, scene % 2 ? PoseSharing::Separate : PoseSharing::Share};
        MiniScene sc(tape, {4, 4, 0.3, {1.0, 2.0, 0.5}}, head, &rng);
        std::vector<GroundTruthObject> gts;
        for (int g = 0, n = 1 + static_cast<int>(rng() % 3); g < n; ++g)
            gts.push_back({1 + static_cast<int>(rng() % 3), BoxGeom{pc(rng), pc(rng), ps(rng), ps(rng)},
                           az(rng)});
        auto a = match(sc.defaults, gts);
        if (a.n_matched == 0) continue;
        auto mined = hard_negative_mining(background_cls_losses(sc.preds), a, 3.0);
        auto lb = total_loss(tape, sc.preds, a, gts, mined, 1.0, 1.5);

        double l_cls = 0, l_loc = 0, l_pose = 0;
        auto slot_vec = [](const SlotView& s, int n) {
            std::vector<double> v(n);
            for (int j = 0; j < n; ++j) v[j] = s.get(j);
            return v;
        };
        for (std::size_t b = 0; b < sc.preds.n_boxes(); ++b) {
            if (!a.is_positive(b)) continue;
            const auto& gt = gts[a.per_box[b].gt_index];
            l_cls += xent(slot_vec(sc.preds.cls_slot(b), head.cls_channels()), gt.class_id);
            auto target = encode_offsets(gt.box, sc.defaults.boxes[b]);
            auto loc = slot_vec(sc.preds.loc_slot(b), 4);
            for (int j = 0; j < 4; ++j) {
                const double d = loc[j] - target[j];
                l_loc += std::abs(d) < 1 ? 0.5 * d * d : std::abs(d) - 0.5;
            }
            auto pose = slot_vec(sc.preds.pose_slot(b), head.pose_channels());
            const int bin = pose_bin(gt.azimuth_deg, head.n_pose_bins);
            if (head.pose_sharing == PoseSharing::Share) {
                l_pose += xent(pose, bin);
            } else {
                const int off = (gt.class_id - 1) * head.n_pose_bins;
                l_pose += xent(std::vector<double>(pose.begin() + off,
                                                   pose.begin() + off + head.n_pose_bins),
                               bin);
            }
        }
        for (int b : mined) l_cls += xent(slot_vec(sc.preds.cls_slot(b), head.cls_channels()), 0);
        const double expect = (l_cls + 1.0 * l_loc + 1.5 * l_pose) / a.n_matched;
        c.require(rel_err(lb.l_total, expect) <= 1e-9,
                  "oracle mismatch at scene " + std::to_string(scene));
    }
    c.note("closed form + alpha2 + 50-scene oracle to 1e-9");
    return c;
}

// 5. Metric correctness.
Check criterion5() {
    Check c;

    // hand-built 5-detection / 3-gt case; brute-force envelope value
    GroundTruthByImage gts{{"a",
                            {{1, BoxGeom{0.2, 0.2, 0.15, 0.15}, 10.0},
                             {1, BoxGeom{0.5, 0.5, 0.2, 0.2}, 100.0},
                             {1, BoxGeom{0.8, 0.8, 0.15, 0.15}, 250.0}}}};
    DetectionsByImage dets{{"a",
                            {{1, 0.95, BoxGeom{0.2, 0.2, 0.15, 0.15}, pose_bin(10, 8), 1.0},
                             {1, 0.90, BoxGeom{0.35, 0.65, 0.1, 0.1}, 0, 1.0},   // FP
                             {1, 0.85, BoxGeom{0.5, 0.5, 0.2, 0.2}, pose_bin(100, 8), 1.0},
                             {1, 0.80, BoxGeom{0.65, 0.35, 0.1, 0.1}, 0, 1.0},   // FP
                             {1, 0.75, BoxGeom{0.8, 0.8, 0.15, 0.15}, pose_bin(250, 8), 1.0}}}};
    // rows: TP FP TP FP TP -> recall 1/3,1/3,2/3,2/3,1; precision 1,1/2,2/3,1/2,3/5
    // envelope: 1/3*1 + 1/3*(2/3) + 1/3*(3/5)
    const double expect_ap = (1.0 + 2.0 / 3.0 + 3.0 / 5.0) / 3.0;
    auto rep = evaluate(dets, gts, {8}, 8);
    c.require(std::abs(rep.per_class.at(1).ap - expect_ap) <= 1e-12,
              "5-det/3-gt AP " + fmt(rep.per_class.at(1).ap) + " vs " + fmt(expect_ap));
    // all poses correct here: AVP == AP
    c.require(std::abs(rep.per_class.at(1).avp.at(8) - expect_ap) <= 1e-12, "all-correct AVP=AP");

    // all-wrong-pose run: AVP = 0
    DetectionsByImage wrong = dets;
    for (auto& [img, list] : wrong)
        for (auto& d : list) d.pose_bin = (d.pose_bin + 4) % 8;
    auto rep_wrong = evaluate(wrong, gts, {8}, 8);
    c.require(rep_wrong.per_class.at(1).avp.at(8) == 0.0, "all-wrong AVP=0");
    c.require(std::abs(rep_wrong.per_class.at(1).ap - expect_ap) <= 1e-12,
              "AP unchanged by pose flips");

    // AVP <= AP on randomized runs
    std::mt19937_64 rng(5005);
    std::uniform_real_distribution<double> pc(0.15, 0.85), ps(0.1, 0.3), sc01(0.0, 1.0),
        paz(0.0, 360.0);
    for (int t = 0; t < 40 && c.ok; ++t) {
        GroundTruthByImage G;
        DetectionsByImage D;
        for (int i = 0; i < 3; ++i) {
            std::string img = "i" + std::to_string(i);
            G[img] = {};
            for (int g = 0, n = static_cast<int>(rng() % 4); g < n; ++g)
                G[img].push_back({1 + static_cast<int>(rng() % 3),
                                  BoxGeom{pc(rng), pc(rng), ps(rng), ps(rng)}, paz(rng)});
            for (int d = 0, n = static_cast<int>(rng() % 6); d < n; ++d) {
                BoxGeom box{pc(rng), pc(rng), ps(rng), ps(rng)};
                if (!G[img].empty() && rng() % 2) {
                    const auto& g = G[img][rng() % G[img].size()];
                    box = BoxGeom{g.box.cx + 0.01, g.box.cy, g.box.w, g.box.h};
                }
                D[img].push_back({1 + static_cast<int>(rng() % 3), sc01(rng), box,
                                  static_cast<int>(rng() % 8), 1.0});
            }
        }
        auto r = evaluate(D, G, {4, 8}, 8);
        for (const auto& [cls, m] : r.per_class) {
            c.require(m.avp.at(8) <= m.ap + 1e-12, "AVP8 > AP");
            c.require(m.avp.at(4) <= m.ap + 1e-12, "AVP4 > AP");
        }
    }
    c.note("envelope AP exact, AVP bounds on 40 random runs");
    return c;
}

// 6. Desk-scale learning: Share, N_theta = 8, 2000 train / 200 eval.
Check criterion6(std::unique_ptr<DetectorNet>& model_out, RunConfig& cfg_out) {
    Check c;
    const auto t0 = Clock::now();
    RunConfig cfg = baseline_config();
    c.require(cfg.steps <= 20000, "step budget");

    auto result = train_model(cfg, g_train, {});
    const double train_sec = std::chrono::duration<double>(Clock::now() - t0).count();

    auto rep = eval_model(*result.net, cfg, {4, 8}, 8);
    const double mavp4 = rep.mavp.at(4);
    c.require(rep.map >= 0.80, "mAP " + fmt(rep.map) + " < 0.80");
    c.require(mavp4 >= 0.60, "mAVP4 " + fmt(mavp4) + " < 0.60");
    c.require(train_sec <= 45 * 60.0, "training took " + fmt(train_sec / 60) + " min");
    c.note("mAP " + fmt(rep.map) + ", mAVP4 " + fmt(mavp4) + ", " +
           std::to_string(cfg.steps) + " steps in " + fmt(train_sec / 60) + " min");
    model_out = std::move(result.net);
    cfg_out = cfg;
    return c;
}

// 7+8 share one 24-bin-trained model.
struct FineModelAssets {
    std::unique_ptr<DetectorNet> net;
    RunConfig cfg;
    DetectionsByImage dets;
    EvalReport merged4, merged8, merged16, fine24;
};

FineModelAssets train_fine_model() {
    FineModelAssets a;
    a.cfg = baseline_config();
    a.cfg.n_bins = 24;
    a.cfg.seed = 12;
    a.cfg.steps = 6000;  // the 7/8 trends need a competent model, not a peak one
    auto result = train_model(a.cfg, g_train, {});
    a.net = std::move(result.net);
    eval_model(*a.net, a.cfg, {24}, 24, &a.dets);
    auto gts = dataset_gts(g_eval);
    a.merged4 = evaluate_merged(a.dets, gts, 24, 4);
    a.merged8 = evaluate_merged(a.dets, gts, 24, 8);
    a.merged16 = evaluate_merged(a.dets, gts, 24, 16);
    a.fine24 = evaluate(a.dets, gts, {24}, 24);
    return a;
}

// 7. Bin-granularity trend on fixed detections.
Check criterion7(const FineModelAssets& a) {
    Check c;
    const double m4 = a.merged4.mavp.at(4), m8 = a.merged8.mavp.at(8),
                 m16 = a.merged16.mavp.at(16), m24 = a.fine24.mavp.at(24);
    c.require(m4 >= m8 && m8 >= m16 && m16 >= m24,
              "trend broken: " + fmt(m4) + " / " + fmt(m8) + " / " + fmt(m16) + " / " + fmt(m24));
    c.note("mAVP 4/8/16/24 = " + fmt(m4) + " / " + fmt(m8) + " / " + fmt(m16) + " / " + fmt(m24) +
           (m4 > m8 && m8 > m16 && m16 > m24 ? " (strictly decreasing)" : " (non-strict)"));
    return c;
}

// 8. Table 4 protocol: merge correctness + AVP ordering.
Check criterion8(const FineModelAssets& a) {
    Check c;
    // exhaustive 24->4 center-mapping enumeration
    std::vector<int> counts4(4, 0);
    for (int f = 0; f < 24; ++f) {
        const int m = merge_bins(f, 24, 4);
        c.require(m == pose_bin(bin_center_deg(f, 24), 4),
                  "merge(f=" + std::to_string(f) + ") != center re-bin");
        ++counts4[m];
    }
    for (int b = 0; b < 4; ++b)
        c.require(counts4[b] == 6, "coarse bin " + std::to_string(b) + " holds " +
                                       std::to_string(counts4[b]) + " fine bins");
    // ordering on the same detections
    const double m4 = a.merged4.mavp.at(4), m8 = a.merged8.mavp.at(8), m24 = a.fine24.mavp.at(24);
    c.require(m4 >= m8 && m8 >= m24,
              "AVP ordering: " + fmt(m4) + " / " + fmt(m8) + " / " + fmt(m24));
    c.note("24->4 enumeration exact; AVP 4/8/24 = " + fmt(m4) + " / " + fmt(m8) + " / " + fmt(m24));
    return c;
}

// 9. Share vs Separate through the CLI.
Check criterion9() {
    Check c;
    RunConfig base = baseline_config();
    base.steps = 3000;  // enough for nonzero mAVP4 in both modes
    base.seed = 13;

    std::string table;
    for (const std::string mode : {"share", "separate"}) {
        RunConfig cfg = base;
        cfg.pose_sharing = mode;
        auto result = train_model(cfg, g_train, {});

        // pose-head channel counts: N_theta vs N_c * N_theta per aspect
        const int expect = static_cast<int>(cfg.aspect_ratios.size()) *
                           (mode == "share" ? cfg.n_bins : cfg.n_classes * cfg.n_bins);
        c.require(result.net->param("head0_pose_w")->shape[0] == expect,
                  mode + " pose head channels");

        const fs::path ckpt = g_scratch / (mode + ".ckpt");
        SgdOptimizer opt(cfg.sgd_config());
        save_checkpoint(Checkpoint::from_net(*result.net, opt, result.final_step), ckpt.string());

        // the comparison table must come out of the CLI eval command
        const fs::path report = g_scratch / (mode + "_report.txt");
        std::ostringstream cmd;
        cmd << '"' << g_cli << "\" eval --checkpoint \"" << ckpt.string() << "\" --data \""
            << (g_scratch / "eval").string() << "\" --bins 8 --merge-from-fine 4 --report \""
            << report.string() << '"';
        c.require(std::system(cmd.str().c_str()) == 0, "cmd_eval failed for " + mode);
        std::ifstream rf(report);
        std::stringstream ss;
        ss << rf.rdbuf();
        c.require(ss.str().find("AVP") != std::string::npos, mode + " report lacks AVP table");
        table += mode + ":\n" + ss.str() + "\n";

        // nonzero 4-view mAVP
        auto rep = eval_model(*result.net, cfg, {4, 8}, 8);
        c.require(rep.mavp.at(4) > 0.0, mode + " mAVP4 is zero");
        c.note("share/separate mAVP4 both nonzero");
    }
    std::printf("%s", table.c_str());
    return c;
}

// 10. Determinism & persistence.
Check criterion10() {
    Check c;
    RunConfig cfg = baseline_config();
    cfg.steps = 60;
    cfg.log_interval = 1;
    cfg.seed = 14;

    auto run = [&](int steps, const Checkpoint* resume, std::vector<std::string>& log,
                   Checkpoint* snap_at = nullptr, int snap_step = 0) {
        RunConfig rc = cfg;
        rc.steps = steps;
        rc.checkpoint_interval = snap_at ? snap_step : 0;
        auto sink = [&](const Checkpoint& ck) {
            if (snap_at && ck.step == snap_step) *snap_at = ck;
        };
        return train_model(rc, g_train, [&](const std::string& line) { log.push_back(line); },
                           snap_at ? std::function<void(const Checkpoint&)>(sink)
                                   : std::function<void(const Checkpoint&)>{},
                           resume);
    };

    // (a) same seed -> identical per-step metrics log
    std::vector<std::string> log_a, log_b;
    auto ra = run(60, nullptr, log_a);
    std::vector<std::string> ignore;
    Checkpoint snap;
    run(60, nullptr, log_b, &snap, 30);
    c.require(log_a == log_b, "same-seed logs differ");
    c.require(snap.step == 30, "mid-run checkpoint missing");

    // (b) checkpoint save/load reproduces logits <= 1e-6
    const fs::path ckpt = g_scratch / "det.ckpt";
    SgdOptimizer opt(cfg.sgd_config());
    save_checkpoint(Checkpoint::from_net(*ra.net, opt, 60), ckpt.string());
    auto loaded = load_checkpoint(ckpt.string());
    auto net2 = loaded.restore_net();
    Tape t1, t2;
    auto p1 = ra.net->forward(t1, g_eval.images[0]);
    auto p2 = net2->forward(t2, g_eval.images[0]);
    double worst = 0;
    for (std::size_t b = 0; b < p1.n_boxes(); ++b)
        for (int j = 0; j < p1.head.cls_channels(); ++j)
            worst = std::max(worst, std::abs(p1.cls_slot(b).get(j) - p2.cls_slot(b).get(j)));
    c.require(worst <= 1e-6, "logit drift " + fmt(worst));

    // (c) resume from step 30 matches the uninterrupted run exactly
    std::vector<std::string> log_resumed;
    run(60, &snap, log_resumed);
    std::vector<std::string> tail(log_a.end() - static_cast<long>(log_resumed.size()),
                                  log_a.end());
    c.require(!log_resumed.empty() && log_resumed == tail, "resumed log diverges");
    c.note("log hash equal, logits <= 1e-6, resume exact over " +
           std::to_string(log_resumed.size()) + " steps");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;  // empty = run everything
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) g_cli = argv[++i];
        else if (arg == "--only" && i + 1 < argc) {
            std::istringstream ss(argv[++i]);
            for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
        }
    }
    if (g_cli.empty()) {
        std::fprintf(stderr,
                     "usage: acceptance --cli <path-to-sspose-binary> [--only n[,n...]]\n");
        return 2;
    }
    auto want = [&](int n) { return only.empty() || only.count(n) != 0; };
    g_scratch = fs::temp_directory_path() / "sspose_acceptance";
    fs::remove_all(g_scratch);
    fs::create_directories(g_scratch);

    try {
        if (want(1)) report(1, "gradient fidelity", criterion1());
        if (want(2)) report(2, "geometry oracles", criterion2());
        if (want(3)) report(3, "matching semantics", criterion3());
        if (want(4)) report(4, "loss structure (Eq. 1)", criterion4());
        if (want(5)) report(5, "metric correctness", criterion5());

        if (want(6) || want(7) || want(8) || want(9)) prepare_datasets();
        if (want(6)) {
            std::unique_ptr<DetectorNet> baseline;
            RunConfig baseline_cfg;
            report(6, "desk-scale learning", criterion6(baseline, baseline_cfg));
        }
        if (want(7) || want(8)) {
            auto fine = train_fine_model();
            if (want(7)) report(7, "bin-granularity trend", criterion7(fine));
            if (want(8)) report(8, "Table 4 merge protocol", criterion8(fine));
        }
        if (want(9)) report(9, "share vs separate heads", criterion9());
        if (want(10)) report(10, "determinism & persistence", criterion10());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
        return 1;
    }

    fs::remove_all(g_scratch);
    std::printf("%s\n", g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT");
    return g_failures == 0 ? 0 : 1;
}
