#include "sspose/config.hpp"

#include <fstream>
#include <sstream>

#include "sspose/errors.hpp"

namespace sspose {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

template <typename T>
std::vector<T> parse_list(const std::string& v, const std::string& key) {
    std::vector<T> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) {
        std::istringstream el(trim(item));
        T x;
        if (!(el >> x)) throw ConfigError("bad list element for " + key + ": '" + item + "'");
        out.push_back(x);
    }
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

double parse_num(const std::string& v, const std::string& key) {
    std::istringstream is(v);
    double x;
    char c;
    if (!(is >> x) || is >> c) throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw ConfigError("bad boolean value for " + key + ": '" + v + "'");
}

}  // namespace

void RunConfig::apply_line(const std::string& key, const std::string& value) {
    if (key == "alpha1") alpha1 = parse_num(value, key);
    else if (key == "alpha2") alpha2 = parse_num(value, key);
    else if (key == "neg_pos_ratio") neg_pos_ratio = parse_num(value, key);
    else if (key == "force_best_match") force_best_match = parse_bool(value, key);
    else if (key == "lr") lr = parse_num(value, key);
    else if (key == "momentum") momentum = parse_num(value, key);
    else if (key == "weight_decay") weight_decay = parse_num(value, key);
    else if (key == "decay_factor") decay_factor = parse_num(value, key);
    else if (key == "batch_size") batch_size = static_cast<int>(parse_num(value, key));
    else if (key == "steps") steps = static_cast<int>(parse_num(value, key));
    else if (key == "n_classes") n_classes = static_cast<int>(parse_num(value, key));
    else if (key == "n_bins") n_bins = static_cast<int>(parse_num(value, key));
    else if (key == "pose_sharing") {
        if (value != "share" && value != "separate")
            throw ConfigError("pose_sharing must be 'share' or 'separate', got '" + value + "'");
        pose_sharing = value;
    } else if (key == "input_res") input_res = static_cast<int>(parse_num(value, key));
    else if (key == "channels") channels = parse_list<int>(value, key);
    else if (key == "s_min") s_min = parse_num(value, key);
    else if (key == "s_max") s_max = parse_num(value, key);
    else if (key == "aspect_ratios") aspect_ratios = parse_list<double>(value, key);
    else if (key == "score_thresh") score_thresh = parse_num(value, key);
    else if (key == "nms_iou") nms_iou = parse_num(value, key);
    else if (key == "top_k") top_k = static_cast<int>(parse_num(value, key));
    else if (key == "patch_sampling") patch_sampling = parse_bool(value, key);
    else if (key == "min_objects") min_objects = static_cast<int>(parse_num(value, key));
    else if (key == "max_objects") max_objects = static_cast<int>(parse_num(value, key));
    else if (key == "min_scale") min_scale = parse_num(value, key);
    else if (key == "max_scale") max_scale = parse_num(value, key);
    else if (key == "noise_level") noise_level = parse_num(value, key);
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_num(value, key));
    else if (key == "log_interval") log_interval = static_cast<int>(parse_num(value, key));
    else if (key == "checkpoint_interval") checkpoint_interval = static_cast<int>(parse_num(value, key));
    else throw ConfigError("unknown config key: '" + key + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        cfg.apply_line(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

NetworkSpec RunConfig::network_spec() const {
    NetworkSpec s;
    s.input_res = input_res;
    s.channels = channels;
    s.s_min = s_min;
    s.s_max = s_max;
    s.aspect_ratios = aspect_ratios;
    return s;
}

HeadConfig RunConfig::head_config() const {
    return {n_classes, n_bins,
            pose_sharing == "share" ? PoseSharing::Share : PoseSharing::Separate};
}

SceneSpec RunConfig::scene_spec() const {
    return {input_res, min_objects, max_objects, min_scale, max_scale, noise_level, seed};
}

SgdConfig RunConfig::sgd_config() const {
    return {lr, momentum, weight_decay, steps, decay_factor};
}

TrainOptions RunConfig::train_options() const {
    return {alpha1, alpha2, neg_pos_ratio, force_best_match};
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    os.precision(17);
    auto list_d = [](const std::vector<double>& v) {
        std::ostringstream s;
        for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
        return s.str();
    };
    auto list_i = [](const std::vector<int>& v) {
        std::ostringstream s;
        for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
        return s.str();
    };
    os << "alpha1 = " << alpha1 << "\nalpha2 = " << alpha2
       << "\nneg_pos_ratio = " << neg_pos_ratio
       << "\nforce_best_match = " << (force_best_match ? 1 : 0) << "\nlr = " << lr
       << "\nmomentum = " << momentum << "\nweight_decay = " << weight_decay
       << "\ndecay_factor = " << decay_factor << "\nbatch_size = " << batch_size
       << "\nsteps = " << steps << "\nn_classes = " << n_classes << "\nn_bins = " << n_bins
       << "\npose_sharing = " << pose_sharing << "\ninput_res = " << input_res
       << "\nchannels = " << list_i(channels) << "\ns_min = " << s_min << "\ns_max = " << s_max
       << "\naspect_ratios = " << list_d(aspect_ratios) << "\nscore_thresh = " << score_thresh
       << "\nnms_iou = " << nms_iou << "\ntop_k = " << top_k
       << "\npatch_sampling = " << (patch_sampling ? 1 : 0) << "\nmin_objects = " << min_objects
       << "\nmax_objects = " << max_objects << "\nmin_scale = " << min_scale
       << "\nmax_scale = " << max_scale << "\nnoise_level = " << noise_level
       << "\nseed = " << seed << "\nlog_interval = " << log_interval
       << "\ncheckpoint_interval = " << checkpoint_interval << "\n";
    return os.str();
}

}  // namespace sspose
