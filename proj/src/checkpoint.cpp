#include "sspose/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "sspose/errors.hpp"

namespace sspose {

namespace {

constexpr char kMagic[8] = {'S', 'S', 'P', 'C', 'K', 'P', 'T', '\n'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

void put_doubles(std::string& out, const std::vector<double>& v) {
    static_assert(sizeof(double) == 8);
    for (double x : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, 8);
        for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xff));
    }
}

std::vector<double> get_doubles(const unsigned char* p, std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= std::uint64_t(p[i * 8 + b]) << (8 * b);
        std::memcpy(&v[i], &bits, 8);
    }
    return v;
}

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t n, std::uint32_t seed) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t c = seed ^ 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

Checkpoint Checkpoint::from_net(const DetectorNet& net, const SgdOptimizer& opt, int step) {
    Checkpoint c;
    c.spec = net.spec();
    c.head = net.head();
    c.step = step;
    for (const auto& [name, t] : net.parameters()) c.params.emplace_back(name, t->data);
    c.momentum = const_cast<SgdOptimizer&>(opt).velocity();
    return c;
}

std::unique_ptr<DetectorNet> Checkpoint::restore_net() const {
    auto net = std::make_unique<DetectorNet>(spec, head, 0);
    for (const auto& [name, data] : params) {
        Tensor* t = net->param(name);
        if (t->data.size() != data.size())
            throw DataError("checkpoint parameter " + name + " has " +
                            std::to_string(data.size()) + " values, model expects " +
                            std::to_string(t->data.size()));
        t->data = data;
    }
    return net;
}

void Checkpoint::restore_momentum(SgdOptimizer& opt) const { opt.velocity() = momentum; }

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    nlohmann::json header;
    header["step"] = ckpt.step;
    header["network"] = {{"input_res", ckpt.spec.input_res},
                         {"channels", ckpt.spec.channels},
                         {"s_min", ckpt.spec.s_min},
                         {"s_max", ckpt.spec.s_max},
                         {"aspect_ratios", ckpt.spec.aspect_ratios}};
    header["head"] = {{"n_classes", ckpt.head.n_classes},
                      {"n_pose_bins", ckpt.head.n_pose_bins},
                      {"pose_sharing",
                       ckpt.head.pose_sharing == PoseSharing::Share ? "share" : "separate"}};
    nlohmann::json plist = nlohmann::json::array();
    for (const auto& [name, data] : ckpt.params)
        plist.push_back({{"name", name}, {"count", data.size()}});
    header["params"] = plist;
    nlohmann::json mlist = nlohmann::json::array();
    for (const auto& [name, data] : ckpt.momentum)
        mlist.push_back({{"name", name}, {"count", data.size()}});
    header["momentum"] = mlist;

    std::string body(kMagic, 8);
    body.push_back(char(kVersion));
    const std::string hs = header.dump();
    put_u32(body, static_cast<std::uint32_t>(hs.size()));
    body += hs;
    for (const auto& [name, data] : ckpt.params) put_doubles(body, data);
    for (const auto& [name, data] : ckpt.momentum) put_doubles(body, data);
    put_u32(body, crc32(reinterpret_cast<const unsigned char*>(body.data()), body.size()));

    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write checkpoint: " + path);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint: " + path);
    std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(body.data());
    if (body.size() < 17 || std::memcmp(body.data(), kMagic, 8) != 0)
        throw DataError("not a checkpoint file: " + path);
    if (p[8] != kVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(int(p[8])) +
                        " (this build reads version " + std::to_string(int(kVersion)) + ")");
    const std::uint32_t stored_crc = get_u32(p + body.size() - 4);
    if (crc32(p, body.size() - 4) != stored_crc)
        throw DataError("checkpoint checksum mismatch: " + path);

    const std::uint32_t hlen = get_u32(p + 9);
    if (13 + hlen + 4 > body.size()) throw DataError("truncated checkpoint header: " + path);
    nlohmann::json header = nlohmann::json::parse(body.substr(13, hlen));

    Checkpoint c;
    c.step = header.at("step").get<int>();
    const auto& net = header.at("network");
    c.spec.input_res = net.at("input_res").get<int>();
    c.spec.channels = net.at("channels").get<std::vector<int>>();
    c.spec.s_min = net.at("s_min").get<double>();
    c.spec.s_max = net.at("s_max").get<double>();
    c.spec.aspect_ratios = net.at("aspect_ratios").get<std::vector<double>>();
    const auto& head = header.at("head");
    c.head.n_classes = head.at("n_classes").get<int>();
    c.head.n_pose_bins = head.at("n_pose_bins").get<int>();
    c.head.pose_sharing = head.at("pose_sharing").get<std::string>() == "share"
                              ? PoseSharing::Share
                              : PoseSharing::Separate;

    std::size_t off = 13 + hlen;
    for (const auto& pj : header.at("params")) {
        const std::size_t count = pj.at("count").get<std::size_t>();
        if (off + count * 8 + 4 > body.size()) throw DataError("truncated checkpoint: " + path);
        c.params.emplace_back(pj.at("name").get<std::string>(), get_doubles(p + off, count));
        off += count * 8;
    }
    for (const auto& mj : header.at("momentum")) {
        const std::size_t count = mj.at("count").get<std::size_t>();
        if (off + count * 8 + 4 > body.size()) throw DataError("truncated checkpoint: " + path);
        c.momentum[mj.at("name").get<std::string>()] = get_doubles(p + off, count);
        off += count * 8;
    }
    if (off + 4 != body.size()) throw DataError("checkpoint has trailing bytes: " + path);
    return c;
}

}  // namespace sspose
