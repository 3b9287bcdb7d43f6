#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sspose/network.hpp"

namespace sspose {

// Versioned binary checkpoint: magic + version byte, JSON header (network
// spec, head config, step), raw little-endian double blobs per parameter
// (and momentum buffers), CRC32 trailer verified on load.
struct Checkpoint {
    NetworkSpec spec;
    HeadConfig head;
    int step = 0;
    std::vector<std::pair<std::string, std::vector<double>>> params;
    std::map<std::string, std::vector<double>> momentum;

    static Checkpoint from_net(const DetectorNet& net, const SgdOptimizer& opt, int step);
    std::unique_ptr<DetectorNet> restore_net() const;
    void restore_momentum(SgdOptimizer& opt) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::uint32_t crc32(const unsigned char* data, std::size_t n, std::uint32_t seed = 0);

}  // namespace sspose
