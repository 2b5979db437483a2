#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hsisr/trainer.hpp"

namespace test_support {

using Named = std::vector<std::pair<std::string, hsisr::Tensor3<float>>>;

inline hsisr::NetworkConfig tiny_network(int bands = 31) {
    hsisr::NetworkConfig c;
    c.feature_width = 8;
    c.ssb_per_stage = 1;
    c.hsi_bands = bands;
    c.attention_reduction = 4;
    return c;
}

/// Synthetic cubes and RGB images cut into 16x16 HR patches at tau 4.
struct TinyData {
    Named labeled;
    Named unlabeled;
    Named rgb;
    Named test;
    hsisr::ScaleConfig scale{4, 16};

    hsisr::TrainData train_data() const { return hsisr::make_train_data(labeled, unlabeled, rgb, scale); }
};

inline TinyData tiny_data(int labeled = 2, int edge = 32, int bands = 31, std::uint64_t seed = 3) {
    TinyData d;
    const auto cubes = hsisr::synth_dataset(labeled + 4, bands, edge, seed);
    const auto rgb = hsisr::synth_rgb_dataset(2, edge, seed + 1);
    for (int i = 0; i < labeled; ++i) d.labeled.emplace_back("l" + std::to_string(i), cubes[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 2; ++i) {
        d.unlabeled.emplace_back("u" + std::to_string(i), cubes[static_cast<std::size_t>(labeled + i)]);
        d.test.emplace_back("t" + std::to_string(i), cubes[static_cast<std::size_t>(labeled + 2 + i)]);
        d.rgb.emplace_back("r" + std::to_string(i), rgb[static_cast<std::size_t>(i)]);
    }
    return d;
}

inline hsisr::CrfMatrix tiny_crf(int bands = 31) {
    return hsisr::load_crf(HSISR_CRF_ASSET, hsisr::band_centers(bands, 400, 700));
}

}  // namespace test_support
