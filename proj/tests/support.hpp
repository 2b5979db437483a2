#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "hsisr/rng.hpp"
#include "hsisr/tensor.hpp"

namespace test_support {

template <typename T = float>
hsisr::Tensor3<T> random_tensor(int c, int r, int w, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    hsisr::Rng rng(seed);
    hsisr::Tensor3<T> out(c, r, w);
    for (auto& v : out.values()) {
        v = static_cast<T>(lo + (hi - lo) * hsisr::uniform01(rng));
    }
    return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("hsisr_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline double max_abs_diff(const hsisr::Tensor3<float>& a, const hsisr::Tensor3<float>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    }
    return m;
}

}  // namespace test_support
