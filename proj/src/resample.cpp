#include "hsisr/resample.hpp"

#include "hsisr/error.hpp"

namespace hsisr {

ResampleAxis make_resample_axis(int in_size, int out_size, bool antialias) {
    if (in_size < 1 || out_size < 1) {
        throw ValidationError("resample axis sizes must be >= 1");
    }
    ResampleAxis axis;
    axis.in_size = in_size;
    axis.out_size = out_size;

    const double scale = static_cast<double>(out_size) / in_size;
    const bool shrink = antialias && scale < 1.0;
    const double support = shrink ? 2.0 / scale : 2.0;
    axis.taps = static_cast<int>(std::ceil(2.0 * support)) + 2;
    axis.index.resize(static_cast<std::size_t>(out_size) * axis.taps);
    axis.weight.resize(axis.index.size());

    for (int i = 0; i < out_size; ++i) {
        const double x = (i + 0.5) / scale - 0.5;
        const int left = static_cast<int>(std::floor(x - support));
        double sum = 0.0;
        for (int t = 0; t < axis.taps; ++t) {
            const int j = left + t;
            const double d = x - j;
            const double w = shrink ? scale * keys_kernel(scale * d) : keys_kernel(d);
            const std::size_t k = static_cast<std::size_t>(i) * axis.taps + t;
            axis.index[k] = reflect_index(j, in_size);
            axis.weight[k] = w;
            sum += w;
        }
        for (int t = 0; t < axis.taps; ++t) {
            axis.weight[static_cast<std::size_t>(i) * axis.taps + t] /= sum;
        }
    }
    return axis;
}

}  // namespace hsisr
