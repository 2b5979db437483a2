#include "hsisr/layers.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace hsisr::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

/// Column matrix (in*k*k, rows*cols) for a zero-padded "same" convolution.
template <typename T>
void im2col(const Tensor3<T>& x, int k, std::vector<T>& cols) {
    const int h = x.rows();
    const int w = x.cols();
    const int pad = k / 2;
    const std::size_t hw = x.plane_size();
    cols.assign(static_cast<std::size_t>(x.channels()) * k * k * hw, T(0));
    for (int c = 0; c < x.channels(); ++c) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                T* dst = &cols[((static_cast<std::size_t>(c) * k + ky) * k + kx) * hw];
                const int dy = ky - pad;
                const int dx = kx - pad;
                const int x0 = std::max(0, -dx);
                const int x1 = std::min(w, w - dx);
                for (int y = 0; y < h; ++y) {
                    const int sy = y + dy;
                    if (sy < 0 || sy >= h || x1 <= x0) {
                        continue;
                    }
                    const T* src = &x(c, sy, 0);
                    T* row = dst + static_cast<std::size_t>(y) * w;
                    for (int xx = x0; xx < x1; ++xx) {
                        row[xx] = src[xx + dx];
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im(const std::vector<T>& cols, int k, Tensor3<T>& dx) {
    const int h = dx.rows();
    const int w = dx.cols();
    const int pad = k / 2;
    const std::size_t hw = dx.plane_size();
    for (int c = 0; c < dx.channels(); ++c) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const T* src = &cols[((static_cast<std::size_t>(c) * k + ky) * k + kx) * hw];
                const int dy = ky - pad;
                const int ddx = kx - pad;
                const int x0 = std::max(0, -ddx);
                const int x1 = std::min(w, w - ddx);
                for (int y = 0; y < h; ++y) {
                    const int sy = y + dy;
                    if (sy < 0 || sy >= h || x1 <= x0) {
                        continue;
                    }
                    T* dst = &dx(c, sy, 0);
                    const T* row = src + static_cast<std::size_t>(y) * w;
                    for (int xx = x0; xx < x1; ++xx) {
                        dst[xx + ddx] += row[xx];
                    }
                }
            }
        }
    }
}

template <typename T>
T sigmoid(T v) {
    return T(1) / (T(1) + std::exp(-v));
}

}  // namespace

template <typename T>
void fill_gaussian(std::vector<T>& values, double stddev, Rng& rng) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < values.size(); i += 2) {
        const double u1 = 1.0 - uniform01(rng);  // (0,1]
        const double u2 = uniform01(rng);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        values[i] = static_cast<T>(stddev * radius * std::cos(two_pi * u2));
        if (i + 1 < values.size()) {
            values[i + 1] = static_cast<T>(stddev * radius * std::sin(two_pi * u2));
        }
    }
}

// ---------------------------------------------------------------------------
// Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::string name, int in_channels, int out_channels, int kernel)
    : in_(in_channels), out_(out_channels), kernel_(kernel) {
    if (in_channels < 1 || out_channels < 1 || kernel < 1 || kernel % 2 == 0) {
        throw ValidationError("conv '" + name + "' needs positive channels and an odd kernel");
    }
    weight_.name = name + ".weight";
    weight_.shape = {out_channels, in_channels, kernel, kernel};
    weight_.value.assign(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel, T(0));
    weight_.grad.assign(weight_.value.size(), T(0));
    bias_.name = name + ".bias";
    bias_.shape = {out_channels};
    bias_.value.assign(static_cast<std::size_t>(out_channels), T(0));
    bias_.grad.assign(bias_.value.size(), T(0));
}

template <typename T>
void Conv2d<T>::init(double gain, Rng& rng) {
    const double fan_in = static_cast<double>(in_) * kernel_ * kernel_;
    if (gain == 0.0) {
        std::fill(weight_.value.begin(), weight_.value.end(), T(0));
    } else {
        fill_gaussian(weight_.value, gain / std::sqrt(fan_in), rng);
    }
    std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

template <typename T>
Tensor3<T> Conv2d<T>::forward(const Tensor3<T>& x) const {
    if (x.channels() != in_) {
        throw ShapeError("conv '" + weight_.name + "' expects " + std::to_string(in_) + " channels, got " +
                         std::to_string(x.channels()));
    }
    const auto hw = static_cast<Eigen::Index>(x.plane_size());
    const auto patch = static_cast<Eigen::Index>(in_) * kernel_ * kernel_;
    Tensor3<T> y(out_, x.rows(), x.cols());
    ConstMatMap<T> w(weight_.value.data(), out_, patch);
    MatMap<T> ym(y.data(), out_, hw);
    if (kernel_ == 1) {
        ym.noalias() = w * ConstMatMap<T>(x.data(), in_, hw);
    } else {
        std::vector<T> cols;
        im2col(x, kernel_, cols);
        ym.noalias() = w * ConstMatMap<T>(cols.data(), patch, hw);
    }
    for (int o = 0; o < out_; ++o) {
        ym.row(o).array() += bias_.value[static_cast<std::size_t>(o)];
    }
    return y;
}

template <typename T>
Tensor3<T> Conv2d<T>::backward(const Tensor3<T>& x, const Tensor3<T>& grad_out, bool need_input_grad) {
    if (x.channels() != in_ || grad_out.channels() != out_ || grad_out.rows() != x.rows() ||
        grad_out.cols() != x.cols()) {
        throw ShapeError("conv '" + weight_.name + "' backward shape mismatch");
    }
    const auto hw = static_cast<Eigen::Index>(x.plane_size());
    const auto patch = static_cast<Eigen::Index>(in_) * kernel_ * kernel_;
    ConstMatMap<T> dy(grad_out.data(), out_, hw);
    MatMap<T> dw(weight_.grad.data(), out_, patch);
    ConstMatMap<T> w(weight_.value.data(), out_, patch);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(bias_.grad.data(), out_);
    db += dy.rowwise().sum();

    if (kernel_ == 1) {
        ConstMatMap<T> xm(x.data(), in_, hw);
        dw.noalias() += dy * xm.transpose();
        if (!need_input_grad) {
            return {};
        }
        Tensor3<T> dx(in_, x.rows(), x.cols());
        MatMap<T>(dx.data(), in_, hw).noalias() = w.transpose() * dy;
        return dx;
    }
    std::vector<T> cols;
    im2col(x, kernel_, cols);
    dw.noalias() += dy * ConstMatMap<T>(cols.data(), patch, hw).transpose();
    if (!need_input_grad) {
        return {};
    }
    MatMap<T>(cols.data(), patch, hw).noalias() = w.transpose() * dy;
    Tensor3<T> dx(in_, x.rows(), x.cols());
    col2im(cols, kernel_, dx);
    return dx;
}

// ---------------------------------------------------------------------------
// elementwise / rearrangement

template <typename T>
Tensor3<T> pixel_shuffle(const Tensor3<T>& x, int r) {
    if (r < 1 || x.channels() % (r * r) != 0) {
        throw ShapeError("pixel_shuffle: " + std::to_string(x.channels()) + " channels not divisible by r^2 = " +
                         std::to_string(r * r));
    }
    if (r == 1) {
        return x;
    }
    const int c_out = x.channels() / (r * r);
    Tensor3<T> y(c_out, x.rows() * r, x.cols() * r);
    for (int c = 0; c < c_out; ++c) {
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < r; ++j) {
                const int q = (c * r + i) * r + j;
                for (int h = 0; h < x.rows(); ++h) {
                    const T* src = &x(q, h, 0);
                    T* dst = &y(c, h * r + i, j);
                    for (int w = 0; w < x.cols(); ++w) {
                        dst[w * r] = src[w];
                    }
                }
            }
        }
    }
    return y;
}

template <typename T>
Tensor3<T> pixel_unshuffle(const Tensor3<T>& y, int r) {
    if (r < 1 || y.rows() % r != 0 || y.cols() % r != 0) {
        throw ShapeError("pixel_unshuffle: spatial size not divisible by r");
    }
    if (r == 1) {
        return y;
    }
    const int h_in = y.rows() / r;
    const int w_in = y.cols() / r;
    Tensor3<T> x(y.channels() * r * r, h_in, w_in);
    for (int c = 0; c < y.channels(); ++c) {
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < r; ++j) {
                const int q = (c * r + i) * r + j;
                for (int h = 0; h < h_in; ++h) {
                    const T* src = &y(c, h * r + i, j);
                    T* dst = &x(q, h, 0);
                    for (int w = 0; w < w_in; ++w) {
                        dst[w] = src[w * r];
                    }
                }
            }
        }
    }
    return x;
}

template <typename T>
Tensor3<T> relu(const Tensor3<T>& x) {
    Tensor3<T> y = x;
    for (auto& v : y.values()) {
        v = v > T(0) ? v : T(0);
    }
    return y;
}

template <typename T>
Tensor3<T> relu_backward(const Tensor3<T>& pre, const Tensor3<T>& grad) {
    Tensor3<T> out = grad;
    const T* p = pre.data();
    T* g = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(p[i] > T(0))) {
            g[i] = T(0);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// ChannelAttention

template <typename T>
ChannelAttention<T>::ChannelAttention(const std::string& name, int channels, int reduction)
    : squeeze_(name + ".squeeze", channels, std::max(1, channels / std::max(1, reduction)), 1),
      excite_(name + ".excite", std::max(1, channels / std::max(1, reduction)), channels, 1) {}

template <typename T>
void ChannelAttention<T>::init(Rng& rng) {
    squeeze_.init(std::sqrt(2.0), rng);
    excite_.init(1.0, rng);
}

template <typename T>
Tensor3<T> ChannelAttention<T>::forward(const Tensor3<T>& x, Cache* cache) const {
    const int channels = x.channels();
    Tensor3<T> pooled(channels, 1, 1);
    const T inv = T(1) / static_cast<T>(x.plane_size());
    for (int c = 0; c < channels; ++c) {
        T sum = T(0);
        for (T v : x.channel(c)) {
            sum += v;
        }
        pooled(c, 0, 0) = sum * inv;
    }
    Tensor3<T> hidden_pre = squeeze_.forward(pooled);
    Tensor3<T> hidden = relu(hidden_pre);
    Tensor3<T> gate = excite_.forward(hidden);
    for (auto& g : gate.values()) {
        g = sigmoid(g);
    }
    Tensor3<T> y(x.channels(), x.rows(), x.cols());
    for (int c = 0; c < channels; ++c) {
        const T g = gate(c, 0, 0);
        const auto src = x.channel(c);
        auto dst = y.channel(c);
        for (std::size_t i = 0; i < src.size(); ++i) {
            dst[i] = src[i] * g;
        }
    }
    if (cache) {
        cache->pooled = std::move(pooled);
        cache->hidden_pre = std::move(hidden_pre);
        cache->hidden = std::move(hidden);
        cache->gate = std::move(gate);
    }
    return y;
}

template <typename T>
Tensor3<T> ChannelAttention<T>::backward(const Tensor3<T>& x, const Cache& cache, const Tensor3<T>& grad_out) {
    const int channels = x.channels();
    Tensor3<T> dx(channels, x.rows(), x.cols());
    Tensor3<T> dgate_pre(channels, 1, 1);
    for (int c = 0; c < channels; ++c) {
        const T g = cache.gate(c, 0, 0);
        const auto src = x.channel(c);
        const auto dy = grad_out.channel(c);
        auto dst = dx.channel(c);
        T dg = T(0);
        for (std::size_t i = 0; i < src.size(); ++i) {
            dst[i] = dy[i] * g;
            dg += dy[i] * src[i];
        }
        dgate_pre(c, 0, 0) = dg * g * (T(1) - g);
    }
    Tensor3<T> dhidden = excite_.backward(cache.hidden, dgate_pre);
    Tensor3<T> dpooled = squeeze_.backward(cache.pooled, relu_backward(cache.hidden_pre, dhidden));
    const T inv = T(1) / static_cast<T>(x.plane_size());
    for (int c = 0; c < channels; ++c) {
        const T d = dpooled(c, 0, 0) * inv;
        for (auto& v : dx.channel(c)) {
            v += d;
        }
    }
    return dx;
}

template <typename T>
void ChannelAttention<T>::collect(ParamList<T>& out) {
    squeeze_.collect(out);
    excite_.collect(out);
}

// ---------------------------------------------------------------------------
// SpatialSpectralBlock

template <typename T>
SpatialSpectralBlock<T>::SpatialSpectralBlock(const std::string& name, int channels, int reduction)
    : conv1_(name + ".conv1", channels, channels, 3),
      conv2_(name + ".conv2", channels, channels, 3),
      attention_(name + ".attention", channels, reduction) {}

template <typename T>
void SpatialSpectralBlock<T>::init(Rng& rng) {
    conv1_.init(std::sqrt(2.0), rng);
    // residual branch starts small
    conv2_.init(0.1, rng);
    attention_.init(rng);
}

template <typename T>
Tensor3<T> SpatialSpectralBlock<T>::forward(const Tensor3<T>& x, Cache* cache) const {
    Tensor3<T> pre = conv1_.forward(x);
    Tensor3<T> hidden = relu(pre);
    Tensor3<T> spatial = conv2_.forward(hidden);
    spatial += x;
    Tensor3<T> y;
    if (cache) {
        y = attention_.forward(spatial, &cache->attention);
    } else {
        y = attention_.forward(spatial, nullptr);
    }
    y += spatial;
    if (cache) {
        cache->input = x;
        cache->pre_relu = std::move(pre);
        cache->hidden = std::move(hidden);
        cache->spatial = std::move(spatial);
    }
    return y;
}

template <typename T>
Tensor3<T> SpatialSpectralBlock<T>::backward(const Cache& cache, const Tensor3<T>& grad_out) {
    Tensor3<T> dspatial = attention_.backward(cache.spatial, cache.attention, grad_out);
    dspatial += grad_out;
    Tensor3<T> dhidden = conv2_.backward(cache.hidden, dspatial);
    Tensor3<T> dx = conv1_.backward(cache.input, relu_backward(cache.pre_relu, dhidden));
    dx += dspatial;
    return dx;
}

template <typename T>
void SpatialSpectralBlock<T>::collect(ParamList<T>& out) {
    conv1_.collect(out);
    conv2_.collect(out);
    attention_.collect(out);
}

// ---------------------------------------------------------------------------
// Upsampler

template <typename T>
Upsampler<T>::Upsampler(const std::string& name, int channels, int factor) : factor_(factor) {
    if (factor < 1) {
        throw ValidationError("upsampling factor must be >= 1");
    }
    if (factor > 1) {
        conv_ = Conv2d<T>(name + ".conv", channels, channels * factor * factor, 3);
    }
}

template <typename T>
void Upsampler<T>::init(Rng& rng) {
    if (factor_ > 1) {
        conv_.init(1.0, rng);
    }
}

template <typename T>
Tensor3<T> Upsampler<T>::forward(const Tensor3<T>& x) const {
    if (factor_ == 1) {
        return x;
    }
    return pixel_shuffle(conv_.forward(x), factor_);
}

template <typename T>
Tensor3<T> Upsampler<T>::backward(const Tensor3<T>& x, const Tensor3<T>& grad_out) {
    if (factor_ == 1) {
        return grad_out;
    }
    return conv_.backward(x, pixel_unshuffle(grad_out, factor_));
}

template <typename T>
void Upsampler<T>::collect(ParamList<T>& out) {
    if (factor_ > 1) {
        conv_.collect(out);
    }
}

#define HSISR_INSTANTIATE(T)                                                   \
    template void fill_gaussian<T>(std::vector<T>&, double, Rng&);             \
    template class Conv2d<T>;                                                  \
    template Tensor3<T> pixel_shuffle<T>(const Tensor3<T>&, int);              \
    template Tensor3<T> pixel_unshuffle<T>(const Tensor3<T>&, int);            \
    template Tensor3<T> relu<T>(const Tensor3<T>&);                            \
    template Tensor3<T> relu_backward<T>(const Tensor3<T>&, const Tensor3<T>&); \
    template class ChannelAttention<T>;                                        \
    template class SpatialSpectralBlock<T>;                                    \
    template class Upsampler<T>;

HSISR_INSTANTIATE(float)
HSISR_INSTANTIATE(double)

#undef HSISR_INSTANTIATE

}  // namespace hsisr::nn
