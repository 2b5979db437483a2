#pragma once

#include <string>
#include <vector>

#include "hsisr/rng.hpp"
#include "hsisr/tensor.hpp"

namespace hsisr::nn {

/// Trainable tensor with its accumulated gradient.
template <typename T>
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;

    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

template <typename T>
using ParamList = std::vector<Param<T>*>;

/// Gaussian fill with the given standard deviation (Box-Muller over uniform01).
template <typename T>
void fill_gaussian(std::vector<T>& values, double stddev, Rng& rng);

/// 2-D convolution, stride 1, zero padding kernel/2 ("same" output size).
template <typename T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(std::string name, int in_channels, int out_channels, int kernel);

    int in_channels() const { return in_; }
    int out_channels() const { return out_; }
    int kernel() const { return kernel_; }

    /// Weights ~ N(0, gain^2 / fan_in), bias 0. gain = 0 zeroes the layer.
    void init(double gain, Rng& rng);

    Tensor3<T> forward(const Tensor3<T>& x) const;

    /// Accumulates parameter gradients for input `x`. Returns dL/dx when
    /// `need_input_grad` is set, otherwise an empty tensor.
    Tensor3<T> backward(const Tensor3<T>& x, const Tensor3<T>& grad_out, bool need_input_grad = true);

    void collect(ParamList<T>& out) {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }
    const Param<T>& weight() const { return weight_; }
    const Param<T>& bias() const { return bias_; }

private:
    int in_ = 0;
    int out_ = 0;
    int kernel_ = 1;
    Param<T> weight_;  // (out, in, k, k)
    Param<T> bias_;    // (out)
};

/// (r*r*c, h, w) -> (c, r*h, r*w); sub-channel q = i*r + j lands at offset (i, j).
template <typename T>
Tensor3<T> pixel_shuffle(const Tensor3<T>& x, int r);

/// Inverse of pixel_shuffle.
template <typename T>
Tensor3<T> pixel_unshuffle(const Tensor3<T>& x, int r);

template <typename T>
Tensor3<T> relu(const Tensor3<T>& x);

/// grad * [pre > 0]
template <typename T>
Tensor3<T> relu_backward(const Tensor3<T>& pre, const Tensor3<T>& grad);

/// Channel attention: x * sigmoid(W2 relu(W1 avgpool(x))).
template <typename T>
class ChannelAttention {
public:
    struct Cache {
        Tensor3<T> pooled;  // (F,1,1)
        Tensor3<T> hidden_pre;
        Tensor3<T> hidden;
        Tensor3<T> gate;  // (F,1,1)
    };

    ChannelAttention() = default;
    ChannelAttention(const std::string& name, int channels, int reduction);

    void init(Rng& rng);
    Tensor3<T> forward(const Tensor3<T>& x, Cache* cache) const;
    /// Gradient of x * gate(x) with respect to x.
    Tensor3<T> backward(const Tensor3<T>& x, const Cache& cache, const Tensor3<T>& grad_out);
    void collect(ParamList<T>& out);

    Conv2d<T>& squeeze() { return squeeze_; }
    Conv2d<T>& excite() { return excite_; }

private:
    Conv2d<T> squeeze_;
    Conv2d<T> excite_;
};

/// Spatial-spectral block: s = x + conv(relu(conv(x))), y = s + s * gate(s).
template <typename T>
class SpatialSpectralBlock {
public:
    struct Cache {
        Tensor3<T> input;
        Tensor3<T> pre_relu;
        Tensor3<T> hidden;
        Tensor3<T> spatial;
        typename ChannelAttention<T>::Cache attention;
    };

    SpatialSpectralBlock() = default;
    SpatialSpectralBlock(const std::string& name, int channels, int reduction);

    void init(Rng& rng);
    Tensor3<T> forward(const Tensor3<T>& x, Cache* cache) const;
    Tensor3<T> backward(const Cache& cache, const Tensor3<T>& grad_out);
    void collect(ParamList<T>& out);

    int channels() const { return conv1_.in_channels(); }
    Conv2d<T>& conv1() { return conv1_; }
    Conv2d<T>& conv2() { return conv2_; }
    ChannelAttention<T>& attention() { return attention_; }

private:
    Conv2d<T> conv1_;
    Conv2d<T> conv2_;
    ChannelAttention<T> attention_;
};

/// 3x3 conv to r^2 * F channels followed by pixel_shuffle(r); identity for r = 1.
template <typename T>
class Upsampler {
public:
    Upsampler() = default;
    Upsampler(const std::string& name, int channels, int factor);

    int factor() const { return factor_; }
    void init(Rng& rng);
    Tensor3<T> forward(const Tensor3<T>& x) const;
    Tensor3<T> backward(const Tensor3<T>& x, const Tensor3<T>& grad_out);
    void collect(ParamList<T>& out);

private:
    int factor_ = 1;
    Conv2d<T> conv_;
};

}  // namespace hsisr::nn
