#pragma once

#include <cstdint>
#include <vector>

#include "hsisr/core_types.hpp"
#include "hsisr/layers.hpp"

namespace hsisr {

struct NetworkConfig {
    int group_size = 8;
    int overlap = 2;
    int feature_width = 256;
    int ssb_per_stage = 2;
    int tau = 4;
    int hsi_bands = 31;
    /// Channel-attention squeeze ratio.
    int attention_reduction = 16;
    /// Zero the decoder tails so both paths start as plain bicubic upsampling.
    bool zero_tail = true;

    void validate() const;
    GroupPlan group_plan() const { return make_group_plan(hsi_bands, group_size, overlap); }

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

namespace nn {

/// Shared group encoder: M bands in, M bands out at tau x the input size.
template <typename T>
class Encoder {
public:
    struct Cache {
        Tensor3<T> input;
        Tensor3<T> head;
        std::vector<typename SpatialSpectralBlock<T>::Cache> stage1;
        Tensor3<T> skip1;
        Tensor3<T> up1;
        std::vector<typename SpatialSpectralBlock<T>::Cache> stage2;
        Tensor3<T> skip2;
        Tensor3<T> up2;
    };

    Encoder() = default;
    explicit Encoder(const NetworkConfig& config);

    void init(Rng& rng);
    Tensor3<T> forward(const Tensor3<T>& x, Cache* cache) const;
    /// Accumulates parameter gradients; the encoder input never needs a gradient.
    void backward(const Cache& cache, const Tensor3<T>& grad_out);
    void collect(ParamList<T>& out);

    Conv2d<T>& head() { return head_; }
    Conv2d<T>& tail() { return tail_; }

private:
    int bands_ = 0;
    Conv2d<T> head_;
    std::vector<SpatialSpectralBlock<T>> stage1_;
    Upsampler<T> up1_;
    std::vector<SpatialSpectralBlock<T>> stage2_;
    Upsampler<T> up2_;
    Conv2d<T> tail_;
};

/// Task decoder at output resolution: head conv, SSBs with a skip, tail conv.
template <typename T>
class Decoder {
public:
    struct Cache {
        Tensor3<T> input;
        Tensor3<T> head;
        std::vector<typename SpatialSpectralBlock<T>::Cache> blocks;
        Tensor3<T> skip;
    };

    Decoder() = default;
    Decoder(const std::string& name, int in_bands, int out_bands, const NetworkConfig& config);

    void init(bool zero_tail, Rng& rng);
    Tensor3<T> forward(const Tensor3<T>& x, Cache* cache) const;
    Tensor3<T> backward(const Cache& cache, const Tensor3<T>& grad_out);
    void collect(ParamList<T>& out);

    Conv2d<T>& tail() { return tail_; }

private:
    Conv2d<T> head_;
    std::vector<SpatialSpectralBlock<T>> blocks_;
    Conv2d<T> tail_;
};

/// Stored activations of one forward_hsi call.
template <typename T>
struct HsiTape {
    std::vector<typename Encoder<T>::Cache> groups;
    typename Decoder<T>::Cache decoder;
};

/// Stored activations of one forward_rgb call.
template <typename T>
struct RgbTape {
    typename Encoder<T>::Cache encoder;
    typename Decoder<T>::Cache decoder;
};

}  // namespace nn

/// Shared encoder with an HSI decoder and an RGB decoder.
template <typename T>
class SrNet {
public:
    SrNet() = default;
    SrNet(const NetworkConfig& config, std::uint64_t seed);

    const NetworkConfig& config() const { return config_; }
    const GroupPlan& plan() const { return plan_; }

    /// Group-wise encoding, overlap-averaged assembly, HSI decoder, bicubic residual.
    Tensor3<T> forward_hsi(const Tensor3<T>& lr, nn::HsiTape<T>* tape = nullptr) const;
    /// Spectral interpolation to M bands, encoder, RGB decoder, bicubic residual.
    Tensor3<T> forward_rgb(const Tensor3<T>& lr, nn::RgbTape<T>* tape = nullptr) const;

    void backward_hsi(const nn::HsiTape<T>& tape, const Tensor3<T>& grad_out);
    void backward_rgb(const nn::RgbTape<T>& tape, const Tensor3<T>& grad_out);

    /// Encodes one M-band tile.
    Tensor3<T> encode_group(const Tensor3<T>& group) const { return encoder_.forward(check_group(group), nullptr); }

    /// Every trainable tensor, in a fixed order; encoder first.
    nn::ParamList<T> parameters();
    std::vector<const nn::Param<T>*> parameters() const;
    std::size_t parameter_count() const;
    void zero_grad();

    nn::Encoder<T>& encoder() { return encoder_; }
    nn::Decoder<T>& decoder_hsi() { return decoder_hsi_; }
    nn::Decoder<T>& decoder_rgb() { return decoder_rgb_; }

    /// Same architecture and values in another precision.
    template <typename U>
    SrNet<U> cast() const {
        SrNet<U> out(config_, 0);
        auto src = parameters();
        auto dst = out.parameters();
        for (std::size_t i = 0; i < src.size(); ++i) {
            for (std::size_t k = 0; k < src[i]->value.size(); ++k) {
                dst[i]->value[k] = static_cast<U>(src[i]->value[k]);
            }
        }
        return out;
    }

private:
    const Tensor3<T>& check_group(const Tensor3<T>& group) const;

    NetworkConfig config_;
    GroupPlan plan_;
    nn::Encoder<T> encoder_;
    nn::Decoder<T> decoder_hsi_;
    nn::Decoder<T> decoder_rgb_;
};

/// Mean of overlapping group outputs per band.
template <typename T>
Tensor3<T> assemble_groups(const std::vector<std::pair<int, Tensor3<T>>>& group_outputs, int band_count);

}  // namespace hsisr
