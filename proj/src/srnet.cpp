#include "hsisr/srnet.hpp"

#include <cmath>

#include "hsisr/augment.hpp"
#include "hsisr/resample.hpp"

namespace hsisr {

void NetworkConfig::validate() const {
    if (tau != 2 && tau != 4 && tau != 8) {
        throw ValidationError("network.tau must be 2, 4 or 8, got " + std::to_string(tau));
    }
    if (feature_width < 4 || feature_width % 4 != 0) {
        throw ValidationError("network.feature_width must be a positive multiple of 4, got " +
                              std::to_string(feature_width));
    }
    if (group_size < 3) {
        throw ValidationError("network.group_size must be >= 3 (RGB inputs are widened to it)");
    }
    if (hsi_bands < group_size) {
        throw ValidationError("network.group_size " + std::to_string(group_size) + " exceeds hsi_bands " +
                              std::to_string(hsi_bands));
    }
    if (overlap < 0 || overlap >= group_size) {
        throw ValidationError("network.overlap must lie in [0, group_size)");
    }
    if (ssb_per_stage < 0 || attention_reduction < 1) {
        throw ValidationError("network.ssb_per_stage must be >= 0 and attention_reduction >= 1");
    }
}

namespace nn {

namespace {

template <typename T>
std::vector<SpatialSpectralBlock<T>> make_blocks(const std::string& prefix, const NetworkConfig& config) {
    std::vector<SpatialSpectralBlock<T>> blocks;
    for (int i = 0; i < config.ssb_per_stage; ++i) {
        blocks.emplace_back(prefix + "." + std::to_string(i), config.feature_width, config.attention_reduction);
    }
    return blocks;
}

template <typename T>
Tensor3<T> run_blocks(const std::vector<SpatialSpectralBlock<T>>& blocks, Tensor3<T> x,
                      std::vector<typename SpatialSpectralBlock<T>::Cache>* caches) {
    if (caches) {
        caches->resize(blocks.size());
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        x = blocks[i].forward(x, caches ? &(*caches)[i] : nullptr);
    }
    return x;
}

template <typename T>
Tensor3<T> backprop_blocks(std::vector<SpatialSpectralBlock<T>>& blocks,
                           const std::vector<typename SpatialSpectralBlock<T>::Cache>& caches, Tensor3<T> grad) {
    for (std::size_t i = blocks.size(); i-- > 0;) {
        grad = blocks[i].backward(caches[i], grad);
    }
    return grad;
}

}  // namespace

// ---------------------------------------------------------------------------

template <typename T>
Encoder<T>::Encoder(const NetworkConfig& config)
    : bands_(config.group_size),
      head_("encoder.head", config.group_size, config.feature_width, 3),
      stage1_(make_blocks<T>("encoder.stage1", config)),
      up1_("encoder.up1", config.feature_width, config.tau / 2),
      stage2_(make_blocks<T>("encoder.stage2", config)),
      up2_("encoder.up2", config.feature_width, 2),
      tail_("encoder.tail", config.feature_width, config.group_size, 3) {}

template <typename T>
void Encoder<T>::init(Rng& rng) {
    head_.init(1.0, rng);
    for (auto& b : stage1_) b.init(rng);
    up1_.init(rng);
    for (auto& b : stage2_) b.init(rng);
    up2_.init(rng);
    tail_.init(1.0, rng);
}

template <typename T>
Tensor3<T> Encoder<T>::forward(const Tensor3<T>& x, Cache* cache) const {
    Tensor3<T> head = head_.forward(x);
    Tensor3<T> skip1 = run_blocks(stage1_, head, cache ? &cache->stage1 : nullptr);
    skip1 += head;
    Tensor3<T> up1 = up1_.forward(skip1);
    Tensor3<T> skip2 = run_blocks(stage2_, up1, cache ? &cache->stage2 : nullptr);
    skip2 += up1;
    Tensor3<T> up2 = up2_.forward(skip2);
    Tensor3<T> out = tail_.forward(up2);
    if (cache) {
        cache->input = x;
        cache->head = std::move(head);
        cache->skip1 = std::move(skip1);
        cache->up1 = std::move(up1);
        cache->skip2 = std::move(skip2);
        cache->up2 = std::move(up2);
    }
    return out;
}

template <typename T>
void Encoder<T>::backward(const Cache& cache, const Tensor3<T>& grad_out) {
    Tensor3<T> d_up2 = tail_.backward(cache.up2, grad_out);
    Tensor3<T> d_skip2 = up2_.backward(cache.skip2, d_up2);
    Tensor3<T> d_up1 = backprop_blocks(stage2_, cache.stage2, d_skip2);
    d_up1 += d_skip2;
    Tensor3<T> d_skip1 = up1_.backward(cache.skip1, d_up1);
    Tensor3<T> d_head = backprop_blocks(stage1_, cache.stage1, d_skip1);
    d_head += d_skip1;
    head_.backward(cache.input, d_head, false);
}

template <typename T>
void Encoder<T>::collect(ParamList<T>& out) {
    head_.collect(out);
    for (auto& b : stage1_) b.collect(out);
    up1_.collect(out);
    for (auto& b : stage2_) b.collect(out);
    up2_.collect(out);
    tail_.collect(out);
}

// ---------------------------------------------------------------------------

template <typename T>
Decoder<T>::Decoder(const std::string& name, int in_bands, int out_bands, const NetworkConfig& config)
    : head_(name + ".head", in_bands, config.feature_width, 3),
      blocks_(make_blocks<T>(name + ".blocks", config)),
      tail_(name + ".tail", config.feature_width, out_bands, 3) {}

template <typename T>
void Decoder<T>::init(bool zero_tail, Rng& rng) {
    head_.init(1.0, rng);
    for (auto& b : blocks_) b.init(rng);
    tail_.init(zero_tail ? 0.0 : 1.0, rng);
}

template <typename T>
Tensor3<T> Decoder<T>::forward(const Tensor3<T>& x, Cache* cache) const {
    Tensor3<T> head = head_.forward(x);
    Tensor3<T> skip = run_blocks(blocks_, head, cache ? &cache->blocks : nullptr);
    skip += head;
    Tensor3<T> out = tail_.forward(skip);
    if (cache) {
        cache->input = x;
        cache->head = std::move(head);
        cache->skip = std::move(skip);
    }
    return out;
}

template <typename T>
Tensor3<T> Decoder<T>::backward(const Cache& cache, const Tensor3<T>& grad_out) {
    Tensor3<T> d_skip = tail_.backward(cache.skip, grad_out);
    Tensor3<T> d_head = backprop_blocks(blocks_, cache.blocks, d_skip);
    d_head += d_skip;
    return head_.backward(cache.input, d_head);
}

template <typename T>
void Decoder<T>::collect(ParamList<T>& out) {
    head_.collect(out);
    for (auto& b : blocks_) b.collect(out);
    tail_.collect(out);
}

}  // namespace nn

// ---------------------------------------------------------------------------

template <typename T>
Tensor3<T> assemble_groups(const std::vector<std::pair<int, Tensor3<T>>>& group_outputs, int band_count) {
    if (group_outputs.empty()) {
        throw ValidationError("assemble_groups needs at least one group");
    }
    const int rows = group_outputs.front().second.rows();
    const int cols = group_outputs.front().second.cols();
    Tensor3<T> out(band_count, rows, cols);
    std::vector<int> counts(static_cast<std::size_t>(band_count), 0);
    for (const auto& [start, tile] : group_outputs) {
        if (tile.rows() != rows || tile.cols() != cols) {
            throw ShapeError("group outputs differ in spatial size");
        }
        if (start < 0 || start + tile.channels() > band_count) {
            throw ShapeError("group starting at band " + std::to_string(start) + " runs past band count");
        }
        for (int j = 0; j < tile.channels(); ++j) {
            const auto src = tile.channel(j);
            auto dst = out.channel(start + j);
            for (std::size_t i = 0; i < src.size(); ++i) {
                dst[i] += src[i];
            }
            ++counts[static_cast<std::size_t>(start + j)];
        }
    }
    for (int b = 0; b < band_count; ++b) {
        const int n = counts[static_cast<std::size_t>(b)];
        if (n == 0) {
            throw ValidationError("band " + std::to_string(b) + " is not covered by any group");
        }
        if (n > 1) {
            const T inv = T(1) / static_cast<T>(n);
            for (auto& v : out.channel(b)) {
                v *= inv;
            }
        }
    }
    return out;
}

template <typename T>
SrNet<T>::SrNet(const NetworkConfig& config, std::uint64_t seed)
    : config_((config.validate(), config)),
      encoder_(config),
      decoder_hsi_("decoder_hsi", config.hsi_bands, config.hsi_bands, config),
      decoder_rgb_("decoder_rgb", config.group_size, RgbImage::kBands, config) {
    plan_ = config_.group_plan();
    Rng rng = make_stream(seed, 0x6e6574);
    encoder_.init(rng);
    decoder_hsi_.init(config_.zero_tail, rng);
    decoder_rgb_.init(config_.zero_tail, rng);
}

template <typename T>
const Tensor3<T>& SrNet<T>::check_group(const Tensor3<T>& group) const {
    if (group.channels() != config_.group_size) {
        throw ShapeError("encoder expects " + std::to_string(config_.group_size) + " bands, got " +
                         std::to_string(group.channels()));
    }
    return group;
}

template <typename T>
Tensor3<T> SrNet<T>::forward_hsi(const Tensor3<T>& lr, nn::HsiTape<T>* tape) const {
    if (lr.channels() != config_.hsi_bands) {
        throw ShapeError("network expects " + std::to_string(config_.hsi_bands) + " bands, got " +
                         std::to_string(lr.channels()));
    }
    std::vector<std::pair<int, Tensor3<T>>> outputs;
    outputs.reserve(plan_.starts.size());
    if (tape) {
        tape->groups.resize(plan_.starts.size());
    }
    for (std::size_t g = 0; g < plan_.starts.size(); ++g) {
        const int start = plan_.starts[g];
        outputs.emplace_back(start, encoder_.forward(lr.slice_channels(start, config_.group_size),
                                                     tape ? &tape->groups[g] : nullptr));
    }
    Tensor3<T> assembled = assemble_groups(outputs, config_.hsi_bands);
    outputs.clear();
    Tensor3<T> out = decoder_hsi_.forward(assembled, tape ? &tape->decoder : nullptr);
    out += bicubic_resize(lr, lr.rows() * config_.tau, lr.cols() * config_.tau);
    return out;
}

template <typename T>
void SrNet<T>::backward_hsi(const nn::HsiTape<T>& tape, const Tensor3<T>& grad_out) {
    Tensor3<T> d_assembled = decoder_hsi_.backward(tape.decoder, grad_out);
    const auto counts = plan_.coverage();
    for (std::size_t g = 0; g < plan_.starts.size(); ++g) {
        const int start = plan_.starts[g];
        Tensor3<T> d_group = d_assembled.slice_channels(start, config_.group_size);
        for (int j = 0; j < config_.group_size; ++j) {
            const T inv = T(1) / static_cast<T>(counts[static_cast<std::size_t>(start + j)]);
            for (auto& v : d_group.channel(j)) {
                v *= inv;
            }
        }
        encoder_.backward(tape.groups[g], d_group);
    }
}

template <typename T>
Tensor3<T> SrNet<T>::forward_rgb(const Tensor3<T>& lr, nn::RgbTape<T>* tape) const {
    if (lr.channels() != RgbImage::kBands) {
        throw ShapeError("RGB path expects 3 bands, got " + std::to_string(lr.channels()));
    }
    Tensor3<T> widened = spectral_interpolate(lr, config_.group_size);
    Tensor3<T> encoded = encoder_.forward(widened, tape ? &tape->encoder : nullptr);
    Tensor3<T> out = decoder_rgb_.forward(encoded, tape ? &tape->decoder : nullptr);
    out += bicubic_resize(lr, lr.rows() * config_.tau, lr.cols() * config_.tau);
    return out;
}

template <typename T>
void SrNet<T>::backward_rgb(const nn::RgbTape<T>& tape, const Tensor3<T>& grad_out) {
    encoder_.backward(tape.encoder, decoder_rgb_.backward(tape.decoder, grad_out));
}

template <typename T>
nn::ParamList<T> SrNet<T>::parameters() {
    nn::ParamList<T> out;
    encoder_.collect(out);
    decoder_hsi_.collect(out);
    decoder_rgb_.collect(out);
    return out;
}

template <typename T>
std::vector<const nn::Param<T>*> SrNet<T>::parameters() const {
    auto list = const_cast<SrNet*>(this)->parameters();
    return {list.begin(), list.end()};
}

template <typename T>
std::size_t SrNet<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) {
        n += p->value.size();
    }
    return n;
}

template <typename T>
void SrNet<T>::zero_grad() {
    for (auto* p : parameters()) {
        p->zero_grad();
    }
}

template class nn::Encoder<float>;
template class nn::Encoder<double>;
template class nn::Decoder<float>;
template class nn::Decoder<double>;
template class SrNet<float>;
template class SrNet<double>;
template Tensor3<float> assemble_groups<float>(const std::vector<std::pair<int, Tensor3<float>>>&, int);
template Tensor3<double> assemble_groups<double>(const std::vector<std::pair<int, Tensor3<double>>>&, int);

}  // namespace hsisr
