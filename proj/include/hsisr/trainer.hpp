#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hsisr/colorimetry.hpp"
#include "hsisr/config_json.hpp"
#include "hsisr/hsio.hpp"
#include "hsisr/losses.hpp"
#include "hsisr/metrics.hpp"
#include "hsisr/srnet.hpp"

namespace hsisr {

/// lr_initial * lr_decay ^ floor(epoch / lr_decay_every_epochs).
double lr_at_epoch(const TrainConfig& config, int epoch);

struct IterationPlan {
    /// (term, mini-batch index within that term)
    std::vector<std::pair<Term, int>> sequence;
};

IterationPlan make_iteration_plan(const BatchCounts& counts, const std::array<Term, 4>& order);

class AdamOptimizer {
public:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    AdamOptimizer() = default;
    explicit AdamOptimizer(const nn::ParamList<float>& params);

    /// One update of every parameter from its accumulated gradient.
    void step(const nn::ParamList<float>& params, double lr);

    long long step_count() const { return step_; }
    std::vector<std::vector<float>>& first_moment() { return m_; }
    std::vector<std::vector<float>>& second_moment() { return v_; }
    const std::vector<std::vector<float>>& first_moment() const { return m_; }
    const std::vector<std::vector<float>>& second_moment() const { return v_; }
    void set_step_count(long long step) { step_ = step; }

private:
    long long step_ = 0;
    std::vector<std::vector<float>> m_;
    std::vector<std::vector<float>> v_;
};

/// Index stream over a fixed item set; reshuffles each time it wraps around.
class PatchStream {
public:
    PatchStream() = default;
    PatchStream(std::size_t size, Rng rng);

    std::vector<std::size_t> next(int count);
    /// Reshuffles and rewinds.
    void restart();

    std::size_t size() const { return order_.size(); }
    std::size_t position() const { return position_; }

    Json state() const;
    void restore(const Json& state);

private:
    std::vector<std::size_t> order_;
    std::size_t position_ = 0;
    Rng rng_;
};

/// In-memory training patches.
struct TrainData {
    std::vector<PatchPair> labeled;
    std::vector<PatchPair> rgb;
    /// LR-sized unlabeled HSI patches.
    std::vector<Tensor3<float>> unlabeled;
};

/// Tiles HR images into patch pairs. Unlabeled cubes are degraded and only
/// their LR patches kept.
TrainData make_train_data(const std::vector<std::pair<std::string, Tensor3<float>>>& labeled,
                          const std::vector<std::pair<std::string, Tensor3<float>>>& unlabeled,
                          const std::vector<std::pair<std::string, Tensor3<float>>>& rgb, const ScaleConfig& scale);

/// Loads the manifest's training roles from disk. Entries flagged `is_lr` are
/// tiled directly at LR patch size.
TrainData load_train_data(const DatasetManifest& manifest, const ScaleConfig& scale);

struct LogRow {
    int epoch = 0;
    long long iteration = 0;
    Term term = Term::hsi;
    double l1 = 0.0;
    double sstv = 0.0;
    double total = 0.0;
    double lr = 0.0;
};

/// Appends rows to a CSV file with header `epoch,iteration,term,l1,sstv,total,lr`.
class TrainLogWriter {
public:
    explicit TrainLogWriter(const std::filesystem::path& path, bool append = false);
    void write(const LogRow& row);

private:
    std::filesystem::path path_;
};

std::vector<LogRow> read_train_log(const std::filesystem::path& path);

struct TrainCallbacks {
    std::function<void(const LogRow&)> on_row;
    /// Called after each completed epoch with the number of epochs done.
    std::function<void(int)> on_epoch_end;
};

class Trainer {
public:
    Trainer(SrNet<float>& model, const TrainConfig& config, TrainData data, const CrfMatrix* crf = nullptr);

    /// Forward, backward and one Adam step on a labeled-style batch.
    LossBreakdown step_term(Term term, const std::vector<PatchPair>& batch);
    /// Same for the SSL term on LR-only patches.
    LossBreakdown step_ssl(const std::vector<Tensor3<float>>& batch);

    /// Runs the remaining epochs (or up to max_iterations) and returns the new log rows.
    std::vector<LogRow> train(const TrainCallbacks& callbacks = {});

    /// Iterations in one epoch: ceil(labeled / (batch * hsi count)).
    long long iterations_per_epoch() const;

    const TrainConfig& config() const { return config_; }
    SrNet<float>& model() { return model_; }
    AdamOptimizer& optimizer() { return adam_; }
    const AdamOptimizer& optimizer() const { return adam_; }
    const TrainData& data() const { return data_; }

    int epoch() const { return epoch_; }
    long long iteration() const { return iteration_; }
    double current_lr() const { return lr_at_epoch(config_, epoch_); }

    /// Epoch, iteration, stream positions and RNG states.
    Json state() const;
    void restore(const Json& state);

private:
    std::vector<PatchPair> gather(const std::vector<PatchPair>& source, PatchStream& stream) const;
    LossBreakdown run_iteration_term(Term term);
    void check_streams() const;

    SrNet<float>& model_;
    TrainConfig config_;
    TrainData data_;
    const CrfMatrix* crf_;
    AdamOptimizer adam_;
    IterationPlan plan_;
    PatchStream labeled_;
    PatchStream rgb_;
    PatchStream mixup_;
    PatchStream ssl_;
    Rng mixing_rng_;
    int epoch_ = 0;
    long long iteration_ = 0;
    long long epoch_iteration_ = 0;
};

// Checkpoints -----------------------------------------------------------

struct CheckpointTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> values;
};

struct Checkpoint {
    NetworkConfig network;
    TrainConfig train;
    int epoch = 0;
    long long iteration = 0;
    long long adam_step = 0;
    Json trainer_state;
    /// Model parameters, then Adam moments named "adam.m/<param>" and "adam.v/<param>".
    std::vector<CheckpointTensor> tensors;

    const CheckpointTensor* find(const std::string& name) const;
};

/// Writes `dir/manifest.json` plus one little-endian float32 blob per tensor.
/// The directory is assembled beside `dir` and renamed into place.
void save_checkpoint(const std::filesystem::path& dir, const SrNet<float>& model, const TrainConfig& train,
                     const Trainer* trainer = nullptr);

Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Copies parameters into the model; the network configs must match.
void apply_checkpoint(const Checkpoint& checkpoint, SrNet<float>& model);
/// Restores Adam moments and stream/RNG state.
void apply_checkpoint(const Checkpoint& checkpoint, Trainer& trainer);

// Evaluation ------------------------------------------------------------

struct EvalResult {
    std::vector<NamedReport> images;
    MetricReport model_mean;
    MetricReport bicubic_mean;
};

/// Degrade by tau, super-resolve, clamp to [0,1], and score against the HR
/// cube together with the clamped bicubic baseline. Images are cropped to a
/// multiple of tau first.
EvalResult evaluate(const SrNet<float>& model, const std::vector<std::pair<std::string, Tensor3<float>>>& test,
                    bool per_band = false);

}  // namespace hsisr
