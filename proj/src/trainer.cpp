#include "hsisr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hsisr {

namespace {

// Stream ids for make_stream.
constexpr std::uint64_t kLabeledStream = 1;
constexpr std::uint64_t kRgbStream = 2;
constexpr std::uint64_t kMixupStream = 3;
constexpr std::uint64_t kSslStream = 4;
constexpr std::uint64_t kMixingStream = 5;

std::string rng_to_string(const Rng& rng) {
    std::ostringstream out;
    out << rng;
    return out.str();
}

Rng rng_from_string(const std::string& text) {
    Rng rng;
    std::istringstream in(text);
    in >> rng;
    if (!in) {
        throw ValidationError("malformed RNG state");
    }
    return rng;
}

Tensor3<float> clamp01(Tensor3<float> x) {
    for (auto& v : x.values()) {
        v = std::clamp(v, 0.0f, 1.0f);
    }
    return x;
}

}  // namespace

double lr_at_epoch(const TrainConfig& config, int epoch) {
    if (epoch < 0) {
        throw ValidationError("epoch must be >= 0");
    }
    const int steps = config.lr_decay_every_epochs > 0 ? epoch / config.lr_decay_every_epochs : 0;
    return config.lr_initial * std::pow(config.lr_decay, steps);
}

IterationPlan make_iteration_plan(const BatchCounts& counts, const std::array<Term, 4>& order) {
    for (Term t : {Term::hsi, Term::rgb, Term::mixup, Term::ssl}) {
        if (std::count(order.begin(), order.end(), t) != 1) {
            throw ValidationError("term order must list each term exactly once");
        }
        if (counts.count(t) < 0) {
            throw ValidationError("batch count for '" + std::string(to_string(t)) + "' is negative");
        }
    }
    IterationPlan plan;
    for (Term t : order) {
        for (int i = 0; i < counts.count(t); ++i) {
            plan.sequence.emplace_back(t, i);
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------

AdamOptimizer::AdamOptimizer(const nn::ParamList<float>& params) {
    for (const auto* p : params) {
        m_.emplace_back(p->value.size(), 0.0f);
        v_.emplace_back(p->value.size(), 0.0f);
    }
}

void AdamOptimizer::step(const nn::ParamList<float>& params, double lr) {
    if (params.size() != m_.size()) {
        throw ValidationError("optimizer was built for a different parameter list");
    }
    ++step_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
    const float step_size = static_cast<float>(lr / c1);
    const float inv_c2 = static_cast<float>(1.0 / c2);
    const float b1 = static_cast<float>(kBeta1);
    const float b2 = static_cast<float>(kBeta2);
    const float eps = static_cast<float>(kEpsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& value = params[i]->value;
        const auto& grad = params[i]->grad;
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t k = 0; k < value.size(); ++k) {
            const float g = grad[k];
            m[k] = b1 * m[k] + (1.0f - b1) * g;
            v[k] = b2 * v[k] + (1.0f - b2) * g * g;
            value[k] -= step_size * m[k] / (std::sqrt(v[k] * inv_c2) + eps);
        }
    }
}

// ---------------------------------------------------------------------------

PatchStream::PatchStream(std::size_t size, Rng rng) : order_(size), rng_(std::move(rng)) {
    for (std::size_t i = 0; i < size; ++i) {
        order_[i] = i;
    }
    shuffle_in_place(order_, rng_);
}

std::vector<std::size_t> PatchStream::next(int count) {
    if (order_.empty()) {
        throw ValidationError("cannot draw from an empty patch stream");
    }
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        if (position_ == order_.size()) {
            shuffle_in_place(order_, rng_);
            position_ = 0;
        }
        out.push_back(order_[position_++]);
    }
    return out;
}

void PatchStream::restart() {
    shuffle_in_place(order_, rng_);
    position_ = 0;
}

Json PatchStream::state() const {
    return {{"order", order_}, {"position", position_}, {"rng", rng_to_string(rng_)}};
}

void PatchStream::restore(const Json& state) {
    auto order = state.at("order").get<std::vector<std::size_t>>();
    if (order.size() != order_.size()) {
        throw ValidationError("patch stream size " + std::to_string(order.size()) + " does not match the data (" +
                              std::to_string(order_.size()) + " patches)");
    }
    order_ = std::move(order);
    position_ = state.at("position").get<std::size_t>();
    rng_ = rng_from_string(state.at("rng").get<std::string>());
}

// ---------------------------------------------------------------------------

TrainData make_train_data(const std::vector<std::pair<std::string, Tensor3<float>>>& labeled,
                          const std::vector<std::pair<std::string, Tensor3<float>>>& unlabeled,
                          const std::vector<std::pair<std::string, Tensor3<float>>>& rgb, const ScaleConfig& scale) {
    scale.validate();
    TrainData data;
    for (const auto& [id, cube] : labeled) {
        auto pairs = extract_patches(cube, scale.tau, scale.patch_hr, id);
        std::move(pairs.begin(), pairs.end(), std::back_inserter(data.labeled));
    }
    for (const auto& [id, cube] : unlabeled) {
        for (auto& p : extract_patches(cube, scale.tau, scale.patch_hr, id)) {
            data.unlabeled.push_back(std::move(p.lr));
        }
    }
    for (const auto& [id, image] : rgb) {
        auto pairs = extract_patches(image, scale.tau, scale.patch_hr, id);
        std::move(pairs.begin(), pairs.end(), std::back_inserter(data.rgb));
    }
    return data;
}

TrainData load_train_data(const DatasetManifest& manifest, const ScaleConfig& scale) {
    scale.validate();
    manifest.validate();
    TrainData data;
    for (const auto* e : manifest.with_role(Role::labeled_train)) {
        auto pairs = extract_patches(load_cube(e->path), scale.tau, scale.patch_hr, e->id);
        std::move(pairs.begin(), pairs.end(), std::back_inserter(data.labeled));
    }
    const int lr_patch = scale.patch_hr / scale.tau;
    for (const auto* e : manifest.with_role(Role::unlabeled_train)) {
        const HsiCube cube = load_cube(e->path);
        if (e->is_lr) {
            for (int r = 0; r + lr_patch <= cube.rows(); r += lr_patch) {
                for (int c = 0; c + lr_patch <= cube.cols(); c += lr_patch) {
                    data.unlabeled.push_back(cube.crop(r, c, lr_patch, lr_patch));
                }
            }
        } else {
            for (auto& p : extract_patches(cube, scale.tau, scale.patch_hr, e->id)) {
                data.unlabeled.push_back(std::move(p.lr));
            }
        }
    }
    for (const auto& e : manifest.rgb_entries) {
        Tensor3<float> image = load_rgb(e.path);
        if (manifest.rgb_downsample2) {
            image = bicubic_resize(image, image.rows() / 2, image.cols() / 2);
        }
        auto pairs = extract_patches(image, scale.tau, scale.patch_hr, e.id);
        std::move(pairs.begin(), pairs.end(), std::back_inserter(data.rgb));
    }
    return data;
}

// ---------------------------------------------------------------------------

TrainLogWriter::TrainLogWriter(const std::filesystem::path& path, bool append) : path_(path) {
    const bool fresh = !append || !std::filesystem::exists(path);
    std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
    if (!out) {
        throw IoError("cannot write training log " + path.string());
    }
    if (fresh) {
        out << "epoch,iteration,term,l1,sstv,total,lr\n";
    }
}

void TrainLogWriter::write(const LogRow& row) {
    std::ofstream out(path_, std::ios::app);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%lld,%s,%.9g,%.9g,%.9g,%.9g\n", row.epoch, row.iteration,
                  std::string(to_string(row.term)).c_str(), row.l1, row.sstv, row.total, row.lr);
    out << buf;
    if (!out) {
        throw IoError("cannot append to training log " + path_.string());
    }
}

std::vector<LogRow> read_train_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read training log " + path.string());
    }
    std::string line;
    std::getline(in, line);
    if (line != "epoch,iteration,term,l1,sstv,total,lr") {
        throw ValidationError(path.string() + ": unexpected training log header");
    }
    std::vector<LogRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string cell[7];
        for (auto& c : cell) {
            std::getline(fields, c, ',');
        }
        LogRow row;
        row.epoch = std::stoi(cell[0]);
        row.iteration = std::stoll(cell[1]);
        row.term = parse_term(cell[2]);
        row.l1 = std::stod(cell[3]);
        row.sstv = std::stod(cell[4]);
        row.total = std::stod(cell[5]);
        row.lr = std::stod(cell[6]);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------

Trainer::Trainer(SrNet<float>& model, const TrainConfig& config, TrainData data, const CrfMatrix* crf)
    : model_(model),
      config_((config.validate(), config)),
      data_(std::move(data)),
      crf_(crf),
      adam_(model.parameters()),
      plan_(make_iteration_plan(config.batches_per_iter, config.term_order)),
      labeled_(data_.labeled.size(), make_stream(config.seed, kLabeledStream)),
      rgb_(data_.rgb.size(), make_stream(config.seed, kRgbStream)),
      mixup_(data_.labeled.size(), make_stream(config.seed, kMixupStream)),
      ssl_(data_.unlabeled.size(), make_stream(config.seed, kSslStream)),
      mixing_rng_(make_stream(config.seed, kMixingStream)) {
    check_streams();
}

void Trainer::check_streams() const {
    const auto& counts = config_.batches_per_iter;
    if (data_.labeled.empty()) {
        throw ValidationError("training needs at least one labeled patch");
    }
    if (counts.rgb > 0 && data_.rgb.empty()) {
        throw ValidationError("the RGB term is enabled but there is no RGB stream");
    }
    if (counts.ssl > 0 && data_.unlabeled.empty()) {
        throw ValidationError("the SSL term is enabled but there is no unlabeled stream");
    }
    if (counts.ssl > 0 && crf_ == nullptr) {
        throw ValidationError("the SSL term needs a camera response function");
    }
    if (counts.ssl > 0 && crf_->bands() != model_.config().hsi_bands) {
        throw ValidationError("CRF has " + std::to_string(crf_->bands()) + " bands but the network expects " +
                              std::to_string(model_.config().hsi_bands));
    }
    if (data_.labeled.front().lr.channels() != model_.config().hsi_bands) {
        throw ValidationError("labeled patches have " + std::to_string(data_.labeled.front().lr.channels()) +
                              " bands but the network expects " + std::to_string(model_.config().hsi_bands));
    }
}

long long Trainer::iterations_per_epoch() const {
    const long long per_iter = static_cast<long long>(config_.effective_batch_size()) * config_.batches_per_iter.hsi;
    return (static_cast<long long>(data_.labeled.size()) + per_iter - 1) / per_iter;
}

std::vector<PatchPair> Trainer::gather(const std::vector<PatchPair>& source, PatchStream& stream) const {
    std::vector<PatchPair> batch;
    for (std::size_t i : stream.next(config_.effective_batch_size())) {
        batch.push_back(source[i]);
    }
    return batch;
}

LossBreakdown Trainer::step_term(Term term, const std::vector<PatchPair>& batch) {
    if (term == Term::ssl) {
        throw ValidationError("the SSL term takes LR-only patches; use step_ssl");
    }
    if (batch.empty()) {
        throw ValidationError("empty mini-batch for term '" + std::string(to_string(term)) + "'");
    }
    const int expected = term == Term::rgb ? 3 : model_.config().hsi_bands;
    for (const auto& p : batch) {
        if (p.lr.channels() != expected || p.hr.channels() != expected) {
            throw ValidationError("term '" + std::string(to_string(term)) + "' expects " + std::to_string(expected) +
                                  "-band patches, got " + p.lr.shape_string());
        }
    }
    MixingMatrix mixing;
    if (term == Term::mixup) {
        mixing = make_mixing_matrix(expected, mixing_rng_);
    }
    model_.zero_grad();
    const float weight = 1.0f / static_cast<float>(batch.size());
    std::vector<LossBreakdown> parts;
    for (const auto& p : batch) {
        switch (term) {
            case Term::hsi:
                parts.push_back(accumulate_hsi(model_, p.lr, p.hr, weight, config_.sstv_weight));
                break;
            case Term::rgb:
                parts.push_back(accumulate_rgb(model_, p.lr, p.hr, weight, config_.sstv_weight));
                break;
            case Term::mixup: {
                const auto [lr, hr] = spectral_mixup(p.lr, p.hr, config_.alpha_mixup, mixing);
                parts.push_back(accumulate_hsi(model_, lr, hr, weight, config_.sstv_weight));
                break;
            }
            case Term::ssl:
                break;
        }
    }
    adam_.step(model_.parameters(), current_lr());
    LossBreakdown out;
    out.term = term;
    for (const auto& p : parts) {
        out.l1 += p.l1;
        out.sstv += p.sstv;
    }
    out.l1 /= static_cast<double>(parts.size());
    out.sstv /= static_cast<double>(parts.size());
    out.total = out.l1 + out.sstv;
    return out;
}

LossBreakdown Trainer::step_ssl(const std::vector<Tensor3<float>>& batch) {
    if (crf_ == nullptr) {
        throw ValidationError("the SSL term needs a camera response function");
    }
    if (batch.empty()) {
        throw ValidationError("empty mini-batch for term 'ssl'");
    }
    for (const auto& lr : batch) {
        if (lr.channels() != model_.config().hsi_bands) {
            throw ValidationError("term 'ssl' expects " + std::to_string(model_.config().hsi_bands) +
                                  "-band patches, got " + lr.shape_string());
        }
    }
    const SslOptions options{config_.ssl_include_sstv, config_.ssl_detach_rgb, config_.sstv_weight};
    model_.zero_grad();
    const float weight = 1.0f / static_cast<float>(batch.size());
    LossBreakdown out;
    out.term = Term::ssl;
    for (const auto& lr : batch) {
        const auto part = accumulate_ssl(model_, lr, *crf_, options, weight);
        out.l1 += part.l1;
        out.sstv += part.sstv;
    }
    adam_.step(model_.parameters(), current_lr());
    out.l1 /= static_cast<double>(batch.size());
    out.sstv /= static_cast<double>(batch.size());
    out.total = out.l1 + out.sstv;
    return out;
}

LossBreakdown Trainer::run_iteration_term(Term term) {
    switch (term) {
        case Term::hsi:
            return step_term(term, gather(data_.labeled, labeled_));
        case Term::rgb:
            return step_term(term, gather(data_.rgb, rgb_));
        case Term::mixup:
            return step_term(term, gather(data_.labeled, mixup_));
        case Term::ssl: {
            std::vector<Tensor3<float>> batch;
            for (std::size_t i : ssl_.next(config_.effective_batch_size())) {
                batch.push_back(data_.unlabeled[i]);
            }
            return step_ssl(batch);
        }
    }
    throw ValidationError("unknown loss term");
}

std::vector<LogRow> Trainer::train(const TrainCallbacks& callbacks) {
    check_streams();
    std::vector<LogRow> rows;
    const long long per_epoch = iterations_per_epoch();
    auto budget_left = [&] { return config_.max_iterations <= 0 || iteration_ < config_.max_iterations; };
    while (epoch_ < config_.epochs && budget_left()) {
        if (epoch_iteration_ == 0 && labeled_.position() != 0) {
            labeled_.restart();
        }
        while (epoch_iteration_ < per_epoch && budget_left()) {
            const double lr = current_lr();
            for (const auto& [term, index] : plan_.sequence) {
                const LossBreakdown loss = run_iteration_term(term);
                if (!std::isfinite(loss.total)) {
                    throw NumericError("non-finite loss in term '" + std::string(to_string(term)) +
                                       "' at iteration " + std::to_string(iteration_));
                }
                LogRow row{epoch_, iteration_, term, loss.l1, loss.sstv, loss.total, lr};
                rows.push_back(row);
                if (callbacks.on_row) {
                    callbacks.on_row(row);
                }
            }
            ++iteration_;
            ++epoch_iteration_;
        }
        if (epoch_iteration_ == per_epoch) {
            ++epoch_;
            epoch_iteration_ = 0;
            if (callbacks.on_epoch_end) {
                callbacks.on_epoch_end(epoch_);
            }
        }
    }
    return rows;
}

Json Trainer::state() const {
    return {{"epoch", epoch_},
            {"iteration", iteration_},
            {"epoch_iteration", epoch_iteration_},
            {"adam_step", adam_.step_count()},
            {"streams",
             {{"labeled", labeled_.state()}, {"rgb", rgb_.state()}, {"mixup", mixup_.state()}, {"ssl", ssl_.state()}}},
            {"mixing_rng", rng_to_string(mixing_rng_)}};
}

void Trainer::restore(const Json& state) {
    try {
        epoch_ = state.at("epoch").get<int>();
        iteration_ = state.at("iteration").get<long long>();
        epoch_iteration_ = state.at("epoch_iteration").get<long long>();
        adam_.set_step_count(state.at("adam_step").get<long long>());
        const auto& streams = state.at("streams");
        labeled_.restore(streams.at("labeled"));
        rgb_.restore(streams.at("rgb"));
        mixup_.restore(streams.at("mixup"));
        ssl_.restore(streams.at("ssl"));
        mixing_rng_ = rng_from_string(state.at("mixing_rng").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed trainer state: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

EvalResult evaluate(const SrNet<float>& model, const std::vector<std::pair<std::string, Tensor3<float>>>& test,
                    bool per_band) {
    if (test.empty()) {
        throw ValidationError("no test entries");
    }
    const int tau = model.config().tau;
    EvalResult result;
    std::vector<MetricReport> model_reports, bicubic_reports;
    for (const auto& [id, cube] : test) {
        if (cube.channels() != model.config().hsi_bands) {
            throw ShapeError("test image '" + id + "' has " + std::to_string(cube.channels()) +
                             " bands but the network expects " + std::to_string(model.config().hsi_bands));
        }
        const Tensor3<float> hr = crop_to_multiple(cube, tau);
        const Tensor3<float> lr = degrade(hr, tau);
        const Tensor3<float> sr = clamp01(model.forward_hsi(lr));
        const Tensor3<float> bicubic = clamp01(bicubic_resize(lr, hr.rows(), hr.cols()));
        NamedReport row{id, evaluate_metrics(hr, sr, tau, per_band), evaluate_metrics(hr, bicubic, tau, per_band)};
        model_reports.push_back(row.model);
        bicubic_reports.push_back(row.bicubic);
        result.images.push_back(std::move(row));
    }
    result.model_mean = mean_report(model_reports);
    result.bicubic_mean = mean_report(bicubic_reports);
    return result;
}

}  // namespace hsisr
