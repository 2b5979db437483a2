#include "hsisr/losses.hpp"

#include <cmath>

namespace hsisr {

namespace {

template <typename T>
T sign(T v) {
    return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
}

/// Mean |x[i + step] - x[i]| over the valid pairs along one axis, with optional gradient.
template <typename T>
double axis_tv(const Tensor3<T>& x, int axis, T weight, Tensor3<T>* grad) {
    const int nb = x.channels();
    const int nr = x.rows();
    const int nc = x.cols();
    const int db = axis == 0 ? 1 : 0;
    const int dr = axis == 1 ? 1 : 0;
    const int dc = axis == 2 ? 1 : 0;
    const long long count = static_cast<long long>(nb - db) * (nr - dr) * (nc - dc);
    if (count <= 0) {
        return 0.0;
    }
    double sum = 0.0;
    const T scale = weight / static_cast<T>(count);
    for (int b = 0; b + db < nb; ++b) {
        for (int r = 0; r + dr < nr; ++r) {
            for (int c = 0; c + dc < nc; ++c) {
                const T d = x(b + db, r + dr, c + dc) - x(b, r, c);
                sum += std::abs(static_cast<double>(d));
                if (grad) {
                    const T g = scale * sign(d);
                    (*grad)(b + db, r + dr, c + dc) += g;
                    (*grad)(b, r, c) -= g;
                }
            }
        }
    }
    return sum / static_cast<double>(count);
}

template <typename T>
double sstv_with_grad(const Tensor3<T>& x, T weight, Tensor3<T>* grad) {
    return axis_tv(x, 1, weight, grad) + axis_tv(x, 2, weight, grad) + axis_tv(x, 0, weight, grad);
}

LossBreakdown make_breakdown(double l1, double sstv, Term term = Term::hsi) {
    return {l1, sstv, l1 + sstv, term};
}

}  // namespace

template <typename T>
double l1_loss(const Tensor3<T>& pred, const Tensor3<T>& target) {
    pred.require_same_shape(target, "l1_loss");
    if (pred.size() == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sum += std::abs(static_cast<double>(pred.data()[i]) - static_cast<double>(target.data()[i]));
    }
    return sum / static_cast<double>(pred.size());
}

template <typename T>
double sstv_loss(const Tensor3<T>& cube) {
    return sstv_with_grad<T>(cube, T(1), nullptr);
}

template <typename T>
double sstv_loss(const std::vector<Tensor3<T>>& batch) {
    if (batch.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& x : batch) {
        sum += sstv_loss(x);
    }
    return sum / static_cast<double>(batch.size());
}

template <typename T>
LossBreakdown composite_loss(const Tensor3<T>& pred, const Tensor3<T>& target, double sstv_weight) {
    return make_breakdown(l1_loss(pred, target), sstv_weight != 0.0 ? sstv_weight * sstv_loss(pred) : 0.0);
}

template <typename T>
LossBreakdown composite_loss(const std::vector<Tensor3<T>>& pred, const std::vector<Tensor3<T>>& target) {
    if (pred.size() != target.size()) {
        throw ShapeError("composite_loss: batch sizes differ");
    }
    if (pred.empty()) {
        return {};
    }
    double abs_sum = 0.0;
    double elements = 0.0;
    for (std::size_t n = 0; n < pred.size(); ++n) {
        abs_sum += l1_loss(pred[n], target[n]) * static_cast<double>(pred[n].size());
        elements += static_cast<double>(pred[n].size());
    }
    return make_breakdown(elements > 0 ? abs_sum / elements : 0.0, sstv_loss(pred));
}

template <typename T>
LossBreakdown composite_loss_grad(const Tensor3<T>& pred, const Tensor3<T>& target, T weight, Tensor3<T>* grad_pred,
                                  Tensor3<T>* grad_target, double sstv_weight) {
    pred.require_same_shape(target, "composite_loss");
    for (Tensor3<T>* g : {grad_pred, grad_target}) {
        if (g && !g->same_shape(pred)) {
            *g = Tensor3<T>(pred.channels(), pred.rows(), pred.cols());
        }
    }
    const double l1 = l1_loss(pred, target);
    if (pred.size() > 0 && (grad_pred || grad_target)) {
        const T scale = weight / static_cast<T>(pred.size());
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const T g = scale * sign(pred.data()[i] - target.data()[i]);
            if (grad_pred) grad_pred->data()[i] += g;
            if (grad_target) grad_target->data()[i] -= g;
        }
    }
    const double sstv =
        sstv_weight != 0.0 ? sstv_weight * sstv_with_grad(pred, static_cast<T>(weight * sstv_weight), grad_pred) : 0.0;
    return make_breakdown(l1, sstv);
}

template <typename T>
LossBreakdown ssl_consistency_loss(const Tensor3<T>& unlabeled_lr, const SrNet<T>& model, const CrfMatrix& crf,
                                   const SslOptions& options) {
    const Tensor3<T> path_rgb = model.forward_rgb(project_to_rgb(unlabeled_lr, crf));
    const Tensor3<T> path_hsi = project_to_rgb(model.forward_hsi(unlabeled_lr), crf);
    auto out = composite_loss(path_hsi, path_rgb, options.include_sstv ? options.sstv_weight : 0.0);
    out.term = Term::ssl;
    return out;
}

template <typename T>
LossBreakdown accumulate_hsi(SrNet<T>& model, const Tensor3<T>& lr, const Tensor3<T>& hr, T weight,
                             double sstv_weight) {
    nn::HsiTape<T> tape;
    const Tensor3<T> pred = model.forward_hsi(lr, &tape);
    Tensor3<T> grad;
    auto out = composite_loss_grad(pred, hr, weight, &grad, static_cast<Tensor3<T>*>(nullptr), sstv_weight);
    model.backward_hsi(tape, grad);
    out.term = Term::hsi;
    return out;
}

template <typename T>
LossBreakdown accumulate_rgb(SrNet<T>& model, const Tensor3<T>& lr, const Tensor3<T>& hr, T weight,
                             double sstv_weight) {
    nn::RgbTape<T> tape;
    const Tensor3<T> pred = model.forward_rgb(lr, &tape);
    Tensor3<T> grad;
    auto out = composite_loss_grad(pred, hr, weight, &grad, static_cast<Tensor3<T>*>(nullptr), sstv_weight);
    model.backward_rgb(tape, grad);
    out.term = Term::rgb;
    return out;
}

template <typename T>
LossBreakdown accumulate_ssl(SrNet<T>& model, const Tensor3<T>& unlabeled_lr, const CrfMatrix& crf,
                             const SslOptions& options, T weight) {
    nn::RgbTape<T> rgb_tape;
    nn::HsiTape<T> hsi_tape;
    const Tensor3<T> path_rgb = model.forward_rgb(project_to_rgb(unlabeled_lr, crf), &rgb_tape);
    const Tensor3<T> path_hsi = project_to_rgb(model.forward_hsi(unlabeled_lr, &hsi_tape), crf);
    Tensor3<T> grad_hsi;
    Tensor3<T> grad_rgb;
    auto out = composite_loss_grad(path_hsi, path_rgb, weight, &grad_hsi,
                                   options.detach_rgb ? nullptr : &grad_rgb,
                                   options.include_sstv ? options.sstv_weight : 0.0);
    model.backward_hsi(hsi_tape, project_to_rgb_adjoint(grad_hsi, crf));
    if (!options.detach_rgb) {
        model.backward_rgb(rgb_tape, grad_rgb);
    }
    out.term = Term::ssl;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

LossBreakdown mean_of(const std::vector<LossBreakdown>& parts, Term term) {
    LossBreakdown out;
    out.term = term;
    if (parts.empty()) {
        return out;
    }
    for (const auto& p : parts) {
        out.l1 += p.l1;
        out.sstv += p.sstv;
    }
    out.l1 /= static_cast<double>(parts.size());
    out.sstv /= static_cast<double>(parts.size());
    out.total = out.l1 + out.sstv;
    return out;
}

template <typename Fn>
LossBreakdown eval_pairs(const std::vector<PatchPair>& batch, Term term, double sstv_weight, Fn&& forward) {
    std::vector<LossBreakdown> parts;
    for (const auto& p : batch) {
        parts.push_back(composite_loss(forward(p.lr), p.hr, sstv_weight));
    }
    return mean_of(parts, term);
}

}  // namespace

std::vector<LossBreakdown> total_loss(const BatchBundle& bundle, const SrNet<float>& model, const CrfMatrix* crf,
                                      const BatchCounts& counts, const std::array<Term, 4>& order,
                                      const SslOptions& ssl) {
    auto require = [&](std::size_t have, Term term) {
        if (have < static_cast<std::size_t>(counts.count(term))) {
            throw ValidationError("missing data stream for loss term '" + std::string(to_string(term)) + "'");
        }
    };
    require(bundle.hsi.size(), Term::hsi);
    require(bundle.rgb.size(), Term::rgb);
    require(bundle.mixup.size(), Term::mixup);
    require(bundle.mixing.size(), Term::mixup);
    require(bundle.ssl.size(), Term::ssl);
    if (counts.ssl > 0 && crf == nullptr) {
        throw ValidationError("SSL term needs a camera response function");
    }

    auto hsi_forward = [&](const Tensor3<float>& lr) { return model.forward_hsi(lr); };
    auto rgb_forward = [&](const Tensor3<float>& lr) { return model.forward_rgb(lr); };

    std::vector<LossBreakdown> out;
    for (Term term : order) {
        for (int i = 0; i < counts.count(term); ++i) {
            const auto k = static_cast<std::size_t>(i);
            switch (term) {
                case Term::hsi:
                    out.push_back(eval_pairs(bundle.hsi[k], term, bundle.sstv_weight, hsi_forward));
                    break;
                case Term::rgb:
                    out.push_back(eval_pairs(bundle.rgb[k], term, bundle.sstv_weight, rgb_forward));
                    break;
                case Term::mixup: {
                    std::vector<PatchPair> mixed;
                    for (const auto& p : bundle.mixup[k]) {
                        auto [lr, hr] = spectral_mixup(p.lr, p.hr, bundle.alpha, bundle.mixing[k]);
                        mixed.push_back({std::move(lr), std::move(hr), p.source_id, p.row, p.col});
                    }
                    out.push_back(eval_pairs(mixed, term, bundle.sstv_weight, hsi_forward));
                    break;
                }
                case Term::ssl: {
                    std::vector<LossBreakdown> parts;
                    for (const auto& lr : bundle.ssl[k]) {
                        parts.push_back(ssl_consistency_loss(lr, model, *crf, ssl));
                    }
                    out.push_back(mean_of(parts, term));
                    break;
                }
            }
        }
    }
    return out;
}

#define HSISR_INSTANTIATE(T)                                                                                     \
    template double l1_loss<T>(const Tensor3<T>&, const Tensor3<T>&);                                          \
    template double sstv_loss<T>(const Tensor3<T>&);                                                           \
    template double sstv_loss<T>(const std::vector<Tensor3<T>>&);                                              \
    template LossBreakdown composite_loss<T>(const Tensor3<T>&, const Tensor3<T>&, double);                    \
    template LossBreakdown composite_loss<T>(const std::vector<Tensor3<T>>&, const std::vector<Tensor3<T>>&); \
    template LossBreakdown composite_loss_grad<T>(const Tensor3<T>&, const Tensor3<T>&, T, Tensor3<T>*,        \
                                                  Tensor3<T>*, double);                                        \
    template LossBreakdown ssl_consistency_loss<T>(const Tensor3<T>&, const SrNet<T>&, const CrfMatrix&,       \
                                                   const SslOptions&);                                         \
    template LossBreakdown accumulate_hsi<T>(SrNet<T>&, const Tensor3<T>&, const Tensor3<T>&, T, double);      \
    template LossBreakdown accumulate_rgb<T>(SrNet<T>&, const Tensor3<T>&, const Tensor3<T>&, T, double);      \
    template LossBreakdown accumulate_ssl<T>(SrNet<T>&, const Tensor3<T>&, const CrfMatrix&, const SslOptions&, T);

HSISR_INSTANTIATE(float)
HSISR_INSTANTIATE(double)

#undef HSISR_INSTANTIATE

}  // namespace hsisr
