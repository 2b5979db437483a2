#pragma once

#include <vector>

#include "hsisr/augment.hpp"
#include "hsisr/colorimetry.hpp"
#include "hsisr/core_types.hpp"
#include "hsisr/hsio.hpp"
#include "hsisr/srnet.hpp"

namespace hsisr {

struct LossBreakdown {
    double l1 = 0.0;
    double sstv = 0.0;
    double total = 0.0;
    Term term = Term::hsi;
};

/// Mean absolute difference over all elements.
template <typename T>
double l1_loss(const Tensor3<T>& pred, const Tensor3<T>& target);

/// Spatial-spectral TV of one cube: mean |forward difference| along rows,
/// along columns and along bands, summed. Empty difference sets contribute 0.
template <typename T>
double sstv_loss(const Tensor3<T>& cube);

/// (1/N) sum over the batch.
template <typename T>
double sstv_loss(const std::vector<Tensor3<T>>& batch);

/// L1(pred, target) + sstv_weight * SSTV(pred). The breakdown's `sstv` field holds
/// the weighted value so that total = l1 + sstv.
template <typename T>
LossBreakdown composite_loss(const Tensor3<T>& pred, const Tensor3<T>& target, double sstv_weight = 1.0);

template <typename T>
LossBreakdown composite_loss(const std::vector<Tensor3<T>>& pred, const std::vector<Tensor3<T>>& target);

/// composite_loss plus `weight` times its gradients. Either gradient pointer may be null.
template <typename T>
LossBreakdown composite_loss_grad(const Tensor3<T>& pred, const Tensor3<T>& target, T weight,
                                  Tensor3<T>* grad_pred, Tensor3<T>* grad_target, double sstv_weight = 1.0);

struct SslOptions {
    bool include_sstv = true;
    /// Treat the RGB-path output as a constant target.
    bool detach_rgb = false;
    double sstv_weight = 1.0;
};

/// Consistency between forward_rgb(project(lr)) and project(forward_hsi(lr)).
template <typename T>
LossBreakdown ssl_consistency_loss(const Tensor3<T>& unlabeled_lr, const SrNet<T>& model, const CrfMatrix& crf,
                                   const SslOptions& options = {});

// Forward + backward for one sample; parameter gradients are accumulated
// with the given weight (1/N for a batch of N).

template <typename T>
LossBreakdown accumulate_hsi(SrNet<T>& model, const Tensor3<T>& lr, const Tensor3<T>& hr, T weight,
                             double sstv_weight = 1.0);

template <typename T>
LossBreakdown accumulate_rgb(SrNet<T>& model, const Tensor3<T>& lr, const Tensor3<T>& hr, T weight,
                             double sstv_weight = 1.0);

template <typename T>
LossBreakdown accumulate_ssl(SrNet<T>& model, const Tensor3<T>& unlabeled_lr, const CrfMatrix& crf,
                             const SslOptions& options, T weight);

/// One iteration's worth of mini-batches for every loss term.
struct BatchBundle {
    std::vector<std::vector<PatchPair>> hsi;
    std::vector<std::vector<PatchPair>> rgb;
    std::vector<std::vector<PatchPair>> mixup;
    /// One mixing matrix per mixup batch.
    std::vector<MixingMatrix> mixing;
    double alpha = 0.5;
    double sstv_weight = 1.0;
    std::vector<std::vector<Tensor3<float>>> ssl;
};

/// Evaluates each term's batches with unit weights, one breakdown per mini-batch,
/// in the given term order. Terms with zero configured batches are skipped.
std::vector<LossBreakdown> total_loss(const BatchBundle& bundle, const SrNet<float>& model, const CrfMatrix* crf,
                                      const BatchCounts& counts,
                                      const std::array<Term, 4>& order = {Term::hsi, Term::rgb, Term::mixup, Term::ssl},
                                      const SslOptions& ssl = {});

}  // namespace hsisr
