#include "hsisr/core_types.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace hsisr {

void ScaleConfig::validate() const {
    if (tau < 2 || tau % 2 != 0) {
        throw ValidationError("tau must be an even factor >= 2, got " + std::to_string(tau));
    }
    if (patch_hr < tau || patch_hr % tau != 0) {
        throw ValidationError("patch_hr " + std::to_string(patch_hr) + " is not divisible by tau " +
                              std::to_string(tau));
    }
}

std::vector<int> GroupPlan::coverage() const {
    std::vector<int> counts(static_cast<std::size_t>(band_count), 0);
    for (int start : starts) {
        for (int b = start; b < start + group_size && b < band_count; ++b) {
            ++counts[static_cast<std::size_t>(b)];
        }
    }
    return counts;
}

void GroupPlan::validate() const {
    if (group_size < 1 || group_size > band_count) {
        throw ValidationError("group size must lie in [1, band_count]");
    }
    if (stride < 1 || stride > group_size) {
        throw ValidationError("group stride must lie in [1, group_size]");
    }
    if (starts.empty() || starts.back() + group_size != band_count) {
        throw ValidationError("last group must end on the last band");
    }
    for (int c : coverage()) {
        if (c == 0) {
            throw ValidationError("group plan leaves a band uncovered");
        }
    }
}

GroupPlan make_group_plan(int band_count, int group_size, int overlap) {
    if (band_count < 1) {
        throw ValidationError("band_count must be >= 1");
    }
    if (group_size < 1 || group_size > band_count) {
        throw ValidationError("group size " + std::to_string(group_size) + " exceeds band count " +
                              std::to_string(band_count));
    }
    if (overlap < 0 || overlap >= group_size) {
        throw ValidationError("overlap must lie in [0, group_size)");
    }
    GroupPlan plan;
    plan.band_count = band_count;
    plan.group_size = group_size;
    plan.stride = group_size - overlap;
    const int last = band_count - group_size;
    for (int start = 0;; start += plan.stride) {
        if (start >= last) {
            plan.starts.push_back(last);
            break;
        }
        plan.starts.push_back(start);
    }
    return plan;
}

std::string_view to_string(Term term) {
    switch (term) {
        case Term::hsi: return "hsi";
        case Term::rgb: return "rgb";
        case Term::mixup: return "smixup";
        case Term::ssl: return "ssl";
    }
    return "?";
}

Term parse_term(std::string_view name) {
    if (name == "hsi") return Term::hsi;
    if (name == "rgb") return Term::rgb;
    if (name == "mixup" || name == "smixup") return Term::mixup;
    if (name == "ssl") return Term::ssl;
    throw ValidationError("unknown loss term '" + std::string(name) + "'");
}

int BatchCounts::count(Term term) const {
    switch (term) {
        case Term::hsi: return hsi;
        case Term::rgb: return rgb;
        case Term::mixup: return mixup;
        case Term::ssl: return ssl;
    }
    return 0;
}

int TrainConfig::effective_batch_size() const {
    if (batch_size > 0) {
        return batch_size;
    }
    return batches_per_iter.ssl > 0 ? 8 : 16;
}

void TrainConfig::validate() const {
    const auto& n = batches_per_iter;
    if (n.hsi < 1) {
        throw ValidationError("train.batches_per_iter.hsi must be >= 1");
    }
    if (n.rgb < 0 || n.mixup < 0 || n.ssl < 0) {
        throw ValidationError("train.batches_per_iter counts must be >= 0");
    }
    if (!(alpha_mixup >= 0.0 && alpha_mixup <= 1.0)) {
        throw ValidationError("train.alpha_mixup must lie in [0,1]");
    }
    if (!(sstv_weight >= 0.0 && std::isfinite(sstv_weight))) {
        throw ValidationError("train.sstv_weight must be a finite non-negative number");
    }
    if (!(lr_initial > 0.0) || !(lr_decay > 0.0) || lr_decay_every_epochs < 1) {
        throw ValidationError("train learning-rate schedule must be positive");
    }
    if (epochs < 0 || batch_size < 0 || max_iterations < 0 || feature_width < 1) {
        throw ValidationError("train counts must be non-negative");
    }
    std::set<Term> seen(term_order.begin(), term_order.end());
    if (seen.size() != term_order.size()) {
        throw ValidationError("train.term_order must list each term once");
    }
    if (term_order.front() != Term::hsi) {
        // the supervised step always opens an iteration
        throw ValidationError("train.term_order must start with hsi");
    }
}

ValidationResult validate_cube(const Tensor3<float>& cube, std::size_t max_reports) {
    ValidationResult result;
    if (cube.channels() < 1 || cube.rows() < 1 || cube.cols() < 1) {
        result.violations.push_back({ViolationKind::shape, "cube has an empty extent: " + cube.shape_string()});
        return result;
    }
    for (int b = 0; b < cube.channels(); ++b) {
        for (int r = 0; r < cube.rows(); ++r) {
            for (int c = 0; c < cube.cols(); ++c) {
                if (result.violations.size() >= max_reports) {
                    return result;
                }
                const float v = cube(b, r, c);
                const bool finite = std::isfinite(v);
                if (finite && v >= 0.0f && v <= 1.0f) {
                    continue;
                }
                std::ostringstream where;
                where << "(" << b << "," << r << "," << c << ")";
                if (!finite) {
                    result.violations.push_back(
                        {ViolationKind::non_finite, "non-finite value at " + where.str(), b, r, c});
                } else {
                    result.violations.push_back(
                        {ViolationKind::out_of_range, "value out of [0,1] at " + where.str(), b, r, c});
                }
            }
        }
    }
    return result;
}

}  // namespace hsisr
