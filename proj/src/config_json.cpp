#include "hsisr/config_json.hpp"

#include <algorithm>

namespace hsisr {

namespace {

std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
}

void require_object(const Json& j, const std::string& path) {
    if (!j.is_object()) {
        throw ValidationError((path.empty() ? std::string("config") : path) + ": expected an object");
    }
}

}  // namespace

void require_known_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    require_object(j, path);
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) {
            throw ValidationError(join(path, item.key().c_str()) + ": unknown key");
        }
    }
}

void read_json(const Json& j, const std::string& path, ScaleConfig& out) {
    require_known_keys(j, path, {"tau", "patch_hr"});
    read_field(j, path, "tau", out.tau);
    read_field(j, path, "patch_hr", out.patch_hr);
}

void read_json(const Json& j, const std::string& path, NetworkConfig& out) {
    require_known_keys(j, path, {"group_size", "overlap", "feature_width", "ssb_per_stage", "tau", "hsi_bands",
                                 "attention_reduction", "zero_tail"});
    read_field(j, path, "group_size", out.group_size);
    read_field(j, path, "overlap", out.overlap);
    read_field(j, path, "feature_width", out.feature_width);
    read_field(j, path, "ssb_per_stage", out.ssb_per_stage);
    read_field(j, path, "tau", out.tau);
    read_field(j, path, "hsi_bands", out.hsi_bands);
    read_field(j, path, "attention_reduction", out.attention_reduction);
    read_field(j, path, "zero_tail", out.zero_tail);
}

void read_json(const Json& j, const std::string& path, BatchCounts& out) {
    require_known_keys(j, path, {"hsi", "rgb", "mixup", "ssl"});
    read_field(j, path, "hsi", out.hsi);
    read_field(j, path, "rgb", out.rgb);
    read_field(j, path, "mixup", out.mixup);
    read_field(j, path, "ssl", out.ssl);
}

void read_json(const Json& j, const std::string& path, TrainConfig& out) {
    require_known_keys(j, path, {"lr_initial", "lr_decay", "lr_decay_every_epochs", "epochs", "batch_size",
                                 "batches_per_iter", "term_order", "alpha_mixup", "sstv_weight", "feature_width", "seed", "max_iterations",
                                 "ssl_include_sstv", "ssl_detach_rgb"});
    read_field(j, path, "lr_initial", out.lr_initial);
    read_field(j, path, "lr_decay", out.lr_decay);
    read_field(j, path, "lr_decay_every_epochs", out.lr_decay_every_epochs);
    read_field(j, path, "epochs", out.epochs);
    read_field(j, path, "batch_size", out.batch_size);
    if (auto it = j.find("batches_per_iter"); it != j.end()) {
        read_json(*it, join(path, "batches_per_iter"), out.batches_per_iter);
    }
    if (auto it = j.find("term_order"); it != j.end()) {
        const std::string where = join(path, "term_order");
        if (!it->is_array() || it->size() != 4) {
            throw ValidationError(where + ": expected a list of the four terms");
        }
        for (std::size_t i = 0; i < 4; ++i) {
            if (!(*it)[i].is_string()) {
                throw ValidationError(where + "[" + std::to_string(i) + "]: expected a string");
            }
            try {
                out.term_order[i] = parse_term((*it)[i].get<std::string>());
            } catch (const ValidationError& e) {
                throw ValidationError(where + "[" + std::to_string(i) + "]: " + e.what());
            }
        }
    }
    read_field(j, path, "alpha_mixup", out.alpha_mixup);
    read_field(j, path, "sstv_weight", out.sstv_weight);
    read_field(j, path, "feature_width", out.feature_width);
    read_field(j, path, "seed", out.seed);
    read_field(j, path, "max_iterations", out.max_iterations);
    read_field(j, path, "ssl_include_sstv", out.ssl_include_sstv);
    read_field(j, path, "ssl_detach_rgb", out.ssl_detach_rgb);
}

Json to_json(const ScaleConfig& c) {
    return {{"tau", c.tau}, {"patch_hr", c.patch_hr}};
}

Json to_json(const NetworkConfig& c) {
    return {{"group_size", c.group_size},
            {"overlap", c.overlap},
            {"feature_width", c.feature_width},
            {"ssb_per_stage", c.ssb_per_stage},
            {"tau", c.tau},
            {"hsi_bands", c.hsi_bands},
            {"attention_reduction", c.attention_reduction},
            {"zero_tail", c.zero_tail}};
}

Json to_json(const BatchCounts& c) {
    return {{"hsi", c.hsi}, {"rgb", c.rgb}, {"mixup", c.mixup}, {"ssl", c.ssl}};
}

Json to_json(const TrainConfig& c) {
    Json order = Json::array();
    for (Term t : c.term_order) {
        order.push_back(std::string(to_string(t)));
    }
    return {{"lr_initial", c.lr_initial},
            {"lr_decay", c.lr_decay},
            {"lr_decay_every_epochs", c.lr_decay_every_epochs},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"batches_per_iter", to_json(c.batches_per_iter)},
            {"term_order", order},
            {"alpha_mixup", c.alpha_mixup},
            {"sstv_weight", c.sstv_weight},
            {"feature_width", c.feature_width},
            {"seed", c.seed},
            {"max_iterations", c.max_iterations},
            {"ssl_include_sstv", c.ssl_include_sstv},
            {"ssl_detach_rgb", c.ssl_detach_rgb}};
}

}  // namespace hsisr
