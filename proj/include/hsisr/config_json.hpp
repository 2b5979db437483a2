#pragma once

#include <string>

#include "json.hpp"

#include "hsisr/core_types.hpp"
#include "hsisr/srnet.hpp"

namespace hsisr {

using Json = nlohmann::json;

// Strict readers: unknown keys and wrongly typed values raise ValidationError
// naming the offending key path (e.g. "train.batches_per_iter.ssl").
// Keys missing from the object keep the value already in `out`.

void read_json(const Json& j, const std::string& path, ScaleConfig& out);
void read_json(const Json& j, const std::string& path, NetworkConfig& out);
void read_json(const Json& j, const std::string& path, BatchCounts& out);
void read_json(const Json& j, const std::string& path, TrainConfig& out);

Json to_json(const ScaleConfig& c);
Json to_json(const NetworkConfig& c);
Json to_json(const BatchCounts& c);
Json to_json(const TrainConfig& c);

/// Rejects keys of `j` not listed in `allowed`.
void require_known_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed);

/// Typed member access with key-path errors.
template <typename T>
bool read_field(const Json& j, const std::string& path, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) {
        return false;
    }
    const std::string where = path.empty() ? std::string(key) : path + "." + key;
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ValidationError(where + ": expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ValidationError(where + ": expected an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw ValidationError(where + ": expected a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw ValidationError(where + ": expected a string");
        }
        out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(where + ": " + e.what());
    }
    return true;
}

}  // namespace hsisr
