#include <bit>
#include <cstdio>
#include <fstream>

#include "hsisr/trainer.hpp"

namespace hsisr {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "hsisr-checkpoint";
constexpr int kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume a little-endian host");

void write_blob(const fs::path& path, const std::vector<float>& values) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

std::vector<float> read_blob(const fs::path& path, const std::string& name, std::size_t count) {
    std::error_code ec;
    const auto bytes = fs::file_size(path, ec);
    if (ec) {
        throw IoError("checkpoint tensor '" + name + "': cannot open blob " + path.filename().string());
    }
    if (bytes != count * sizeof(float)) {
        throw ValidationError("checkpoint tensor '" + name + "': blob has " + std::to_string(bytes) +
                              " bytes, expected " + std::to_string(count * sizeof(float)));
    }
    std::vector<float> values(count);
    std::ifstream in(path, std::ios::binary);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
    if (!in) {
        throw IoError("checkpoint tensor '" + name + "': read failed");
    }
    return values;
}

std::size_t element_count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 0) {
            throw ValidationError("negative tensor extent in checkpoint");
        }
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

}  // namespace

const CheckpointTensor* Checkpoint::find(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) {
            return &t;
        }
    }
    return nullptr;
}

void save_checkpoint(const fs::path& dir, const SrNet<float>& model, const TrainConfig& train,
                     const Trainer* trainer) {
    std::vector<CheckpointTensor> tensors;
    const auto params = model.parameters();
    for (const auto* p : params) {
        tensors.push_back({p->name, p->shape, p->value});
    }
    if (trainer) {
        const auto& m = trainer->optimizer().first_moment();
        const auto& v = trainer->optimizer().second_moment();
        for (std::size_t i = 0; i < params.size(); ++i) {
            tensors.push_back({"adam.m/" + params[i]->name, params[i]->shape, m[i]});
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            tensors.push_back({"adam.v/" + params[i]->name, params[i]->shape, v[i]});
        }
    }

    const fs::path target = fs::absolute(dir);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    const fs::path tmp = target.string() + ".tmp";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    Json index = Json::array();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        char file[32];
        std::snprintf(file, sizeof file, "t%04zu.f32", i);
        write_blob(tmp / file, tensors[i].values);
        index.push_back({{"name", tensors[i].name}, {"shape", tensors[i].shape}, {"file", file}});
    }
    Json manifest{{"format", kFormat},
                  {"version", kVersion},
                  {"network", to_json(model.config())},
                  {"train", to_json(train)},
                  {"epoch", trainer ? trainer->epoch() : 0},
                  {"iteration", trainer ? trainer->iteration() : 0},
                  {"adam_step", trainer ? trainer->optimizer().step_count() : 0},
                  {"trainer_state", trainer ? trainer->state() : Json(nullptr)},
                  {"tensors", index}};
    {
        std::ofstream out(tmp / "manifest.json");
        out << manifest.dump(2) << "\n";
        if (!out) {
            throw IoError("cannot write " + (tmp / "manifest.json").string());
        }
    }
    const fs::path old = target.string() + ".old";
    fs::remove_all(old);
    if (fs::exists(target)) {
        fs::rename(target, old);
    }
    fs::rename(tmp, target);
    fs::remove_all(old);
}

Checkpoint load_checkpoint(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) {
        throw IoError("no checkpoint manifest at " + manifest_path.string());
    }
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(manifest_path.string() + ": " + e.what());
    }
    Checkpoint ck;
    try {
        if (j.at("format") != kFormat || j.at("version") != kVersion) {
            throw ValidationError(manifest_path.string() + ": not a version 1 hsisr checkpoint");
        }
        read_json(j.at("network"), "network", ck.network);
        read_json(j.at("train"), "train", ck.train);
        ck.epoch = j.at("epoch").get<int>();
        ck.iteration = j.at("iteration").get<long long>();
        ck.adam_step = j.at("adam_step").get<long long>();
        ck.trainer_state = j.at("trainer_state");
        for (const auto& t : j.at("tensors")) {
            CheckpointTensor tensor;
            tensor.name = t.at("name").get<std::string>();
            tensor.shape = t.at("shape").get<std::vector<int>>();
            if (ck.find(tensor.name)) {
                throw ValidationError("checkpoint tensor '" + tensor.name + "' is listed twice");
            }
            tensor.values = read_blob(dir / t.at("file").get<std::string>(), tensor.name, element_count(tensor.shape));
            ck.tensors.push_back(std::move(tensor));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(manifest_path.string() + ": " + e.what());
    }
    return ck;
}

void apply_checkpoint(const Checkpoint& checkpoint, SrNet<float>& model) {
    if (!(checkpoint.network == model.config())) {
        throw ValidationError("checkpoint network config does not match the model");
    }
    const auto params = model.parameters();
    std::size_t model_tensors = 0;
    for (const auto& t : checkpoint.tensors) {
        model_tensors += t.name.rfind("adam.", 0) == 0 ? 0 : 1;
    }
    if (model_tensors != params.size()) {
        throw ValidationError("checkpoint holds " + std::to_string(model_tensors) + " model tensors, the model has " +
                              std::to_string(params.size()));
    }
    for (auto* p : params) {
        const auto* t = checkpoint.find(p->name);
        if (!t) {
            throw ValidationError("checkpoint is missing tensor '" + p->name + "'");
        }
        if (t->shape != p->shape) {
            throw ValidationError("checkpoint tensor '" + p->name + "' has the wrong shape");
        }
        p->value = t->values;
    }
}

void apply_checkpoint(const Checkpoint& checkpoint, Trainer& trainer) {
    apply_checkpoint(checkpoint, trainer.model());
    const auto params = trainer.model().parameters();
    auto& m = trainer.optimizer().first_moment();
    auto& v = trainer.optimizer().second_moment();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto* tm = checkpoint.find("adam.m/" + params[i]->name);
        const auto* tv = checkpoint.find("adam.v/" + params[i]->name);
        if (!tm || !tv) {
            throw ValidationError("checkpoint has no optimizer state for '" + params[i]->name + "'");
        }
        m[i] = tm->values;
        v[i] = tv->values;
    }
    if (checkpoint.trainer_state.is_null()) {
        throw ValidationError("checkpoint has no trainer state");
    }
    trainer.restore(checkpoint.trainer_state);
}

}  // namespace hsisr
