#include "hsisr/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

namespace hsisr {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& value) {
    const fs::path p(value);
    return p.is_absolute() ? p : base / p;
}

std::optional<fs::path> read_path(const Json& j, const fs::path& base, const char* key) {
    std::string value;
    if (!read_field(j, "", key, value)) {
        return std::nullopt;
    }
    return resolve(base, value);
}

CrfMatrix load_run_crf(const RunConfig& config) {
    if (!config.crf) {
        throw ValidationError("crf: the SSL term needs a camera response file");
    }
    return load_crf(*config.crf, band_centers(config.network.hsi_bands, config.band_first_nm, config.band_last_nm));
}

std::vector<std::pair<std::string, Tensor3<float>>> load_role(const DatasetManifest& manifest, Role role) {
    std::vector<std::pair<std::string, Tensor3<float>>> out;
    for (const auto* e : manifest.with_role(role)) {
        out.emplace_back(e->id, load_cube(e->path));
    }
    return out;
}

void print_report_line(const char* label, const MetricReport& m) {
    std::printf("%-8s rmse %.6f  cc %.6f  mpsnr %.4f  mssim %.6f  ergas %.4f  sam %.4f\n", label, m.rmse, m.cc,
                m.mpsnr, m.mssim, m.ergas, m.sam);
}

/// Checkpoint vs run-config agreement on the fields that change tensor shapes.
void check_checkpoint_matches(const NetworkConfig& ck, const RunConfig& run) {
    auto mismatch = [](const char* what, int ck_value, int run_value) {
        if (ck_value != run_value) {
            throw ValidationError(std::string(what) + " mismatch: checkpoint has " + std::to_string(ck_value) +
                                  ", config has " + std::to_string(run_value));
        }
    };
    mismatch("tau", ck.tau, run.scale.tau);
    mismatch("band count", ck.hsi_bands, run.network.hsi_bands);
    mismatch("group size", ck.group_size, run.network.group_size);
}

std::array<int, 3> display_bands(const std::vector<int>& one_based, int band_count) {
    std::array<int, 3> bands = kDefaultDisplayBands;
    if (!one_based.empty()) {
        if (one_based.size() != 3) {
            throw ValidationError("--bands takes exactly three 1-based band indices");
        }
        for (std::size_t i = 0; i < 3; ++i) {
            bands[i] = one_based[i] - 1;
        }
    } else if (band_count <= kDefaultDisplayBands.back()) {
        throw ValidationError("the default display bands 5/15/25 need at least 25 bands; this cube has " +
                              std::to_string(band_count) + ", pass --bands explicitly");
    }
    return bands;
}

// ---------------------------------------------------------------------------

struct PrepareArgs {
    std::string manifest;
    int tau = 4;
    int patch = 64;
    std::string out;
};

int cmd_prepare(const PrepareArgs& a) {
    const ScaleConfig scale{a.tau, a.patch};
    scale.validate();
    const DatasetManifest manifest = load_manifest(a.manifest);
    manifest.validate();
    const fs::path out = resolve_output_dir(a.out, "patches");
    if (manifest.entries.empty() && manifest.rgb_entries.empty()) {
        std::fprintf(stderr, "warning: manifest %s lists no images; nothing to prepare\n", a.manifest.c_str());
    }
    auto write_pairs = [&](const std::vector<PatchPair>& pairs, const fs::path& dir, bool hr_too) {
        fs::create_directories(dir);
        for (const auto& p : pairs) {
            const std::string stem = p.source_id + "_r" + std::to_string(p.row) + "_c" + std::to_string(p.col);
            save_cube(p.lr, dir / (stem + "_lr.hdr"));
            if (hr_too) {
                save_cube(p.hr, dir / (stem + "_hr.hdr"));
            }
        }
        return pairs.size();
    };
    for (Role role : {Role::labeled_train, Role::unlabeled_train, Role::test}) {
        std::size_t count = 0;
        for (const auto* e : manifest.with_role(role)) {
            const HsiCube cube = load_cube(e->path);
            if (e->is_lr) {
                const int lr_patch = scale.patch_hr / scale.tau;
                std::vector<PatchPair> tiles;
                for (int r = 0; r + lr_patch <= cube.rows(); r += lr_patch) {
                    for (int c = 0; c + lr_patch <= cube.cols(); c += lr_patch) {
                        tiles.push_back({cube.crop(r, c, lr_patch, lr_patch), {}, e->id, r, c});
                    }
                }
                count += write_pairs(tiles, out / to_string(role), false);
            } else {
                count += write_pairs(extract_patches(cube, scale.tau, scale.patch_hr, e->id), out / to_string(role),
                                     role != Role::unlabeled_train);
            }
        }
        std::printf("%-16s %zu pairs\n", to_string(role).c_str(), count);
    }
    std::size_t rgb_count = 0;
    for (const auto& e : manifest.rgb_entries) {
        Tensor3<float> image = load_rgb(e.path);
        if (manifest.rgb_downsample2) {
            image = bicubic_resize(image, image.rows() / 2, image.cols() / 2);
        }
        rgb_count += write_pairs(extract_patches(image, scale.tau, scale.patch_hr, e.id), out / "rgb", true);
    }
    std::printf("%-16s %zu pairs\n", "rgb", rgb_count);
    return 0;
}

struct TrainArgs {
    std::string config;
    std::string out;
    std::string resume;
    std::optional<int> epochs;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iterations;
    std::optional<int> batch_size;
    std::optional<double> lr;
};

int cmd_train(const TrainArgs& a) {
    RunConfig run = load_run_config(a.config);
    if (a.epochs) run.train.epochs = *a.epochs;
    if (a.seed) run.train.seed = *a.seed;
    if (a.max_iterations) run.train.max_iterations = *a.max_iterations;
    if (a.batch_size) run.train.batch_size = *a.batch_size;
    if (a.lr) run.train.lr_initial = *a.lr;
    if (!a.out.empty()) run.output_dir = a.out;
    run.train.validate();
    const fs::path out = resolve_output_dir(run.output_dir, "train");

    const DatasetManifest manifest = load_run_manifest(run);
    if (run.train.batches_per_iter.ssl > 0 && manifest.with_role(Role::unlabeled_train).empty()) {
        throw ValidationError("train.batches_per_iter.ssl is " + std::to_string(run.train.batches_per_iter.ssl) +
                              " but no unlabeled_train entries were given");
    }
    if (run.train.batches_per_iter.rgb > 0 && manifest.rgb_entries.empty()) {
        throw ValidationError("train.batches_per_iter.rgb is " + std::to_string(run.train.batches_per_iter.rgb) +
                              " but no RGB entries were given");
    }
    std::optional<CrfMatrix> crf;
    if (run.train.batches_per_iter.ssl > 0) {
        crf = load_run_crf(run);
    }
    SrNet<float> model(run.network, run.train.seed);
    Trainer trainer(model, run.train, load_train_data(manifest, run.scale), crf ? &*crf : nullptr);
    if (!a.resume.empty()) {
        const Checkpoint ck = load_checkpoint(a.resume);
        check_checkpoint_matches(ck.network, run);
        apply_checkpoint(ck, trainer);
        std::printf("resumed from %s at epoch %d, iteration %lld\n", a.resume.c_str(), ck.epoch, ck.iteration);
    }

    fs::create_directories(out / "checkpoints");
    {
        std::ofstream cfg(out / "run_config.json");
        cfg << Json{{"scale", to_json(run.scale)}, {"network", to_json(run.network)}, {"train", to_json(run.train)}}
                   .dump(2)
            << "\n";
    }
    TrainLogWriter log(out / "train_log.csv", !a.resume.empty());
    std::printf("training: %zu labeled, %zu rgb, %zu unlabeled patches; %lld iterations per epoch\n",
                trainer.data().labeled.size(), trainer.data().rgb.size(), trainer.data().unlabeled.size(),
                trainer.iterations_per_epoch());
    TrainCallbacks callbacks;
    callbacks.on_row = [&](const LogRow& row) { log.write(row); };
    callbacks.on_epoch_end = [&](int epoch) {
        char name[32];
        std::snprintf(name, sizeof name, "epoch_%03d", epoch);
        save_checkpoint(out / "checkpoints" / name, model, run.train, &trainer);
        std::printf("epoch %d done (iteration %lld, lr %.3g)\n", epoch, trainer.iteration(),
                    lr_at_epoch(run.train, epoch - 1));
        std::fflush(stdout);
    };
    trainer.train(callbacks);
    save_checkpoint(out / "checkpoints" / "final", model, run.train, &trainer);
    std::printf("wrote %s\n", (out / "checkpoints" / "final").string().c_str());
    return 0;
}

struct EvalArgs {
    std::string config;
    std::string checkpoint;
    std::string out;
};

int cmd_eval(const EvalArgs& a) {
    RunConfig run = load_run_config(a.config);
    if (!a.out.empty()) run.output_dir = a.out;
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    check_checkpoint_matches(ck.network, run);
    SrNet<float> model(ck.network, 0);
    apply_checkpoint(ck, model);
    const DatasetManifest manifest = load_run_manifest(run);
    const EvalResult result = evaluate(model, load_role(manifest, Role::test));
    const fs::path out = resolve_output_dir(run.output_dir, "eval");
    fs::create_directories(out);
    write_metrics_csv(result.images, out / "metrics.csv");
    write_metrics_summary(result.images, out / "summary.json");
    print_report_line("model", result.model_mean);
    print_report_line("bicubic", result.bicubic_mean);
    std::printf("wrote %s\n", (out / "metrics.csv").string().c_str());
    return 0;
}

struct SrArgs {
    std::string checkpoint;
    std::string in;
    std::string out;
};

int cmd_sr(const SrArgs& a) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    SrNet<float> model(ck.network, 0);
    apply_checkpoint(ck, model);
    const HsiCube lr = load_cube(a.in);
    if (lr.bands() != ck.network.hsi_bands) {
        throw ValidationError("input has " + std::to_string(lr.bands()) + " bands, the checkpoint expects " +
                              std::to_string(ck.network.hsi_bands));
    }
    Tensor3<float> sr = model.forward_hsi(lr);
    for (auto& v : sr.values()) {
        v = std::clamp(v, 0.0f, 1.0f);
    }
    save_cube(sr, a.out);
    std::printf("wrote %s %s\n", header_path(a.out).string().c_str(), sr.shape_string().c_str());
    return 0;
}

struct VizArgs {
    std::string ref;
    std::string est;
    std::string out;
    std::vector<int> bands;
    double vmax = 0.0;
};

int cmd_viz(const VizArgs& a) {
    const HsiCube ref = load_cube(a.ref);
    const HsiCube est = load_cube(a.est);
    ref.require_same_shape(est, "viz");
    const auto bands = display_bands(a.bands, ref.bands());
    const ErrorMap map = error_map(ref, est, bands, a.vmax);
    const fs::path out = resolve_output_dir(a.out, "viz");
    fs::create_directories(out);
    save_png_rgb(render_bands(ref, bands), out / "ref.png");
    save_png_rgb(render_bands(est, bands), out / "est.png");
    save_png_rgb(map.heat, out / "error_heat.png");
    std::printf("bands %d/%d/%d (1-based), error max %.6g; wrote %s\n", bands[0] + 1, bands[1] + 1, bands[2] + 1,
                map.vmax, out.string().c_str());
    return 0;
}

struct SynthArgs {
    std::string out;
    int labeled = 8;
    int unlabeled = 8;
    int test = 4;
    int rgb = 8;
    int bands = 31;
    int edge = 64;
    std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a) {
    if (a.labeled < 0 || a.unlabeled < 0 || a.test < 0 || a.rgb < 0) {
        throw ValidationError("image counts must be >= 0");
    }
    const fs::path out = resolve_output_dir(a.out, "synth");
    fs::create_directories(out / "cubes");
    fs::create_directories(out / "rgb");
    const auto cubes = synth_dataset(a.labeled + a.unlabeled + a.test, a.bands, a.edge, a.seed);
    DatasetManifest manifest;
    manifest.root = ".";
    for (int i = 0; i < static_cast<int>(cubes.size()); ++i) {
        const Role role = i < a.labeled ? Role::labeled_train
                                        : (i < a.labeled + a.unlabeled ? Role::unlabeled_train : Role::test);
        char id[32];
        std::snprintf(id, sizeof id, "img%03d", i);
        save_cube(cubes[static_cast<std::size_t>(i)], out / "cubes" / (std::string(id) + ".hdr"));
        manifest.entries.push_back({id, fs::path("cubes") / (std::string(id) + ".hdr"), role, false});
    }
    const auto rgb = synth_rgb_dataset(a.rgb, a.edge, a.seed + 1);
    for (int i = 0; i < a.rgb; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "rgb%03d", i);
        save_png_rgb(rgb[static_cast<std::size_t>(i)], out / "rgb" / (std::string(id) + ".png"));
        manifest.rgb_entries.push_back({id, fs::path("rgb") / (std::string(id) + ".png")});
    }
    save_manifest(manifest, out / "manifest.json");
    std::printf("wrote %zu cubes and %d RGB images; manifest %s\n", cubes.size(), a.rgb,
                (out / "manifest.json").string().c_str());
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
    scale.validate();
    network.validate();
    train.validate();
    if (network.tau != scale.tau) {
        throw ValidationError("network.tau (" + std::to_string(network.tau) + ") does not match scale.tau (" +
                              std::to_string(scale.tau) + ")");
    }
    auto require_file = [](const fs::path& p, const char* key) {
        if (!fs::exists(p)) {
            throw ValidationError(std::string(key) + ": " + p.string() + " does not exist");
        }
    };
    if (manifest.empty()) {
        throw ValidationError("manifest: required");
    }
    require_file(manifest, "manifest");
    if (unlabeled_manifest) require_file(*unlabeled_manifest, "unlabeled_manifest");
    if (rgb_manifest) require_file(*rgb_manifest, "rgb_manifest");
    if (crf) require_file(*crf, "crf");
    if (!(band_first_nm < band_last_nm)) {
        throw ValidationError("band_range_nm: first must be below last");
    }
}

RunConfig parse_run_config(const Json& j, const fs::path& base_dir) {
    require_known_keys(j, "", {"manifest", "unlabeled_manifest", "rgb_manifest", "crf", "band_range_nm",
                               "output_dir", "scale", "network", "train"});
    RunConfig c;
    if (auto p = read_path(j, base_dir, "manifest")) c.manifest = *p;
    c.unlabeled_manifest = read_path(j, base_dir, "unlabeled_manifest");
    c.rgb_manifest = read_path(j, base_dir, "rgb_manifest");
    c.crf = read_path(j, base_dir, "crf");
    if (auto p = read_path(j, base_dir, "output_dir")) c.output_dir = *p;
    if (auto it = j.find("band_range_nm"); it != j.end()) {
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
            throw ValidationError("band_range_nm: expected [first_nm, last_nm]");
        }
        c.band_first_nm = (*it)[0].get<double>();
        c.band_last_nm = (*it)[1].get<double>();
    }
    if (auto it = j.find("scale"); it != j.end()) read_json(*it, "scale", c.scale);
    if (auto it = j.find("train"); it != j.end()) read_json(*it, "train", c.train);
    c.network.tau = c.scale.tau;
    c.network.feature_width = c.train.feature_width;
    if (auto it = j.find("network"); it != j.end()) {
        read_json(*it, "network", c.network);
        if (it->contains("feature_width") && j.contains("train") && j["train"].contains("feature_width") &&
            c.network.feature_width != c.train.feature_width) {
            throw ValidationError("network.feature_width (" + std::to_string(c.network.feature_width) +
                                  ") disagrees with train.feature_width (" + std::to_string(c.train.feature_width) +
                                  ")");
        }
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("config: cannot open " + path.string());
    }
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return parse_run_config(j, fs::absolute(path).parent_path());
}

DatasetManifest load_run_manifest(const RunConfig& config) {
    DatasetManifest merged = load_manifest(config.manifest);
    if (config.unlabeled_manifest) {
        const DatasetManifest extra = load_manifest(*config.unlabeled_manifest);
        merged.entries.insert(merged.entries.end(), extra.entries.begin(), extra.entries.end());
    }
    if (config.rgb_manifest) {
        const DatasetManifest extra = load_manifest(*config.rgb_manifest);
        merged.rgb_entries.insert(merged.rgb_entries.end(), extra.rgb_entries.begin(), extra.rgb_entries.end());
        merged.rgb_downsample2 = merged.rgb_downsample2 || extra.rgb_downsample2;
    }
    merged.validate();
    return merged;
}

fs::path resolve_output_dir(const fs::path& explicit_dir, const std::string& name) {
    if (!explicit_dir.empty()) {
        return explicit_dir;
    }
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
        return fs::path(root) / name;
    }
    return fs::path("runs") / name;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Hyperspectral super-resolution toolkit"};
    app.require_subcommand(1);

    PrepareArgs prepare;
    auto* p = app.add_subcommand("prepare", "Tile a manifest into LR/HR patch pairs");
    p->add_option("--manifest", prepare.manifest, "Dataset manifest (JSON)")->required();
    p->add_option("--tau", prepare.tau, "Scale factor");
    p->add_option("--patch", prepare.patch, "HR patch edge");
    p->add_option("--out", prepare.out, "Output directory");

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train from a run config");
    t->add_option("--config", train.config, "Run config (JSON)")->required();
    t->add_option("--out", train.out, "Output directory (overrides output_dir)");
    t->add_option("--resume", train.resume, "Checkpoint directory to resume from");
    t->add_option("--epochs", train.epochs);
    t->add_option("--seed", train.seed);
    t->add_option("--max-iterations", train.max_iterations);
    t->add_option("--batch-size", train.batch_size);
    t->add_option("--lr", train.lr, "Initial learning rate");

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "Score a checkpoint on the test entries");
    e->add_option("--config", eval.config, "Run config (JSON)")->required();
    e->add_option("--checkpoint", eval.checkpoint, "Checkpoint directory")->required();
    e->add_option("--out", eval.out, "Output directory");

    SrArgs sr;
    auto* s = app.add_subcommand("sr", "Super-resolve one cube");
    s->add_option("--checkpoint", sr.checkpoint, "Checkpoint directory")->required();
    s->add_option("--in", sr.in, "Low-resolution cube (.hdr)")->required();
    s->add_option("--out", sr.out, "Output cube path (.hdr)")->required();

    VizArgs viz;
    auto* v = app.add_subcommand("viz", "Render band triplets and an error heat map");
    v->add_option("--ref", viz.ref, "Reference cube")->required();
    v->add_option("--est", viz.est, "Estimated cube")->required();
    v->add_option("--out", viz.out, "Output directory");
    v->add_option("--bands", viz.bands, "Three 1-based band indices (default 5 15 25)")->expected(3);
    v->add_option("--vmax", viz.vmax, "Error value mapped to white (default: map maximum)");

    SynthArgs synth;
    auto* y = app.add_subcommand("synth", "Write a synthetic dataset and manifest");
    y->add_option("--out", synth.out, "Output directory");
    y->add_option("--labeled", synth.labeled);
    y->add_option("--unlabeled", synth.unlabeled);
    y->add_option("--test", synth.test);
    y->add_option("--rgb", synth.rgb);
    y->add_option("--bands", synth.bands);
    y->add_option("--edge", synth.edge);
    y->add_option("--seed", synth.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 1;
    }

    try {
        if (*p) return cmd_prepare(prepare);
        if (*t) return cmd_train(train);
        if (*e) return cmd_eval(eval);
        if (*s) return cmd_sr(sr);
        if (*v) return cmd_viz(viz);
        if (*y) return cmd_synth(synth);
    } catch (const ValidationError& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "failed: %s\n", err.what());
        return 2;
    }
    return 1;
}

}  // namespace hsisr
