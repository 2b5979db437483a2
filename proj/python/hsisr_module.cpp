#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hsisr/cli.hpp"
#include "hsisr/resample.hpp"

namespace py = pybind11;
using namespace hsisr;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor3<float> to_tensor(const Array& a) {
    if (a.ndim() != 3) {
        throw ShapeError("expected a (bands, rows, cols) array, got " + std::to_string(a.ndim()) + " dimensions");
    }
    const auto c = static_cast<int>(a.shape(0));
    const auto r = static_cast<int>(a.shape(1));
    const auto w = static_cast<int>(a.shape(2));
    return Tensor3<float>(c, r, w, std::vector<float>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor3<float>& t) {
    Array out({t.channels(), t.rows(), t.cols()});
    std::copy(t.data(), t.data() + t.size(), out.mutable_data());
    return out;
}

py::dict report_dict(const MetricReport& m) {
    py::dict d;
    d["rmse"] = m.rmse;
    d["cc"] = m.cc;
    d["mpsnr"] = m.mpsnr;
    d["mssim"] = m.mssim;
    d["ergas"] = m.ergas;
    d["sam"] = m.sam;
    return d;
}

}  // namespace

PYBIND11_MODULE(_hsisr, m) {
    m.doc() = "Hyperspectral super-resolution core";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.def("load_cube", [](const std::filesystem::path& p) { return to_array(load_cube(p)); }, py::arg("path"));
    m.def(
        "save_cube", [](const Array& a, const std::filesystem::path& p) { save_cube(HsiCube(to_tensor(a)), p); },
        py::arg("cube"), py::arg("path"));
    m.def(
        "bicubic_resize",
        [](const Array& a, int rows, int cols) { return to_array(bicubic_resize(to_tensor(a), rows, cols)); },
        py::arg("image"), py::arg("rows"), py::arg("cols"));
    m.def(
        "degrade", [](const Array& a, int tau) { return to_array(degrade(to_tensor(a), tau)); }, py::arg("hr"),
        py::arg("tau"));
    m.def(
        "spectral_interpolate", [](const Array& a, int m) { return to_array(spectral_interpolate(to_tensor(a), m)); },
        py::arg("rgb"), py::arg("bands"));
    m.def(
        "spectral_mixup",
        [](const Array& lr, const Array& hr, double alpha, std::uint64_t seed) {
            Rng rng(seed);
            const auto b = make_mixing_matrix(static_cast<int>(lr.shape(0)), rng);
            auto [l, h] = spectral_mixup(to_tensor(lr), to_tensor(hr), alpha, b);
            return py::make_tuple(to_array(l), to_array(h));
        },
        py::arg("lr"), py::arg("hr"), py::arg("alpha") = 0.5, py::arg("seed") = 0);
    m.def(
        "group_starts", [](int bands, int size, int overlap) { return make_group_plan(bands, size, overlap).starts; },
        py::arg("bands"), py::arg("group_size") = 8, py::arg("overlap") = 2);
    m.def(
        "project_to_rgb",
        [](const Array& cube, const std::filesystem::path& crf_path, double first_nm, double last_nm) {
            const auto t = to_tensor(cube);
            const auto crf = load_crf(crf_path, band_centers(t.channels(), first_nm, last_nm));
            return to_array(project_to_rgb(t, crf));
        },
        py::arg("cube"), py::arg("crf_path"), py::arg("first_nm") = 400.0, py::arg("last_nm") = 700.0);

    m.def("rmse", [](const Array& a, const Array& b) { return rmse(to_tensor(a), to_tensor(b)); });
    m.def("mpsnr", [](const Array& a, const Array& b) { return mpsnr(to_tensor(a), to_tensor(b)); });
    m.def("mssim", [](const Array& a, const Array& b) { return mssim(to_tensor(a), to_tensor(b)); });
    m.def("cc", [](const Array& a, const Array& b) { return cc(to_tensor(a), to_tensor(b)); });
    m.def(
        "ergas", [](const Array& a, const Array& b, int tau) { return ergas(to_tensor(a), to_tensor(b), tau); },
        py::arg("ref"), py::arg("est"), py::arg("tau"));
    m.def("sam", [](const Array& a, const Array& b) { return sam(to_tensor(a), to_tensor(b)); });
    m.def(
        "evaluate_metrics",
        [](const Array& ref, const Array& est, int tau) {
            return report_dict(evaluate_metrics(to_tensor(ref), to_tensor(est), tau));
        },
        py::arg("ref"), py::arg("est"), py::arg("tau"));

    py::class_<SrNet<float>>(m, "SrNet")
        .def(py::init([](int bands, int tau, int feature_width, int ssb_per_stage, int group_size, int overlap,
                         bool zero_tail, std::uint64_t seed) {
                 NetworkConfig c;
                 c.hsi_bands = bands;
                 c.tau = tau;
                 c.feature_width = feature_width;
                 c.ssb_per_stage = ssb_per_stage;
                 c.group_size = group_size;
                 c.overlap = overlap;
                 c.zero_tail = zero_tail;
                 return SrNet<float>(c, seed);
             }),
             py::arg("bands") = 31, py::arg("tau") = 4, py::arg("feature_width") = 32, py::arg("ssb_per_stage") = 1,
             py::arg("group_size") = 8, py::arg("overlap") = 2, py::arg("zero_tail") = true, py::arg("seed") = 0)
        .def_static(
            "from_checkpoint",
            [](const std::filesystem::path& dir) {
                const Checkpoint ck = load_checkpoint(dir);
                SrNet<float> net(ck.network, 0);
                apply_checkpoint(ck, net);
                return net;
            },
            py::arg("path"))
        .def("forward_hsi", [](const SrNet<float>& n, const Array& lr) { return to_array(n.forward_hsi(to_tensor(lr))); })
        .def("forward_rgb", [](const SrNet<float>& n, const Array& lr) { return to_array(n.forward_rgb(to_tensor(lr))); })
        .def("save", [](const SrNet<float>& n, const std::filesystem::path& dir) { save_checkpoint(dir, n, TrainConfig{}); })
        .def_property_readonly("parameter_count", &SrNet<float>::parameter_count)
        .def_property_readonly("tau", [](const SrNet<float>& n) { return n.config().tau; })
        .def_property_readonly("bands", [](const SrNet<float>& n) { return n.config().hsi_bands; });

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "hsisr");
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            py::gil_scoped_release release;
            return run_cli(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Runs a command-line subcommand in-process and returns its exit code.");
}
