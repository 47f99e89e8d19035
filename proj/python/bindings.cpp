#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "scin/checkpoint.hpp"
#include "scin/layers.hpp"
#include "scin/model.hpp"
#include "scin/rng.hpp"
#include "scin/synthetic.hpp"
#include "scin/training.hpp"

namespace py = pybind11;
using namespace scin;

namespace {

template <typename T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <typename T>
BasicTensor<T> to_tensor(const Array<T>& a) {
    Shape shape(a.shape(), a.shape() + a.ndim());
    std::vector<T> values(a.data(), a.data() + a.size());
    return BasicTensor<T>(std::move(shape), values);
}

template <typename T>
Array<T> to_array(const BasicTensor<T>& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    Array<T> out(shape);
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

ArchitectureConfig arch_from(const py::dict& d) {
    const nlohmann::json j = nlohmann::json::parse(py::module_::import("json").attr("dumps")(d).cast<std::string>());
    return architecture_from_json(j);
}

py::object to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict record_dict(const ImageRecord& r) {
    py::dict d;
    d["image_id"] = r.image_id;
    d["device"] = std::string(to_string(r.device));
    d["sensor"] = std::string(to_string(r.sensor));
    d["pixels"] = to_array(r.pixels);
    return d;
}

}  // namespace

PYBIND11_MODULE(_scin, m) {
    m.doc() = "Camera model and sensor identification from image patches";
    m.attr("__version__") = SCIN_VERSION;

    static py::exception<Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, ("[" + std::string(to_string(e.kind())) + "] " + e.what()).c_str());
        }
    });

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
        .def_property_readonly("seed", &Rng::seed)
        .def("next_u64", &Rng::next_u64)
        .def("uniform", py::overload_cast<>(&Rng::uniform))
        .def("below", &Rng::below)
        .def("gaussian", &Rng::gaussian)
        .def_static("fork", &Rng::fork, py::arg("master_seed"), py::arg("worker_index"));

    py::class_<Network>(m, "Network")
        .def_property_readonly("num_classes", &Network::num_classes)
        .def_property_readonly("parameter_count", py::overload_cast<>(&Network::parameter_count, py::const_))
        .def_property_readonly("parameter_names", &Network::parameter_names)
        .def_property_readonly("config", [](const Network& n) { return to_py(to_json(n.config())); })
        .def("parameter", [](const Network& n, std::size_t i) {
            const auto params = n.parameters();
            if (i >= params.size()) throw py::index_error("parameter index out of range");
            return to_array(*params[i]);
        });

    m.def("canonical_architecture",
          [](std::size_t classes, std::size_t depth) { return to_py(to_json(ArchitectureConfig::canonical(classes, depth))); },
          py::arg("num_classes") = 3, py::arg("depth") = 2);
    m.def("parameter_count", [](const py::dict& arch) { return parameter_count(arch_from(arch)); });
    m.def(
        "build_network",
        [](const py::dict& arch, std::uint64_t seed) {
            Rng rng(seed);
            return build_network(arch_from(arch), rng);
        },
        py::arg("architecture"), py::arg("seed") = 0);
    m.def(
        "predict", [](const Network& n, const Array<float>& x) { return to_array(predict(n, to_tensor(x))); },
        py::arg("network"), py::arg("patches"));

    m.def(
        "conv2d",
        [](const Array<double>& input, const Array<double>& kernels, const Array<double>& bias, std::size_t stride,
           const std::string& padding) {
            const Conv2D<double> conv(to_tensor(kernels), to_tensor(bias), stride, padding_from_string(padding));
            return to_array(conv.forward(to_tensor(input)));
        },
        py::arg("input"), py::arg("kernels"), py::arg("bias"), py::arg("stride") = 1, py::arg("padding") = "same");

    m.def("save_checkpoint", [](const Network& n, const std::string& path) { save_checkpoint(n, path); });
    m.def("load_checkpoint", [](const std::string& path) { return load_checkpoint(path); });

    m.def(
        "generate_synthetic",
        [](std::size_t images_per_class, std::uint64_t seed, std::size_t num_classes, std::size_t size,
           bool correlated) {
            SyntheticOptions opts;
            opts.num_classes = num_classes;
            opts.height = opts.width = size;
            opts.correlated = correlated;
            validate(opts);
            Rng rng(seed);
            const auto specs = make_camera_specs(opts, rng);
            py::list out;
            for (const auto& r : generate_synthetic(specs, images_per_class, rng, opts)) out.append(record_dict(r));
            return out;
        },
        py::arg("images_per_class"), py::arg("seed") = 0, py::arg("num_classes") = 5, py::arg("size") = 64,
        py::arg("correlated") = false);

    m.def(
        "cross_validate",
        [](std::size_t images_per_class, std::uint64_t seed, const std::string& mode, const py::dict& arch,
           std::size_t epochs, std::size_t folds, std::size_t size) {
            SyntheticOptions opts;
            opts.height = opts.width = size;
            Rng rng(seed);
            const auto records = generate_synthetic(make_camera_specs(opts, rng), images_per_class, rng, opts);
            TrainConfig train;
            train.epochs = epochs;
            train.seed = seed;
            CrossValidationOptions cv;
            cv.folds = folds;
            const ArchitectureConfig cfg = arch_from(arch);
            const LabelMode label_mode = label_mode_from_string(mode);
            ExperimentReport report;
            {
                py::gil_scoped_release release;
                report = cross_validate(records, label_mode, cfg, train, cv);
            }
            return to_py(to_json(report));
        },
        py::arg("images_per_class"), py::arg("seed"), py::arg("mode"), py::arg("architecture"), py::arg("epochs") = 3,
        py::arg("folds") = 10, py::arg("size") = 64);

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
