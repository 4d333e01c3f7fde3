// Python bindings for the main pipeline operations: synthetic data
// generation, container IO, band power, training, prediction, evaluation,
// and model persistence. Heavy calls release the GIL.

#include "midec/arch.hpp"
#include "midec/checkpoint.hpp"
#include "midec/dataset.hpp"
#include "midec/dsp.hpp"
#include "midec/evalharness.hpp"
#include "midec/fbcsp.hpp"
#include "midec/synth.hpp"
#include "midec/textio.hpp"
#include "midec/train.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using midec::EpochedDataset;

namespace {

// A trained classifier of either family behind one interface.
struct Model {
    std::optional<midec::model::TrainedNetwork> cnn;
    std::optional<midec::fbcsp::FbcspModel> fb;

    std::string kind() const {
        if (cnn) return midec::eval::to_cli_name(cnn->kind == midec::model::ModelKind::BfrCnn
                                                     ? midec::eval::EvalModel::Bfr
                                                     : midec::eval::EvalModel::Shallow);
        return "fbcsp";
    }

    std::size_t n_params() const { return cnn ? cnn->net.num_params() : 0; }

    std::vector<int> predict(const EpochedDataset& ds) const {
        if (cnn) return midec::model::predict(*cnn, ds).labels;
        std::vector<int> labels(ds.n_epochs());
        for (std::size_t e = 0; e < ds.n_epochs(); ++e) {
            labels[e] =
                midec::fbcsp::fbcsp_predict(*fb, ds.epoch(e), ds.n_channels, ds.n_samples);
        }
        return labels;
    }

    void save(const std::string& path) const {
        if (cnn) {
            midec::model::write_checkpoint(*cnn, path);
        } else {
            midec::write_file_atomic(path, midec::fbcsp::fbcsp_to_json(*fb));
        }
    }
};

Model load_model(const std::string& path) {
    const std::string blob = midec::read_file(path);
    Model m;
    if (blob.rfind("MIDECKPT", 0) == 0) {
        m.cnn = midec::model::load_checkpoint(blob);
    } else {
        m.fb = midec::fbcsp::fbcsp_from_json(blob);
    }
    return m;
}

py::array_t<float> dataset_array(const EpochedDataset& ds) {
    py::array_t<float> out({ds.n_epochs(), ds.n_channels, ds.n_samples});
    std::copy(ds.data.begin(), ds.data.end(), out.mutable_data());
    return out;
}

EpochedDataset make_dataset(py::array_t<float, py::array::c_style | py::array::forcecast> data,
                            const std::vector<int>& labels, double fs,
                            const std::vector<std::string>& class_names,
                            std::vector<std::string> channel_names) {
    if (data.ndim() != 3) {
        throw std::invalid_argument("make_dataset: data must be [epochs, channels, samples]");
    }
    EpochedDataset ds;
    ds.fs = fs;
    ds.n_channels = static_cast<std::size_t>(data.shape(1));
    ds.n_samples = static_cast<std::size_t>(data.shape(2));
    ds.class_names = class_names;
    if (channel_names.empty()) {
        for (std::size_t c = 0; c < ds.n_channels; ++c) {
            channel_names.push_back("ch" + std::to_string(c));
        }
    }
    ds.channel_names = std::move(channel_names);
    const auto n = static_cast<std::size_t>(data.shape(0));
    ds.data.assign(data.data(), data.data() + data.size());
    ds.labels = labels;
    for (std::size_t e = 0; e < n; ++e) {
        ds.trial_ids.push_back(static_cast<int>(e));
        ds.subject_ids.push_back(0);
    }
    ds.provenance = "python make_dataset";
    ds.validate();
    return ds;
}

midec::eval::EvalModel model_by_name(const std::string& name) {
    return midec::eval::eval_model_from_string(name);
}

Model train_model(const EpochedDataset& ds, const std::string& model, std::size_t epochs,
                  std::size_t batch, std::uint64_t seed) {
    const auto which = model_by_name(model);
    Model out;
    if (which == midec::eval::EvalModel::Fbcsp) {
        out.fb = midec::fbcsp::fbcsp_fit(ds);
        return out;
    }
    const auto kind = which == midec::eval::EvalModel::Bfr
                          ? midec::model::ModelKind::BfrCnn
                          : midec::model::ModelKind::ShallowConvNet;
    const auto arch =
        midec::model::arch_for(ds.fs, ds.n_samples, ds.n_channels, ds.class_names.size());
    midec::model::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.rng_seed = seed;
    out.cnn = midec::model::train(kind, arch, ds, cfg);
    return out;
}

py::dict result_dict(const midec::eval::ConfusionMatrix& cm, const std::vector<double>& accs) {
    py::dict d;
    const auto k = cm.class_names.size();
    py::array_t<std::int64_t> counts({k, k});
    auto* p = counts.mutable_data();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) p[i * k + j] = cm.at(i, j);
    }
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= accs.empty() ? 1.0 : static_cast<double>(accs.size());
    d["accuracy"] = mean;
    d["fold_accuracy"] = accs;
    d["confusion"] = counts;
    d["class_names"] = cm.class_names;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Motor-imagery EEG pipeline: synthesis, DSP, CNN and FBCSP classifiers";
    m.attr("__version__") = "1.0.0";

    py::class_<EpochedDataset>(m, "Dataset", "Labeled epochs: [epochs, channels, samples]")
        .def_readonly("fs", &EpochedDataset::fs)
        .def_property_readonly("n_epochs", &EpochedDataset::n_epochs)
        .def_readonly("n_channels", &EpochedDataset::n_channels)
        .def_readonly("n_samples", &EpochedDataset::n_samples)
        .def_readonly("class_names", &EpochedDataset::class_names)
        .def_readonly("channel_names", &EpochedDataset::channel_names)
        .def_readonly("labels", &EpochedDataset::labels)
        .def_readonly("provenance", &EpochedDataset::provenance)
        .def("data", &dataset_array, "Copy of the samples as float32 [epochs, channels, samples]")
        .def("__repr__", [](const EpochedDataset& ds) {
            return "<Dataset " + std::to_string(ds.n_epochs()) + "x" +
                   std::to_string(ds.n_channels) + "x" + std::to_string(ds.n_samples) + " @ " +
                   midec::num_to_string(ds.fs) + " Hz>";
        });

    py::class_<Model>(m, "Model", "A trained classifier (bfr, shallow, or fbcsp)")
        .def_property_readonly("kind", &Model::kind)
        .def_property_readonly("n_params", &Model::n_params)
        .def("predict", &Model::predict, py::arg("dataset"),
             py::call_guard<py::gil_scoped_release>(),
             "Predicted class index per epoch")
        .def("save", &Model::save, py::arg("path"))
        .def("__repr__", [](const Model& mo) { return "<Model " + mo.kind() + ">"; });

    m.def(
        "generate_dataset",
        [](std::size_t n_per_class, std::uint64_t seed, const std::string& params_json) {
            auto params = params_json.empty() ? midec::synth::default_params()
                                              : midec::synth::params_from_json(params_json);
            return midec::synth::generate_dataset(n_per_class, params, seed);
        },
        py::arg("n_per_class"), py::arg("seed") = 1, py::arg("params_json") = "",
        py::call_guard<py::gil_scoped_release>(),
        "Synthetic 4-class motor-imagery dataset (24 channels, 250 Hz)");

    m.def("make_dataset", &make_dataset, py::arg("data"), py::arg("labels"), py::arg("fs"),
          py::arg("class_names"), py::arg("channel_names") = std::vector<std::string>{},
          "Dataset from a float32 [epochs, channels, samples] array");

    m.def("read_dataset", &midec::data::read_dataset, py::arg("stem"),
          "Load a <stem>.json/<stem>.f32 container");
    m.def("write_dataset", &midec::data::write_dataset, py::arg("dataset"), py::arg("stem"),
          "Write a <stem>.json/<stem>.f32 container");

    m.def(
        "bandpower",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> epoch, double fs,
           double low, double high) {
            if (epoch.ndim() != 2) {
                throw std::invalid_argument("bandpower: epoch must be [channels, samples]");
            }
            const auto c = static_cast<std::size_t>(epoch.shape(0));
            const auto t = static_cast<std::size_t>(epoch.shape(1));
            std::vector<std::vector<double>> rows(c);
            for (std::size_t i = 0; i < c; ++i) {
                rows[i].assign(epoch.data() + i * t, epoch.data() + (i + 1) * t);
            }
            return midec::dsp::bandpower(rows, fs, low, high);
        },
        py::arg("epoch"), py::arg("fs"), py::arg("low"), py::arg("high"),
        "Mean squared amplitude per channel after an order-4 band-pass");

    m.def(
        "bandpass_filtfilt",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double fs,
           double low, double high, int order) {
            if (x.ndim() != 1) {
                throw std::invalid_argument("bandpass_filtfilt: x must be 1-D");
            }
            const std::vector<double> in(x.data(), x.data() + x.size());
            const auto cascade = midec::dsp::design_butterworth_bandpass(low, high, fs, order);
            const auto y = midec::dsp::filtfilt(cascade, in);
            return py::array_t<double>(static_cast<py::ssize_t>(y.size()), y.data());
        },
        py::arg("x"), py::arg("fs"), py::arg("low"), py::arg("high"), py::arg("order") = 4,
        "Zero-phase Butterworth band-pass of a 1-D signal");

    m.def("train", &train_model, py::arg("dataset"), py::arg("model") = "bfr",
          py::arg("epochs") = 200, py::arg("batch") = 32, py::arg("seed") = 1,
          py::call_guard<py::gil_scoped_release>(),
          "Train bfr/shallow (mini-batch Adam) or fbcsp (deterministic fit)");

    m.def("load_model", &load_model, py::arg("path"),
          "Load a CNN checkpoint or FBCSP JSON model file");

    m.def(
        "evaluate",
        [](const Model& model, const EpochedDataset& ds) {
            const auto r = model.cnn ? midec::eval::evaluate(*model.cnn, ds)
                                     : midec::eval::evaluate(*model.fb, ds);
            return result_dict(r.confusion, {r.accuracy});
        },
        py::arg("model"), py::arg("dataset"), "Accuracy and confusion matrix on a dataset");

    m.def(
        "cross_validate",
        [](const EpochedDataset& ds, const std::string& model, std::size_t k,
           std::uint64_t seed, std::size_t epochs, std::size_t batch) {
            midec::model::TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch;
            cfg.rng_seed = seed;
            midec::eval::CrossValResult r;
            {
                py::gil_scoped_release release;
                r = midec::eval::cross_validate(model_by_name(model), ds, k, seed, cfg);
            }
            return result_dict(r.confusion, r.fold_accuracy);
        },
        py::arg("dataset"), py::arg("model") = "bfr", py::arg("k") = 5, py::arg("seed") = 1,
        py::arg("epochs") = 200, py::arg("batch") = 32,
        "Stratified k-fold cross-validation; returns pooled confusion and fold accuracies");

    m.def(
        "stratified_kfold",
        [](const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
            return midec::eval::stratified_kfold(labels, k, seed);
        },
        py::arg("labels"), py::arg("k"), py::arg("seed") = 1,
        "Per-class balanced fold index lists");
}
