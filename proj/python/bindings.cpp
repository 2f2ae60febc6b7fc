// Python bindings for the scae core: ball projections, quality metrics,
// the range coder and the training/eval drivers.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "scae/projections.hpp"
#include "scae/runner.hpp"

namespace py = pybind11;
using namespace scae;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor tensor_from_array(const FloatArray& arr) {
    std::vector<int> shape(arr.ndim());
    int64_t n = 1;
    for (py::ssize_t i = 0; i < arr.ndim(); ++i) {
        shape[size_t(i)] = int(arr.shape(i));
        n *= arr.shape(i);
    }
    std::vector<float> data(static_cast<size_t>(n));
    std::copy_n(arr.data(), size_t(n), data.begin());
    return Tensor::from_data(std::move(shape), std::move(data));
}

FloatArray array_from_tensor(const Tensor& t) {
    std::vector<py::ssize_t> shape;
    for (int e : t.shape()) shape.push_back(e);
    FloatArray arr(shape);
    std::copy_n(t.data().data(), size_t(t.numel()), arr.mutable_data());
    return arr;
}

FloatArray py_proj_l1(FloatArray v, double eta) {
    if (v.ndim() != 1) throw py::value_error("proj_l1 expects a 1-d array");
    std::vector<float> data(v.data(), v.data() + v.shape(0));
    proj_l1(std::span<float>(data), Radius(eta));
    FloatArray out({v.shape(0)});
    std::copy(data.begin(), data.end(), out.mutable_data());
    return out;
}

FloatArray py_proj_matrix(FloatArray v, double eta, bool linf) {
    if (v.ndim() != 2) throw py::value_error("matrix projections expect a 2-d array");
    const int rows = int(v.shape(0)), cols = int(v.shape(1));
    std::vector<float> data(v.data(), v.data() + size_t(rows) * cols);
    WeightView view(Tensor::from_data({rows, 1, 1, cols}, std::move(data)), size_t(rows),
                    size_t(cols));
    if (linf)
        proj_l1inf(view, Radius(eta));
    else
        proj_l11(view, Radius(eta));
    FloatArray out({py::ssize_t(rows), py::ssize_t(cols)});
    std::copy_n(view.tensor().data().data(), size_t(rows) * cols, out.mutable_data());
    return out;
}

double py_sparsity(FloatArray w) {
    std::vector<Tensor> one{tensor_from_array(w)};
    return sparsity(one);
}

py::bytes py_range_encode(py::array_t<int32_t, py::array::c_style | py::array::forcecast> symbols,
                          int symbol_count) {
    std::span<const int32_t> span(symbols.data(), size_t(symbols.size()));
    const FreqTable table = FreqTable::from_symbols(span, symbol_count);
    return py::bytes(range_encode(span, table));
}

py::array_t<int32_t> py_range_decode(
    const py::bytes& coded, size_t count,
    py::array_t<int32_t, py::array::c_style | py::array::forcecast> ref_symbols,
    int symbol_count) {
    std::span<const int32_t> span(ref_symbols.data(), size_t(ref_symbols.size()));
    const FreqTable table = FreqTable::from_symbols(span, symbol_count);
    const auto symbols = range_decode(std::string(coded), count, table);
    py::array_t<int32_t> out(py::ssize_t(symbols.size()));
    std::copy(symbols.begin(), symbols.end(), out.mutable_data());
    return out;
}

RunConfig config_from_kwargs(const std::string& config_path, const py::dict& overrides) {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_file(config_path);
    for (auto item : overrides)
        cfg.set(py::str(item.first), py::str(item.second));
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_scae, m) {
    m.doc() = "structured-sparsity CAE toolkit";

    m.def("proj_l1", &py_proj_l1, py::arg("v"), py::arg("eta"),
          "Euclidean projection onto the l1 ball");
    m.def(
        "proj_l11", [](FloatArray v, double eta) { return py_proj_matrix(v, eta, false); },
        py::arg("v"), py::arg("eta"),
        "Two-stage row-budget l1,1 projection (zeroes whole rows)");
    m.def(
        "proj_l1inf", [](FloatArray v, double eta) { return py_proj_matrix(v, eta, true); },
        py::arg("v"), py::arg("eta"), "Euclidean projection onto the l1,inf ball");
    m.def("sparsity", &py_sparsity, py::arg("w"), "exact-zero fraction");

    m.def(
        "psnr",
        [](FloatArray a, FloatArray b) { return psnr(tensor_from_array(a), tensor_from_array(b)); },
        py::arg("a"), py::arg("b"));
    m.def(
        "mssim",
        [](FloatArray a, FloatArray b) {
            return mssim(tensor_from_array(a), tensor_from_array(b));
        },
        py::arg("a"), py::arg("b"), "mean SSIM over (C,H,W) images in [0,1]");
    m.def("relative_loss", &relative_loss, py::arg("mse_ref"), py::arg("mse_l"));

    m.def("range_encode", &py_range_encode, py::arg("symbols"), py::arg("symbol_count"));
    m.def("range_decode", &py_range_decode, py::arg("coded"), py::arg("count"),
          py::arg("table_symbols"), py::arg("symbol_count"),
          "decode `count` symbols against the table built from table_symbols");
    m.def(
        "stream_entropy",
        [](py::array_t<int32_t, py::array::c_style | py::array::forcecast> symbols, int k) {
            return stream_entropy_bits({symbols.data(), size_t(symbols.size())}, k);
        },
        py::arg("symbols"), py::arg("symbol_count"), "bits/symbol of the empirical distribution");

    m.def(
        "train",
        [](const std::string& config, const py::dict& overrides) {
            const auto res = run_train(config_from_kwargs(config, overrides));
            py::dict out;
            out["checkpoint"] = res.checkpoint.string();
            out["loss_log"] = res.loss_log.string();
            out["manifest"] = res.manifest.string();
            return out;
        },
        py::arg("config") = "", py::arg("overrides") = py::dict());
    m.def(
        "sparsify",
        [](const std::string& checkpoint, const std::string& config, const py::dict& overrides) {
            const auto res = run_sparsify(config_from_kwargs(config, overrides), checkpoint);
            py::dict out;
            out["checkpoint"] = res.checkpoint.string();
            out["sparsity"] = res.sparsity_scoped;
            out["rm_scoped_pct"] = res.rm_scoped_pct;
            out["rm_model_pct"] = res.rm_model_pct;
            out["mem_reduction_pct"] = res.mem_reduction_pct;
            out["mem_csr_pct"] = res.mem_csr_pct;
            return out;
        },
        py::arg("checkpoint"), py::arg("config") = "", py::arg("overrides") = py::dict());
    m.def(
        "evaluate",
        [](const std::string& checkpoint, const std::string& images, const std::string& config,
           const py::dict& overrides) {
            const auto res =
                run_eval(config_from_kwargs(config, overrides), checkpoint, images);
            py::list rows;
            for (const auto& r : res.rows) {
                py::dict d;
                d["name"] = r.name;
                d["bpp_coded"] = r.bpp_coded;
                d["bpp_est"] = r.bpp_est;
                d["psnr"] = r.psnr;
                d["mssim"] = r.mssim;
                rows.append(d);
            }
            py::dict out;
            out["rows"] = rows;
            out["avg_bpp"] = res.average.bpp_coded;
            out["avg_psnr"] = res.average.psnr;
            out["avg_mssim"] = res.average.mssim;
            out["csv"] = res.csv.string();
            return out;
        },
        py::arg("checkpoint"), py::arg("images"), py::arg("config") = "",
        py::arg("overrides") = py::dict());

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DecodeError>(m, "DecodeError");
}
