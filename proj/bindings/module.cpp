#include <cstring>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ttwopt/evaluation.hpp"
#include "ttwopt/io.hpp"
#include "ttwopt/tensor.hpp"
#include "ttwopt/tensorize.hpp"
#include "ttwopt/tt.hpp"
#include "ttwopt/wopt.hpp"

namespace py = pybind11;
using namespace ttwopt;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

DenseTensor tensor_from_array(const FArray& arr) {
    if (arr.ndim() < 1) throw std::invalid_argument("expected an array with at least one axis");
    std::vector<index_t> dims(static_cast<std::size_t>(arr.ndim()));
    for (py::ssize_t i = 0; i < arr.ndim(); ++i)
        dims[static_cast<std::size_t>(i)] = static_cast<index_t>(arr.shape(i));
    Shape shape(dims);
    std::vector<double> values(static_cast<std::size_t>(shape.count()));
    std::memcpy(values.data(), arr.data(), values.size() * sizeof(double));
    return DenseTensor(std::move(shape), std::move(values));
}

py::array_t<double> array_from_tensor(const DenseTensor& t) {
    std::vector<py::ssize_t> shape(t.shape().dims().begin(), t.shape().dims().end());
    py::array_t<double, py::array::f_style> arr(shape);
    std::memcpy(arr.mutable_data(), t.data(), static_cast<std::size_t>(t.size()) * sizeof(double));
    return arr;
}

TTCores cores_from_list(const std::vector<FArray>& cores) {
    std::vector<DenseTensor> out;
    out.reserve(cores.size());
    for (const auto& c : cores) {
        if (c.ndim() != 3) throw std::invalid_argument("every TT core must be a 3-way array");
        out.push_back(tensor_from_array(c));
    }
    return TTCores(std::move(out));
}

py::list list_from_cores(const std::vector<DenseTensor>& cores) {
    py::list out;
    for (const DenseTensor& c : cores) out.append(array_from_tensor(c));
    return out;
}

OptimizerConfig make_config(const std::string& method, index_t max_iters, double rel_tol,
                            double grad_tol, std::optional<double> sigma, std::uint64_t seed) {
    OptimizerConfig config;
    if (method == "gd")
        config.method = OptimMethod::GradientDescent;
    else if (method == "ncg")
        config.method = OptimMethod::ConjugateGradient;
    else
        throw std::invalid_argument("method must be 'ncg' or 'gd'");
    config.max_iters = max_iters;
    config.rel_tol = rel_tol;
    config.grad_tol = grad_tol;
    config.init = InitScheme::gaussian(sigma);
    config.seed = seed;
    return config;
}

py::dict dict_from_trace(const OptimizerTrace& trace) {
    const py::ssize_t n = static_cast<py::ssize_t>(trace.records.size());
    py::array_t<std::int64_t> iters(n);
    py::array_t<double> f(n), gnorm(n), step(n);
    for (py::ssize_t i = 0; i < n; ++i) {
        const TraceRecord& r = trace.records[static_cast<std::size_t>(i)];
        iters.mutable_at(i) = r.iter;
        f.mutable_at(i) = r.f;
        gnorm.mutable_at(i) = r.gnorm;
        step.mutable_at(i) = r.step;
    }
    py::dict out;
    out["iter"] = iters;
    out["f"] = f;
    out["gnorm"] = gnorm;
    out["step"] = step;
    out["termination"] = termination_name(trace.termination);
    out["initial_f"] = trace.initial_f;
    return out;
}

TensorizationPlan plan_for_image_shape(const Shape& s) {
    if (s.order() != 3) throw std::invalid_argument("expected an H x W x C image array");
    return make_plan(s.dim(1), s.dim(2), s.dim(3));
}

TensorizationPlan plan_for_block_shape(const Shape& s) {
    const index_t k = s.order() - 1;
    if (k < 1) throw std::invalid_argument("input is not a block tensor");
    for (index_t n = 1; n <= k; ++n)
        if (s.dim(n) != 4) throw std::invalid_argument("input is not a block tensor");
    const index_t side = index_t{1} << k;
    return make_plan(side, side, s.dim(k + 1));
}

}  // namespace

PYBIND11_MODULE(_ttwopt, m) {
    m.doc() = "Tensor completion by tensor-train weighted optimization (TT-WOPT)";
    m.attr("__version__") = "0.1.0";

    m.def(
        "complete",
        [](const FArray& x, const FArray& w, const std::vector<index_t>& ranks,
           const std::string& method, index_t max_iters, double rel_tol, double grad_tol,
           std::optional<double> sigma, std::uint64_t seed) {
            ObservedProblem problem(tensor_from_array(x), tensor_from_array(w));
            const OptimizerConfig config =
                make_config(method, max_iters, rel_tol, grad_tol, sigma, seed);
            std::pair<TTCores, OptimizerTrace> result = [&] {
                py::gil_scoped_release release;
                return optimize(problem, ranks, config);
            }();
            const DenseTensor xhat = complete(problem, result.first);
            return py::make_tuple(array_from_tensor(xhat), dict_from_trace(result.second));
        },
        py::arg("x"), py::arg("w"), py::arg("ranks"), py::kw_only(), py::arg("method") = "ncg",
        py::arg("max_iters") = 1000, py::arg("rel_tol") = 1e-10, py::arg("grad_tol") = 1e-8,
        py::arg("sigma") = py::none(), py::arg("seed") = 0,
        "Fit TT cores to the observed entries (w == 1) of x and return\n"
        "(completed array, trace dict). The rank chain is (1, r1, ..., 1).");

    m.def(
        "optimize_cores",
        [](const FArray& x, const FArray& w, const std::vector<index_t>& ranks,
           const std::string& method, index_t max_iters, double rel_tol, double grad_tol,
           std::optional<double> sigma, std::uint64_t seed) {
            ObservedProblem problem(tensor_from_array(x), tensor_from_array(w));
            const OptimizerConfig config =
                make_config(method, max_iters, rel_tol, grad_tol, sigma, seed);
            std::pair<TTCores, OptimizerTrace> result = [&] {
                py::gil_scoped_release release;
                return optimize(problem, ranks, config);
            }();
            return py::make_tuple(list_from_cores(result.first.cores()),
                                  dict_from_trace(result.second));
        },
        py::arg("x"), py::arg("w"), py::arg("ranks"), py::kw_only(), py::arg("method") = "ncg",
        py::arg("max_iters") = 1000, py::arg("rel_tol") = 1e-10, py::arg("grad_tol") = 1e-8,
        py::arg("sigma") = py::none(), py::arg("seed") = 0,
        "Like complete(), but returns (list of TT cores, trace dict).");

    m.def(
        "init_cores",
        [](const std::vector<index_t>& shape, const std::vector<index_t>& ranks, double sigma,
           std::uint64_t seed) {
            OptimizerConfig config;
            config.init = InitScheme::gaussian(sigma);
            config.seed = seed;
            return list_from_cores(init_cores(Shape(shape), ranks, config).cores());
        },
        py::arg("shape"), py::arg("ranks"), py::kw_only(), py::arg("sigma") = 1.0,
        py::arg("seed") = 0, "Seeded i.i.d. Gaussian TT cores for the given shape and ranks.");

    m.def(
        "full",
        [](const std::vector<FArray>& cores) { return array_from_tensor(full(cores_from_list(cores))); },
        py::arg("cores"), "Dense reconstruction of a TT core list.");

    m.def(
        "objective",
        [](const FArray& x, const FArray& w, const std::vector<FArray>& cores) {
            ObservedProblem problem(tensor_from_array(x), tensor_from_array(w));
            return objective(problem, cores_from_list(cores));
        },
        py::arg("x"), py::arg("w"), py::arg("cores"),
        "Weighted objective 1/2 || W*(X - full(cores)) ||^2.");

    m.def(
        "gradient",
        [](const FArray& x, const FArray& w, const std::vector<FArray>& cores) {
            ObservedProblem problem(tensor_from_array(x), tensor_from_array(w));
            GradientSet g = gradient(problem, cores_from_list(cores));
            return list_from_cores(g.grads);
        },
        py::arg("x"), py::arg("w"), py::arg("cores"),
        "Per-core gradients of the weighted objective.");

    m.def(
        "finite_diff_gradient",
        [](const FArray& x, const FArray& w, const std::vector<FArray>& cores, double h) {
            ObservedProblem problem(tensor_from_array(x), tensor_from_array(w));
            GradientSet g = finite_diff_gradient(problem, cores_from_list(cores), h);
            return list_from_cores(g.grads);
        },
        py::arg("x"), py::arg("w"), py::arg("cores"), py::kw_only(), py::arg("h") = 1e-6,
        "Central-difference gradient oracle (slow; for checking).");

    m.def(
        "tensorize",
        [](const FArray& img) {
            const DenseTensor t = tensor_from_array(img);
            return array_from_tensor(tensorize(t, plan_for_image_shape(t.shape())));
        },
        py::arg("img"),
        "H x W x C image (H = W = 2^k) -> (k+1)-way block tensor of shape (4,...,4,C).");

    m.def(
        "detensorize",
        [](const FArray& t) {
            const DenseTensor tens = tensor_from_array(t);
            return array_from_tensor(detensorize(tens, plan_for_block_shape(tens.shape())));
        },
        py::arg("t"), "Exact inverse of tensorize().");

    m.def(
        "rse", [](const FArray& x, const FArray& xhat) { return rse(tensor_from_array(x), tensor_from_array(xhat)); },
        py::arg("x"), py::arg("xhat"), "Relative square error sqrt(||x-xhat||^2/||x||^2).");

    m.def(
        "psnr",
        [](const FArray& x, const FArray& xhat, double peak) {
            return psnr(tensor_from_array(x), tensor_from_array(xhat), peak);
        },
        py::arg("x"), py::arg("xhat"), py::kw_only(), py::arg("peak") = 255.0,
        "Peak signal-to-noise ratio in dB over all entries.");

    m.def(
        "gen_cp_problem",
        [](const std::vector<index_t>& dims, index_t rank, std::uint64_t seed) {
            return array_from_tensor(gen_cp_problem(dims, rank, seed));
        },
        py::arg("dims"), py::arg("rank"), py::kw_only(), py::arg("seed") = 0,
        "Synthetic ground truth from i.i.d. Gaussian CP factors.");

    m.def(
        "gen_mask",
        [](const std::vector<index_t>& dims, double rate, std::uint64_t seed) {
            return array_from_tensor(gen_mask(dims, rate, seed));
        },
        py::arg("dims"), py::arg("rate"), py::kw_only(), py::arg("seed") = 0,
        "Binary mask with exactly round(rate * size) zeros.");

    m.def(
        "read_tensor",
        [](const std::filesystem::path& path) { return array_from_tensor(read_tensor(path)); },
        py::arg("path"), "Read a .dten tensor file as a Fortran-ordered array.");
    m.def(
        "write_tensor",
        [](const std::filesystem::path& path, const FArray& t) {
            write_tensor(path, tensor_from_array(t));
        },
        py::arg("path"), py::arg("t"), "Write an array as a .dten tensor file (atomic).");
    m.def(
        "read_ppm",
        [](const std::filesystem::path& path) { return array_from_tensor(read_ppm(path)); },
        py::arg("path"), "Read a binary PPM (P6) as an H x W x 3 array of [0,255] doubles.");
    m.def(
        "write_ppm",
        [](const std::filesystem::path& path, const FArray& t) {
            write_ppm(path, tensor_from_array(t));
        },
        py::arg("path"), py::arg("t"), "Write an H x W x 3 array as a binary PPM (P6).");
}
