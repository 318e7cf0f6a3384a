// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgf/conv.hpp"
#include "pgf/fusion.hpp"
#include "pgf/gabor.hpp"
#include "pgf/geometry.hpp"
#include "pgf/io.hpp"
#include "pgf/losses.hpp"
#include "pgf/metrics.hpp"
#include "pgf/parallel.hpp"

namespace py = pybind11;
using namespace pgf;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<uint8_t, py::array::c_style | py::array::forcecast>;

Grid grid_from_array(const FloatArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d float array");
    Grid g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::memcpy(g.data(), a.data(), sizeof(float) * g.size());
    return g;
}

Tensor tensor_from_array(const FloatArray& a) {
    if (a.ndim() == 2) {
        Tensor t(1, static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
        std::memcpy(t.data(), a.data(), sizeof(float) * t.size());
        return t;
    }
    if (a.ndim() != 3) throw std::invalid_argument("expected a 2-d or 3-d float array");
    Tensor t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
             static_cast<int>(a.shape(2)));
    std::memcpy(t.data(), a.data(), sizeof(float) * t.size());
    return t;
}

py::array_t<float> array_from_grid(const Grid& g) {
    py::array_t<float> out({g.height(), g.width()});
    std::memcpy(out.mutable_data(), g.data(), sizeof(float) * g.size());
    return out;
}

py::array_t<float> array_from_tensor(const Tensor& t) {
    py::array_t<float> out({t.channels(), t.height(), t.width()});
    std::memcpy(out.mutable_data(), t.data(), sizeof(float) * t.size());
    return out;
}

Axis axis_from_string(const std::string& name) {
    if (name == "x") return Axis::X;
    if (name == "y") return Axis::Y;
    throw std::invalid_argument("axis must be 'x' or 'y'");
}

LossConfig loss_config(double threshold, double eta) {
    LossConfig cfg;
    cfg.threshold = threshold;
    cfg.delta = threshold;
    cfg.eta = eta;
    return cfg;
}

py::dict report_dict(const MetricReport& r) {
    py::dict d;
    d["abs_rel"] = r.abs_rel;
    d["sq_rel"] = r.sq_rel;
    d["rmse"] = r.rmse;
    d["delta1"] = r.delta1;
    d["delta2"] = r.delta2;
    d["delta3"] = r.delta3;
    d["valid_pixels"] = r.valid_pixels;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Distortion-aware Gabor filtering, spherical projection, and depth "
              "losses for equirectangular panoramas";

    m.def("set_max_threads", &set_max_threads, py::arg("n"),
          "Cap the worker thread count (minimum 1).");
    m.def("max_threads", &max_threads, "Current worker thread cap.");

    m.def(
        "gabor_kernel",
        [](double frequency, double theta, double psi, double sigma) {
            const auto k = gabor_kernel(frequency, theta, psi, sigma);
            py::array_t<double> out({3, 3});
            std::memcpy(out.mutable_data(), k.data(), sizeof(double) * 9);
            return out;
        },
        py::arg("frequency"), py::arg("theta"), py::arg("psi"), py::arg("sigma"),
        "3x3 Gabor kernel; zero phase makes orientation half-turn periodic.");

    m.def(
        "distortion_coefficient",
        [](double lat, const std::string& mode) {
            return distortion_coefficient(lat, distortion_mode_from_string(mode));
        },
        py::arg("lat"), py::arg("mode") = "linear");

    m.def(
        "distortion_profile",
        [](int height, const std::string& mode) {
            const DistortionProfile p =
                distortion_profile(height, distortion_mode_from_string(mode));
            py::array_t<double> out(static_cast<py::ssize_t>(p.coefficients.size()));
            std::memcpy(out.mutable_data(), p.coefficients.data(),
                        sizeof(double) * p.coefficients.size());
            return out;
        },
        py::arg("height"), py::arg("mode") = "linear",
        "Per-row distortion coefficients for an ERP image of the given height.");

    m.def(
        "bank_parameters",
        [](double c, double epsilon) {
            const FilterBank b = pano_gabor_bank(c, epsilon);
            py::list rows;
            for (const GaborParams& p : b.params) {
                py::dict d;
                d["theta"] = p.theta;
                d["psi"] = p.psi;
                d["frequency"] = p.frequency;
                d["sigma"] = p.sigma;
                rows.append(d);
            }
            return rows;
        },
        py::arg("coefficient"), py::arg("epsilon") = 0.0,
        "The eight (theta, psi, frequency, sigma) rows for one coefficient.");

    m.def(
        "bank_kernels",
        [](double c, double epsilon) {
            const FilterBank b = pano_gabor_bank(c, epsilon);
            py::array_t<double> out({8, 3, 3});
            for (int i = 0; i < 8; ++i) {
                std::memcpy(out.mutable_data() + i * 9, b.kernels[static_cast<size_t>(i)].data(),
                            sizeof(double) * 9);
            }
            return out;
        },
        py::arg("coefficient"), py::arg("epsilon") = 0.0);

    m.def(
        "latitude_bank_kernels",
        [](int height, double epsilon, const std::string& mode) {
            const auto banks =
                latitude_bank_stack(height, epsilon, distortion_mode_from_string(mode));
            py::array_t<double> out({height, 8, 3, 3});
            double* dst = out.mutable_data();
            for (const FilterBank& b : banks) {
                for (const auto& k : b.kernels) {
                    std::memcpy(dst, k.data(), sizeof(double) * 9);
                    dst += 9;
                }
            }
            return out;
        },
        py::arg("height"), py::arg("epsilon") = 0.0, py::arg("mode") = "linear",
        "One 8x3x3 kernel bank per image row.");

    m.def(
        "erp_to_cubemap",
        [](const FloatArray& img, int face_size, double yaw) {
            const CubemapFaces f = erp_to_cubemap(tensor_from_array(img), face_size, yaw);
            py::array_t<float> out({6, f.channels(), f.face_size, f.face_size});
            float* dst = out.mutable_data();
            const size_t stride = f.faces[0].size();
            for (const Tensor& face : f.faces) {
                std::memcpy(dst, face.data(), sizeof(float) * stride);
                dst += stride;
            }
            return out;
        },
        py::arg("image"), py::arg("face_size"), py::arg("yaw") = 0.0,
        "Project an ERP image (HxW or CxHxW) to six faces, (6, C, S, S).");

    m.def(
        "cubemap_to_erp",
        [](const FloatArray& faces, int height, int width, double yaw) {
            if (faces.ndim() != 4 || faces.shape(0) != 6 || faces.shape(2) != faces.shape(3)) {
                throw std::invalid_argument("expected faces shaped (6, C, S, S)");
            }
            CubemapFaces f;
            f.face_size = static_cast<int>(faces.shape(2));
            f.yaw_offset = yaw;
            const size_t stride =
                static_cast<size_t>(faces.shape(1)) * faces.shape(2) * faces.shape(3);
            for (int i = 0; i < 6; ++i) {
                Tensor face(static_cast<int>(faces.shape(1)), f.face_size, f.face_size);
                std::memcpy(face.data(), faces.data() + i * stride, sizeof(float) * stride);
                f.faces[static_cast<size_t>(i)] = std::move(face);
            }
            return array_from_tensor(cubemap_to_erp(f, height, width));
        },
        py::arg("faces"), py::arg("height"), py::arg("width"), py::arg("yaw") = 0.0);

    m.def(
        "pano_gabor_conv",
        [](const FloatArray& x, double epsilon, const std::string& mode,
           const std::string& aggregate) {
            const Tensor t = tensor_from_array(x);
            const auto banks =
                latitude_bank_stack(t.height(), epsilon, distortion_mode_from_string(mode));
            return array_from_tensor(
                pano_gabor_conv(t, banks, aggregate_from_string(aggregate)));
        },
        py::arg("x"), py::arg("epsilon") = 0.0, py::arg("mode") = "linear",
        py::arg("aggregate") = "mean",
        "Depthwise oriented filtering; channel count must equal image height.");

    m.def(
        "latitude_adaptive_conv",
        [](const FloatArray& img, double epsilon, const std::string& mode,
           const std::string& aggregate) {
            const Grid g = grid_from_array(img);
            const auto banks =
                latitude_bank_stack(g.height(), epsilon, distortion_mode_from_string(mode));
            return array_from_grid(
                latitude_adaptive_conv(g, banks, aggregate_from_string(aggregate)));
        },
        py::arg("image"), py::arg("epsilon") = 0.0, py::arg("mode") = "linear",
        py::arg("aggregate") = "mean",
        "Single-plane filtering where each row uses its own latitude's bank.");

    m.def(
        "spherical_gradient",
        [](const FloatArray& depth, const std::string& axis) {
            return array_from_grid(
                spherical_gradient(grid_from_array(depth), axis_from_string(axis)));
        },
        py::arg("depth"), py::arg("axis") = "x",
        "Sobel response on gnomonic tangent patches, distortion-corrected.");

    m.def(
        "berhu_loss",
        [](const FloatArray& pred, const FloatArray& gt, double threshold) {
            return berhu_loss(grid_from_array(pred), grid_from_array(gt),
                              loss_config(threshold, 0.5));
        },
        py::arg("pred"), py::arg("gt"), py::arg("threshold") = 0.2);

    m.def(
        "spherical_gradient_loss",
        [](const FloatArray& pred, const FloatArray& gt) {
            return spherical_gradient_loss(grid_from_array(pred), grid_from_array(gt));
        },
        py::arg("pred"), py::arg("gt"));

    m.def(
        "total_loss",
        [](const FloatArray& pred, const FloatArray& gt, double threshold, double eta) {
            return total_loss(grid_from_array(pred), grid_from_array(gt),
                              loss_config(threshold, eta));
        },
        py::arg("pred"), py::arg("gt"), py::arg("threshold") = 0.2, py::arg("eta") = 0.5);

    m.def(
        "total_loss_grad",
        [](const FloatArray& pred, const FloatArray& gt, double threshold, double eta) {
            return array_from_grid(total_loss_grad(grid_from_array(pred),
                                                   grid_from_array(gt),
                                                   loss_config(threshold, eta)));
        },
        py::arg("pred"), py::arg("gt"), py::arg("threshold") = 0.2, py::arg("eta") = 0.5);

    m.def(
        "depth_metrics",
        [](const FloatArray& pred, const FloatArray& gt, const py::object& mask,
           bool median_scale) {
            const Grid p = grid_from_array(pred), g = grid_from_array(gt);
            if (mask.is_none()) {
                return report_dict(depth_metrics(p, g, nullptr, median_scale));
            }
            const ByteArray ma = ByteArray::ensure(mask);
            if (!ma || ma.ndim() != 2) {
                throw std::invalid_argument("mask must be a 2-d uint8 array");
            }
            std::vector<uint8_t> bytes(ma.data(), ma.data() + ma.size());
            return report_dict(depth_metrics(p, g, &bytes, median_scale));
        },
        py::arg("pred"), py::arg("gt"), py::arg("mask") = py::none(),
        py::arg("median_scale") = false,
        "abs_rel / sq_rel / rmse / delta1..3 (percent) over valid pixels.");

    m.def(
        "fit_depth",
        [](const FloatArray& init, const FloatArray& gt, int steps, double lr,
           double threshold, double eta) {
            const FitResult r = fit_depth(grid_from_array(init), grid_from_array(gt), steps,
                                          lr, loss_config(threshold, eta));
            return py::make_tuple(array_from_grid(r.depth), r.trace);
        },
        py::arg("init"), py::arg("gt"), py::arg("steps") = 200, py::arg("lr") = 0.1,
        py::arg("threshold") = 0.2, py::arg("eta") = 0.5,
        "Gradient descent on the total loss; returns (depth, loss trace).");

    m.def(
        "make_synthetic_pair",
        [](int height, int width, double amplitude) {
            const SyntheticPair p = make_synthetic_pair(height, width, amplitude);
            return py::make_tuple(array_from_grid(p.gt), array_from_grid(p.init));
        },
        py::arg("height") = 32, py::arg("width") = 64, py::arg("amplitude") = 0.004,
        "Smooth ground truth around 2 m and its constant-mean init.");

    m.def(
        "gradient_check",
        [](int height, int width, uint64_t seed, double step, double tol) {
            const GradCheckReport r = gradient_check(height, width, seed, step, tol);
            py::dict d;
            d["max_abs_err"] = r.max_abs_err;
            d["checked"] = r.checked;
            d["excluded"] = r.excluded;
            d["pass"] = r.pass;
            return d;
        },
        py::arg("height") = 16, py::arg("width") = 32, py::arg("seed") = 1,
        py::arg("step") = 1e-3, py::arg("tol") = 1e-4,
        "Central finite differences against the analytic loss gradient.");

    m.def(
        "init_weights_file",
        [](const std::string& path, int in_channels, int height, int out_channels,
           uint64_t seed, const std::string& scheme, double epsilon,
           const std::string& mode) {
            FusionConfig cfg;
            cfg.epsilon = static_cast<float>(epsilon);
            cfg.mode = distortion_mode_from_string(mode);
            save_weights(init_weights(in_channels, height, out_channels, cfg, seed,
                                      init_scheme_from_string(scheme)),
                         path);
        },
        py::arg("path"), py::arg("in_channels"), py::arg("height"), py::arg("out_channels"),
        py::arg("seed") = 0, py::arg("scheme") = "kaiming", py::arg("epsilon") = 0.0,
        py::arg("mode") = "linear", "Write reproducible fusion weights to a file.");

    m.def(
        "fuse",
        [](const FloatArray& a, const FloatArray& b, const std::string& weights_path,
           const std::string& aggregate) {
            const FusionWeights w = load_weights(weights_path);
            FusionConfig cfg;
            cfg.epsilon = w.epsilon;
            cfg.mode = w.mode;
            cfg.aggregate = aggregate_from_string(aggregate);
            return array_from_tensor(
                cs_ufm_forward(tensor_from_array(a), tensor_from_array(b), w, cfg));
        },
        py::arg("a"), py::arg("b"), py::arg("weights"), py::arg("aggregate") = "mean",
        "Channel/spatial fusion of two equally shaped feature tensors.");

    m.def(
        "read_pfm", [](const std::string& path) { return array_from_grid(read_pfm(path)); },
        py::arg("path"));
    m.def(
        "write_pfm",
        [](const std::string& path, const FloatArray& depth) {
            write_pfm(path, grid_from_array(depth));
        },
        py::arg("path"), py::arg("depth"));

    m.def(
        "read_tensor",
        [](const std::string& path) {
            const TensorData t = read_tensor(path);
            std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
            py::array_t<float> out(shape);
            std::memcpy(out.mutable_data(), t.data.data(), sizeof(float) * t.data.size());
            return out;
        },
        py::arg("path"));
    m.def(
        "write_tensor",
        [](const std::string& path, const FloatArray& array) {
            TensorData t;
            for (py::ssize_t i = 0; i < array.ndim(); ++i) {
                t.dims.push_back(static_cast<uint32_t>(array.shape(i)));
            }
            t.data.assign(array.data(), array.data() + array.size());
            write_tensor(path, t);
        },
        py::arg("path"), py::arg("array"));
}
