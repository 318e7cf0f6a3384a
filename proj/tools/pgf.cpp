// Copyright Contributors to the panogabor project
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgf/conv.hpp"
#include "pgf/fusion.hpp"
#include "pgf/gabor.hpp"
#include "pgf/geometry.hpp"
#include "pgf/io.hpp"
#include "pgf/losses.hpp"
#include "pgf/metrics.hpp"
#include "pgf/parallel.hpp"
#include "pgf/tensor.hpp"

using nlohmann::json;

namespace {

pgf::Grid load_grid(const std::string& path) {
    if (path.ends_with(".pfm")) return pgf::read_pfm(path);
    if (path.ends_with(".pgtn")) return pgf::grid_from_data(pgf::read_tensor(path));
    throw std::runtime_error("unsupported depth input (want .pfm or .pgtn): " + path);
}

pgf::Tensor load_image_tensor(const std::string& path) {
    if (path.ends_with(".pgtn")) return pgf::tensor_from_data(pgf::read_tensor(path));
    if (path.ends_with(".pfm")) {
        const pgf::Grid g = pgf::read_pfm(path);
        pgf::Tensor t(1, g.height(), g.width());
        std::copy(g.data(), g.data() + g.size(), t.data());
        return t;
    }
    if (path.ends_with(".png")) {
        const pgf::ImageU8 img = pgf::read_png(path);
        pgf::Tensor t(img.channels, img.height, img.width);
        for (int c = 0; c < img.channels; ++c) {
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    t.at(c, y, x) = static_cast<float>(img.at(y, x, c));
                }
            }
        }
        return t;
    }
    throw std::runtime_error("unsupported image input (want .pgtn, .pfm or .png): " + path);
}

pgf::Grid channel_grid(const pgf::Tensor& t, int c) {
    pgf::Grid g(t.height(), t.width());
    std::copy(t.channel(c).begin(), t.channel(c).end(), g.data());
    return g;
}

void apply_thread_env() {
    const char* env = std::getenv("PGF_THREADS");
    if (!env) return;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end && *end == '\0' && n >= 1 && n <= 1024) {
        pgf::set_max_threads(static_cast<int>(n));
    }
}

json metric_json(const pgf::MetricReport& r) {
    return json{{"abs_rel", r.abs_rel}, {"sq_rel", r.sq_rel},
                {"rmse", r.rmse},       {"delta1", r.delta1},
                {"delta2", r.delta2},   {"delta3", r.delta3},
                {"valid_pixels", r.valid_pixels}};
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_env();

    CLI::App app{"PanoGabor spherical depth toolkit"};
    app.require_subcommand(1);

    // bank
    auto* bank = app.add_subcommand("bank", "Generate a latitude-indexed filter bank stack");
    int bank_height = 1;
    double bank_eps = 0.0;
    std::string bank_mode = "linear", bank_out, bank_png;
    int bank_scale = 16;
    bank->add_option("--height", bank_height, "number of latitude rows")
        ->required()
        ->check(CLI::PositiveNumber);
    bank->add_option("--epsilon", bank_eps, "scale index (phase = pi * epsilon)");
    bank->add_option("--mode", bank_mode, "distortion mode")
        ->check(CLI::IsMember({"linear", "cosine", "inverse_cosine"}));
    bank->add_option("--out", bank_out, "raw kernel dump (.pgtn, dims H x 8 x 3 x 3)");
    bank->add_option("--png", bank_png, "gallery image path (.png)");
    bank->add_option("--scale", bank_scale, "gallery upscale factor")
        ->check(CLI::PositiveNumber);

    // project
    auto* project = app.add_subcommand("project", "Reproject between ERP and cubemap");
    std::string proj_in, proj_to, proj_out, proj_png;
    double proj_yaw_deg = 0.0;
    int proj_face = 0, proj_height = 0;
    project->add_option("--in", proj_in, "input (.pgtn/.pfm/.png ERP, or .pgtn cube)")
        ->required();
    project->add_option("--to", proj_to, "target layout")
        ->required()
        ->check(CLI::IsMember({"cube", "erp"}));
    project->add_option("--yaw", proj_yaw_deg, "yaw offset in degrees");
    project->add_option("--face-size", proj_face, "cube face pixels (default width/4)");
    project->add_option("--height", proj_height, "ERP rows (default 2 * face size)");
    project->add_option("--out", proj_out, "output tensor (.pgtn)")->required();
    project->add_option("--png", proj_png, "visualization path (.png)");

    // convolve
    auto* convolve = app.add_subcommand("convolve", "Filter an ERP image with the bank stack");
    std::string conv_in, conv_out, conv_png, conv_mode = "linear", conv_agg = "mean";
    double conv_eps = 0.0;
    convolve->add_option("--in", conv_in, "ERP input (.pgtn/.pfm/.png)")->required();
    convolve->add_option("--epsilon", conv_eps, "scale index");
    convolve->add_option("--mode", conv_mode, "distortion mode")
        ->check(CLI::IsMember({"linear", "cosine", "inverse_cosine"}));
    convolve->add_option("--aggregate", conv_agg, "orientation merge")
        ->check(CLI::IsMember({"mean", "max", "sum"}));
    convolve->add_option("--out", conv_out, "response tensor (.pgtn)")->required();
    convolve->add_option("--png", conv_png, "visualization of channel 0 (.png)");

    // gradient
    auto* gradient = app.add_subcommand("gradient", "Spherical Sobel gradients of a depth map");
    std::string grad_in, grad_out_x, grad_out_y, grad_png_x, grad_png_y;
    gradient->add_option("--in", grad_in, "depth map (.pfm or .pgtn)")->required();
    gradient->add_option("--out-x", grad_out_x, "horizontal gradient (.pfm)");
    gradient->add_option("--out-y", grad_out_y, "vertical gradient (.pfm)");
    gradient->add_option("--png-x", grad_png_x, "colorized horizontal gradient (.png)");
    gradient->add_option("--png-y", grad_png_y, "colorized vertical gradient (.png)");

    // fuse
    auto* fuse = app.add_subcommand("fuse", "Fuse two feature tensors");
    std::string fuse_a, fuse_b, fuse_w, fuse_out, fuse_agg = "mean";
    fuse->add_option("--a", fuse_a, "first tensor (.pgtn)")->required();
    fuse->add_option("--b", fuse_b, "second tensor (.pgtn)")->required();
    fuse->add_option("--weights", fuse_w, "weights file (.pgfw)")->required();
    fuse->add_option("--aggregate", fuse_agg, "orientation merge")
        ->check(CLI::IsMember({"mean", "max", "sum"}));
    fuse->add_option("--out", fuse_out, "fused tensor (.pgtn)")->required();

    // init-weights
    auto* initw = app.add_subcommand("init-weights", "Create a reproducible weights file");
    int iw_cin = 0, iw_height = 0, iw_cout = 0;
    uint64_t iw_seed = 0;
    std::string iw_scheme = "kaiming", iw_mode = "linear", iw_out;
    double iw_eps = 0.0;
    initw->add_option("--cin", iw_cin, "channels of each input")->required()
        ->check(CLI::PositiveNumber);
    initw->add_option("--height", iw_height, "feature height")->required()
        ->check(CLI::PositiveNumber);
    initw->add_option("--cout", iw_cout, "output channels")->required()
        ->check(CLI::PositiveNumber);
    initw->add_option("--seed", iw_seed, "RNG seed");
    initw->add_option("--scheme", iw_scheme, "init scheme")
        ->check(CLI::IsMember({"kaiming", "constant"}));
    initw->add_option("--epsilon", iw_eps, "bank scale index");
    initw->add_option("--mode", iw_mode, "distortion mode")
        ->check(CLI::IsMember({"linear", "cosine", "inverse_cosine"}));
    initw->add_option("--out", iw_out, "weights file (.pgfw)")->required();

    // loss
    auto* loss = app.add_subcommand("loss", "Loss values for a prediction");
    std::string loss_pred, loss_gt;
    double loss_theta = 0.2, loss_eta = 0.5;
    loss->add_option("--pred", loss_pred, "prediction (.pfm)")->required();
    loss->add_option("--gt", loss_gt, "ground truth (.pfm)")->required();
    loss->add_option("--threshold", loss_theta, "reverse-Huber branch point");
    loss->add_option("--eta", loss_eta, "gradient-term weight");

    // eval
    auto* eval = app.add_subcommand("eval", "Depth evaluation metrics");
    std::string eval_pred, eval_gt, eval_mask;
    bool eval_median = false;
    eval->add_option("--pred", eval_pred, "prediction (.pfm)")->required();
    eval->add_option("--gt", eval_gt, "ground truth (.pfm)")->required();
    eval->add_option("--mask", eval_mask, "validity mask (.png, nonzero = keep)");
    eval->add_flag("--median-scale", eval_median, "rescale pred by median ratio first");

    // fit
    auto* fit = app.add_subcommand("fit", "Gradient-descent fit of a depth map");
    std::string fit_gt, fit_init, fit_out, fit_trace, fit_png, fit_png16;
    int fit_steps = 200;
    double fit_lr = 0.1, fit_theta = 0.2, fit_eta = 0.5;
    fit->add_option("--gt", fit_gt, "ground truth (.pfm)")->required();
    fit->add_option("--init", fit_init, "initial map (.pfm); default constant mean(gt)");
    fit->add_option("--steps", fit_steps, "descent steps")->check(CLI::PositiveNumber);
    fit->add_option("--lr", fit_lr, "learning rate");
    fit->add_option("--threshold", fit_theta, "reverse-Huber branch point");
    fit->add_option("--eta", fit_eta, "gradient-term weight");
    fit->add_option("--out", fit_out, "fitted map (.pfm)");
    fit->add_option("--trace", fit_trace, "per-step loss CSV");
    fit->add_option("--png", fit_png, "colorized fitted map (.png)");
    fit->add_option("--png16", fit_png16, "16-bit millimeter depth (.png)");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient gate");
    int gc_height = 16, gc_width = 32;
    uint64_t gc_seed = 1;
    double gc_h = 1e-3, gc_tol = 1e-4;
    gradcheck->add_option("--height", gc_height, "rows")->check(CLI::PositiveNumber);
    gradcheck->add_option("--width", gc_width, "columns")->check(CLI::PositiveNumber);
    gradcheck->add_option("--seed", gc_seed, "RNG seed");
    gradcheck->add_option("--step", gc_h, "finite-difference step");
    gradcheck->add_option("--tol", gc_tol, "max allowed abs error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (app.got_subcommand(bank)) {
            const auto mode = pgf::distortion_mode_from_string(bank_mode);
            const auto banks = pgf::latitude_bank_stack(bank_height, bank_eps, mode);
            if (!bank_out.empty()) {
                pgf::TensorData dump;
                dump.dims = {static_cast<uint32_t>(banks.size()), 8, 3, 3};
                dump.data.reserve(banks.size() * 72);
                for (const auto& b : banks) {
                    for (const auto& k : b.kernels) {
                        for (double v : k) dump.data.push_back(static_cast<float>(v));
                    }
                }
                pgf::write_tensor(bank_out, dump);
            }
            if (!bank_png.empty()) {
                pgf::write_png(bank_png, pgf::export_bank_image(banks, bank_scale));
            }
            json rows = json::array();
            for (const auto& b : banks) {
                rows.push_back(json{{"coefficient", b.coefficient},
                                    {"frequency", b.params[0].frequency},
                                    {"sigma", b.params[0].sigma},
                                    {"psi", b.params[0].psi}});
            }
            json out{{"height", bank_height}, {"epsilon", bank_eps},
                     {"mode", bank_mode},     {"rows", rows}};
            std::cout << out.dump(2) << std::endl;
        } else if (app.got_subcommand(project)) {
            const double yaw = proj_yaw_deg * std::numbers::pi / 180.0;
            if (proj_to == "cube") {
                const pgf::Tensor erp = load_image_tensor(proj_in);
                const int face = proj_face > 0 ? proj_face : erp.width() / 4;
                const pgf::CubemapFaces cube = pgf::erp_to_cubemap(erp, face, yaw);
                pgf::TensorData dump;
                dump.dims = {6, static_cast<uint32_t>(cube.channels()),
                             static_cast<uint32_t>(face), static_cast<uint32_t>(face)};
                for (const auto& f : cube.faces) {
                    dump.data.insert(dump.data.end(), f.data(), f.data() + f.size());
                }
                pgf::write_tensor(proj_out, dump);
                if (!proj_png.empty()) {
                    pgf::Grid strip(face, 6 * face);
                    for (int fi = 0; fi < 6; ++fi) {
                        for (int y = 0; y < face; ++y) {
                            for (int x = 0; x < face; ++x) {
                                strip.at(y, fi * face + x) = cube.faces[fi].at(0, y, x);
                            }
                        }
                    }
                    pgf::write_png(proj_png, pgf::colorize(strip));
                }
                json out{{"faces", 6},      {"channels", cube.channels()},
                         {"face_size", face}, {"yaw_degrees", proj_yaw_deg}};
                std::cout << out.dump(2) << std::endl;
            } else {
                const pgf::TensorData data = pgf::read_tensor(proj_in);
                if (data.dims.size() != 4 || data.dims[0] != 6 || data.dims[2] != data.dims[3]) {
                    throw std::runtime_error("cube input must have dims 6 x C x S x S");
                }
                pgf::CubemapFaces cube;
                cube.face_size = static_cast<int>(data.dims[2]);
                cube.yaw_offset = yaw;
                const size_t face_elems =
                    static_cast<size_t>(data.dims[1]) * data.dims[2] * data.dims[3];
                for (int fi = 0; fi < 6; ++fi) {
                    cube.faces[fi] = pgf::Tensor(static_cast<int>(data.dims[1]),
                                                 cube.face_size, cube.face_size);
                    std::copy_n(data.data.data() + fi * face_elems, face_elems,
                                cube.faces[fi].data());
                }
                const int height = proj_height > 0 ? proj_height : 2 * cube.face_size;
                const pgf::Tensor erp = pgf::cubemap_to_erp(cube, height, 2 * height);
                pgf::write_tensor(proj_out, pgf::to_tensor_data(erp));
                if (!proj_png.empty()) {
                    pgf::write_png(proj_png, pgf::colorize(channel_grid(erp, 0)));
                }
                json out{{"channels", erp.channels()}, {"height", height},
                         {"width", 2 * height},        {"yaw_degrees", proj_yaw_deg}};
                std::cout << out.dump(2) << std::endl;
            }
        } else if (app.got_subcommand(convolve)) {
            const pgf::Tensor x = load_image_tensor(conv_in);
            const auto mode = pgf::distortion_mode_from_string(conv_mode);
            const auto agg = pgf::aggregate_from_string(conv_agg);
            const auto banks = pgf::latitude_bank_stack(x.height(), conv_eps, mode);
            pgf::Tensor out(x.channels(), x.height(), x.width());
            for (int c = 0; c < x.channels(); ++c) {
                const pgf::Grid resp = pgf::latitude_adaptive_conv(channel_grid(x, c), banks, agg);
                std::copy(resp.data(), resp.data() + resp.size(), out.channel(c).begin());
            }
            pgf::write_tensor(conv_out, pgf::to_tensor_data(out));
            if (!conv_png.empty()) {
                pgf::write_png(conv_png, pgf::colorize(channel_grid(out, 0)));
            }
            json summary{{"channels", out.channels()}, {"height", out.height()},
                         {"width", out.width()},       {"aggregate", conv_agg},
                         {"mode", conv_mode},          {"epsilon", conv_eps}};
            std::cout << summary.dump(2) << std::endl;
        } else if (app.got_subcommand(gradient)) {
            const pgf::Grid depth = load_grid(grad_in);
            const pgf::Grid gx = pgf::spherical_gradient(depth, pgf::Axis::X);
            const pgf::Grid gy = pgf::spherical_gradient(depth, pgf::Axis::Y);
            if (!grad_out_x.empty()) pgf::write_pfm(grad_out_x, gx);
            if (!grad_out_y.empty()) pgf::write_pfm(grad_out_y, gy);
            if (!grad_png_x.empty()) pgf::write_png(grad_png_x, pgf::colorize(gx));
            if (!grad_png_y.empty()) pgf::write_png(grad_png_y, pgf::colorize(gy));
            json out{{"height", depth.height()}, {"width", depth.width()}};
            std::cout << out.dump(2) << std::endl;
        } else if (app.got_subcommand(fuse)) {
            const pgf::Tensor a = pgf::tensor_from_data(pgf::read_tensor(fuse_a));
            const pgf::Tensor b = pgf::tensor_from_data(pgf::read_tensor(fuse_b));
            const pgf::FusionWeights w = pgf::load_weights(fuse_w);
            pgf::FusionConfig cfg;
            cfg.aggregate = pgf::aggregate_from_string(fuse_agg);
            cfg.epsilon = w.epsilon;
            cfg.mode = w.mode;
            cfg.out_channels = w.output.out_channels;
            const pgf::Tensor fused = pgf::cs_ufm_forward(a, b, w, cfg);
            pgf::write_tensor(fuse_out, pgf::to_tensor_data(fused));
            json out{{"channels", fused.channels()}, {"height", fused.height()},
                     {"width", fused.width()},       {"aggregate", fuse_agg}};
            std::cout << out.dump(2) << std::endl;
        } else if (app.got_subcommand(initw)) {
            pgf::FusionConfig cfg;
            cfg.epsilon = static_cast<float>(iw_eps);
            cfg.mode = pgf::distortion_mode_from_string(iw_mode);
            cfg.out_channels = iw_cout;
            const pgf::FusionWeights w =
                pgf::init_weights(iw_cin, iw_height, iw_cout, cfg, iw_seed,
                                  pgf::init_scheme_from_string(iw_scheme));
            pgf::save_weights(w, iw_out);
            json out{{"in_channels", iw_cin}, {"height", iw_height},
                     {"out_channels", iw_cout}, {"seed", iw_seed},
                     {"scheme", iw_scheme}};
            std::cout << out.dump(2) << std::endl;
        } else if (app.got_subcommand(loss)) {
            const pgf::Grid pred = load_grid(loss_pred);
            const pgf::Grid gt = load_grid(loss_gt);
            pgf::LossConfig cfg;
            cfg.threshold = loss_theta;
            cfg.delta = loss_theta;
            cfg.eta = loss_eta;
            const double b = pgf::berhu_loss(pred, gt, cfg);
            const double g = pgf::spherical_gradient_loss(pred, gt);
            json out{{"berhu", b},
                     {"spherical_gradient", g},
                     {"total", b + cfg.eta * g},
                     {"threshold", cfg.threshold},
                     {"eta", cfg.eta}};
            std::cout << out.dump(2) << std::endl;
        } else if (app.got_subcommand(eval)) {
            const pgf::Grid pred = load_grid(eval_pred);
            const pgf::Grid gt = load_grid(eval_gt);
            std::vector<uint8_t> mask;
            if (!eval_mask.empty()) {
                const pgf::ImageU8 img = pgf::read_png(eval_mask);
                if (img.channels != 1) {
                    throw std::runtime_error("mask must be a grayscale PNG");
                }
                mask.assign(img.data.begin(), img.data.end());
            }
            const pgf::MetricReport r =
                pgf::depth_metrics(pred, gt, mask.empty() ? nullptr : &mask, eval_median);
            std::cout << metric_json(r).dump(2) << std::endl;
        } else if (app.got_subcommand(fit)) {
            const pgf::Grid gt = load_grid(fit_gt);
            pgf::Grid init;
            if (!fit_init.empty()) {
                init = load_grid(fit_init);
            } else {
                double sum = 0.0;
                for (size_t i = 0; i < gt.size(); ++i) sum += gt.data()[i];
                init = pgf::Grid(gt.height(), gt.width(),
                                 static_cast<float>(sum / static_cast<double>(gt.size())));
            }
            pgf::LossConfig cfg;
            cfg.threshold = fit_theta;
            cfg.delta = fit_theta;
            cfg.eta = fit_eta;
            const pgf::FitResult result = pgf::fit_depth(init, gt, fit_steps, fit_lr, cfg);
            if (!fit_out.empty()) pgf::write_pfm(fit_out, result.depth);
            if (!fit_png.empty()) pgf::write_png(fit_png, pgf::colorize(result.depth));
            if (!fit_png16.empty()) {
                pgf::write_png16(fit_png16, pgf::depth_to_millimeters(result.depth));
            }
            if (!fit_trace.empty()) {
                std::ofstream csv(fit_trace);
                if (!csv) throw std::runtime_error("cannot open " + fit_trace);
                csv << "step,loss\n";
                for (size_t i = 0; i < result.trace.size(); ++i) {
                    csv << i << "," << json(result.trace[i]).dump() << "\n";
                }
            }
            json out{{"steps", fit_steps},
                     {"lr", fit_lr},
                     {"initial_loss", result.trace.front()},
                     {"final_loss", result.trace.back()}};
            std::cout << out.dump(2) << std::endl;
        } else if (app.got_subcommand(gradcheck)) {
            const pgf::GradCheckReport r =
                pgf::gradient_check(gc_height, gc_width, gc_seed, gc_h, gc_tol);
            json out{{"max_abs_err", r.max_abs_err},
                     {"checked", r.checked},
                     {"excluded", r.excluded},
                     {"pass", r.pass}};
            std::cout << out.dump(2) << std::endl;
            return r.pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << std::endl;
        return 1;
    }
    return 0;
}
