// scae: structured-sparsity training toolkit for compressive autoencoders.
//
// Subcommands: train, sparsify, eval, curve, cost. Every run echoes its
// fully-resolved configuration into the output directory. Exit codes:
// 0 success, 1 runtime failure, 2 usage/config error.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "scae/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string constraint;
    std::string scope;
    double eta = -1.0;
    int bits = 0;
    uint64_t seed = 0;
    bool seed_set = false;
    bool eta_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "key=value config file");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--constraint", f.constraint, "projection ball: l1, l11 or l1inf")
        ->check(CLI::IsMember({"l1", "l11", "l1inf"}));
    cmd->add_option("--scope", f.scope, "layers to sparsify: encoder, decoder or all")
        ->check(CLI::IsMember({"encoder", "decoder", "all"}));
    cmd->add_option("--eta", f.eta, "projection radius")->each([&](const std::string&) {
        f.eta_set = true;
    });
    cmd->add_option("--bits", f.bits, "quantizer bits")->check(CLI::Range(1, 16));
    cmd->add_option("--seed", f.seed, "run seed")->each([&](const std::string&) {
        f.seed_set = true;
    });
}

// Config file first, CLI flags win.
scae::RunConfig resolve(const CommonFlags& f) {
    scae::RunConfig cfg;
    if (!f.config_path.empty()) cfg = scae::RunConfig::from_file(f.config_path);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (!f.constraint.empty()) cfg.constraint = scae::constraint_from_string(f.constraint);
    if (!f.scope.empty()) cfg.scope = scae::scope_from_string(f.scope);
    if (f.eta_set) cfg.eta = f.eta;
    if (f.bits > 0) cfg.cae.quant_bits = f.bits;
    if (f.seed_set) cfg.seed = f.seed;
    cfg.validate();
    return cfg;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(std::stod(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structured-sparsity CAE toolkit"};
    app.require_subcommand(1);

    CommonFlags train_f, sparsify_f, eval_f, curve_f, cost_f;
    std::string sparsify_ckpt, eval_ckpt, eval_dir, cost_ckpt, curve_dir;
    std::string curve_etas, curve_bits;
    bool save_recon = false, save_scz = false;

    auto* train = app.add_subcommand("train", "first descent: train the dense model");
    add_common(train, train_f);

    auto* sparsify = app.add_subcommand("sparsify", "project, mask and run the second descent");
    add_common(sparsify, sparsify_f);
    sparsify->add_option("checkpoint", sparsify_ckpt, "phase-1 checkpoint")->required();

    auto* eval = app.add_subcommand("eval", "bitrate/quality metrics over an image directory");
    add_common(eval, eval_f);
    eval->add_option("checkpoint", eval_ckpt, "model checkpoint")->required();
    eval->add_option("images", eval_dir, "directory of .ppm/.pgm images")->required();
    eval->add_flag("--save-recon", save_recon, "write reconstructions to <out>/recon");
    eval->add_flag("--save-scz", save_scz, "write compressed containers to <out>/scz");

    auto* curve = app.add_subcommand("curve", "rate-distortion sweep over eta or quant_bits");
    add_common(curve, curve_f);
    curve->add_option("--etas", curve_etas, "comma-separated eta sweep");
    curve->add_option("--bits-sweep", curve_bits, "comma-separated quant_bits sweep");
    curve->add_option("--images", curve_dir, "evaluation image directory (default: data_dir)");

    auto* cost = app.add_subcommand("cost", "MACCs/memory report for a checkpoint");
    add_common(cost, cost_f);
    cost->add_option("checkpoint", cost_ckpt, "model checkpoint")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*train) {
            const auto cfg = resolve(train_f);
            const auto res = scae::run_train(cfg);
            std::printf("checkpoint: %s\nloss log:   %s\nmanifest:   %s\n",
                        res.checkpoint.c_str(), res.loss_log.c_str(), res.manifest.c_str());
        } else if (*sparsify) {
            const auto cfg = resolve(sparsify_f);
            const auto res = scae::run_sparsify(cfg, sparsify_ckpt);
            std::printf("checkpoint: %s\n", res.checkpoint.c_str());
            std::printf("S (scope):        %.4f\n", res.sparsity_scoped);
            std::printf("RM scoped:        %.2f%%\n", res.rm_scoped_pct);
            std::printf("RM whole model:   %.2f%%\n", res.rm_model_pct);
            std::printf("memory reduction: %.2f%% (nonzero-count), %.2f%% (CSR)\n",
                        res.mem_reduction_pct, res.mem_csr_pct);
        } else if (*eval) {
            const auto cfg = resolve(eval_f);
            const auto res = scae::run_eval(cfg, eval_ckpt, eval_dir, save_recon, save_scz);
            std::printf("%zu images -> %s\n", res.rows.size(), res.csv.c_str());
            std::printf("average: bpp=%.4f (est %.4f) psnr=%.2f mssim=%.4f\n",
                        res.average.bpp_coded, res.average.bpp_est, res.average.psnr,
                        res.average.mssim);
        } else if (*curve) {
            const auto cfg = resolve(curve_f);
            std::string knob;
            std::vector<double> values;
            if (!curve_etas.empty()) {
                knob = "eta";
                values = parse_list(curve_etas);
            } else if (!curve_bits.empty()) {
                knob = "bits";
                values = parse_list(curve_bits);
            } else {
                throw scae::ConfigError("curve needs --etas or --bits-sweep");
            }
            const std::string images = curve_dir.empty() ? cfg.data_dir : curve_dir;
            const auto res = scae::run_curve(cfg, knob, values, images);
            std::printf("%zu points -> %s\n", res.points.size(), res.csv.c_str());
        } else if (*cost) {
            const auto cfg = resolve(cost_f);
            const auto res = scae::run_cost(cfg, cost_ckpt);
            std::printf("%s", res.report.to_csv().c_str());
            std::printf("encoder RM: %.2f%%  decoder RM: %.2f%%  model RM: %.2f%%\n",
                        res.encoder_report.maccs_reduction_pct(),
                        res.decoder_report.maccs_reduction_pct(),
                        res.report.maccs_reduction_pct());
            std::printf("memory: %.2f%% (nonzero-count), %.2f%% (CSR)\n",
                        res.report.memory_reduction_pct(), res.report.memory_reduction_csr_pct());
        }
    } catch (const scae::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
