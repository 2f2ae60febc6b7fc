#pragma once

#include <filesystem>
#include <optional>

#include "scae/coder.hpp"
#include "scae/config.hpp"
#include "scae/metrics.hpp"

namespace scae {

// Shared implementations behind the CLI subcommands. Every command echoes
// the fully-resolved config into the output directory before doing work.

struct TrainOutputs {
    std::filesystem::path checkpoint;  // dense phase-1 model + coder table
    std::filesystem::path loss_log;
    std::filesystem::path manifest;
};
TrainOutputs run_train(const RunConfig& cfg);

struct SparsifyOutputs {
    std::filesystem::path checkpoint;  // phase-2 model + masks + coder table
    std::filesystem::path cost_csv;
    double sparsity_scoped;      // S over the projected scope
    double rm_scoped_pct;        // MACC reduction within the scope
    double rm_model_pct;         // MACC reduction over the whole model
    double mem_reduction_pct;    // nonzero-count accounting, scoped
    double mem_csr_pct;          // CSR accounting, scoped
};
SparsifyOutputs run_sparsify(const RunConfig& cfg, const std::filesystem::path& checkpoint);

struct EvalRow {
    std::string name;
    double bpp_coded, bpp_est, psnr, mssim;
    double mse;  // backing value for relative_loss comparisons
};
struct EvalOutputs {
    std::vector<EvalRow> rows;  // per image, then one AVERAGE row appended to the CSV
    EvalRow average;
    std::filesystem::path csv;
};
EvalOutputs run_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                     const std::filesystem::path& image_dir, bool save_recon = false,
                     bool save_scz = false);

struct CurvePoint {
    double knob;
    double sparsity, rm_pct, mem_pct;
    double bpp, psnr, mssim, relative_loss_db;
};
struct CurveOutputs {
    std::vector<CurvePoint> points;
    std::filesystem::path csv;
};
// Sweeps eta (knob = "eta") or quant_bits (knob = "bits").
CurveOutputs run_curve(const RunConfig& cfg, const std::string& knob,
                       const std::vector<double>& values,
                       const std::filesystem::path& image_dir);

struct CostOutputs {
    CostReport report;
    CostReport encoder_report;
    CostReport decoder_report;
    std::filesystem::path csv;
};
CostOutputs run_cost(const RunConfig& cfg, const std::filesystem::path& checkpoint);

// Evaluation helpers reused by tests and the curve sweep.
struct ImageEval {
    EvalRow row;
    Tensor reconstruction;  // cropped to the patch grid
    std::string container;  // SCZ1 bytes
};
ImageEval eval_image(const CaeModel& model, const Tensor& image,
                     const std::optional<FreqTable>& table);

// Number of worker threads for evaluation (SCAE_THREADS caps it).
int eval_thread_count(size_t images);

}  // namespace scae
