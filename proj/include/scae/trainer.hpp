#pragma once

#include <functional>
#include <limits>

#include "scae/cae.hpp"
#include "scae/image_io.hpp"
#include "scae/optimizer.hpp"
#include "scae/projections.hpp"

namespace scae {

enum class Constraint { L1, L11, L1Inf };

const char* to_string(Constraint c);
const char* to_string(Scope s);
Constraint constraint_from_string(const std::string& s);
Scope scope_from_string(const std::string& s);

struct EpochLog {
    int epoch;
    double entropy_bits;  // soft-entropy term, pre-lambda
    double distortion;
    double total;
};

struct StepInfo {
    int phase;  // 1 or 2
    int epoch;  // global epoch index
    int batch;
    const CaeModel* model;
    const std::vector<NamedTensor>* masks;  // null in phase 1
};

struct TrainOptions {
    int epochs = 50;
    int batch_size = 8;
    uint64_t seed = 1;
    AdamConfig adam;
    double lambda = -1.0;  // < 0 uses the model config's value
    std::function<void(const StepInfo&)> on_step;
};

struct SparsifyOptions : TrainOptions {
    Constraint constraint = Constraint::L11;
    double eta = std::numeric_limits<double>::infinity();
    Scope scope = Scope::Encoder;
    bool restart_from_init = true;  // strict Algorithm-2 reading
};

// Plain Adam training. Batch order is a pure function of (seed, epoch);
// epoch_base offsets the epoch index so a second phase draws fresh orders.
// A non-finite loss aborts with the epoch/batch position in the message.
std::vector<EpochLog> train_epochs(CaeModel& model, const PatchDataset& data,
                                   const TrainOptions& opt, int epoch_base = 0, int phase = 1,
                                   const std::vector<NamedTensor>* masks = nullptr);

// In-place projection of every in-scope conv weight onto the chosen ball.
void project_scope(CaeModel& model, Constraint constraint, double eta, Scope scope);

// Sparsity the scope would have after projecting at the given radius
// (weights are left untouched).
double projected_sparsity(const CaeModel& model, Constraint constraint, double eta, Scope scope);

// Exact-zero fraction of the scope's weights as they are now.
double scope_sparsity(const CaeModel& model, Scope scope);

struct DoubleDescentResult {
    std::vector<EpochLog> phase1, phase2;
    std::vector<NamedTensor> masks;  // "<weight>.mask" entries
    double sparsity_after_projection;
};

// Projection, mask extraction and the second descent, starting from a
// phase-1-trained model. w_init, when given, restarts phase-2 weights from
// it (masked positions zeroed); otherwise training continues from the
// projected weights. Masked positions are re-zeroed after every step.
DoubleDescentResult sparsify_and_retrain(CaeModel& model, const PatchDataset& data,
                                         const SparsifyOptions& opt,
                                         const std::vector<NamedTensor>* w_init,
                                         int epoch_base);

// Full Algorithm-2 run: first descent, projection, second descent.
DoubleDescentResult double_descent(CaeModel& model, const PatchDataset& data,
                                   const SparsifyOptions& opt);

}  // namespace scae
