#include "scae/trainer.hpp"

#include <cmath>

namespace scae {

const char* to_string(Constraint c) {
    switch (c) {
        case Constraint::L1: return "l1";
        case Constraint::L11: return "l11";
        case Constraint::L1Inf: return "l1inf";
    }
    return "?";
}

const char* to_string(Scope s) {
    switch (s) {
        case Scope::Encoder: return "encoder";
        case Scope::Decoder: return "decoder";
        case Scope::All: return "all";
    }
    return "?";
}

Constraint constraint_from_string(const std::string& s) {
    if (s == "l1") return Constraint::L1;
    if (s == "l11") return Constraint::L11;
    if (s == "l1inf") return Constraint::L1Inf;
    throw ConfigError("unknown constraint '" + s + "' (expected l1, l11 or l1inf)");
}

Scope scope_from_string(const std::string& s) {
    if (s == "encoder") return Scope::Encoder;
    if (s == "decoder") return Scope::Decoder;
    if (s == "all") return Scope::All;
    throw ConfigError("unknown scope '" + s + "' (expected encoder, decoder or all)");
}

std::vector<EpochLog> train_epochs(CaeModel& model, const PatchDataset& data,
                                   const TrainOptions& opt, int epoch_base, int phase,
                                   const std::vector<NamedTensor>* masks) {
    if (opt.epochs < 1) throw ContractError("train_epochs requires epochs >= 1");
    if (data.patch_count() == 0) throw ContractError("empty dataset");
    const double lambda = opt.lambda < 0.0 ? model.config().lambda_entropy : opt.lambda;
    auto& params = model.parameters();

    // masked weights enter each phase already zeroed
    if (masks)
        for (auto& [name, w] : params)
            if (checkpoint_has(*masks, name + ".mask"))
                apply_mask(w, checkpoint_get(*masks, name + ".mask"));

    Adam adam(opt.adam);
    Graph graph;
    std::vector<EpochLog> logs;
    for (int e = 0; e < opt.epochs; ++e) {
        const int epoch = epoch_base + e;
        const auto order = data.epoch_order(epoch);
        double ent_sum = 0.0, dist_sum = 0.0, total_sum = 0.0;
        int batches = 0;
        for (size_t first = 0; first < order.size(); first += size_t(opt.batch_size)) {
            const size_t count = std::min(size_t(opt.batch_size), order.size() - first);
            const Tensor batch = data.make_batch(order, first, count);
            try {
                graph.clear();
                for (auto& [name, p] : params) p.zero_grad();

                auto parts = model.forward(graph, batch);
                Tensor distortion =
                    huber_loss(graph, parts.xhat, batch, float(model.config().huber_beta));
                Tensor loss = distortion;
                double ent_bits = 0.0;
                if (lambda > 0.0) {
                    Tensor ent = soft_entropy(graph, parts.z, model.config().levels());
                    ent_bits = ent.item();
                    loss = add(graph, mul_scalar(graph, ent, float(lambda)), distortion);
                }
                if (!std::isfinite(loss.item())) throw NumericError("non-finite loss");
                graph.backward(loss);

                if (masks)
                    for (auto& [name, w] : params)
                        if (checkpoint_has(*masks, name + ".mask"))
                            masked_grad(w, checkpoint_get(*masks, name + ".mask"));
                adam.step(params);
                if (masks)
                    for (auto& [name, w] : params)
                        if (checkpoint_has(*masks, name + ".mask"))
                            apply_mask(w, checkpoint_get(*masks, name + ".mask"));

                ent_sum += ent_bits;
                dist_sum += distortion.item();
                total_sum += loss.item();
                ++batches;
            } catch (const NumericError& err) {
                throw NumericError("epoch " + std::to_string(epoch) + " batch " +
                                   std::to_string(batches) + ": " + err.what());
            }
            if (opt.on_step) opt.on_step(StepInfo{phase, epoch, batches - 1, &model, masks});
        }
        logs.push_back(EpochLog{epoch, ent_sum / batches, dist_sum / batches, total_sum / batches});
    }
    graph.clear();
    return logs;
}

void project_scope(CaeModel& model, Constraint constraint, double eta, Scope scope) {
    for (auto& [name, w] : model.scoped_weights(scope)) {
        WeightView view = flatten_weight(w);
        switch (constraint) {
            case Constraint::L1: {
                auto flat = view.tensor().data();
                proj_l1(flat, Radius(eta));
                break;
            }
            case Constraint::L11: proj_l11(view, Radius(eta)); break;
            case Constraint::L1Inf: proj_l1inf(view, Radius(eta)); break;
        }
    }
}

double projected_sparsity(const CaeModel& model, Constraint constraint, double eta, Scope scope) {
    std::vector<Tensor> clones;
    for (const auto& [name, w] : model.scoped_weights(scope)) {
        Tensor c = w.clone();
        // clone() keeps the shape, so the flattened view is identical
        WeightView view = flatten_weight(c);
        switch (constraint) {
            case Constraint::L1: {
                auto flat = view.tensor().data();
                proj_l1(flat, Radius(eta));
                break;
            }
            case Constraint::L11: proj_l11(view, Radius(eta)); break;
            case Constraint::L1Inf: proj_l1inf(view, Radius(eta)); break;
        }
        clones.push_back(view.tensor());
    }
    return sparsity(clones);
}

double scope_sparsity(const CaeModel& model, Scope scope) {
    std::vector<Tensor> ws;
    for (const auto& [name, w] : model.scoped_weights(scope)) ws.push_back(w);
    return sparsity(ws);
}

DoubleDescentResult sparsify_and_retrain(CaeModel& model, const PatchDataset& data,
                                         const SparsifyOptions& opt,
                                         const std::vector<NamedTensor>* w_init, int epoch_base) {
    DoubleDescentResult result;

    project_scope(model, opt.constraint, opt.eta, opt.scope);
    result.sparsity_after_projection = scope_sparsity(model, opt.scope);

    for (const auto& [name, w] : model.scoped_weights(opt.scope))
        result.masks.emplace_back(name + ".mask", mask_from_weights(w));

    if (w_init) model.restore(*w_init);
    // masked positions are zeroed here and re-zeroed after every step
    for (auto& [name, w] : model.parameters())
        if (checkpoint_has(result.masks, name + ".mask"))
            apply_mask(w, checkpoint_get(result.masks, name + ".mask"));

    result.phase2 = train_epochs(model, data, opt, epoch_base, /*phase=*/2, &result.masks);
    return result;
}

DoubleDescentResult double_descent(CaeModel& model, const PatchDataset& data,
                                   const SparsifyOptions& opt) {
    const auto w_init = model.snapshot();
    auto phase1 = train_epochs(model, data, opt, /*epoch_base=*/0, /*phase=*/1);
    DoubleDescentResult result = sparsify_and_retrain(
        model, data, opt, opt.restart_from_init ? &w_init : nullptr, /*epoch_base=*/opt.epochs);
    result.phase1 = std::move(phase1);
    return result;
}

}  // namespace scae
