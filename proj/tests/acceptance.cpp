// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit code = number of failed criteria.
//
// Heavy training criteria (4, 5, 6, 7, 10) run on the bundled toy corpus
// with the default desk-scale CAE. SCAE_DATA_DIR overrides the corpus path,
// SCAE_CLI overrides the scae binary used by the determinism criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "oracle_helpers.hpp"
#include "scae/runner.hpp"

using namespace scae;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string data_dir() {
    if (const char* env = std::getenv("SCAE_DATA_DIR")) return env;
    return "data/toy";
}

// ---------------------------------------------------------------- 1 & 2

void criterion_1_projection_optimality() {
    const double t0 = now_s();
    SplitMix64 rng(0xACCE07);
    double worst_dist = 0.0, worst_feas = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const size_t l = 1 + rng.below(5);
        const size_t d = 1 + rng.below(5);
        std::vector<float> flat(l * d);
        for (auto& x : flat) x = float(rng.normal());
        const double eta = rng.uniform(0.05, 0.5 * double(l * d));
        const std::vector<double> input(flat.begin(), flat.end());

        auto l2 = [](std::span<const float> a, const std::vector<double>& b) {
            double s = 0.0;
            for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
            return std::sqrt(s);
        };

        {
            auto mine = proj_l1(flat, Radius(eta));
            worst_dist = std::max(worst_dist, l2(mine, oracle::proj_l1_bisect(input, eta)));
            double norm = 0.0;
            for (float x : mine) norm += std::abs(double(x));
            worst_feas = std::max(worst_feas, (norm - eta) / std::max(1.0, eta));
        }
        {
            WeightView v(Tensor::from_data({int(l), 1, 1, int(d)}, flat), l, d);
            proj_l11(v, Radius(eta));
            worst_dist = std::max(
                worst_dist, l2(v.tensor().data(), oracle::proj_l11_bisect(input, l, d, eta)));
            double norm = 0.0;
            for (float x : v.tensor().data()) norm += std::abs(double(x));
            worst_feas = std::max(worst_feas, (norm - eta) / std::max(1.0, eta));
        }
        {
            WeightView v(Tensor::from_data({int(l), 1, 1, int(d)}, flat), l, d);
            proj_l1inf(v, Radius(eta));
            worst_dist = std::max(
                worst_dist, l2(v.tensor().data(), oracle::proj_l1inf_bisect(input, l, d, eta)));
            double norm = 0.0;
            for (size_t i = 0; i < l; ++i) {
                double m = 0.0;
                for (float x : v.row(i)) m = std::max(m, std::abs(double(x)));
                norm += m;
            }
            worst_feas = std::max(worst_feas, (norm - eta) / std::max(1.0, eta));
        }
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "projection optimality: max oracle distance %.2e (<=1e-5), max constraint "
                  "excess %.2e (<=1e-6), %.1fs",
                  worst_dist, worst_feas, now_s() - t0);
    report(1, worst_dist <= 1e-5 && worst_feas <= 1e-6, buf);
}

void criterion_2_algorithm1_trace() {
    WeightView v(Tensor::from_data({2, 1, 1, 2}, {3.0f, 1.0f, 1.0f, 0.0f}), 2, 2);
    proj_l11(v, Radius(2.0));
    const bool pass = v.row(0)[0] == 2.0f && v.row(0)[1] == 0.0f && v.row(1)[0] == 0.0f &&
                      v.row(1)[1] == 0.0f;
    report(2, pass, "two-stage trace [[3,1],[1,0]] at eta=2 -> [[2,0],[0,0]] exactly");
}

// ------------------------------------------------------------------- 3

double fd_case(Tensor& input, Graph& g, const std::function<Tensor()>& fwd, double h,
               bool richardson = false) {
    g.clear();
    Tensor loss = fwd();
    input.zero_grad();
    g.backward(loss);
    std::vector<double> analytic, fd;
    auto gr = input.grad();
    for (float v : gr) analytic.push_back(v);
    auto value = [&]() {
        g.clear();
        return double(fwd().item());
    };
    for (size_t i = 0; i < analytic.size(); ++i)
        fd.push_back(richardson ? oracle::fd_grad_rich(input, i, h, value)
                                : oracle::fd_grad(input, i, h, value));
    g.clear();
    input.zero_grad();
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < fd.size(); ++i) {
        num += (analytic[i] - fd[i]) * (analytic[i] - fd[i]);
        den += fd[i] * fd[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-8);
}

void criterion_3_gradient_correctness() {
    const double t0 = now_s();
    SplitMix64 rng(0xFD);
    std::map<std::string, double> worst;

    auto weighted = [](Graph& g, const Tensor& out, const Tensor& coeff) {
        return sum(g, mul(g, out, coeff));
    };

    for (int c = 0; c < 100; ++c) {
        {  // conv2d (input, weight and bias all checked)
            Graph g;
            const int cin = 1 + int(rng.below(2)), cout = 1 + int(rng.below(2));
            const int k = 1 + int(rng.below(3));
            const int h = k + int(rng.below(3)), w = k + int(rng.below(3));
            Tensor x = oracle::random_tensor({1, cin, h, w}, rng, 1.0, true);
            Tensor wt = oracle::random_tensor({cout, cin, k, k}, rng, 1.0, true);
            Tensor b = oracle::random_tensor({cout}, rng, 1.0, true);
            Tensor coeff;
            auto fwd = [&]() {
                Tensor out = conv2d(g, x, wt, b, 1, 0);
                if (!coeff.defined()) coeff = oracle::random_tensor(out.shape(), rng);
                return weighted(g, out, coeff);
            };
            worst["conv2d"] = std::max(worst["conv2d"], fd_case(x, g, fwd, 5e-3));
            worst["conv2d"] = std::max(worst["conv2d"], fd_case(wt, g, fwd, 5e-3));
            worst["conv2d"] = std::max(worst["conv2d"], fd_case(b, g, fwd, 5e-3));
        }
        {  // conv_transpose2d
            Graph g;
            const int cin = 1 + int(rng.below(2)), cout = 1 + int(rng.below(2));
            const int k = 1 + int(rng.below(3));
            const int stride = 1 + int(rng.below(2));
            Tensor x = oracle::random_tensor({1, cin, 2, 2}, rng, 1.0, true);
            Tensor wt = oracle::random_tensor({cin, cout, k, k}, rng, 1.0, true);
            Tensor b = oracle::random_tensor({cout}, rng, 1.0, true);
            Tensor coeff;
            auto fwd = [&]() {
                Tensor out = conv_transpose2d(g, x, wt, b, stride, 0, 0);
                if (!coeff.defined()) coeff = oracle::random_tensor(out.shape(), rng);
                return weighted(g, out, coeff);
            };
            worst["conv_transpose2d"] =
                std::max(worst["conv_transpose2d"], fd_case(x, g, fwd, 5e-3));
            worst["conv_transpose2d"] =
                std::max(worst["conv_transpose2d"], fd_case(wt, g, fwd, 5e-3));
        }
        {  // elementwise ops and the losses
            Graph g;
            const int n = 2 + int(rng.below(6));
            Tensor x = oracle::random_tensor({n}, rng, 1.0, true);
            {
                auto d = x.data();
                for (auto& v : d)
                    if (std::abs(v) < 0.05f) v = v < 0 ? v - 0.1f : v + 0.1f;
            }
            Tensor coeff = oracle::random_tensor({n}, rng);
            Tensor other = oracle::random_tensor({n}, rng);

            auto f1 = [&]() { return weighted(g, leaky_relu(g, x, 0.1f), coeff); };
            worst["leaky_relu"] = std::max(worst["leaky_relu"], fd_case(x, g, f1, 1e-3));
            auto f2 = [&]() { return weighted(g, sigmoid(g, x), coeff); };
            worst["sigmoid"] = std::max(worst["sigmoid"], fd_case(x, g, f2, 5e-3));
            auto f3 = [&]() { return weighted(g, mul(g, x, other), coeff); };
            worst["mul"] = std::max(worst["mul"], fd_case(x, g, f3, 5e-3));
            auto f4 = [&]() { return weighted(g, add(g, x, other), coeff); };
            worst["add"] = std::max(worst["add"], fd_case(x, g, f4, 5e-3));
            auto f5 = [&]() { return weighted(g, mul_scalar(g, x, 1.7f), coeff); };
            worst["mul_scalar"] = std::max(worst["mul_scalar"], fd_case(x, g, f5, 5e-3));
            auto f6 = [&]() { return sum(g, mul(g, x, coeff)); };
            worst["sum"] = std::max(worst["sum"], fd_case(x, g, f6, 5e-3));

            Tensor target = oracle::random_tensor({n}, rng, 0.3);
            bool near_kink = false;
            {
                auto pv = x.data();
                auto tv = target.data();
                for (size_t i = 0; i < pv.size(); ++i)
                    if (std::abs(std::abs(pv[i] - tv[i]) - 1.0f) < 0.02f) near_kink = true;
            }
            if (!near_kink) {
                auto f7 = [&]() { return huber_loss(g, x, target, 1.0f); };
                worst["huber_loss"] = std::max(worst["huber_loss"], fd_case(x, g, f7, 5e-3));
            }
        }
    }
    {  // soft_entropy, away from kernel kinks and the uniform stationary
       // point (where the gradient vanishes below the f32 FD noise floor)
        int done = 0;
        while (done < 100) {
            Graph g;
            const int levels = 2 + int(rng.below(6));
            Tensor z = oracle::random_tensor({1, 1, 2, 2}, rng, 0.5);
            auto d = z.data();
            bool ok = true;
            for (auto& v : d) {
                const float u = v + 0.5f;
                v = 0.28f + 0.24f * u * u;
                const double t = double(v) * levels * 2.0;
                if (std::abs(t - std::round(t)) < 0.12) ok = false;
            }
            if (!ok) continue;
            z.set_requires_grad(true);
            auto fwd = [&]() { return soft_entropy(g, z, levels); };
            double fd_norm = 0.0;
            for (size_t i = 0; i < size_t(z.numel()); ++i) {
                const double gi = oracle::fd_grad(z, i, 4e-3, [&]() {
                    g.clear();
                    return double(fwd().item());
                });
                fd_norm += gi * gi;
            }
            g.clear();
            if (std::sqrt(fd_norm) < 1.0) continue;
            worst["soft_entropy"] =
                std::max(worst["soft_entropy"], fd_case(z, g, fwd, 4e-3, /*richardson=*/true));
            ++done;
        }
    }
    {  // quantize_ste: the backward is straight-through by definition, so the
       // check is its contract (identity inside [0,1], zero outside)
        Graph g;
        Tensor z = Tensor::from_data({4}, {0.1f, 0.9f, -0.2f, 1.2f}, true);
        Tensor loss = sum(g, quantize_ste(g, z, 8));
        g.backward(loss);
        auto gz = z.grad();
        const bool ste_ok = gz[0] == 1.0f && gz[1] == 1.0f && gz[2] == 0.0f && gz[3] == 0.0f;
        worst["quantize_ste(contract)"] = ste_ok ? 0.0 : 1.0;
    }

    double overall = 0.0;
    std::string detail = "FD sweep, 100 cases/op:";
    for (const auto& [name, err] : worst) {
        overall = std::max(overall, err);
        char buf[64];
        std::snprintf(buf, sizeof buf, " %s=%.1e", name.c_str(), err);
        detail += buf;
    }
    char tail[48];
    std::snprintf(tail, sizeof tail, " (<=1e-3), %.1fs", now_s() - t0);
    report(3, overall <= 1e-3, detail + tail);
}

// --------------------------------------------------------- 4, 5, 6, 7

RunConfig toy_run_config(uint64_t seed, int epochs) {
    RunConfig cfg;  // defaults are the desk-scale CAE
    cfg.seed = seed;
    cfg.epochs = epochs;
    cfg.batch_size = 8;
    cfg.data_dir = data_dir();
    return cfg;
}

// Bisect eta so the post-projection sparsity lands near target.
double tune_eta(const CaeModel& model, Constraint c, Scope scope, double target) {
    double hi = 1.0;
    while (projected_sparsity(model, c, hi, scope) > target && hi < 1e6) hi *= 2.0;
    double lo = 0.0;  // S(0)=1
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (projected_sparsity(model, c, mid, scope) > target ? lo : hi) = mid;
    }
    // pick whichever endpoint lands closer to the target
    const double s_lo = projected_sparsity(model, c, lo, scope);
    const double s_hi = projected_sparsity(model, c, hi, scope);
    return std::abs(s_lo - target) < std::abs(s_hi - target) ? lo : hi;
}

struct SeedResult {
    std::map<Constraint, double> S, rm, mem_pct, mse;
    double mse_ref = 0.0;
};

double corpus_mse(const CaeModel& model, const PatchDataset& data) {
    // decode(encode(.)) distortion over every training image, patch-exact
    double total = 0.0;
    const std::vector<fs::path>& files = data.files();
    for (const auto& f : files) {
        Tensor img = load_image(f, true);
        total += eval_image(model, img, std::nullopt).row.mse;
    }
    return total / double(files.size());
}

// Criteria 5-7 protocol: phase 2 continues from the projected weights
// (restart=projected); the dense reference is the eta=inf run of the same
// seed under the same protocol. Matched-S target 0.85, inside [0.75,0.90].
SeedResult run_seed(uint64_t seed, int epochs) {
    const RunConfig cfg = toy_run_config(seed, epochs);
    PatchDataset data(cfg.data_dir, cfg.cae.patch_size, cfg.seed);

    CaeModel model(cfg.cae, cfg.seed);
    TrainOptions t;
    t.epochs = cfg.epochs;
    t.batch_size = cfg.batch_size;
    t.seed = cfg.seed;
    t.adam = cfg.adam;
    train_epochs(model, data, t);
    const auto phase1 = model.snapshot();

    SeedResult res;
    auto phase2 = [&](Constraint c, double eta) {
        model.restore(phase1);
        SparsifyOptions s;
        static_cast<TrainOptions&>(s) = t;
        s.constraint = c;
        s.eta = eta;
        s.scope = Scope::Encoder;
        s.restart_from_init = false;
        sparsify_and_retrain(model, data, s, nullptr, cfg.epochs);

        std::vector<Tensor> w;
        for (const auto& [n, wt] : model.scoped_weights(Scope::Encoder)) w.push_back(wt);
        const CostReport rep =
            cost_report(w, model.layer_geometry(Scope::Encoder), model.scope_live_inputs(Scope::Encoder));
        res.S[c] = rep.sparsity();
        res.rm[c] = rep.maccs_reduction_pct();
        res.mem_pct[c] = rep.memory_reduction_pct();
        res.mse[c] = corpus_mse(model, data);
    };

    for (Constraint c : {Constraint::L1, Constraint::L11, Constraint::L1Inf}) {
        model.restore(phase1);
        const double eta = tune_eta(model, c, Scope::Encoder, 0.85);
        phase2(c, eta);
    }

    // dense reference: the eta=inf run with the same seed and budget
    model.restore(phase1);
    SparsifyOptions s;
    static_cast<TrainOptions&>(s) = t;
    s.eta = std::numeric_limits<double>::infinity();
    s.scope = Scope::Encoder;
    s.restart_from_init = false;
    sparsify_and_retrain(model, data, s, nullptr, cfg.epochs);
    res.mse_ref = corpus_mse(model, data);
    return res;
}

void criterion_4_mask_persistence() {
    const double t0 = now_s();
    const RunConfig cfg = toy_run_config(404, 5);
    PatchDataset data(cfg.data_dir, cfg.cae.patch_size, cfg.seed);
    CaeModel model(cfg.cae, cfg.seed);
    const auto w_init = model.snapshot();
    TrainOptions t;
    t.epochs = 5;
    t.batch_size = cfg.batch_size;
    t.seed = cfg.seed;
    train_epochs(model, data, t);

    SparsifyOptions s;
    static_cast<TrainOptions&>(s) = t;
    s.epochs = 10;
    s.constraint = Constraint::L11;
    s.scope = Scope::Encoder;
    s.eta = tune_eta(model, s.constraint, s.scope, 0.8);
    s.restart_from_init = true;

    int64_t checked = 0, steps = 0;
    bool all_zero = true;
    s.on_step = [&](const StepInfo& info) {
        if (info.phase != 2) return;
        ++steps;
        for (const auto& [name, w] : info.model->scoped_weights(s.scope)) {
            const Tensor& mask = checkpoint_get(*info.masks, name + ".mask");
            auto wv = w.data();
            auto mv = mask.data();
            for (size_t i = 0; i < wv.size(); ++i)
                if (mv[i] == 0.0f) {
                    ++checked;
                    uint32_t bits;
                    std::memcpy(&bits, &wv[i], 4);
                    if (bits != 0u) all_zero = false;
                }
        }
    };
    sparsify_and_retrain(model, data, s, &w_init, 5);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "mask persistence: %lld masked positions bit-exact 0.0 across %lld phase-2 "
                  "steps (10 epochs), %.1fs",
                  (long long)checked, (long long)steps, now_s() - t0);
    report(4, all_zero && steps == 10 * 8 && checked > 0, buf);
}

void criteria_5_6_7_table1(int epochs, const std::vector<uint64_t>& seeds) {
    const double t0 = now_s();
    std::vector<SeedResult> results(seeds.size());
    {
        // independent models and datasets per seed: safe to run in parallel
        std::vector<std::thread> pool;
        for (size_t i = 0; i < seeds.size(); ++i)
            pool.emplace_back([&, i]() { results[i] = run_seed(seeds[i], epochs); });
        for (auto& th : pool) th.join();
    }
    for (size_t i = 0; i < seeds.size(); ++i) {
        const uint64_t seed = seeds[i];
        const auto& r = results[i];
        std::printf(
            "    seed %llu: S(l1)=%.3f S(l11)=%.3f S(l1inf)=%.3f | RM(l1)=%.2f%% RM(l11)=%.2f%% "
            "RM(l1inf)=%.2f%% | rel(l1)=%.2fdB rel(l11)=%.2fdB rel(l1inf)=%.2fdB\n",
            (unsigned long long)seed, r.S.at(Constraint::L1), r.S.at(Constraint::L11),
            r.S.at(Constraint::L1Inf), r.rm.at(Constraint::L1), r.rm.at(Constraint::L11),
            r.rm.at(Constraint::L1Inf), relative_loss(r.mse_ref, r.mse.at(Constraint::L1)),
            relative_loss(r.mse_ref, r.mse.at(Constraint::L11)),
            relative_loss(r.mse_ref, r.mse.at(Constraint::L1Inf)));
        std::fflush(stdout);
    }

    auto mean = [&](std::function<double(const SeedResult&)> f) {
        double s = 0.0;
        for (const auto& r : results) s += f(r);
        return s / double(results.size());
    };

    bool s_matched = true;
    for (const auto& r : results)
        for (Constraint c : {Constraint::L1, Constraint::L11, Constraint::L1Inf})
            s_matched &= r.S.at(c) >= 0.75 && r.S.at(c) <= 0.90;

    const double rm_l1 = mean([](const SeedResult& r) { return r.rm.at(Constraint::L1); });
    const double rm_l11 = mean([](const SeedResult& r) { return r.rm.at(Constraint::L11); });
    const double rm_l1inf = mean([](const SeedResult& r) { return r.rm.at(Constraint::L1Inf); });

    char buf[300];
    std::snprintf(buf, sizeof buf,
                  "MACC-reduction ordering (restart=projected, S target 0.85) over %zu seeds at matched S in [0.75,0.90]: mean "
                  "RM(l1)=%.2f%% (<=2%%), RM(l11)=%.2f%% (>=10%%), RM(l1inf)=%.2f%% (>=RM(l11)); "
                  "%.0fs",
                  results.size(), rm_l1, rm_l11, rm_l1inf, now_s() - t0);
    report(5, s_matched && rm_l1 <= 2.0 && rm_l11 >= 10.0 && rm_l1inf >= rm_l11, buf);

    double worst_gap = 0.0;
    for (const auto& r : results)
        for (Constraint c : {Constraint::L1, Constraint::L11, Constraint::L1Inf})
            worst_gap =
                std::max(worst_gap, std::abs(r.mem_pct.at(c) - 100.0 * r.S.at(c)));
    std::snprintf(buf, sizeof buf,
                  "nonzero-count memory reduction equals S: worst |mem%% - 100*S| = %.4f points "
                  "(<=1) across %zu sparsify runs",
                  worst_gap, results.size() * 3);
    report(6, worst_gap <= 1.0, buf);

    const double rel_l1 =
        mean([](const SeedResult& r) { return relative_loss(r.mse_ref, r.mse.at(Constraint::L1)); });
    const double rel_l11 = mean(
        [](const SeedResult& r) { return relative_loss(r.mse_ref, r.mse.at(Constraint::L11)); });
    const double rel_l1inf = mean(
        [](const SeedResult& r) { return relative_loss(r.mse_ref, r.mse.at(Constraint::L1Inf)); });
    std::snprintf(buf, sizeof buf,
                  "quality ordering: mean rel_loss l1=%.2fdB l11=%.2fdB l1inf=%.2fdB; "
                  "l11 >= l1inf and |l11 - l1| <= 1dB",
                  rel_l1, rel_l11, rel_l1inf);
    report(7, rel_l11 >= rel_l1inf && std::abs(rel_l11 - rel_l1) <= 1.0, buf);
}

// ------------------------------------------------------------------- 8

void criterion_8_codec_soundness() {
    const double t0 = now_s();
    SplitMix64 rng(0xC0DEC);
    bool roundtrip = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const int bits = 2 + int(rng.below(5));
        const int k = 1 << bits;
        const size_t n = 64 + rng.below(2048);
        std::vector<int32_t> symbols(n);
        // a mix of skewed and uniform latent statistics
        const double skew = rng.next_double();
        for (auto& s : symbols)
            s = skew < 0.5 ? int32_t(rng.below(uint64_t(k)))
                           : std::min<int32_t>(k - 1, int32_t(-std::log(rng.next_double() + 1e-12) *
                                                              k / 6.0));
        const FreqTable table = FreqTable::from_symbols(symbols, k);
        const auto coded = range_encode(symbols, table);
        if (range_decode(coded, n, table) != symbols) {
            roundtrip = false;
            break;
        }
    }

    std::vector<int32_t> uniform(100000);
    for (auto& s : uniform) s = int32_t(rng.below(16));
    const FreqTable table = FreqTable::from_symbols(uniform, 16);
    const auto coded = range_encode(uniform, table);
    const double bits_per_symbol = 8.0 * double(coded.size()) / double(uniform.size());
    const double entropy = stream_entropy_bits(uniform, 16);
    const bool tight = bits_per_symbol <= entropy * 1.01;
    const bool sound = bits_per_symbol >= entropy * 0.999;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "codec: 1000 random latents lossless, uniform 1e5-symbol stream %.4f bits/sym "
                  "vs entropy %.4f (within 1%%), %.1fs",
                  bits_per_symbol, entropy, now_s() - t0);
    report(8, roundtrip && tight && sound, buf);
}

// ------------------------------------------------------------------- 9

void criterion_9_metric_goldens() {
    Tensor a = Tensor::full({1, 16, 16}, 0.5f);
    Tensor b = Tensor::full({1, 16, 16}, 0.6f);
    const bool psnr_ok = std::abs(psnr(a, b) - 20.0) < 1e-5 && std::isinf(psnr(a, a));
    const bool mssim_ok = mssim(a, a) == 1.0;
    const bool rel_ok = std::abs(relative_loss(0.013, 0.13) + 10.0) < 1e-9;
    report(9, psnr_ok && mssim_ok && rel_ok,
           "metric goldens: PSNR(MSE=0.01)=20dB, MSSIM(identical)=1.0, relative_loss(m,10m)=-10dB");
}

// ------------------------------------------------------------------ 10

void criterion_10_cli_determinism() {
    const double t0 = now_s();
    const char* cli_env = std::getenv("SCAE_CLI");
    const std::string cli = cli_env ? cli_env : "build/tools/scae";
    if (!fs::exists(cli)) {
        report(10, false, "determinism: scae binary not found at " + cli +
                              " (set SCAE_CLI)");
        return;
    }
    const fs::path base = fs::temp_directory_path() / "scae_acceptance_det";
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path cfg_path = base / "run.cfg";
    {
        std::ofstream f(cfg_path);
        f << "epochs = 3\nbatch_size = 8\nseed = 42\nlambda = 0.001\ndata_dir = " << data_dir()
          << "\n";
    }
    auto train_into = [&](const std::string& name) {
        const std::string cmd = cli + " train --config " + cfg_path.string() + " --out " +
                                (base / name).string() + " >/dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    bool ok = train_into("a") && train_into("b");
    std::string detail;
    if (ok) {
        auto slurp = [](const fs::path& p) {
            std::ifstream f(p, std::ios::binary);
            return std::string((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
        };
        const std::string ca = slurp(base / "a" / "dense.scae");
        const std::string cb = slurp(base / "b" / "dense.scae");
        ok = !ca.empty() && ca == cb;
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "determinism: two cmd_train runs, checkpoints %zu bytes, bit-identical=%s, "
                      "%.0fs",
                      ca.size(), ok ? "yes" : "NO", now_s() - t0);
        detail = buf;
    } else {
        detail = "determinism: cmd_train failed";
    }
    fs::remove_all(base);
    report(10, ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
    // quick mode shrinks the training criteria for local iteration; the
    // registered ctest run uses the full 50+50-epoch protocol
    const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    const int epochs = quick ? 8 : 50;
    const std::vector<uint64_t> seeds = quick ? std::vector<uint64_t>{1, 2, 3}
                                              : std::vector<uint64_t>{1, 2, 3};

    std::printf("acceptance suite (%s: %d+%d epochs, %zu seeds)\n", quick ? "quick" : "full",
                epochs, epochs, seeds.size());
    criterion_1_projection_optimality();
    criterion_2_algorithm1_trace();
    criterion_3_gradient_correctness();
    criterion_4_mask_persistence();
    criteria_5_6_7_table1(epochs, seeds);
    criterion_8_codec_soundness();
    criterion_9_metric_goldens();
    criterion_10_cli_determinism();

    std::printf("%s: %d criterion failure(s)\n", g_failures == 0 ? "OK" : "FAILED", g_failures);
    return g_failures;
}
