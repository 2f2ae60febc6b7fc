#include "scae/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

#include "scae/image_io.hpp"
#include "scae/prng.hpp"

namespace scae {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(text.data(), std::streamsize(text.size()));
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

// Echo the resolved config before any work happens.
fs::path prepare_out_dir(const RunConfig& cfg) {
    fs::path out(cfg.out_dir);
    fs::create_directories(out);
    write_file(out / "config.resolved.txt", cfg.to_text());
    return out;
}

std::string run_manifest(const RunConfig& cfg, uint64_t dataset_hash) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)dataset_hash);
    std::string m;
    m += "seed = " + std::to_string(cfg.seed) + "\n";
    m += "N = " + std::to_string(cfg.epochs) + "\n";
    m += "gamma = " + std::to_string(cfg.adam.lr) + "\n";
    m += "beta1 = " + std::to_string(cfg.adam.beta1) + "\n";
    m += "beta2 = " + std::to_string(cfg.adam.beta2) + "\n";
    m += "eps = " + std::to_string(cfg.adam.eps) + "\n";
    m += "eta = " + (std::isinf(cfg.eta) ? std::string("inf") : std::to_string(cfg.eta)) + "\n";
    m += std::string("constraint = ") + to_string(cfg.constraint) + "\n";
    m += std::string("scope = ") + to_string(cfg.scope) + "\n";
    m += "levels = " + std::to_string(cfg.cae.levels()) + "\n";
    m += "lambda = " + std::to_string(cfg.cae.lambda_entropy) + "\n";
    m += std::string("dataset_hash = ") + hex + "\n";
    return m;
}

std::string loss_log_csv(const std::vector<EpochLog>& logs, double lambda) {
    std::string csv = "epoch,entropy_term,distortion_term,total\n";
    char line[160];
    for (const auto& l : logs) {
        std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g\n", l.epoch, lambda * l.entropy_bits,
                      l.distortion, l.total);
        csv += line;
    }
    return csv;
}

// Coding table from the training set, stored in checkpoints as f32 counts
// (exact for counts below 2^24).
Tensor build_coder_table(const CaeModel& model, const PatchDataset& data) {
    std::vector<uint32_t> counts(size_t(model.config().levels()), 1u);
    const size_t chunk = 16;
    for (size_t first = 0; first < data.patch_count(); first += chunk) {
        const size_t count = std::min(chunk, data.patch_count() - first);
        std::vector<size_t> idx(count);
        for (size_t i = 0; i < count; ++i) idx[i] = first + i;
        Tensor batch = data.make_batch(idx, 0, count);
        const LatentCode code = model.encode(batch);
        for (int32_t s : code.symbols) ++counts[size_t(s)];
    }
    std::vector<float> as_f32(counts.begin(), counts.end());
    return Tensor::from_data({int(counts.size())}, std::move(as_f32));
}

std::optional<FreqTable> table_from_checkpoint(const std::vector<NamedTensor>& state) {
    if (!checkpoint_has(state, "coder.freq")) return std::nullopt;
    const Tensor& t = checkpoint_get(state, "coder.freq");
    std::vector<uint32_t> counts;
    for (float v : t.data()) counts.push_back(uint32_t(v));
    return FreqTable::from_counts(std::move(counts));
}

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("image directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string eval_csv(const std::vector<EvalRow>& rows, const EvalRow& average) {
    std::string csv = "name,bpp_coded,bpp_est,psnr,mssim\n";
    char line[256];
    auto emit = [&](const EvalRow& r) {
        std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.4f,%.6f\n", r.name.c_str(), r.bpp_coded,
                      r.bpp_est, r.psnr, r.mssim);
        csv += line;
    };
    for (const auto& r : rows) emit(r);
    emit(average);
    return csv;
}

}  // namespace

int eval_thread_count(size_t images) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SCAE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) hw = std::min<unsigned>(hw, unsigned(cap));
    }
    return int(std::min<size_t>(hw, std::max<size_t>(images, 1)));
}

namespace {

void require_dir(const std::string& dir, const char* what) {
    if (!fs::is_directory(dir))
        throw ConfigError(std::string(what) + " path not found: " + dir);
}

}  // namespace

TrainOutputs run_train(const RunConfig& cfg) {
    cfg.validate();
    require_dir(cfg.data_dir, "dataset");
    const fs::path out = prepare_out_dir(cfg);
    PatchDataset data(cfg.data_dir, cfg.cae.patch_size, cfg.seed);
    write_file(out / "dataset.manifest", data.manifest());

    CaeModel model(cfg.cae, cfg.seed);
    TrainOptions opt;
    opt.epochs = cfg.epochs;
    opt.batch_size = cfg.batch_size;
    opt.seed = cfg.seed;
    opt.adam = cfg.adam;
    const auto logs = train_epochs(model, data, opt);

    auto state = model.state();
    state.emplace_back("coder.freq", build_coder_table(model, data));

    TrainOutputs res;
    res.checkpoint = out / "dense.scae";
    res.loss_log = out / "loss_log.csv";
    res.manifest = out / "manifest.txt";
    save_checkpoint(res.checkpoint, state);
    write_file(res.loss_log, loss_log_csv(logs, cfg.cae.lambda_entropy));
    write_file(res.manifest, run_manifest(cfg, data.content_hash()));
    return res;
}

SparsifyOutputs run_sparsify(const RunConfig& cfg, const fs::path& checkpoint) {
    cfg.validate();
    require_dir(cfg.data_dir, "dataset");
    const fs::path out = prepare_out_dir(cfg);
    PatchDataset data(cfg.data_dir, cfg.cae.patch_size, cfg.seed);

    CaeModel model(cfg.cae, cfg.seed);
    // W_init is a pure function of (config, seed): capture it before loading
    // the phase-1 weights so the strict restart can return to it.
    const auto w_init = model.snapshot();
    model.load_state(load_checkpoint(checkpoint));

    SparsifyOptions opt;
    opt.epochs = cfg.epochs;
    opt.batch_size = cfg.batch_size;
    opt.seed = cfg.seed;
    opt.adam = cfg.adam;
    opt.constraint = cfg.constraint;
    opt.eta = cfg.eta;
    opt.scope = cfg.scope;
    opt.restart_from_init = cfg.restart_from_init;

    auto result = sparsify_and_retrain(model, data, opt,
                                       opt.restart_from_init ? &w_init : nullptr,
                                       /*epoch_base=*/cfg.epochs);

    // cost accounting over the whole model and over the projected scope
    std::vector<Tensor> all_w;
    for (const auto& [n, w] : model.scoped_weights(Scope::All)) all_w.push_back(w);
    const CostReport full = cost_report(all_w, model.layer_geometry(Scope::All), 3);

    std::vector<Tensor> scoped_w;
    for (const auto& [n, w] : model.scoped_weights(cfg.scope)) scoped_w.push_back(w);
    const CostReport scoped = cost_report(scoped_w, model.layer_geometry(cfg.scope),
                                          model.scope_live_inputs(cfg.scope));

    auto state = model.state();
    for (const auto& m : result.masks) state.push_back(m);
    state.emplace_back("coder.freq", build_coder_table(model, data));

    SparsifyOutputs res;
    res.checkpoint = out / "sparse.scae";
    res.cost_csv = out / "cost_report.csv";
    res.sparsity_scoped = scoped.sparsity();
    res.rm_scoped_pct = scoped.maccs_reduction_pct();
    res.rm_model_pct = full.maccs_reduction_pct();
    res.mem_reduction_pct = scoped.memory_reduction_pct();
    res.mem_csr_pct = scoped.memory_reduction_csr_pct();
    save_checkpoint(res.checkpoint, state);
    write_file(res.cost_csv, full.to_csv());
    write_file(out / "loss_log_phase2.csv", loss_log_csv(result.phase2, cfg.cae.lambda_entropy));
    write_file(out / "manifest.txt", run_manifest(cfg, data.content_hash()));

    // memory reduction on the nonzero-count basis must equal S
    if (std::abs(res.mem_reduction_pct - 100.0 * res.sparsity_scoped) > 1.0)
        throw ContractError("memory reduction " + std::to_string(res.mem_reduction_pct) +
                            "% deviates from sparsity " +
                            std::to_string(100.0 * res.sparsity_scoped) + "% by more than 1 point");
    return res;
}

ImageEval eval_image(const CaeModel& model, const Tensor& image,
                     const std::optional<FreqTable>& table) {
    const int ps = model.config().patch_size;
    if (image.rank() != 3) throw ShapeError("eval_image expects (C,H,W)");
    const int H = image.dim(1), W = image.dim(2);
    const int gh = H / ps, gw = W / ps;
    if (gh < 1 || gw < 1)
        throw ShapeError("image smaller than one patch (" + std::to_string(ps) + ")");

    // crop to the patch grid; the remainder is dropped from coding and metrics
    auto patches = extract_patches(image, ps, PatchPolicy::Grid);
    Tensor batch = Tensor::zeros({int(patches.size()), 3, ps, ps});
    {
        auto out = batch.data();
        const size_t stride = size_t(3) * ps * ps;
        for (size_t i = 0; i < patches.size(); ++i) {
            auto src = patches[i].data();
            std::copy(src.begin(), src.end(), out.begin() + long(i * stride));
        }
    }

    const LatentCode code = model.encode(batch);
    const FreqTable coding =
        table ? *table : FreqTable::from_symbols(code.symbols, model.config().levels());

    SczFile scz;
    scz.grid_h = gh;
    scz.grid_w = gw;
    scz.patch_size = ps;
    scz.channels = code.shape[1];
    scz.lh = code.shape[2];
    scz.lw = code.shape[3];
    scz.quant_bits = code.quant_bits;
    scz.table_counts = coding.counts();
    scz.symbols = code.symbols;
    const std::string container = scz_encode(scz);

    // reconstruct and reassemble the grid
    const Tensor recon_patches = model.decode(code);
    Tensor recon = Tensor::zeros({3, gh * ps, gw * ps});
    Tensor cropped = Tensor::zeros({3, gh * ps, gw * ps});
    {
        auto rp = recon_patches.data();
        auto rv = recon.data();
        auto cv = cropped.data();
        auto iv = image.data();
        const size_t plane_out = size_t(gh * ps) * size_t(gw * ps);
        const size_t plane_in = size_t(H) * W;
        for (int p = 0; p < gh * gw; ++p) {
            const int py = (p / gw) * ps, px = (p % gw) * ps;
            for (int c = 0; c < 3; ++c)
                for (int y = 0; y < ps; ++y)
                    for (int x = 0; x < ps; ++x) {
                        const size_t dst = size_t(c) * plane_out +
                                           size_t(py + y) * size_t(gw * ps) + size_t(px + x);
                        rv[dst] = rp[((size_t(p) * 3 + c) * ps + y) * ps + x];
                        cv[dst] = iv[size_t(c) * plane_in + size_t(py + y) * W + (px + x)];
                    }
        }
    }

    ImageEval out;
    out.reconstruction = recon;
    out.container = container;
    const int64_t pixels = int64_t(gh * ps) * int64_t(gw * ps);
    out.row.bpp_coded = bitrate_bpp_coded(container.size(), pixels);
    out.row.bpp_est =
        bitrate_bpp_estimate(entropy_estimate(code), int64_t(code.symbols.size()), pixels);
    out.row.mse = mse(recon, cropped);
    out.row.psnr = psnr(recon, cropped);
    out.row.mssim = mssim(recon, cropped);
    return out;
}

EvalOutputs run_eval(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& image_dir,
                     bool save_recon, bool save_scz) {
    cfg.validate();
    require_dir(image_dir.string(), "image");
    const fs::path out = prepare_out_dir(cfg);
    const auto files = list_images(image_dir);
    if (files.empty()) throw std::runtime_error("no images in " + image_dir.string());

    CaeModel model(cfg.cae, cfg.seed);
    const auto state = load_checkpoint(checkpoint);
    model.load_state(state);
    const auto table = table_from_checkpoint(state);

    std::vector<std::optional<ImageEval>> results(files.size());
    std::vector<std::string> warnings(files.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= files.size()) return;
            try {
                const Tensor image = load_image(files[i], /*force_rgb=*/true);
                results[i] = eval_image(model, image, table);
                results[i]->row.name = files[i].filename().string();
            } catch (const std::exception& e) {
                warnings[i] = std::string("skipping ") + files[i].filename().string() + ": " + e.what();
            }
        }
    };
    const int threads = eval_thread_count(files.size());
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    EvalOutputs res;
    for (size_t i = 0; i < files.size(); ++i) {
        if (!warnings[i].empty()) {
            std::fprintf(stderr, "warning: %s\n", warnings[i].c_str());
            continue;
        }
        res.rows.push_back(results[i]->row);
        if (save_recon) {
            fs::create_directories(out / "recon");
            save_image(results[i]->reconstruction,
                       out / "recon" / (files[i].stem().string() + ".ppm"));
        }
        if (save_scz) {
            fs::create_directories(out / "scz");
            write_file(out / "scz" / (files[i].stem().string() + ".scz"), results[i]->container);
        }
    }
    if (res.rows.empty()) throw std::runtime_error("no image could be evaluated");

    EvalRow avg{};
    avg.name = "AVERAGE";
    for (const auto& r : res.rows) {
        avg.bpp_coded += r.bpp_coded;
        avg.bpp_est += r.bpp_est;
        avg.psnr += r.psnr;
        avg.mssim += r.mssim;
        avg.mse += r.mse;
    }
    const double n = double(res.rows.size());
    avg.bpp_coded /= n;
    avg.bpp_est /= n;
    avg.psnr /= n;
    avg.mssim /= n;
    avg.mse /= n;
    res.average = avg;
    res.csv = out / "eval.csv";
    write_file(res.csv, eval_csv(res.rows, res.average));
    return res;
}

CurveOutputs run_curve(const RunConfig& base, const std::string& knob,
                       const std::vector<double>& values, const fs::path& image_dir) {
    if (values.size() < 2) throw ConfigError("curve needs at least 2 sweep points");
    if (knob != "eta" && knob != "bits") throw ConfigError("curve knob must be 'eta' or 'bits'");
    base.validate();
    require_dir(base.data_dir, "dataset");
    require_dir(image_dir.string(), "image");
    const fs::path out = prepare_out_dir(base);

    PatchDataset data(base.data_dir, base.cae.patch_size, base.seed);

    // phase-1 states and dense-reference eval results, keyed by quant_bits
    struct DenseRef {
        std::vector<NamedTensor> phase1;
        double mse_ref;
    };
    std::map<int, DenseRef> cache;

    auto get_ref = [&](const RunConfig& cfg) -> DenseRef& {
        auto it = cache.find(cfg.cae.quant_bits);
        if (it != cache.end()) return it->second;

        CaeModel model(cfg.cae, cfg.seed);
        const auto w_init = model.snapshot();
        TrainOptions t;
        t.epochs = cfg.epochs;
        t.batch_size = cfg.batch_size;
        t.seed = cfg.seed;
        t.adam = cfg.adam;
        train_epochs(model, data, t);
        DenseRef ref;
        ref.phase1 = model.snapshot();

        // the dense reference is the eta=inf run with the same seed
        SparsifyOptions s;
        static_cast<TrainOptions&>(s) = t;
        s.eta = std::numeric_limits<double>::infinity();
        s.constraint = cfg.constraint;
        s.scope = cfg.scope;
        s.restart_from_init = cfg.restart_from_init;
        sparsify_and_retrain(model, data, s, s.restart_from_init ? &w_init : nullptr, cfg.epochs);

        double mse_sum = 0.0;
        int count = 0;
        for (const auto& f : list_images(image_dir)) {
            const auto ev = eval_image(model, load_image(f, true), std::nullopt);
            mse_sum += ev.row.mse;
            ++count;
        }
        ref.mse_ref = mse_sum / count;
        return cache.emplace(cfg.cae.quant_bits, std::move(ref)).first->second;
    };

    CurveOutputs res;
    for (double value : values) {
        RunConfig cfg = base;
        if (knob == "eta") cfg.eta = value;
        else cfg.cae.quant_bits = int(value);
        cfg.validate();

        DenseRef& ref = get_ref(cfg);

        CaeModel model(cfg.cae, cfg.seed);
        const auto w_init = model.snapshot();
        model.load_state(ref.phase1);

        SparsifyOptions s;
        s.epochs = cfg.epochs;
        s.batch_size = cfg.batch_size;
        s.seed = cfg.seed;
        s.adam = cfg.adam;
        s.eta = cfg.eta;
        s.constraint = cfg.constraint;
        s.scope = cfg.scope;
        s.restart_from_init = cfg.restart_from_init;
        sparsify_and_retrain(model, data, s, s.restart_from_init ? &w_init : nullptr, cfg.epochs);

        std::vector<Tensor> scoped_w;
        for (const auto& [n, w] : model.scoped_weights(cfg.scope)) scoped_w.push_back(w);
        const CostReport scoped = cost_report(scoped_w, model.layer_geometry(cfg.scope),
                                              model.scope_live_inputs(cfg.scope));

        double bpp = 0.0, ps = 0.0, ms = 0.0, mse_sum = 0.0;
        int count = 0;
        for (const auto& f : list_images(image_dir)) {
            const auto ev = eval_image(model, load_image(f, true), std::nullopt);
            bpp += ev.row.bpp_coded;
            ps += ev.row.psnr;
            ms += ev.row.mssim;
            mse_sum += ev.row.mse;
            ++count;
        }
        CurvePoint pt;
        pt.knob = value;
        pt.sparsity = scoped.sparsity();
        pt.rm_pct = scoped.maccs_reduction_pct();
        pt.mem_pct = scoped.memory_reduction_pct();
        pt.bpp = bpp / count;
        pt.psnr = ps / count;
        pt.mssim = ms / count;
        const double mse_pt = mse_sum / count;
        pt.relative_loss_db = std::isinf(cfg.eta) ? 0.0 : relative_loss(ref.mse_ref, mse_pt);
        res.points.push_back(pt);
    }

    std::string csv = "knob,sparsity,rm_pct,mem_pct,bpp,psnr,mssim,relative_loss_db\n";
    char line[256];
    for (const auto& p : res.points) {
        std::snprintf(line, sizeof line, "%.9g,%.6f,%.4f,%.4f,%.6f,%.4f,%.6f,%.4f\n", p.knob,
                      p.sparsity, p.rm_pct, p.mem_pct, p.bpp, p.psnr, p.mssim, p.relative_loss_db);
        csv += line;
    }
    res.csv = out / "curve.csv";
    write_file(res.csv, csv);
    return res;
}

CostOutputs run_cost(const RunConfig& cfg, const fs::path& checkpoint) {
    cfg.validate();
    const fs::path out = prepare_out_dir(cfg);
    CaeModel model(cfg.cae, cfg.seed);
    model.load_state(load_checkpoint(checkpoint));

    CostOutputs res;
    auto scoped = [&](Scope scope) {
        std::vector<Tensor> w;
        for (const auto& [n, t] : model.scoped_weights(scope)) w.push_back(t);
        return cost_report(w, model.layer_geometry(scope), model.scope_live_inputs(scope));
    };
    res.report = scoped(Scope::All);
    res.encoder_report = scoped(Scope::Encoder);
    res.decoder_report = scoped(Scope::Decoder);
    res.csv = out / "cost_report.csv";
    write_file(res.csv, res.report.to_csv());
    return res;
}

}  // namespace scae
