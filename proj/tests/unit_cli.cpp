// End-to-end checks of the scae binary: exit codes, file outputs, config
// echo, determinism of cmd_train. The binary path comes from SCAE_CLI_PATH
// (set by CMake); the toy corpus path from the working directory.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli() {
#ifdef SCAE_CLI_PATH
    return SCAE_CLI_PATH;
#else
    return "scae";
#endif
}

int run(const std::string& args) {
    const std::string cmd = cli() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

fs::path write_config(const fs::path& dir, uint64_t seed) {
    fs::create_directories(dir);
    const fs::path cfg = dir / "run.cfg";
    std::ofstream f(cfg);
    f << "patch_size = 32\n"
         "encoder = 8:3:2,8:3:2\n"
         "latent_channels = 8\n"
         "quant_bits = 3\n"
         "lambda = 0.001\n"
         "epochs = 1\n"
         "batch_size = 16\n"
         "seed = " << seed << "\n"
         "constraint = l11\n"
         "eta = 2\n"
         "scope = encoder\n"
         "data_dir = data/toy\n"
         "out_dir = " << (dir / "out").string() << "\n";
    return cfg;
}

}  // namespace

TEST_CASE("train writes checkpoint, loss log, manifest and the config echo") {
    const fs::path dir = fs::temp_directory_path() / "scae_cli_train";
    fs::remove_all(dir);
    const fs::path cfg = write_config(dir, 5);
    REQUIRE(run("train --config " + cfg.string()) == 0);
    CHECK(fs::exists(dir / "out" / "dense.scae"));
    CHECK(fs::exists(dir / "out" / "manifest.txt"));
    CHECK(fs::exists(dir / "out" / "config.resolved.txt"));

    // 1 epoch -> exactly one loss row after the header
    const std::string log = slurp(dir / "out" / "loss_log.csv");
    CHECK(std::count(log.begin(), log.end(), '\n') == 2);
    CHECK(log.rfind("epoch,entropy_term,distortion_term,total\n", 0) == 0);

    // manifest carries the run parameters
    const std::string manifest = slurp(dir / "out" / "manifest.txt");
    for (const char* key : {"seed", "N", "gamma", "beta1", "beta2", "eps", "eta", "constraint",
                            "scope", "levels", "lambda", "dataset_hash"})
        CHECK(manifest.find(std::string(key) + " = ") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("same seed twice gives bit-identical checkpoints") {
    const fs::path d1 = fs::temp_directory_path() / "scae_cli_det1";
    const fs::path d2 = fs::temp_directory_path() / "scae_cli_det2";
    fs::remove_all(d1);
    fs::remove_all(d2);
    REQUIRE(run("train --config " + write_config(d1, 9).string()) == 0);
    REQUIRE(run("train --config " + write_config(d2, 9).string()) == 0);
    CHECK(slurp(d1 / "out" / "dense.scae") == slurp(d2 / "out" / "dense.scae"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("missing dataset path exits 2 and names the path") {
    const fs::path dir = fs::temp_directory_path() / "scae_cli_missing";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "bad.cfg";
    std::ofstream(cfg) << "data_dir = /no/such/corpus\nout_dir = " << (dir / "out").string()
                       << "\n";
    const std::string out = dir / "stderr.txt";
    const int status =
        std::system((cli() + " train --config " + cfg.string() + " 2>" + out).c_str());
    CHECK(WEXITSTATUS(status) == 2);
    CHECK(slurp(out).find("/no/such/corpus") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit 2, runtime failures exit 1") {
    CHECK(run("no-such-command") == 2);
    CHECK(run("train --config /definitely/missing.cfg") == 2);
    CHECK(run("sparsify /missing.scae") == 1);
    CHECK(run("eval") == 2);  // missing required positionals
}

TEST_CASE("sparsify and eval produce their contracted outputs") {
    const fs::path dir = fs::temp_directory_path() / "scae_cli_pipe";
    fs::remove_all(dir);
    const fs::path cfg = write_config(dir, 3);
    REQUIRE(run("train --config " + cfg.string()) == 0);
    REQUIRE(run("sparsify " + (dir / "out" / "dense.scae").string() + " --config " + cfg.string() +
                " --out " + (dir / "sp").string()) == 0);
    CHECK(fs::exists(dir / "sp" / "sparse.scae"));
    CHECK(fs::exists(dir / "sp" / "cost_report.csv"));

    REQUIRE(run("eval " + (dir / "sp" / "sparse.scae").string() + " data/toy --config " +
                cfg.string() + " --out " + (dir / "ev").string()) == 0);
    const std::string csv = slurp(dir / "ev" / "eval.csv");
    CHECK(csv.rfind("name,bpp_coded,bpp_est,psnr,mssim\n", 0) == 0);
    // 16 images + AVERAGE row + header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 18);
    // five columns everywhere
    size_t pos = 0;
    while (pos < csv.size()) {
        size_t nl = csv.find('\n', pos);
        if (nl == std::string::npos) break;
        const std::string line = csv.substr(pos, nl - pos);
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
        pos = nl + 1;
    }
    CHECK(csv.find("AVERAGE,") != std::string::npos);

    // empty eval dir errors
    fs::create_directories(dir / "empty");
    CHECK(run("eval " + (dir / "sp" / "sparse.scae").string() + " " + (dir / "empty").string() +
              " --config " + cfg.string() + " --out " + (dir / "ev2").string()) == 1);
    fs::remove_all(dir);
}
