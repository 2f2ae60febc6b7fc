#pragma once

#include <filesystem>
#include <string>

#include "scae/optimizer.hpp"
#include "scae/trainer.hpp"

namespace scae {

// Full run configuration. Serialized as key=value lines; parsing rejects
// unknown keys and reports errors with 1-based line numbers. to_text() /
// parse round-trips exactly.
struct RunConfig {
    CaeConfig cae;

    int epochs = 50;
    int batch_size = 8;
    uint64_t seed = 1;
    AdamConfig adam;

    Constraint constraint = Constraint::L11;
    double eta = std::numeric_limits<double>::infinity();
    Scope scope = Scope::Encoder;
    bool restart_from_init = true;

    std::string data_dir = "data/toy";
    std::string out_dir = "runs/out";

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_text(const std::string& text);

    // Applies one key=value pair; line is used for error reporting.
    void set(const std::string& key, const std::string& value, int line = 0);

    std::string to_text() const;
    void validate() const;
};

}  // namespace scae
