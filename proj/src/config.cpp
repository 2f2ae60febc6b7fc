#include "scae/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace scae {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

long parse_int(const std::string& v, int line) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') throw ConfigError("expected an integer, got '" + v + "'", line);
    return x;
}

double parse_f64(const std::string& v, int line) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') throw ConfigError("expected a number, got '" + v + "'", line);
    return x;
}

uint64_t parse_u64(const std::string& v, int line) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("expected an unsigned integer, got '" + v + "'", line);
    return x;
}

// "c:k:s,c:k:s,..."
std::vector<ConvSpec> parse_encoder(const std::string& v, int line) {
    std::vector<ConvSpec> spec;
    size_t pos = 0;
    while (pos < v.size()) {
        size_t comma = v.find(',', pos);
        if (comma == std::string::npos) comma = v.size();
        const std::string item = trim(v.substr(pos, comma - pos));
        int c = 0, k = 0, s = 0;
        if (std::sscanf(item.c_str(), "%d:%d:%d", &c, &k, &s) != 3)
            throw ConfigError("bad encoder layer '" + item + "' (expected channels:kernel:stride)",
                              line);
        spec.push_back(ConvSpec{c, k, s});
        pos = comma + 1;
    }
    if (spec.empty()) throw ConfigError("encoder spec is empty", line);
    return spec;
}

std::string fmt_f64(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value, int line) {
    if (key == "patch_size") cae.patch_size = int(parse_int(value, line));
    else if (key == "encoder") cae.encoder = parse_encoder(value, line);
    else if (key == "latent_channels") cae.latent_channels = int(parse_int(value, line));
    else if (key == "quant_bits") cae.quant_bits = int(parse_int(value, line));
    else if (key == "lambda") cae.lambda_entropy = parse_f64(value, line);
    else if (key == "huber_beta") cae.huber_beta = parse_f64(value, line);
    else if (key == "epochs") epochs = int(parse_int(value, line));
    else if (key == "batch_size") batch_size = int(parse_int(value, line));
    else if (key == "seed") seed = parse_u64(value, line);
    else if (key == "lr") adam.lr = parse_f64(value, line);
    else if (key == "beta1") adam.beta1 = parse_f64(value, line);
    else if (key == "beta2") adam.beta2 = parse_f64(value, line);
    else if (key == "eps") adam.eps = parse_f64(value, line);
    else if (key == "constraint") constraint = constraint_from_string(value);
    else if (key == "eta") eta = parse_f64(value, line);
    else if (key == "scope") scope = scope_from_string(value);
    else if (key == "restart") {
        if (value == "init") restart_from_init = true;
        else if (value == "projected") restart_from_init = false;
        else throw ConfigError("restart must be 'init' or 'projected'", line);
    } else if (key == "data_dir") data_dir = value;
    else if (key == "out_dir") out_dir = value;
    else throw ConfigError("unknown key '" + key + "'", line);
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        ++line_no;
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value", line_no);
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
        if (pos > text.size()) break;
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return from_text(text);
}

std::string RunConfig::to_text() const {
    std::string enc;
    for (size_t i = 0; i < cae.encoder.size(); ++i) {
        if (i) enc += ",";
        enc += std::to_string(cae.encoder[i].out_channels) + ":" +
               std::to_string(cae.encoder[i].kernel) + ":" + std::to_string(cae.encoder[i].stride);
    }
    std::string out;
    out += "patch_size = " + std::to_string(cae.patch_size) + "\n";
    out += "encoder = " + enc + "\n";
    out += "latent_channels = " + std::to_string(cae.latent_channels) + "\n";
    out += "quant_bits = " + std::to_string(cae.quant_bits) + "\n";
    out += "lambda = " + fmt_f64(cae.lambda_entropy) + "\n";
    out += "huber_beta = " + fmt_f64(cae.huber_beta) + "\n";
    out += "epochs = " + std::to_string(epochs) + "\n";
    out += "batch_size = " + std::to_string(batch_size) + "\n";
    out += "seed = " + std::to_string(seed) + "\n";
    out += "lr = " + fmt_f64(adam.lr) + "\n";
    out += "beta1 = " + fmt_f64(adam.beta1) + "\n";
    out += "beta2 = " + fmt_f64(adam.beta2) + "\n";
    out += "eps = " + fmt_f64(adam.eps) + "\n";
    out += std::string("constraint = ") + to_string(constraint) + "\n";
    out += "eta = " + fmt_f64(eta) + "\n";
    out += std::string("scope = ") + to_string(scope) + "\n";
    out += std::string("restart = ") + (restart_from_init ? "init" : "projected") + "\n";
    out += "data_dir = " + data_dir + "\n";
    out += "out_dir = " + out_dir + "\n";
    return out;
}

void RunConfig::validate() const {
    cae.validate();
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (adam.lr <= 0.0) throw ConfigError("lr must be positive");
    if (adam.beta1 < 0.0 || adam.beta1 >= 1.0) throw ConfigError("beta1 must be in [0,1)");
    if (adam.beta2 < 0.0 || adam.beta2 >= 1.0) throw ConfigError("beta2 must be in [0,1)");
    if (adam.eps <= 0.0) throw ConfigError("eps must be positive");
    if (eta < 0.0) throw ConfigError("eta must be >= 0");
}

}  // namespace scae
