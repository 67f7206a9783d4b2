#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontera/dynamics.hpp"
#include "frontera/kernels.hpp"

namespace frontera {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : ConfigError {
    using ConfigError::ConfigError;
};
struct ValidationError : ConfigError {
    using ConfigError::ConfigError;
};

/// Flat `key = value` configuration with dotted sections. One file per run;
/// unknown keys are preserved so sweeps can carry scenario metadata.
class Config {
public:
    static Config from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("config: cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_string(ss.str());
    }

    static Config from_string(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r\n");
                if (b == std::string::npos) return std::string();
                const auto e = s.find_last_not_of(" \t\r\n");
                return s.substr(b, e - b + 1);
            };
            const std::string t = trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ParseError("config: line " + std::to_string(lineno) + " is not key = value");
            const std::string key = trim(t.substr(0, eq));
            const std::string val = trim(t.substr(eq + 1));
            if (key.empty())
                throw ParseError("config: line " + std::to_string(lineno) + " has an empty key");
            c.kv_[key] = val;
        }
        return c;
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw ValidationError("config: missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        return parse_double(key, it->second);
    }

    double require_double(const std::string& key) const {
        return parse_double(key, require_string(key));
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        return parse_int(key, it->second);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
        if (v == "off" || v == "false" || v == "0" || v == "no") return false;
        throw ValidationError("config: key '" + key + "' must be a boolean");
    }

    std::vector<double> get_double_list(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return {};
        std::vector<double> out;
        std::istringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(parse_double(key, tok));
        return out;
    }

    /// FNV-1a 64 over the canonical (sorted) key=value listing.
    std::string hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](const std::string& s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 1099511628211ull;
            }
        };
        for (const auto& [k, v] : kv_) {
            mix(k);
            mix("=");
            mix(v);
            mix("\n");
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    static double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
            if (pos != v.size()) throw std::invalid_argument("trailing");
            return x;
        } catch (const std::exception&) {
            throw ValidationError("config: key '" + key + "' is not a number: '" + v + "'");
        }
    }
    static int parse_int(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const int x = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing");
            return x;
        } catch (const std::exception&) {
            throw ValidationError("config: key '" + key + "' is not an integer: '" + v + "'");
        }
    }

    std::map<std::string, std::string> kv_;
};

/// Builds the kernel named by `<prefix>.family`, with per-family parameters.
inline KernelSpec build_kernel(const Config& c, const std::string& prefix) {
    const std::string fam = c.get_string(prefix + ".family", "uniform");
    if (fam == "uniform" || fam == "uniform_asymmetric") {
        return KernelSpec::uniform_asymmetric(c.get_double(prefix + ".lo", -0.5),
                                              c.get_double(prefix + ".hi", 0.5));
    }
    if (fam == "asymmetric_laplace") {
        return KernelSpec::asymmetric_laplace(c.get_double(prefix + ".rate_left", 1.0),
                                              c.get_double(prefix + ".rate_right", 1.0),
                                              c.get_double(prefix + ".weight_left", 0.5));
    }
    if (fam == "gaussian" || fam == "shifted_gaussian") {
        return KernelSpec::shifted_gaussian(c.get_double(prefix + ".mean", 0.0),
                                            c.get_double(prefix + ".stddev", 1.0));
    }
    if (fam == "tabulated") {
        const std::string path = c.require_string(prefix + ".csv");
        std::ifstream in(path);
        if (!in) throw ValidationError("config: cannot open kernel table " + path);
        std::vector<std::pair<double, double>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == 'z' || line[0] == '#') continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
        }
        if (rows.size() < 2) throw ValidationError("config: kernel table needs >= 2 rows");
        return KernelSpec::tabulated(rows, rows[1].first - rows[0].first);
    }
    throw ValidationError("config: unknown kernel family '" + fam + "' for " + prefix);
}

/// Coefficient profile: constant, cosine (base + amplitude cos(2 pi x / period)),
/// or a csv table.
inline std::vector<double> build_coefficient(const Config& c, const std::string& prefix,
                                             const Grid1D& grid, double fallback) {
    std::vector<double> out(static_cast<std::size_t>(grid.n));
    const std::string kind = c.get_string(prefix + ".kind", "constant");
    if (kind == "constant") {
        const double v = c.get_double(prefix + ".value", fallback);
        std::fill(out.begin(), out.end(), v);
    } else if (kind == "cosine") {
        const double base = c.get_double(prefix + ".base", fallback);
        const double amp = c.get_double(prefix + ".amplitude", 0.0);
        const double period = c.get_double(prefix + ".period", 1.0);
        if (!(period > 0.0))
            throw ValidationError("config: " + prefix + ".period must be positive");
        for (int i = 0; i < grid.n; ++i)
            out[static_cast<std::size_t>(i)] =
                base + amp * std::cos(2.0 * M_PI * grid.center(i) / period);
    } else if (kind == "csv") {
        const std::string path = c.require_string(prefix + ".csv");
        std::ifstream in(path);
        if (!in) throw ValidationError("config: cannot open coefficient table " + path);
        std::vector<double> xs, vs;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == 'x' || line[0] == '#') continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            xs.push_back(std::stod(line.substr(0, comma)));
            vs.push_back(std::stod(line.substr(comma + 1)));
        }
        if (xs.size() < 2) throw ValidationError("config: coefficient table needs >= 2 rows");
        for (int i = 0; i < grid.n; ++i) {
            const double x = grid.center(i);
            if (x <= xs.front()) {
                out[static_cast<std::size_t>(i)] = vs.front();
            } else if (x >= xs.back()) {
                out[static_cast<std::size_t>(i)] = vs.back();
            } else {
                auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const std::size_t j = static_cast<std::size_t>(it - xs.begin());
                const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                out[static_cast<std::size_t>(i)] = vs[j - 1] * (1.0 - w) + vs[j] * w;
            }
        }
    } else {
        throw ValidationError("config: unknown coefficient kind '" + kind + "' for " + prefix);
    }
    return out;
}

inline InitialProfile build_initial(const Config& c, const std::string& prefix, double h0) {
    InitialProfile p;
    const std::string kind = c.get_string(prefix + ".kind", "bump");
    p.amplitude = c.get_double(prefix + ".amplitude", 1.0);
    if (p.amplitude < 0.0)
        throw ValidationError("config: " + prefix + ".amplitude must be >= 0, violates (H3)");
    if (kind == "bump") {
        p.kind = InitialProfile::Kind::Bump;
    } else if (kind == "constant") {
        p.kind = InitialProfile::Kind::Constant;
    } else if (kind == "tabulated") {
        p.kind = InitialProfile::Kind::Tabulated;
        const std::string path = c.require_string(prefix + ".csv");
        std::ifstream in(path);
        if (!in) throw ValidationError("config: cannot open profile table " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == 'x' || line[0] == '#') continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            const double x = std::stod(line.substr(0, comma));
            const double v = std::stod(line.substr(comma + 1));
            if (v < 0.0)
                throw ValidationError("config: " + prefix + " has a negative sample, violates (H3)");
            if (v > 0.0 && std::abs(x) > h0)
                throw ValidationError("config: " + prefix + " supported outside [-h0,h0], violates (H3)");
            p.xs.push_back(x);
            p.vals.push_back(v);
        }
        if (p.xs.size() < 2) throw ValidationError("config: profile table needs >= 2 rows");
    } else {
        throw ValidationError("config: unknown initial profile kind '" + kind + "'");
    }
    return p;
}

/// Full dynamic-run configuration. Validation cites the violated hypothesis.
inline SimConfig build_sim_config(const Config& c) {
    SimConfig cfg;
    cfg.xmin = c.get_double("grid.xmin", -6.0);
    cfg.xmax = c.get_double("grid.xmax", 6.0);
    cfg.n = c.get_int("grid.n", 400);
    if (!(cfg.xmax > cfg.xmin)) throw ValidationError("config: grid.xmax must exceed grid.xmin");
    if (cfg.n < 3) throw ValidationError("config: grid.n must be at least 3");

    cfg.J1 = build_kernel(c, "kernel1");
    cfg.J2 = c.has("kernel2.family") ? build_kernel(c, "kernel2") : cfg.J1;
    const double exp_rate = c.get_double("kernel.exp_rate", 0.5);
    for (const auto& [name, k] : {std::pair<const char*, const KernelSpec*>{"kernel1", &cfg.J1},
                                  {"kernel2", &cfg.J2}}) {
        const KernelValidationReport r = k->validate(exp_rate);
        if (!r.passed)
            throw ValidationError(std::string("config: ") + name + " fails " + r.detail);
    }

    cfg.d1 = c.get_double("model.d1", 1.0);
    cfg.d2 = c.get_double("model.d2", 1.0);
    if (cfg.d1 < 0.0 || cfg.d2 < 0.0)
        throw ValidationError("config: dispersal rates d1, d2 must be >= 0");
    cfg.mu = c.get_double("model.mu", 0.0);
    if (cfg.mu < 0.0) throw ValidationError("config: model.mu must be >= 0");
    cfg.h0 = c.get_double("model.h0", 1.0);
    if (!(cfg.h0 > 0.0)) throw ValidationError("config: model.h0 must be positive, violates (H3)");
    cfg.Scap = c.get_double("model.Scap", 1.0);
    if (!(cfg.Scap > 0.0)) throw ValidationError("config: model.Scap must be positive");

    const Grid1D grid = cfg.grid();
    cfg.a = build_coefficient(c, "coef.a", grid, 0.0);
    cfg.b = build_coefficient(c, "coef.b", grid, 0.0);
    cfg.gamma = build_coefficient(c, "coef.gamma", grid, 1.0);
    if (c.has("coef.period")) cfg.period = c.get_double("coef.period", 1.0);
    CoefficientSet coefs{cfg.a, cfg.b, cfg.gamma, cfg.period};
    const std::string err = check_coefficients(coefs, grid);
    if (!err.empty()) throw ValidationError("config: " + err);

    const std::string inc = c.get_string("incidence.kind", "bilinear");
    if (inc == "bilinear") {
        cfg.incidence = IncidenceModel::bilinear(c.get_double("incidence.beta0", 1.0));
    } else if (inc == "saturated") {
        cfg.incidence = IncidenceModel::saturated(c.get_double("incidence.beta0", 1.0),
                                                  c.get_double("incidence.alpha_sat", 0.0),
                                                  c.get_double("incidence.kappa_sat", 0.0));
    } else {
        throw ValidationError("config: unknown incidence kind '" + inc + "', violates (H1)");
    }

    cfg.S0 = build_initial(c, "init.S0", cfg.h0);
    cfg.I0 = build_initial(c, "init.I0", cfg.h0);
    cfg.T = c.get_double("sim.T", 40.0);
    if (!(cfg.T > 0.0)) throw ValidationError("config: sim.T must be positive");
    cfg.cfl_safety = c.get_double("sim.cfl_safety", 0.5);
    if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
        throw ValidationError("config: sim.cfl_safety must lie in (0,1]");
    cfg.record_every = c.get_int("sim.record_every", 1);
    cfg.clamp_enabled = c.get_bool("sim.clamp", true);

    const std::string conv = c.get_string("eigen.convention", "perron");
    if (conv != "perron")
        throw ValidationError("config: eigen.convention supports only 'perron'");
    return cfg;
}

inline DriftBoundary build_drift_boundary(const Config& c) {
    const std::string v = c.get_string("spectral.drift_boundary", "conservative");
    if (v == "conservative") return DriftBoundary::Conservative;
    if (v == "dirichlet_leak") return DriftBoundary::DirichletLeak;
    throw ValidationError("config: spectral.drift_boundary must be conservative or dirichlet_leak");
}

}  // namespace frontera
