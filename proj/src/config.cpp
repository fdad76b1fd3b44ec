#include "channel/config.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace channel {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Raw {
    // section -> key -> (value, consumed)
    std::map<std::string, std::map<std::string, std::pair<std::string, bool>>> data;
    std::vector<std::string> errs;

    const std::string* get(const std::string& sec, const std::string& key) {
        auto s = data.find(sec);
        if (s == data.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        k->second.second = true;
        return &k->second.first;
    }
};

Raw tokenize(const std::string& text) {
    Raw raw;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                raw.errs.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            raw.data[section];  // empty sections are fine
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            raw.errs.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        if (section.empty()) {
            raw.errs.push_back("line " + std::to_string(lineno) + ": key outside any [section]");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            raw.errs.push_back("line " + std::to_string(lineno) + ": empty key or value");
            continue;
        }
        if (!raw.data[section].emplace(key, std::make_pair(val, false)).second)
            raw.errs.push_back("line " + std::to_string(lineno) + ": duplicate key [" + section +
                               "] " + key);
    }
    return raw;
}

bool parse_double(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

bool parse_int(const std::string& s, long long& out) {
    try {
        size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_bool(const std::string& s, bool& out) {
    if (s == "true" || s == "1" || s == "on") return out = true, true;
    if (s == "false" || s == "0" || s == "off") return out = false, true;
    return false;
}

bool parse_list(const std::string& s, std::vector<double>& out) {
    out.clear();
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        double x;
        if (!parse_double(trim(item), x)) return false;
        out.push_back(x);
    }
    return !out.empty();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    Raw raw = tokenize(text);
    std::vector<std::string>& errs = raw.errs;
    auto fail = [&](const std::string& msg) { errs.push_back(msg); };

    auto want_double = [&](const std::string& sec, const std::string& key, double& dst) {
        if (const std::string* v = raw.get(sec, key)) {
            if (!parse_double(*v, dst)) fail("[" + sec + "] " + key + ": not a finite number");
        }
    };
    auto want_int = [&](const std::string& sec, const std::string& key, int& dst) {
        if (const std::string* v = raw.get(sec, key)) {
            long long x;
            if (!parse_int(*v, x) || x < INT_MIN || x > INT_MAX)
                fail("[" + sec + "] " + key + ": not an integer");
            else
                dst = static_cast<int>(x);
        }
    };
    auto want_bool = [&](const std::string& sec, const std::string& key, bool& dst) {
        if (const std::string* v = raw.get(sec, key)) {
            if (!parse_bool(*v, dst)) fail("[" + sec + "] " + key + ": expected true/false");
        }
    };

    RunConfig cfg;

    // [geometry]
    std::string profile = "straight";
    double amplitude = 0.2, support = 1.0, min_width = 1e-8;
    if (const std::string* v = raw.get("geometry", "profile")) profile = *v;
    want_double("geometry", "amplitude", amplitude);
    want_double("geometry", "support", support);
    want_double("geometry", "min_width", min_width);
    if (profile != "straight" && profile != "bump")
        fail("[geometry] profile: must be 'straight' or 'bump'");

    // [flow]
    want_double("flow", "flux", cfg.flux);
    double epsilon = -1.0, dist = -1.0;
    if (const std::string* v = raw.get("flow", "epsilon")) {
        if (*v == "auto")
            cfg.epsilon_auto = true;
        else if (parse_double(*v, epsilon))
            cfg.epsilon_auto = false;
        else
            fail("[flow] epsilon: expected a number or 'auto'");
    }
    if (const std::string* v = raw.get("flow", "dist")) {
        if (*v == "auto")
            cfg.dist_auto = true;
        else if (parse_double(*v, dist))
            cfg.dist_auto = false;
        else
            fail("[flow] dist: expected a number or 'auto'");
    }
    want_bool("flow", "mollified_pi", cfg.cutoffs.mollified_pi);

    // [mesh]
    want_double("mesh", "T", cfg.T);
    want_double("mesh", "h", cfg.h);

    // [solver]
    want_double("solver", "tolerance", cfg.solver.tolerance);
    want_int("solver", "max_iterations", cfg.solver.max_iterations);
    want_double("solver", "damping", cfg.solver.initial_damping);
    want_double("solver", "min_damping", cfg.solver.min_damping);
    want_bool("solver", "oseen", cfg.solver.oseen_update);
    want_int("solver", "quad_degree", cfg.solver.quad_degree);

    // [run]
    if (const std::string* v = raw.get("run", "seed")) {
        // stoull would silently wrap negatives; insist on digits only
        const bool digits =
            !v->empty() && v->find_first_not_of("0123456789") == std::string::npos;
        try {
            if (!digits) throw std::invalid_argument("");
            cfg.seed = std::stoull(*v);
        } catch (...) {
            fail("[run] seed: not an unsigned integer");
        }
    }
    if (const std::string* v = raw.get("run", "output")) cfg.output_dir = *v;

    // command-specific
    want_int("probe", "starts", cfg.probe_starts);
    want_int("mms", "refinements", cfg.mms_refinements);
    want_double("mms", "h0", cfg.mms_h0);
    want_int("certify", "samples", cfg.certify_samples);
    if (const std::string* v = raw.get("certify", "epsilon_grid")) {
        if (!parse_list(*v, cfg.certify_epsilon_grid))
            fail("[certify] epsilon_grid: expected a comma-separated number list");
    }
    if (const std::string* v = raw.get("certify", "dist_grid")) {
        if (!parse_list(*v, cfg.certify_dist_grid))
            fail("[certify] dist_grid: expected a comma-separated number list");
    }
    want_int("constants", "samples", cfg.constants_samples);

    // unknown keys / sections
    static const std::map<std::string, std::vector<std::string>> known = {
        {"geometry", {"profile", "amplitude", "support", "min_width"}},
        {"flow", {"flux", "epsilon", "dist", "mollified_pi"}},
        {"mesh", {"T", "h"}},
        {"solver",
         {"tolerance", "max_iterations", "damping", "min_damping", "oseen", "quad_degree"}},
        {"run", {"seed", "output"}},
        {"probe", {"starts"}},
        {"mms", {"refinements", "h0"}},
        {"certify", {"samples", "epsilon_grid", "dist_grid"}},
        {"constants", {"samples"}},
    };
    for (const auto& [sec, keys] : raw.data) {
        auto it = known.find(sec);
        if (it == known.end()) {
            fail("unknown section [" + sec + "]");
            continue;
        }
        for (const auto& [key, vc] : keys)
            if (!vc.second && std::find(it->second.begin(), it->second.end(), key) ==
                                  it->second.end())
                fail("unknown key [" + sec + "] " + key);
    }

    // semantic constraints (aggregate everything before throwing)
    const bool bump = profile == "bump";
    if (bump && support <= 0.0) fail("[geometry] support: must be positive");
    if (bump && min_width <= 0.0) fail("[geometry] min_width: must be positive");
    double L = 1.0;
    bool geom_ok = true;
    try {
        cfg.geometry = bump ? ChannelGeometry::bump(amplitude, support, min_width)
                            : ChannelGeometry::straight();
        L = cfg.geometry.straight_from();
    } catch (const Error& e) {
        geom_ok = false;
        fail(std::string("[geometry] ") + e.what());
    }
    if (!std::isfinite(cfg.flux)) fail("[flow] flux: must be finite");
    if (!cfg.epsilon_auto && !(epsilon > 0.0 && epsilon < 1.0))
        fail("[flow] epsilon: must lie in (0, 1)");
    if (!cfg.dist_auto && geom_ok && !(dist > L))
        fail("[flow] dist: must exceed the straight-from half-width L = " + std::to_string(L));
    if (!(cfg.h > 0.0)) fail("[mesh] h: must be positive");
    if (geom_ok && !(cfg.T >= L + 1.0))
        fail("[mesh] T: must satisfy T >= L + 1 (channel straight beyond L = " +
             std::to_string(L) + ")");
    if (!(cfg.solver.tolerance > 0.0)) fail("[solver] tolerance: must be positive");
    if (cfg.solver.max_iterations < 1) fail("[solver] max_iterations: must be >= 1");
    if (!(cfg.solver.initial_damping > 0.0 && cfg.solver.initial_damping <= 1.0))
        fail("[solver] damping: must lie in (0, 1]");
    if (!(cfg.solver.min_damping > 0.0 && cfg.solver.min_damping <= cfg.solver.initial_damping))
        fail("[solver] min_damping: must lie in (0, damping]");
    if (cfg.solver.quad_degree < 2 || cfg.solver.quad_degree > 12)
        fail("[solver] quad_degree: must lie in [2, 12]");
    if (cfg.probe_starts < 2 || cfg.probe_starts > 3) fail("[probe] starts: must be 2 or 3");
    if (cfg.mms_refinements < 2) fail("[mms] refinements: must be >= 2");
    if (!(cfg.mms_h0 > 0.0)) fail("[mms] h0: must be positive");
    if (cfg.certify_samples < 1) fail("[certify] samples: must be >= 1");
    if (cfg.constants_samples < 1) fail("[constants] samples: must be >= 1");
    for (double e : cfg.certify_epsilon_grid)
        if (!(e > 0.0 && e < 1.0)) fail("[certify] epsilon_grid: entries must lie in (0, 1)");
    for (double d : cfg.certify_dist_grid)
        if (geom_ok && !(d > L)) fail("[certify] dist_grid: entries must exceed L");

    if (!errs.empty()) {
        std::string msg = "invalid configuration (" + std::to_string(errs.size()) + " problems):";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw ValidationError(msg);
    }

    // resolve "auto" cutoffs against the validated geometry and mesh
    const CutoffParams policy = CarrierParams::default_policy(cfg.geometry, cfg.h);
    cfg.cutoffs.epsilon = cfg.epsilon_auto ? policy.epsilon : epsilon;
    cfg.cutoffs.dist = cfg.dist_auto ? policy.dist : dist;
    if (cfg.certify_epsilon_grid.empty()) cfg.certify_epsilon_grid = {0.4, 0.2, 0.1};
    if (cfg.certify_dist_grid.empty()) cfg.certify_dist_grid = {2.0 * L, 4.0 * L};
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace channel
