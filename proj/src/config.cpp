#include "stefan/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stefan/errors.hpp"

namespace stefan {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& s) {
    bool prev_space = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        // trailing comments need whitespace before the marker so values like
        // "path#1" survive; full-line comments start at column 0
        if ((c == '#' || c == ';') && prev_space) return s.substr(0, i);
        prev_space = std::isspace(static_cast<unsigned char>(c)) != 0;
    }
    return s;
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& name) {
    ConfigFile cfg;
    cfg.name_ = name;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw validation_error(name + ":" + std::to_string(lineno) +
                                       ": unterminated section header");
            section = trim(body.substr(1, body.size() - 2));
            if (section.empty())
                throw validation_error(name + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw validation_error(name + ":" + std::to_string(lineno) +
                                   ": expected 'key = value', got '" + body + "'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw validation_error(name + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw validation_error(name + ":" + std::to_string(lineno) +
                                   ": key '" + key + "' outside any [section]");
        auto& sec = cfg.sections_[section];
        if (sec.count(key))
            throw validation_error(name + ":" + std::to_string(lineno) + ": duplicate key '" +
                                   key + "' in [" + section + "] (first at line " +
                                   std::to_string(sec[key].line) + ")");
        sec[key] = Entry{value, lineno, false};
    }
    return cfg;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

const ConfigFile::Entry& ConfigFile::require(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e)
        throw validation_error(name_ + ": missing required key '" + key + "' in [" + section + "]");
    e->consumed = true;
    return *e;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    return require(section, key).value;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const Entry& e = require(section, key);
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0' || !std::isfinite(v))
        throw validation_error(name_ + ":" + std::to_string(e.line) + ": '" + key +
                               "' is not a finite number: '" + e.value + "'");
    return v;
}

int ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const Entry& e = require(section, key);
    char* end = nullptr;
    const long v = std::strtol(e.value.c_str(), &end, 10);
    if (end == e.value.c_str() || *end != '\0')
        throw validation_error(name_ + ":" + std::to_string(e.line) + ": '" + key +
                               "' is not an integer: '" + e.value + "'");
    return static_cast<int>(v);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& dflt) const {
    return has(section, key) ? get_string(section, key) : dflt;
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double dflt) const {
    return has(section, key) ? get_double(section, key) : dflt;
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int dflt) const {
    return has(section, key) ? get_int(section, key) : dflt;
}

std::vector<std::string> ConfigFile::unconsumed() const {
    std::vector<std::string> out;
    for (const auto& [sec, keys] : sections_)
        for (const auto& [key, e] : keys)
            if (!e.consumed)
                out.push_back(name_ + ":" + std::to_string(e.line) + ": [" + sec + "] " + key);
    return out;
}

void Scenario::validate() const {
    material.validate();
    auto fail = [](const std::string& msg) { throw validation_error(msg); };
    if (!(duration > 0.0)) fail("trajectory duration must be positive");
    if (!(omega > 0.0)) fail("omega must be positive");
    if (!(gamma_start > material.solid.boundary) || !(gamma_start < material.liquid.boundary))
        fail("gamma_start outside the open domain");
    if (!(gamma_end > material.solid.boundary) || !(gamma_end < material.liquid.boundary))
        fail("gamma_end outside the open domain");
    if (series_terms < 2) fail("series truncation must be at least 2");
    if (kernel_points < 2) fail("kernel_points must be at least 2");
    if (kernel_time_samples < 2) fail("kernel_time_samples must be at least 2");
    if (threads < 1) fail("threads must be at least 1");
    if (!(mu <= 0.0)) fail("target decay rate mu must be <= 0");
    if (!(nu <= 0.0)) fail("boundary gain nu must be <= 0");
    if (quadrature_step < 0.0) fail("quadrature_step must be >= 0");
    if (cells_per_phase < 4) fail("cells_per_phase must be at least 4");
    if (!(t_end > 0.0)) fail("t_end must be positive");
    if (!(output_interval > 0.0)) fail("output_interval must be positive");
    if (!(dt_safety > 0.0) || dt_safety > 1.0) fail("dt_safety must be in (0, 1]");
    if (!(guard_band > 0.0)) fail("guard_band must be positive");
    if (planner_order != -1 && planner_order < 4) fail("planner_order must be -1 (auto) or >= 4");
}

int Scenario::resolved_planner_order() const {
    if (planner_order > 0) return planner_order;
    return coefficient_depth() + 2;
}

Scenario load_scenario(const ConfigFile& cfg) {
    Scenario s;
    auto phase = [&](const char* sec, PhaseParams& p) {
        p.conductivity = cfg.get_double(sec, "conductivity", p.conductivity);
        p.density = cfg.get_double(sec, "density", p.density);
        p.specific_heat = cfg.get_double(sec, "specific_heat", p.specific_heat);
        p.boundary = cfg.get_double(sec, "boundary", p.boundary);
    };
    phase("solid", s.material.solid);
    phase("liquid", s.material.liquid);
    s.material.melting_temperature =
        cfg.get_double("interface", "melting_temperature", s.material.melting_temperature);
    s.material.latent_heat = cfg.get_double("interface", "latent_heat", s.material.latent_heat);
    s.material.melt_density = cfg.get_double("interface", "melt_density", s.material.melt_density);

    s.gamma_start = cfg.get_double("trajectory", "gamma_start", s.gamma_start);
    s.gamma_end = cfg.get_double("trajectory", "gamma_end", s.gamma_end);
    s.duration = cfg.get_double("trajectory", "duration", s.duration);
    s.y1_start = cfg.get_double("trajectory", "gradient_start", s.y1_start);
    s.y1_end = cfg.get_double("trajectory", "gradient_end", s.y1_end);
    s.omega = cfg.get_double("trajectory", "omega", s.omega);
    s.planner_order = cfg.get_int("trajectory", "planner_order", s.planner_order);

    s.series_terms = cfg.get_int("series", "truncation", s.series_terms);

    s.kernel_points = cfg.get_int("kernel", "points", s.kernel_points);
    // grid may be given by point count or by step width; the step must tile
    // the full phase extent exactly
    const double kdelta = cfg.get_double("kernel", "delta", 0.0);
    if (kdelta != 0.0) {
        const double extent = s.material.domain_extent();
        const double ratio = extent / kdelta;
        if (kdelta < 0.0 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio ||
            std::round(ratio) < 1.0)
            throw validation_error(cfg.name() + ": [kernel] delta = " + std::to_string(kdelta) +
                                   " does not divide the phase extent " + std::to_string(extent));
        s.kernel_points = static_cast<int>(std::round(ratio)) + 1;
    }
    s.kernel_time_samples = cfg.get_int("kernel", "time_samples", s.kernel_time_samples);
    const std::string scheme = cfg.get_string("kernel", "scheme", "midpoint");
    if (scheme == "midpoint") {
        s.kernel_trapezoid = false;
    } else if (scheme == "trapezoid") {
        s.kernel_trapezoid = true;
    } else {
        throw validation_error(cfg.name() + ": [kernel] scheme must be 'midpoint' or 'trapezoid', got '" +
                               scheme + "'");
    }
    s.threads = cfg.get_int("kernel", "threads", s.threads);

    s.mu = cfg.get_double("controller", "mu", s.mu);
    s.nu = cfg.get_double("controller", "nu", s.nu);
    s.quadrature_step = cfg.get_double("controller", "quadrature_step", s.quadrature_step);

    s.cells_per_phase = cfg.get_int("simulator", "cells_per_phase", s.cells_per_phase);
    s.t_end = cfg.get_double("simulator", "t_end", s.t_end);
    s.output_interval = cfg.get_double("simulator", "output_interval", s.output_interval);
    s.dgamma0 = cfg.get_double("simulator", "dgamma0", s.dgamma0);
    s.dgamma_dot0 = cfg.get_double("simulator", "dgamma_dot0", s.dgamma_dot0);
    s.dt_safety = cfg.get_double("simulator", "dt_safety", s.dt_safety);
    s.guard_band = cfg.get_double("simulator", "guard_band", s.guard_band);

    const auto leftovers = cfg.unconsumed();
    if (!leftovers.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& l : leftovers) msg += "\n  " + l;
        throw validation_error(msg);
    }
    s.validate();
    return s;
}

} // namespace stefan
