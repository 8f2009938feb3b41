#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stefan/material.hpp"

namespace stefan {

// Minimal INI reader: [section], key = value, '#'/';' comments (full-line or
// trailing). Keys are tracked so a consumer can reject entries it never read;
// diagnostics carry file and line.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& name);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    int get_int(const std::string& section, const std::string& key) const;

    // Defaulted variants; absent keys are not an error and are marked consumed.
    std::string get_string(const std::string& section, const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& section, const std::string& key, double dflt) const;
    int get_int(const std::string& section, const std::string& key, int dflt) const;

    // Every key that was never fetched, as "file:line: [section] key".
    std::vector<std::string> unconsumed() const;
    const std::string& name() const { return name_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };
    std::string name_;
    std::map<std::string, std::map<std::string, Entry>> sections_;

    const Entry* find(const std::string& section, const std::string& key) const;
    const Entry& require(const std::string& section, const std::string& key) const;
};

// Everything a run needs, resolved and validated. Field defaults reproduce the
// GaAs growth scenario the reports in the repository refer to.
struct Scenario {
    StefanMaterial material = gaas_material();

    // Flat-output plan: interface ramp gamma_start -> gamma_end over `duration`
    // and solid interface gradient ramp y1_start -> y1_end, both smoothed by
    // the same bump transition of exponent omega.
    double gamma_start = 0.200;       // m
    double gamma_end = 0.300;         // m
    double duration = 90000.0;        // s (25 h)
    double y1_start = 17.0;           // K/m, solid temperature gradient at the front
    double y1_end = 17.0;             // K/m
    double omega = 1.1;               // bump exponent; Gevrey order 1 + 1/omega
    int planner_order = -1;           // derivative stack depth; -1 = auto from kernel needs

    int series_terms = 20;            // spatial series truncation M

    int kernel_points = 81;           // N_sigma, sigma-nodes across the full extent
    int kernel_time_samples = 256;    // tabulated kernel instants across [0, duration]
    bool kernel_trapezoid = false;    // diagnostic scheme variant, midpoint is the reference
    int threads = 1;

    double mu = -1.0e-2;              // target decay rate [1/s]
    double nu = 0.0;                  // boundary Robin gain
    double quadrature_step = 0.0;     // controller integral step [m]; 0 = kernel grid step

    int cells_per_phase = 41;
    double t_end = 90000.0;           // s
    double output_interval = 300.0;   // s
    double dgamma0 = 0.010;           // initial interface offset [m]
    double dgamma_dot0 = -3.0e-3 / 3600.0;  // initial interface rate offset [m/s]
    double dt_safety = 0.5;           // fraction of the explicit-flux stability step
    double guard_band = 0.005;        // m, minimum front distance to either boundary

    void validate() const;

    // Planner depth actually used (resolves the -1 default):
    // kernel tables need coefficient stacks to order kernel_points-1, which the
    // series recursion pushes back to the flat outputs by ceil(M/2)+1.
    int resolved_planner_order() const;

    // Derivative depth of the leading series coefficient; what a
    // ReferenceField supporting the kernel tables must be built with.
    int coefficient_depth() const { return (kernel_points - 1) + (series_terms + 1) / 2; }
};

Scenario load_scenario(const ConfigFile& cfg);

} // namespace stefan
