#include "parobs/presets.hpp"

#include "parobs/common.hpp"

namespace parobs::presets {

using nlohmann::json;

namespace {

// Stationary 1D profile 0.5*x_+^2: F = trace, f = -1, free boundary at x = 0.
const char* kStationary1d = R"JSON({
  "name": "stationary_1d",
  "problem": {
    "kind": "solve",
    "dim": 1,
    "operator": {"kind": "linear", "matrix": [[1.0]]},
    "domain": {"extent": [[-1.0, 1.0]], "t_range": [0.0, 0.0625]},
    "source": "-1",
    "c0": 1.0,
    "boundary": "0.5*max(x,0)^2",
    "initial": "0.5*max(x,0)^2"
  },
  "discretization": {"h": 0.00390625, "dt_factor": 1.0},
  "penalty": {"epsilons": [0.01, 0.001, 0.0001], "newton_tol": 1e-10},
  "solver": {"compare_direct": true, "snapshot_count": 33},
  "analyses": [
    {"type": "exact_error", "expression": "0.5*max(x,0)^2", "tol": 0.002, "min_value_floor": -1e-8},
    {"type": "growth", "center": [0.0, 0.046875],
     "radii": [0.015625, 0.03125, 0.0625, 0.125],
     "slope_range": [1.9, 2.1], "C_range": [0.45, 0.55], "c_range": [0.45, 0.55]},
    {"type": "blowup", "center": [0.0, 0.046875], "r0": 0.125, "rho": 0.70710678118654752,
     "K": 3, "expect": "Regular", "a_range": [0.45, 0.55]},
    {"type": "envelope", "quantity": "min_second_diff", "center": [0.0, 0.046875],
     "radii": [0.015625, 0.03125, 0.0625, 0.125]},
    {"type": "envelope", "quantity": "max_dt", "center": [0.0, 0.046875],
     "radii": [0.015625, 0.03125, 0.0625, 0.125]}
  ],
  "output_dir": "out/stationary_1d",
  "seed": 1
})JSON";

// Travelling wave u(x,t) = w(x+t), w(s) = e^s - 1 - s on s > 0; free boundary
// x = -t, unit wave speed.
const char* kTravellingWave = R"JSON({
  "name": "travelling_wave",
  "problem": {
    "kind": "solve",
    "dim": 1,
    "operator": {"kind": "linear", "matrix": [[1.0]]},
    "domain": {"extent": [[-2.0, 2.0]], "t_range": [0.0, 1.0]},
    "source": "-1",
    "c0": 1.0,
    "boundary": "exp(max(x+t,0))-1-max(x+t,0)",
    "initial": "exp(max(x,0))-1-max(x,0)"
  },
  "discretization": {"h": 0.0078125, "dt_factor": 2.0},
  "penalty": {"epsilons": [0.01, 0.001, 6.103515625e-05], "newton_tol": 1e-10},
  "solver": {"compare_direct": true, "snapshot_count": 33},
  "analyses": [
    {"type": "exact_error", "expression": "exp(max(x+t,0))-1-max(x+t,0)", "tol": 0.005,
     "min_value_floor": -1e-8},
    {"type": "time_graph", "lipschitz_range": [0.85, 1.15],
     "linear_check": {"x_range": [-0.9, -0.1], "slope": -1.0, "intercept": 0.0, "tol": 0.015625}},
    {"type": "growth", "center": [-0.5, 0.5], "radii": [0.0625, 0.125, 0.25],
     "slope_range": [1.9, 2.1], "c_min": 0.2833},
    {"type": "density", "center": [-0.5, 0.5], "radii": [0.125, 0.25, 0.5],
     "range": [0.45, 0.55], "check_smallest": 2},
    {"type": "blowup", "center": [-0.5, 0.5], "r0": 0.5, "rho": 0.5, "K": 3,
     "expect": "Regular", "a_range": [0.45, 0.55], "e_target": [1.0], "e_tol": 0.02},
    {"type": "gradient_dominance", "mode": "time_over_gradient", "center": [-0.5, 0.5],
     "r": 0.25, "c_range": [0.9, 1.1]},
    {"type": "envelope", "quantity": "min_second_diff", "center": [-0.5, 0.5],
     "radii": [0.0625, 0.125, 0.25, 0.5]},
    {"type": "envelope", "quantity": "max_dt", "center": [-0.5, 0.5],
     "radii": [0.0625, 0.125, 0.25, 0.5]},
    {"type": "regularity", "center": [0.0, 0.5], "r": 0.5, "variant": "Qminus"}
  ],
  "output_dir": "out/travelling_wave",
  "seed": 1
})JSON";

// Planted singular profile 0.5*x1^2 in 2D: blow-up is x^T diag(1/2, 0) x.
const char* kSingular2d = R"JSON({
  "name": "singular_2d",
  "problem": {
    "kind": "planted",
    "dim": 2,
    "operator": {"kind": "linear", "matrix": [[1.0, 0.0], [0.0, 1.0]]},
    "domain": {"extent": [[-1.0, 1.0], [-1.0, 1.0]], "t_range": [-1.0, 1.0]},
    "planted": "0.5*x1^2"
  },
  "discretization": {"h": 0.00390625, "dt": 0.25},
  "analyses": [
    {"type": "blowup", "center": [0.0, 0.0, 0.0], "r0": 0.5, "rho": 0.5, "K": 3,
     "expect": "Singular", "A_target": [[0.5, 0.0], [0.0, 0.0]], "A_tol": 0.02},
    {"type": "density", "center": [0.0, 0.0, 0.0], "radii": [0.125, 0.25, 0.5],
     "max_smallest": 0.1},
    {"type": "cone_test", "x0": [0.0, 0.0], "e0": [1.0, 0.0], "theta_deg": 60.0,
     "expect": true, "exclude_radius": 0.02}
  ],
  "output_dir": "out/singular_2d",
  "seed": 1
})JSON";

// Family of seeded positive solves for the Harnack ratio measurements.
const char* kHarnackFamily = R"JSON({
  "name": "harnack_family",
  "problem": {
    "kind": "solve",
    "dim": 1,
    "operator": {"kind": "pucci_diagonal", "lambda": 1.0, "Lambda": 2.0},
    "domain": {"extent": [[-1.0, 1.0]], "t_range": [0.0, 1.0]},
    "source": "-1",
    "c0": 1.0,
    "boundary": "1.5",
    "initial": "1.5"
  },
  "discretization": {"h": 0.015625, "dt_factor": 1.0},
  "penalty": {"epsilons": [0.01], "newton_tol": 1e-10},
  "solver": {"compare_direct": false, "snapshot_count": 17},
  "analyses": [
    {"type": "verify_ellipticity", "samples": 200},
    {"type": "harnack_suite", "seeds": 20, "center": [0.0, 0.5], "r": 0.4, "C0": 1.0,
     "p": 0.5, "deltas": [0.05, 0.1, 0.2], "refine": true, "stability_tol": 0.2}
  ],
  "output_dir": "out/harnack_family",
  "seed": 1
})JSON";

struct Preset {
    const char* name;
    const char* text;
    const char* blurb;
};

const Preset kPresets[] = {
    {"stationary_1d", kStationary1d,
     "stationary exact profile 0.5*x_+^2 (F = trace, f = -1), growth and blow-up checks"},
    {"travelling_wave", kTravellingWave,
     "exact wave w(x+t) = e^(x+t)-1-(x+t), boundary graph, growth, classification"},
    {"singular_2d", kSingular2d,
     "planted 2D singular profile 0.5*x1^2, quadratic blow-up and zero density"},
    {"harnack_family", kHarnackFamily,
     "20 seeded positive diagonal-Pucci solves, Harnack ratio and delta-exponent fits"},
};

} // namespace

std::vector<std::string> names() {
    std::vector<std::string> out;
    for (const auto& p : kPresets) out.push_back(p.name);
    return out;
}

bool has(const std::string& name) {
    for (const auto& p : kPresets)
        if (name == p.name) return true;
    return false;
}

std::string description(const std::string& name) {
    for (const auto& p : kPresets)
        if (name == p.name) return p.blurb;
    throw ConfigError("unknown preset '" + name + "'");
}

json config_json(const std::string& name) {
    for (const auto& p : kPresets)
        if (name == p.name) return json::parse(p.text);
    throw ConfigError("unknown preset '" + name + "'");
}

} // namespace parobs::presets
