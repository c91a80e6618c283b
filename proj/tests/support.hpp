#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "qhm/evolution.hpp"
#include "qhm/scenario.hpp"

namespace qhm::testing {

inline constexpr double kPi = std::numbers::pi;

struct AMScenarioSpec {
    std::string r = "1 + 0.1*sin(t)";
    std::string beta = "0.3*t";
    std::string Z = "pi/2 + 0.2*sin(t)";
    double t1 = 10.0;
    int steps = 10000;
    std::string extra;  // appended verbatim to the [evolution] section
};

inline std::string am_scenario_text(const AMScenarioSpec& s) {
    return "[model]\nbuiltin = am\nr = " + s.r + "\nbeta = " + s.beta + "\n\n[metric]\nmode = closed_form_Z\nZ = " +
           s.Z + "\n\n[evolution]\nt0 = 0\nt1 = " + std::to_string(s.t1) + "\nsteps = " + std::to_string(s.steps) +
           "\ninitial_ket = (1, 0), (0, 0)\n" + s.extra + "\n[output]\nquantities = norm, generator_gap, consistency\n";
}

inline TimeDependentScenario am_scenario(const AMScenarioSpec& s = {}) {
    return build_scenario(parse_scenario(am_scenario_text(s)));
}

/// The scenario with every time dependence frozen at its t = 0 value.
inline TimeDependentScenario frozen_am_scenario(int steps = 10000) {
    AMScenarioSpec s;
    s.r = "1";
    s.beta = "0";
    s.Z = "pi/2";
    s.steps = steps;
    return am_scenario(s);
}

template <class A, class B>
double max_abs_diff(const A& a, const B& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace qhm::testing
