#pragma once

#include <stdexcept>
#include <string>

namespace bd {

// Error taxonomy mirrored by the CLI exit codes:
//   input_error -> 1, domain_error -> 2, numeric_error -> 3.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& m) : std::runtime_error(m) {}
};
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& m) : std::runtime_error(m) {}
};
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& m) : std::runtime_error(m) {}
};

// Tunable tolerances. Every numeric threshold used by the library lives here
// so the CLI can surface them as flags.
struct Tol {
    double root = 1e-8;          // root clustering / point identity (chordal)
    double cluster_seed = 1e-6;  // initial linkage radius for multiplicity detection
    double verify = 1e-7;        // relative residual bound for multiplicity verification
    double trim = 1e-12;         // relative coefficient trim (roots at 0/infinity)
    double div = 1e-6;           // relative residual allowed by divide_exact
    double sigma = 1e-8;         // fixed-point multiplier relation sigma3 = sigma1 - 2
    double tau = 1e-6;           // agreement of the two tau^2 labelings
    double bc = 1e-10;           // |E| target for barycenter normalization
    double atom = 1e-6;          // guard band around the 1/2 atom obstruction
    double mass = 1e-9;          // floating measure normalization slack
    double cap = 0.05;           // weak_distance cap radius (chordal on S^2)
    int max_degree = 4096;       // degree budget for materialized iterates
    int max_bc_iter = 20000;     // barycenter iteration cap
};

inline const Tol& default_tol() {
    static const Tol t{};
    return t;
}

}  // namespace bd
