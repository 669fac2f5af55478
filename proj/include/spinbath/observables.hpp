// observables.hpp — Scalar diagnostics on reduced states and the sampled
// time-series container behind all CSV output.

#pragma once

#include "spinbath/qubit.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace spinbath::obs {

inline double sigma_z_expectation(const QubitOp& rho) {
    return (ops::sigma_z() * rho).trace().real();
}

// D(rho_a, rho_b) = (1/2)||rho_a - rho_b||_1
inline double trace_distance(const QubitOp& rho_a, const QubitOp& rho_b) {
    return ops::trace_norm_half(rho_a - rho_b);
}

// Deviation of rho from the target excited state |1><1|:
// sqrt((1 - rho11)^2 + |rho12|^2). Coincides with trace_distance(rho, |1><1|).
inline double preparation_error(const QubitOp& rho) {
    const double p = rho(0, 0).real();
    return std::sqrt((1.0 - p) * (1.0 - p) + std::norm(rho(0, 1)));
}

// Excited-state population <1|rho|1>.
inline double fidelity_excited(const QubitOp& rho) {
    return rho(0, 0).real();
}

// Named real columns over a strictly increasing time grid.
struct TimeSeries {
    std::vector<double> times;
    std::vector<std::pair<std::string, std::vector<double>>> columns;

    std::vector<double>& add_column(const std::string& name) {
        columns.emplace_back(name, std::vector<double>{});
        columns.back().second.reserve(times.size());
        return columns.back().second;
    }

    const std::vector<double>* find(const std::string& name) const {
        for (const auto& [n, col] : columns)
            if (n == name) return &col;
        return nullptr;
    }

    void write_csv(std::ostream& out) const;
};

void write_csv_row(std::ostream& out, const std::vector<double>& values);

}  // namespace spinbath::obs
