#include "spinbath/observables.hpp"

#include <cstdio>
#include <stdexcept>

namespace spinbath::obs {

void write_csv_row(std::ostream& out, const std::vector<double>& values) {
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
        if (i) out << ',';
        out << buf;
    }
    out << '\n';
}

void TimeSeries::write_csv(std::ostream& out) const {
    for (const auto& [name, col] : columns)
        if (col.size() != times.size())
            throw std::runtime_error("TimeSeries: column '" + name +
                                     "' length does not match times");
    out << "t";
    for (const auto& [name, col] : columns) out << ',' << name;
    out << '\n';
    std::vector<double> row(1 + columns.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        row[0] = times[i];
        for (std::size_t c = 0; c < columns.size(); ++c)
            row[1 + c] = columns[c].second[i];
        write_csv_row(out, row);
    }
}

}  // namespace spinbath::obs
