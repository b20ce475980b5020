#include "ema/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "ema/bounds.hpp"

namespace ema {

std::string format_number(double v) {
    if (v == 0.0) {
        return "0";  // also folds -0
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

double parse_number(std::string_view text) {
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw CsvError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

namespace {

void write_row(std::ostream& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) {
            out << ',';
        }
        out << format_number(v);
        first = false;
    }
    out << '\n';
}

// Reads a header line and the numeric rows beneath it.
std::vector<std::vector<double>> read_table(std::istream& in, std::string_view header) {
    std::string line;
    if (!std::getline(in, line)) {
        throw CsvError("missing header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != header) {
        throw CsvError("unexpected header '" + line + "'");
    }
    const std::size_t columns = split_fields(header).size();
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != columns) {
            throw CsvError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(columns) + " fields");
        }
        std::vector<double> row;
        row.reserve(columns);
        for (auto f : fields) {
            try {
                row.push_back(parse_number(f));
            } catch (const CsvError& e) {
                throw CsvError("line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << kTrajectoryHeader << '\n';
    for (const auto& r : traj.records) {
        write_row(out, {r.t, r.x1, r.x2, r.x3, r.u, r.x3d, r.S, r.z1, r.z2, r.V1, r.V2, r.V,
                        r.alpha3});
    }
}

std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& in) {
    std::vector<TrajectoryRecord> out;
    for (const auto& v : read_table(in, kTrajectoryHeader)) {
        TrajectoryRecord r;
        r.t = v[0];
        r.x1 = v[1];
        r.x2 = v[2];
        r.x3 = v[3];
        r.u = v[4];
        r.x3d = v[5];
        r.S = v[6];
        r.z1 = v[7];
        r.z2 = v[8];
        r.V1 = v[9];
        r.V2 = v[10];
        r.V = v[11];
        r.alpha3 = v[12];
        out.push_back(r);
    }
    return out;
}

std::vector<EnvelopeRow> envelope_table(const PlantParams& p, double x1_min, double x1_max,
                                        std::size_t points) {
    std::vector<EnvelopeRow> rows;
    rows.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        double x1 = x1_min;
        if (points > 1) {
            x1 = i + 1 == points ? x1_max
                                 : x1_min + (x1_max - x1_min) * static_cast<double>(i) /
                                                static_cast<double>(points - 1);
        }
        const EnvelopeTriple rho = rho_bounds(x1, p);
        const EnvelopeTriple L = inductance_bounds(x1, p);
        const EnvelopeTriple mu = mu_bounds(x1, p);
        rows.push_back({x1, rho.lower, rho.upper, L.lower, L.upper, mu.lower, mu.upper});
    }
    return rows;
}

void write_bounds_csv(std::ostream& out, const std::vector<EnvelopeRow>& rows) {
    out << kBoundsHeader << '\n';
    for (const auto& r : rows) {
        write_row(out, {r.x1, r.rho_lo, r.rho_hi, r.L_lo, r.L_hi, r.mu_lo, r.mu_hi});
    }
}

std::vector<EnvelopeRow> read_bounds_csv(std::istream& in) {
    std::vector<EnvelopeRow> out;
    for (const auto& v : read_table(in, kBoundsHeader)) {
        out.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
    }
    return out;
}

}  // namespace ema
