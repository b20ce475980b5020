// Locale-independent CSV export of trajectories, envelopes and sweep rows.
//
// Numbers are written in the shortest form that parses back to the same
// double (std::to_chars), so a write/read round trip is exact.
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ema/model.hpp"
#include "ema/sim.hpp"

namespace ema {

inline constexpr std::string_view kTrajectoryHeader = "t,x1,x2,x3,u,x3d,S,z1,z2,V1,V2,V,alpha3";
inline constexpr std::string_view kBoundsHeader = "x1,rho_lo,rho_hi,L_lo,L_hi,mu_lo,mu_hi";

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] std::string format_number(double v);

/// Parses one number written by format_number (or any plain decimal /
/// exponent form). Throws CsvError.
[[nodiscard]] double parse_number(std::string_view text);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Reads the 13 exported channels back. Fields that are not exported stay at
/// their defaults. Throws CsvError on a wrong header or malformed row.
[[nodiscard]] std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& in);

struct EnvelopeRow {
    double x1 = 0.0;
    double rho_lo = 0.0;
    double rho_hi = 0.0;
    double L_lo = 0.0;
    double L_hi = 0.0;
    double mu_lo = 0.0;
    double mu_hi = 0.0;
};

/// Envelopes at `points` evenly spaced positions in [x1_min, x1_max].
[[nodiscard]] std::vector<EnvelopeRow> envelope_table(const PlantParams& p, double x1_min,
                                                      double x1_max, std::size_t points);

void write_bounds_csv(std::ostream& out, const std::vector<EnvelopeRow>& rows);
[[nodiscard]] std::vector<EnvelopeRow> read_bounds_csv(std::istream& in);

/// Splits one CSV line on commas (no quoting; none of our fields need it).
[[nodiscard]] std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace ema
