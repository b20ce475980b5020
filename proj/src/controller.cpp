#include "ema/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ema {

void validate(const ControllerGains& g) {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + " must be positive");
        }
    };
    positive(g.alpha1, "alpha1");
    positive(g.alpha2, "alpha2");
    positive(g.epsilon1, "epsilon1");
    if (!(g.theta > 0.0 && g.theta < 1.0)) {
        throw std::invalid_argument("theta must lie in (0, 1)");
    }
}

void validate(const ControllerOptions& o) {
    if (!(o.filter_time_constant > 0.0) || !std::isfinite(o.filter_time_constant)) {
        throw std::invalid_argument("filter time constant must be positive");
    }
    if (!(o.boundary_layer >= 0.0) || !std::isfinite(o.boundary_layer)) {
        throw std::invalid_argument("boundary layer width must be non-negative");
    }
}

GainCertificate certify_gains(const ControllerGains& g, const PlantParams& p, double y_r_max) {
    if (!std::isfinite(g.alpha1) || !std::isfinite(g.alpha2) || !std::isfinite(g.theta) ||
        !std::isfinite(y_r_max)) {
        throw std::invalid_argument("certify_gains: non-finite input");
    }
    GainCertificate c;
    const double lm = p.friction / p.mass;
    const double km = p.stiffness / p.mass;
    c.a = 1.0 - g.alpha1 * g.alpha1 + lm * g.alpha1 - km;
    c.b = g.alpha1 - lm;
    c.q = {-g.alpha1, 0.5 * c.a, c.b - g.alpha2};

    const double mean = 0.5 * (c.q.xx + c.q.yy);
    const double radius = std::hypot(0.5 * (c.q.xx - c.q.yy), c.q.xy);
    const double det = c.q.determinant();
    double lo = mean - radius;
    double hi = mean + radius;
    // Recover the eigenvalue nearer zero from the product to avoid cancellation.
    if (mean < 0.0 && lo != 0.0) {
        hi = det / lo;
    } else if (mean > 0.0 && hi != 0.0) {
        lo = det / hi;
    }
    c.eigenvalues = {lo, hi};

    c.negative_definite = c.q.xx < 0.0 && det > 0.0;
    c.alpha2_exceeds_b = g.alpha2 > std::abs(c.b);
    c.certified = c.negative_definite && c.alpha2_exceeds_b;

    c.alpha = std::min(std::abs(lo), std::abs(hi));
    c.alpha_literal = std::abs(lo);
    c.delta = km * std::abs(y_r_max);
    if (c.negative_definite && g.theta > 0.0) {
        c.radius = c.delta / (c.alpha * g.theta);
        c.radius_literal = c.delta / (c.alpha_literal * g.theta);
    } else {
        c.radius = std::numeric_limits<double>::infinity();
        c.radius_literal = std::numeric_limits<double>::infinity();
    }
    return c;
}

ErrorCoords error_coords(const State& s, double y_r, const ControllerGains& g) {
    ErrorCoords z;
    z.z1 = s.x1 - y_r;
    z.z2 = s.x2 + g.alpha1 * z.z1;
    return z;
}

double mu_lower_argument(double x1, double y_r, MuArgument arg) {
    return arg == MuArgument::Position ? x1 : x1 + y_r;
}

double virtual_current(double z2, double x1, double y_r, const ControllerGains& g,
                       const PlantParams& p, MuArgument arg) {
    const double mu_lo = mu_bounds(mu_lower_argument(x1, y_r, arg), p).lower;
    const double demand = -(2.0 * p.mass / mu_lo) * g.alpha2 * z2;
    return demand > 0.0 ? std::sqrt(demand) : 0.0;
}

double virtual_current_derivative(const State& s, const ErrorCoords& z, double y_r,
                                  double y_r_dot, const ControllerGains& g, const PlantParams& p,
                                  MuArgument arg) {
    if (!(z.x3d > 0.0)) {
        return 0.0;
    }
    const double xi = mu_lower_argument(s.x1, y_r, arg);
    const double xi_dot = arg == MuArgument::Position ? s.x2 : s.x2 + y_r_dot;
    const double mu_lo = mu_bounds(xi, p).lower;
    const double dmu_lo = mu_lower_slope(xi, p) * xi_dot;

    const double x3d_sq = z.x3d * z.x3d;
    const double z1_dot = s.x2 - y_r_dot;
    // Outer-loop model with mu -> mu_lower and x3 -> x3d.
    const double x2_dot = (0.5 * x3d_sq * mu_lo + external_force(s.x1, s.x2, p)) / p.mass;
    const double z2_dot = x2_dot + g.alpha1 * z1_dot;

    // d/dt [-(2m alpha2) z2 / mu_lo]
    const double c = 2.0 * p.mass * g.alpha2;
    const double demand_dot = -c * (z2_dot / mu_lo - z.z2 * dmu_lo / (mu_lo * mu_lo));
    return demand_dot / (2.0 * z.x3d);
}

double sliding_gain(const State& s, const ErrorCoords& z, const ControllerGains& g,
                    const PlantParams& p) {
    const double mu_hi = mu_bounds(s.x1, p).upper;
    const double l_hi = inductance_bounds(s.x1, p).upper;
    const double eps = (2.0 / p.mass) * std::abs(s.x3 + z.x3d) * mu_hi + g.epsilon1;
    return p.resistance * std::abs(z.x3d) +
           std::abs((z.z2 - g.alpha1 * z.z1) * (z.S + z.x3d)) * mu_hi +
           std::abs(z.x3d_dot) * l_hi + eps;
}

double control_voltage(double S, double alpha3, double boundary_layer) {
    if (boundary_layer > 0.0) {
        return -alpha3 * std::clamp(S / boundary_layer, -1.0, 1.0);
    }
    const double sign = static_cast<double>((S > 0.0) - (S < 0.0));
    return -alpha3 * sign;
}

CompositeController::CompositeController(ControllerGains gains, ControllerOptions options,
                                         PlantParams model)
    : gains_(gains), options_(options), model_(std::move(model)) {
    validate(gains_);
    validate(options_);
}

ControlOutput CompositeController::update(const State& s, double y_r, double y_r_dot,
                                          double dt) {
    ControlOutput out;
    ErrorCoords& z = out.coords;
    z = error_coords(s, y_r, gains_);
    z.x3d = virtual_current(z.z2, s.x1, y_r, gains_, model_, options_.mu_argument);
    z.S = s.x3 - z.x3d;

    if (options_.derivative_mode == DerivativeMode::Analytic) {
        z.x3d_dot =
            virtual_current_derivative(s, z, y_r, y_r_dot, gains_, model_, options_.mu_argument);
    } else {
        if (!filter_primed_ || !(dt > 0.0)) {
            filtered_rate_ = 0.0;
            filter_primed_ = true;
        } else {
            const double raw = (z.x3d - previous_x3d_) / dt;
            filtered_rate_ += dt / (options_.filter_time_constant + dt) * (raw - filtered_rate_);
        }
        previous_x3d_ = z.x3d;
        z.x3d_dot = filtered_rate_;
    }

    out.alpha3 = sliding_gain(s, z, gains_, model_);
    out.u = control_voltage(z.S, out.alpha3, options_.boundary_layer);
    return out;
}

}  // namespace ema
