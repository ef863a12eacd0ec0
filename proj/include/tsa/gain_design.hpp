#pragma once

#include <limits>
#include <utility>

namespace tsa {

inline constexpr double kGolden = 1.6180339887498948482;

struct CurvatureParams {
    double C = 1.0;
    double L = 1.0;
    double R() const { return L / C; }
};

struct SlackDomain {
    double lower = 0.0;  // exclusive
    double upper = std::numeric_limits<double>::infinity();  // inclusive when finite
    bool contains(double q) const { return q > lower && q <= upper; }
};

// admissible values of the product a * L
struct GainRegion {
    double lo = 0.0, hi = 0.0;
    bool lo_inclusive = false, hi_inclusive = false;
    bool contains(double aL) const {
        bool ok_lo = lo_inclusive ? aL >= lo : aL > lo;
        bool ok_hi = hi_inclusive ? aL <= hi : aL < hi;
        return ok_lo && ok_hi;
    }
    double midpoint() const { return 0.5 * (lo + hi); }
};

struct StepCoefficients {
    double u = 0.0;
    double v = 0.0;
};

enum class GainPolicy { Mix, Midpoint, Explicit };

struct GainChoice {
    double q = 0.0;
    double a = 0.0;
};

// R is treated as exactly 1 inside this relative tolerance on L - C
bool unit_ratio(double C, double L);

double q_upper(double R);
double q_lower(double R);
SlackDomain slack_domain(double R);
std::pair<double, double> multiplier_bounds(double R, double q);
GainRegion gain_region(double R, double q);
StepCoefficients step_coefficients(double C, double L, double q, double a);

// default slack used by the mix and midpoint policies
double default_slack(double C, double L);

GainChoice select_gain(double C, double L, GainPolicy policy, double q_explicit = 0.0, double a_explicit = 0.0);

}  // namespace tsa
