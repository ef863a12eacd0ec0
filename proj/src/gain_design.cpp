#include "tsa/gain_design.hpp"

#include <cmath>
#include <string>

#include "tsa/errors.hpp"

namespace tsa {

namespace {

constexpr double kUnitTol = 1e-9;

bool is_unit(double R) { return std::abs(R - 1.0) <= kUnitTol * R; }

void check_ratio(double R) {
    if (!(R >= 1.0) && !is_unit(R)) throw InvalidCurvature("curvature ratio R = L/C must be >= 1, got " + std::to_string(R));
}

}  // namespace

bool unit_ratio(double C, double L) { return std::abs(L - C) <= kUnitTol * L; }

double q_upper(double R) {
    check_ratio(R);
    if (is_unit(R)) return 0.0;
    double r2 = R * R - 1.0;
    return 2.0 * r2 + 2.0 * R * std::sqrt(r2);
}

double q_lower(double R) {
    check_ratio(R);
    double s = R * R - R - 1.0;
    if (R <= kGolden || s <= 0.0) return 0.0;
    return 2.0 * s + 2.0 * std::sqrt(R * (R - 1.0) * s);
}

SlackDomain slack_domain(double R) {
    check_ratio(R);
    SlackDomain d;
    if (is_unit(R)) return d;
    d.upper = q_upper(R);
    d.lower = R > kGolden ? q_lower(R) : 0.0;
    return d;
}

std::pair<double, double> multiplier_bounds(double R, double q) {
    check_ratio(R);
    double t = 1.0 + R - R * R;
    if (is_unit(R)) t = 1.0;
    double disc = q * q + 4.0 * t * q + 4.0 * t;
    if (disc < 0.0) {
        // rounding at q = q_upper can leave a vanishing negative residue
        if (disc > -1e-9 * (q * q + 1.0))
            disc = 0.0;
        else
            throw DomainViolation("multiplier bounds: negative discriminant for q = " + std::to_string(q));
    }
    double s = std::sqrt(disc);
    double den = 2.0 * (q + 1.0);
    double lo = (q + 2.0 - s) / den;
    if (is_unit(R)) lo = 0.0;
    return {lo, (q + 2.0 + s) / den};
}

GainRegion gain_region(double R, double q) {
    SlackDomain dom = slack_domain(R);
    if (!dom.contains(q)) throw DomainViolation("slack q = " + std::to_string(q) + " outside its admissible domain");
    GainRegion g;
    if (is_unit(R)) {
        g.lo = 1.0;
        g.hi = 1.0 + 1.0 / (q + 1.0);
        g.lo_inclusive = true;
        return g;
    }
    auto [mm, mp] = multiplier_bounds(R, q);
    if (R <= kGolden) {
        g.lo = 1.0 / (q + 1.0);
        g.lo_inclusive = true;
        g.hi = mp;
    } else {
        g.lo = mm;
        g.hi = mp;
    }
    return g;
}

StepCoefficients step_coefficients(double C, double L, double q, double a) {
    if (!(C > 0.0) || !(L > 0.0)) throw InvalidCurvature("C and L must be positive");
    double R = unit_ratio(C, L) ? 1.0 : L / C;
    GainRegion g = gain_region(R, q);
    double aL = a * L;
    if (!g.contains(aL))
        throw RegionViolation("gain a*L = " + std::to_string(aL) + " outside (" + std::to_string(g.lo) + ", " +
                                  std::to_string(g.hi) + ")",
                              g.lo, g.hi);
    StepCoefficients s;
    s.u = L / C + a * C * ((q + 1.0) * (aL - 1.0) - 1.0);
    s.v = a * (aL * (q + 1.0) - 1.0) / (q * C);
    if (s.u < 0.0 && s.u > -1e-12) s.u = 0.0;
    if (s.v < 0.0 && s.v > -1e-15) s.v = 0.0;
    return s;
}

double default_slack(double C, double L) {
    if (unit_ratio(C, L)) return 2.5;
    double R = L / C;
    double q1 = q_upper(R);
    if (R <= kGolden) return 0.4 * q1;
    return 0.4 * q1 + 0.6 * q_lower(R);
}

GainChoice select_gain(double C, double L, GainPolicy policy, double q_explicit, double a_explicit) {
    if (!(C > 0.0) || !(L > 0.0)) throw InvalidCurvature("C and L must be positive");
    double R = unit_ratio(C, L) ? 1.0 : L / C;
    check_ratio(R);
    GainChoice out;
    switch (policy) {
        case GainPolicy::Mix: {
            out.q = default_slack(C, L);
            GainRegion g = gain_region(R, out.q);
            out.a = (R == 1.0 ? 1.15 : 0.5) / L;
            if (!g.contains(out.a * L)) out.a = g.midpoint() / L;
            break;
        }
        case GainPolicy::Midpoint: {
            out.q = q_explicit > 0.0 ? q_explicit : default_slack(C, L);
            out.a = gain_region(R, out.q).midpoint() / L;
            break;
        }
        case GainPolicy::Explicit: {
            GainRegion g = gain_region(R, q_explicit);
            if (!g.contains(a_explicit * L))
                throw RegionViolation("explicit gain outside admissible region", g.lo, g.hi);
            out.q = q_explicit;
            out.a = a_explicit;
            break;
        }
    }
    return out;
}

}  // namespace tsa
