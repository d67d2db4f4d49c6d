#include "ddqkd/security.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddqkd {
namespace {

constexpr double kPlanck = 6.62607015e-34;
constexpr double kLight = 299792458.0;
constexpr double kCharge = 1.602176634e-19;
constexpr double kDiscriminantTol = 1e-9;

// Larger and smaller root of x^2 - s x + p = 0, as sqrt for eigenvalues.
std::array<double, 2> pair_from(double s, double p, const char* what) {
    double disc = s * s - 4.0 * p;
    if (disc < 0.0) {
        if (disc < -kDiscriminantTol * std::max(1.0, s * s)) {
            throw std::domain_error(fmt::format("{}: negative discriminant {}", what, disc));
        }
        disc = 0.0;
    }
    const double r = std::sqrt(disc);
    const double hi = 0.5 * (s + r);
    // Smaller root via the product avoids cancellation.
    const double lo = hi > 0.0 ? p / hi : 0.0;
    return {std::sqrt(hi), std::sqrt(std::max(lo, 0.0))};
}

}  // namespace

std::string to_string(Detection d) {
    switch (d) {
        case Detection::homodyne: return "hom";
        case Detection::heterodyne: return "het";
        case Detection::direct: return "dd";
    }
    return "?";
}

Detection parse_detection(const std::string& s) {
    if (s == "hom" || s == "homodyne") return Detection::homodyne;
    if (s == "het" || s == "heterodyne") return Detection::heterodyne;
    if (s == "dd" || s == "direct") return Detection::direct;
    throw std::invalid_argument("unknown detection `" + s + "` (hom, het, dd)");
}

void SecurityParams::validate() const {
    if (!(v_a >= 0.0)) throw std::invalid_argument("security: v_a must be >= 0");
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("security: T must lie in (0, 1]");
    if (!(eps >= 0.0)) throw std::invalid_argument("security: eps must be >= 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("security: eta must lie in (0, 1]");
    if (!(v_el >= 0.0)) throw std::invalid_argument("security: v_el must be >= 0");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("security: beta must lie in [0, 1]");
    if (!(f_rep > 0.0)) throw std::invalid_argument("security: f_rep must be > 0");
}

void FiniteSizeParams::validate() const {
    if (!(n_key > 0.0 && n_key < n_total)) throw std::invalid_argument("finite size: need 0 < n < N (m = N - n > 0)");
    for (double e : {eps_smooth, eps_pa, eps_pe}) {
        if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("finite size: epsilons must lie in (0, 1)");
    }
}

ChiValues chi_values(const SecurityParams& p) {
    if (p.t == 0.0) throw std::invalid_argument("chi_values: T = 0");
    ChiValues c;
    c.chi_line = 1.0 / p.t - 1.0 + p.eps;
    if (p.heterodyne_like()) {
        c.chi_det = (1.0 + (1.0 - p.eta) + 2.0 * p.v_el) / p.eta;
    } else {
        c.chi_det = ((1.0 - p.eta) + p.v_el) / p.eta;
    }
    c.chi_tot = c.chi_line + c.chi_det / p.t;
    return c;
}

double mutual_information(const SecurityParams& p) {
    const double chi_tot = chi_values(p).chi_tot;
    const double full = std::log2((p.v() + chi_tot) / (1.0 + chi_tot));
    return p.heterodyne_like() ? full : 0.5 * full;
}

double g_entropy(double x) {
    if (x < 0.0) {
        if (x > -1e-12) return 0.0;
        throw std::domain_error(fmt::format("g_entropy: negative argument {}", x));
    }
    if (x == 0.0) return 0.0;
    return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

ChannelCoefficients channel_coefficients(const SecurityParams& p) {
    const double v = p.v();
    const double chi_line = chi_values(p).chi_line;
    ChannelCoefficients c;
    c.a = v * v * (1.0 - 2.0 * p.t) + 2.0 * p.t + p.t * p.t * (v + chi_line) * (v + chi_line);
    c.b = p.t * p.t * (v * chi_line + 1.0) * (v * chi_line + 1.0);
    return c;
}

ConditionalCoefficients conditional_coefficients(const SecurityParams& p) {
    const double v = p.v();
    const ChiValues chi = chi_values(p);
    const ChannelCoefficients ab = channel_coefficients(p);
    const double sb = std::sqrt(ab.b);
    const double denom = p.t * (v + chi.chi_tot);
    ConditionalCoefficients c;
    if (p.heterodyne_like()) {
        const double x = chi.chi_det;
        c.c = (ab.a * x * x + ab.b + 1.0 + 2.0 * x * (v * sb + p.t * (v + chi.chi_line)) + 2.0 * p.t * (v * v - 1.0)) /
              (denom * denom);
        const double r = (v + sb * x) / denom;
        c.d = r * r;
    } else {
        const double x = chi.chi_det;
        c.c = (v * sb + p.t * (v + chi.chi_line) + ab.a * x) / denom;
        c.d = sb * (v + sb * x) / denom;
    }
    return c;
}

std::array<double, 2> symplectic_channel(const SecurityParams& p) {
    const auto ab = channel_coefficients(p);
    return pair_from(ab.a, ab.b, "symplectic_channel");
}

std::array<double, 3> symplectic_conditional(const SecurityParams& p) {
    const auto cd = conditional_coefficients(p);
    const auto l = pair_from(cd.c, cd.d, "symplectic_conditional");
    return {l[0], l[1], 1.0};
}

double holevo_bound(const SecurityParams& p) {
    const auto l12 = symplectic_channel(p);
    const auto l345 = symplectic_conditional(p);
    double s = 0.0;
    for (double l : l12) s += g_entropy(0.5 * (l - 1.0));
    for (double l : l345) s -= g_entropy(0.5 * (l - 1.0));
    return s;
}

SkrResult skr_asymptotic(const SecurityParams& p) {
    p.validate();
    SkrResult r;
    r.chi = chi_values(p);
    r.i_ab = mutual_information(p);
    const auto l12 = symplectic_channel(p);
    const auto l345 = symplectic_conditional(p);
    r.lambdas = {l12[0], l12[1], l345[0], l345[1], l345[2]};
    r.chi_be = holevo_bound(p);
    r.skr_bps = p.f_rep * (p.beta * r.i_ab - r.chi_be);
    r.skr_clipped_bps = std::max(r.skr_bps, 0.0);
    return r;
}

double confidence_z(double eps_pe) {
    if (!(eps_pe > 0.0 && eps_pe < 1.0)) throw std::invalid_argument("confidence_z: eps_pe outside (0, 1)");
    return std::sqrt(2.0) * boost::math::erfc_inv(eps_pe);
}

double delta_n(const FiniteSizeParams& fs) {
    return 7.0 * std::sqrt(std::log2(1.0 / fs.eps_smooth) / fs.n_key) + 2.0 / fs.n_key * std::log2(1.0 / fs.eps_pa);
}

FiniteSizeTerms finite_size_terms(const SecurityParams& p, const FiniteSizeParams& fs) {
    fs.validate();
    FiniteSizeTerms t;
    t.z = confidence_z(fs.eps_pe);
    t.delta_n = delta_n(fs);
    const double m = fs.m();
    const double sigma2 = p.eta * p.t * p.eps + 1.0 + p.v_el;
    const double d_t = t.z * std::sqrt(sigma2 / (m * p.v_a));
    const double d_sigma2 = t.z * sigma2 * std::sqrt(2.0) / std::sqrt(m);
    const double root = std::sqrt(p.eta * p.t) - d_t;
    if (root <= 0.0) throw std::domain_error("finite size: confidence interval swallows the transmittance");
    t.t_min = root * root / p.eta;
    t.eps_max = (sigma2 + d_sigma2 - 1.0 - p.v_el) / (p.eta * p.t);
    return t;
}

SkrResult skr_finite_size(const SecurityParams& p, const FiniteSizeParams& fs) {
    p.validate();
    const FiniteSizeTerms terms = finite_size_terms(p, fs);
    SecurityParams worst = p;
    worst.t = terms.t_min;
    worst.eps = terms.eps_max;
    SkrResult r = skr_asymptotic(worst);
    r.skr_bps = p.f_rep * (fs.n_key / fs.n_total) * (p.beta * r.i_ab - r.chi_be - terms.delta_n);
    r.skr_clipped_bps = std::max(r.skr_bps, 0.0);
    r.finite_size = terms;
    return r;
}

double quantum_efficiency_from_responsivity(double re, double wavelength) {
    if (!(re > 0.0) || !(wavelength > 0.0)) {
        throw std::invalid_argument("quantum_efficiency_from_responsivity: inputs must be > 0");
    }
    const double eta = kPlanck * kLight / kCharge * re / wavelength;
    if (eta > 1.0 + 1e-12) {
        throw std::domain_error(fmt::format("responsivity {} A/W at {} m gives unphysical eta = {}", re, wavelength, eta));
    }
    return eta;
}

}  // namespace ddqkd
